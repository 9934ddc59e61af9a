use super::{Tolerance, UnitVector};
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{maximize, LpOutcome};

/// Maximizes the smallest coefficient `t` over `sum l_k v_k = 0`,
/// `sum l_k = 1`. Returns `(t, l)` or `None` when no such nonnegative
/// combination exists.
///
/// Variables: `t = t+ - t-` free, `l_k = t + mu_k` with `mu_k >= 0`.
pub fn positive_hull_certificate(vectors: &[UnitVector]) -> Result<Option<(f64, Vec<f64>)>> {
    let Some(first) = vectors.first() else {
        return Err(Error::Invalid("empty vector set".into()));
    };
    let d = first.dim();
    if let Some(bad) = vectors.iter().find(|v| v.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.dim(),
        });
    }
    let n = vectors.len();
    let cols = n + 2;
    let mut a = Vec::with_capacity(d + 1);
    for i in 0..d {
        let mut row = vec![0.0; cols];
        let s: f64 = vectors.iter().map(|v| v.coords()[i]).sum();
        row[0] = s;
        row[1] = -s;
        for (k, v) in vectors.iter().enumerate() {
            row[2 + k] = v.coords()[i];
        }
        a.push(row);
    }
    let mut last = vec![1.0; cols];
    last[0] = n as f64;
    last[1] = -(n as f64);
    a.push(last);
    let mut b = vec![0.0; d + 1];
    b[d] = 1.0;
    let mut c = vec![0.0; cols];
    c[0] = 1.0;
    c[1] = -1.0;
    match maximize(&a, &b, &c)? {
        LpOutcome::Optimal { value, x } => {
            let lambdas = x[2..].iter().map(|mu| value + mu).collect();
            Ok(Some((value, lambdas)))
        }
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Solver("positive-hull LP unbounded".into())),
    }
}

/// True iff the strictly positive combinations of `vectors` fill E^d: the set
/// spans and admits a strictly positive linear dependency.
pub fn positive_hull_full(vectors: &[UnitVector], tol: &Tolerance) -> Result<bool> {
    let Some(cert) = positive_hull_certificate(vectors)? else {
        return Ok(false);
    };
    let d = vectors[0].dim();
    let rows: Vec<Vec<f64>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
    Ok(cert.0 > tol.eps_predicate && linalg::rank(&rows, 1e-9) == d)
}
