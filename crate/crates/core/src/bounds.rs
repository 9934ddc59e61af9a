//! Cap fractions, covering-number estimates and the composite illumination
//! bounds compared against `2^d`.
//!
//! `omega(m, a)` is the normalized surface measure of a cap of angular radius
//! `a` on S^m:
//!
//! ```text
//! omega(m, a) = int_0^a sin^{m-1} t dt / int_0^pi sin^{m-1} t dt
//! ```
//!
//! The covering estimate is
//! `N_{S^m}(a) <= (1/omega) (1/2 + 2 ln ln m / ln m + 5 / ln m) m ln m` for
//! `m >= 3`, evaluated either with the quadrature value of `omega` or with the
//! lower bound `sin^m(a) / sqrt(2 pi (m + 1))`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

const QUAD_REL_TOL: f64 = 1e-13;
const QUAD_MAX_DEPTH: u32 = 48;
const SCAN_LIMIT: usize = 400;
const MONOTONE_WINDOW: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaVariant {
    /// Adaptive quadrature.
    Exact,
    /// `sin^m(a) / sqrt(2 pi (m + 1))`.
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Spiky,
    Capbody,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) + adapt(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

/// Adaptive Simpson with tolerance relative to a coarse composite estimate,
/// so tiny integrals (large `m`, small `a`) keep full relative accuracy.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let panels = 64;
    let h = (b - a) / panels as f64;
    let coarse: f64 = (0..panels)
        .map(|k| {
            let (x0, x1) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            simpson(x0, x1, f(x0), f(0.5 * (x0 + x1)), f(x1))
        })
        .sum();
    let eps = QUAD_REL_TOL * coarse.abs().max(f64::MIN_POSITIVE);
    (0..panels)
        .map(|k| {
            let (x0, x1) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            adapt(f, x0, x1, f0, fm, f1, simpson(x0, x1, f0, fm, f1), eps / panels as f64, QUAD_MAX_DEPTH)
        })
        .sum()
}

/// `int_0^pi sin^n t dt` by the Wallis recursion.
fn wallis(n: usize) -> f64 {
    let mut w = if n % 2 == 0 { PI } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        w *= (k - 1) as f64 / k as f64;
        k += 2;
    }
    w
}

fn check_args(m: usize, alpha: f64) -> Result<()> {
    if m < 1 {
        return Err(Error::Invalid("sphere dimension must be >= 1".into()));
    }
    if !(alpha > 0.0 && alpha <= PI / 2.0) {
        return Err(Error::Invalid(format!("cap radius {alpha} not in (0, pi/2]")));
    }
    Ok(())
}

/// Fraction of S^m covered by a closed cap of radius `alpha`.
pub fn omega(m: usize, alpha: f64) -> Result<f64> {
    check_args(m, alpha)?;
    let n = (m - 1) as i32;
    let num = integrate(&|t: f64| t.sin().powi(n), 0.0, alpha);
    Ok(num / wallis(m - 1))
}

pub fn omega_lower_bound(m: usize, alpha: f64) -> Result<f64> {
    check_args(m, alpha)?;
    Ok(alpha.sin().powi(m as i32) / (2.0 * PI * (m as f64 + 1.0)).sqrt())
}

/// Covering-number estimate for S^m at radius `alpha`, `m >= 3`.
pub fn dumer_bound(m: usize, alpha: f64, variant: OmegaVariant) -> Result<f64> {
    if m < 3 {
        return Err(Error::Invalid(format!("covering estimate needs m >= 3, got {m}")));
    }
    let om = match variant {
        OmegaVariant::Exact => omega(m, alpha)?,
        OmegaVariant::LowerBound => omega_lower_bound(m, alpha)?,
    };
    let mf = m as f64;
    let ln = mf.ln();
    Ok((0.5 + 2.0 * ln.ln() / ln + 5.0 / ln) * mf * ln / om)
}

/// `3 + N(S^{d-2}, pi/6)` estimate, lower-bound variant; `d >= 5`.
pub fn spiky_bound(d: usize) -> Result<f64> {
    check_bound_dim(d)?;
    Ok(3.0 + dumer_bound(d - 2, PI / 6.0, OmegaVariant::LowerBound)?)
}

/// `2 + N(S^{d-2}, pi/4)` estimate, lower-bound variant; `d >= 5`.
pub fn capbody_bound(d: usize) -> Result<f64> {
    check_bound_dim(d)?;
    Ok(2.0 + dumer_bound(d - 2, PI / 4.0, OmegaVariant::LowerBound)?)
}

fn check_bound_dim(d: usize) -> Result<()> {
    if d < 5 {
        return Err(Error::Invalid(format!("bounds are defined for d >= 5, got {d}")));
    }
    Ok(())
}

/// `spiky_bound(d) / (2^{d+1} d^{3/2} ln d)`.
pub fn f_ratio(d: usize) -> Result<f64> {
    let df = d as f64;
    Ok(spiky_bound(d)? / (2f64.powi(d as i32 + 1) * df.powf(1.5) * df.ln()))
}

/// `capbody_bound(d) / 2^d`.
pub fn g_ratio(d: usize) -> Result<f64> {
    Ok(capbody_bound(d)? / 2f64.powi(d as i32))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub d: usize,
    pub omega_pi6: f64,
    pub omega_pi4: f64,
    pub dumer_pi6: f64,
    pub dumer_pi4: f64,
    pub spiky_bound: f64,
    pub capbody_bound: f64,
    pub two_pow_d: f64,
    pub f_ratio: f64,
    pub g_ratio: f64,
}

/// One row per `d` in `d_min..=d_max` (`d_min >= 5`). Omega columns are
/// quadrature values on S^{d-2}; covering columns use the lower-bound variant.
pub fn ratio_curves(d_min: usize, d_max: usize) -> Result<Vec<BoundsRow>> {
    check_bound_dim(d_min)?;
    if d_max < d_min {
        return Err(Error::Invalid(format!("empty range {d_min}..={d_max}")));
    }
    (d_min..=d_max)
        .map(|d| {
            let m = d - 2;
            Ok(BoundsRow {
                d,
                omega_pi6: omega(m, PI / 6.0)?,
                omega_pi4: omega(m, PI / 4.0)?,
                dumer_pi6: dumer_bound(m, PI / 6.0, OmegaVariant::LowerBound)?,
                dumer_pi4: dumer_bound(m, PI / 4.0, OmegaVariant::LowerBound)?,
                spiky_bound: spiky_bound(d)?,
                capbody_bound: capbody_bound(d)?,
                two_pow_d: 2f64.powi(d as i32),
                f_ratio: f_ratio(d)?,
                g_ratio: g_ratio(d)?,
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "d,omega_pi6,omega_pi4,dumer_pi6,dumer_pi4,spiky_bound,capbody_bound,f_ratio,g_ratio";

/// CSV with 17 significant digits per real.
pub fn to_csv(rows: &[BoundsRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.d, r.omega_pi6, r.omega_pi4, r.dumer_pi6, r.dumer_pi4, r.spiky_bound, r.capbody_bound, r.f_ratio, r.g_ratio
        ));
    }
    out
}

pub fn ratio(kind: BoundKind, d: usize) -> Result<f64> {
    match kind {
        BoundKind::Spiky => f_ratio(d),
        BoundKind::Capbody => g_ratio(d),
    }
}

/// Smallest `d >= 5` from which the ratio stays below 1.
///
/// The tail is certified by monotonicity: `T` is the first dimension where
/// the ratio strictly decreases over `[T, T + 200]`, and the result is the
/// smallest `d` with ratio < 1 on all of `[d, T + 200]`.
pub fn threshold_scan(kind: BoundKind) -> Result<usize> {
    let values: Vec<f64> = (5..=SCAN_LIMIT + MONOTONE_WINDOW)
        .map(|d| ratio(kind, d))
        .collect::<Result<_>>()?;
    let at = |d: usize| values[d - 5];
    let tail = (5..=SCAN_LIMIT)
        .find(|&t| (t..t + MONOTONE_WINDOW).all(|k| at(k + 1) < at(k)))
        .ok_or_else(|| Error::Solver(format!("ratio not monotone on any window below d = {SCAN_LIMIT}")))?;
    let end = tail + MONOTONE_WINDOW;
    if at(end) >= 1.0 {
        return Err(Error::Solver(format!("ratio still >= 1 at d = {end}")));
    }
    let mut d = end;
    while d > 5 && at(d - 1) < 1.0 {
        d -= 1;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn omega_closed_forms() {
        assert_relative_eq!(omega(1, PI / 4.0).unwrap(), 0.25, max_relative = 1e-12);
        assert_relative_eq!(omega(2, PI / 6.0).unwrap(), (1.0 - (PI / 6.0).cos()) / 2.0, max_relative = 1e-12);
        let s3 = (PI / 12.0 - (PI / 3.0).sin() / 4.0) / (PI / 2.0);
        assert_relative_eq!(omega(3, PI / 6.0).unwrap(), s3, max_relative = 1e-12);
        for m in 1..=60 {
            assert!((omega(m, PI / 2.0).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn omega_tiny_values_keep_relative_accuracy() {
        // for large m the integrand is ~ t^{m-1} near 0: omega ~ a^m / (m W)
        let m = 150;
        let a: f64 = 1e-3;
        let approx = a.powi(m as i32) / (m as f64 * wallis(m - 1));
        assert_relative_eq!(omega(m, a).unwrap(), approx, max_relative = 1e-4);
    }

    #[test]
    fn lower_bound_identities() {
        assert_relative_eq!(omega_lower_bound(1, PI / 4.0).unwrap(), (PI / 4.0).sin() / (4.0 * PI).sqrt());
        for d in 5..30usize {
            let lb = omega_lower_bound(d - 2, PI / 6.0).unwrap();
            let paper = 1.0 / (2f64.powi(d as i32 - 2) * (2.0 * PI * (d as f64 - 1.0)).sqrt());
            assert_relative_eq!(lb, paper, max_relative = 1e-12);
        }
    }

    #[test]
    fn dumer_examples() {
        assert!((dumer_bound(3, PI / 6.0, OmegaVariant::Exact).unwrap() - 597.0).abs() < 0.5);
        assert!(dumer_bound(2, PI / 6.0, OmegaVariant::Exact).is_err());
        for m in 3..40 {
            let e = dumer_bound(m, PI / 4.0, OmegaVariant::Exact).unwrap();
            let l = dumer_bound(m, PI / 4.0, OmegaVariant::LowerBound).unwrap();
            assert!(e <= l);
        }
    }

    #[test]
    fn ratio_examples() {
        assert!((spiky_bound(5).unwrap() - 693.4).abs() < 0.2);
        assert!((f_ratio(5).unwrap() - 0.602).abs() < 1e-3);
        assert!((capbody_bound(20).unwrap() - 8.63e5).abs() < 0.01e5);
        assert!((g_ratio(20).unwrap() - 0.823).abs() < 1e-3);
        assert!(g_ratio(19).unwrap() > 1.0);
    }

    #[test]
    fn thresholds() {
        assert_eq!(threshold_scan(BoundKind::Capbody).unwrap(), 20);
        assert_eq!(threshold_scan(BoundKind::Spiky).unwrap(), 5);
    }

    #[test]
    fn csv_shape() {
        let rows = ratio_curves(5, 7).unwrap();
        let csv = to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 9);
        assert!(ratio_curves(4, 7).is_err());
    }
}
