//! Small dense vector helpers over `&[f64]`.
//!
//! Dimensions in this crate are tiny (d rarely exceeds a few dozen), so plain
//! `Vec<f64>` with free functions is enough.

use rand::Rng;
use rand_distr::StandardNormal;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
#[inline]
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

#[inline]
pub fn neg(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| -x).collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Returns `None` for vectors whose norm is below `min_norm`.
pub fn normalized(a: &[f64], min_norm: f64) -> Option<Vec<f64>> {
    let n = norm(a);
    if n <= min_norm || !n.is_finite() {
        return None;
    }
    Some(scale(a, 1.0 / n))
}

pub fn basis(d: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[j] = 1.0;
    e
}

/// Component of `v` orthogonal to the unit vector `axis`.
pub fn reject(v: &[f64], axis: &[f64]) -> Vec<f64> {
    axpy(v, -dot(v, axis), axis)
}

/// Numerical rank of a set of row vectors via Gaussian elimination with
/// partial pivoting. Pivots below `tol * max_abs_entry` count as zero.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let scale_ref = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if scale_ref == 0.0 {
        return 0;
    }
    let threshold = tol * scale_ref;
    let mut rank = 0;
    for c in 0..cols {
        if rank == m.len() {
            break;
        }
        let (piv, best) = (rank..m.len())
            .map(|r| (r, m[r][c].abs()))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= threshold {
            continue;
        }
        m.swap(rank, piv);
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            let f = row[c] / pivot_row[c];
            if f != 0.0 {
                for k in c..cols {
                    row[k] -= f * pivot_row[k];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Uniform random point on S^{d-1}.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = normalized(&v, 1e-12) {
            return u;
        }
    }
}

/// Haar-random orthogonal matrix (rows orthonormal), by Gram–Schmidt on
/// Gaussian rows.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<Vec<f64>> {
    loop {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d);
        for _ in 0..d {
            let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            for r in &rows {
                let c = dot(&v, r);
                v = axpy(&v, -c, r);
            }
            match normalized(&v, 1e-8) {
                Some(u) => rows.push(u),
                None => break,
            }
        }
        if rows.len() == d {
            return rows;
        }
    }
}

pub fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Point at angular distance `angle` from unit `p` in the direction of the
/// unit tangent `t` (orthogonal to `p`).
pub fn geodesic_step(p: &[f64], t: &[f64], angle: f64) -> Vec<f64> {
    let q = axpy(&scale(p, angle.cos()), angle.sin(), t);
    let n = norm(&q);
    scale(&q, 1.0 / n)
}

/// Unit tangent at `p` pointing along the great circle toward `q`.
/// `None` when `q` is (anti)parallel to `p`.
pub fn tangent_toward(p: &[f64], q: &[f64]) -> Option<Vec<f64>> {
    normalized(&reject(q, p), 1e-14)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_detects_dependence() {
        let rows = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]];
        assert_eq!(rank(&rows, 1e-9), 2);
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]];
        assert_eq!(rank(&rows, 1e-9), 2);
        assert_eq!(rank(&[vec![0.0, 0.0]], 1e-9), 0);
    }

    #[test]
    fn rotation_is_orthogonal() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let q = random_rotation(&mut rng, 5);
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&q[i], &q[j]) - expect).abs() < 1e-12);
            }
        }
    }
}
