//! Dense two-phase simplex for small linear programs.
//!
//! Solves `max c·x` subject to `A x = b`, `x >= 0`. Bland's rule keeps the
//! pivoting finite on degenerate problems; sizes here are a few dozen rows and
//! columns, so a full tableau is fine.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    // rows.len() == m, each row has n + 1 entries (last = rhs)
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost · x` over the current basis, restricted to columns in
    /// `allowed`. Returns false if unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<bool> {
        let max_iter = 50 * (self.n + self.rows.len() + 10);
        for _ in 0..max_iter {
            // reduced costs: c_j - c_B B^{-1} A_j
            let mut entering = None;
            for j in 0..self.n {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j];
                for (i, row) in self.rows.iter().enumerate() {
                    rc -= cost[self.basis[i]] * row[j];
                }
                if rc > PIVOT_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > PIVOT_EPS {
                    let ratio = row[self.n] / a;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-14
                                || ((ratio - lr).abs() <= 1e-14 && self.basis[i] < self.basis[li])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            match leave {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, c),
            }
        }
        Err(Error::Solver("simplex iteration limit reached".into()))
    }
}

/// Maximize `c·x` s.t. `a x = b`, `x >= 0`.
pub fn maximize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpOutcome> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid("inconsistent LP dimensions".into()));
    }
    // Phase I: artificial column per row, rhs made nonnegative.
    let total = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; total + 1];
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = 1.0;
        row[total] = sign * b[i];
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        n: total,
    };
    let mut phase1_cost = vec![0.0; total];
    for v in phase1_cost.iter_mut().skip(n) {
        *v = -1.0;
    }
    let all = vec![true; total];
    t.optimize(&phase1_cost, &all)?;
    let infeas: f64 = t
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &j)| j >= n)
        .map(|(i, _)| t.rows[i][total])
        .sum();
    let bscale = b.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    if infeas > 1e-9 * bscale {
        return Ok(LpOutcome::Infeasible);
    }
    // Drive remaining (zero-level) artificials out of the basis where possible.
    for i in 0..m {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t.rows[i][j].abs() > 1e-9 && !t.basis.contains(&j)) {
                t.pivot(i, j);
            }
        }
    }
    let mut cost = vec![0.0; total];
    cost[..n].copy_from_slice(c);
    let mut allowed = vec![true; total];
    for v in allowed.iter_mut().skip(n) {
        *v = false;
    }
    if !t.optimize(&cost, &allowed)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![0.0; n];
    for (i, &j) in t.basis.iter().enumerate() {
        if j < n {
            x[j] = t.rows[i][total];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpOutcome::Optimal { value, x })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // max x + y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        let b = vec![4.0, 6.0];
        let c = vec![1.0, 1.0, 0.0, 0.0];
        match maximize(&a, &b, &c).unwrap() {
            LpOutcome::Optimal { value, x } => {
                assert!((value - 2.8).abs() < 1e-9);
                assert!((x[0] - 1.6).abs() < 1e-9);
                assert!((x[1] - 1.2).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x + y = -1 with x, y >= 0
        let out = maximize(&[vec![1.0, 1.0]], &[-1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(out, LpOutcome::Infeasible);
        // x - y = 0, maximize x
        let out = maximize(&[vec![1.0, -1.0]], &[0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(out, LpOutcome::Unbounded);
    }
}
