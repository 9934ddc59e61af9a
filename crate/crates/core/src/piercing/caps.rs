//! Exact piercing of small cap families on S^2 by branch-and-bound set cover.
//!
//! Candidates: cap centers, the deepest point of each pairwise lens on the
//! great circle through the two centers, and each pairwise boundary
//! intersection pushed into both caps along the bisector of the inward
//! tangents at several step lengths. Every face of the arrangement that is a
//! maximal intersection either is a whole cap (and contains its center) or has
//! a corner where two boundaries cross, so the pushed corners reach it.

use super::{cap_witnesses, check_family, PiercingSolution};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sphere::{angular_distance, SphericalCap, Tolerance, UnitVector};

pub const MAX_EXACT_CAPS: usize = 20;
const PUSH_STEPS: [f64; 5] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2];

fn boundary_crossings(a: &SphericalCap, b: &SphericalCap) -> Vec<Vec<f64>> {
    let (ca, cb) = (a.center.coords(), b.center.coords());
    let g = a.center.dot(&b.center);
    let det = 1.0 - g * g;
    if det < 1e-14 {
        return Vec::new();
    }
    let (ka, kb) = (a.radius.cos(), b.radius.cos());
    let x = (ka - g * kb) / det;
    let y = (kb - g * ka) / det;
    let base = linalg::add(&linalg::scale(ca, x), &linalg::scale(cb, y));
    let rest = 1.0 - linalg::dot(&base, &base);
    if rest < 0.0 {
        return Vec::new();
    }
    let n = [
        ca[1] * cb[2] - ca[2] * cb[1],
        ca[2] * cb[0] - ca[0] * cb[2],
        ca[0] * cb[1] - ca[1] * cb[0],
    ];
    let h = (rest / linalg::dot(&n, &n)).sqrt();
    vec![linalg::axpy(&base, h, &n), linalg::axpy(&base, -h, &n)]
}

fn candidates(caps: &[SphericalCap]) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = caps.iter().map(|c| c.center.coords().to_vec()).collect();
    for i in 0..caps.len() {
        for j in i + 1..caps.len() {
            let (a, b) = (&caps[i], &caps[j]);
            let d = angular_distance(&a.center, &b.center)?;
            if d > 1e-12 && d < a.radius + b.radius {
                if let Some(t) = linalg::tangent_toward(a.center.coords(), b.center.coords()) {
                    let lo = (d - b.radius).max(-a.radius);
                    let hi = a.radius.min(d + b.radius);
                    out.push(linalg::geodesic_step(a.center.coords(), &t, 0.5 * (lo + hi)));
                }
            }
            for p in boundary_crossings(a, b) {
                let p = match linalg::normalized(&p, 1e-12) {
                    Some(p) => p,
                    None => continue,
                };
                let (Some(ta), Some(tb)) = (
                    linalg::tangent_toward(&p, a.center.coords()),
                    linalg::tangent_toward(&p, b.center.coords()),
                ) else {
                    continue;
                };
                let Some(dir) = linalg::normalized(&linalg::add(&ta, &tb), 1e-12) else {
                    continue;
                };
                for step in PUSH_STEPS {
                    out.push(linalg::geodesic_step(&p, &dir, step));
                }
            }
        }
    }
    Ok(out)
}

fn pierces(cap: &SphericalCap, p: &UnitVector, tol: &Tolerance) -> bool {
    let m = cap.margin(p);
    if cap.open {
        m >= tol.eps_geometry
    } else {
        m >= -tol.eps_predicate
    }
}

struct Search<'a> {
    masks: &'a [u32],
    covers_of: Vec<Vec<usize>>,
    max_pop: u32,
    best: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, uncovered: u32, chosen: &mut Vec<usize>) {
        if uncovered == 0 {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        let need = uncovered.count_ones().div_ceil(self.max_pop) as usize;
        if chosen.len() + need >= self.best.len() {
            return;
        }
        // branch on the uncovered cap with the fewest options
        let mut bits = uncovered;
        let mut pick = (usize::MAX, 0usize);
        while bits != 0 {
            let e = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let n = self.covers_of[e].len();
            if n < pick.0 {
                pick = (n, e);
            }
        }
        let mut options = self.covers_of[pick.1].clone();
        options.sort_by_key(|&k| std::cmp::Reverse((self.masks[k] & uncovered).count_ones()));
        for k in options {
            chosen.push(k);
            self.run(uncovered & !self.masks[k], chosen);
            chosen.pop();
        }
    }
}

/// Minimum piercing of up to [`MAX_EXACT_CAPS`] caps of S^2 over the
/// candidate set described in the module docs.
pub fn pierce_caps_exact(caps: &[SphericalCap], tol: &Tolerance) -> Result<PiercingSolution> {
    check_family(caps, 3)?;
    if caps.len() > MAX_EXACT_CAPS {
        return Err(Error::Invalid(format!(
            "exact cap piercing supports at most {MAX_EXACT_CAPS} caps, got {}",
            caps.len()
        )));
    }
    // deepest candidate per distinct mask
    let mut by_mask: std::collections::BTreeMap<u32, (f64, UnitVector)> = std::collections::BTreeMap::new();
    for p in candidates(caps)? {
        let Ok(u) = UnitVector::normalize(&p) else { continue };
        let mut mask = 0u32;
        let mut depth = f64::INFINITY;
        for (i, c) in caps.iter().enumerate() {
            if pierces(c, &u, tol) {
                mask |= 1 << i;
                depth = depth.min(c.margin(&u));
            }
        }
        if mask == 0 {
            continue;
        }
        let entry = by_mask.entry(mask).or_insert((f64::NEG_INFINITY, u.clone()));
        if depth > entry.0 {
            *entry = (depth, u);
        }
    }
    // drop masks contained in another
    let all: Vec<(u32, UnitVector)> = by_mask.into_iter().map(|(m, (_, u))| (m, u)).collect();
    let kept: Vec<(u32, UnitVector)> = all
        .iter()
        .filter(|(m, _)| !all.iter().any(|(o, _)| o != m && o & m == *m))
        .cloned()
        .collect();
    let masks: Vec<u32> = kept.iter().map(|(m, _)| *m).collect();
    let mut covers_of = vec![Vec::new(); caps.len()];
    for (k, m) in masks.iter().enumerate() {
        for (i, list) in covers_of.iter_mut().enumerate() {
            if m >> i & 1 == 1 {
                list.push(k);
            }
        }
    }
    if let Some(i) = covers_of.iter().position(|l| l.is_empty()) {
        return Err(Error::Solver(format!("no candidate pierces cap {i} with the required margin")));
    }
    let full: u32 = if caps.len() == 32 { u32::MAX } else { (1u32 << caps.len()) - 1 };
    let mut search = Search {
        masks: &masks,
        covers_of,
        max_pop: masks.iter().map(|m| m.count_ones()).max().unwrap_or(1),
        best: (0..=caps.len()).collect(),
    };
    search.run(full, &mut Vec::new());
    let mut chosen = search.best;
    chosen.sort_unstable();
    let points: Vec<UnitVector> = chosen.iter().map(|&k| kept[k].1.clone()).collect();
    let (witnesses, margins) = cap_witnesses(caps, &points, tol)?;
    Ok(PiercingSolution {
        points: points.into_iter().map(UnitVector::into_inner).collect(),
        witnesses,
        margins,
        optimal: true,
    })
}
