//! Coverings of S^m by closed caps of a common radius, with verification.
//!
//! Verification depends on the dimension:
//!
//! * `m = 1`: exact. Sorted center angles cover the circle iff every cyclic
//!   gap is at most `2 alpha`.
//! * `m = 2`: certified on geodesic icosphere meshes with a computed covering
//!   radius `rho`. If every mesh point is within `alpha - rho` of a center the
//!   cover is certified; a mesh point farther than `alpha` is a definite
//!   witness of failure; anything in between refines the mesh, up to a limit.
//! * `m >= 3`: seeded uniform sampling, reported as probabilistic.

mod mesh;

pub use mesh::icosphere;

use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sphere::{SphericalCap, Tolerance, UnitVector};

pub const DEFAULT_CANDIDATES: usize = 2000;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
/// Mesh frequencies tried in order when certifying covers of S^2.
const MESH_LEVELS: [usize; 4] = [32, 64, 128, 256];
/// Uncovered-measure threshold behind the reported sampling confidence.
const SAMPLE_MEASURE: f64 = 1e-5;
const ROTATION_BUDGET: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verified {
    Certified,
    Probabilistic,
    Unverified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringSpec {
    pub sphere_dim: usize,
    pub radius: f64,
    pub centers: Vec<UnitVector>,
    pub verified: Verified,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

impl CoveringSpec {
    /// An unverified spec; run [`verify_cover`] before relying on it.
    pub fn new(sphere_dim: usize, radius: f64, centers: Vec<UnitVector>) -> Result<Self> {
        if sphere_dim < 1 {
            return Err(Error::Invalid("sphere dimension must be >= 1".into()));
        }
        if !(radius > 0.0 && radius <= FRAC_PI_2) {
            return Err(Error::Invalid(format!("cover radius {radius} not in (0, pi/2]")));
        }
        if centers.is_empty() {
            return Err(Error::Invalid("cover needs at least one center".into()));
        }
        if let Some(c) = centers.iter().find(|c| c.dim() != sphere_dim + 1) {
            return Err(Error::DimensionMismatch {
                expected: sphere_dim + 1,
                got: c.dim(),
            });
        }
        Ok(CoveringSpec {
            sphere_dim,
            radius,
            centers,
            verified: Verified::Unverified,
            confidence: None,
        })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Certified, or probabilistically verified.
    pub fn is_verified(&self) -> bool {
        self.verified != Verified::Unverified
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cover serialization")
    }

    /// Parses a cover file. The stored status is discarded; callers re-verify.
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: CoveringSpec = serde_json::from_str(s).map_err(|e| Error::Invalid(format!("cover JSON: {e}")))?;
        CoveringSpec::new(raw.sphere_dim, raw.radius, raw.centers)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub covered: bool,
    pub status: Verified,
    /// Smallest `alpha - distance to nearest center` over the checked points
    /// (exact on S^1).
    pub worst_margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    /// A point left uncovered, when `covered` is false.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<UnitVector>,
}

/// Exact covers of S^1 by equally spaced points: 4 at `pi/4`, 6 at `pi/6`.
pub fn known_cover(m: usize, alpha: f64) -> Option<CoveringSpec> {
    if m != 1 {
        return None;
    }
    let n = if (alpha - PI / 4.0).abs() < 1e-12 {
        4
    } else if (alpha - PI / 6.0).abs() < 1e-12 {
        6
    } else {
        return None;
    };
    CoveringSpec::new(1, alpha, equally_spaced(n, 0.0)).ok()
}

fn equally_spaced(n: usize, start: f64) -> Vec<UnitVector> {
    (0..n).map(|k| UnitVector::from_angle(start + 2.0 * PI * k as f64 / n as f64)).collect()
}

fn mesh(level: usize) -> &'static (Vec<[f64; 3]>, f64) {
    static CACHE: [OnceLock<(Vec<[f64; 3]>, f64)>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CACHE[level].get_or_init(|| icosphere(MESH_LEVELS[level]))
}

/// Best cosine to any center.
fn best_dot(centers: &[Vec<f64>], p: &[f64]) -> f64 {
    centers.iter().map(|c| linalg::dot(c, p)).fold(f64::NEG_INFINITY, f64::max)
}

fn margin_from_dot(alpha: f64, dot: f64) -> f64 {
    alpha - dot.clamp(-1.0, 1.0).acos()
}

/// Verifies with the default sample count and records the status on `spec`.
pub fn verify_cover(spec: &mut CoveringSpec, tol: &Tolerance) -> Result<CoverReport> {
    verify_cover_with(spec, tol, DEFAULT_SAMPLES, 0x5eed)
}

pub fn verify_cover_with(spec: &mut CoveringSpec, tol: &Tolerance, samples: usize, seed: u64) -> Result<CoverReport> {
    let report = match spec.sphere_dim {
        1 => verify_circle(spec, tol),
        2 => verify_mesh(spec, tol)?,
        _ => verify_sampled(spec, tol, samples, seed),
    };
    spec.verified = report.status;
    spec.confidence = report.confidence;
    Ok(report)
}

fn verify_circle(spec: &CoveringSpec, tol: &Tolerance) -> CoverReport {
    let mut angles: Vec<f64> = spec.centers.iter().map(|c| c.angle()).collect();
    angles.sort_by(f64::total_cmp);
    let mut worst_gap = (0.0, 0.0);
    for k in 0..angles.len() {
        let a = angles[k];
        let b = if k + 1 < angles.len() { angles[k + 1] } else { angles[0] + 2.0 * PI };
        if b - a > worst_gap.0 {
            worst_gap = (b - a, a);
        }
    }
    let (gap, start) = worst_gap;
    let covered = gap <= 2.0 * spec.radius + tol.eps_predicate;
    CoverReport {
        covered,
        status: if covered { Verified::Certified } else { Verified::Unverified },
        worst_margin: spec.radius - gap / 2.0,
        mesh_radius: None,
        samples: None,
        confidence: None,
        witness: (!covered).then(|| UnitVector::from_angle(start + gap / 2.0)),
    }
}

fn verify_mesh(spec: &CoveringSpec, tol: &Tolerance) -> Result<CoverReport> {
    let centers: Vec<Vec<f64>> = spec.centers.iter().map(|c| c.coords().to_vec()).collect();
    let mut last = (f64::NEG_INFINITY, 0.0);
    for level in 0..MESH_LEVELS.len() {
        let (points, rho) = mesh(level);
        let mut worst = (f64::INFINITY, 0usize);
        for (i, p) in points.iter().enumerate() {
            let m = margin_from_dot(spec.radius, best_dot(&centers, p));
            if m < worst.0 {
                worst = (m, i);
            }
        }
        if worst.0 < -tol.eps_predicate {
            return Ok(CoverReport {
                covered: false,
                status: Verified::Unverified,
                worst_margin: worst.0,
                mesh_radius: Some(*rho),
                samples: None,
                confidence: None,
                witness: Some(UnitVector::normalize(&points[worst.1])?),
            });
        }
        if worst.0 >= *rho {
            return Ok(CoverReport {
                covered: true,
                status: Verified::Certified,
                worst_margin: worst.0,
                mesh_radius: Some(*rho),
                samples: None,
                confidence: None,
                witness: None,
            });
        }
        last = (worst.0, *rho);
    }
    Err(Error::MeshResolution {
        margin: last.0,
        mesh_radius: last.1,
    })
}

fn verify_sampled(spec: &CoveringSpec, tol: &Tolerance, samples: usize, seed: u64) -> CoverReport {
    let d = spec.sphere_dim + 1;
    let centers: Vec<Vec<f64>> = spec.centers.iter().map(|c| c.coords().to_vec()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (f64::INFINITY, Vec::new());
    for _ in 0..samples {
        let p = linalg::random_unit(&mut rng, d);
        let m = margin_from_dot(spec.radius, best_dot(&centers, &p));
        if m < worst.0 {
            worst = (m, p);
        }
    }
    let covered = worst.0 >= -tol.eps_predicate;
    let confidence = 1.0 - (1.0 - SAMPLE_MEASURE).powf(samples as f64);
    CoverReport {
        covered,
        status: if covered { Verified::Probabilistic } else { Verified::Unverified },
        worst_margin: worst.0,
        mesh_radius: None,
        samples: Some(samples),
        confidence: covered.then_some(confidence),
        witness: if covered { None } else { UnitVector::normalize(&worst.1).ok() },
    }
}

struct Targets {
    points: Vec<Vec<f64>>,
    /// Angle by which the target set may miss sphere points.
    rho: f64,
}

fn targets_for(m: usize, rng: &mut ChaCha8Rng) -> Targets {
    match m {
        1 => {
            let n = 3600;
            Targets {
                points: (0..n).map(|k| UnitVector::from_angle(2.0 * PI * k as f64 / n as f64).into_inner()).collect(),
                rho: PI / n as f64,
            }
        }
        2 => {
            let (pts, rho) = icosphere(64);
            Targets {
                points: pts.iter().map(|p| p.to_vec()).collect(),
                rho,
            }
        }
        _ => Targets {
            points: (0..40_000).map(|_| linalg::random_unit(rng, m + 1)).collect(),
            rho: 0.0,
        },
    }
}

/// Extra angular room kept between target coverage and `alpha`.
fn greedy_margin(m: usize, alpha: f64) -> f64 {
    match m {
        1 => 0.0,
        2 => 0.004,
        _ => 0.04 * alpha,
    }
}

/// Greedy max-coverage followed by drop-and-repair; the result is verified.
///
/// Targets are a fine mesh (random points for `m >= 3`) that must be covered
/// at a reduced radius, so that target coverage implies coverage of the
/// sphere with room to spare for certification. Candidates are random points
/// and their antipodes. Improvement repeatedly drops one center and re-runs
/// minimax Lloyd iterations (each center moves to the center of the smallest
/// cap enclosing its Voronoi cell) until the reduced set covers again; on S^1
/// the repair is exact equal spacing.
pub fn greedy_cover(m: usize, alpha: f64, seed: u64, candidate_count: usize, tol: &Tolerance) -> Result<CoveringSpec> {
    if m < 1 {
        return Err(Error::Invalid("sphere dimension must be >= 1".into()));
    }
    if !(alpha > 0.0 && alpha <= FRAC_PI_2) {
        return Err(Error::Invalid(format!("cover radius {alpha} not in (0, pi/2]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets = targets_for(m, &mut rng);
    let r_eff = alpha - targets.rho - greedy_margin(m, alpha);
    if r_eff <= 0.0 {
        return Err(Error::Invalid(format!("cover radius {alpha} too small for the target mesh")));
    }
    let cos_eff = r_eff.cos();
    let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(2 * candidate_count);
    for _ in 0..candidate_count {
        let c = linalg::random_unit(&mut rng, m + 1);
        candidates.push(linalg::neg(&c));
        candidates.push(c);
    }
    let mut centers = greedy_select(&candidates, &targets.points, cos_eff);
    if m == 1 {
        centers = respace_circle(&centers, alpha, tol);
    } else {
        if m == 2 {
            improve(&mut centers, &targets.points, cos_eff, &mut rng);
        }
        drop_redundant(&mut centers, &targets.points, cos_eff);
    }
    let to_units = |cs: &[Vec<f64>]| cs.iter().map(|c| UnitVector::normalize(c)).collect::<Result<Vec<_>>>();
    let mut spec = CoveringSpec::new(m, alpha, to_units(&centers)?)?;
    for _ in 0..64 {
        let report = verify_cover(&mut spec, tol)?;
        if report.covered {
            return Ok(spec);
        }
        let Some(w) = report.witness else { break };
        // sampling found a hole the targets missed; patch it
        spec.centers.push(w);
    }
    Err(Error::CoverNotVerified(format!(
        "greedy cover of S^{m} at radius {alpha} did not verify"
    )))
}

fn greedy_select(candidates: &[Vec<f64>], targets: &[Vec<f64>], cos_eff: f64) -> Vec<Vec<f64>> {
    let lists: Vec<Vec<u32>> = candidates
        .iter()
        .map(|c| {
            targets
                .iter()
                .enumerate()
                .filter(|(_, t)| linalg::dot(c, t) >= cos_eff)
                .map(|(i, _)| i as u32)
                .collect()
        })
        .collect();
    let mut covered = vec![false; targets.len()];
    let mut remaining = targets.len();
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    // lazy greedy: heap of stale gains, ties to the lowest candidate index
    let mut heap: BinaryHeap<(usize, std::cmp::Reverse<usize>)> =
        lists.iter().enumerate().map(|(i, l)| (l.len(), std::cmp::Reverse(i))).collect();
    while remaining > 0 {
        let mut picked = None;
        while let Some((stale, std::cmp::Reverse(i))) = heap.pop() {
            let fresh = lists[i].iter().filter(|&&t| !covered[t as usize]).count();
            if fresh == 0 {
                continue;
            }
            if heap.peek().is_none_or(|(next, _)| fresh >= *next) || fresh == stale {
                picked = Some(i);
                break;
            }
            heap.push((fresh, std::cmp::Reverse(i)));
        }
        match picked {
            Some(i) => {
                for &t in &lists[i] {
                    if !covered[t as usize] {
                        covered[t as usize] = true;
                        remaining -= 1;
                    }
                }
                chosen.push(candidates[i].clone());
            }
            None => {
                // no candidate reaches the leftovers: cover them directly
                let t = covered.iter().position(|c| !c).expect("remaining > 0");
                let center = targets[t].clone();
                for (k, p) in targets.iter().enumerate() {
                    if !covered[k] && linalg::dot(&center, p) >= cos_eff {
                        covered[k] = true;
                        remaining -= 1;
                    }
                }
                chosen.push(center);
            }
        }
    }
    chosen
}

/// On S^1 the fewest centers of radius `alpha` are equally spaced.
fn respace_circle(centers: &[Vec<f64>], alpha: f64, tol: &Tolerance) -> Vec<Vec<f64>> {
    let start = centers[0][1].atan2(centers[0][0]);
    let mut n = 1;
    while PI / n as f64 > alpha + 0.5 * tol.eps_predicate {
        n += 1;
    }
    if n >= centers.len() {
        return centers.to_vec();
    }
    equally_spaced(n, start).into_iter().map(UnitVector::into_inner).collect()
}

/// Removes centers whose targets are all covered by the others.
fn drop_redundant(centers: &mut Vec<Vec<f64>>, targets: &[Vec<f64>], cos_eff: f64) {
    let mut k = centers.len();
    while k > 0 {
        k -= 1;
        if centers.len() == 1 {
            break;
        }
        let removed = centers.remove(k);
        if targets.iter().all(|t| best_dot(centers, t) >= cos_eff) {
            continue;
        }
        centers.insert(k, removed);
    }
}

const LLOYD_ITERS: usize = 300;
/// Lloyd runs stop early after this many iterations without progress.
const LLOYD_PATIENCE: usize = 30;
const ENCLOSE_ITERS: usize = 24;
const DROP_TRIES: usize = 4;

/// Minimax Lloyd iterations. Returns true once every target is within the goal.
fn minimax_lloyd(centers: &mut [Vec<f64>], targets: &[Vec<f64>], cos_goal: f64) -> bool {
    let k = centers.len();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for it in 0..LLOYD_ITERS {
        let mut cells: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut worst = (f64::INFINITY, 0usize);
        for (ti, t) in targets.iter().enumerate() {
            let (ci, dot) = centers
                .iter()
                .enumerate()
                .map(|(ci, c)| (ci, linalg::dot(c, t)))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            cells[ci].push(ti);
            if dot < worst.0 {
                worst = (dot, ti);
            }
        }
        if worst.0 >= cos_goal {
            return true;
        }
        if worst.0 > best.0 + 1e-9 {
            best = (worst.0, it);
        } else if it - best.1 > LLOYD_PATIENCE {
            return false;
        }
        for (ci, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                centers[ci] = targets[worst.1].clone();
                continue;
            }
            // Badoiu-Clarkson steps toward the farthest cell point
            let mut c = centers[ci].clone();
            for step in 0..ENCLOSE_ITERS {
                let far = cell
                    .iter()
                    .map(|&ti| (ti, linalg::dot(&c, &targets[ti])))
                    .fold((cell[0], f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
                    .0;
                let diff = linalg::sub(&targets[far], &c);
                c = linalg::axpy(&c, 1.0 / (step as f64 + 2.0), &diff);
            }
            if let Some(u) = linalg::normalized(&c, 1e-12) {
                centers[ci] = u;
            }
        }
    }
    targets.iter().all(|t| best_dot(centers, t) >= cos_goal)
}

fn improve(centers: &mut Vec<Vec<f64>>, targets: &[Vec<f64>], cos_goal: f64, rng: &mut ChaCha8Rng) {
    while centers.len() > 1 {
        let mut improved = false;
        for _ in 0..DROP_TRIES {
            let mut trial = centers.clone();
            trial.remove(rng.random_range(0..trial.len()));
            if minimax_lloyd(&mut trial, targets, cos_goal) {
                *centers = trial;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
}

/// Rotates `spec` by seeded random isometries until every center is at least
/// `eps_geometry` away from every listed cap boundary. The identity is tried
/// first. Verification status carries over (rotations preserve coverage).
pub fn rotate_cover_generic(spec: &CoveringSpec, caps_to_miss: &[SphericalCap], seed: u64, tol: &Tolerance) -> Result<CoveringSpec> {
    let d = spec.sphere_dim + 1;
    if let Some(c) = caps_to_miss.iter().find(|c| c.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: c.dim(),
        });
    }
    let clear = |centers: &[UnitVector]| {
        centers
            .iter()
            .all(|u| caps_to_miss.iter().all(|cap| cap.margin(u).abs() >= tol.eps_geometry))
    };
    if clear(&spec.centers) {
        return Ok(spec.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ROTATION_BUDGET {
        let rot = linalg::random_rotation(&mut rng, d);
        let centers: Vec<UnitVector> = spec
            .centers
            .iter()
            .map(|c| UnitVector::normalize(&linalg::mat_vec(&rot, c.coords())))
            .collect::<Result<_>>()?;
        if clear(&centers) {
            let mut out = spec.clone();
            out.centers = centers;
            return Ok(out);
        }
    }
    Err(Error::RetryBudget {
        attempts: ROTATION_BUDGET,
        constraint: "cover centers away from cap boundaries".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn known_circle_covers() {
        let mut c = known_cover(1, PI / 4.0).unwrap();
        assert_eq!(c.len(), 4);
        let r = verify_cover(&mut c, &tol()).unwrap();
        assert!(r.covered && c.verified == Verified::Certified);
        assert!(r.worst_margin.abs() < 1e-12);
        let mut c6 = known_cover(1, PI / 6.0).unwrap();
        assert_eq!(c6.len(), 6);
        assert!(verify_cover(&mut c6, &tol()).unwrap().covered);
        assert!(known_cover(2, PI / 6.0).is_none());
    }

    #[test]
    fn three_points_fail_with_witness() {
        let mut c = CoveringSpec::new(1, PI / 4.0, equally_spaced(3, 0.0)).unwrap();
        let r = verify_cover(&mut c, &tol()).unwrap();
        assert!(!r.covered);
        assert_eq!(c.verified, Verified::Unverified);
        let w = r.witness.unwrap();
        let nearest = c.centers.iter().map(|u| crate::sphere::angular_distance(u, &w).unwrap()).fold(f64::INFINITY, f64::min);
        assert!(nearest > PI / 4.0);
    }

    #[test]
    fn octahedron_covers_s2_at_its_radius() {
        let cs: Vec<UnitVector> = (0..3).flat_map(|j| [UnitVector::axis(3, j), UnitVector::axis(3, j).antipode()]).collect();
        // covering radius of the octahedron is arccos(1/sqrt 3) ~ 0.9553
        let mut ok = CoveringSpec::new(2, 0.97, cs.clone()).unwrap();
        assert!(verify_cover(&mut ok, &tol()).unwrap().covered);
        let mut bad = CoveringSpec::new(2, 0.9, cs).unwrap();
        let r = verify_cover(&mut bad, &tol()).unwrap();
        assert!(!r.covered && r.witness.is_some());
    }

    #[test]
    fn greedy_circle_reaches_optimum() {
        let c = greedy_cover(1, PI / 4.0, 1, 200, &tol()).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.verified, Verified::Certified);
        let c = greedy_cover(1, 1.0, 1, 200, &tol()).unwrap();
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn json_round_trip_resets_status() {
        let mut c = known_cover(1, PI / 4.0).unwrap();
        verify_cover(&mut c, &tol()).unwrap();
        let back = CoveringSpec::from_json(&c.to_json()).unwrap();
        assert_eq!(back.centers, c.centers);
        assert_eq!(back.verified, Verified::Unverified);
    }

    #[test]
    fn rotation_moves_centers_off_boundaries() {
        let c = known_cover(1, PI / 4.0).unwrap();
        let same = rotate_cover_generic(&c, &[], 1, &tol()).unwrap();
        assert_eq!(same, c);
        // e1 sits exactly on the boundary of this arc
        let cap = SphericalCap::open(UnitVector::from_angle(0.3), 0.3).unwrap();
        let moved = rotate_cover_generic(&c, std::slice::from_ref(&cap), 1, &tol()).unwrap();
        assert!(moved.centers.iter().all(|u| cap.margin(u).abs() >= tol().eps_geometry));
        let mut moved = moved;
        assert!(verify_cover(&mut moved, &tol()).unwrap().covered);
    }
}

