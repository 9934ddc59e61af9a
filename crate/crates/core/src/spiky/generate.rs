//! Seeded instance generators (sequential rejection sampling).
//!
//! Each generator grows the vertex list one vertex (or one symmetry orbit) at
//! a time, sampling the new piercing or base cap so that the kind's pairwise
//! constraint already holds, and rejecting candidates that break the vertex
//! condition. Every attempt counts against a shared retry budget; on
//! exhaustion the error names the constraint that rejected most candidates.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{is_convex, is_packing, is_two_illuminable, spike_gap, SpikyBall, Symmetry};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sphere::{ball_preimage_cap, angular_distance, EuclideanBall, Frame, SphericalCap, Tolerance, UnitVector};

pub const DEFAULT_RETRY_BUDGET: usize = 10_000;
pub const MAX_VERTEX_NORM: f64 = 50.0;

/// Angular slack by which generated open piercing caps overlap.
const INTERSECTION_SLACK: f64 = 1e-3;
const PIERCING_RADIUS_MIN: f64 = 0.1;
const PIERCING_RADIUS_MAX: f64 = 1.35;
const ALPHA_MIN: f64 = 0.03;
/// Largest orbit support for generic unconditional seeds (orbit size 2^5).
const MAX_ORBIT_SUPPORT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    TwoIlluminable,
    SymmetricCapBody,
    UnconditionalCapBody,
    PlanarLifted,
}

impl std::str::FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_illuminable" | "two-illuminable" => Ok(Self::TwoIlluminable),
            "symmetric" | "symmetric_cap_body" => Ok(Self::SymmetricCapBody),
            "unconditional" | "unconditional_cap_body" => Ok(Self::UnconditionalCapBody),
            "planar_lifted" | "planar-lifted" => Ok(Self::PlanarLifted),
            other => Err(Error::Invalid(format!("unknown instance kind '{other}'"))),
        }
    }
}

fn alpha_max() -> f64 {
    (1.0 / MAX_VERTEX_NORM).acos()
}

struct Budget {
    limit: usize,
    used: usize,
    rejections: BTreeMap<&'static str, usize>,
}

impl Budget {
    fn new(limit: usize) -> Self {
        Budget {
            limit,
            used: 0,
            rejections: BTreeMap::new(),
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            let constraint = self
                .rejections
                .iter()
                .max_by_key(|(_, n)| **n)
                .map(|(c, _)| c.to_string())
                .unwrap_or_else(|| "no candidate accepted".into());
            return Err(Error::RetryBudget {
                attempts: self.limit,
                constraint,
            });
        }
        Ok(())
    }

    fn reject(&mut self, constraint: &'static str) {
        *self.rejections.entry(constraint).or_insert(0) += 1;
    }
}

/// Generates an instance of `kind` with the default retry budget.
///
/// `n` counts vertices for `two_illuminable` and `planar_lifted`, antipodal
/// pairs for `symmetric_cap_body`, and sign-flip orbits for
/// `unconditional_cap_body` (`0` picks 3 orbits).
pub fn gen_instance(kind: InstanceKind, dim: usize, n: usize, seed: u64, tol: &Tolerance) -> Result<SpikyBall> {
    gen_instance_with_budget(kind, dim, n, seed, DEFAULT_RETRY_BUDGET, tol)
}

pub fn gen_instance_with_budget(
    kind: InstanceKind,
    dim: usize,
    n: usize,
    seed: u64,
    budget: usize,
    tol: &Tolerance,
) -> Result<SpikyBall> {
    if dim < 2 {
        return Err(Error::Invalid(format!("dimension must be >= 2, got {dim}")));
    }
    if kind == InstanceKind::UnconditionalCapBody && dim < 3 {
        return Err(Error::Invalid("unconditional cap bodies need dimension >= 3".into()));
    }
    if n == 0 && kind != InstanceKind::UnconditionalCapBody {
        return Err(Error::Invalid("instance needs at least one vertex".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut budget = Budget::new(budget);
    loop {
        let ball = match kind {
            InstanceKind::TwoIlluminable => two_illuminable(&mut rng, dim, n, &mut budget, tol)?,
            InstanceKind::SymmetricCapBody => symmetric(&mut rng, dim, n, &mut budget, tol)?,
            InstanceKind::UnconditionalCapBody => {
                unconditional(&mut rng, dim, if n == 0 { 3 } else { n }, &mut budget, tol)?
            }
            InstanceKind::PlanarLifted => planar_lifted(&mut rng, dim, n, &mut budget, tol)?,
        };
        match final_check(kind, ball, tol)? {
            Ok(ball) => return Ok(ball),
            Err(constraint) => {
                budget.reject(constraint);
                budget.tick()?;
            }
        }
    }
}

fn final_check(kind: InstanceKind, ball: SpikyBall, tol: &Tolerance) -> Result<std::result::Result<SpikyBall, &'static str>> {
    if ball.validate(tol).is_err() {
        return Ok(Err("instance invariants"));
    }
    let ok = match kind {
        InstanceKind::TwoIlluminable | InstanceKind::PlanarLifted => is_two_illuminable(&ball, tol)?,
        InstanceKind::SymmetricCapBody | InstanceKind::UnconditionalCapBody => {
            is_packing(&ball.base_caps()?, tol)? && is_convex(&ball, tol)
        }
    };
    Ok(if ok { Ok(ball) } else { Err("kind invariant on the assembled instance") })
}

/// The new vertex is not swallowed and swallows nothing.
fn vertex_compatible(x: &[f64], existing: &[Vec<f64>], tol: &Tolerance) -> bool {
    existing
        .iter()
        .all(|v| spike_gap(x, v) > tol.eps_predicate && spike_gap(v, x) > tol.eps_predicate)
}

fn vertex_from_piercing(center: &UnitVector, radius: f64) -> Vec<f64> {
    // y = -center, |x| = 1 / cos(alpha) = 1 / sin(radius)
    linalg::scale(center.coords(), -1.0 / radius.sin())
}

/// Vertices whose open piercing caps are exactly `caps`.
pub fn from_piercing_caps(dim: usize, caps: &[SphericalCap], symmetry: Symmetry, tol: &Tolerance) -> Result<SpikyBall> {
    let vertices = caps
        .iter()
        .map(|c| {
            if c.radius >= FRAC_PI_2 {
                return Err(Error::RadiusOutOfRegime(c.radius));
            }
            Ok(vertex_from_piercing(&c.center, c.radius))
        })
        .collect::<Result<Vec<_>>>()?;
    SpikyBall::new(dim, vertices, symmetry, tol)
}

/// Lifts balls of the tangent hyperplane at `-s` to open caps of the sphere.
pub fn lift_disks(s: &UnitVector, balls: &[EuclideanBall], tol: &Tolerance) -> Result<Vec<SphericalCap>> {
    balls
        .iter()
        .map(|b| {
            let c = ball_preimage_cap(s, b, tol)?;
            SphericalCap::open(c.center, c.radius)
        })
        .collect()
}

fn random_unit_vector(rng: &mut ChaCha8Rng, d: usize) -> UnitVector {
    loop {
        if let Ok(u) = UnitVector::normalize(&linalg::random_unit(rng, d)) {
            return u;
        }
    }
}

fn two_illuminable(rng: &mut ChaCha8Rng, dim: usize, n: usize, budget: &mut Budget, tol: &Tolerance) -> Result<SpikyBall> {
    let mut caps: Vec<(UnitVector, f64)> = Vec::with_capacity(n);
    let mut vertices: Vec<Vec<f64>> = Vec::with_capacity(n);
    while vertices.len() < n {
        budget.tick()?;
        let c = random_unit_vector(rng, dim);
        let needed = caps
            .iter()
            .map(|(cj, rj)| angular_distance(&c, cj).map(|l| l - rj + INTERSECTION_SLACK))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(PIERCING_RADIUS_MIN, f64::max);
        if needed > PIERCING_RADIUS_MAX {
            budget.reject("pairwise piercing-cap intersection");
            continue;
        }
        let u: f64 = rng.random();
        let r = needed + (PIERCING_RADIUS_MAX - needed) * u * u;
        let x = vertex_from_piercing(&c, r);
        if !vertex_compatible(&x, &vertices, tol) {
            budget.reject("vertex condition");
            continue;
        }
        caps.push((c, r));
        vertices.push(x);
    }
    Ok(SpikyBall::new_unchecked(dim, vertices, Symmetry::None))
}

/// Largest base-cap radius at `y` that keeps packing against `existing`.
fn packing_room(y: &UnitVector, existing: &[(UnitVector, f64)]) -> Result<f64> {
    let mut room = alpha_max();
    for (yj, aj) in existing {
        room = room.min(angular_distance(y, yj)? - aj);
    }
    Ok(room)
}

fn symmetric(rng: &mut ChaCha8Rng, dim: usize, pairs: usize, budget: &mut Budget, tol: &Tolerance) -> Result<SpikyBall> {
    let mut caps: Vec<(UnitVector, f64)> = Vec::new();
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    while vertices.len() < 2 * pairs {
        budget.tick()?;
        let y = random_unit_vector(rng, dim);
        let room = packing_room(&y, &caps)?.min(packing_room(&y.antipode(), &caps)?);
        if room < ALPHA_MIN {
            budget.reject("base-cap packing");
            continue;
        }
        let alpha = room * rng.random_range(0.3..0.999);
        let x = linalg::scale(y.coords(), 1.0 / alpha.cos());
        let mx = linalg::neg(&x);
        if !vertex_compatible(&x, &vertices, tol) || !vertex_compatible(&mx, &vertices, tol) {
            budget.reject("vertex condition");
            continue;
        }
        caps.push((y.clone(), alpha));
        caps.push((y.antipode(), alpha));
        vertices.push(x);
        vertices.push(mx);
    }
    Ok(SpikyBall::new_unchecked(dim, vertices, Symmetry::Origin))
}

/// All sign patterns of `y` on its support, in binary-counter order.
fn sign_orbit(y: &[f64]) -> Vec<Vec<f64>> {
    let support: Vec<usize> = (0..y.len()).filter(|&j| y[j] != 0.0).collect();
    (0..1usize << support.len())
        .map(|mask| {
            let mut v: Vec<f64> = y.iter().map(|c| c.abs()).collect();
            for (b, &j) in support.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    v[j] = -v[j];
                }
            }
            v
        })
        .collect()
}

fn random_support(rng: &mut ChaCha8Rng, dim: usize, size: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..dim).collect();
    for i in 0..size {
        let j = rng.random_range(i..dim);
        idx.swap(i, j);
    }
    let mut s = idx[..size].to_vec();
    s.sort_unstable();
    s
}

fn unconditional(rng: &mut ChaCha8Rng, dim: usize, orbits: usize, budget: &mut Budget, tol: &Tolerance) -> Result<SpikyBall> {
    let mut caps: Vec<(UnitVector, f64)> = Vec::new();
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut placed = 0;
    let max_support = dim.min(MAX_ORBIT_SUPPORT);
    while placed < orbits {
        budget.tick()?;
        let spanning_p = if placed == 0 { 0.6 } else { 0.25 };
        let (seed_dir, alpha, spanning) = if rng.random_bool(spanning_p) {
            // orbit whose piercing caps are k-spanning: self-tangent by construction
            let k = rng.random_range(2..=max_support);
            let mut y = vec![0.0; dim];
            for j in random_support(rng, dim, k) {
                y[j] = 1.0 / (k as f64).sqrt();
            }
            (y, (1.0 / (k as f64).sqrt()).asin(), true)
        } else {
            let s = rng.random_range(1..=max_support);
            let mut y = vec![0.0; dim];
            for j in random_support(rng, dim, s) {
                y[j] = rng.random_range(0.3..1.0);
            }
            let y = UnitVector::normalize(&y)?.into_inner();
            // flipping coordinate j moves y by 2 asin|y_j|
            let own = y
                .iter()
                .filter(|c| **c != 0.0)
                .map(|c| c.abs().asin())
                .fold(alpha_max(), f64::min);
            (y, own, false)
        };
        let orbit = sign_orbit(&seed_dir);
        let room = orbit
            .iter()
            .map(|v| packing_room(&UnitVector::from_raw(v.clone()), &caps))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let alpha = if spanning {
            if alpha > room + tol.eps_predicate {
                budget.reject("base-cap packing");
                continue;
            }
            alpha
        } else {
            let limit = alpha.min(room);
            if limit < ALPHA_MIN {
                budget.reject("base-cap packing");
                continue;
            }
            limit * rng.random_range(0.3..0.999)
        };
        let norm = 1.0 / alpha.cos();
        let new: Vec<Vec<f64>> = orbit.iter().map(|v| linalg::scale(v, norm)).collect();
        if !new.iter().all(|x| vertex_compatible(x, &vertices, tol)) {
            budget.reject("vertex condition");
            continue;
        }
        for v in &orbit {
            caps.push((UnitVector::from_raw(v.clone()), alpha));
        }
        vertices.extend(new);
        placed += 1;
    }
    Ok(SpikyBall::new_unchecked(dim, vertices, Symmetry::Unconditional))
}

fn planar_lifted(rng: &mut ChaCha8Rng, dim: usize, n: usize, budget: &mut Budget, tol: &Tolerance) -> Result<SpikyBall> {
    let s = UnitVector::axis(dim, dim - 1);
    let frame = Frame::orthogonal_to(&s);
    let m = dim - 1;
    let mut disks: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut caps: Vec<SphericalCap> = Vec::new();
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    while vertices.len() < n {
        budget.tick()?;
        let dir = linalg::random_unit(rng, m);
        let rad = 0.6 * rng.random::<f64>().powf(1.0 / m as f64);
        let q = linalg::scale(&dir, rad);
        let needed = disks
            .iter()
            .map(|(qj, rj)| linalg::distance(&q, qj) - rj + INTERSECTION_SLACK)
            .fold(0.15, f64::max);
        if needed > 0.7 {
            budget.reject("pairwise disk intersection");
            continue;
        }
        let r = rng.random_range(needed..=0.7);
        let center = linalg::add(&linalg::neg(s.coords()), &frame.to_ambient(&q));
        let ball = EuclideanBall::new(center, r)?;
        let closed = ball_preimage_cap(&s, &ball, tol)?;
        let to_south = angular_distance(&closed.center, &s.antipode())?;
        if !closed.in_small_regime() || to_south + closed.radius >= FRAC_PI_2 {
            budget.reject("lifted cap inside the hemisphere");
            continue;
        }
        let cap = SphericalCap::open(closed.center, closed.radius)?;
        let x = vertex_from_piercing(&cap.center, cap.radius);
        if linalg::norm(&x) > MAX_VERTEX_NORM || !vertex_compatible(&x, &vertices, tol) {
            budget.reject("vertex condition");
            continue;
        }
        disks.push((q, r));
        caps.push(cap);
        vertices.push(x);
    }
    Ok(SpikyBall::new_unchecked(dim, vertices, Symmetry::None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spiky::symmetric_closed_caps_intersect;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn deterministic_for_seed() {
        for kind in [
            InstanceKind::TwoIlluminable,
            InstanceKind::SymmetricCapBody,
            InstanceKind::UnconditionalCapBody,
            InstanceKind::PlanarLifted,
        ] {
            let a = gen_instance(kind, 3, 4, 11, &tol()).unwrap();
            let b = gen_instance(kind, 3, 4, 11, &tol()).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.to_json(), b.to_json());
        }
    }

    #[test]
    fn symmetric_example() {
        let b = gen_instance(InstanceKind::SymmetricCapBody, 3, 4, 7, &tol()).unwrap();
        assert_eq!(b.len(), 8);
        assert!(is_convex(&b, &tol()));
        assert!(is_packing(&b.base_caps().unwrap(), &tol()).unwrap());
        assert_eq!(b.antipodal_pairs().len(), 4);
        assert!(symmetric_closed_caps_intersect(&b, &tol()).unwrap());
    }

    #[test]
    fn unconditional_example() {
        let b = gen_instance(InstanceKind::UnconditionalCapBody, 5, 0, 1, &tol()).unwrap();
        assert_eq!(b.symmetry, Symmetry::Unconditional);
        assert!(b.validate(&tol()).is_ok());
        assert!(is_convex(&b, &tol()));
    }

    #[test]
    fn two_illuminable_family() {
        for seed in 0..10 {
            let b = gen_instance(InstanceKind::TwoIlluminable, 2, 30, seed, &tol()).unwrap();
            assert_eq!(b.len(), 30);
            assert!(is_two_illuminable(&b, &tol()).unwrap());
        }
    }

    #[test]
    fn planar_lift_preserves_incidence() {
        let s = UnitVector::axis(3, 2);
        let south = [0.0, 0.0, -1.0];
        let disks = vec![
            EuclideanBall::new(linalg::add(&south, &[0.3, 0.0, 0.0]), 0.4).unwrap(),
            EuclideanBall::new(linalg::add(&south, &[-0.2, 0.25, 0.0]), 0.35).unwrap(),
            EuclideanBall::new(linalg::add(&south, &[0.0, -0.3, 0.0]), 0.3).unwrap(),
        ];
        let caps = lift_disks(&s, &disks, &tol()).unwrap();
        let ball = from_piercing_caps(3, &caps, Symmetry::None, &tol()).unwrap();
        assert!(is_two_illuminable(&ball, &tol()).unwrap());
        let b = gen_instance(InstanceKind::PlanarLifted, 3, 3, 5, &tol()).unwrap();
        assert!(is_two_illuminable(&b, &tol()).unwrap());
    }

    #[test]
    fn budget_exhaustion_names_constraint() {
        // far more disjoint-ish pairs than S^1 can pack
        let err = gen_instance_with_budget(InstanceKind::SymmetricCapBody, 2, 200, 3, 500, &tol()).unwrap_err();
        match err {
            Error::RetryBudget { constraint, .. } => assert!(constraint.contains("packing"), "{constraint}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
