//! Constructive illumination of spiky balls and cap bodies.
//!
//! Each construction produces a direction set, checks it with
//! [`verify_illumination`] and fails with [`Error::Assertion`] if the check
//! does not pass, so a returned [`Construction`] is always certified.

mod unconditional;

pub use unconditional::{
    build_uv_vectors, classify_k_spanning, escape_test, illuminate_unconditional, KSpanningSignature, PhiParameter,
};

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coverings::{rotate_cover_generic, CoveringSpec};
use crate::error::{Error, Result};
use crate::linalg;
use crate::piercing::{pierce_arcs_exact, pierce_balls_danzer, pierce_caps_exact, reduce_caps_via_stereographic, MAX_EXACT_CAPS};
use crate::sphere::{
    angular_distance, equatorial_slice, positive_hull_full, stereographic_lift, EuclideanBall, Frame, SphericalCap,
    Tolerance, UnitVector,
};
use crate::spiky::{is_convex, is_two_illuminable, verify_illumination, DirectionSet, IlluminationReport, SpikyBall};

const COMPLETION_TRIES: usize = 200;
const POLE_TRIES: usize = 1000;
/// Clearance of the projection pole from every shrunk cap boundary.
const POLE_CLEARANCE: f64 = 1e-4;
const COVER_ROTATION_TRIES: usize = 64;

/// A certified direction set with the data behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub directions: DirectionSet,
    pub report: IlluminationReport,
    /// Directions chosen to pierce caps, before positive-hull completion.
    pub piercing_points: usize,
    /// Guaranteed upper bound on the size.
    pub bound: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

fn certify(ball: &SpikyBall, directions: Vec<UnitVector>, piercing_points: usize, bound: usize, tol: &Tolerance) -> Result<Construction> {
    let directions = DirectionSet::new(ball.dim, directions)?;
    let report = verify_illumination(ball, &directions, tol)?;
    if !report.verdict {
        return Err(Error::Assertion(format!(
            "constructed set does not illuminate: unpierced vertices {:?}, positive hull full: {}",
            report.failures, report.positive_hull_ok
        )));
    }
    if directions.len() > bound {
        return Err(Error::Assertion(format!("constructed {} directions, bound is {bound}", directions.len())));
    }
    Ok(Construction {
        directions,
        report,
        piercing_points,
        bound,
        phi: None,
    })
}

fn require_two_illuminable(ball: &SpikyBall, dim: Option<usize>, tol: &Tolerance) -> Result<()> {
    if let Some(d) = dim {
        if ball.dim != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: ball.dim,
            });
        }
    }
    if !is_two_illuminable(ball, tol)? {
        return Err(Error::Precondition("piercing caps are not pairwise intersecting".into()));
    }
    Ok(())
}

/// Moves `p` by at most `max_angle` in a random tangent direction.
fn jitter<R: Rng>(rng: &mut R, p: &UnitVector, max_angle: f64) -> UnitVector {
    let d = p.dim();
    loop {
        let r = linalg::random_unit(rng, d);
        if let Some(t) = linalg::normalized(&linalg::reject(&r, p.coords()), 1e-6) {
            let step = max_angle * rng.random::<f64>();
            return UnitVector::normalize(&linalg::geodesic_step(p.coords(), &t, step)).expect("unit step");
        }
    }
}

/// Extends `points` to a set whose positive hull is E^d while each cap of
/// `caps` stays pierced with margin `eps_geometry`.
///
/// Points are padded with random directions up to `d`, then
/// `-normalize(sum)` is appended. On a degenerate outcome the points are
/// jittered inside the slack their caps leave and the padding is redrawn.
fn complete(points: &[UnitVector], caps: &[SphericalCap], d: usize, seed: u64, tol: &Tolerance) -> Result<Vec<UnitVector>> {
    if !points.is_empty() && positive_hull_full(points, tol)? {
        return Ok(points.to_vec());
    }
    // per point, the room it has before some cap it serves loses its margin
    let mut room = vec![0.1f64; points.len()];
    for cap in caps {
        if let Some((k, m)) = points
            .iter()
            .enumerate()
            .map(|(k, p)| (k, cap.margin(p)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
        {
            room[k] = room[k].min(0.5 * (m - tol.eps_geometry));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..COMPLETION_TRIES {
        let mut pts: Vec<UnitVector> = if attempt == 0 {
            points.to_vec()
        } else {
            points.iter().zip(&room).map(|(p, &r)| jitter(&mut rng, p, r.max(0.0))).collect()
        };
        while pts.len() < d {
            pts.push(UnitVector::new(linalg::random_unit(&mut rng, d))?);
        }
        let rows: Vec<Vec<f64>> = pts.iter().map(|p| p.coords().to_vec()).collect();
        if linalg::rank(&rows, 1e-9) < d {
            continue;
        }
        let sum = pts.iter().fold(vec![0.0; d], |acc, p| linalg::add(&acc, p.coords()));
        if let Some(u) = linalg::normalized(&sum, 1e-6) {
            pts.push(UnitVector::new(linalg::neg(&u))?);
        }
        if positive_hull_full(&pts, tol)? {
            return Ok(pts);
        }
    }
    Err(Error::RetryBudget {
        attempts: COMPLETION_TRIES,
        constraint: "positive hull completion".into(),
    })
}

fn planar_trio(t: f64) -> Vec<UnitVector> {
    (0..3).map(|k| UnitVector::from_angle(t + k as f64 * TAU / 3.0)).collect()
}

fn wrap(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r > std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

/// Two points inside the shortest arc, one near each endpoint, placed by the
/// arcs that cover that endpoint. `None` when the margins do not fit.
fn endpoint_placement(arcs: &[SphericalCap], tol: &Tolerance) -> Option<(f64, f64)> {
    let a = arcs
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.radius.total_cmp(&y.1.radius).then(x.0.cmp(&y.0)))?
        .1;
    let (theta, h) = (a.center.angle(), a.radius);
    let eps = tol.eps_geometry;
    // offsets from the left end (d1) and from the right end (d2), as ranges
    let (mut lo1, mut hi1) = (eps, 2.0 * h - eps);
    let (mut lo2, mut hi2) = (eps, 2.0 * h - eps);
    for c in arcs {
        let rel = wrap(c.center.angle() - theta);
        let (left, right) = (rel - c.radius, rel + c.radius);
        if left < -h {
            lo1 = lo1.max(left + h + eps);
            hi1 = hi1.min(right + h - eps);
        } else if right > h {
            lo2 = lo2.max(h - right + eps);
            hi2 = hi2.min(h - left - eps);
        } else {
            // an arc as short as the minimal one, inside it
            lo1 = lo1.max(left + h + eps);
            hi1 = hi1.min(right + h - eps);
        }
    }
    if lo1 > hi1 || lo2 > hi2 {
        return None;
    }
    let v1 = theta - h + 0.5 * (lo1 + hi1);
    let v2 = theta + h - 0.5 * (lo2 + hi2);
    Some((v1, v2))
}

fn planar_directions(t1: f64, t2: f64) -> Vec<UnitVector> {
    let (u1, u2) = (UnitVector::from_angle(t1), UnitVector::from_angle(t2));
    let sum = linalg::add(u1.coords(), u2.coords());
    if wrap(t1 - t2).abs() < 1e-6 {
        return planar_trio(t1);
    }
    let v3 = UnitVector::normalize(&linalg::neg(&sum)).expect("arc shorter than pi");
    vec![u1, u2, v3]
}

/// Three directions illuminating a planar 2-illuminable spiky ball.
///
/// The shortest piercing arc meets every other arc, and any other arc
/// overlapping it covers one of its endpoints. One direction goes near each
/// endpoint, placed at the midpoint of the offsets that keep every arc
/// covering that endpoint pierced; the third is `-normalize(v1 + v2)`.
pub fn illuminate_2d(ball: &SpikyBall, tol: &Tolerance) -> Result<Construction> {
    require_two_illuminable(ball, Some(2), tol)?;
    let arcs = ball.piercing_caps()?;
    if let Some((t1, t2)) = endpoint_placement(&arcs, tol) {
        let dirs = planar_directions(t1, t2);
        if let Ok(c) = certify(ball, dirs, 2, 3, tol) {
            return Ok(c);
        }
    }
    let sol = pierce_arcs_exact(&arcs, tol)?;
    let angles: Vec<f64> = sol.unit_points()?.iter().map(UnitVector::angle).collect();
    let dirs = match angles.as_slice() {
        [t] => planar_trio(*t),
        [t1, t2] => planar_directions(*t1, *t2),
        _ => {
            return Err(Error::Assertion(format!(
                "pairwise intersecting arcs needed {} piercing points",
                angles.len()
            )))
        }
    };
    certify(ball, dirs, angles.len(), 3, tol)
}

/// At most five directions for a 2-illuminable spiky ball in E^3: a minimum
/// piercing of the piercing caps (at most four points) plus completion.
///
/// More than four piercing points should not occur; the set is
/// still completed and returned, with `piercing_points` recording the count
/// and `bound` raised to match.
pub fn illuminate_3d(ball: &SpikyBall, seed: u64, tol: &Tolerance) -> Result<Construction> {
    require_two_illuminable(ball, Some(3), tol)?;
    if ball.len() > MAX_EXACT_CAPS {
        return Err(Error::Precondition(format!(
            "exact piercing supports at most {MAX_EXACT_CAPS} vertices, got {}",
            ball.len()
        )));
    }
    let caps = ball.piercing_caps()?;
    let sol = pierce_caps_exact(&caps, tol)?;
    let points = sol.unit_points()?;
    let dirs = complete(&points, &caps, 3, seed, tol)?;
    certify(ball, dirs, points.len(), 5.max(points.len() + 1), tol)
}

fn check_cover(cover: &CoveringSpec, sphere_dim: usize, max_radius: f64) -> Result<()> {
    if cover.sphere_dim != sphere_dim {
        return Err(Error::DimensionMismatch {
            expected: sphere_dim,
            got: cover.sphere_dim,
        });
    }
    if cover.radius > max_radius + 1e-12 {
        return Err(Error::Precondition(format!("cover radius {} exceeds {max_radius}", cover.radius)));
    }
    if !cover.is_verified() {
        return Err(Error::Precondition("cover is not verified".into()));
    }
    Ok(())
}

/// At most `3 + |cover|` directions for a 2-illuminable spiky ball in E^d,
/// d >= 4, from a verified covering of S^{d-2} by caps of radius `pi/6`.
///
/// The piercing caps are shrunk by a quarter of their smallest pairwise
/// overlap, so they stay pairwise intersecting as closed caps and any point
/// of a shrunk cap pierces the original with room to spare. A generic pole
/// `s` pierces the shrunk caps containing it; the rest project to pairwise
/// intersecting balls of the tangent hyperplane at `-s`, which are pierced
/// by `1 + |cover|` points and lifted back. Points that are nobody's deepest
/// witness are dropped before completion.
pub fn illuminate_general(ball: &SpikyBall, cover: &CoveringSpec, seed: u64, tol: &Tolerance) -> Result<Construction> {
    let d = ball.dim;
    if d < 4 {
        return Err(Error::Precondition(format!("general construction needs d >= 4, got {d}")));
    }
    check_cover(cover, d - 2, FRAC_PI_6)?;
    require_two_illuminable(ball, None, tol)?;
    let caps = ball.piercing_caps()?;
    let mut slack = f64::INFINITY;
    for i in 0..caps.len() {
        slack = slack.min(caps[i].radius);
        for j in i + 1..caps.len() {
            let gap = caps[i].radius + caps[j].radius - angular_distance(&caps[i].center, &caps[j].center)?;
            slack = slack.min(gap);
        }
    }
    let delta = slack / 4.0;
    if delta < 2.0 * tol.eps_geometry {
        return Err(Error::Precondition(format!(
            "piercing caps overlap by {slack:e}, too little to shrink"
        )));
    }
    let shrunk: Vec<SphericalCap> = caps.iter().map(|c| c.shrunk_closed(delta)).collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = (0..POLE_TRIES)
        .map(|_| UnitVector::from_raw(linalg::random_unit(&mut rng, d)))
        .find(|s| shrunk.iter().all(|c| c.margin(s).abs() >= POLE_CLEARANCE))
        .ok_or(Error::RetryBudget {
            attempts: POLE_TRIES,
            constraint: "projection pole away from cap boundaries".into(),
        })?;
    let reduction = reduce_caps_via_stereographic(&shrunk, &s, tol)?;

    let mut candidates = Vec::new();
    if !reduction.contains_s.is_empty() {
        candidates.push(s.clone());
    }
    if !reduction.images.is_empty() {
        let frame = Frame::orthogonal_to(&s);
        let balls: Vec<EuclideanBall> = reduction
            .images
            .iter()
            .map(|(_, b)| EuclideanBall::new(frame.to_intrinsic(&b.center), b.radius))
            .collect::<Result<_>>()?;
        let sol = pierce_balls_danzer(&balls, cover, tol)?;
        for q in &sol.points {
            let x = linalg::axpy(&linalg::neg(s.coords()), 1.0, &frame.to_ambient(q));
            candidates.push(stereographic_lift(&s, &x)?);
        }
    }
    let mut used = vec![false; candidates.len()];
    for cap in &caps {
        let (k, m) = candidates
            .iter()
            .enumerate()
            .map(|(k, p)| (k, cap.margin(p)))
            .fold((0, f64::NEG_INFINITY), |a, x| if x.1 > a.1 { x } else { a });
        if m < tol.eps_geometry {
            return Err(Error::Assertion(format!("lifted piercing misses a cap (margin {m:e})")));
        }
        used[k] = true;
    }
    let points: Vec<UnitVector> = candidates.into_iter().zip(used).filter(|(_, u)| *u).map(|(p, _)| p).collect();
    let dirs = complete(&points, &caps, d, seed ^ 0x9e37_79b9_7f4a_7c15, tol)?;
    certify(ball, dirs, points.len(), 3 + cover.len(), tol)
}

fn rotated_cover<R: Rng>(rng: &mut R, cover: &CoveringSpec) -> Result<CoveringSpec> {
    let rot = linalg::random_rotation(rng, cover.sphere_dim + 1);
    let mut out = cover.clone();
    out.centers = cover
        .centers
        .iter()
        .map(|c| UnitVector::normalize(&linalg::mat_vec(&rot, c.coords())))
        .collect::<Result<_>>()?;
    Ok(out)
}

/// At most `2 + |cover|` directions for an origin-symmetric convex cap body,
/// from a verified covering of S^{d-2} by caps of radius `pi/4`.
///
/// The smallest piercing cap (lowest index on ties) gives the pair `±z1`,
/// which pierces it and its antipode. Every other piercing cap meets the
/// equator orthogonal to `z1` in a cap of radius at least `pi/4`; this is
/// checked at runtime and a violation is reported as [`Error::Assertion`].
/// The cover, placed on the equator and rotated off all slice boundaries,
/// then pierces each slice.
pub fn illuminate_symmetric(ball: &SpikyBall, cover: &CoveringSpec, seed: u64, tol: &Tolerance) -> Result<Construction> {
    let d = ball.dim;
    if d < 3 {
        return Err(Error::Precondition(format!("symmetric construction needs d >= 3, got {d}")));
    }
    check_cover(cover, d - 2, FRAC_PI_4)?;
    if (0..ball.len()).any(|i| ball.antipode_index(i).is_none()) {
        return Err(Error::Precondition("vertex set is not origin-symmetric".into()));
    }
    if !is_convex(ball, tol) {
        return Err(Error::Precondition("spiky ball is not convex".into()));
    }
    let caps = ball.piercing_caps()?;
    let first = (0..caps.len())
        .min_by(|&a, &b| caps[a].radius.total_cmp(&caps[b].radius).then(a.cmp(&b)))
        .expect("nonempty");
    let partner = ball.antipode_index(first);
    let z1 = caps[first].center.clone();
    let frame = Frame::orthogonal_to(&z1);
    let mut slices = Vec::new();
    for (j, cap) in caps.iter().enumerate() {
        if j == first || Some(j) == partner {
            continue;
        }
        let radius = equatorial_slice(cap, &z1)?.map(|s| s.cap.radius);
        match radius {
            Some(r) if r >= FRAC_PI_4 - tol.eps_predicate => {}
            _ => {
                return Err(Error::Assertion(format!(
                    "equatorial slice of piercing cap {j} has radius {radius:?}, below pi/4"
                )))
            }
        }
        slices.push((j, equatorial_slice(cap, &z1)?.expect("nonempty slice").cap));
    }
    let slice_caps: Vec<SphericalCap> = slices.iter().map(|(_, c)| c.clone()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..COVER_ROTATION_TRIES {
        let base = if attempt == 0 { cover.clone() } else { rotated_cover(&mut rng, cover)? };
        let placed = match rotate_cover_generic(&base, &slice_caps, seed.wrapping_add(attempt as u64), tol) {
            Ok(c) => c,
            Err(Error::RetryBudget { .. }) => continue,
            Err(e) => return Err(e),
        };
        let embedded: Vec<UnitVector> = placed.centers.iter().map(|u| frame.embed_unit(u)).collect();
        let pierced = slices.iter().all(|(j, _)| {
            embedded
                .iter()
                .any(|e| caps[*j].margin(e) >= tol.eps_geometry)
        });
        if !pierced {
            continue;
        }
        let mut dirs = vec![z1.clone(), z1.antipode()];
        dirs.extend(embedded);
        if !positive_hull_full(&dirs, tol)? {
            return Err(Error::Assertion("cover centers do not positively span the equator".into()));
        }
        return certify(ball, dirs, 2 + cover.len(), 2 + cover.len(), tol);
    }
    Err(Error::RetryBudget {
        attempts: COVER_ROTATION_TRIES,
        constraint: "cover placement piercing every slice".into(),
    })
}
