//! Piercing solvers for arc, cap and ball families.
//!
//! Open sets count as pierced only with angular (or Euclidean) margin at
//! least `eps_geometry`; closed sets are pierced with margin >= 0 up to
//! rounding.
//!
//! # Ball piercing
//!
//! Let `B0 = B(c0, r0)` be a smallest ball of a pairwise-intersecting family
//! and `{u_k}` the centers of a covering of S^{m-1} by caps of radius `pi/6`.
//! The points `c0` and `c0 + sqrt(3) r0 u_k` pierce every ball. Take
//! `B(c, r)` with `r >= r0` and `t = |c - c0| <= r + r0`. If `t <= r` then
//! `c0` works. Otherwise pick `u_k` within `pi/6` of the direction of
//! `c - c0`; the squared distance from `c0 + sqrt(3) r0 u_k` to `c` is at most
//! `t^2 - 3 r0 t + 3 r0^2 =: Q(t) + r^2`. `Q` is convex with
//! `Q(r) = 3 r0 (r0 - r) <= 0` and `Q(r + r0) = r0 (r0 - r) <= 0`, so
//! `Q <= 0` on `[r, r + r0]`.

mod caps;

pub use caps::{pierce_caps_exact, MAX_EXACT_CAPS};

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::coverings::CoveringSpec;
use crate::error::{Error, Result};
use crate::linalg;
use crate::sphere::{cap_image_ball, EuclideanBall, SphericalCap, Tolerance, UnitVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiercingSolution {
    /// Unit vectors for cap and arc families, points of E^m for balls.
    pub points: Vec<Vec<f64>>,
    /// For each input set, the index of its deepest piercing point.
    pub witnesses: Vec<usize>,
    /// Margin of each input set at its witness.
    pub margins: Vec<f64>,
    /// Minimum over the candidate set (arcs and S^2 caps only).
    pub optimal: bool,
}

impl PiercingSolution {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn unit_points(&self) -> Result<Vec<UnitVector>> {
        self.points.iter().map(|p| UnitVector::normalize(p)).collect()
    }
}

/// Witness and margin per cap; errors if some cap lacks the required margin.
pub(crate) fn cap_witnesses(caps: &[SphericalCap], points: &[UnitVector], tol: &Tolerance) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut witnesses = Vec::with_capacity(caps.len());
    let mut margins = Vec::with_capacity(caps.len());
    for (i, cap) in caps.iter().enumerate() {
        let (k, m) = points
            .iter()
            .enumerate()
            .map(|(k, p)| (k, cap.margin(p)))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        let need = if cap.open { tol.eps_geometry } else { -tol.eps_predicate };
        if m < need {
            return Err(Error::Assertion(format!("set {i} not pierced (margin {m:e})")));
        }
        witnesses.push(k);
        margins.push(m);
    }
    Ok((witnesses, margins))
}

fn check_family(caps: &[SphericalCap], dim: usize) -> Result<()> {
    if caps.is_empty() {
        return Err(Error::Invalid("empty family".into()));
    }
    for c in caps {
        if c.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: c.dim(),
            });
        }
        if c.radius >= PI / 2.0 {
            return Err(Error::RadiusOutOfRegime(c.radius));
        }
    }
    Ok(())
}

/// Minimum piercing of arcs of S^1 (caps in E^2).
///
/// Each arc is shrunk to the closed interval of admissible points (by
/// `eps_geometry` if open). Some minimum piercing set uses only right
/// endpoints, so for each arc its right endpoint is tried as the first
/// point; the other arcs then unroll to intervals of a line, where greedy
/// stabbing at right endpoints is optimal. Chosen points are finally moved to
/// the middle of the common part of the arcs they stab.
pub fn pierce_arcs_exact(arcs: &[SphericalCap], tol: &Tolerance) -> Result<PiercingSolution> {
    check_family(arcs, 2)?;
    let mut ivs = Vec::with_capacity(arcs.len());
    for (i, a) in arcs.iter().enumerate() {
        let half = a.radius - if a.open { tol.eps_geometry } else { 0.0 };
        if half <= 0.0 {
            return Err(Error::Degenerate(format!("arc {i} too short to pierce with margin")));
        }
        ivs.push(((a.center.angle() - half).rem_euclid(TAU), 2.0 * half));
    }
    let offset = |p: f64, lo: f64| (p - lo).rem_euclid(TAU);
    let stabs = |p: f64, (lo, len): (f64, f64)| offset(p, lo) <= len + 1e-12;
    let mut best: Option<Vec<f64>> = None;
    for &(lo, len) in &ivs {
        let p0 = lo + len;
        let mut rest: Vec<(f64, f64)> = ivs
            .iter()
            .filter(|iv| !stabs(p0, **iv))
            .map(|&(l, n)| {
                let a = offset(l, p0);
                (a, a + n)
            })
            .collect();
        rest.sort_by(|x, y| x.1.total_cmp(&y.1));
        let mut pts = vec![p0];
        let mut last = f64::NEG_INFINITY;
        for (a, b) in rest {
            if a > last {
                last = b;
                pts.push(p0 + b);
            }
        }
        if best.as_ref().is_none_or(|b| pts.len() < b.len()) {
            best = Some(pts);
        }
    }
    let centred: Vec<f64> = best
        .expect("nonempty family")
        .into_iter()
        .map(|p| {
            let (mut l, mut r) = (f64::NEG_INFINITY, f64::INFINITY);
            for &(lo, len) in &ivs {
                if stabs(p, (lo, len)) {
                    let a = -offset(p, lo);
                    l = l.max(a);
                    r = r.min(a + len);
                }
            }
            p + 0.5 * (l + r)
        })
        .collect();
    let units: Vec<UnitVector> = centred.iter().map(|&t| UnitVector::from_angle(t)).collect();
    let (witnesses, margins) = cap_witnesses(arcs, &units, tol)?;
    Ok(PiercingSolution {
        points: units.into_iter().map(UnitVector::into_inner).collect(),
        witnesses,
        margins,
        optimal: true,
    })
}

/// Pierces a pairwise-intersecting family of balls in E^m with `1 + |cover|`
/// points built from a verified covering of S^{m-1} at radius <= `pi/6`
/// (see the module docs for the argument).
pub fn pierce_balls_danzer(balls: &[EuclideanBall], cover: &CoveringSpec, tol: &Tolerance) -> Result<PiercingSolution> {
    let Some(first) = balls.first() else {
        return Err(Error::Invalid("empty family".into()));
    };
    let m = first.dim();
    if let Some(b) = balls.iter().find(|b| b.dim() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: b.dim(),
        });
    }
    if cover.sphere_dim + 1 != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: cover.sphere_dim + 1,
        });
    }
    if cover.radius > PI / 6.0 + 1e-12 {
        return Err(Error::Precondition(format!("cover radius {} exceeds pi/6", cover.radius)));
    }
    if !cover.is_verified() {
        return Err(Error::Precondition("cover is not verified".into()));
    }
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            let slack = 1e-12 * (1.0 + balls[i].radius + balls[j].radius);
            if !balls[i].intersects(&balls[j], slack) {
                return Err(Error::Precondition(format!("balls {i} and {j} are disjoint")));
            }
        }
    }
    let b0 = balls
        .iter()
        .min_by(|a, b| {
            a.radius.total_cmp(&b.radius).then_with(|| {
                a.center
                    .iter()
                    .zip(&b.center)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        })
        .expect("nonempty");
    let reach = 3f64.sqrt() * b0.radius;
    let mut points = vec![b0.center.clone()];
    points.extend(cover.centers.iter().map(|u| linalg::axpy(&b0.center, reach, u.coords())));
    let mut witnesses = Vec::with_capacity(balls.len());
    let mut margins = Vec::with_capacity(balls.len());
    for (i, b) in balls.iter().enumerate() {
        let (k, mg) = points
            .iter()
            .enumerate()
            .map(|(k, p)| (k, b.margin(p)))
            .fold((0, f64::NEG_INFINITY), |a, x| if x.1 > a.1 { x } else { a });
        if mg < -tol.eps_predicate * (1.0 + b.radius) {
            return Err(Error::Assertion(format!("ball {i} not pierced (margin {mg:e})")));
        }
        witnesses.push(k);
        margins.push(mg);
    }
    Ok(PiercingSolution {
        points,
        witnesses,
        margins,
        optimal: false,
    })
}

/// Split of a cap family by a pole `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct StereoReduction {
    /// Caps containing `s` (pierced by `s` itself).
    pub contains_s: Vec<usize>,
    /// The other caps with their stereographic images in `H = {<x, s> = -1}`.
    pub images: Vec<(usize, EuclideanBall)>,
}

/// Splits `caps` into those containing `s` and the stereographic images of
/// the rest. `s` must clear every cap boundary by `eps_geometry`.
pub fn reduce_caps_via_stereographic(caps: &[SphericalCap], s: &UnitVector, tol: &Tolerance) -> Result<StereoReduction> {
    let mut contains_s = Vec::new();
    let mut images = Vec::new();
    for (i, cap) in caps.iter().enumerate() {
        if cap.dim() != s.dim() {
            return Err(Error::DimensionMismatch {
                expected: s.dim(),
                got: cap.dim(),
            });
        }
        let m = cap.margin(s);
        if m.abs() < tol.eps_geometry {
            return Err(Error::Precondition(format!("pole lies on the boundary of cap {i}")));
        }
        if m > 0.0 {
            contains_s.push(i);
        } else {
            images.push((i, cap_image_ball(s, cap, tol)?));
        }
    }
    Ok(StereoReduction { contains_s, images })
}
