//! Spiky balls `Sp[x_1, ..., x_n] = U conv(B^d ∪ {x_i})` and cap bodies.
//!
//! Every vertex `x` carries two caps of S^{d-1}: the open *base cap*
//! `int conv(B ∪ {x}) ∩ S^{d-1}` centered at `y = x/|x|` with radius
//! `alpha = arccos(1/|x|)`, and the open *piercing cap* `C(-y, pi/2 - alpha)`
//! of directions that illuminate `x`. A direction set whose positive hull is
//! the whole space illuminates the body iff it meets every piercing cap, so
//! verification reduces to cap membership plus a positive-hull test.
//!
//! # Convexity criterion
//!
//! [`is_convex`] checks every vertex pair: the segment `[x_i, x_j]` must stay
//! inside `spike_i ∪ spike_j`. Each spike is convex and contains its own
//! endpoint, so along the segment it occupies an interval `[0, a]` (resp.
//! `[b, 1]`), and the pair passes iff `a >= b`. Restricted to the plane through
//! `o`, `x_i`, `x_j`, this is the planar tangency condition on the two base
//! caps; points of `conv(B ∪ X)` decompose as combinations of ball points and
//! vertex-pair segments, which is what the pairwise test inspects.

mod generate;

pub use generate::{from_piercing_caps, gen_instance, gen_instance_with_budget, lift_disks, InstanceKind, DEFAULT_RETRY_BUDGET, MAX_VERTEX_NORM};

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg;
use crate::sphere::{
    angular_distance, cap_contains, caps_intersect, positive_hull_full, SphericalCap, Tolerance, UnitVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    None,
    /// Closed under `x -> -x`.
    Origin,
    /// Closed under every coordinate sign flip.
    Unconditional,
}

/// Unit-ball spiky ball in E^d with an explicit vertex list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpikyBall {
    pub dim: usize,
    pub symmetry: Symmetry,
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct SpikyBallRaw {
    dim: usize,
    symmetry: Symmetry,
    vertices: Vec<Vec<f64>>,
}

fn same_point(a: &[f64], b: &[f64]) -> bool {
    linalg::distance(a, b) <= 1e-9 * (1.0 + linalg::norm(a))
}

impl SpikyBall {
    /// Builds and validates an instance (norms, symmetry closure, vertex condition).
    pub fn new(dim: usize, vertices: Vec<Vec<f64>>, symmetry: Symmetry, tol: &Tolerance) -> Result<Self> {
        let ball = SpikyBall {
            dim,
            symmetry,
            vertices,
        };
        ball.validate(tol)?;
        Ok(ball)
    }

    /// No validation; for experiments and for exercising the predicates on
    /// deliberately invalid inputs.
    pub fn new_unchecked(dim: usize, vertices: Vec<Vec<f64>>, symmetry: Symmetry) -> Self {
        SpikyBall {
            dim,
            symmetry,
            vertices,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn validate(&self, tol: &Tolerance) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::Invalid(format!("dimension must be >= 2, got {}", self.dim)));
        }
        if self.vertices.is_empty() {
            return Err(Error::Invalid("spiky ball needs at least one vertex".into()));
        }
        for (i, x) in self.vertices.iter().enumerate() {
            if x.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: x.len(),
                });
            }
            if x.iter().any(|c| !c.is_finite()) {
                return Err(Error::Invalid(format!("vertex {i} has non-finite coordinates")));
            }
            let n = linalg::norm(x);
            if n <= 1.0 + tol.eps_geometry {
                return Err(Error::Invalid(format!("vertex {i} has norm {n} <= 1")));
            }
        }
        match self.symmetry {
            Symmetry::None => {}
            Symmetry::Origin => {
                if let Some(i) = (0..self.len()).find(|&i| self.antipode_index(i).is_none()) {
                    return Err(Error::Invalid(format!("vertex {i} has no antipodal partner")));
                }
            }
            Symmetry::Unconditional => {
                for (i, x) in self.vertices.iter().enumerate() {
                    for j in 0..self.dim {
                        let mut f = x.clone();
                        f[j] = -f[j];
                        if !self.vertices.iter().any(|v| same_point(v, &f)) {
                            return Err(Error::Invalid(format!(
                                "vertex {i} is not closed under the sign flip of coordinate {j}"
                            )));
                        }
                    }
                }
            }
        }
        for i in 0..self.len() {
            if !is_vertex(i, self, tol) {
                return Err(Error::Invalid(format!("point {i} is swallowed by another spike")));
            }
        }
        Ok(())
    }

    pub fn antipode_index(&self, i: usize) -> Option<usize> {
        let target = linalg::neg(&self.vertices[i]);
        self.vertices.iter().position(|v| same_point(v, &target))
    }

    /// Antipodal vertex pairs `(i, j)` with `i < j`, ordered by `i`.
    pub fn antipodal_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .filter_map(|i| self.antipode_index(i).filter(|&j| j > i).map(|j| (i, j)))
            .collect()
    }

    pub fn vertex_caps(&self) -> Result<Vec<VertexCapPair>> {
        self.vertices
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let mut pair = vertex_cap(x)?;
                pair.vertex_index = i;
                Ok(pair)
            })
            .collect()
    }

    pub fn piercing_caps(&self) -> Result<Vec<SphericalCap>> {
        Ok(self.vertex_caps()?.into_iter().map(|p| p.piercing_cap).collect())
    }

    pub fn base_caps(&self) -> Result<Vec<SphericalCap>> {
        Ok(self.vertex_caps()?.into_iter().map(|p| p.base_cap).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization")
    }

    pub fn from_json(s: &str, tol: &Tolerance) -> Result<Self> {
        let raw: SpikyBallRaw =
            serde_json::from_str(s).map_err(|e| Error::Invalid(format!("instance JSON: {e}")))?;
        SpikyBall::new(raw.dim, raw.vertices, raw.symmetry, tol)
    }
}

/// Base cap and piercing cap of one vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexCapPair {
    pub vertex_index: usize,
    /// `C(y, alpha)`, `y = x/|x|`, `alpha = arccos(1/|x|)`.
    pub base_cap: SphericalCap,
    /// `C(-y, pi/2 - alpha)`.
    pub piercing_cap: SphericalCap,
}

impl VertexCapPair {
    pub fn alpha(&self) -> f64 {
        self.base_cap.radius
    }
}

pub fn vertex_cap(x: &[f64]) -> Result<VertexCapPair> {
    let n = linalg::norm(x);
    if !(n > 1.0) || !n.is_finite() {
        return Err(Error::Invalid(format!("vertex norm {n} must exceed 1")));
    }
    let y = UnitVector::normalize(x)?;
    // arccos(1/n) written as atan(sqrt(n^2 - 1)) to stay accurate near n = 1
    let alpha = ((n - 1.0) * (n + 1.0)).sqrt().atan();
    let piercing_radius = FRAC_PI_2 - alpha;
    Ok(VertexCapPair {
        vertex_index: 0,
        base_cap: SphericalCap::open(y.clone(), alpha)?,
        piercing_cap: SphericalCap::open(y.antipode(), piercing_radius)?,
    })
}

/// Minimum over `lambda ∈ [0, 1]` of `|q - lambda x|^2 - (1 - lambda)^2`.
/// The spike `conv(B ∪ {x})` is exactly where this is <= 0.
fn spike_gap(q: &[f64], x: &[f64]) -> f64 {
    let a = linalg::dot(x, x) - 1.0;
    let b = 1.0 - linalg::dot(q, x);
    let c = linalg::dot(q, q) - 1.0;
    let lam = (-b / a).clamp(0.0, 1.0);
    a * lam * lam + 2.0 * b * lam + c
}

/// Membership of `q` in `conv(B^d ∪ {x})`, closed, with `eps_predicate` slack.
pub fn point_in_spike(q: &[f64], x: &[f64], tol: &Tolerance) -> bool {
    spike_gap(q, x) <= tol.eps_predicate
}

/// `x_i` is a vertex iff no other spike contains it.
pub fn is_vertex(i: usize, ball: &SpikyBall, tol: &Tolerance) -> bool {
    let xi = &ball.vertices[i];
    ball.vertices
        .iter()
        .enumerate()
        .all(|(j, xj)| j == i || spike_gap(xi, xj) > tol.eps_predicate)
}

/// Pairwise criterion: every two open piercing caps meet.
pub fn is_two_illuminable(ball: &SpikyBall, tol: &Tolerance) -> Result<bool> {
    let caps = ball.piercing_caps()?;
    for i in 0..caps.len() {
        for j in i + 1..caps.len() {
            if !caps_intersect(&caps[i], &caps[j], tol)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `alpha_i + alpha_j <= l(y_i, y_j)` for every pair (with predicate slack).
pub fn is_packing(caps: &[SphericalCap], tol: &Tolerance) -> Result<bool> {
    for i in 0..caps.len() {
        for j in i + 1..caps.len() {
            let l = angular_distance(&caps[i].center, &caps[j].center)?;
            if caps[i].radius + caps[j].radius > l + tol.eps_predicate {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

const BISECTION_STEPS: usize = 60;

/// Largest `t` in `[0, 1]` with `from + t (to - from)` inside the spike of `apex`,
/// assuming `t = 0` is inside.
fn exit_parameter(from: &[f64], to: &[f64], apex: &[f64], tol: &Tolerance) -> f64 {
    let dir = linalg::sub(to, from);
    let at = |t: f64| linalg::axpy(from, t, &dir);
    if point_in_spike(&at(1.0), apex, tol) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if point_in_spike(&at(mid), apex, tol) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Pairwise-segment convexity test (see the module docs).
pub fn is_convex(ball: &SpikyBall, tol: &Tolerance) -> bool {
    let v = &ball.vertices;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let exit_i = exit_parameter(&v[i], &v[j], &v[i], tol);
            if exit_i >= 1.0 {
                continue;
            }
            let entry_j = 1.0 - exit_parameter(&v[j], &v[i], &v[j], tol);
            if exit_i < entry_j - tol.eps_geometry {
                return false;
            }
        }
    }
    true
}

/// Open-cap membership of `v` in the piercing cap of `pair`.
pub fn illuminates_vertex(v: &UnitVector, pair: &VertexCapPair, tol: &Tolerance) -> Result<bool> {
    cap_contains(&pair.piercing_cap, v, tol)
}

/// Angular depth of `v` inside the piercing cap (negative outside).
pub fn illumination_margin(v: &UnitVector, pair: &VertexCapPair) -> f64 {
    pair.piercing_cap.margin(v)
}

/// Finite set of illumination directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub dim: usize,
    pub directions: Vec<UnitVector>,
}

impl DirectionSet {
    pub fn new(dim: usize, directions: Vec<UnitVector>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::Invalid("direction set must be nonempty".into()));
        }
        if let Some(bad) = directions.iter().find(|u| u.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim(),
            });
        }
        Ok(DirectionSet { dim, directions })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("direction serialization")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: DirectionSet =
            serde_json::from_str(s).map_err(|e| Error::Invalid(format!("direction JSON: {e}")))?;
        DirectionSet::new(raw.dim, raw.directions)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlluminationReport {
    pub verdict: bool,
    /// Per vertex: index of the deepest direction if it clears `eps_geometry`.
    pub witnesses: Vec<Option<usize>>,
    /// Vertices with no certified witness.
    pub failures: Vec<usize>,
    pub positive_hull_ok: bool,
    /// Smallest over vertices of the best angular margin.
    pub min_margin: f64,
}

/// Certifies that `dirs` illuminate `ball`: each piercing cap holds some
/// direction with angular margin at least `eps_geometry`, and the positive
/// hull of `dirs` is the whole space.
pub fn verify_illumination(ball: &SpikyBall, dirs: &DirectionSet, tol: &Tolerance) -> Result<IlluminationReport> {
    if ball.dim != dirs.dim {
        return Err(Error::DimensionMismatch {
            expected: ball.dim,
            got: dirs.dim,
        });
    }
    let pairs = ball.vertex_caps()?;
    let mut witnesses = Vec::with_capacity(pairs.len());
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    for (i, pair) in pairs.iter().enumerate() {
        let (best_k, best) = dirs
            .directions
            .iter()
            .enumerate()
            .map(|(k, v)| (k, illumination_margin(v, pair)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        min_margin = min_margin.min(best);
        if best >= tol.eps_geometry {
            witnesses.push(Some(best_k));
        } else {
            witnesses.push(None);
            failures.push(i);
        }
    }
    let positive_hull_ok = positive_hull_full(&dirs.directions, tol)?;
    Ok(IlluminationReport {
        verdict: failures.is_empty() && positive_hull_ok,
        witnesses,
        failures,
        positive_hull_ok,
        min_margin,
    })
}

/// For origin-symmetric instances: every two closed piercing caps belonging
/// to different antipodal pairs intersect.
pub fn symmetric_closed_caps_intersect(ball: &SpikyBall, tol: &Tolerance) -> Result<bool> {
    let caps = ball.piercing_caps()?;
    let closed: Vec<SphericalCap> = caps
        .iter()
        .map(|c| SphericalCap::closed(c.center.clone(), c.radius))
        .collect::<Result<_>>()?;
    for i in 0..closed.len() {
        let partner = ball.antipode_index(i);
        for j in i + 1..closed.len() {
            if Some(j) == partner {
                continue;
            }
            if !caps_intersect(&closed[i], &closed[j], tol)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, PI};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn vertex_cap_examples() {
        let p = vertex_cap(&[2.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p.alpha(), FRAC_PI_3, epsilon = 1e-14);
        assert_abs_diff_eq!(p.piercing_cap.radius, PI / 6.0, epsilon = 1e-14);
        assert_eq!(p.base_cap.center.coords(), &[1.0, 0.0, 0.0]);
        assert_eq!(p.piercing_cap.center.coords(), &[-1.0, 0.0, 0.0]);
        assert!(p.piercing_cap.open);
        let p = vertex_cap(&[2f64.sqrt(), 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p.alpha(), FRAC_PI_4, epsilon = 1e-14);
        let near = vertex_cap(&[1.001, 0.0]).unwrap().alpha();
        let far = vertex_cap(&[1e3, 0.0]).unwrap().alpha();
        assert!(near < 0.05 && near > 0.0);
        assert!(far > FRAC_PI_2 - 1.1e-3 && far < FRAC_PI_2);
        assert!(vertex_cap(&[1.0, 0.0]).is_err());
        assert!(vertex_cap(&[0.5, 0.0]).is_err());
    }

    #[test]
    fn spike_membership_examples() {
        let x = [3.0, 0.0, 0.0];
        assert!(point_in_spike(&x, &x, &tol()));
        assert!(point_in_spike(&[0.0, 0.0, 0.0], &x, &tol()));
        assert!(point_in_spike(&[2.0, 0.1, 0.0], &x, &tol()));
        assert!(!point_in_spike(&[2.0, 0.9, 0.0], &x, &tol()));
        assert!(!point_in_spike(&[3.01, 0.0, 0.0], &x, &tol()));
    }

    #[test]
    fn vertex_examples() {
        let b = SpikyBall::new_unchecked(2, vec![vec![3.0, 0.0], vec![0.0, 3.0]], Symmetry::None);
        assert!(is_vertex(0, &b, &tol()) && is_vertex(1, &b, &tol()));
        let b = SpikyBall::new_unchecked(2, vec![vec![3.0, 0.0], vec![1.5, 0.0]], Symmetry::None);
        assert!(is_vertex(0, &b, &tol()));
        assert!(!is_vertex(1, &b, &tol()));
        assert!(b.validate(&tol()).is_err());
    }

    #[test]
    fn two_illuminable_examples() {
        let r = 2f64.sqrt();
        let b = SpikyBall::new(2, vec![vec![r, 0.0], vec![-r, 0.0]], Symmetry::Origin, &tol()).unwrap();
        assert!(!is_two_illuminable(&b, &tol()).unwrap());
        let single = SpikyBall::new(3, vec![vec![0.0, 0.0, 5.0]], Symmetry::None, &tol()).unwrap();
        assert!(is_two_illuminable(&single, &tol()).unwrap());
        let cone = SpikyBall::new(
            3,
            vec![vec![1.2, 0.0, 0.1], vec![1.2, 0.1, 0.0], vec![1.2, -0.05, -0.05]],
            Symmetry::None,
            &tol(),
        )
        .unwrap();
        assert!(is_two_illuminable(&cone, &tol()).unwrap());
    }

    #[test]
    fn packing_examples() {
        let e1 = UnitVector::axis(3, 0);
        let e2 = UnitVector::axis(3, 1);
        let a = SphericalCap::open(e1.clone(), FRAC_PI_4).unwrap();
        let b = SphericalCap::open(e2.clone(), FRAC_PI_4).unwrap();
        assert!(is_packing(&[a, b], &tol()).unwrap());
        let a = SphericalCap::open(e1, FRAC_PI_3).unwrap();
        let b = SphericalCap::open(e2, FRAC_PI_3).unwrap();
        assert!(!is_packing(&[a, b], &tol()).unwrap());
    }

    fn figure_one(len: f64) -> SpikyBall {
        // two antipodal spike pairs along the diagonals of the e1/e2 plane
        let s = len / 2f64.sqrt();
        SpikyBall::new(
            3,
            vec![vec![s, s, 0.0], vec![-s, -s, 0.0], vec![-s, s, 0.0], vec![s, -s, 0.0]],
            Symmetry::Origin,
            &tol(),
        )
        .unwrap()
    }

    #[test]
    fn convexity_matches_figure_one() {
        // |x| = sqrt 2 gives alpha = pi/4: neighbouring base caps are tangent
        let cap_body = figure_one(2f64.sqrt());
        assert!(is_convex(&cap_body, &tol()));
        assert!(is_packing(&cap_body.base_caps().unwrap(), &tol()).unwrap());
        let spiky = figure_one(2.0);
        assert!(!is_convex(&spiky, &tol()));
        assert!(!is_packing(&spiky.base_caps().unwrap(), &tol()).unwrap());
    }

    #[test]
    fn illuminates_vertex_examples() {
        let pair = vertex_cap(&[0.0, 3.0, 0.0]).unwrap();
        let y = pair.base_cap.center.clone();
        assert!(illuminates_vertex(&y.antipode(), &pair, &tol()).unwrap());
        assert!(!illuminates_vertex(&y, &pair, &tol()).unwrap());
        let r = pair.piercing_cap.radius;
        let edge = UnitVector::new(vec![r.sin(), -r.cos(), 0.0]).unwrap();
        assert!(!illuminates_vertex(&edge, &pair, &tol()).unwrap());
        // duality with the sphere-level predicate
        for v in [y.clone(), y.antipode(), edge] {
            assert_eq!(
                illuminates_vertex(&v, &pair, &tol()).unwrap(),
                cap_contains(&pair.piercing_cap, &v, &tol()).unwrap()
            );
        }
    }

    #[test]
    fn verify_examples() {
        let b = figure_one(2f64.sqrt());
        let cross: Vec<UnitVector> = (0..3)
            .flat_map(|j| [UnitVector::axis(3, j), UnitVector::axis(3, j).antipode()])
            .collect();
        // the diagonal vertices have piercing radius pi/4 and the axes sit on
        // their boundaries, so the coordinate cross does not certify
        let r = verify_illumination(&b, &DirectionSet::new(3, cross.clone()).unwrap(), &tol()).unwrap();
        assert!(!r.verdict && r.positive_hull_ok);
        // a rotated cross puts a direction at each piercing-cap center
        let s = 0.5f64.sqrt();
        let rotated = vec![
            UnitVector::new(vec![s, s, 0.0]).unwrap(),
            UnitVector::new(vec![-s, -s, 0.0]).unwrap(),
            UnitVector::new(vec![-s, s, 0.0]).unwrap(),
            UnitVector::new(vec![s, -s, 0.0]).unwrap(),
            UnitVector::axis(3, 2),
            UnitVector::axis(3, 2).antipode(),
        ];
        let r = verify_illumination(&b, &DirectionSet::new(3, rotated.clone()).unwrap(), &tol()).unwrap();
        assert!(r.verdict, "{r:?}");
        assert!(r.min_margin > 0.7);
        // everything in one open halfspace: positive hull fails
        let half: Vec<UnitVector> = rotated.into_iter().filter(|u| u.coords()[2] >= 0.0 && u.coords()[0] >= 0.0).collect();
        let r = verify_illumination(&b, &DirectionSet::new(3, half).unwrap(), &tol()).unwrap();
        assert!(!r.positive_hull_ok && !r.verdict);
    }

    #[test]
    fn json_round_trip() {
        let b = figure_one(1.3);
        let back = SpikyBall::from_json(&b.to_json(), &tol()).unwrap();
        assert_eq!(b, back);
        let bad = r#"{"dim": 2, "symmetry": "origin", "vertices": [[2.0, 0.0]]}"#;
        assert!(SpikyBall::from_json(bad, &tol()).is_err());
    }
}
