//! Spherical primitives: unit vectors, caps, angular distance, equatorial
//! slices, stereographic projection and positive-hull testing.
//!
//! Boundary comparisons use [`Tolerance::eps_predicate`] with closed caps
//! inclusive and open caps exclusive. Constructions that need to certify a
//! strict piercing of an open cap use the larger [`Tolerance::eps_geometry`]
//! as an angular margin.

mod hull;
mod stereo;

pub use hull::{positive_hull_certificate, positive_hull_full};
pub use stereo::{ball_preimage_cap, cap_image_ball, stereographic_lift, stereographic_project};

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{check_dim, Error, Result};
use crate::linalg;

/// Numeric slack used by predicates and constructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Slack for boundary comparisons (closed inclusive, open exclusive).
    pub eps_predicate: f64,
    /// Minimum certified angular margin for strict piercing of open caps.
    pub eps_geometry: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eps_predicate: 1e-9,
            eps_geometry: 1e-7,
        }
    }
}

impl Tolerance {
    pub fn new(eps_predicate: f64, eps_geometry: f64) -> Result<Self> {
        if !(eps_predicate > 0.0 && eps_predicate <= eps_geometry && eps_geometry < 1e-3) {
            return Err(Error::Invalid(format!(
                "tolerances must satisfy 0 < eps_predicate <= eps_geometry < 1e-3 (got {eps_predicate}, {eps_geometry})"
            )));
        }
        Ok(Tolerance {
            eps_predicate,
            eps_geometry,
        })
    }
}

/// A point of S^{d-1}, d >= 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

const UNIT_NORM_SLACK: f64 = 1e-6;

impl UnitVector {
    /// Accepts coordinates whose norm is within 1e-6 of one and renormalizes.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Invalid(format!(
                "unit vectors need dimension >= 2, got {}",
                coords.len()
            )));
        }
        let n = linalg::norm(&coords);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_NORM_SLACK {
            return Err(Error::Invalid(format!("vector norm {n} is not 1")));
        }
        // Leave already-normalized input bit-identical so JSON round-trips are stable.
        if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(UnitVector(coords));
        }
        Ok(UnitVector(linalg::scale(&coords, 1.0 / n)))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalize(coords: &[f64]) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Invalid(format!(
                "unit vectors need dimension >= 2, got {}",
                coords.len()
            )));
        }
        linalg::normalized(coords, 1e-300)
            .map(UnitVector)
            .ok_or_else(|| Error::Degenerate("cannot normalize a zero vector".into()))
    }

    pub fn axis(d: usize, j: usize) -> Self {
        UnitVector(linalg::basis(d, j))
    }

    /// Point `(cos t, sin t)` of S^1.
    pub fn from_angle(t: f64) -> Self {
        UnitVector(vec![t.cos(), t.sin()])
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!((linalg::norm(&coords) - 1.0).abs() < 1e-6);
        UnitVector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        linalg::dot(&self.0, &other.0)
    }

    pub fn antipode(&self) -> UnitVector {
        UnitVector(linalg::neg(&self.0))
    }

    /// Angle of a point of S^1, in (-pi, pi].
    pub fn angle(&self) -> f64 {
        self.0[1].atan2(self.0[0])
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        UnitVector::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Vec<f64> {
        u.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// `C[x, r]` (closed) or `C(x, r)` (open) on S^{d-1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalCap {
    pub center: UnitVector,
    pub radius: f64,
    pub open: bool,
}

impl SphericalCap {
    pub fn new(center: UnitVector, radius: f64, open: bool) -> Result<Self> {
        if !(radius > 0.0 && radius < PI) {
            return Err(Error::Invalid(format!("cap radius {radius} not in (0, pi)")));
        }
        Ok(SphericalCap {
            center,
            radius,
            open,
        })
    }

    pub fn closed(center: UnitVector, radius: f64) -> Result<Self> {
        Self::new(center, radius, false)
    }

    pub fn open(center: UnitVector, radius: f64) -> Result<Self> {
        Self::new(center, radius, true)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    /// Signed angular margin: positive inside, zero on the boundary.
    pub fn margin(&self, p: &UnitVector) -> f64 {
        self.radius - angular_distance_unchecked(&self.center, p)
    }

    /// Same cap with radius reduced by `delta`, closed.
    pub fn shrunk_closed(&self, delta: f64) -> Result<Self> {
        SphericalCap::closed(self.center.clone(), self.radius - delta)
    }

    pub fn in_small_regime(&self) -> bool {
        self.radius < FRAC_PI_2
    }
}

/// Euclidean ball `B[p, r]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuclideanBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl EuclideanBall {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Invalid(format!("ball radius {radius} must be positive")));
        }
        Ok(EuclideanBall { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `radius - |p - center|`; nonnegative iff `p` lies in the closed ball.
    pub fn margin(&self, p: &[f64]) -> f64 {
        self.radius - linalg::distance(&self.center, p)
    }

    pub fn intersects(&self, other: &EuclideanBall, slack: f64) -> bool {
        linalg::distance(&self.center, &other.center) <= self.radius + other.radius + slack
    }
}

fn angular_distance_unchecked(a: &UnitVector, b: &UnitVector) -> f64 {
    // 2 atan2(|a-b|, |a+b|) is accurate near 0 and near pi, unlike acos.
    let diff = linalg::distance(&a.0, &b.0);
    let sum = linalg::norm(&linalg::add(&a.0, &b.0));
    2.0 * diff.atan2(sum)
}

/// Spherical distance in `[0, pi]`.
pub fn angular_distance(a: &UnitVector, b: &UnitVector) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(angular_distance_unchecked(a, b))
}

/// Closed caps test `<x, p> >= cos r - eps`; open caps test `<x, p> > cos r + eps`.
pub fn cap_contains(cap: &SphericalCap, p: &UnitVector, tol: &Tolerance) -> Result<bool> {
    check_dim(cap.dim(), p.dim())?;
    let ip = cap.center.dot(p);
    let c = cap.radius.cos();
    Ok(if cap.open {
        ip > c + tol.eps_predicate
    } else {
        ip >= c - tol.eps_predicate
    })
}

/// Whether two caps of radius < pi/2 meet. Closed pairs are tangent-inclusive;
/// if either cap is open the comparison is strict.
pub fn caps_intersect(c1: &SphericalCap, c2: &SphericalCap, tol: &Tolerance) -> Result<bool> {
    check_dim(c1.dim(), c2.dim())?;
    for c in [c1, c2] {
        if c.radius >= FRAC_PI_2 {
            return Err(Error::RadiusOutOfRegime(c.radius));
        }
    }
    let dist = angular_distance_unchecked(&c1.center, &c2.center);
    let reach = c1.radius + c2.radius;
    Ok(if c1.open || c2.open {
        dist < reach - tol.eps_predicate
    } else {
        dist <= reach + tol.eps_predicate
    })
}

/// Orthonormal frame of the hyperplane orthogonal to a unit axis.
///
/// Built by Gram–Schmidt over the coordinate axes in index order, skipping
/// axes that are (numerically) dependent on the ones already chosen, so the
/// frame is a deterministic function of the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub axis: UnitVector,
    pub basis: Vec<Vec<f64>>,
}

impl Frame {
    pub fn orthogonal_to(axis: &UnitVector) -> Self {
        let d = axis.dim();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
        for j in 0..d {
            if basis.len() == d - 1 {
                break;
            }
            let mut v = linalg::reject(&linalg::basis(d, j), axis.coords());
            for b in &basis {
                let c = linalg::dot(&v, b);
                v = linalg::axpy(&v, -c, b);
            }
            // re-orthogonalize against the axis once more for stability
            v = linalg::reject(&v, axis.coords());
            if let Some(u) = linalg::normalized(&v, 1e-6) {
                basis.push(u);
            }
        }
        debug_assert_eq!(basis.len(), d - 1);
        Frame {
            axis: axis.clone(),
            basis,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.axis.dim()
    }

    /// Coordinates of the projection of `v` onto the hyperplane.
    pub fn to_intrinsic(&self, v: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| linalg::dot(b, v)).collect()
    }

    pub fn to_ambient(&self, q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim()];
        for (qi, b) in q.iter().zip(&self.basis) {
            for (o, bi) in out.iter_mut().zip(b) {
                *o += qi * bi;
            }
        }
        out
    }

    /// Embeds a point of the equator sphere S^{d-2} into S^{d-1}.
    pub fn embed_unit(&self, q: &UnitVector) -> UnitVector {
        UnitVector::from_raw(self.to_ambient(q.coords()))
    }
}

/// The intersection of a cap with an equator, as a cap of the equator sphere
/// together with the frame that gives it coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EquatorialSlice {
    pub frame: Frame,
    /// Cap on S^{d-2}, expressed in `frame` coordinates.
    pub cap: SphericalCap,
    /// Ambient angle between the cap center and the axis.
    pub theta: f64,
}

impl EquatorialSlice {
    pub fn ambient_center(&self) -> UnitVector {
        self.frame.embed_unit(&self.cap.center)
    }
}

/// Intersects a cap `C[w, beta]` (beta < pi/2) with the equator orthogonal to
/// `axis`. Writing `w = cos(theta) axis + sin(theta) w'`, the slice is the cap
/// of the equator centered at `w'` with radius `arccos(cos(beta) / sin(theta))`.
///
/// Returns `Ok(None)` when the slice is empty (`sin(theta) < cos(beta)`), which
/// includes `w` parallel to the axis. Errors only for unusable axes (dimension
/// mismatch, or an ambient dimension below 3 where the equator is S^0).
pub fn equatorial_slice(cap: &SphericalCap, axis: &UnitVector) -> Result<Option<EquatorialSlice>> {
    check_dim(cap.dim(), axis.dim())?;
    if axis.dim() < 3 {
        return Err(Error::Degenerate(
            "equator of S^1 is S^0; slices need ambient dimension >= 3".into(),
        ));
    }
    if cap.radius >= FRAC_PI_2 {
        return Err(Error::RadiusOutOfRegime(cap.radius));
    }
    let w = cap.center.coords();
    let along = linalg::dot(w, axis.coords());
    let perp = linalg::reject(w, axis.coords());
    let sin_theta = linalg::norm(&perp);
    let theta = sin_theta.atan2(along);
    let cos_beta = cap.radius.cos();
    if sin_theta < cos_beta || sin_theta < 1e-15 {
        return Ok(None);
    }
    let ratio = (cos_beta / sin_theta).min(1.0);
    let radius = ratio.acos();
    if radius <= 0.0 {
        // tangent: the slice is a single point, no cap of positive radius
        return Ok(None);
    }
    let frame = Frame::orthogonal_to(axis);
    let center_intr = frame.to_intrinsic(&perp);
    let center = UnitVector::normalize(&center_intr)?;
    let slice_cap = SphericalCap::new(center, radius, cap.open)?;
    Ok(Some(EquatorialSlice {
        frame,
        cap: slice_cap,
        theta,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn e(d: usize, j: usize) -> UnitVector {
        UnitVector::axis(d, j)
    }

    #[test]
    fn distance_examples() {
        assert_abs_diff_eq!(angular_distance(&e(3, 0), &e(3, 1)).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(angular_distance(&e(3, 0), &e(3, 0).antipode()).unwrap(), PI, epsilon = 1e-15);
        let p = UnitVector::new(vec![0.3f64.cos(), 0.3f64.sin(), 0.0]).unwrap();
        assert_abs_diff_eq!(angular_distance(&e(3, 0), &p).unwrap(), 0.3, epsilon = 1e-15);
        assert!(matches!(
            angular_distance(&e(3, 0), &e(2, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn contains_examples() {
        let tol = Tolerance::default();
        let p = UnitVector::new(vec![FRAC_PI_3.cos(), FRAC_PI_3.sin(), 0.0]).unwrap();
        let closed = SphericalCap::closed(e(3, 0), FRAC_PI_3).unwrap();
        let open = SphericalCap::open(e(3, 0), FRAC_PI_3).unwrap();
        assert!(cap_contains(&closed, &p, &tol).unwrap());
        assert!(!cap_contains(&open, &p, &tol).unwrap());
        let small = SphericalCap::closed(e(3, 0), FRAC_PI_4).unwrap();
        assert!(!cap_contains(&small, &e(3, 1), &tol).unwrap());
    }

    #[test]
    fn intersect_examples() {
        let tol = Tolerance::default();
        let a = SphericalCap::closed(e(3, 0), FRAC_PI_4).unwrap();
        let b = SphericalCap::closed(e(3, 1), FRAC_PI_4).unwrap();
        assert!(caps_intersect(&a, &b, &tol).unwrap());
        let ao = SphericalCap::open(e(3, 0), FRAC_PI_4).unwrap();
        let bo = SphericalCap::open(e(3, 1), FRAC_PI_4).unwrap();
        assert!(!caps_intersect(&ao, &bo, &tol).unwrap());
        let big = SphericalCap::closed(e(3, 0), FRAC_PI_2).unwrap();
        assert!(matches!(caps_intersect(&big, &b, &tol), Err(Error::RadiusOutOfRegime(_))));
    }

    fn cap_at_theta(theta: f64, beta: f64) -> SphericalCap {
        // axis = e3, center tilted from the axis by theta
        let w = UnitVector::new(vec![theta.sin(), 0.0, theta.cos()]).unwrap();
        SphericalCap::closed(w, beta).unwrap()
    }

    #[test]
    fn slice_examples() {
        let axis = e(3, 2);
        let s = equatorial_slice(&cap_at_theta(FRAC_PI_2, FRAC_PI_3), &axis).unwrap().unwrap();
        assert_abs_diff_eq!(s.cap.radius, FRAC_PI_3, epsilon = 1e-12);
        let s = equatorial_slice(&cap_at_theta(FRAC_PI_3, FRAC_PI_3), &axis).unwrap().unwrap();
        assert_abs_diff_eq!(s.cap.radius, (1.0f64 / 3.0f64.sqrt()).acos(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.cap.radius, 0.95532, epsilon = 1e-5);
        let s = equatorial_slice(&cap_at_theta(FRAC_PI_2, FRAC_PI_4), &axis).unwrap().unwrap();
        assert_abs_diff_eq!(s.cap.radius, FRAC_PI_4, epsilon = 1e-12);
        // the slice center, re-embedded, is the direction of the cap center in the equator
        assert_abs_diff_eq!(s.ambient_center().coords()[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn slice_empty_cases() {
        let axis = e(3, 2);
        assert!(equatorial_slice(&cap_at_theta(0.2, 0.3), &axis).unwrap().is_none());
        assert!(equatorial_slice(&cap_at_theta(0.0, 0.3), &axis).unwrap().is_none());
        assert!(equatorial_slice(&cap_at_theta(PI, 0.3), &axis).unwrap().is_none());
        let c2 = SphericalCap::closed(e(2, 0), 0.3).unwrap();
        assert!(matches!(equatorial_slice(&c2, &e(2, 1)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn frame_prefers_low_index_axes() {
        let f = Frame::orthogonal_to(&e(4, 0));
        assert_eq!(f.basis.len(), 3);
        for (k, b) in f.basis.iter().enumerate() {
            assert_abs_diff_eq!(b[k + 1], 1.0, epsilon = 1e-15);
        }
        let q = vec![0.2, -0.4, 0.1];
        let back = f.to_intrinsic(&f.to_ambient(&q));
        for (a, b) in q.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(1e-9, 1e-7).is_ok());
        assert!(Tolerance::new(1e-6, 1e-7).is_err());
        assert!(Tolerance::new(1e-9, 1e-2).is_err());
    }

    #[test]
    fn unit_vector_json() {
        let u: UnitVector = serde_json::from_str("[0.6, 0.8]").unwrap();
        assert_eq!(serde_json::to_string(&u).unwrap(), "[0.6,0.8]");
        assert!(serde_json::from_str::<UnitVector>("[1.0, 1.0]").is_err());
    }
}
