//! Unconditionally symmetric cap bodies and k-spanning caps.
//!
//! A cap `C(y, phi)` of a convex unconditional family escapes every `±e_j`
//! exactly when its center is `(±1/sqrt k)` on a support of size `k` and
//! zero elsewhere with `phi = arccos(1/sqrt k)`; then `k` coordinate
//! directions sit on its boundary. Tilting each `e_j` by a small angle toward
//! and away from `(1, ..., 1)` gives `4d` directions that pierce all such
//! caps.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use serde::{Deserialize, Serialize};

use super::{certify, Construction};
use crate::error::{Error, Result};
use crate::sphere::{SphericalCap, Tolerance, UnitVector};
use crate::spiky::{is_convex, DirectionSet, SpikyBall, Symmetry};

const PHI_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KSpanningSignature {
    pub k: usize,
    /// Sorted coordinate indices of the nonzero center entries.
    pub support: Vec<usize>,
    /// Sign of the center entry at each support index.
    pub signs: Vec<i8>,
}

impl KSpanningSignature {
    pub fn new(support: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let k = support.len();
        if k < 2 || signs.len() != k {
            return Err(Error::Invalid("signature needs k >= 2 and one sign per index".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("support must be strictly increasing".into()));
        }
        if signs.iter().any(|s| s.abs() != 1) {
            return Err(Error::Invalid("signs must be +1 or -1".into()));
        }
        Ok(KSpanningSignature { k, support, signs })
    }

    /// `s = sum of signs`.
    pub fn sign_sum(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }

    pub fn radius(&self) -> f64 {
        (1.0 / (self.k as f64).sqrt()).acos()
    }

    /// The open cap with this signature in E^d.
    pub fn cap(&self, d: usize) -> Result<SphericalCap> {
        if self.support.last().is_some_and(|&j| j >= d) || self.k > d {
            return Err(Error::Invalid(format!("signature does not fit in dimension {d}")));
        }
        let mut c = vec![0.0; d];
        let v = 1.0 / (self.k as f64).sqrt();
        for (&j, &s) in self.support.iter().zip(&self.signs) {
            c[j] = s as f64 * v;
        }
        SphericalCap::open(UnitVector::normalize(&c)?, self.radius())
    }
}

/// The signature of `cap` if it is a k-spanning cap, matching coordinates
/// and radius within `eps_predicate`.
pub fn classify_k_spanning(cap: &SphericalCap, tol: &Tolerance) -> Option<KSpanningSignature> {
    let c = cap.center.coords();
    let support: Vec<usize> = (0..c.len()).filter(|&j| c[j].abs() > tol.eps_predicate).collect();
    let k = support.len();
    if k < 2 {
        return None;
    }
    let v = 1.0 / (k as f64).sqrt();
    if support.iter().any(|&j| (c[j].abs() - v).abs() > tol.eps_predicate) {
        return None;
    }
    if (cap.radius - v.acos()).abs() > tol.eps_predicate {
        return None;
    }
    let signs = support.iter().map(|&j| if c[j] > 0.0 { 1 } else { -1 }).collect();
    Some(KSpanningSignature { k, support, signs })
}

/// Whether `u` or `-u` lies in the open cap: `|<c, u>| / cos r > 1`.
pub fn escape_test(cap: &SphericalCap, u: &UnitVector, tol: &Tolerance) -> bool {
    cap.center.dot(u).abs() / cap.radius.cos() > 1.0 + tol.eps_predicate
}

/// A tilt angle in `(0, pi/4]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiParameter {
    pub phi: f64,
}

impl PhiParameter {
    pub fn new(phi: f64) -> Result<Self> {
        if !(phi > 0.0 && phi <= FRAC_PI_4) {
            return Err(Error::Invalid(format!("phi {phi} not in (0, pi/4]")));
        }
        Ok(PhiParameter { phi })
    }
}

/// `u_j, -u_j, v_j, -v_j` for `j = 1..d`: entry `cos phi` at `j` and
/// `sin phi / sqrt(d-1)` elsewhere, with a minus sign for `v_j`.
pub fn build_uv_vectors(d: usize, phi: f64) -> Result<DirectionSet> {
    if d < 2 {
        return Err(Error::Invalid(format!("dimension {d} < 2")));
    }
    let phi = PhiParameter::new(phi)?.phi;
    let off = phi.sin() / ((d - 1) as f64).sqrt();
    let mut out = Vec::with_capacity(4 * d);
    for j in 0..d {
        for sign in [1.0, -1.0] {
            let mut w = vec![sign * off; d];
            w[j] = phi.cos();
            let w = UnitVector::normalize(&w)?;
            let anti = w.antipode();
            out.push(w);
            out.push(anti);
        }
    }
    DirectionSet::new(d, out)
}

fn all_pierced(caps: &[SphericalCap], dirs: &[UnitVector], tol: &Tolerance) -> std::result::Result<(), usize> {
    match caps
        .iter()
        .position(|c| dirs.iter().all(|u| c.margin(u) < tol.eps_geometry))
    {
        Some(i) => Err(i),
        None => Ok(()),
    }
}

/// At most `4d` directions for a convex unconditionally symmetric cap body.
///
/// The `2d` directions `±e_j` are tried first. Otherwise `phi` is halved from
/// `pi/8` until [`build_uv_vectors`] pierces every piercing cap.
pub fn illuminate_unconditional(ball: &SpikyBall, tol: &Tolerance) -> Result<Construction> {
    let d = ball.dim;
    if d < 3 {
        return Err(Error::Precondition(format!("unconditional construction needs d >= 3, got {d}")));
    }
    if ball.symmetry != Symmetry::Unconditional {
        return Err(Error::Precondition("instance is not marked unconditionally symmetric".into()));
    }
    ball.validate(tol)?;
    if !is_convex(ball, tol) {
        return Err(Error::Precondition("spiky ball is not convex".into()));
    }
    let caps = ball.piercing_caps()?;
    let cross: Vec<UnitVector> = (0..d)
        .flat_map(|j| [UnitVector::axis(d, j), UnitVector::axis(d, j).antipode()])
        .collect();
    if all_pierced(&caps, &cross, tol).is_ok() {
        return certify(ball, cross, 2 * d, 4 * d, tol);
    }
    let mut phi = FRAC_PI_8;
    let mut offending = 0;
    while phi >= PHI_FLOOR {
        let dirs = build_uv_vectors(d, phi)?.directions;
        match all_pierced(&caps, &dirs, tol) {
            Ok(()) => {
                let mut c = certify(ball, dirs, 4 * d, 4 * d, tol)?;
                c.phi = Some(phi);
                return Ok(c);
            }
            Err(i) => offending = i,
        }
        phi /= 2.0;
    }
    Err(Error::Assertion(format!(
        "no tilt angle down to {PHI_FLOOR:e} pierces piercing cap {offending}"
    )))
}
