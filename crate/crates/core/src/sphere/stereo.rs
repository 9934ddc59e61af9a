//! Stereographic projection from a pole `s` onto the hyperplane
//! `H = {x : <x, s> = -1}` tangent to the sphere at `-s`.
//!
//! Caps and balls are related through their diametral points on the great
//! circle through `s` and the cap center. On that circle, the point at angle
//! `psi` from `s` projects to `-s + t u` with `t = 2 cot(psi / 2)`, which is
//! strictly decreasing on `(0, 2 pi)`; so a cap avoiding `s` becomes an
//! interval of `t` values, i.e. a ball diameter.

use super::{angular_distance_unchecked, EuclideanBall, Frame, SphericalCap, Tolerance, UnitVector};
use crate::error::{check_dim, Error, Result};
use crate::linalg;

/// Distance of `x` from the tangent hyperplane at `-s`, scaled for magnitude.
fn off_plane(s: &UnitVector, x: &[f64]) -> f64 {
    (linalg::dot(x, s.coords()) + 1.0).abs() / (1.0 + linalg::norm(x))
}

fn in_plane_direction(s: &UnitVector, v: &[f64]) -> (Vec<f64>, f64) {
    let len = linalg::norm(v);
    if len > 1e-14 {
        (linalg::scale(v, 1.0 / len), len)
    } else {
        (Frame::orthogonal_to(s).basis[0].clone(), 0.0)
    }
}

/// `s + t (p - s)` with `t = 2 / (1 - <p, s>)`.
pub fn stereographic_project(s: &UnitVector, p: &UnitVector, tol: &Tolerance) -> Result<Vec<f64>> {
    check_dim(s.dim(), p.dim())?;
    let dist = angular_distance_unchecked(s, p);
    if dist <= tol.eps_geometry {
        return Err(Error::TooCloseToCenter(dist));
    }
    let t = 2.0 / (1.0 - s.dot(p));
    let diff = linalg::sub(p.coords(), s.coords());
    Ok(linalg::axpy(s.coords(), t, &diff))
}

/// Inverse of [`stereographic_project`]: the second intersection of the line
/// through `s` and `x` with the sphere.
pub fn stereographic_lift(s: &UnitVector, x: &[f64]) -> Result<UnitVector> {
    check_dim(s.dim(), x.len())?;
    if off_plane(s, x) > 1e-9 {
        return Err(Error::Invalid("point does not lie in the tangent hyperplane at -s".into()));
    }
    let diff = linalg::sub(x, s.coords());
    let n2 = linalg::dot(&diff, &diff);
    let p = linalg::axpy(s.coords(), 4.0 / n2, &diff);
    UnitVector::normalize(&p)
}

/// Stereographic image of a cap that avoids `s`: a Euclidean ball in `H`.
///
/// `p` lies in the cap iff `project(p)` lies in the ball.
pub fn cap_image_ball(s: &UnitVector, cap: &SphericalCap, tol: &Tolerance) -> Result<EuclideanBall> {
    check_dim(s.dim(), cap.dim())?;
    let phi = angular_distance_unchecked(s, &cap.center);
    if phi <= cap.radius + tol.eps_geometry {
        return Err(Error::Precondition(format!(
            "cap contains or touches the projection pole (distance {phi}, radius {})",
            cap.radius
        )));
    }
    let toward = linalg::reject(cap.center.coords(), s.coords());
    let (u, _) = in_plane_direction(s, &toward);
    let t_of = |psi: f64| 2.0 * (psi / 2.0).cos() / (psi / 2.0).sin();
    let t_near = t_of(phi - cap.radius);
    let t_far = t_of(phi + cap.radius);
    let center = linalg::axpy(&linalg::neg(s.coords()), 0.5 * (t_near + t_far), &u);
    EuclideanBall::new(center, 0.5 * (t_near - t_far))
}

/// Preimage of a ball in `H` under the projection from `s`: a closed cap.
///
/// The cap has radius < pi/2 exactly when the ball is small and close enough
/// to `-s`; callers that need that regime check
/// [`SphericalCap::in_small_regime`] on the result.
pub fn ball_preimage_cap(s: &UnitVector, ball: &EuclideanBall, tol: &Tolerance) -> Result<SphericalCap> {
    check_dim(s.dim(), ball.dim())?;
    if ball.radius < tol.eps_geometry {
        return Err(Error::Degenerate(format!("ball radius {} too small", ball.radius)));
    }
    if off_plane(s, &ball.center) > 1e-9 {
        return Err(Error::Invalid("ball center does not lie in the tangent hyperplane at -s".into()));
    }
    let offset = linalg::add(&ball.center, s.coords());
    let (w, tau) = in_plane_direction(s, &offset);
    let psi_of = |t: f64| 2.0 * 2.0f64.atan2(t);
    let psi_near = psi_of(tau + ball.radius);
    let psi_far = psi_of(tau - ball.radius);
    let psi_c = 0.5 * (psi_near + psi_far);
    let center = linalg::axpy(&linalg::scale(s.coords(), psi_c.cos()), psi_c.sin(), &w);
    SphericalCap::closed(UnitVector::normalize(&center)?, 0.5 * (psi_far - psi_near))
}
