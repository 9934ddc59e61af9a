//! Independent evaluations of derived quantities, and frozen values.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};

use approx::assert_relative_eq;

use spiky::bounds::{capbody_bound, f_ratio, g_ratio, omega, ratio_curves, threshold_scan, to_csv, BoundKind};
use spiky::coverings::icosphere;
use spiky::sphere::{cap_image_ball, equatorial_slice, SphericalCap, Tolerance, UnitVector};
use spiky::spiky::{vertex_cap, SpikyBall, Symmetry};

/// Cap fraction of S^m in closed form for small m.
fn omega_closed(m: usize, a: f64) -> f64 {
    match m {
        1 => a / PI,
        2 => (1.0 - a.cos()) / 2.0,
        3 => (a - a.sin() * a.cos()) / PI,
        4 => (2.0 - 3.0 * a.cos() + a.cos().powi(3)) / 4.0,
        _ => unreachable!(),
    }
}

/// Composite Gauss-Legendre (5 nodes, 2000 panels) of `sin^{m-1}` over `[0, a]`,
/// normalized by the same rule over `[0, pi]`.
fn omega_gauss(m: usize, a: f64) -> f64 {
    const X: [f64; 5] = [0.0, -0.538_469_310_105_683, 0.538_469_310_105_683, -0.906_179_845_938_664, 0.906_179_845_938_664];
    const W: [f64; 5] = [
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
        0.236_926_885_056_189,
    ];
    let integral = |b: f64| {
        let panels = 2000;
        let h = b / panels as f64;
        (0..panels)
            .map(|k| {
                let mid = (k as f64 + 0.5) * h;
                X.iter().zip(&W).map(|(x, w)| w * (mid + 0.5 * h * x).sin().powi(m as i32 - 1)).sum::<f64>() * 0.5 * h
            })
            .sum::<f64>()
    };
    integral(a) / integral(PI)
}

#[test]
fn omega_matches_closed_forms() {
    for m in 1..=4 {
        for a in [0.1, FRAC_PI_6, FRAC_PI_4, 1.0, FRAC_PI_2] {
            assert_relative_eq!(omega(m, a).unwrap(), omega_closed(m, a), max_relative = 1e-11);
        }
    }
}

#[test]
fn omega_matches_gauss_legendre() {
    for m in [5, 10, 20, 40, 60] {
        for a in [FRAC_PI_6, FRAC_PI_4] {
            assert_relative_eq!(omega(m, a).unwrap(), omega_gauss(m, a), max_relative = 1e-9);
        }
    }
}

#[test]
fn frozen_bound_values() {
    assert_relative_eq!(g_ratio(19).unwrap(), 1.061_088_242_212_530_7, max_relative = 1e-12);
    assert_relative_eq!(g_ratio(20).unwrap(), 0.822_787_203_750_811_5, max_relative = 1e-12);
    assert_relative_eq!(f_ratio(5).unwrap(), 0.602_033, max_relative = 1e-5);
    assert_relative_eq!(capbody_bound(20).unwrap(), 862_754.914_960_210_9, max_relative = 1e-12);
    assert_eq!(threshold_scan(BoundKind::Capbody).unwrap(), 20);
    assert_eq!(threshold_scan(BoundKind::Spiky).unwrap(), 5);
}

#[test]
fn csv_crosses_below_one_at_twenty() {
    let csv = to_csv(&ratio_curves(5, 40).unwrap());
    let g: Vec<(usize, f64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            (cells[0].parse().unwrap(), cells[8].parse().unwrap())
        })
        .collect();
    assert_eq!(g.len(), 36);
    let first_below = g.iter().find(|(_, v)| *v < 1.0).unwrap().0;
    assert_eq!(first_below, 20);
    assert!(g.iter().filter(|(d, _)| *d >= 20).all(|(_, v)| *v < 1.0));
}

#[test]
fn vertex_cap_angles() {
    // |x| = n gives alpha = arctan(sqrt(n^2 - 1)) = arccos(1/n)
    for n in [1.1f64, 2f64.sqrt(), 2.0, 5.0] {
        let pair = vertex_cap(&[0.0, n, 0.0]).unwrap();
        assert_relative_eq!(pair.alpha(), (n * n - 1.0).sqrt().atan(), max_relative = 1e-14);
        assert_relative_eq!(pair.piercing_cap.radius, FRAC_PI_2 - (1.0 / n).acos(), max_relative = 1e-13);
        assert_eq!(pair.piercing_cap.center.coords(), &[0.0, -1.0, 0.0]);
    }
}

#[test]
fn cap_image_ball_of_equatorial_cap() {
    // from the north pole, a cap of radius r around the south pole maps to
    // the disk of radius 2 tan(r / 2) around -s in the plane z = -1
    let s = UnitVector::axis(3, 2);
    for r in [0.1, 0.5, 1.0, 1.4] {
        let cap = SphericalCap::closed(s.antipode(), r).unwrap();
        let ball = cap_image_ball(&s, &cap, &Tolerance::default()).unwrap();
        assert_relative_eq!(ball.radius, 2.0 * (r / 2.0).tan(), max_relative = 1e-12);
        assert!(spiky::linalg::distance(&ball.center, &[0.0, 0.0, -1.0]) < 1e-12);
    }
}

#[test]
fn slice_radius_by_napier() {
    // cap C(w, b) with w at angle t from the axis: cos(slice) = cos(b) / sin(t)
    let axis = UnitVector::axis(3, 2);
    for (t, b) in [(1.2f64, 0.9f64), (FRAC_PI_2, FRAC_PI_4), (0.8, 1.3)] {
        let w = UnitVector::new(vec![t.sin(), 0.0, t.cos()]).unwrap();
        let s = equatorial_slice(&SphericalCap::open(w, b).unwrap(), &axis).unwrap().unwrap();
        assert_relative_eq!(s.cap.radius, (b.cos() / t.sin()).acos(), max_relative = 1e-12);
    }
}

#[test]
fn icosphere_radius_frozen() {
    let (_, r1) = icosphere(1);
    // circumradius of an icosahedron face on the unit sphere
    let oracle = (((5.0 + 2.0 * 5f64.sqrt()) / 15.0).sqrt()).acos();
    assert_relative_eq!(r1, oracle, max_relative = 1e-8);
    assert_relative_eq!(r1, 0.652_358_139_784_368_2, max_relative = 1e-8);
}

#[test]
fn antipodal_pairs_of_symmetric_instance() {
    let s = 2f64.sqrt();
    let ball = SpikyBall::new(
        3,
        vec![vec![s, 0.0, 0.0], vec![-s, 0.0, 0.0], vec![0.0, 0.0, 3.0], vec![0.0, 0.0, -3.0]],
        Symmetry::Origin,
        &Tolerance::default(),
    )
    .unwrap();
    assert_eq!(ball.antipodal_pairs(), vec![(0, 1), (2, 3)]);
}
