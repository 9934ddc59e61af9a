use std::f64::consts::{FRAC_PI_4, PI};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spiky::constructions::{build_uv_vectors, classify_k_spanning, escape_test, illuminate_symmetric, KSpanningSignature};
use spiky::coverings::{known_cover, verify_cover};
use spiky::linalg;
use spiky::piercing::{pierce_arcs_exact, pierce_balls_danzer};
use spiky::sphere::{
    angular_distance, cap_image_ball, positive_hull_full, stereographic_lift, stereographic_project, EuclideanBall,
    SphericalCap, Tolerance, UnitVector,
};
use spiky::spiky::{gen_instance, verify_illumination, DirectionSet, InstanceKind, SpikyBall};

fn tol() -> Tolerance {
    Tolerance::default()
}

fn unit(seed: u64, d: usize) -> UnitVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    UnitVector::new(linalg::random_unit(&mut rng, d)).unwrap()
}

fn rotate(rot: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    linalg::mat_vec(rot, v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distance_is_a_metric(a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), d in 2usize..7) {
        let (x, y, z) = (unit(a, d), unit(b, d), unit(c, d));
        let xy = angular_distance(&x, &y).unwrap();
        prop_assert!((xy - angular_distance(&y, &x).unwrap()).abs() < 1e-15);
        prop_assert!((0.0..=PI).contains(&xy));
        let xz = angular_distance(&x, &z).unwrap();
        let zy = angular_distance(&z, &y).unwrap();
        prop_assert!(xy <= xz + zy + 1e-12);
    }

    #[test]
    fn stereographic_round_trip(a in any::<u64>(), b in any::<u64>(), d in 2usize..7) {
        let (s, p) = (unit(a, d), unit(b, d));
        prop_assume!(angular_distance(&s, &p).unwrap() > 1e-3);
        let x = stereographic_project(&s, &p, &tol()).unwrap();
        // the image lies in the tangent hyperplane at -s
        prop_assert!((linalg::dot(&x, s.coords()) + 1.0).abs() < 1e-9 * (1.0 + linalg::norm(&x)));
        let back = stereographic_lift(&s, &x).unwrap();
        prop_assert!(linalg::distance(back.coords(), p.coords()) < 1e-9);
    }

    #[test]
    fn cap_image_preserves_incidence(a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), r in 0.05f64..1.4, d in 2usize..6) {
        let (s, center, p) = (unit(a, d), unit(b, d), unit(c, d));
        let cap = SphericalCap::closed(center, r).unwrap();
        prop_assume!(cap.margin(&s) < -1e-3);
        prop_assume!(cap.margin(&p).abs() > 1e-6 && angular_distance(&s, &p).unwrap() > 1e-2);
        let ball = cap_image_ball(&s, &cap, &tol()).unwrap();
        let x = stereographic_project(&s, &p, &tol()).unwrap();
        prop_assert_eq!(cap.margin(&p) > 0.0, ball.margin(&x) > 0.0);
    }

    #[test]
    fn rotation_preserves_verdict(seed in 0u64..40, rot_seed in any::<u64>()) {
        let ball = gen_instance(InstanceKind::SymmetricCapBody, 3, 3, seed, &tol()).unwrap();
        let mut cover = known_cover(1, FRAC_PI_4).unwrap();
        verify_cover(&mut cover, &tol()).unwrap();
        let dirs = illuminate_symmetric(&ball, &cover, seed, &tol()).unwrap().directions;
        let mut rng = ChaCha8Rng::seed_from_u64(rot_seed);
        let rot = linalg::random_rotation(&mut rng, 3);
        let turned = SpikyBall::new(3, ball.vertices.iter().map(|v| rotate(&rot, v)).collect(), ball.symmetry, &tol()).unwrap();
        let turned_dirs = DirectionSet::new(3, dirs.directions.iter().map(|u| UnitVector::normalize(&rotate(&rot, u.coords())).unwrap()).collect()).unwrap();
        let before = verify_illumination(&ball, &dirs, &tol()).unwrap();
        let after = verify_illumination(&turned, &turned_dirs, &tol()).unwrap();
        prop_assert_eq!(before.verdict, after.verdict);
        prop_assert!((before.min_margin - after.min_margin).abs() < 1e-9);
        // dropping all but one direction breaks the positive hull either way
        let one = DirectionSet::new(3, vec![dirs.directions[0].clone()]).unwrap();
        prop_assert!(!verify_illumination(&ball, &one, &tol()).unwrap().verdict);
    }

    #[test]
    fn signature_round_trip(d in 2usize..9, mask in any::<u32>(), signs in any::<u32>()) {
        let support: Vec<usize> = (0..d).filter(|j| mask >> j & 1 == 1).collect();
        prop_assume!(support.len() >= 2);
        let s: Vec<i8> = (0..support.len()).map(|i| if signs >> i & 1 == 1 { -1 } else { 1 }).collect();
        let sig = KSpanningSignature::new(support, s).unwrap();
        prop_assert_eq!(classify_k_spanning(&sig.cap(d).unwrap(), &tol()), Some(sig));
    }

    #[test]
    fn escape_matches_membership(a in any::<u64>(), b in any::<u64>(), r in 0.05f64..1.5, d in 2usize..7) {
        let cap = SphericalCap::open(unit(a, d), r).unwrap();
        let u = unit(b, d);
        let ratio = cap.center.dot(&u).abs() / r.cos();
        prop_assume!((ratio - 1.0).abs() > 1e-9);
        let direct = cap.margin(&u) > 0.0 || cap.margin(&u.antipode()) > 0.0;
        prop_assert_eq!(escape_test(&cap, &u, &tol()), direct);
    }

    #[test]
    fn generation_is_deterministic(seed in 0u64..1000, d in 2usize..5) {
        let a = gen_instance(InstanceKind::TwoIlluminable, d, 6, seed, &tol()).unwrap();
        let b = gen_instance(InstanceKind::TwoIlluminable, d, 6, seed, &tol()).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        let back = SpikyBall::from_json(&a.to_json(), &tol()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn positive_hull_is_monotone(seed in any::<u64>(), d in 2usize..6, extra in 1usize..4) {
        let mut vs: Vec<UnitVector> = (0..d).map(|j| UnitVector::axis(d, j)).collect();
        let sum: Vec<f64> = (0..d).map(|_| -1.0).collect();
        vs.push(UnitVector::normalize(&sum).unwrap());
        prop_assert!(positive_hull_full(&vs, &tol()).unwrap());
        for k in 0..extra {
            vs.push(unit(seed.wrapping_add(k as u64), d));
            prop_assert!(positive_hull_full(&vs, &tol()).unwrap());
        }
        // a set inside an open half-space never spans positively
        let half: Vec<UnitVector> = vs.iter().map(|v| {
            let mut c = v.coords().to_vec();
            c[0] = c[0].abs() + 0.1;
            UnitVector::normalize(&c).unwrap()
        }).collect();
        prop_assert!(!positive_hull_full(&half, &tol()).unwrap());
    }

    #[test]
    fn arc_piercing_is_valid_and_small(seed in 0u64..500) {
        let ball = gen_instance(InstanceKind::TwoIlluminable, 2, 15, seed, &tol()).unwrap();
        let arcs = ball.piercing_caps().unwrap();
        let sol = pierce_arcs_exact(&arcs, &tol()).unwrap();
        prop_assert!(sol.len() <= 2);
        prop_assert!(sol.margins.iter().all(|&m| m >= tol().eps_geometry));
    }

    #[test]
    fn danzer_pierces_pairwise_intersecting_disks(centers in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0, 0.2f64..2.0), 1..30)) {
        let mut fam: Vec<EuclideanBall> = Vec::new();
        for (x, y, r) in centers {
            let b = EuclideanBall::new(vec![x, y], r).unwrap();
            if fam.iter().all(|o| o.intersects(&b, 0.0)) {
                fam.push(b);
            }
        }
        let mut hex = known_cover(1, PI / 6.0).unwrap();
        verify_cover(&mut hex, &tol()).unwrap();
        let sol = pierce_balls_danzer(&fam, &hex, &tol()).unwrap();
        prop_assert_eq!(sol.len(), 7);
        for b in &fam {
            let best = sol.points.iter().map(|p| b.margin(p)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(best >= -1e-12 * (1.0 + b.radius));
        }
    }
}

/// Pierce margin of the best tilted direction for one k-spanning cap.
fn uv_margin(cap: &SphericalCap, d: usize, phi: f64) -> f64 {
    build_uv_vectors(d, phi)
        .unwrap()
        .directions
        .iter()
        .map(|u| cap.margin(u))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn tilted_directions_pierce_every_signature_near_zero() {
    for d in 3..=6usize {
        for mask in 0u32..(1 << d) {
            let support: Vec<usize> = (0..d).filter(|j| mask >> j & 1 == 1).collect();
            if support.len() < 2 {
                continue;
            }
            for signs in 0u32..(1 << support.len()) {
                let s: Vec<i8> = (0..support.len()).map(|i| if signs >> i & 1 == 1 { -1 } else { 1 }).collect();
                let sig = KSpanningSignature::new(support.clone(), s).unwrap();
                let cap = sig.cap(d).unwrap();
                let mut phi = PI / 8.0;
                while uv_margin(&cap, d, phi) <= 0.0 {
                    phi /= 2.0;
                    assert!(phi > 1e-6, "d={d} {sig:?}");
                }
                assert!(uv_margin(&cap, d, phi / 2.0) > 0.0, "d={d} {sig:?} at phi/2");
            }
        }
    }
}

#[test]
fn uv_vectors_tend_to_axes() {
    for phi in [0.1, 0.01, 0.001] {
        let set = build_uv_vectors(4, phi).unwrap();
        for (i, w) in set.directions.iter().enumerate() {
            let j = i / 4;
            let e = if i % 2 == 0 { UnitVector::axis(4, j) } else { UnitVector::axis(4, j).antipode() };
            assert!((angular_distance(w, &e).unwrap() - phi).abs() < 1e-12);
        }
    }
}
