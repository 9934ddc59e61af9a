//! Geodesic icosphere meshes with a bound on their covering radius.

use std::collections::HashMap;

type P3 = [f64; 3];

fn normalize(p: P3) -> P3 {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / n, p[1] / n, p[2] / n]
}

fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: P3, b: P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn angle(a: P3, b: P3) -> f64 {
    let d = sub(a, b);
    let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let nd = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let ns = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    2.0 * nd.atan2(ns)
}

fn icosahedron() -> (Vec<P3>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let v = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (v.iter().map(|p| normalize(*p)).collect(), faces)
}

/// Vertices of the frequency-`f` geodesic subdivision of the icosahedron,
/// and `rho`: every point of S^2 lies within angle `rho` of some vertex.
///
/// `rho` is the largest circumradius of the spherical mesh triangles. The
/// triangles tile the sphere and every point of a triangle is within its
/// circumradius of one of its corners.
pub fn icosphere(f: usize) -> (Vec<P3>, f64) {
    assert!(f >= 1);
    let (base, faces) = icosahedron();
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut points: Vec<P3> = Vec::new();
    let mut rho: f64 = 0.0;
    let key = |p: P3| [(p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64, (p[2] * 1e9).round() as i64];
    for face in &faces {
        let [a, b, c] = face.map(|i| base[i]);
        let at = |i: usize, j: usize| {
            // barycentric (f - i - j, i, j)
            let w0 = (f - i - j) as f64;
            let (w1, w2) = (i as f64, j as f64);
            normalize([
                w0 * a[0] + w1 * b[0] + w2 * c[0],
                w0 * a[1] + w1 * b[1] + w2 * c[1],
                w0 * a[2] + w1 * b[2] + w2 * c[2],
            ])
        };
        for i in 0..=f {
            for j in 0..=f - i {
                let p = at(i, j);
                index.entry(key(p)).or_insert_with(|| {
                    points.push(p);
                    points.len() - 1
                });
            }
        }
        let mut tri = |p: P3, q: P3, r: P3| {
            let mut n = normalize(cross(sub(q, p), sub(r, p)));
            if n[0] * p[0] + n[1] * p[1] + n[2] * p[2] < 0.0 {
                n = [-n[0], -n[1], -n[2]];
            }
            rho = rho.max(angle(n, p)).max(angle(n, q)).max(angle(n, r));
        };
        for i in 0..f {
            for j in 0..f - i {
                tri(at(i, j), at(i + 1, j), at(i, j + 1));
                if i + j + 1 < f {
                    tri(at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
                }
            }
        }
    }
    // absorb rounding in the circumcenter computation
    (points, rho * (1.0 + 1e-9) + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_counts_and_radius() {
        for f in [1, 2, 8] {
            let (pts, rho) = icosphere(f);
            assert_eq!(pts.len(), 10 * f * f + 2);
            assert!(rho > 0.0);
        }
        let (_, r1) = icosphere(1);
        // icosahedron face circumradius
        assert!((r1 - 0.652_358_139_784_368_2).abs() < 1e-9, "{r1}");
        let (_, r16) = icosphere(16);
        assert!(r16 < r1 / 10.0);
    }

    #[test]
    fn random_points_are_within_rho() {
        use rand::SeedableRng;
        let (pts, rho) = icosphere(6);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let q = crate::linalg::random_unit(&mut rng, 3);
            let q = [q[0], q[1], q[2]];
            let best = pts.iter().map(|p| angle(*p, q)).fold(f64::INFINITY, f64::min);
            assert!(best <= rho);
        }
    }
}
