//! Named test bodies and seeded random body generators.

use rand::Rng as _;

use crate::bodies::{self, ball, cross_polytope, cube, interval, l1sum, linfsum, zonotope, ConvexBody};
use crate::linalg::{self, Matrix, Vector};
use crate::rng::{self, Rng};

/// Zonotope with generators `e1, e2, (1, 1)` (a hexagon).
pub fn hexagon() -> ConvexBody {
    zonotope(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).expect("valid")
}

/// Zonotope with generators `e1, e2, (1, 1), (1, -1)`.
pub fn octagon() -> ConvexBody {
    zonotope(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, -1.0]]).expect("valid")
}

/// `sqrt(x1^2 + x2^2) + |x3| <= 1`.
pub fn double_cone() -> ConvexBody {
    l1sum(vec![ball(2).expect("valid"), interval(1.0).expect("valid")]).expect("valid")
}

/// Disk times `[-1, 1]`, the polar of [`double_cone`].
pub fn cylinder() -> ConvexBody {
    linfsum(vec![ball(2).expect("valid"), interval(1.0).expect("valid")]).expect("valid")
}

/// `conv(+-e3, [-1, 1]^2 x {0})`, a double pyramid over the square.
pub fn square_bipyramid() -> ConvexBody {
    l1sum(vec![cube(2), interval(1.0).expect("valid")]).expect("valid")
}

/// The same double pyramid given by its six vertices.
pub fn square_bipyramid_vertices() -> ConvexBody {
    bodies::vpolytope(vec![
        vec![1.0, 1.0, 0.0],
        vec![1.0, -1.0, 0.0],
        vec![-1.0, 1.0, 0.0],
        vec![-1.0, -1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, -1.0],
    ])
    .expect("valid")
}

/// Vertex description of `[-1, 1]^n`.
pub fn cube_vertices(n: usize) -> ConvexBody {
    let verts = (0..1u32 << n)
        .map(|s| (0..n).map(|k| if s >> k & 1 == 0 { 1.0 } else { -1.0 }).collect())
        .collect();
    bodies::vpolytope(verts).expect("valid")
}

pub fn rotation(angle: f64) -> Matrix {
    let (s, c) = angle.sin_cos();
    vec![vec![c, -s], vec![s, c]]
}

/// Named bodies covering every variant, all in dimension at most 4.
pub fn catalog() -> Vec<(&'static str, ConvexBody)> {
    vec![
        ("interval", interval(1.5).expect("valid")),
        ("square", cube(2)),
        ("cube3", cube(3)),
        ("diamond", cross_polytope(2)),
        ("cross3", cross_polytope(3)),
        ("disk", ball(2).expect("valid")),
        ("ball3", ball(3).expect("valid")),
        ("ball4", ball(4).expect("valid")),
        ("hexagon", hexagon()),
        ("octagon", octagon()),
        ("double-cone", double_cone()),
        ("cylinder", cylinder()),
        ("bipyramid", square_bipyramid()),
        ("bipyramid-v", square_bipyramid_vertices()),
        ("cube3-v", cube_vertices(3)),
        (
            "hpolytope",
            bodies::hpolytope(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).expect("valid"),
        ),
        (
            "vpolytope",
            bodies::vpolytope(vec![vec![1.0, 0.3], vec![-1.0, -0.3], vec![0.0, 1.0], vec![0.0, -1.0]])
                .expect("valid"),
        ),
        (
            "sheared-square",
            bodies::linear(vec![vec![1.0, 0.5], vec![0.0, 2.0]], cube(2)).expect("valid"),
        ),
        ("rotated-disk", bodies::linear(rotation(0.7), ball(2).expect("valid")).expect("valid")),
    ]
}

/// Gaussian matrix shifted towards the identity, with `|det|` bounded away
/// from zero.
pub fn random_matrix(rng: &mut Rng, n: usize) -> Matrix {
    loop {
        let m: Matrix = (0..n)
            .map(|i| {
                let mut row = rng::gaussian_vector(rng, n);
                row[i] += 2.0;
                row
            })
            .collect();
        if linalg::det(&m).abs() > 0.1 {
            return m;
        }
    }
}

/// Zonotope with `g` Gaussian generators spanning R^n.
pub fn random_zonotope(rng: &mut Rng, n: usize, g: usize) -> ConvexBody {
    loop {
        let gens: Vec<Vector> = (0..g).map(|_| rng::gaussian_vector(rng, n)).collect();
        if let Ok(z) = zonotope(gens.clone()) {
            if linalg::rank(&gens, 1e-6) == n {
                return z;
            }
        }
    }
}

/// Symmetric V-polytope from `m` random points and their negations.
pub fn random_vpolytope(rng: &mut Rng, n: usize, m: usize) -> ConvexBody {
    loop {
        let mut verts: Vec<Vector> = Vec::with_capacity(2 * m);
        for _ in 0..m {
            let v = rng::gaussian_vector(rng, n);
            verts.push(linalg::neg(&v));
            verts.push(v);
        }
        if let Ok(p) = bodies::vpolytope(verts) {
            if p.polytope().is_ok() {
                return p;
            }
        }
    }
}

/// Random body drawn from every variant family, dimension 2 or 3.
pub fn random_body(rng: &mut Rng) -> ConvexBody {
    let n = rng.random_range(2..=3);
    match rng.random_range(0..6) {
        0 => {
            let g = rng.random_range(n..=n + 3);
            random_zonotope(rng, n, g)
        }
        1 => {
            let m = rng.random_range(n..=n + 4);
            random_vpolytope(rng, n, m)
        }
        2 => crate::duality::polar(&random_vpolytope(rng, n, n + 2)).expect("polar"),
        3 => bodies::linear(random_matrix(rng, n), cube(n)).expect("valid"),
        4 => {
            let parts = vec![interval(rng.random_range(0.5..2.0)).expect("valid"), ball(n - 1).expect("valid")];
            if rng.random_bool(0.5) { l1sum(parts) } else { linfsum(parts) }.expect("valid")
        }
        _ => bodies::linear(random_matrix(rng, n), ball(n).expect("valid")).expect("valid"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_bodies_are_valid() {
        for (name, k) in catalog() {
            k.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn random_bodies_are_reproducible() {
        let a = random_body(&mut rng::stream(5, 0));
        let b = random_body(&mut rng::stream(5, 0));
        assert_eq!(a.to_json(), b.to_json());
    }
}
