//! Polar bodies, bipolarity and the V/H polytope conversions behind them.

pub(crate) mod dd;
mod polytope;

pub use polytope::{integrate_abs_linear, Facet, Polytope};

use serde::{Deserialize, Serialize};

use crate::bodies::{self, ConvexBody};
use crate::error::Result;
use crate::linalg::{self, Vector};
use crate::report::{CheckReport, Relation, TolKind};
use crate::tolerances::BIPOLAR_TOL;

/// Extreme points and facet halfspaces of a point set's convex hull. The
/// offsets are 1 whenever the origin is interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullResult {
    pub vertices: Vec<Vector>,
    pub facets: Vec<Facet>,
}

pub fn hull(points: &[Vector]) -> Result<HullResult> {
    let p = Polytope::from_points(points)?;
    Ok(HullResult { vertices: p.vertices, facets: p.facets })
}

/// The polar body, built structurally.
pub fn polar(k: &ConvexBody) -> Result<ConvexBody> {
    Ok(match k {
        ConvexBody::Ball { dim } => ConvexBody::Ball { dim: *dim },
        ConvexBody::Interval { halfwidth } => ConvexBody::Interval { halfwidth: 1.0 / halfwidth },
        ConvexBody::VPolytope { vertices, .. } => {
            // Keep one representative of each +- pair.
            let mut normals: Vec<Vector> = Vec::new();
            for v in vertices {
                let scale = 1.0 + linalg::norm(v);
                let seen = normals.iter().any(|u| {
                    linalg::max_abs_diff(u, v) <= 1e-12 * scale
                        || linalg::max_abs_diff(u, &linalg::neg(v)) <= 1e-12 * scale
                });
                if !seen {
                    normals.push(v.clone());
                }
            }
            bodies::hpolytope(normals)?
        }
        ConvexBody::HPolytope { normals, .. } => {
            bodies::vpolytope(normals.iter().flat_map(|u| [u.clone(), linalg::neg(u)]).collect())?
        }
        ConvexBody::Zonotope { .. } => {
            let facets = k.zonotope_facets()?;
            bodies::vpolytope(facets.iter().map(|f| f.normal.clone()).collect())?
        }
        ConvexBody::L1Sum { parts } => {
            ConvexBody::LinfSum { parts: parts.iter().map(polar).collect::<Result<_>>()? }
        }
        ConvexBody::LinfSum { parts } => {
            ConvexBody::L1Sum { parts: parts.iter().map(polar).collect::<Result<_>>()? }
        }
        ConvexBody::Linear { body, .. } => {
            let inv_t = linalg::transpose(&k.inverse_matrix());
            bodies::linear(inv_t, polar(body)?)?
        }
    })
}

/// Largest `|support(K, y) - gauge(K*, y)|` over seeded unit directions.
pub fn duality_deviation(k: &ConvexBody, samples: usize, seed: u64) -> Result<f64> {
    let kp = polar(k)?;
    let mut worst = 0.0f64;
    for y in crate::rng::sphere_points(seed, samples, k.dim()) {
        worst = worst.max((k.support(&y)? - kp.gauge(&y)?).abs());
    }
    Ok(worst)
}

/// Largest `|gauge(K, x) - gauge(K**, x)|` over seeded unit directions.
pub fn bipolar_check(k: &ConvexBody, samples: usize, seed: u64) -> Result<CheckReport> {
    let kpp = polar(&polar(k)?)?;
    let mut worst = 0.0f64;
    for x in crate::rng::sphere_points(seed, samples, k.dim()) {
        worst = worst.max((k.gauge(&x)? - kpp.gauge(&x)?).abs());
    }
    Ok(CheckReport::new("bipolar", worst, Relation::Le, 0.0, BIPOLAR_TOL, TolKind::Abs)
        .with_seed(seed)
        .with_samples(samples as u64)
        .with_digest(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{ball, cross_polytope, cube, interval, l1sum, linfsum, vpolytope, zonotope};

    #[test]
    fn cube_polar_is_diamond() {
        let p = polar(&cube(2)).unwrap();
        assert_eq!(p, cross_polytope(2));
    }

    #[test]
    fn double_cone_polar_is_cylinder() {
        let cone = l1sum(vec![ball(2).unwrap(), interval(1.0).unwrap()]).unwrap();
        let cyl = linfsum(vec![ball(2).unwrap(), interval(1.0).unwrap()]).unwrap();
        assert_eq!(polar(&cone).unwrap(), cyl);
    }

    #[test]
    fn square_pyramid_polar_by_vertices() {
        let body = vpolytope(vec![
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, -1.0],
            vec![1.0, 1.0, 0.0],
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 1.0, 0.0],
            vec![-1.0, -1.0, 0.0],
        ])
        .unwrap();
        let expected = linfsum(vec![cross_polytope(2), interval(1.0).unwrap()]).unwrap();
        let p = polar(&body).unwrap();
        for x in crate::rng::sphere_points(1, 200, 3) {
            assert!((p.gauge(&x).unwrap() - expected.gauge(&x).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn polytope_polars_round_trip() {
        let h = bodies::hpolytope(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(bipolar_check(&h, 300, 4).unwrap().pass);
        assert!(duality_deviation(&h, 300, 5).unwrap() <= 1e-9);
        let v = vpolytope(vec![vec![1.0, 0.3], vec![-1.0, -0.3], vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
        assert!(bipolar_check(&v, 300, 6).unwrap().pass);
    }

    #[test]
    fn hull_examples() {
        let h = hull(&[
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
            vec![0.5, 0.0],
        ])
        .unwrap();
        assert_eq!(h.vertices.len(), 4);
        assert!(!h.vertices.contains(&vec![0.5, 0.0]));

        let sq = hull(&[vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]).unwrap();
        let mut normals: Vec<Vector> = sq.facets.iter().map(|f| f.normal.clone()).collect();
        normals.sort_by(|a, b| linalg::lex_cmp(a, b));
        assert_eq!(normals, vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn zonotope_sign_points_hull_to_hexagon() {
        let gens = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let h = hull(&bodies::zonotope_sign_points(&gens).unwrap()).unwrap();
        let mut expected = vec![
            vec![2.0, 2.0],
            vec![0.0, 2.0],
            vec![-2.0, 0.0],
            vec![-2.0, -2.0],
            vec![0.0, -2.0],
            vec![2.0, 0.0],
        ];
        expected.sort_by(|a, b| linalg::lex_cmp(a, b));
        assert_eq!(h.vertices, expected);
        for f in &h.facets {
            for p in bodies::zonotope_sign_points(&gens).unwrap() {
                assert!(linalg::dot(&f.normal, &p) <= f.offset + 1e-9);
            }
        }
    }

    #[test]
    fn bipolar_examples() {
        assert!(bipolar_check(&cube(3), 500, 1).unwrap().lhs <= 1e-9);
        let z = zonotope(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(bipolar_check(&z, 500, 2).unwrap().pass);
        assert_eq!(bipolar_check(&ball(4).unwrap(), 500, 3).unwrap().lhs, 0.0);
    }
}
