//! Polytopes with both descriptions, vertex-facet incidence and a fan
//! triangulation.

use crate::duality::dd::enumerate_vertices;
use crate::error::{capability, input, Result};
use crate::linalg::{self, dot, sub, Matrix, Vector};
use crate::tolerances::{DEGENERATE_SIMPLEX, EXACT_DIM_CAP, HULL_TOL};

/// Halfspace `<normal, x> <= offset`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Facet {
    pub normal: Vector,
    pub offset: f64,
}

/// A full-dimensional polytope in R^dim.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub dim: usize,
    pub vertices: Vec<Vector>,
    pub facets: Vec<Facet>,
    /// For each facet, indices of the vertices lying on it.
    pub incidence: Vec<Vec<usize>>,
}

fn check_cap(n: usize) -> Result<()> {
    if n > EXACT_DIM_CAP {
        return capability(format!(
            "exact polytope operations are capped at dimension {EXACT_DIM_CAP}, got {n}"
        ));
    }
    Ok(())
}

fn on_facet(f: &Facet, v: &[f64]) -> bool {
    (dot(&f.normal, v) - f.offset).abs() <= HULL_TOL * f.offset.abs().max(1.0)
}

impl Polytope {
    /// Polytope `{x : <a_i, x> <= b_i}`; redundant constraints are dropped.
    pub fn from_halfspaces(normals: &[Vector], offsets: &[f64]) -> Result<Self> {
        let n = normals.first().map_or(0, Vec::len);
        check_cap(n)?;
        let vertices = enumerate_vertices(normals, offsets)?;
        let mut facets = Vec::new();
        let mut incidence: Vec<Vec<usize>> = Vec::new();
        for (a, b) in normals.iter().zip(offsets) {
            let f = Facet { normal: a.clone(), offset: *b };
            let tight: Vec<usize> = (0..vertices.len()).filter(|&i| on_facet(&f, &vertices[i])).collect();
            if tight.len() < n || incidence.contains(&tight) {
                continue;
            }
            let pts: Vec<&Vector> = tight.iter().map(|&i| &vertices[i]).collect();
            if linalg::affine_dim(&pts, HULL_TOL) + 1 == n {
                facets.push(f);
                incidence.push(tight);
            }
        }
        Ok(Polytope { dim: n, vertices, facets, incidence })
    }

    /// Convex hull of `points`. Fails when the points do not span R^n.
    pub fn from_points(points: &[Vector]) -> Result<Self> {
        let Some(n) = points.first().map(Vec::len) else {
            return input("hull of an empty point set");
        };
        check_cap(n)?;
        let mut pts: Vec<Vector> = Vec::new();
        for p in points {
            if !pts.iter().any(|q| linalg::max_abs_diff(p, q) <= 1e-12 * (1.0 + linalg::norm(p))) {
                pts.push(p.clone());
            }
        }
        let centroid: Vector = (0..n)
            .map(|j| pts.iter().map(|p| p[j]).sum::<f64>() / pts.len() as f64)
            .collect();
        let shifted: Vec<Vector> = pts.iter().map(|p| sub(p, &centroid)).collect();
        let r = linalg::rank(&shifted, 1e-10);
        if r < n {
            return input(format!("degenerate point set: rank {r} < dimension {n}"));
        }
        // Facets of conv(shifted) are the vertices of {u : <q_i, u> <= 1}.
        let polar_vertices = enumerate_vertices(&shifted, &vec![1.0; shifted.len()])?;
        let mut facets: Vec<Facet> = polar_vertices
            .iter()
            .map(|u| Facet { normal: u.clone(), offset: 1.0 + dot(u, &centroid) })
            .collect();

        let is_vertex: Vec<bool> = pts
            .iter()
            .map(|p| {
                let normals: Vec<Vector> =
                    facets.iter().filter(|f| on_facet(f, p)).map(|f| f.normal.clone()).collect();
                normals.len() >= n && linalg::rank(&normals, 1e-10) == n
            })
            .collect();
        let mut vertices: Vec<Vector> =
            pts.iter().zip(&is_vertex).filter(|(_, v)| **v).map(|(p, _)| p.clone()).collect();
        vertices.sort_by(|a, b| linalg::lex_cmp(a, b));

        // Normalize to offset 1 when the origin is interior.
        if facets.iter().all(|f| f.offset > HULL_TOL) {
            for f in &mut facets {
                f.normal = f.normal.iter().map(|x| x / f.offset).collect();
                f.offset = 1.0;
            }
        }
        let incidence = facets
            .iter()
            .map(|f| (0..vertices.len()).filter(|&i| on_facet(f, &vertices[i])).collect())
            .collect();
        Ok(Polytope { dim: n, vertices, facets, incidence })
    }

    /// Simplices (as vertex index lists of length dim+1) of a fan
    /// triangulation pulled from the lexicographically smallest vertex of
    /// every face.
    pub fn triangulate(&self) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        let mut out = Vec::new();
        self.fan(&all, self.dim, &mut out);
        out.retain(|s| self.simplex_volume(s) > DEGENERATE_SIMPLEX);
        out
    }

    fn fan(&self, face: &[usize], k: usize, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            out.push(vec![face[0]]);
            return;
        }
        let apex = *face
            .iter()
            .min_by(|&&a, &&b| linalg::lex_cmp(&self.vertices[a], &self.vertices[b]))
            .expect("nonempty face");
        for sub in self.subfaces(face, k) {
            if sub.contains(&apex) {
                continue;
            }
            let mut inner = Vec::new();
            self.fan(&sub, k - 1, &mut inner);
            for mut s in inner {
                s.push(apex);
                out.push(s);
            }
        }
    }

    fn subfaces(&self, face: &[usize], k: usize) -> Vec<Vec<usize>> {
        let mut subs: Vec<Vec<usize>> = Vec::new();
        for inc in &self.incidence {
            let cand: Vec<usize> = face.iter().copied().filter(|i| inc.contains(i)).collect();
            if cand.len() < k || cand.len() == face.len() || subs.contains(&cand) {
                continue;
            }
            let pts: Vec<&Vector> = cand.iter().map(|&i| &self.vertices[i]).collect();
            if linalg::affine_dim(&pts, HULL_TOL) + 1 == k {
                subs.push(cand);
            }
        }
        subs
    }

    fn simplex_volume(&self, s: &[usize]) -> f64 {
        let base = &self.vertices[s[0]];
        let rows: Matrix = s[1..].iter().map(|&i| sub(&self.vertices[i], base)).collect();
        linalg::det(&rows).abs() / linalg::factorial(self.dim)
    }

    pub fn volume(&self) -> f64 {
        self.triangulate().iter().map(|s| self.simplex_volume(s)).sum()
    }

    /// Volume, first moment `int x dx` and second moment `int x x^T dx`.
    pub fn moments(&self) -> (f64, Vector, Matrix) {
        let n = self.dim;
        let mut vol = 0.0;
        let mut first = vec![0.0; n];
        let mut second = vec![vec![0.0; n]; n];
        for s in self.triangulate() {
            let v = self.simplex_volume(&s);
            let pts: Vec<&Vector> = s.iter().map(|&i| &self.vertices[i]).collect();
            let sum: Vector = (0..n).map(|j| pts.iter().map(|p| p[j]).sum()).collect();
            vol += v;
            for j in 0..n {
                first[j] += v * sum[j] / (n + 1) as f64;
            }
            // int_S x x^T = vol / ((n+1)(n+2)) * (sum_i v_i v_i^T + s s^T)
            let c = v / ((n + 1) * (n + 2)) as f64;
            for a in 0..n {
                for b in 0..n {
                    let outer: f64 = pts.iter().map(|p| p[a] * p[b]).sum();
                    second[a][b] += c * (outer + sum[a] * sum[b]);
                }
            }
        }
        (vol, first, second)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.facets.iter().all(|f| dot(&f.normal, x) <= f.offset + tol)
    }
}

/// Exact `int_P |<u, y>| dy` by clipping each simplex of the triangulation
/// at the hyperplane `<u, y> = 0`.
pub fn integrate_abs_linear(poly: &Polytope, u: &[f64]) -> Result<f64> {
    let n = poly.dim;
    let mut total = 0.0;
    for s in poly.triangulate() {
        let pts: Vec<&Vector> = s.iter().map(|&i| &poly.vertices[i]).collect();
        let vals: Vec<f64> = pts.iter().map(|p| dot(u, p)).collect();
        let base = pts[0];
        let rows: Matrix = pts[1..].iter().map(|p| sub(p, base)).collect();
        let vol = linalg::det(&rows).abs() / linalg::factorial(n);
        let mean = vals.iter().sum::<f64>() / (n + 1) as f64;
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let has_pos = vals.iter().any(|v| *v > 1e-14 * scale);
        let has_neg = vals.iter().any(|v| *v < -1e-14 * scale);
        if !(has_pos && has_neg) {
            total += vol * mean.abs();
            continue;
        }
        // |l| = l - 2 min(l, 0) on the simplex.
        let mut piece: Vec<Vector> =
            pts.iter().zip(&vals).filter(|(_, v)| **v <= 0.0).map(|(p, _)| (*p).clone()).collect();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if vals[i] < 0.0 && vals[j] > 0.0 {
                    let t = vals[i] / (vals[i] - vals[j]);
                    piece.push(pts[i].iter().zip(pts[j]).map(|(a, b)| a + t * (b - a)).collect());
                }
            }
        }
        let neg_integral = match Polytope::from_points(&piece) {
            Ok(p) => {
                let (_, first, _) = p.moments();
                -dot(u, &first)
            }
            Err(crate::error::Error::Input(_)) => 0.0,
            Err(e) => return Err(e),
        };
        total += vol * mean + 2.0 * neg_integral;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vector> {
        vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0]]
    }

    #[test]
    fn square_hull_and_volume() {
        let p = Polytope::from_points(&square()).unwrap();
        assert_eq!(p.vertices.len(), 4);
        assert_eq!(p.facets.len(), 4);
        assert!((p.volume() - 4.0).abs() < 1e-12);
        for f in &p.facets {
            assert_eq!(f.offset, 1.0);
            assert!((linalg::norm(&f.normal) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn off_center_triangle() {
        let p = Polytope::from_points(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert!((p.volume() - 3.0).abs() < 1e-12);
        let (vol, first, _) = p.moments();
        assert!((first[0] / vol - 2.0 / 3.0).abs() < 1e-12);
        assert!((first[1] / vol - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cube_and_cross_polytope_volumes_3d() {
        let mut cube = Vec::new();
        for s in 0..8 {
            cube.push((0..3).map(|k| if s >> k & 1 == 0 { 1.0 } else { -1.0 }).collect());
        }
        let c = Polytope::from_points(&cube).unwrap();
        assert!((c.volume() - 8.0).abs() < 1e-12);
        let oct = Polytope::from_halfspaces(&cube, &[1.0; 8]).unwrap();
        assert_eq!(oct.vertices.len(), 6);
        assert!((oct.volume() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn second_moment_of_square() {
        let p = Polytope::from_points(&square()).unwrap();
        let (_, _, m) = p.moments();
        assert!((m[0][0] - 4.0 / 3.0).abs() < 1e-12);
        assert!(m[0][1].abs() < 1e-12);
    }

    #[test]
    fn abs_linear_on_diamond() {
        let diamond = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let p = Polytope::from_points(&diamond).unwrap();
        let v = integrate_abs_linear(&p, &[1.0, 0.0]).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        let w = integrate_abs_linear(&p, &[0.6, 0.8]).unwrap();
        // Brute-force midpoint rule on a fine grid.
        let m = 2000;
        let h = 2.0 / m as f64;
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                let x = -1.0 + (i as f64 + 0.5) * h;
                let y = -1.0 + (j as f64 + 0.5) * h;
                if x.abs() + y.abs() <= 1.0 {
                    acc += (0.6 * x + 0.8 * y).abs() * h * h;
                }
            }
        }
        assert!((w - acc).abs() < 2e-3, "{w} vs {acc}");
    }

    #[test]
    fn rank_deficient_points_are_rejected() {
        let err = Polytope::from_points(&[vec![1.0, 1.0], vec![-1.0, -1.0], vec![2.0, 2.0]]);
        assert!(matches!(err, Err(crate::error::Error::Input(msg)) if msg.contains("rank 1")));
    }
}
