//! Double-description vertex enumeration for bounded polytopes
//! `{y : <a_i, y> <= b_i}`.
//!
//! The polytope is homogenized to the cone `{(y, t) : b_i t - <a_i, y> >= 0,
//! t >= 0}` whose extreme rays with `t > 0` are the vertices. Constraints
//! are inserted in input order; adjacency uses the combinatorial test, so
//! degenerate vertices (more than `n` tight constraints) are handled.

use crate::error::{input, Result};
use crate::linalg::{dot, Vector};

const ZERO_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(bits: usize) -> Self {
        BitSet(vec![0; bits.div_ceil(64)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn is_subset_of(&self, other: &BitSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

struct Ray {
    z: Vector,
    zero: BitSet,
}

/// Vertices of `{y : <a_i, y> <= b_i}`. The polytope must be bounded and
/// full-dimensional; `offsets` are expected positive (origin interior).
pub(crate) fn enumerate_vertices(normals: &[Vector], offsets: &[f64]) -> Result<Vec<Vector>> {
    let m = normals.len();
    let Some(n) = normals.first().map(Vec::len) else {
        return input("vertex enumeration needs at least one constraint");
    };
    let d = n + 1;

    // Homogenized rows, unit length; index m is t >= 0.
    let mut rows: Vec<Vector> = normals
        .iter()
        .zip(offsets)
        .map(|(a, b)| {
            let mut r: Vector = a.iter().map(|x| -x).collect();
            r.push(*b);
            let len = dot(&r, &r).sqrt();
            r.iter().map(|x| x / len).collect()
        })
        .collect();
    let mut t_row = vec![0.0; d];
    t_row[n] = 1.0;
    rows.push(t_row);

    let order: Vec<usize> = std::iter::once(m).chain(0..m).collect();
    let basis = independent_rows(&rows, &order, d);
    if basis.len() < d {
        return input(format!(
            "constraint normals have rank {} < {n}; region is unbounded",
            basis.len().saturating_sub(1)
        ));
    }

    let b_rows: Vec<Vector> = basis.iter().map(|&i| rows[i].clone()).collect();
    let Some(inv) = crate::linalg::inverse(&b_rows) else {
        return input("singular initial basis in vertex enumeration");
    };
    let mut rays: Vec<Ray> = (0..d)
        .map(|j| {
            let z = normalize((0..d).map(|i| inv[i][j]).collect());
            let mut zero = BitSet::new(m + 1);
            for (k, &row) in basis.iter().enumerate() {
                if k != j {
                    zero.insert(row);
                }
            }
            Ray { z, zero }
        })
        .collect();

    let in_basis: Vec<bool> = (0..=m).map(|i| basis.contains(&i)).collect();
    for &ci in order.iter().filter(|&&i| !in_basis[i]) {
        let row = &rows[ci];
        let vals: Vec<f64> = rays.iter().map(|r| dot(row, &r.z)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] > ZERO_TOL).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] < -ZERO_TOL).collect();
        if neg.is_empty() {
            for (k, r) in rays.iter_mut().enumerate() {
                if vals[k].abs() <= ZERO_TOL {
                    r.zero.insert(ci);
                }
            }
            continue;
        }

        let mut fresh = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].zero.and(&rays[q].zero);
                if common.count() + 2 < d {
                    continue;
                }
                let blocked = rays.iter().enumerate().any(|(k, r)| {
                    k != p && k != q && common.is_subset_of(&r.zero)
                });
                if blocked {
                    continue;
                }
                let (sp, sq) = (vals[p], -vals[q]);
                let z: Vector = rays[p]
                    .z
                    .iter()
                    .zip(&rays[q].z)
                    .map(|(zp, zq)| sq * zp + sp * zq)
                    .collect();
                let mut zero = common;
                zero.insert(ci);
                fresh.push(Ray { z: normalize(z), zero });
            }
        }

        let mut next = Vec::with_capacity(rays.len() + fresh.len());
        for (k, mut r) in rays.into_iter().enumerate() {
            if vals[k] < -ZERO_TOL {
                continue;
            }
            if vals[k].abs() <= ZERO_TOL {
                r.zero.insert(ci);
            }
            next.push(r);
        }
        next.extend(fresh);
        rays = next;
    }

    let mut vertices: Vec<Vector> = Vec::new();
    for r in &rays {
        let t = r.z[n];
        if t <= ZERO_TOL {
            return input("polyhedron is unbounded (ray with t = 0)");
        }
        let v: Vector = r.z[..n].iter().map(|x| x / t).collect();
        if !vertices
            .iter()
            .any(|w| crate::linalg::max_abs_diff(w, &v) <= 1e-9 * (1.0 + crate::linalg::norm(&v)))
        {
            vertices.push(v);
        }
    }
    vertices.sort_by(|a, b| crate::linalg::lex_cmp(a, b));
    Ok(vertices)
}

fn normalize(z: Vector) -> Vector {
    let s = z.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if s == 0.0 {
        z
    } else {
        z.into_iter().map(|x| x / s).collect()
    }
}

/// Greedy selection (in `order`) of up to `want` linearly independent rows.
fn independent_rows(rows: &[Vector], order: &[usize], want: usize) -> Vec<usize> {
    let mut chosen = Vec::new();
    let mut ortho: Vec<Vector> = Vec::new();
    for &i in order {
        let mut v = rows[i].clone();
        for q in &ortho {
            let c = dot(&v, q);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let len = dot(&v, &v).sqrt();
        if len > 1e-9 {
            ortho.push(v.iter().map(|x| x / len).collect());
            chosen.push(i);
            if chosen.len() == want {
                break;
            }
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_from_four_halfspaces() {
        let normals = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let v = enumerate_vertices(&normals, &[1.0; 4]).unwrap();
        assert_eq!(v.len(), 4);
        for p in &v {
            assert!((p[0].abs() - 1.0).abs() < 1e-12 && (p[1].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn octahedron_is_degenerate_but_enumerated() {
        // |x|+|y|+|z| <= 1: each vertex has four tight facets.
        let mut normals = Vec::new();
        for s in 0..8 {
            normals.push(vec![
                if s & 1 == 0 { 1.0 } else { -1.0 },
                if s & 2 == 0 { 1.0 } else { -1.0 },
                if s & 4 == 0 { 1.0 } else { -1.0 },
            ]);
        }
        let v = enumerate_vertices(&normals, &[1.0; 8]).unwrap();
        assert_eq!(v.len(), 6);
    }

    #[test]
    fn unbounded_is_rejected() {
        let normals = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        assert!(enumerate_vertices(&normals, &[1.0, 1.0]).is_err());
    }
}
