//! Small dense linear-algebra helpers over row-major `Vec<Vec<f64>>`.
//!
//! Bodies are serialized as plain nested arrays, so the geometry code works
//! on those directly and only drops into `nalgebra` for determinants,
//! inverses and ranks.

use nalgebra::DMatrix;

/// A point or direction in R^n.
pub type Vector = Vec<f64>;

/// Row-major dense matrix.
pub type Matrix = Vec<Vec<f64>>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vector {
    a.iter().map(|x| x * s).collect()
}

pub fn neg(a: &[f64]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

pub fn is_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| unit(n, i)).collect()
}

pub fn to_dmatrix(m: &[Vector]) -> DMatrix<f64> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, cols, |i, j| m[i][j])
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> Matrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn det(m: &[Vector]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => to_dmatrix(m).determinant(),
    }
}

pub fn inverse(m: &[Vector]) -> Option<Matrix> {
    to_dmatrix(m).try_inverse().map(|inv| from_dmatrix(&inv))
}

pub fn transpose(m: &[Vector]) -> Matrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| m.iter().map(|row| row[j]).collect())
        .collect()
}

pub fn mat_vec(m: &[Vector], x: &[f64]) -> Vector {
    m.iter().map(|row| dot(row, x)).collect()
}

/// `m^T x` without materializing the transpose.
pub fn mat_t_vec(m: &[Vector], x: &[f64]) -> Vector {
    let cols = m.first().map_or(0, Vec::len);
    let mut out = vec![0.0; cols];
    for (row, xi) in m.iter().zip(x) {
        for (o, r) in out.iter_mut().zip(row) {
            *o += r * xi;
        }
    }
    out
}

pub fn scale_matrix(m: &[Vector], s: f64) -> Matrix {
    m.iter().map(|row| scale(row, s)).collect()
}

pub fn mat_mul(a: &[Vector], b: &[Vector]) -> Matrix {
    from_dmatrix(&(to_dmatrix(a) * to_dmatrix(b)))
}

/// Numerical rank of the matrix whose rows are `rows`.
pub fn rank(rows: &[Vector], tol: f64) -> usize {
    if rows.is_empty() || rows[0].is_empty() {
        return 0;
    }
    let m = to_dmatrix(rows);
    let svd = m.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|s| **s > tol * smax.max(1.0))
        .count()
}

/// Dimension of the affine hull of `points` (-1 for the empty set is
/// reported as 0 here; callers never ask for it).
pub fn affine_dim(points: &[&Vector], tol: f64) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let base = points[0];
    let diffs: Vec<Vector> = points[1..].iter().map(|p| sub(p, base)).collect();
    rank(&diffs, tol)
}

/// Vector orthogonal to the `n-1` rows of `rows` (generalized cross
/// product via cofactors). Zero when the rows are dependent.
pub fn cross_normal(rows: &[Vector]) -> Vector {
    let n = rows.len() + 1;
    (0..n)
        .map(|k| {
            let minor: Matrix = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * det(&minor)
        })
        .collect()
}

/// Orthonormal basis of the hyperplane perpendicular to `direction`.
///
/// Built by Gram-Schmidt over the standard basis, so for a coordinate
/// direction `e_i` the result is the remaining standard vectors in order.
pub fn orthonormal_complement(direction: &[f64]) -> Matrix {
    let n = direction.len();
    let d = scale(direction, 1.0 / norm(direction));
    let mut basis: Matrix = vec![d];
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = unit(n, i);
        for b in &basis {
            let c = dot(&v, b);
            for (vj, bj) in v.iter_mut().zip(b) {
                *vj -= c * bj;
            }
        }
        let len = norm(&v);
        if len > 1e-8 {
            basis.push(scale(&v, 1.0 / len));
        }
    }
    basis.remove(0);
    basis
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Volume of the Euclidean unit ball in R^n, `pi^(n/2) / Gamma(n/2 + 1)`.
pub fn ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// Surface measure of the unit sphere S^(n-1), `n * ball_volume(n)`.
pub fn sphere_measure(n: usize) -> f64 {
    n as f64 * ball_volume(n)
}

/// Lexicographic comparison with exact float ordering.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}
