//! The algebra of origin-symmetric convex bodies: support function, gauge
//! and membership, all defined by structural recursion.

use std::sync::{Arc, OnceLock};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::duality::{Facet, Polytope};
use crate::error::{capability, check_dim, input, Error, Result};
use crate::linalg::{self, dot, norm, Matrix, Vector};
use crate::tolerances::{MIN_ABS_DET, SYMMETRY_TOL, ZONOTOPE_GENERATOR_CAP};

/// Lazily computed derived data. Ignored by equality and serialization.
pub struct Cache<T>(OnceLock<T>);

impl<T> Default for Cache<T> {
    fn default() -> Self {
        Cache(OnceLock::new())
    }
}

impl<T: Clone> Clone for Cache<T> {
    fn clone(&self) -> Self {
        Cache(self.0.clone())
    }
}

impl<T> std::fmt::Debug for Cache<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(if self.0.get().is_some() { "Cache(filled)" } else { "Cache(empty)" })
    }
}

impl<T> PartialEq for Cache<T> {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

type Shared<T> = std::result::Result<Arc<T>, String>;

fn cached<T>(cache: &Cache<Shared<T>>, build: impl FnOnce() -> Result<T>) -> Result<Arc<T>> {
    match cache.0.get_or_init(|| build().map(Arc::new).map_err(|e| e.to_string())) {
        Ok(v) => Ok(v.clone()),
        Err(msg) if msg.starts_with("capability") => Err(Error::Capability(msg.clone())),
        Err(msg) => Err(Error::Input(msg.clone())),
    }
}

/// A symmetric convex body with nonempty interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConvexBody {
    /// Euclidean unit ball in R^dim.
    Ball { dim: usize },
    /// `[-halfwidth, halfwidth]` in R.
    Interval { halfwidth: f64 },
    /// Convex hull of a vertex set closed under negation.
    VPolytope {
        vertices: Vec<Vector>,
        #[serde(skip)]
        cache: Cache<Shared<Polytope>>,
    },
    /// `{x : |<u_i, x>| <= 1 for all i}`.
    HPolytope {
        normals: Vec<Vector>,
        #[serde(skip)]
        cache: Cache<Shared<Polytope>>,
    },
    /// Minkowski sum of the segments `[-v_i, v_i]`.
    Zonotope {
        generators: Vec<Vector>,
        #[serde(skip)]
        cache: Cache<Shared<Vec<Facet>>>,
    },
    /// Gauge is the sum of the part gauges on consecutive coordinate blocks.
    L1Sum { parts: Vec<ConvexBody> },
    /// Gauge is the max of the part gauges (Cartesian product).
    LinfSum { parts: Vec<ConvexBody> },
    /// `T(K)` for an invertible square matrix `T`.
    Linear {
        matrix: Matrix,
        body: Box<ConvexBody>,
        #[serde(skip)]
        inverse: Cache<Matrix>,
    },
}

/// Discrete even measure on the sphere whose cosine transform is a
/// zonotope's support function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyMeasure {
    pub atoms: Vec<(Vector, f64)>,
}

impl BodyMeasure {
    /// `1/2 * sum_i w_i |<u_i, y>|`.
    pub fn support(&self, y: &[f64]) -> f64 {
        0.5 * self.atoms.iter().map(|(u, w)| w * dot(u, y).abs()).sum::<f64>()
    }
}

pub fn ball(dim: usize) -> Result<ConvexBody> {
    ConvexBody::Ball { dim }.validated()
}

pub fn interval(halfwidth: f64) -> Result<ConvexBody> {
    ConvexBody::Interval { halfwidth }.validated()
}

pub fn vpolytope(vertices: Vec<Vector>) -> Result<ConvexBody> {
    ConvexBody::VPolytope { vertices, cache: Cache::default() }.validated()
}

pub fn hpolytope(normals: Vec<Vector>) -> Result<ConvexBody> {
    ConvexBody::HPolytope { normals, cache: Cache::default() }.validated()
}

pub fn zonotope(generators: Vec<Vector>) -> Result<ConvexBody> {
    ConvexBody::Zonotope { generators, cache: Cache::default() }.validated()
}

pub fn l1sum(parts: Vec<ConvexBody>) -> Result<ConvexBody> {
    ConvexBody::L1Sum { parts }.validated()
}

pub fn linfsum(parts: Vec<ConvexBody>) -> Result<ConvexBody> {
    ConvexBody::LinfSum { parts }.validated()
}

pub fn linear(matrix: Matrix, body: ConvexBody) -> Result<ConvexBody> {
    ConvexBody::Linear { matrix, body: Box::new(body), inverse: Cache::default() }.validated()
}

/// `[-1, 1]^n` as an l-infinity sum of intervals.
pub fn cube(n: usize) -> ConvexBody {
    let parts = vec![ConvexBody::Interval { halfwidth: 1.0 }; n];
    if n == 1 {
        return parts.into_iter().next().expect("one part");
    }
    ConvexBody::LinfSum { parts }
}

/// The l1 unit ball in R^n as an l1 sum of intervals.
pub fn cross_polytope(n: usize) -> ConvexBody {
    let parts = vec![ConvexBody::Interval { halfwidth: 1.0 }; n];
    if n == 1 {
        return parts.into_iter().next().expect("one part");
    }
    ConvexBody::L1Sum { parts }
}

/// Read a body from JSON and validate it.
pub fn from_json(text: &str) -> Result<ConvexBody> {
    let body: ConvexBody = serde_json::from_str(text)?;
    body.validated()
}

fn check_vectors(what: &str, vs: &[Vector]) -> Result<usize> {
    let Some(n) = vs.first().map(Vec::len) else {
        return input(format!("{what}: empty list"));
    };
    if n == 0 {
        return input(format!("{what}: zero-length vectors"));
    }
    for (i, v) in vs.iter().enumerate() {
        if v.len() != n {
            return input(format!("{what}[{i}]: length {} differs from {n}", v.len()));
        }
        if !linalg::is_finite(v) {
            return input(format!("{what}[{i}]: non-finite entry"));
        }
    }
    Ok(n)
}

fn check_spans(what: &str, vs: &[Vector], n: usize) -> Result<()> {
    let r = linalg::rank(vs, 1e-10);
    if r < n {
        return input(format!("{what} span rank {r} < dimension {n}"));
    }
    Ok(())
}

fn blocks(parts: &[ConvexBody]) -> impl Iterator<Item = (usize, usize)> + '_ {
    parts.iter().scan(0, |start, p| {
        let s = *start;
        *start += p.dim();
        Some((s, p.dim()))
    })
}

impl ConvexBody {
    /// Check the construction invariants and return the body.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexBody::Ball { dim } => {
                if *dim == 0 {
                    return input("ball: dim must be positive");
                }
            }
            ConvexBody::Interval { halfwidth } => {
                if !(halfwidth.is_finite() && *halfwidth > 0.0) {
                    return input(format!("interval: halfwidth must be positive, got {halfwidth}"));
                }
            }
            ConvexBody::VPolytope { vertices, .. } => {
                let n = check_vectors("vertices", vertices)?;
                for (i, v) in vertices.iter().enumerate() {
                    let scale = 1.0 + norm(v);
                    let mirrored = vertices
                        .iter()
                        .any(|w| v.iter().zip(w).all(|(a, b)| (a + b).abs() <= SYMMETRY_TOL * scale));
                    if !mirrored {
                        return input(format!("vertices[{i}]: negation is not a vertex (body not symmetric)"));
                    }
                }
                check_spans("vertices", vertices, n)?;
            }
            ConvexBody::HPolytope { normals, .. } => {
                let n = check_vectors("normals", normals)?;
                if let Some(i) = normals.iter().position(|u| norm(u) == 0.0) {
                    return input(format!("normals[{i}]: zero normal"));
                }
                check_spans("normals", normals, n)?;
            }
            ConvexBody::Zonotope { generators, .. } => {
                let n = check_vectors("generators", generators)?;
                if let Some(i) = generators.iter().position(|v| norm(v) == 0.0) {
                    return input(format!("generators[{i}]: zero generator"));
                }
                check_spans("generators", generators, n)?;
            }
            ConvexBody::L1Sum { parts } | ConvexBody::LinfSum { parts } => {
                if parts.is_empty() {
                    return input("sum: no parts");
                }
                parts.iter().try_for_each(ConvexBody::validate)?;
            }
            ConvexBody::Linear { matrix, body, .. } => {
                body.validate()?;
                let n = body.dim();
                if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                    return input(format!("linear: matrix must be {n}x{n}"));
                }
                if !matrix.iter().all(|r| linalg::is_finite(r)) {
                    return input("linear: non-finite matrix entry");
                }
                let d = linalg::det(matrix);
                if !(d.abs() >= MIN_ABS_DET) {
                    return input(format!("linear: |det| = {:e} below {MIN_ABS_DET:e}", d.abs()));
                }
            }
        }
        Ok(())
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { dim } => *dim,
            ConvexBody::Interval { .. } => 1,
            ConvexBody::VPolytope { vertices: vs, .. }
            | ConvexBody::HPolytope { normals: vs, .. }
            | ConvexBody::Zonotope { generators: vs, .. } => vs.first().map_or(0, Vec::len),
            ConvexBody::L1Sum { parts } | ConvexBody::LinfSum { parts } => {
                parts.iter().map(ConvexBody::dim).sum()
            }
            ConvexBody::Linear { body, .. } => body.dim(),
        }
    }

    /// `sup { <x, y> : x in K }`.
    pub fn support(&self, y: &[f64]) -> Result<f64> {
        check_dim(self.dim(), y.len())?;
        self.support_unchecked(y)
    }

    fn support_unchecked(&self, y: &[f64]) -> Result<f64> {
        Ok(match self {
            ConvexBody::Ball { .. } => norm(y),
            ConvexBody::Interval { halfwidth } => halfwidth * y[0].abs(),
            ConvexBody::VPolytope { vertices, .. } => max_dot(vertices, y),
            ConvexBody::HPolytope { .. } => max_dot(&self.polytope()?.vertices, y),
            ConvexBody::Zonotope { generators, .. } => {
                generators.iter().map(|v| dot(v, y).abs()).sum()
            }
            ConvexBody::L1Sum { parts } => {
                let mut best = 0.0f64;
                for (p, (s, d)) in parts.iter().zip(blocks(parts)) {
                    best = best.max(p.support_unchecked(&y[s..s + d])?);
                }
                best
            }
            ConvexBody::LinfSum { parts } => {
                let mut total = 0.0;
                for (p, (s, d)) in parts.iter().zip(blocks(parts)) {
                    total += p.support_unchecked(&y[s..s + d])?;
                }
                total
            }
            ConvexBody::Linear { matrix, body, .. } => {
                body.support_unchecked(&linalg::mat_t_vec(matrix, y))?
            }
        })
    }

    /// Minkowski gauge `inf { t > 0 : x in tK }`.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        self.gauge_unchecked(x)
    }

    fn gauge_unchecked(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            ConvexBody::Ball { .. } => norm(x),
            ConvexBody::Interval { halfwidth } => x[0].abs() / halfwidth,
            ConvexBody::VPolytope { .. } => {
                let p = self.polytope()?;
                p.facets.iter().map(|f| dot(&f.normal, x)).fold(0.0, f64::max)
            }
            ConvexBody::HPolytope { normals, .. } => {
                normals.iter().map(|u| dot(u, x).abs()).fold(0.0, f64::max)
            }
            ConvexBody::Zonotope { .. } => {
                let facets = self.zonotope_facets()?;
                facets.iter().map(|f| dot(&f.normal, x)).fold(0.0, f64::max)
            }
            ConvexBody::L1Sum { parts } => {
                let mut total = 0.0;
                for (p, (s, d)) in parts.iter().zip(blocks(parts)) {
                    total += p.gauge_unchecked(&x[s..s + d])?;
                }
                total
            }
            ConvexBody::LinfSum { parts } => {
                let mut best = 0.0f64;
                for (p, (s, d)) in parts.iter().zip(blocks(parts)) {
                    best = best.max(p.gauge_unchecked(&x[s..s + d])?);
                }
                best
            }
            ConvexBody::Linear { body, .. } => {
                body.gauge_unchecked(&linalg::mat_vec(&self.inverse_matrix(), x))?
            }
        })
    }

    /// `gauge(x) <= 1 + tol`.
    pub fn member(&self, x: &[f64], tol: f64) -> Result<bool> {
        if tol < 0.0 {
            return input("member: tolerance must be nonnegative");
        }
        Ok(self.gauge(x)? <= 1.0 + tol)
    }

    /// Both descriptions of a V- or H-polytope, computed once.
    pub fn polytope(&self) -> Result<Arc<Polytope>> {
        match self {
            ConvexBody::VPolytope { vertices, cache } => {
                cached(cache, || Polytope::from_points(vertices))
            }
            ConvexBody::HPolytope { normals, cache } => cached(cache, || {
                let both: Vec<Vector> =
                    normals.iter().flat_map(|u| [u.clone(), linalg::neg(u)]).collect();
                Polytope::from_halfspaces(&both, &vec![1.0; both.len()])
            }),
            _ => capability("polytope(): body is not a V- or H-polytope"),
        }
    }

    /// Facets `<u, x> <= 1` of a zonotope.
    pub fn zonotope_facets(&self) -> Result<Arc<Vec<Facet>>> {
        match self {
            ConvexBody::Zonotope { generators, cache } => {
                cached(cache, || zonotope_facets(generators))
            }
            _ => capability("zonotope_facets(): body is not a zonotope"),
        }
    }

    pub(crate) fn inverse_matrix(&self) -> Matrix {
        match self {
            ConvexBody::Linear { matrix, inverse, .. } => inverse
                .0
                .get_or_init(|| linalg::inverse(matrix).expect("validated matrix is invertible"))
                .clone(),
            _ => linalg::identity(self.dim()),
        }
    }

    /// Short human-readable variant name.
    pub fn kind(&self) -> &'static str {
        match self {
            ConvexBody::Ball { .. } => "ball",
            ConvexBody::Interval { .. } => "interval",
            ConvexBody::VPolytope { .. } => "vpolytope",
            ConvexBody::HPolytope { .. } => "hpolytope",
            ConvexBody::Zonotope { .. } => "zonotope",
            ConvexBody::L1Sum { .. } => "l1sum",
            ConvexBody::LinfSum { .. } => "linfsum",
            ConvexBody::Linear { .. } => "linear",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bodies serialize")
    }
}

fn max_dot(points: &[Vector], y: &[f64]) -> f64 {
    points.iter().map(|v| dot(v, y)).fold(f64::NEG_INFINITY, f64::max).max(0.0)
}

/// Facets of `sum_i [-v_i, v_i]`: each is parallel to `n-1` generators.
fn zonotope_facets(generators: &[Vector]) -> Result<Vec<Facet>> {
    if generators.len() > ZONOTOPE_GENERATOR_CAP {
        return capability(format!(
            "zonotope facets are capped at {ZONOTOPE_GENERATOR_CAP} generators, got {}",
            generators.len()
        ));
    }
    let n = generators[0].len();
    let h = |c: &[f64]| -> f64 { generators.iter().map(|v| dot(v, c).abs()).sum() };
    let candidates: Vec<Vector> = if n == 1 {
        vec![vec![1.0]]
    } else {
        generators
            .iter()
            .combinations(n - 1)
            .map(|rows| linalg::cross_normal(&rows.into_iter().cloned().collect::<Vec<_>>()))
            .collect()
    };
    let mut facets: Vec<Facet> = Vec::new();
    for c in candidates {
        let len = norm(&c);
        if len <= 1e-12 {
            continue;
        }
        let c: Vector = c.iter().map(|x| x / len).collect();
        let u = linalg::scale(&c, 1.0 / h(&c));
        for normal in [u.clone(), linalg::neg(&u)] {
            let scale = 1.0 + norm(&normal);
            if !facets.iter().any(|f| linalg::max_abs_diff(&f.normal, &normal) <= 1e-10 * scale) {
                facets.push(Facet { normal, offset: 1.0 });
            }
        }
    }
    facets.sort_by(|a, b| linalg::lex_cmp(&a.normal, &b.normal));
    Ok(facets)
}

/// Atoms `(+-v_i/|v_i|, |v_i|)`: each pair carries total mass `2|v_i|`, so
/// that `1/2 * sum w |<u, y>|` reproduces `sum_i |<v_i, y>|`.
pub fn zonotope_measure(z: &ConvexBody) -> Result<BodyMeasure> {
    let ConvexBody::Zonotope { generators, .. } = z else {
        return input("zonotope_measure: body is not a zonotope");
    };
    let mut atoms = Vec::with_capacity(2 * generators.len());
    for (i, v) in generators.iter().enumerate() {
        let len = norm(v);
        if len == 0.0 {
            return input(format!("generators[{i}]: zero generator"));
        }
        let u = linalg::scale(v, 1.0 / len);
        atoms.push((linalg::neg(&u), len));
        atoms.push((u, len));
    }
    Ok(BodyMeasure { atoms })
}

/// All `2^g` sign combinations `sum_i +-v_i` (the zonotope's vertices are
/// among them).
pub fn zonotope_sign_points(generators: &[Vector]) -> Result<Vec<Vector>> {
    if generators.len() > ZONOTOPE_GENERATOR_CAP {
        return capability(format!("sign enumeration capped at {ZONOTOPE_GENERATOR_CAP} generators"));
    }
    let n = generators.first().map_or(0, Vec::len);
    Ok((0u64..1 << generators.len())
        .map(|mask| {
            let mut p = vec![0.0; n];
            for (i, v) in generators.iter().enumerate() {
                let s = if mask >> i & 1 == 0 { 1.0 } else { -1.0 };
                p.iter_mut().zip(v).for_each(|(a, b)| *a += s * b);
            }
            p
        })
        .collect())
}
