//! Exact, quadrature and Monte Carlo volumes; sections, projections and
//! second moments.

use serde::{Deserialize, Serialize};

use crate::bodies::{self, ConvexBody};
use crate::duality::{self, Polytope};
use crate::error::{capability, check_dim, input, Result};
use crate::linalg::{self, dot, norm, Matrix, Vector};
use crate::report::{CheckReport, Relation, TolKind};
use crate::rng::{self, parallel_moments};
use crate::tolerances::{BRUNN_SIGMAS, EXACT_DIM_CAP, MC_DIM_CAP, ZONOTOPE_GENERATOR_CAP};

pub use crate::linalg::{ball_volume, sphere_measure};

/// A stochastic estimate with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// A deterministic value dressed as an estimate with zero error.
    pub fn exact(value: f64) -> Self {
        McEstimate { value, std_error: 0.0, samples: 0, seed: 0 }
    }
}

/// `(n-1)`-volumes of parallel sections `K ∩ {<direction, y> = t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionProfile {
    pub direction: Vector,
    pub ts: Vec<f64>,
    pub g: Vec<f64>,
    /// Standard error of each `g` value (zero on exact paths).
    pub g_err: Vec<f64>,
}

impl SectionProfile {
    /// Value at `t = 0` (interpolated when 0 is not a grid node).
    pub fn central(&self) -> f64 {
        let i = self.ts.partition_point(|t| *t < 0.0);
        if i < self.ts.len() && self.ts[i] == 0.0 || i == 0 {
            return self.g[i.min(self.g.len() - 1)];
        }
        let (t0, t1) = (self.ts[i - 1], self.ts[i]);
        let w = -t0 / (t1 - t0);
        self.g[i - 1] * (1.0 - w) + self.g[i] * w
    }
}

fn l1_volume_factor(dims: &[usize]) -> f64 {
    dims.iter().map(|d| linalg::factorial(*d)).product::<f64>()
        / linalg::factorial(dims.iter().sum())
}

/// Exact volume by structural recursion.
pub fn volume(k: &ConvexBody) -> Result<f64> {
    Ok(match k {
        ConvexBody::Ball { dim } => ball_volume(*dim),
        ConvexBody::Interval { halfwidth } => 2.0 * halfwidth,
        ConvexBody::LinfSum { parts } => {
            parts.iter().map(volume).collect::<Result<Vec<_>>>()?.iter().product()
        }
        ConvexBody::L1Sum { parts } => {
            let vols: f64 = parts.iter().map(volume).collect::<Result<Vec<_>>>()?.iter().product();
            let dims: Vec<usize> = parts.iter().map(ConvexBody::dim).collect();
            vols * l1_volume_factor(&dims)
        }
        ConvexBody::Zonotope { generators, .. } => zonotope_volume(generators)?,
        ConvexBody::VPolytope { .. } | ConvexBody::HPolytope { .. } => k.polytope()?.volume(),
        ConvexBody::Linear { matrix, body, .. } => linalg::det(matrix).abs() * volume(body)?,
    })
}

/// `2^n sum_{|S| = n} |det(v_S)|`.
pub fn zonotope_volume(generators: &[Vector]) -> Result<f64> {
    use itertools::Itertools;
    if generators.len() > ZONOTOPE_GENERATOR_CAP {
        return capability(format!(
            "exact zonotope volume is capped at {ZONOTOPE_GENERATOR_CAP} generators"
        ));
    }
    let n = generators.first().map_or(0, Vec::len);
    let sum: f64 = generators
        .iter()
        .combinations(n)
        .map(|s| linalg::det(&s.into_iter().cloned().collect::<Vec<_>>()).abs())
        .sum();
    Ok(2f64.powi(n as i32) * sum)
}

/// Polytope realization of V-, H- and zonotope bodies.
pub fn as_polytope(k: &ConvexBody) -> Result<Option<std::sync::Arc<Polytope>>> {
    match k {
        ConvexBody::VPolytope { .. } | ConvexBody::HPolytope { .. } => Ok(Some(k.polytope()?)),
        ConvexBody::Zonotope { .. } => {
            let normals: Vec<Vector> = k.zonotope_facets()?.iter().map(|f| f.normal.clone()).collect();
            let ones = vec![1.0; normals.len()];
            Ok(Some(std::sync::Arc::new(Polytope::from_halfspaces(&normals, &ones)?)))
        }
        _ => Ok(None),
    }
}

fn mc_guard(k: &ConvexBody, samples: u64) -> Result<usize> {
    let n = k.dim();
    if n > MC_DIM_CAP {
        return capability(format!("Monte Carlo paths are capped at dimension {MC_DIM_CAP}, got {n}"));
    }
    if samples < 1000 {
        return input(format!("at least 1000 samples required, got {samples}"));
    }
    // Surface capability errors (e.g. hull caps) before sampling.
    k.gauge(&vec![0.0; n])?;
    Ok(n)
}

/// Half-width of the smallest centered axis box containing `K`.
pub fn bounding_radius(k: &ConvexBody) -> Result<f64> {
    let n = k.dim();
    (0..n).map(|i| k.support(&linalg::unit(n, i))).try_fold(0.0f64, |m, s| Ok(m.max(s?)))
}

/// Rejection sampling in the bounding box `[-r, r]^n`.
pub fn volume_mc(k: &ConvexBody, samples: u64, seed: u64) -> Result<McEstimate> {
    use rand::Rng as _;
    let n = mc_guard(k, samples)?;
    let r = bounding_radius(k)?;
    let box_vol = (2.0 * r).powi(n as i32);
    let [hits] = parallel_moments(samples, seed, |rng| {
        let x: Vector = (0..n).map(|_| rng.random_range(-r..=r)).collect();
        [f64::from(u8::from(k.gauge(&x).unwrap_or(f64::INFINITY) <= 1.0))]
    });
    Ok(McEstimate {
        value: box_vol * hits.mean,
        std_error: box_vol * hits.std_error(),
        samples,
        seed,
    })
}

/// `vol(K*) = omega_n * E[h_K(theta)^(-n)]` over uniform `theta` on the sphere.
pub fn polar_volume_sphere(k: &ConvexBody, samples: u64, seed: u64) -> Result<McEstimate> {
    let n = k.dim();
    if n < 2 {
        return input("sphere formula needs dimension >= 2");
    }
    let n = mc_guard(k, samples)?;
    k.support(&linalg::unit(n, 0))?;
    let [m] = parallel_moments(samples, seed, |rng| {
        let theta = rng::sphere_point(rng, n);
        [k.support(&theta).map_or(f64::NAN, |h| h.powi(-(n as i32)))]
    });
    let w = ball_volume(n);
    Ok(McEstimate { value: w * m.mean, std_error: w * m.std_error(), samples, seed })
}

fn check_unit(direction: &[f64]) -> Result<()> {
    let len = norm(direction);
    if (len - 1.0).abs() > 1e-12 {
        return input(format!("direction must be a unit vector, |d| = {len}"));
    }
    Ok(())
}

/// Index of the single sum block carrying `direction`, if any.
fn single_block(parts: &[ConvexBody], direction: &[f64]) -> Option<(usize, usize, usize)> {
    let mut start = 0;
    let mut found = None;
    for (i, p) in parts.iter().enumerate() {
        let d = p.dim();
        if direction[start..start + d].iter().any(|x| *x != 0.0) {
            if found.is_some() {
                return None;
            }
            found = Some((i, start, d));
        }
        start += d;
    }
    found
}

/// Exact `(n-1)`-volume of `K ∩ {<direction, y> = t}` for a unit direction.
pub fn section_volume(k: &ConvexBody, direction: &[f64], t: f64) -> Result<f64> {
    check_dim(k.dim(), direction.len())?;
    let h = k.support(direction)?;
    if t.abs() > h {
        return Ok(0.0);
    }
    Ok(match k {
        ConvexBody::Ball { dim } => {
            ball_volume(dim - 1) * (1.0 - t * t).max(0.0).powf((*dim as f64 - 1.0) / 2.0)
        }
        ConvexBody::Interval { .. } => 1.0,
        ConvexBody::LinfSum { parts } => {
            let Some((i, s, d)) = single_block(parts, direction) else {
                return capability("exact section of a product needs a direction inside one block");
            };
            let mut g = section_volume(&parts[i], &direction[s..s + d], t)?;
            for (j, p) in parts.iter().enumerate() {
                if j != i {
                    g *= volume(p)?;
                }
            }
            g
        }
        ConvexBody::L1Sum { parts } => {
            let Some((i, s, a)) = single_block(parts, direction) else {
                return capability("exact section of an l1 sum needs a direction inside one block");
            };
            let rest: Vec<ConvexBody> =
                parts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.clone()).collect();
            let rest = if rest.len() == 1 { rest.into_iter().next().expect("one") } else { bodies::l1sum(rest)? };
            let b = rest.dim();
            let vol_b = volume(&rest)?;
            let part = &parts[i];
            let dir = &direction[s..s + a];
            let ha = part.support(dir)?;
            if a == 1 {
                vol_b * (1.0 - t.abs() / ha).max(0.0).powi(b as i32)
            } else {
                // int over the slice of (1 - |x|_A)^b, layer by layer in A.
                let lo = t.abs() / ha;
                let bf = b as f64;
                let f = |s: f64| {
                    if s <= 0.0 {
                        return 0.0;
                    }
                    let g = section_volume(part, dir, t / s).unwrap_or(0.0);
                    bf * (1.0 - s).powi(b as i32 - 1) * s.powi(a as i32 - 1) * g
                };
                vol_b * quadrature::double_exponential::integrate(f, lo, 1.0, 1e-13).integral
            }
        }
        ConvexBody::Linear { matrix, body, .. } => {
            let w = linalg::mat_t_vec(matrix, direction);
            let len = norm(&w);
            let w_unit = linalg::scale(&w, 1.0 / len);
            linalg::det(matrix).abs() / len * section_volume(body, &w_unit, t / len)?
        }
        _ => {
            let p = as_polytope(k)?.expect("polytope variant");
            polytope_section(&p, direction, t, h)?
        }
    })
}

fn polytope_section(p: &Polytope, direction: &[f64], t: f64, h: f64) -> Result<f64> {
    let n = p.dim;
    if t.abs() >= h * (1.0 - 1e-9) {
        return Ok(0.0);
    }
    if n == 1 {
        return Ok(1.0);
    }
    let basis = linalg::orthonormal_complement(direction);
    let base = linalg::scale(direction, t);
    let normals: Vec<Vector> = p.facets.iter().map(|f| linalg::mat_vec(&basis, &f.normal)).collect();
    let offsets: Vec<f64> = p.facets.iter().map(|f| f.offset - dot(&f.normal, &base)).collect();
    let keep: Vec<usize> = (0..normals.len()).filter(|&i| norm(&normals[i]) > 1e-14).collect();
    let normals: Vec<Vector> = keep.iter().map(|&i| normals[i].clone()).collect();
    let offsets: Vec<f64> = keep.iter().map(|&i| offsets[i]).collect();
    Ok(Polytope::from_halfspaces(&normals, &offsets)?.volume())
}

/// Exact profile on `grid_points` equally spaced nodes of `[-h, h]`.
pub fn exact_section_profile(k: &ConvexBody, direction: &[f64], grid_points: usize) -> Result<SectionProfile> {
    check_dim(k.dim(), direction.len())?;
    check_unit(direction)?;
    if grid_points < 16 {
        return input("section profiles need at least 16 grid points");
    }
    let h = k.support(direction)?;
    let ts = grid(h, grid_points);
    let g = ts.iter().map(|t| section_volume(k, direction, *t)).collect::<Result<Vec<_>>>()?;
    Ok(SectionProfile { direction: direction.to_vec(), g_err: vec![0.0; g.len()], ts, g })
}

fn grid(h: f64, m: usize) -> Vec<f64> {
    (0..m).map(|i| -h + 2.0 * h * i as f64 / (m - 1) as f64).collect()
}

/// Monte Carlo profile: each slice is sampled directly inside its
/// hyperplane, `samples` points per grid node.
pub fn section_profile(
    k: &ConvexBody,
    direction: &[f64],
    grid_points: usize,
    samples: u64,
    seed: u64,
) -> Result<SectionProfile> {
    use rand::Rng as _;
    check_dim(k.dim(), direction.len())?;
    check_unit(direction)?;
    if grid_points < 16 {
        return input("section profiles need at least 16 grid points");
    }
    let n = mc_guard(k, samples)?;
    if n < 2 {
        return input("section profiles need dimension >= 2");
    }
    let h = k.support(direction)?;
    let basis = linalg::orthonormal_complement(direction);
    let radii: Vec<f64> = basis.iter().map(|b| k.support(b)).collect::<Result<_>>()?;
    let box_vol: f64 = radii.iter().map(|r| 2.0 * r).product();
    let ts = grid(h, grid_points);
    let mut g = Vec::with_capacity(ts.len());
    let mut g_err = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let s = rng::derive_seed(seed, "section", i as u64);
        let [hits] = parallel_moments(samples, s, |rng| {
            let mut y = linalg::scale(direction, t);
            for (b, r) in basis.iter().zip(&radii) {
                let c = rng.random_range(-*r..=*r);
                y.iter_mut().zip(b).for_each(|(yj, bj)| *yj += c * bj);
            }
            [f64::from(u8::from(k.gauge(&y).unwrap_or(f64::INFINITY) <= 1.0))]
        });
        g.push(box_vol * hits.mean);
        g_err.push(box_vol * hits.std_error());
    }
    Ok(SectionProfile { direction: direction.to_vec(), ts, g, g_err })
}

/// Composite Simpson on an equally spaced grid; a trailing odd interval is
/// closed with the trapezoid rule.
pub fn simpson(ts: &[f64], f: &[f64]) -> f64 {
    let m = ts.len();
    if m < 2 {
        return 0.0;
    }
    let h = (ts[m - 1] - ts[0]) / (m - 1) as f64;
    let even = if (m - 1) % 2 == 0 { m } else { m - 1 };
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < even {
        total += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
        i += 2;
    }
    if even < m {
        total += h / 2.0 * (f[m - 2] + f[m - 1]);
    }
    total
}

/// `int g(t) dt` over the profile grid.
pub fn profile_volume(p: &SectionProfile) -> f64 {
    simpson(&p.ts, &p.g)
}

/// Midpoint concavity of `g^(1/(n-1))` on consecutive grid triples, within
/// a band of propagated standard errors. `lhs` is the worst excess of a
/// violation over its allowed band.
pub fn brunn_concavity_check(profile: &SectionProfile, n: usize) -> Result<CheckReport> {
    if n < 2 {
        return input("Brunn concavity needs dimension >= 2");
    }
    let p = 1.0 / (n as f64 - 1.0);
    let phi = |g: f64| g.max(0.0).powf(p);
    let sig = |g: f64, s: f64| ((g + s).powf(p) - (g - s).max(0.0).powf(p)) / 2.0;
    let scale = profile.g.iter().fold(0.0f64, |m, g| m.max(phi(*g)));
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0;
    for i in 1..profile.g.len().saturating_sub(1) {
        let (a, b, c) = (profile.g[i - 1], profile.g[i], profile.g[i + 1]);
        let violation = (phi(a) + phi(c)) / 2.0 - phi(b);
        let (sa, sb, sc) = (
            sig(a, profile.g_err[i - 1]),
            sig(b, profile.g_err[i]),
            sig(c, profile.g_err[i + 1]),
        );
        let band = BRUNN_SIGMAS * (sa * sa / 4.0 + sc * sc / 4.0 + sb * sb).sqrt() + 1e-12 * scale.max(1.0);
        if violation - band > worst {
            worst = violation - band;
            at = i;
        }
    }
    Ok(CheckReport::new("brunn-concavity", worst, Relation::Le, 0.0, 0.0, TolKind::Abs)
        .note(format!("worst triple centered at t = {}", profile.ts[at]))
        .with_digest(&profile.direction))
}

/// Orthogonal projection onto `direction^⊥`, in the orthonormal basis of
/// [`linalg::orthonormal_complement`].
pub fn projection(k: &ConvexBody, direction: &[f64]) -> Result<ConvexBody> {
    check_dim(k.dim(), direction.len())?;
    check_unit(direction)?;
    if k.dim() < 2 {
        return input("projection needs dimension >= 2");
    }
    let basis = linalg::orthonormal_complement(direction);
    match k {
        ConvexBody::Zonotope { generators, .. } => {
            let gens: Vec<Vector> = generators
                .iter()
                .map(|v| linalg::mat_vec(&basis, v))
                .filter(|v| norm(v) > 1e-12 * (1.0 + norm(v)))
                .collect();
            bodies::zonotope(gens)
        }
        ConvexBody::VPolytope { vertices, .. } => {
            let pts: Vec<Vector> = vertices.iter().map(|v| linalg::mat_vec(&basis, v)).collect();
            if basis.len() == 1 {
                let r = pts.iter().fold(0.0f64, |m, p| m.max(p[0].abs()));
                return bodies::vpolytope(vec![vec![r], vec![-r]]);
            }
            let hull = duality::hull(&pts)?;
            bodies::vpolytope(hull.vertices)
        }
        _ => capability(format!("projection is implemented for zonotopes and V-polytopes, not {}", k.kind())),
    }
}

/// `K ∩ e_j^⊥` as a body in `R^(n-1)` (coordinate `j` removed).
pub fn coordinate_section(k: &ConvexBody, j: usize) -> Result<ConvexBody> {
    let n = k.dim();
    if n < 2 || j >= n {
        return input(format!("coordinate section: need 2 <= n and j < n, got n = {n}, j = {j}"));
    }
    let drop = |v: &Vector| -> Vector { v.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, x)| *x).collect() };
    match k {
        ConvexBody::Ball { dim } => bodies::ball(dim - 1),
        ConvexBody::L1Sum { parts } | ConvexBody::LinfSum { parts } => {
            let mut start = 0;
            let mut out = Vec::new();
            for p in parts {
                let d = p.dim();
                if (start..start + d).contains(&j) {
                    if d > 1 {
                        out.push(coordinate_section(p, j - start)?);
                    }
                } else {
                    out.push(p.clone());
                }
                start += d;
            }
            if out.len() == 1 {
                return Ok(out.into_iter().next().expect("one part"));
            }
            if matches!(k, ConvexBody::L1Sum { .. }) { bodies::l1sum(out) } else { bodies::linfsum(out) }
        }
        ConvexBody::HPolytope { normals, .. } => {
            bodies::hpolytope(normals.iter().map(drop).filter(|u| norm(u) > 0.0).collect())
        }
        ConvexBody::VPolytope { .. } | ConvexBody::Zonotope { .. } => {
            let p = as_polytope(k)?.expect("polytope variant");
            bodies::hpolytope(p.facets.iter().map(|f| drop(&f.normal)).filter(|u| norm(u) > 0.0).collect())
        }
        _ => capability(format!("coordinate section is not implemented for {}", k.kind())),
    }
}

/// Exact `int_K |<u, y>| dy`.
pub fn abs_linear_moment(k: &ConvexBody, u: &[f64]) -> Result<f64> {
    check_dim(k.dim(), u.len())?;
    let len = norm(u);
    if len == 0.0 {
        return Ok(0.0);
    }
    if let Some(p) = as_polytope(k)? {
        return duality::integrate_abs_linear(&p, u);
    }
    let d = linalg::scale(u, 1.0 / len);
    let h = k.support(&d)?;
    section_volume(k, &d, 0.0)?;
    let f = |t: f64| t * section_volume(k, &d, t).unwrap_or(f64::NAN);
    Ok(2.0 * len * quadrature::double_exponential::integrate(f, 0.0, h, 1e-13).integral)
}

/// Direct Monte Carlo estimate of `int_K |<u, y>| dy` (box sampling).
pub fn abs_linear_moment_mc(k: &ConvexBody, u: &[f64], samples: u64, seed: u64) -> Result<McEstimate> {
    use rand::Rng as _;
    check_dim(k.dim(), u.len())?;
    let n = mc_guard(k, samples)?;
    let r = bounding_radius(k)?;
    let box_vol = (2.0 * r).powi(n as i32);
    let [m] = parallel_moments(samples, seed, |rng| {
        let x: Vector = (0..n).map(|_| rng.random_range(-r..=r)).collect();
        let inside = k.gauge(&x).unwrap_or(f64::INFINITY) <= 1.0;
        [if inside { dot(u, &x).abs() } else { 0.0 }]
    });
    Ok(McEstimate { value: box_vol * m.mean, std_error: box_vol * m.std_error(), samples, seed })
}

/// Exact second-moment matrix `int_K x x^T dx`.
pub fn second_moment_matrix(k: &ConvexBody) -> Result<Matrix> {
    let n = k.dim();
    Ok(match k {
        ConvexBody::Ball { dim } => {
            let c = ball_volume(*dim) / (*dim as f64 + 2.0);
            linalg::scale_matrix(&linalg::identity(n), c)
        }
        ConvexBody::Interval { halfwidth } => vec![vec![2.0 * halfwidth.powi(3) / 3.0]],
        ConvexBody::LinfSum { parts } => {
            let vols = parts.iter().map(volume).collect::<Result<Vec<_>>>()?;
            let total: f64 = vols.iter().product();
            let mut m = vec![vec![0.0; n]; n];
            let mut start = 0;
            for (p, v) in parts.iter().zip(&vols) {
                let block = second_moment_matrix(p)?;
                let others = if *v == 0.0 { 0.0 } else { total / v };
                place(&mut m, start, &block, others);
                start += p.dim();
            }
            m
        }
        ConvexBody::L1Sum { parts } => {
            // Fold pairwise: A ⊕1 rest.
            let first = &parts[0];
            if parts.len() == 1 {
                return second_moment_matrix(first);
            }
            let rest_body = if parts.len() == 2 {
                parts[1].clone()
            } else {
                bodies::l1sum(parts[1..].to_vec())?
            };
            let (a, b) = (first.dim(), rest_body.dim());
            let (va, vb) = (volume(first)?, volume(&rest_body)?);
            let f = |p: usize, q: usize| {
                linalg::factorial(p + 2) * linalg::factorial(q) / linalg::factorial(p + q + 2)
            };
            let mut m = vec![vec![0.0; n]; n];
            place(&mut m, 0, &second_moment_matrix(first)?, vb * f(a, b));
            place(&mut m, a, &second_moment_matrix(&rest_body)?, va * f(b, a));
            m
        }
        ConvexBody::Linear { matrix, body, .. } => {
            let inner = second_moment_matrix(body)?;
            let tm = linalg::mat_mul(&linalg::mat_mul(matrix, &inner), &linalg::transpose(matrix));
            linalg::scale_matrix(&tm, linalg::det(matrix).abs())
        }
        _ => {
            if n > EXACT_DIM_CAP {
                return capability("exact second moments are capped at the exact dimension");
            }
            as_polytope(k)?.expect("polytope variant").moments().2
        }
    })
}

fn place(m: &mut Matrix, start: usize, block: &Matrix, factor: f64) {
    for (i, row) in block.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[start + i][start + j] = v * factor;
        }
    }
}

/// Monte Carlo `int_K x_i x_j dx` (box sampling).
pub fn second_moment_mc(k: &ConvexBody, i: usize, j: usize, samples: u64, seed: u64) -> Result<McEstimate> {
    use rand::Rng as _;
    let n = mc_guard(k, samples)?;
    if i >= n || j >= n {
        return input(format!("axis out of range for dimension {n}"));
    }
    let r = bounding_radius(k)?;
    let box_vol = (2.0 * r).powi(n as i32);
    let [m] = parallel_moments(samples, seed, |rng| {
        let x: Vector = (0..n).map(|_| rng.random_range(-r..=r)).collect();
        let inside = k.gauge(&x).unwrap_or(f64::INFINITY) <= 1.0;
        [if inside { x[i] * x[j] } else { 0.0 }]
    });
    Ok(McEstimate { value: box_vol * m.mean, std_error: box_vol * m.std_error(), samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{ball, cross_polytope, cube, interval, l1sum, linear, vpolytope, zonotope};
    use std::f64::consts::PI;

    fn hexagon() -> ConvexBody {
        zonotope(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap()
    }

    fn double_cone() -> ConvexBody {
        l1sum(vec![ball(2).unwrap(), interval(1.0).unwrap()]).unwrap()
    }

    fn pyramid() -> ConvexBody {
        l1sum(vec![cube(2), interval(1.0).unwrap()]).unwrap()
    }

    #[test]
    fn exact_volume_examples() {
        assert!((volume(&cross_polytope(3)).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((volume(&hexagon()).unwrap() - 12.0).abs() < 1e-12);
        assert!((volume(&pyramid()).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert!((volume(&double_cone()).unwrap() - 2.0 * PI / 3.0).abs() < 1e-14);
        let polar_hex = crate::duality::polar(&hexagon()).unwrap();
        assert!((volume(&polar_hex).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn mc_examples() {
        let c = volume_mc(&cube(2), 100_000, 1).unwrap();
        assert_eq!((c.value, c.std_error), (4.0, 0.0));
        let b = volume_mc(&ball(2).unwrap(), 1_000_000, 42).unwrap();
        assert!((b.value - PI).abs() <= 4.0 * b.std_error);
        let d = volume_mc(&double_cone(), 1_000_000, 7).unwrap();
        assert!((d.value - 2.0 * PI / 3.0).abs() <= 4.0 * d.std_error);
        assert!(volume_mc(&cube(2), 10, 1).is_err());
    }

    #[test]
    fn mc_is_reproducible() {
        let a = volume_mc(&hexagon(), 20_000, 9).unwrap();
        let b = volume_mc(&hexagon(), 20_000, 9).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn sphere_formula_examples() {
        let b = polar_volume_sphere(&ball(3).unwrap(), 1000, 1).unwrap();
        assert!((b.value - ball_volume(3)).abs() < 1e-12);
        let c = polar_volume_sphere(&cube(2), 400_000, 2).unwrap();
        assert!((c.value - 2.0).abs() <= 4.0 * c.std_error);
        let z = polar_volume_sphere(&hexagon(), 400_000, 3).unwrap();
        assert!((z.value - 0.75).abs() <= 4.0 * z.std_error);
    }

    #[test]
    fn exact_sections() {
        let b = ball(2).unwrap();
        assert!((section_volume(&b, &[1.0, 0.0], 0.6).unwrap() - 1.6).abs() < 1e-12);
        assert!((section_volume(&cube(3), &[0.0, 0.0, 1.0], 0.3).unwrap() - 4.0).abs() < 1e-12);
        assert!((section_volume(&cross_polytope(2), &[0.0, 1.0], 0.25).unwrap() - 1.5).abs() < 1e-12);
        assert!((section_volume(&double_cone(), &[0.0, 0.0, 1.0], 0.5).unwrap() - PI / 4.0).abs() < 1e-12);
        // Direction inside the ball block of the double cone: 1-D integral path.
        let g = section_volume(&double_cone(), &[1.0, 0.0, 0.0], 0.0).unwrap();
        // Central section through the axis is the diamond of area 2.
        assert!((g - 2.0).abs() < 1e-9, "{g}");
        // Polytope path: hexagon section along e1 at t = 1 is [0, 2] in y.
        let s = section_volume(&hexagon(), &[1.0, 0.0], 1.0).unwrap();
        assert!((s - 3.0).abs() < 1e-12, "{s}");
        let rot = linear(vec![vec![0.6, -0.8], vec![0.8, 0.6]], cube(2)).unwrap();
        let d = [0.6, 0.8];
        assert!((section_volume(&rot, &d, 0.5).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn profiles_integrate_to_volume() {
        for (k, d) in [
            (ball(3).unwrap(), vec![0.0, 1.0, 0.0]),
            (double_cone(), vec![0.0, 0.0, 1.0]),
            (hexagon(), vec![0.6, 0.8]),
        ] {
            let p = exact_section_profile(&k, &d, 2001).unwrap();
            let v = volume(&k).unwrap();
            assert!((profile_volume(&p) - v).abs() < 2e-3 * v, "{}", k.kind());
        }
    }

    #[test]
    fn mc_profile_matches_exact() {
        let k = cross_polytope(2);
        let p = section_profile(&k, &[0.0, 1.0], 17, 20_000, 5).unwrap();
        for ((t, g), e) in p.ts.iter().zip(&p.g).zip(&p.g_err) {
            let exact = 2.0 * (1.0 - t.abs());
            assert!((g - exact).abs() <= 4.0 * e + 1e-12, "t = {t}: {g} vs {exact}");
        }
        let c = section_profile(&cube(3), &[0.0, 0.0, 1.0], 16, 1000, 1).unwrap();
        assert!(c.g.iter().all(|g| *g == 4.0));
    }

    #[test]
    fn brunn_examples() {
        let disk = exact_section_profile(&ball(2).unwrap(), &[1.0, 0.0], 64).unwrap();
        assert!(brunn_concavity_check(&disk, 2).unwrap().pass);
        let c = section_profile(&cube(3), &[0.0, 0.0, 1.0], 16, 1000, 1).unwrap();
        assert!(brunn_concavity_check(&c, 3).unwrap().pass);
        let tent = exact_section_profile(&cross_polytope(2), &[0.0, 1.0], 33).unwrap();
        assert!(brunn_concavity_check(&tent, 2).unwrap().pass);
        let mut bad = tent.clone();
        bad.g[16] = 0.5;
        assert!(!brunn_concavity_check(&bad, 2).unwrap().pass);
    }

    #[test]
    fn projection_examples() {
        let z = zonotope(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((volume(&projection(&z, &[1.0, 0.0]).unwrap()).unwrap() - 2.0).abs() < 1e-15);
        let mut verts = Vec::new();
        for s in 0..8 {
            verts.push((0..3).map(|k| if s >> k & 1 == 0 { 1.0 } else { -1.0 }).collect());
        }
        let c = vpolytope(verts).unwrap();
        assert!((volume(&projection(&c, &[0.0, 0.0, 1.0]).unwrap()).unwrap() - 4.0).abs() < 1e-12);
        assert!((volume(&projection(&hexagon(), &[1.0, 0.0]).unwrap()).unwrap() - 4.0).abs() < 1e-15);
        assert!(projection(&ball(2).unwrap(), &[1.0, 0.0]).is_err());
    }

    #[test]
    fn zonoid_projection_formula() {
        for z in [hexagon(), zonotope(vec![vec![1.0, 0.2, 0.0], vec![0.0, 1.0, 0.5], vec![0.3, 0.0, 1.0], vec![1.0, 1.0, 1.0]]).unwrap()] {
            let n = z.dim() as f64;
            let mu = bodies::zonotope_measure(&z).unwrap();
            let mut total = 0.0;
            for (u, w) in &mu.atoms {
                total += w * volume(&projection(&z, u).unwrap()).unwrap();
            }
            let v = volume(&z).unwrap();
            assert!((total / n - v).abs() < 1e-9 * v);
        }
    }

    #[test]
    fn second_moments() {
        let m = second_moment_matrix(&ball(2).unwrap()).unwrap();
        assert!((m[0][0] - PI / 4.0).abs() < 1e-15);
        assert!((second_moment_matrix(&cube(2)).unwrap()[0][0] - 4.0 / 3.0).abs() < 1e-15);
        assert!((second_moment_matrix(&cross_polytope(2)).unwrap()[0][0] - 1.0 / 3.0).abs() < 1e-15);
        let cone = second_moment_matrix(&double_cone()).unwrap();
        // Polytope oracle for the pyramid body: exact triangulated moments.
        let p = pyramid();
        let vp = vpolytope(vec![
            vec![1.0, 1.0, 0.0],
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 1.0, 0.0],
            vec![-1.0, -1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, -1.0],
        ])
        .unwrap();
        let a = second_moment_matrix(&p).unwrap();
        let b = second_moment_matrix(&vp).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((a[i][j] - b[i][j]).abs() < 1e-12);
            }
        }
        assert!(cone[0][1].abs() < 1e-15);
        let mc = second_moment_mc(&double_cone(), 2, 2, 400_000, 3).unwrap();
        assert!((mc.value - cone[2][2]).abs() <= 4.0 * mc.std_error);
    }

    #[test]
    fn coordinate_sections() {
        let s = coordinate_section(&cross_polytope(3), 2).unwrap();
        assert_eq!(s, cross_polytope(2));
        let h = coordinate_section(&hexagon(), 1).unwrap();
        assert!((volume(&h).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn abs_linear_examples() {
        assert!((abs_linear_moment(&ball(2).unwrap(), &[0.6, 0.8]).unwrap() - 4.0 / 3.0).abs() < 1e-10);
        assert!((abs_linear_moment(&cross_polytope(2), &[0.0, 1.0]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((abs_linear_moment(&double_cone(), &[0.0, 0.0, 1.0]).unwrap() - PI / 6.0).abs() < 1e-10);
        let mc = abs_linear_moment_mc(&hexagon(), &[0.6, 0.8], 400_000, 4).unwrap();
        let exact = abs_linear_moment(&hexagon(), &[0.6, 0.8]).unwrap();
        assert!((mc.value - exact).abs() <= 4.0 * mc.std_error);
    }
}
