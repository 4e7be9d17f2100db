//! The Mahler volume product, its upper and lower bounds, and the lemma
//! chain behind the zonoid lower bound.

use serde::{Deserialize, Serialize};

use crate::bodies::{self, ConvexBody};
use crate::duality::polar;
use crate::error::{input, Error, Result};
use crate::linalg::{self, Vector};
use crate::report::{CheckReport, Relation, TolKind};
use crate::rng::derive_seed;
use crate::tolerances::{CLOSED_FORM_REL, INVARIANCE_REL, LEMMA34_ABS, MC_SIGMAS};
use crate::volume::{self, ball_volume, McEstimate};

/// How volumes are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Closed forms, triangulations and determinant sums.
    #[default]
    Exact,
    /// Rejection sampling for both volumes.
    Mc,
    /// Exact `vol K` (when available) and the sphere formula for `vol K*`.
    Sphere,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Method::Exact),
            "mc" => Ok(Method::Mc),
            "sphere" => Ok(Method::Sphere),
            other => input(format!("unknown method {other:?} (exact|mc|sphere)")),
        }
    }
}

/// `P(K) = vol(K) vol(K*)` on the exact path.
pub fn mahler(k: &ConvexBody) -> Result<f64> {
    Ok(volume::volume(k)? * volume::volume(&polar(k)?)?)
}

fn product(a: McEstimate, b: McEstimate) -> McEstimate {
    McEstimate {
        value: a.value * b.value,
        std_error: ((a.std_error * b.value).powi(2) + (a.value * b.std_error).powi(2)).sqrt(),
        samples: a.samples.max(b.samples),
        seed: a.seed,
    }
}

/// Mahler product by the requested method.
pub fn mahler_estimate(k: &ConvexBody, method: Method, samples: u64, seed: u64) -> Result<McEstimate> {
    match method {
        Method::Exact => Ok(McEstimate::exact(mahler(k)?)),
        Method::Mc => {
            let a = volume::volume_mc(k, samples, derive_seed(seed, "mahler-body", 0))?;
            let b = volume::volume_mc(&polar(k)?, samples, derive_seed(seed, "mahler-polar", 0))?;
            Ok(McEstimate { seed, ..product(a, b) })
        }
        Method::Sphere => {
            let a = match volume::volume(k) {
                Ok(v) => McEstimate::exact(v),
                Err(Error::Capability(_)) => volume::volume_mc(k, samples, derive_seed(seed, "mahler-body", 0))?,
                Err(e) => return Err(e),
            };
            let b = volume::polar_volume_sphere(k, samples, derive_seed(seed, "mahler-sphere", 0))?;
            Ok(McEstimate { seed, ..product(a, b) })
        }
    }
}

/// Upper bound `omega_n^2`.
pub fn santalo_upper_bound(n: usize) -> f64 {
    ball_volume(n).powi(2)
}

/// Lower bound `4^n / n!`.
pub fn mahler_lower_bound(n: usize) -> f64 {
    4f64.powi(n as i32) / linalg::factorial(n)
}

/// Whether `4^n/n!` is a theorem for `K`: zonoids (up to linear maps) and
/// unconditional bodies.
pub fn lower_bound_proven(k: &ConvexBody) -> bool {
    let mut inner = k;
    while let ConvexBody::Linear { body, .. } = inner {
        inner = body;
    }
    matches!(inner, ConvexBody::Zonotope { .. } | ConvexBody::Ball { .. } | ConvexBody::Interval { .. })
        || crate::perturb::is_unconditional_structural(inner)
}

fn band(est: &McEstimate, method: Method) -> (f64, TolKind) {
    if method == Method::Exact {
        (CLOSED_FORM_REL, TolKind::Rel)
    } else {
        (MC_SIGMAS * est.std_error, TolKind::Abs)
    }
}

fn stamp(r: CheckReport, est: &McEstimate, method: Method) -> CheckReport {
    if method == Method::Exact {
        r
    } else {
        r.with_seed(est.seed).with_samples(est.samples)
    }
}

/// Upper (`P <= omega_n^2`) and lower (`P >= 4^n/n!`) bound reports.
pub fn santalo_check(k: &ConvexBody, method: Method, samples: u64, seed: u64) -> Result<Vec<CheckReport>> {
    let n = k.dim();
    let p = mahler_estimate(k, method, samples, seed)?;
    let (tol, kind) = band(&p, method);
    let upper = CheckReport::new("santalo-upper", p.value, Relation::Le, santalo_upper_bound(n), tol, kind)
        .with_digest(k);
    let mut lower = CheckReport::new("santalo-lower", p.value, Relation::Ge, mahler_lower_bound(n), tol, kind)
        .with_digest(k);
    if !lower_bound_proven(k) {
        lower = lower.note("conjectural bound");
    }
    Ok(vec![stamp(upper, &p, method), stamp(lower, &p, method)])
}

/// `P(TK) = P(K)` and `P(K) = P(K*)`. `lhs` is the larger relative
/// deviation (exact) or absolute deviation (sampled).
pub fn mahler_invariance_check(
    k: &ConvexBody,
    t: &[Vector],
    method: Method,
    samples: u64,
    seed: u64,
) -> Result<CheckReport> {
    let tk = bodies::linear(t.to_vec(), k.clone())?;
    let kp = polar(k)?;
    let p = mahler_estimate(k, method, samples, derive_seed(seed, "invariance", 0))?;
    let pt = mahler_estimate(&tk, method, samples, derive_seed(seed, "invariance", 1))?;
    let pp = mahler_estimate(&kp, method, samples, derive_seed(seed, "invariance", 2))?;
    let report = if method == Method::Exact {
        let dev = ((pt.value - p.value).abs()).max((pp.value - p.value).abs()) / p.value;
        CheckReport::new("mahler-invariance", dev, Relation::Le, 0.0, INVARIANCE_REL, TolKind::Abs)
    } else {
        let d1 = (pt.value - p.value).abs() - MC_SIGMAS * p.std_error.hypot(pt.std_error);
        let d2 = (pp.value - p.value).abs() - MC_SIGMAS * p.std_error.hypot(pp.std_error);
        CheckReport::new("mahler-invariance", d1.max(d2), Relation::Le, 0.0, 0.0, TolKind::Abs)
            .note("lhs is the deviation in excess of the 4-sigma band")
            .with_seed(seed)
            .with_samples(samples)
    };
    Ok(report
        .note(format!("P(K) = {}, P(TK) = {}, P(K*) = {}", p.value, pt.value, pp.value))
        .with_digest(&(k, t)))
}

struct Lemma33Terms {
    atoms: Vec<(Vector, f64)>,
    /// `(n+1)|A| int_{A*} |<u, y>| dy` per atom.
    left: Vec<f64>,
    /// `2|A*| |P_{u^⊥} A|` per atom.
    right: Vec<f64>,
    left_err: Vec<f64>,
}

fn lemma33_terms(z: &ConvexBody, samples: Option<u64>, seed: u64) -> Result<Lemma33Terms> {
    let n = z.dim();
    if !matches!(z, ConvexBody::Zonotope { .. }) {
        return input("lemma 3.3 applies to zonotopes");
    }
    if n < 2 {
        return input("lemma 3.3 needs dimension n >= 2");
    }
    let mu = bodies::zonotope_measure(z)?;
    let zp = polar(z)?;
    let (va, vp) = (volume::volume(z)?, volume::volume(&zp)?);
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut left_err = Vec::new();
    for (i, (u, _)) in mu.atoms.iter().enumerate() {
        let (m, e) = match samples {
            None => (volume::abs_linear_moment(&zp, u)?, 0.0),
            Some(s) => {
                let est = volume::abs_linear_moment_mc(&zp, u, s, derive_seed(seed, "lemma33", i as u64))?;
                (est.value, est.std_error)
            }
        };
        left.push((n as f64 + 1.0) * va * m);
        left_err.push((n as f64 + 1.0) * va * e);
        right.push(2.0 * vp * volume::volume(&volume::projection(z, u)?)?);
    }
    Ok(Lemma33Terms { atoms: mu.atoms, left, right, left_err })
}

/// The averaged identity
/// `(n+1)|A| int int_{A*} |<x,y>| dy dmu(x) = 2|A*| int |P_{x^⊥} A| dmu(x)`.
/// `samples = None` evaluates the inner integrals exactly.
pub fn lemma33_identity(z: &ConvexBody, samples: Option<u64>, seed: u64) -> Result<CheckReport> {
    let t = lemma33_terms(z, samples, seed)?;
    let lhs: f64 = t.atoms.iter().zip(&t.left).map(|((_, w), l)| w * l).sum();
    let rhs: f64 = t.atoms.iter().zip(&t.right).map(|((_, w), r)| w * r).sum();
    let report = match samples {
        None => CheckReport::new("lemma33-identity", lhs, Relation::Eq, rhs, CLOSED_FORM_REL, TolKind::Rel),
        Some(s) => {
            let err: f64 = t.atoms.iter().zip(&t.left_err).map(|((_, w), e)| (w * e).powi(2)).sum::<f64>().sqrt();
            CheckReport::new("lemma33-identity", lhs, Relation::Eq, rhs, MC_SIGMAS * err, TolKind::Abs)
                .with_seed(seed)
                .with_samples(s)
        }
    };
    Ok(report.with_digest(z))
}

/// An atom `x0` with `(n+1)|A| int_{A*}|<x0,y>| dy >= 2|A*| |P_{x0^⊥} A|`:
/// the atom maximizing left/right, ties going to the earliest generator and
/// the positive sign.
pub fn lemma33_find_x0(z: &ConvexBody) -> Result<(Vector, CheckReport)> {
    let t = lemma33_terms(z, None, 0)?;
    // Atoms come in (-u, +u) pairs per generator; visit +u first.
    let order: Vec<usize> = (0..t.atoms.len() / 2).flat_map(|g| [2 * g + 1, 2 * g]).collect();
    let mut best = order[0];
    for &i in &order[1..] {
        let (ri, rb) = (t.left[i] / t.right[i], t.left[best] / t.right[best]);
        if ri > rb * (1.0 + 1e-12) {
            best = i;
        }
    }
    let x0 = t.atoms[best].0.clone();
    let report = CheckReport::new("lemma33-x0", t.left[best], Relation::Ge, t.right[best], CLOSED_FORM_REL, TolKind::Rel)
        .note(format!("x0 = {x0:?}"))
        .with_digest(z);
    Ok((x0, report))
}

/// `int_0^T t f(t) dt <= (p+1)/(p+2) (int_0^T f)^2` for `f(0) = 1` with
/// `f^(1/p)` concave on its support. `t_max` bounds the support.
pub fn lemma34_check(f: &dyn Fn(f64) -> f64, p: f64, t_max: f64, quad_points: usize) -> Result<CheckReport> {
    if !(p > 0.0) {
        return input("lemma 3.4 needs p > 0");
    }
    if (f(0.0) - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("f(0) = {} but must be 1", f(0.0))));
    }
    if quad_points < 3 {
        return input("at least 3 grid points are needed for the concavity test");
    }
    // End of the support: last point where f is positive.
    let end = if f(t_max) > 0.0 {
        t_max
    } else {
        let (mut lo, mut hi) = (0.0, t_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let phi = |t: f64| f(t).max(0.0).powf(1.0 / p);
    let grid: Vec<f64> = (0..quad_points).map(|i| end * i as f64 / (quad_points - 1) as f64).collect();
    for w in grid.windows(3) {
        let (a, b, c) = (phi(w[0]), phi(w[1]), phi(w[2]));
        if (a + c) / 2.0 > b + 1e-12 * (1.0 + b) {
            return Err(Error::Precondition(format!(
                "f^(1/p) not concave on the grid triple ({}, {}, {})",
                w[0], w[1], w[2]
            )));
        }
    }
    use quadrature::double_exponential::integrate;
    let mass = integrate(f, 0.0, end, 1e-14).integral;
    let first = integrate(|t| t * f(t), 0.0, end, 1e-14).integral;
    let rhs = (p + 1.0) / (p + 2.0) * mass * mass;
    Ok(CheckReport::new("lemma34", first, Relation::Le, rhs, LEMMA34_ABS, TolKind::Abs)
        .note(format!("p = {p}, support end = {end}")))
}

/// `int_B |<x,y>| dy <= n/(2(n+1)) |B|^2 / |B ∩ x^⊥|`.
///
/// Exact whenever the body has exact sections; otherwise (and as an
/// independent oracle, see [`lemma35_check_mc`]) by Monte Carlo.
pub fn lemma35_check(b: &ConvexBody, x: &[f64], samples: u64, seed: u64) -> Result<CheckReport> {
    match lemma35_exact(b, x) {
        Err(Error::Capability(_)) => lemma35_check_mc(b, x, samples, seed),
        other => other,
    }
}

fn lemma35_rhs(n: usize, vol: f64, central: f64) -> Result<f64> {
    if central < 1e-12 {
        return input(format!("central section volume {central:e} is below 1e-12"));
    }
    Ok(n as f64 / (2.0 * (n as f64 + 1.0)) * vol * vol / central)
}

pub fn lemma35_exact(b: &ConvexBody, x: &[f64]) -> Result<CheckReport> {
    let n = b.dim();
    let central = volume::section_volume(b, x, 0.0)?;
    let rhs = lemma35_rhs(n, volume::volume(b)?, central)?;
    let lhs = volume::abs_linear_moment(b, x)?;
    Ok(CheckReport::new("lemma35", lhs, Relation::Le, rhs, CLOSED_FORM_REL, TolKind::Rel).with_digest(&(b, x)))
}

/// Sampled `int_B |<x,y>| dy`; the right side uses exact volumes where
/// available and sampled ones otherwise.
pub fn lemma35_check_mc(b: &ConvexBody, x: &[f64], samples: u64, seed: u64) -> Result<CheckReport> {
    let n = b.dim();
    let lhs = volume::abs_linear_moment_mc(b, x, samples, derive_seed(seed, "lemma35", 0))?;
    let (vol, vol_err) = match volume::volume(b) {
        Ok(v) => (v, 0.0),
        Err(Error::Capability(_)) => {
            let e = volume::volume_mc(b, samples, derive_seed(seed, "lemma35", 1))?;
            (e.value, e.std_error)
        }
        Err(e) => return Err(e),
    };
    let (central, central_err) = match volume::section_volume(b, x, 0.0) {
        Ok(g) => (g, 0.0),
        Err(Error::Capability(_)) => {
            let p = volume::section_profile(b, x, 17, samples, derive_seed(seed, "lemma35", 2))?;
            (p.g[8], p.g_err[8])
        }
        Err(e) => return Err(e),
    };
    let rhs = lemma35_rhs(n, vol, central)?;
    let rhs_err = rhs * ((2.0 * vol_err / vol).powi(2) + (central_err / central).powi(2)).sqrt();
    let sigma = lhs.std_error.hypot(rhs_err);
    Ok(CheckReport::new("lemma35", lhs.value, Relation::Le, rhs, MC_SIGMAS * sigma, TolKind::Abs)
        .with_seed(seed)
        .with_samples(samples)
        .with_digest(&(b, x)))
}

/// The recursion `P(Z) >= (4/n) P(P_{x0^⊥} Z)` unrolled to dimension 1,
/// followed by the final bound `P(Z) >= 4^n/n!`.
pub fn zonoid_recursion_check(z: &ConvexBody) -> Result<Vec<CheckReport>> {
    let n = z.dim();
    if n < 2 {
        return input("the zonoid recursion needs dimension n >= 2");
    }
    let p0 = mahler(z)?;
    let mut reports = Vec::new();
    let mut current = z.clone();
    let mut p_current = p0;
    for k in (2..=n).rev() {
        let (x0, _) = lemma33_find_x0(&current)?;
        let next = volume::projection(&current, &x0)?;
        let p_next = mahler(&next)?;
        reports.push(
            CheckReport::new(
                format!("zonoid-link-{k}"),
                p_current,
                Relation::Ge,
                4.0 / k as f64 * p_next,
                CLOSED_FORM_REL,
                TolKind::Rel,
            )
            .with_digest(&current),
        );
        current = next;
        p_current = p_next;
    }
    reports.push(
        CheckReport::new("zonoid-bound", p0, Relation::Ge, mahler_lower_bound(n), CLOSED_FORM_REL, TolKind::Rel)
            .with_digest(z),
    );
    Ok(reports)
}
