//! Polars of log-concave functions on grids, the functional Santaló and
//! Ball inequalities, Ball's inequality for bodies and the two-function
//! integral lemma behind it.

use std::f64::consts::PI;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::ConvexBody;
use crate::duality::polar;
use crate::error::{input, Error, Result};
use crate::harmonic::compensated_sum;
use crate::linalg::{self, ball_volume, Vector};
use crate::products::{santalo_check, Method};
use crate::report::{CheckReport, Relation, TolKind};
use crate::rng::{self, derive_seed};
use crate::tolerances::{
    CLOSED_FORM_REL, FUNCTIONAL_BALL_REL, GRID_EQUALITY_REL, GRID_TAIL_FRACTION, LEMMA52_CONCLUSION_REL,
    LEMMA52_HYPOTHESIS_REL, MC_SIGMAS,
};
use crate::volume::{self, McEstimate};

pub const DEFAULT_EXTENT: f64 = 8.0;

/// Grid points per axis used when none is given.
pub fn default_points(dim: usize) -> usize {
    if dim <= 2 { 257 } else { 65 }
}

/// Closed form attached to a grid for error reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticTag {
    /// `exp(-|x|^2 / 2)`.
    Gaussian,
    Indicator { body: ConvexBody },
    /// `exp(-||x||_K)`.
    ExpNegGauge { body: ConvexBody },
}

impl AnalyticTag {
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            AnalyticTag::Gaussian => (-linalg::dot(x, x) / 2.0).exp(),
            AnalyticTag::Indicator { body } => {
                if body.gauge(x)? <= 1.0 + 1e-12 { 1.0 } else { 0.0 }
            }
            AnalyticTag::ExpNegGauge { body } => (-body.gauge(x)?).exp(),
        })
    }

    /// The closed form of the polar function.
    pub fn polar(&self) -> Result<AnalyticTag> {
        Ok(match self {
            AnalyticTag::Gaussian => AnalyticTag::Gaussian,
            AnalyticTag::Indicator { body } => AnalyticTag::ExpNegGauge { body: polar(body)? },
            AnalyticTag::ExpNegGauge { body } => AnalyticTag::Indicator { body: polar(body)? },
        })
    }
}

/// An even nonnegative function sampled on `{-L, ..., L}^n` with `m`
/// points per axis, row-major with the first axis slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub dim: usize,
    pub extent: f64,
    pub m: usize,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<AnalyticTag>,
}

impl GridFunction {
    pub fn new(dim: usize, extent: f64, m: usize, values: Vec<f64>) -> Result<Self> {
        let g = GridFunction { dim, extent, m, values, tag: None };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return input(format!("grid dimension must be 1..3, got {}", self.dim));
        }
        if self.m < 3 || self.m % 2 == 0 {
            return input(format!("points per axis must be odd and at least 3, got {}", self.m));
        }
        if self.dim == 3 && self.m > 129 || self.m > 1025 {
            return input(format!("{} points per axis is too many in dimension {}", self.m, self.dim));
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return input(format!("extent must be positive, got {}", self.extent));
        }
        if self.values.len() != self.m.pow(self.dim as u32) {
            return input(format!("expected {} values, got {}", self.m.pow(self.dim as u32), self.values.len()));
        }
        if let Some(v) = self.values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return input(format!("grid values must be finite and nonnegative, found {v}"));
        }
        if (0..self.values.len()).any(|i| self.values[i] != self.values[self.mirror(i)]) {
            return input("grid function is not even");
        }
        Ok(())
    }

    /// Sample `f` and copy values across the origin so the grid is exactly even.
    pub fn sample(dim: usize, extent: f64, m: usize, f: impl Fn(&[f64]) -> Result<f64> + Sync) -> Result<Self> {
        let mut g = GridFunction { dim, extent, m, values: Vec::new(), tag: None };
        g.values = (0..m.pow(dim as u32)).into_par_iter().map(|i| f(&g.point(i))).collect::<Result<_>>()?;
        for i in 0..g.values.len() {
            let j = g.mirror(i);
            if j < i {
                g.values[i] = g.values[j];
            }
        }
        g.validate()?;
        Ok(g)
    }

    pub fn from_tag(tag: AnalyticTag, dim: usize, extent: f64, m: usize) -> Result<Self> {
        if let AnalyticTag::Indicator { body } | AnalyticTag::ExpNegGauge { body } = &tag {
            crate::error::check_dim(dim, body.dim())?;
        }
        let mut g = Self::sample(dim, extent, m, |x| tag.value(x))?;
        g.tag = Some(tag);
        Ok(g)
    }

    /// `exp(-|x|^2 / 2)`.
    pub fn gaussian(dim: usize, extent: f64, m: usize) -> Result<Self> {
        Self::from_tag(AnalyticTag::Gaussian, dim, extent, m)
    }

    pub fn indicator(body: &ConvexBody, extent: f64, m: usize) -> Result<Self> {
        Self::from_tag(AnalyticTag::Indicator { body: body.clone() }, body.dim(), extent, m)
    }

    pub fn exp_neg_gauge(body: &ConvexBody, extent: f64, m: usize) -> Result<Self> {
        Self::from_tag(AnalyticTag::ExpNegGauge { body: body.clone() }, body.dim(), extent, m)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.m - 1) as f64
    }

    /// Axis coordinates; exactly antisymmetric about the center.
    pub fn axis(&self) -> Vec<f64> {
        let c = (self.m / 2) as f64;
        let h = self.spacing();
        (0..self.m).map(|i| (i as f64 - c) * h).collect()
    }

    fn indices(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        for k in (0..self.dim).rev() {
            out[k] = i % self.m;
            i /= self.m;
        }
        out
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, i| acc * self.m + i)
    }

    pub fn point(&self, i: usize) -> Vector {
        let c = (self.m / 2) as f64;
        let h = self.spacing();
        self.indices(i).iter().map(|k| (*k as f64 - c) * h).collect()
    }

    /// Index of `-x` for the point at index `i`.
    pub fn mirror(&self, i: usize) -> usize {
        self.m.pow(self.dim as u32) - 1 - i
    }

    /// Index of `x` with coordinate `axis` negated.
    pub fn flip(&self, i: usize, axis: usize) -> usize {
        let mut idx = self.indices(i);
        idx[axis] = self.m - 1 - idx[axis];
        self.flat(&idx)
    }

    fn on_boundary(&self, i: usize) -> bool {
        self.indices(i).iter().any(|k| *k == 0 || *k == self.m - 1)
    }

    /// `h^n sum_x w(x) f(x)`.
    pub fn integrate_weighted(&self, w: impl Fn(&[f64]) -> f64) -> f64 {
        let cell = self.spacing().powi(self.dim as i32);
        cell * compensated_sum((0..self.values.len()).map(|i| self.values[i] * w(&self.point(i))))
    }

    pub fn integral(&self) -> f64 {
        self.integrate_weighted(|_| 1.0)
    }

    /// Share of the total mass on the outermost shell of the grid.
    pub fn boundary_fraction(&self) -> f64 {
        let total = compensated_sum(self.values.iter().copied());
        let shell = compensated_sum((0..self.values.len()).filter(|i| self.on_boundary(*i)).map(|i| self.values[i]));
        if total > 0.0 { shell / total } else { 0.0 }
    }

    fn check_tail(&self, what: &str) -> Result<()> {
        let frac = self.boundary_fraction();
        if frac > GRID_TAIL_FRACTION {
            return input(format!(
                "extent too small: {what} keeps {frac:e} of its mass on the grid boundary (limit {GRID_TAIL_FRACTION:e})"
            ));
        }
        Ok(())
    }

    /// Largest `|f(x) - tag(x)|` over the grid.
    pub fn sup_error(&self, tag: &AnalyticTag) -> Result<f64> {
        (0..self.values.len())
            .into_par_iter()
            .map(|i| Ok((self.values[i] - tag.value(&self.point(i))?).abs()))
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    }

    /// Midpoint convexity of `-log f` along every axis.
    pub fn is_log_concave(&self) -> bool {
        let phi: Vec<f64> = self.values.iter().map(|v| -v.ln()).collect();
        (0..self.values.len()).all(|i| {
            let idx = self.indices(i);
            (0..self.dim).all(|k| {
                if idx[k] == 0 || idx[k] == self.m - 1 {
                    return true;
                }
                let mut lo = idx.clone();
                lo[k] -= 1;
                let mut hi = idx.clone();
                hi[k] += 1;
                let (a, b, c) = (phi[self.flat(&lo)], phi[i], phi[self.flat(&hi)]);
                if a.is_infinite() || c.is_infinite() {
                    return true;
                }
                b.is_finite() && a + c >= 2.0 * b - 1e-9 * (1.0 + b.abs())
            })
        })
    }

    fn is_unconditional(&self) -> bool {
        (0..self.values.len()).all(|i| (0..self.dim).all(|k| self.values[i] == self.values[self.flip(i, k)]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarTransformResult {
    pub polar: GridFunction,
    pub sup_error_vs_analytic: Option<f64>,
}

/// Discrete Legendre transform `max_y (<x, y> + psi(y))` along one axis of
/// a flat array, for every line through the others.
fn legendre_axis(values: &[f64], dim: usize, m: usize, axis: usize, coords: &[f64]) -> Vec<f64> {
    let stride = m.pow((dim - 1 - axis) as u32);
    let lines: Vec<usize> = (0..values.len()).filter(|i| (i / stride) % m == 0).collect();
    let results: Vec<Vec<f64>> = lines
        .par_iter()
        .map(|&base| {
            let finite: Vec<(f64, f64)> = (0..m)
                .map(|j| (coords[j], values[base + j * stride]))
                .filter(|(_, v)| v.is_finite())
                .collect();
            coords
                .iter()
                .map(|x| finite.iter().map(|(y, v)| x * y + v).fold(f64::NEG_INFINITY, f64::max))
                .collect()
        })
        .collect();
    let mut out = vec![f64::NEG_INFINITY; values.len()];
    for (base, line) in lines.iter().zip(results) {
        for (j, v) in line.into_iter().enumerate() {
            out[base + j * stride] = v;
        }
    }
    out
}

/// `f°(x) = inf_y e^{-<x,y>} / f(y) = exp(-(-log f)*(x))`. The supremum
/// over the product grid is taken one axis at a time, which is exact.
pub fn polar_function(f: &GridFunction) -> Result<PolarTransformResult> {
    f.validate()?;
    if f.values.iter().all(|v| *v == 0.0) {
        return input("polar of the zero function is undefined");
    }
    let coords = f.axis();
    let mut psi: Vec<f64> = f.values.iter().map(|v| v.ln()).collect();
    for axis in 0..f.dim {
        psi = legendre_axis(&psi, f.dim, f.m, axis, &coords);
    }
    let mut polar = GridFunction {
        dim: f.dim,
        extent: f.extent,
        m: f.m,
        values: psi.iter().map(|v| (-v).exp()).collect(),
        tag: None,
    };
    for i in 0..polar.values.len() {
        let j = polar.mirror(i);
        if j < i {
            polar.values[i] = polar.values[j];
        }
    }
    polar.tag = f.tag.as_ref().map(AnalyticTag::polar).transpose()?;
    let sup_error_vs_analytic = polar.tag.as_ref().map(|t| polar.sup_error(t)).transpose()?;
    Ok(PolarTransformResult { polar, sup_error_vs_analytic })
}

/// `f°° = f` for log-concave `f`, within five grid spacings in sup norm on
/// the support.
pub fn involution_check(f: &GridFunction) -> Result<CheckReport> {
    if !f.is_log_concave() {
        return Err(Error::Precondition("-log f fails the midpoint convexity test".into()));
    }
    let once = polar_function(f)?.polar;
    let twice = polar_function(&once)?.polar;
    let dist = (0..f.values.len())
        .filter(|i| f.values[*i] > 1e-12)
        .map(|i| (f.values[i] - twice.values[i]).abs())
        .fold(0.0, f64::max);
    Ok(CheckReport::new("involution", dist, Relation::Le, 0.0, 5.0 * f.spacing(), TolKind::Abs)
        .note(format!("grid spacing {}", f.spacing()))
        .with_digest(f))
}

/// `int f · int f° <= (2 pi)^n` by grid quadrature.
pub fn functional_santalo_check(f: &GridFunction) -> Result<CheckReport> {
    let p = polar_function(f)?;
    f.check_tail("f")?;
    p.polar.check_tail("the polar")?;
    let (a, b) = (f.integral(), p.polar.integral());
    let rhs = (2.0 * PI).powi(f.dim as i32);
    let mut r = CheckReport::new("functional-santalo", a * b, Relation::Le, rhs, GRID_EQUALITY_REL, TolKind::Rel)
        .note(format!("int f = {a}, int f° = {b}"))
        .with_digest(f);
    if let Some(e) = p.sup_error_vs_analytic {
        r = r.note(format!("polar sup error vs closed form {e:e}"));
    }
    Ok(r)
}

/// `sum_i int x_i^2 f · int y_i^2 f° <= n (2 pi)^n` for unconditional `f`.
pub fn functional_ball_check(f: &GridFunction) -> Result<CheckReport> {
    f.validate()?;
    if !f.is_unconditional() {
        return Err(Error::Precondition("grid values are not invariant under coordinate sign flips".into()));
    }
    let p = polar_function(f)?.polar;
    f.check_tail("f")?;
    p.check_tail("the polar")?;
    let terms: Vec<f64> = (0..f.dim)
        .map(|i| f.integrate_weighted(|x| x[i] * x[i]) * p.integrate_weighted(|y| y[i] * y[i]))
        .collect();
    let n = f.dim as f64;
    Ok(CheckReport::new(
        "functional-ball",
        terms.iter().sum(),
        Relation::Le,
        n * (2.0 * PI).powf(n),
        FUNCTIONAL_BALL_REL,
        TolKind::Rel,
    )
    .note(format!("per-axis terms {terms:?}"))
    .note("equality needs f = c exp(-|Tx|^2) with T diagonal")
    .with_digest(f))
}

/// `int_K x_axis^2 dx`, exact where available and by Monte Carlo otherwise.
pub fn second_moment(k: &ConvexBody, axis: usize, samples: u64, seed: u64) -> Result<McEstimate> {
    if axis >= k.dim() {
        return input(format!("axis {axis} out of range for dimension {}", k.dim()));
    }
    match volume::second_moment_matrix(k) {
        Ok(m) => Ok(McEstimate::exact(m[axis][axis])),
        Err(Error::Capability(_)) => volume::second_moment_mc(k, axis, axis, samples, seed),
        Err(e) => Err(e),
    }
}

/// `int_K int_K* <x, y>^2 <= n w_n^2 / (n+2)^2` for unconditional `K`,
/// expanded over coordinates; the vanishing of `int_K x_0 x_1` is checked
/// by Monte Carlo when `samples > 0`.
pub fn ball_inequality_check(k: &ConvexBody, samples: u64, seed: u64) -> Result<CheckReport> {
    let n = k.dim();
    if n < 2 {
        return input("Ball's inequality needs dimension at least 2");
    }
    if !crate::perturb::is_unconditional(k, 64, derive_seed(seed, "ball-unconditional", 0))? {
        return Err(Error::Precondition("body is not unconditional".into()));
    }
    let kp = polar(k)?;
    let mut lhs = 0.0;
    let mut var = 0.0;
    let mut per_axis = Vec::new();
    for i in 0..n {
        let a = second_moment(k, i, samples, derive_seed(seed, "ball-moment-k", i as u64))?;
        let b = second_moment(&kp, i, samples, derive_seed(seed, "ball-moment-polar", i as u64))?;
        lhs += a.value * b.value;
        var += (a.std_error * b.value).powi(2) + (b.std_error * a.value).powi(2);
        per_axis.push((a.value, b.value));
    }
    let rhs = n as f64 * ball_volume(n).powi(2) / ((n + 2) as f64).powi(2);
    let sigma = var.sqrt();
    let mut report = if sigma == 0.0 {
        CheckReport::new("ball-inequality", lhs, Relation::Le, rhs, CLOSED_FORM_REL, TolKind::Rel)
    } else {
        CheckReport::new("ball-inequality", lhs, Relation::Le, rhs, MC_SIGMAS * sigma, TolKind::Abs)
            .with_seed(seed)
            .with_samples(samples)
    };
    report = report.note(format!("per-axis (int_K x_i^2, int_K* y_i^2) = {per_axis:?}")).with_digest(k);
    if samples > 0 {
        let cross = volume::second_moment_mc(k, 0, 1, samples, derive_seed(seed, "ball-cross", 0))?;
        report = report.note(format!("int_K x_0 x_1 = {} ± {}", cross.value, cross.std_error));
        if cross.value.abs() > MC_SIGMAS * cross.std_error + 1e-12 {
            report = report.fail("cross moment differs from 0 beyond 4 sigma");
        }
    }
    Ok(report)
}

/// `int exp(-||x||_K^2 / 2) dx = c_n |K|` with `c_n = (2 pi)^{n/2} / w_n`,
/// integrated by importance sampling from a Gaussian wide enough to cover
/// `K`; then `|K| |K*| <= w_n^2`.
pub fn santalo_reduction_check(k: &ConvexBody, samples: u64, seed: u64) -> Result<CheckReport> {
    let n = k.dim();
    if samples < 1000 {
        return input("at least 1000 samples are required");
    }
    let sigma = volume::bounding_radius(k)?;
    let norm = (2.0 * PI * sigma * sigma).powf(n as f64 / 2.0);
    let [m] = rng::parallel_moments::<1, _>(samples, derive_seed(seed, "gauge-gaussian", 0), |g| {
        let x: Vector = rng::gaussian_vector(g, n).iter().map(|v| v * sigma).collect();
        let gauge = k.gauge(&x).unwrap_or(f64::INFINITY);
        [norm * (-gauge * gauge / 2.0 + linalg::dot(&x, &x) / (2.0 * sigma * sigma)).exp()]
    });
    let vol = match volume::volume(k) {
        Ok(v) => McEstimate::exact(v),
        Err(Error::Capability(_)) => volume::volume_mc(k, samples, derive_seed(seed, "gauge-volume", 0))?,
        Err(e) => return Err(e),
    };
    let c = (2.0 * PI).powf(n as f64 / 2.0) / ball_volume(n);
    let band = MC_SIGMAS * m.std_error().hypot(c * vol.std_error);
    let mut report = CheckReport::new("santalo-reduction", m.mean, Relation::Eq, c * vol.value, band, TolKind::Abs)
        .with_seed(seed)
        .with_samples(samples)
        .with_digest(k);
    let upper = match santalo_check(k, Method::Exact, 0, seed) {
        Ok(r) => r,
        Err(Error::Capability(_)) => santalo_check(k, Method::Sphere, samples, seed)?,
        Err(e) => return Err(e),
    };
    let upper = &upper[0];
    report = report.note(format!("implied bound: |K||K*| = {} vs w_n^2 = {}", upper.lhs, upper.rhs));
    if !upper.pass {
        report = report.fail("volume product exceeds w_n^2");
    }
    Ok(report)
}

/// `int_0^inf f` for `f` supported in `[0, end]`, or on the whole half-line
/// when `end` is infinite.
fn half_line_integral(f: &dyn Fn(f64) -> f64, end: f64) -> f64 {
    use quadrature::double_exponential::integrate;
    if end.is_finite() {
        integrate(f, 0.0, end, 1e-14).integral
    } else {
        let head = integrate(f, 0.0, 1.0, 1e-14).integral;
        // t = 1/u maps (0, 1] onto [1, inf).
        let tail = integrate(|u| if u <= 0.0 { 0.0 } else { f(1.0 / u) / (u * u) }, 0.0, 1.0, 1e-14).integral;
        head + tail
    }
}

/// Two-function integral lemma on the half-line: if
/// `f1(r) f2(s) <= f3(sqrt(rs))^2` then `int f1 int f2 <= (int f3)^2`.
/// Pairs are drawn uniformly from `[0, range]^2`; `end` bounds the
/// supports (infinite for full half-line integrals).
pub fn lemma52_check(
    f1: &dyn Fn(f64) -> f64,
    f2: &dyn Fn(f64) -> f64,
    f3: &dyn Fn(f64) -> f64,
    range: f64,
    end: f64,
    sample_pairs: usize,
    seed: u64,
) -> Result<CheckReport> {
    if !(range.is_finite() && range > 0.0) {
        return input("sampling range must be positive");
    }
    let mut g = rng::stream(derive_seed(seed, "lemma52", 0), 0);
    let mut violations = 0usize;
    let mut worst = 0.0f64;
    for _ in 0..sample_pairs {
        let (r, s) = (g.random_range(0.0..=range), g.random_range(0.0..=range));
        let lhs = f1(r) * f2(s);
        let rhs = f3((r * s).sqrt()).powi(2);
        let excess = lhs - rhs;
        if excess > LEMMA52_HYPOTHESIS_REL * rhs.abs().max(1e-300) && excess > 0.0 {
            violations += 1;
            worst = worst.max(excess);
        }
    }
    let (i1, i2, i3) = (half_line_integral(f1, end), half_line_integral(f2, end), half_line_integral(f3, end));
    let report =
        CheckReport::new("lemma52", i1 * i2, Relation::Le, i3 * i3, LEMMA52_CONCLUSION_REL, TolKind::Rel)
            .note(format!("int f1 = {i1}, int f2 = {i2}, int f3 = {i3}"))
            .with_seed(seed)
            .with_samples(sample_pairs as u64);
    Ok(if violations > 0 {
        report.fail(format!("hypothesis violated at {violations} sampled pairs (largest excess {worst:e})"))
    } else {
        report
    })
}

/// The instance used for Ball's inequality: `f1(r) = r^2 |K ∩ (e1^⊥ + r e1)|`,
/// `f2` likewise for `K*`, `f3(t) = w_{n-1} t^2 (1 - t^2)^{(n-1)/2}`.
pub fn lemma52_sections_check(k: &ConvexBody, sample_pairs: usize, seed: u64) -> Result<CheckReport> {
    let n = k.dim();
    if n < 2 {
        return input("section instance needs dimension at least 2");
    }
    let kp = polar(k)?;
    let e1 = linalg::unit(n, 0);
    for (b, name) in [(k, "K"), (&kp, "K*")] {
        if (b.support(&e1)? - 1.0).abs() > 1e-9 || (b.gauge(&e1)? - 1.0).abs() > 1e-9 {
            return Err(Error::Precondition(format!("e1 must lie on the boundary of {name}")));
        }
    }
    let section = |b: &ConvexBody, r: f64| volume::section_volume(b, &e1, r).unwrap_or(f64::NAN);
    let f1 = |r: f64| r * r * section(k, r);
    let f2 = |s: f64| s * s * section(&kp, s);
    let w = ball_volume(n - 1);
    let f3 = |t: f64| if t <= 1.0 { w * t * t * (1.0 - t * t).powf((n - 1) as f64 / 2.0) } else { 0.0 };
    Ok(lemma52_check(&f1, &f2, &f3, 1.0, 1.0, sample_pairs, seed)?
        .note(format!("int f3 closed form w_n / (2(n+2)) = {}", ball_volume(n) / (2.0 * (n + 2) as f64)))
        .with_digest(k))
}
