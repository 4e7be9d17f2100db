//! Fourier functionals of a body: the rho and eta witnesses, Poisson
//! summation and Plancherel checks on functions with known transforms.
//!
//! Transforms use `F^(xi) = int F(x) e^{-2 pi i <x, xi>} dx`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{capability, input, Result};
use crate::linalg::ball_volume;
use crate::report::{CheckReport, Relation, TolKind};
use crate::tolerances::{ETA_TOL, LATTICE_ZERO, PLANCHEREL_REL, POISSON_ABS, RHO_BALL_ABS, RHO_CUBE_REL};

/// Half-line cutoff for sinc-type integrals; the analytic tail beyond it is
/// added back.
pub const SINC_CUTOFF: f64 = 64.0;

/// Radial cutoff for Bessel-type integrals, in units of `|x|`.
pub const BESSEL_CUTOFF: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FtBody {
    Cube,
    Ball,
}

/// Functions on `R^n` with closed-form transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CatalogFunction {
    /// `prod_k sinc(x_k)^2`, transform `prod_k (1 - |xi_k|)_+`.
    Sinc2Product { dim: usize },
    /// `(1/|K|) int_K e^{2 pi i <x, xi>} dxi`, transform `1_K / |K|`.
    IndicatorFt { body: FtBody, dim: usize },
    /// `exp(-pi |x|^2 / s^2)`, transform `s^n exp(-pi s^2 |xi|^2)`.
    Gaussian { dim: usize, scale: f64 },
}

/// `sin(pi t) / (pi t)`.
pub fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// Sum with Neumaier compensation, in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        c += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + c
}

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(20).expect("nonzero")))
}

/// `int_0^r f` by 20-point Gauss-Legendre on cells of width `cell`.
fn composite(f: impl Fn(f64) -> f64, r: f64, cell: f64) -> f64 {
    let cells = (r / cell).ceil() as usize;
    compensated_sum((0..cells).map(|k| {
        let a = k as f64 * cell;
        rule().integrate(a, (a + cell).min(r), &f)
    }))
}

/// `int_R sinc(a x)^2 dx` numerically (closed form `1/a`).
pub fn sinc2_integral(a: f64) -> f64 {
    let u = a * SINC_CUTOFF;
    // Average of the envelope plus the first oscillatory correction.
    let tail = (1.0 / (2.0 * PI * PI * u) - 1.0 / (4.0 * PI.powi(4) * u.powi(3))) / a;
    2.0 * (composite(|x| sinc(a * x).powi(2), SINC_CUTOFF, 0.25 / a) + tail)
}

/// `int_R sinc(a x)^4 dx` numerically (closed form `2/(3a)`).
pub fn sinc4_integral(a: f64) -> f64 {
    let u = a * SINC_CUTOFF;
    let tail = 1.0 / (8.0 * PI.powi(4) * u.powi(3)) / a;
    2.0 * (composite(|x| sinc(a * x).powi(4), SINC_CUTOFF, 0.25 / a) + tail)
}

fn gaussian_integral(c: f64) -> f64 {
    // int_R exp(-pi c x^2) dx = c^{-1/2}; the tail past 8 widths is below 1e-80.
    let r = 8.0 / c.sqrt();
    2.0 * composite(|x| (-PI * c * x * x).exp(), r, r / 32.0)
}

/// `J_{n/2}(z)` for `n = 1, 2, 3, ...`.
fn bessel_half(n: usize, z: f64) -> f64 {
    match n {
        1 => (2.0 / (PI * z)).sqrt() * z.sin(),
        // sin z / z - cos z cancels catastrophically near 0; use its series.
        3 if z < 1e-2 => (2.0 / (PI * z)).sqrt() * z * z * (1.0 / 3.0 - z * z / 30.0 + z.powi(4) / 840.0),
        3 => (2.0 / (PI * z)).sqrt() * (z.sin() / z - z.cos()),
        _ if n % 2 == 0 => libm::jn((n / 2) as i32, z),
        _ => unreachable!("odd dimensions above 3 are rejected earlier"),
    }
}

/// `int |F|^2` for the ball witness by radial quadrature with the averaged
/// asymptotic tail added back.
fn ball_witness_l2(n: usize) -> f64 {
    // |F|^2 integrated over R^n reduces to (n / w_n) int_0^inf J_{n/2}(2 pi r)^2 / r dr.
    let w = ball_volume(n);
    let core = composite(|r| bessel_half(n, 2.0 * PI * r).powi(2) / r, BESSEL_CUTOFF, 0.25);
    let tail = 1.0 / (2.0 * PI * PI * BESSEL_CUTOFF);
    n as f64 / w * (core + tail)
}

impl CatalogFunction {
    pub fn dim(&self) -> usize {
        match *self {
            CatalogFunction::Sinc2Product { dim }
            | CatalogFunction::IndicatorFt { dim, .. }
            | CatalogFunction::Gaussian { dim, .. } => dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if !(1..=3).contains(&n) {
            return input(format!("catalog functions are supported in dimensions 1..3, got {n}"));
        }
        if let CatalogFunction::Gaussian { scale, .. } = self {
            if !(scale.is_finite() && *scale > 0.0) {
                return input(format!("Gaussian scale must be positive, got {scale}"));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            CatalogFunction::Sinc2Product { .. } => x.iter().map(|t| sinc(*t).powi(2)).product(),
            CatalogFunction::IndicatorFt { body: FtBody::Cube, .. } => x.iter().map(|t| sinc(2.0 * t)).product(),
            CatalogFunction::IndicatorFt { body: FtBody::Ball, dim } => {
                let r = crate::linalg::norm(x);
                if r == 0.0 {
                    1.0
                } else {
                    bessel_half(dim, 2.0 * PI * r) / (ball_volume(dim) * r.powf(dim as f64 / 2.0))
                }
            }
            CatalogFunction::Gaussian { scale, .. } => (-PI * crate::linalg::dot(x, x) / (scale * scale)).exp(),
        }
    }

    pub fn transform(&self, xi: &[f64]) -> f64 {
        match *self {
            CatalogFunction::Sinc2Product { .. } => xi.iter().map(|t| (1.0 - t.abs()).max(0.0)).product(),
            CatalogFunction::IndicatorFt { body, dim } => {
                let inside = match body {
                    FtBody::Cube => xi.iter().all(|t| t.abs() <= 1.0),
                    FtBody::Ball => crate::linalg::norm(xi) <= 1.0,
                };
                let vol = match body {
                    FtBody::Cube => 2f64.powi(dim as i32),
                    FtBody::Ball => ball_volume(dim),
                };
                if inside { 1.0 / vol } else { 0.0 }
            }
            CatalogFunction::Gaussian { dim, scale } => {
                scale.powi(dim as i32) * (-PI * scale * scale * crate::linalg::dot(xi, xi)).exp()
            }
        }
    }

    /// `(numeric, closed form)` of `int |f|^2`.
    pub fn l2_norm_sq(&self) -> (f64, f64) {
        let n = self.dim() as i32;
        match *self {
            CatalogFunction::Sinc2Product { .. } => (sinc4_integral(1.0).powi(n), (2.0f64 / 3.0).powi(n)),
            CatalogFunction::IndicatorFt { body: FtBody::Cube, .. } => (sinc2_integral(2.0).powi(n), 0.5f64.powi(n)),
            CatalogFunction::IndicatorFt { body: FtBody::Ball, dim } => (ball_witness_l2(dim), 1.0 / ball_volume(dim)),
            CatalogFunction::Gaussian { scale, .. } => {
                (gaussian_integral(2.0 / (scale * scale)).powi(n), (scale / 2f64.sqrt()).powi(n))
            }
        }
    }

    /// `(numeric, closed form)` of `int |f^|^2`.
    pub fn transform_l2_norm_sq(&self) -> (f64, f64) {
        let n = self.dim() as i32;
        match *self {
            CatalogFunction::Sinc2Product { .. } => {
                let tri = 2.0 * rule().integrate(0.0, 1.0, |t| (1.0 - t) * (1.0 - t));
                (tri.powi(n), (2.0f64 / 3.0).powi(n))
            }
            CatalogFunction::IndicatorFt { body: FtBody::Cube, .. } => {
                let axis = rule().integrate(-1.0, 1.0, |_| 0.25);
                (axis.powi(n), 0.5f64.powi(n))
            }
            CatalogFunction::IndicatorFt { body: FtBody::Ball, dim } => {
                // Constant 1/|B| on B, integrated radially.
                let w = ball_volume(dim);
                let radial = dim as f64 * w * rule().integrate(0.0, 1.0, |r| r.powi(dim as i32 - 1)) / (w * w);
                (radial, 1.0 / w)
            }
            CatalogFunction::Gaussian { scale, .. } => {
                let s2 = scale * scale;
                (
                    (s2 * gaussian_integral(2.0 * s2)).powi(n),
                    (s2 / (2.0 * s2).sqrt()).powi(n),
                )
            }
        }
    }

    fn separable(&self) -> bool {
        !matches!(self, CatalogFunction::IndicatorFt { body: FtBody::Ball, dim } if *dim > 1)
    }
}

fn lattice(n: usize, radius: i64) -> impl Iterator<Item = Vec<f64>> {
    let side = (2 * radius + 1) as usize;
    (0..side.pow(n as u32)).map(move |mut idx| {
        (0..n)
            .map(|_| {
                let k = (idx % side) as i64 - radius;
                idx /= side;
                k as f64
            })
            .collect()
    })
}

/// `int |F|^2 = 1/|K|` for the normalized inverse transform of `1_K`,
/// by quadrature and by the Plancherel shortcut.
pub fn rho_witness_check(body: FtBody, n: usize) -> Result<CheckReport> {
    let f = CatalogFunction::IndicatorFt { body, dim: n };
    f.validate()?;
    let (quad, _) = f.l2_norm_sq();
    let (plancherel, target) = f.transform_l2_norm_sq();
    let (tol, kind) = match body {
        FtBody::Cube => (RHO_CUBE_REL, TolKind::Rel),
        FtBody::Ball => (RHO_BALL_ABS, TolKind::Abs),
    };
    let report = CheckReport::new("rho-witness", quad, Relation::Eq, target, tol, kind)
        .note(format!("Plancherel value {plancherel}; F(0) = {}", f.value(&vec![0.0; n])))
        .with_digest(&f);
    let slack = match kind {
        TolKind::Rel => tol * target,
        TolKind::Abs => tol,
    };
    Ok(if (plancherel - target).abs() > slack {
        report.fail("Plancherel value disagrees with 1/|K|")
    } else {
        report
    })
}

/// Cube case of `eta(K) = 2^n/|K|`: the witness `prod sinc(x_k)^2`
/// integrates to 1, and its lattice sum equals `F(0) = 1` because every
/// other lattice term vanishes.
pub fn eta_cube_check(n: usize, lattice_radius: i64) -> Result<CheckReport> {
    if !(1..=3).contains(&n) {
        return input(format!("eta cube check supports n = 1..3, got {n}"));
    }
    if lattice_radius < 0 {
        return input("lattice radius must be nonnegative");
    }
    let f = CatalogFunction::Sinc2Product { dim: n };
    let integral = sinc2_integral(1.0).powi(n as i32);
    let mut off_origin = 0.0f64;
    let sum = compensated_sum(lattice(n, lattice_radius).map(|m| {
        let v = f.value(&m);
        if m.iter().any(|k| *k != 0.0) {
            off_origin = off_origin.max(v.abs());
        }
        v
    }));
    let report = CheckReport::new("eta-cube", integral, Relation::Eq, 1.0, ETA_TOL, TolKind::Abs)
        .note(format!("lattice sum {sum} over radius {lattice_radius}; largest off-origin term {off_origin:e}"))
        .with_digest(&(n, lattice_radius));
    Ok(if (sum - 1.0).abs() > ETA_TOL {
        report.fail("lattice sum differs from F(0) = 1")
    } else if off_origin > LATTICE_ZERO {
        report.fail("an off-origin lattice term does not vanish")
    } else {
        report
    })
}

/// Upper bound on the part of a separable lattice sum beyond `radius`,
/// given the truncated per-axis sum and a per-axis tail bound.
fn product_tail(axis_sum: f64, axis_tail: f64, n: usize) -> f64 {
    (axis_sum + axis_tail).powi(n as i32) - axis_sum.powi(n as i32)
}

/// `sum_m f(m) = sum_m f^(m)` over `|m|_inf <= radius`, with the truncation
/// tails bounded analytically.
pub fn poisson_check(f: &CatalogFunction, lattice_radius: i64) -> Result<CheckReport> {
    f.validate()?;
    if lattice_radius < 0 {
        return input("lattice radius must be nonnegative");
    }
    let n = f.dim();
    let (fn_tail, ft_tail) = match *f {
        // sinc^2 vanishes at nonzero integers and the triangle at |m| >= 1.
        CatalogFunction::Sinc2Product { .. } => (0.0, 0.0),
        CatalogFunction::IndicatorFt { .. } => {
            return capability("Poisson summation needs a transform continuous at the lattice; 1_K jumps on it");
        }
        CatalogFunction::Gaussian { scale, .. } => {
            // 2 sum_{k > R} e^{-a k^2} <= 2 e^{-a (R+1)^2} / (1 - e^{-a (2R+3)}).
            let tail = |a: f64, amp: f64| {
                let r = lattice_radius as f64;
                amp * 2.0 * (-a * (r + 1.0).powi(2)).exp() / (1.0 - (-a * (2.0 * r + 3.0)).exp())
            };
            (tail(PI / (scale * scale), 1.0), tail(PI * scale * scale, scale))
        }
    };
    let function_side = compensated_sum(lattice(n, lattice_radius).map(|m| f.value(&m)));
    let fourier_side = compensated_sum(lattice(n, lattice_radius).map(|m| f.transform(&m)));
    let axis = |g: &dyn Fn(f64) -> f64| compensated_sum((-lattice_radius..=lattice_radius).map(|k| g(k as f64)));
    let bound = match *f {
        CatalogFunction::Gaussian { scale, .. } => {
            product_tail(axis(&|t| (-PI * t * t / (scale * scale)).exp()), fn_tail, n)
                + product_tail(axis(&|t| scale * (-PI * scale * scale * t * t).exp()), ft_tail, n)
        }
        _ => 0.0,
    };
    let diff = (function_side - fourier_side).abs();
    Ok(CheckReport::new("poisson", diff, Relation::Le, bound, POISSON_ABS, TolKind::Abs)
        .note(format!("function side {function_side}, Fourier side {fourier_side}, radius {lattice_radius}"))
        .with_digest(f))
}

/// `int |f|^2 = int |f^|^2`, both sides by quadrature.
pub fn plancherel_check(f: &CatalogFunction) -> Result<CheckReport> {
    f.validate()?;
    let (lhs, lhs_exact) = f.l2_norm_sq();
    let (rhs, rhs_exact) = f.transform_l2_norm_sq();
    let tol = if f.separable() { PLANCHEREL_REL } else { RHO_BALL_ABS };
    Ok(CheckReport::new("plancherel", lhs, Relation::Eq, rhs, tol, TolKind::Rel)
        .note(format!("closed forms {lhs_exact} and {rhs_exact}"))
        .with_digest(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_integrals() {
        assert!((sinc2_integral(1.0) - 1.0).abs() < 1e-11);
        assert!((sinc2_integral(2.0) - 0.5).abs() < 1e-11);
        assert!((sinc4_integral(1.0) - 2.0 / 3.0).abs() < 1e-11);
        assert!((gaussian_integral(2.0) - 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rho_examples() {
        for n in 1..=3 {
            let r = rho_witness_check(FtBody::Cube, n).unwrap();
            assert!(r.pass && (r.rhs - 0.5f64.powi(n as i32)).abs() < 1e-15, "{}", r.summary_line());
        }
        for n in 1..=3 {
            let r = rho_witness_check(FtBody::Ball, n).unwrap();
            assert!(r.pass, "{}", r.summary_line());
        }
        let r = rho_witness_check(FtBody::Ball, 2).unwrap();
        assert!((r.rhs - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn witness_is_normalized() {
        for f in [
            CatalogFunction::IndicatorFt { body: FtBody::Ball, dim: 2 },
            CatalogFunction::IndicatorFt { body: FtBody::Ball, dim: 3 },
        ] {
            let n = f.dim();
            assert_eq!(f.value(&vec![0.0; n]), 1.0);
            assert!((f.value(&vec![1e-6; n]) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn eta_examples() {
        for n in 1..=3 {
            let r = eta_cube_check(n, if n == 3 { 50 } else { 20 }).unwrap();
            assert!(r.pass, "{}", r.summary_line());
        }
    }

    #[test]
    fn poisson_examples() {
        let g1 = CatalogFunction::Gaussian { dim: 1, scale: 1.0 };
        let r = poisson_check(&g1, 6).unwrap();
        assert!(r.pass && r.lhs <= 1e-12);
        let r = poisson_check(&CatalogFunction::Sinc2Product { dim: 1 }, 10).unwrap();
        assert!(r.pass && r.lhs < 1e-15);
        let r = poisson_check(&CatalogFunction::Gaussian { dim: 2, scale: 1.0 }, 6).unwrap();
        assert!(r.pass && r.lhs <= 1e-12);
        let r = poisson_check(&CatalogFunction::Gaussian { dim: 2, scale: 1.7 }, 8).unwrap();
        assert!(r.pass, "{}", r.summary_line());
        assert!(poisson_check(&CatalogFunction::IndicatorFt { body: FtBody::Cube, dim: 1 }, 4).is_err());
    }

    #[test]
    fn plancherel_examples() {
        let cases = [
            (CatalogFunction::IndicatorFt { body: FtBody::Cube, dim: 1 }, 0.5),
            (CatalogFunction::Gaussian { dim: 1, scale: 1.0 }, 0.5f64.sqrt()),
            (CatalogFunction::Sinc2Product { dim: 1 }, 2.0 / 3.0),
        ];
        for (f, v) in cases {
            let r = plancherel_check(&f).unwrap();
            assert!(r.pass && (r.lhs - v).abs() < 1e-10 && (r.rhs - v).abs() < 1e-12, "{}", r.summary_line());
        }
        let r = plancherel_check(&CatalogFunction::IndicatorFt { body: FtBody::Ball, dim: 2 }).unwrap();
        assert!(r.pass, "{}", r.summary_line());
    }

    #[test]
    fn separable_checks_are_powers() {
        for f in [CatalogFunction::Sinc2Product { dim: 1 }, CatalogFunction::Gaussian { dim: 1, scale: 0.8 }] {
            let one = f.l2_norm_sq().0;
            let three = match f {
                CatalogFunction::Sinc2Product { .. } => CatalogFunction::Sinc2Product { dim: 3 },
                CatalogFunction::Gaussian { scale, .. } => CatalogFunction::Gaussian { dim: 3, scale },
                _ => unreachable!(),
            };
            assert!((three.l2_norm_sq().0 - one.powi(3)).abs() <= 1e-9 * one.powi(3));
        }
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let v = [1e16, 1.0, -1e16];
        assert_eq!(compensated_sum(v), 1.0);
    }
}
