//! Acceptance run: every criterion of the suite, each paired with oracles
//! computed here from closed forms and direct numerics.

use std::f64::consts::PI;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vp_core::bodies::{ball, cross_polytope, cube, hpolytope, linear, zonotope};
use vp_core::duality::polar;
use vp_core::functional::{polar_function, GridFunction};
use vp_core::harmonic::{CatalogFunction, FtBody};
use vp_core::perturb::{bm_distance_upper, hanner, stability_experiment, HannerTree};
use vp_core::products::mahler;
use vp_core::suite::{criterion, Criterion, SuiteConfig, CRITERIA};
use vp_core::volume::{coordinate_section, volume};
use vp_core::CheckReport;

struct Oracle {
    failures: Vec<String>,
}

impl Oracle {
    fn new() -> Self {
        Oracle { failures: Vec::new() }
    }

    fn close(&mut self, what: &str, got: f64, want: f64, rel: f64) {
        if !((got - want).abs() <= rel * want.abs().max(1.0)) {
            self.failures.push(format!("{what}: got {got}, oracle {want}"));
        }
    }

    fn holds(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn report<'a>(&mut self, c: &'a Criterion, name: &str) -> Option<&'a CheckReport> {
        let r = c.reports.iter().find(|r| r.name == name);
        if r.is_none() {
            self.failures.push(format!("missing report {name}"));
        }
        r
    }

    fn report_lhs(&mut self, c: &Criterion, name: &str, want: f64, rel: f64) {
        if let Some(r) = self.report(c, name) {
            let lhs = r.lhs;
            self.close(name, lhs, want, rel);
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Unit ball volume by the two-step recursion.
fn omega(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * omega(n - 2),
    }
}

/// Midpoint rule for `int_{[-r, r]^n} f`.
fn grid_integral(n: usize, r: f64, res: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let h = 2.0 * r / res as f64;
    let mut x = vec![0.0; n];
    let mut total = 0.0;
    for idx in 0..res.pow(n as u32) {
        let mut k = idx;
        for xi in x.iter_mut() {
            *xi = -r + h * ((k % res) as f64 + 0.5);
            k /= res;
        }
        total += f(&x);
    }
    total * h.powi(n as i32)
}

fn simpson(a: f64, b: f64, intervals: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for i in 1..intervals {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn in_disk(x: &[f64]) -> bool {
    x[0] * x[0] + x[1] * x[1] <= 1.0
}

fn in_diamond(x: &[f64]) -> bool {
    x[0].abs() + x[1].abs() <= 1.0
}

fn ind(b: bool) -> f64 {
    if b { 1.0 } else { 0.0 }
}

fn sphere(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if r > 0.1 && r <= 1.0 {
            return v.iter().map(|a| a / r).collect();
        }
    }
}

/// Area of `conv(points)` for points symmetric about the origin.
fn symmetric_hull_area(points: &[[f64; 2]]) -> f64 {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[1].atan2(a[0]).total_cmp(&b[1].atan2(b[0])));
    // Walk the angular order keeping only left turns.
    let mut hull: Vec<[f64; 2]> = Vec::new();
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    for _ in 0..2 {
        for &p in &pts {
            while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-14 {
                hull.pop();
            }
            hull.push(p);
        }
    }
    let n = hull.len() / 2;
    let ring = &hull[n..];
    let mut area = 0.0;
    for i in 0..ring.len() {
        let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
        area += a[0] * b[1] - a[1] * b[0];
    }
    area.abs() / 2.0
}

/// Mahler product of a planar zonotope from its generators alone.
fn planar_zonotope_mahler(gens: &[[f64; 2]]) -> f64 {
    let mut area = 0.0;
    for i in 0..gens.len() {
        for j in i + 1..gens.len() {
            area += 4.0 * (gens[i][0] * gens[j][1] - gens[i][1] * gens[j][0]).abs();
        }
    }
    let mut dual = Vec::new();
    for g in gens {
        let u = [-g[1], g[0]];
        let h: f64 = gens.iter().map(|w| (w[0] * u[0] + w[1] * u[1]).abs()).sum();
        dual.push([u[0] / h, u[1] / h]);
        dual.push([-u[0] / h, -u[1] / h]);
    }
    area * symmetric_hull_area(&dual)
}

/// `max_y (<x, y> + log f(y))` over the full product grid, then `exp(-.)`.
fn brute_polar(f: &GridFunction) -> Vec<f64> {
    let pts: Vec<Vec<f64>> = (0..f.values.len()).map(|i| f.point(i)).collect();
    pts.iter()
        .map(|x| {
            let best = pts
                .iter()
                .zip(&f.values)
                .filter(|(_, v)| **v > 0.0)
                .map(|(y, v)| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() + v.ln())
                .fold(f64::NEG_INFINITY, f64::max);
            (-best).exp()
        })
        .collect()
}

fn oracle_1(c: &Criterion, o: &mut Oracle) {
    for n in 1..=4 {
        let want = 4f64.powi(n as i32) / factorial(n);
        o.close(&format!("cube volume n={n}"), volume(&cube(n)).unwrap(), 2f64.powi(n as i32), 1e-12);
        o.close(&format!("cross volume n={n}"), volume(&cross_polytope(n)).unwrap(), 2f64.powi(n as i32) / factorial(n), 1e-12);
        o.report_lhs(c, &format!("mahler[cube{n}]"), want, 1e-9);
        o.report_lhs(c, &format!("mahler[cross{n}]"), want, 1e-9);
    }
}

fn oracle_2(c: &Criterion, o: &mut Oracle) {
    o.report_lhs(c, "mahler[ball2]", omega(2).powi(2), 1e-12);
    o.report_lhs(c, "mahler[ball3]", omega(3).powi(2), 1e-12);
    o.close("pi^2", omega(2).powi(2), PI * PI, 1e-15);
    o.close("(4pi/3)^2", omega(3).powi(2), (4.0 * PI / 3.0).powi(2), 1e-15);
}

fn oracle_3(c: &Criterion, o: &mut Oracle) {
    // int_B |y_axis| dy on a midpoint grid, and n/(2(n+1)) |B|^2 / |B ∩ x^⊥|
    // from closed-form volumes.
    let cases: [(&str, usize, usize, fn(&[f64]) -> bool, f64, f64); 4] = [
        ("disk", 2, 0, in_disk, PI, 2.0),
        ("diamond", 2, 1, in_diamond, 2.0, 2.0),
        ("double-cone", 3, 2, |x| (x[0] * x[0] + x[1] * x[1]).sqrt() + x[2].abs() <= 1.0, 2.0 * PI / 3.0, PI),
        ("bipyramid", 3, 2, |x| x[0].abs().max(x[1].abs()) + x[2].abs() <= 1.0, 8.0 / 3.0, 4.0),
    ];
    for (name, n, axis, inside, vol, section) in cases {
        let res = if n == 2 { 2000 } else { 160 };
        let lhs = grid_integral(n, 1.0, res, |x| ind(inside(x)) * x[axis].abs());
        let rhs = n as f64 / (2.0 * (n as f64 + 1.0)) * vol * vol / section;
        o.report_lhs(c, &format!("lemma35-lhs[{name}]"), lhs, 2e-2);
        o.report_lhs(c, &format!("lemma35-rhs[{name}]"), rhs, 1e-12);
    }
}

fn oracle_4(c: &Criterion, o: &mut Oracle) {
    // Square with atoms ±e1, ±e2 of unit weight: |A| = 4, |A*| = 2,
    // int_{A*} |<e_i, y>| dy by slices, each projection of length 2.
    let inner = simpson(-1.0, 1.0, 2000, |t| t.abs() * 2.0 * (1.0 - t.abs()));
    o.close("diamond abs moment", inner, 2.0 / 3.0, 1e-4);
    let lhs = 3.0 * 4.0 * inner * 4.0;
    let rhs = 2.0 * 2.0 * 2.0 * 4.0;
    o.report_lhs(c, "lemma33-lhs[square]", lhs, 1e-4);
    o.report_lhs(c, "lemma33-rhs[square]", rhs, 1e-12);
}

fn oracle_5(c: &Criterion, o: &mut Oracle) {
    for (name, f) in [("tent", (|t: f64| (1.0 - t).max(0.0)) as fn(f64) -> f64), ("bump", |t: f64| (1.0 - t * t).max(0.0))] {
        let first = simpson(0.0, 1.0, 2000, |t| t * f(t));
        let mass = simpson(0.0, 1.0, 2000, f);
        o.report_lhs(c, &format!("lemma34-lhs[{name}]"), first, 1e-9);
        o.report_lhs(c, &format!("lemma34-rhs[{name}]"), 2.0 / 3.0 * mass * mass, 1e-9);
    }
}

fn oracle_6(c: &Criterion, o: &mut Oracle) {
    let hex = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    o.report_lhs(c, "zonoid-hexagon-p[hexagon]", planar_zonotope_mahler(&hex), 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..20 {
        let count = rng.random_range(2..=8);
        let gens: Vec<[f64; 2]> = (0..count).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let want = planar_zonotope_mahler(&gens);
        let z = zonotope(gens.iter().map(|g| g.to_vec()).collect()).unwrap();
        o.close(&format!("random planar zonotope {i}"), mahler(&z).unwrap(), want, 1e-9);
        o.holds(&format!("planar zonotope {i} below 8"), want >= 8.0 - 1e-9);
    }
}

fn oracle_7(c: &Criterion, o: &mut Oracle) {
    let disk = grid_integral(2, 1.0, 2000, |x| ind(in_disk(x)) * x[0] * x[0]);
    let diamond = grid_integral(2, 1.0, 2000, |x| ind(in_diamond(x)) * x[0] * x[0]);
    let square = 4.0 / 3.0;
    o.report_lhs(c, "second-moment[disk]", disk, 1e-3);
    o.report_lhs(c, "second-moment[diamond]", diamond, 1e-3);
    o.report_lhs(c, "second-moment[square]", square, 1e-12);
    o.report_lhs(c, "ball-lhs[disk]", 2.0 * disk * disk, 2e-3);
    o.report_lhs(c, "ball-lhs[square]", 2.0 * square * diamond, 2e-3);
}

fn oracle_8(c: &Criterion, o: &mut Oracle) {
    // The polar of an indicator is exp(-h_K); for the disk that is exp(-|y|).
    let radial = 2.0 * PI * simpson(0.0, 60.0, 20_000, |r| r * (-r).exp());
    o.report_lhs(c, "functional-santalo-value[disk]", PI * radial, 1e-2);
    let gauss = simpson(-12.0, 12.0, 20_000, |x| (-x * x / 2.0).exp()).powi(4);
    o.report_lhs(c, "functional-santalo[gaussian2]", gauss, 1e-6);
}

fn oracle_9(c: &Criterion, o: &mut Oracle) {
    let moment = simpson(-12.0, 12.0, 20_000, |x| x * x * (-x * x / 2.0).exp());
    let mass = simpson(-12.0, 12.0, 20_000, |x| (-x * x / 2.0).exp());
    let want = 2.0 * (moment * mass).powi(2);
    o.report_lhs(c, "functional-ball-value[gaussian2]", want, 1e-6);
}

fn oracle_10(c: &Criterion, o: &mut Oracle) {
    let bodies: [(&str, GridFunction); 3] = [
        ("gaussian", GridFunction::gaussian(2, 4.0, 33).unwrap()),
        ("disk", GridFunction::indicator(&ball(2).unwrap(), 4.0, 33).unwrap()),
        ("square", GridFunction::indicator(&cube(2), 4.0, 33).unwrap()),
    ];
    for (name, f) in bodies {
        let fast = polar_function(&f).unwrap().polar.values;
        let slow = brute_polar(&f);
        let worst = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs() / b.max(1e-300)).fold(0.0, f64::max);
        o.holds(&format!("grid polar of {name} differs from brute force by {worst:e}"), worst <= 1e-12);
    }
    for name in ["disk", "square", "gaussian"] {
        o.report(c, &format!("polar-sup-error[{name}]"));
    }
}

fn oracle_11(c: &Criterion, o: &mut Oracle) {
    // Transforms against direct cosine quadrature, frequency convention e^{-2 pi i x xi}.
    let ft = |f: &dyn Fn(f64) -> f64, xi: f64, r: f64| simpson(-r, r, 400_000, |x| f(x) * (2.0 * PI * x * xi).cos());
    let cases: [(CatalogFunction, f64, f64); 3] = [
        (CatalogFunction::Gaussian { dim: 1, scale: 1.0 }, 12.0, 1e-9),
        (CatalogFunction::Gaussian { dim: 1, scale: 1.5 }, 12.0, 1e-9),
        (CatalogFunction::Sinc2Product { dim: 1 }, 400.0, 2e-3),
    ];
    for (f, r, tol) in &cases {
        for xi in [0.0, 0.3, 0.7, 1.2] {
            let want = ft(&|x| f.value(&[x]), xi, *r);
            o.close(&format!("{f:?} transform at {xi}"), f.transform(&[xi]), want, *tol);
        }
    }
    // Poisson summation with the transform taken by quadrature.
    let g = &cases[1].0;
    let direct: f64 = (-30..=30).map(|k| g.value(&[k as f64])).sum();
    let dual: f64 = (-30..=30).map(|m| ft(&|x| g.value(&[x]), m as f64, 12.0)).sum();
    o.close("Poisson sum for the wide Gaussian", direct, dual, 1e-9);
    // The cube witness is separable, so its squared norm is a power of the
    // one-dimensional one.
    let one = CatalogFunction::IndicatorFt { body: FtBody::Cube, dim: 1 };
    let norm1 = simpson(-2000.0, 2000.0, 4_000_000, |x| one.value(&[x]).powi(2));
    for n in 1..=3 {
        if let Some(r) = o.report(c, &format!("rho-witness[cube{n}]")) {
            let rhs = r.rhs;
            o.close(&format!("rho target n={n}"), rhs, norm1.powi(n as i32), 1e-3);
        }
    }
}

fn oracle_12(_c: &Criterion, o: &mut Oracle) {
    let normals = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    let k = hpolytope(normals.iter().map(|u| u.to_vec()).collect()).unwrap();
    let kp = polar(&k).unwrap();
    let kpp = polar(&kp).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let x = sphere(&mut rng, 2);
        let g: f64 = normals.iter().map(|u| (u[0] * x[0] + u[1] * x[1]).abs()).fold(0.0, f64::max);
        o.close("gauge of K**", kpp.gauge(&x).unwrap(), g, 1e-9);
        o.close("support of K*", kp.support(&x).unwrap(), g, 1e-9);
    }
    let c3 = polar(&cube(3)).unwrap();
    for _ in 0..300 {
        let x = sphere(&mut rng, 3);
        o.close("cube polar is l1", c3.gauge(&x).unwrap(), x.iter().map(|a| a.abs()).sum(), 1e-12);
    }
    let t = vec![vec![2.0, 0.5], vec![-0.3, 1.2]];
    let det: f64 = 2.0 * 1.2 + 0.5 * 0.3;
    let d = cross_polytope(2);
    let td = linear(t, d.clone()).unwrap();
    o.close("vol(TK)", volume(&td).unwrap(), det * 2.0, 1e-12);
    o.close("vol((TK)*)", volume(&polar(&td).unwrap()).unwrap(), 4.0 / det, 1e-12);
    for tree in HannerTree::distinct(3) {
        o.close("hanner product", mahler(&hanner(&tree)).unwrap(), 64.0 / 6.0, 1e-9);
    }
}

fn oracle_13(_c: &Criterion, o: &mut Oracle) {
    let sq = bm_distance_upper(&cube(2), &ball(2).unwrap(), 4, 400, 1).unwrap();
    o.close("d(square, disk)", sq.d, 2f64.sqrt(), 2e-3);
    o.holds("d(square, disk) is an upper bound", sq.d >= 2f64.sqrt() - 1e-9);
    let rotated = bm_distance_upper(&cube(2), &cross_polytope(2), 4, 400, 1).unwrap();
    o.close("d(square, diamond)", rotated.d, 1.0, 1e-6);
    let same = bm_distance_upper(&cube(3), &cube(3), 2, 200, 1).unwrap();
    o.close("d(cube, cube)", same.d, 1.0, 1e-9);
    let a = stability_experiment(2, &[0.05], 4, 99).unwrap();
    let b = stability_experiment(2, &[0.05], 4, 99).unwrap();
    o.holds("stability rerun differs", a.rows == b.rows);
    for r in &a.rows {
        o.holds("negative volume-product gap", r.delta_p >= -1e-9);
        o.holds("distance below 1", r.d_hat_minus_1 >= -1e-9);
    }
}

fn oracle_14(c: &Criterion, o: &mut Oracle) {
    let k = cross_polytope(3);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for j in 0..3 {
        let s = coordinate_section(&k, j).unwrap();
        for _ in 0..100 {
            let x = sphere(&mut rng, 2);
            o.close("section gauge is l1", s.gauge(&x).unwrap(), x[0].abs() + x[1].abs(), 1e-12);
        }
        o.report_lhs(c, &format!("section-mahler[e{j}]"), 16.0 / 2.0, 1e-9);
    }
}

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let oracles: [fn(&Criterion, &mut Oracle); CRITERIA] = [
        oracle_1, oracle_2, oracle_3, oracle_4, oracle_5, oracle_6, oracle_7, oracle_8, oracle_9, oracle_10,
        oracle_11, oracle_12, oracle_13, oracle_14,
    ];
    let mut failed = 0;
    for (i, check) in oracles.iter().enumerate() {
        let id = i + 1;
        let start = std::time::Instant::now();
        let (c, o) = match criterion(id, &cfg) {
            Ok(c) => {
                let mut o = Oracle::new();
                check(&c, &mut o);
                (c, o)
            }
            Err(e) => {
                failed += 1;
                println!("FAIL {id:>2} error: {e}");
                continue;
            }
        };
        let ok = c.pass() && o.failures.is_empty();
        failed += usize::from(!ok);
        println!(
            "{} {id:>2} {} ({} checks, {} oracles failed, {:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            c.title,
            c.reports.len(),
            o.failures.len(),
            start.elapsed().as_secs_f64()
        );
        for r in c.reports.iter().filter(|r| !r.pass) {
            println!("     {}", r.summary_line());
        }
        for f in &o.failures {
            println!("     oracle: {f}");
        }
    }
    println!("{} of {CRITERIA} criteria passed", CRITERIA - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
