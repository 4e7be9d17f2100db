use proptest::prelude::*;
use vp_core::bodies::{ball, cube, linear, zonotope};
use vp_core::catalog::{random_body, random_matrix};
use vp_core::duality::polar;
use vp_core::functional::{polar_function, GridFunction};
use vp_core::harmonic::compensated_sum;
use vp_core::perturb::{hanner, HannerTree};
use vp_core::products::{mahler, mahler_lower_bound, santalo_upper_bound};
use vp_core::rng::{derive_seed, sphere_points, stream};
use vp_core::volume::volume;

fn generators(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), n..=6).prop_filter("full rank", move |g| {
        let z = zonotope(g.clone());
        z.is_ok() && volume(&z.unwrap()).map_or(false, |v| v > 1e-3)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bipolar_and_duality(seed in any::<u64>()) {
        let k = random_body(&mut stream(seed, 0));
        let kp = polar(&k).unwrap();
        let kpp = polar(&kp).unwrap();
        for x in sphere_points(seed, 20, k.dim()) {
            let g = k.gauge(&x).unwrap();
            prop_assert!((g - kpp.gauge(&x).unwrap()).abs() <= 1e-7 * g.max(1.0));
            let h = k.support(&x).unwrap();
            prop_assert!((h - kp.gauge(&x).unwrap()).abs() <= 1e-7 * h.max(1.0));
        }
    }

    #[test]
    fn gauge_is_even_and_homogeneous(seed in any::<u64>(), t in 0.1f64..10.0) {
        let k = random_body(&mut stream(seed, 1));
        for x in sphere_points(seed, 10, k.dim()) {
            let g = k.gauge(&x).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| -t * v).collect();
            prop_assert!((k.gauge(&scaled).unwrap() - t * g).abs() <= 1e-9 * t * g.max(1.0));
        }
    }

    #[test]
    fn zonotope_products_respect_both_bounds(g in (2usize..=3).prop_flat_map(generators)) {
        let z = zonotope(g.clone()).unwrap();
        let n = g[0].len();
        let p = mahler(&z).unwrap();
        prop_assert!(p >= mahler_lower_bound(n) * (1.0 - 1e-9), "P = {p}");
        prop_assert!(p <= santalo_upper_bound(n) * (1.0 + 1e-9), "P = {p}");
    }

    #[test]
    fn product_is_linearly_invariant(g in generators(2), seed in any::<u64>()) {
        let z = zonotope(g).unwrap();
        let t = random_matrix(&mut stream(seed, 2), 2);
        let tz = linear(t, z.clone()).unwrap();
        let (a, b) = (mahler(&z).unwrap(), mahler(&tz).unwrap());
        prop_assert!((a - b).abs() <= 1e-8 * a);
        prop_assert!((a - mahler(&polar(&z).unwrap()).unwrap()).abs() <= 1e-8 * a);
    }

    #[test]
    fn hanner_trees(index in 0usize..64, n in 1usize..=4) {
        let trees = HannerTree::all(n);
        let t = &trees[index % trees.len()];
        prop_assert_eq!(t.flipped().flipped(), t.clone());
        prop_assert_eq!(HannerTree::parse(&t.canonical()).unwrap().canonical(), t.canonical());
        let h = hanner(t);
        prop_assert!((mahler(&h).unwrap() - mahler_lower_bound(n)).abs() <= 1e-9 * mahler_lower_bound(n));
        let hp = polar(&h).unwrap();
        let flipped = hanner(&t.flipped());
        for x in sphere_points(index as u64, 10, n) {
            prop_assert!((hp.gauge(&x).unwrap() - flipped.gauge(&x).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn grid_polar_reverses_order(a in 0.3f64..3.0, b in 0.3f64..3.0) {
        // exp(-a|x|^2/2) has polar exp(-|y|^2/(2a)).
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let f = GridFunction::sample(1, 6.0, 129, |x| Ok((-hi * x[0] * x[0] / 2.0).exp())).unwrap();
        let g = GridFunction::sample(1, 6.0, 129, |x| Ok((-lo * x[0] * x[0] / 2.0).exp())).unwrap();
        let (fp, gp) = (polar_function(&f).unwrap().polar, polar_function(&g).unwrap().polar);
        let h = f.spacing();
        for i in 0..129 {
            prop_assert!(fp.values[i] >= gp.values[i] - 1e-12);
            let y = fp.point(i)[0];
            if y.abs() <= 2.0 {
                let exact = (-y * y / (2.0 * hi)).exp();
                prop_assert!((fp.values[i] - exact).abs() <= 5.0 * h, "y = {y}");
            }
        }
    }

    #[test]
    fn compensated_sum_ignores_order(mut xs in prop::collection::vec(-1e6f64..1e6, 1..200), seed in any::<u64>()) {
        let forward = compensated_sum(xs.iter().copied());
        let k = (seed as usize) % xs.len();
        xs.rotate_left(k);
        xs.reverse();
        let backward = compensated_sum(xs.iter().copied());
        let scale: f64 = xs.iter().map(|x| x.abs()).sum();
        prop_assert!((forward - backward).abs() <= 1e-15 * scale.max(1.0));
    }

    #[test]
    fn seed_derivation_is_a_function(base in any::<u64>(), i in 0u64..1000) {
        prop_assert_eq!(derive_seed(base, "check", i), derive_seed(base, "check", i));
        prop_assert_ne!(derive_seed(base, "check", i), derive_seed(base, "check", i + 1));
        prop_assert_ne!(derive_seed(base, "check", i), derive_seed(base, "other", i));
    }
}

#[test]
fn ball_and_cube_are_the_extremes_in_the_plane() {
    let disk = mahler(&ball(2).unwrap()).unwrap();
    let square = mahler(&cube(2)).unwrap();
    assert!((disk - santalo_upper_bound(2)).abs() < 1e-12);
    assert!((square - mahler_lower_bound(2)).abs() < 1e-12);
}
