use proptest::prelude::*;
use rand::Rng;
use selfsim_core::poisson::{
    apply_flow, q_transform, sample_poisson, CylinderPlan, Kappa, Point, PointConfig, ProductFlowSpec, SubWindow, Window,
};
use selfsim_core::rng::rng_from_seed;
use selfsim_core::special::chi2_sf;

fn circle_dist(a: f64, b: f64, l: f64) -> f64 {
    let d = (a - b).rem_euclid(l);
    d.min(l - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn q_conjugates_the_flow(s in 0.05f64..20.0, y in -5.0f64..5.0, z in 0.0f64..3.0, t in -10.0f64..10.0, h in 0.1f64..10.0) {
        let k = Kappa::LogNormal { mu: 0.0, sigma: 1.0 };
        let l = 3.0;
        let cfg = PointConfig { points: vec![Point { s, y, z }] };
        let lhs = q_transform(&k, 1.0 / h, &apply_flow(&q_transform(&k, h, &cfg).unwrap(), t, l)).unwrap();
        let rhs = apply_flow(&cfg, h * t, l);
        let (p, q) = (lhs.points[0], rhs.points[0]);
        prop_assert!((p.s - q.s).abs() <= 1e-12 * q.s.max(1.0));
        prop_assert!((p.y - q.y).abs() <= 1e-12 * q.y.abs().max(1.0));
        prop_assert!(circle_dist(p.z, q.z, l) <= 1e-12 * (1.0 + (s * h * t).abs()));
    }

    #[test]
    fn flow_is_a_group_action(t1 in -5.0f64..5.0, t2 in -5.0f64..5.0, seed in 0u64..1000) {
        let spec = ProductFlowSpec::new(Kappa::Uniform { lo: 0.5, hi: 3.0 }, Window::new(0.5, 3.0, Some((0.0, 1.0)), 2.0).unwrap()).unwrap();
        let cfg = sample_poisson(&spec, seed).unwrap();
        let a = apply_flow(&apply_flow(&cfg, t1, 2.0), t2, 2.0);
        let b = apply_flow(&cfg, t1 + t2, 2.0);
        for (p, q) in a.points.iter().zip(&b.points) {
            prop_assert_eq!((p.s, p.y), (q.s, q.y));
            prop_assert!(circle_dist(p.z, q.z, 2.0) < 1e-12);
        }
    }
}

#[test]
fn flow_moves_only_the_circle_coordinate_with_speed_s() {
    let l = 2.0;
    let cfg = PointConfig { points: vec![Point { s: 0.5, y: 1.5, z: 0.25 }, Point { s: 0.25, y: -1.0, z: 1.0 }] };
    // periods L / s are 4 and 8
    let after = apply_flow(&cfg, 4.0, l);
    assert_eq!(after.points[0], cfg.points[0]);
    assert_ne!(after.points[1], cfg.points[1]);
    assert_eq!(after.points[1].z, 0.0);
    assert_eq!(apply_flow(&cfg, 8.0, l), cfg);
    for t in [0.125, 0.5, 1.0, 3.0] {
        let moved = apply_flow(&cfg, t, l);
        for (p, q) in cfg.points.iter().zip(&moved.points) {
            assert_eq!((p.s, p.y), (q.s, q.y));
            assert_eq!(q.z, (p.z + p.s * t).rem_euclid(l));
        }
    }
}

/// Pushes kappa x Unif(y) samples through `(s, y) -> (h s, y D(s))` and
/// compares cell counts on a sub-window with the intensity prediction.
#[test]
fn q_preserves_the_intensity() {
    let kappa = Kappa::LogNormal { mu: 0.0, sigma: 1.0 };
    let y_half = 4.0;
    let (s_lo, s_hi, c) = (0.5f64, 2.0f64, 2.0f64);
    let (ns, ny) = (6usize, 4usize);
    let n = 100_000;
    for h in [0.5f64.exp(), (-0.5f64).exp()] {
        // the image of the sampling window must cover the comparison window
        let min_d = (0..=200)
            .map(|i| {
                let s = (s_lo / h) * ((s_hi / s_lo).powf(i as f64 / 200.0));
                kappa.density_ratio(s, h).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(y_half * min_d > c);

        let sampler = kappa.sampler(0.0, f64::INFINITY).unwrap();
        let mut rng = rng_from_seed(2024);
        let mut before = vec![0.0; ns * ny];
        let mut after = vec![0.0; ns * ny];
        let cell = |s: f64, y: f64| -> Option<usize> {
            if s < s_lo || s >= s_hi || y < -c || y >= c {
                return None;
            }
            let i = (((s / s_lo).ln() / (s_hi / s_lo).ln()) * ns as f64) as usize;
            let j = (((y + c) / (2.0 * c)) * ny as f64) as usize;
            Some(i.min(ns - 1) * ny + j.min(ny - 1))
        };
        for _ in 0..n {
            let s = sampler.sample(&mut rng);
            let y = rng.random_range(-y_half..y_half);
            if let Some(k) = cell(s, y) {
                before[k] += 1.0;
            }
            if let Some(k) = cell(h * s, y * kappa.density_ratio(s, h).unwrap()) {
                after[k] += 1.0;
            }
        }
        let mut expected = vec![0.0; ns * ny];
        for i in 0..ns {
            let a = s_lo * (s_hi / s_lo).powf(i as f64 / ns as f64);
            let b = s_lo * (s_hi / s_lo).powf((i + 1) as f64 / ns as f64);
            for j in 0..ny {
                expected[i * ny + j] = n as f64 * kappa.mass_in(a, b) * (2.0 * c / ny as f64) / (2.0 * y_half);
            }
        }
        for hist in [&before, &after] {
            let stat: f64 = hist.iter().zip(&expected).map(|(o, e)| (o - e) * (o - e) / e).sum();
            let p = chi2_sf(stat, (ns * ny) as f64);
            assert!(p > 1e-3, "h = {h}: chi2 {stat}, p = {p}");
        }
    }
}

#[test]
fn cylinder_checks_pass_on_a_seeded_run() {
    let spec = ProductFlowSpec::new(Kappa::LogNormal { mu: 0.0, sigma: 0.5 }, Window::new(0.5, 2.0, Some((0.0, 2.0)), 1.0).unwrap()).unwrap();
    let k = SubWindow { s: (0.5, 1.0), y: None, z: (0.0, 1.0) };
    let k2 = SubWindow { s: (1.0, 2.0), y: Some((0.0, 1.0)), z: (0.0, 0.5) };
    let plan = CylinderPlan::new(spec, k, k2, vec![0.5, 1.0, 7.25], 10_000, 6).unwrap();
    let rows = plan.run(99).unwrap();
    for r in &rows {
        assert!(r.pass, "{r:?}");
    }
    assert!(rows.iter().any(|r| r.check == "flow-exact:K"));
    assert_eq!(rows, plan.run(99).unwrap());
}
