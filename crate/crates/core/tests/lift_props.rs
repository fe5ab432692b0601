use num_complex::Complex64;
use rand::Rng;
use selfsim_core::lift::{
    build_sigma, captured_mass, h_sigma_membership, standard_lift, tile_deficit, LiftSpec, MembershipThresholds, Verdict,
};
use selfsim_core::measure::{pushforward_grid, MapKind};
use selfsim_core::riesz::RieszSpec;
use selfsim_core::rng::rng_from_seed;

fn source() -> RieszSpec {
    let a = vec![Complex64::new(0.9, 0.0), Complex64::new(0.0, 0.7), Complex64::new(0.5, 0.5)];
    RieszSpec::from_u64(&[1, 3, 9], a).unwrap()
}

#[test]
fn lift_projects_onto_a_multiple_of_the_source() {
    for k in [1usize, 2, 5] {
        let spec = LiftSpec::new(source(), k, 3, 64).unwrap();
        let lift = standard_lift(&spec).unwrap();
        let circle = source().partial_product(3).unwrap().rasterize(64).unwrap();
        let folded = pushforward_grid(&lift, MapKind::Mod1).unwrap();
        let c = captured_mass(k);
        for (f, v) in folded.values().iter().zip(circle.values()) {
            if *v > 1e-12 {
                assert!((f / v - c).abs() <= 1e-9 * c);
            } else {
                assert!(f.abs() <= 1e-12);
            }
        }
        assert!(lift.mass() + tile_deficit(k) >= 1.0 - 1e-12);
        assert!(tile_deficit(k) <= 0.5f64.powi(k as i32));
    }
}

#[test]
fn integer_translation_has_bounded_ratio() {
    let spec = LiftSpec::new(source(), 4, 3, 64).unwrap();
    let lift = standard_lift(&spec).unwrap();
    let dx = lift.cell_width();
    let per_unit = (1.0 / dx).round() as usize;
    let v = lift.values();
    let mut worst = 0.0f64;
    for i in 0..v.len() - per_unit {
        let (a, b) = (v[i], v[i + per_unit]);
        if a > 1e-12 && b > 1e-12 {
            worst = worst.max(a / b).max(b / a);
        }
    }
    assert!(worst <= 2.0 + 1e-12, "worst ratio {worst}");
    assert!(worst >= 2.0 - 1e-12);
}

#[test]
fn sigma_is_symmetric_on_random_windows() {
    let spec = LiftSpec::new(source(), 3, 3, 64).unwrap();
    let lift = standard_lift(&spec).unwrap();
    let sigma = build_sigma(&lift).unwrap();
    assert!((sigma.mass() - lift.mass()).abs() < 1e-15);
    let mut rng = rng_from_seed(42);
    for _ in 0..100 {
        let a: f64 = rng.random_range(-60.0..60.0);
        let b: f64 = a + rng.random_range(0.0..40.0);
        assert_eq!(sigma.mass_in(a, b), sigma.mass_in(-b, -a));
    }
}

#[test]
fn membership_is_transported_along_the_log_chart() {
    let f = RieszSpec::factorial(40).unwrap();
    let th = MembershipThresholds::default();
    for q in 1..=12i64 {
        for p in 0..q {
            for m in -2..=2 {
                let theta = p as f64 / q as f64 + m as f64;
                for sign in [1.0, -1.0] {
                    let s = sign * theta.exp();
                    let r = h_sigma_membership(&f, s, 40, th).unwrap();
                    assert_eq!(r.verdict, Verdict::MemberEvidence, "p/q = {p}/{q}, m = {m}, sign {sign}");
                }
            }
        }
    }
    let mut rng = rng_from_seed(5);
    for _ in 0..64 {
        let s: f64 = rng.random_range(0.1..20.0);
        let plus = h_sigma_membership(&f, s, 40, th).unwrap();
        let minus = h_sigma_membership(&f, -s, 40, th).unwrap();
        assert_eq!(plus, minus);
    }
    assert!(h_sigma_membership(&f, 0.0, 40, th).is_err());
}
