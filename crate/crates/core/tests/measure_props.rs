use num_complex::Complex64;
use proptest::prelude::*;
use selfsim_core::measure::{
    convolve, hellinger_affinity, pushforward_atoms, pushforward_grid, symmetrize, transform_eval, AtomicMeasure,
    Domain, GridDensity, GridSpec, MapKind, MeasureRef, TransformArg,
};

fn line(lo: f64, hi: f64, n: usize) -> GridSpec {
    GridSpec::new(Domain::RealLine, lo, hi, n).unwrap()
}

fn density(values: Vec<f64>, spec: GridSpec) -> GridDensity {
    GridDensity::new(spec, values).unwrap()
}

fn close(a: &GridDensity, b: &GridDensity, tol: f64) -> bool {
    a.spec().same_geometry(b.spec()) && a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() <= tol)
}

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_commutes(a in values(64), b in values(64)) {
        let spec = line(-2.0, 2.0, 64);
        let (f, g) = (density(a, spec), density(b, spec));
        let fg = convolve(&f, &g).unwrap();
        let gf = convolve(&g, &f).unwrap();
        prop_assert!(close(&fg, &gf, 1e-12));
        prop_assert!((fg.mass() - f.mass() * g.mass()).abs() <= 1e-9 * fg.mass().max(1e-300));
    }

    #[test]
    fn circle_convolution_associates(a in values(32), b in values(32), c in values(32)) {
        let spec = GridSpec::circle(32).unwrap();
        let (f, g, h) = (density(a, spec), density(b, spec), density(c, spec));
        let left = convolve(&convolve(&f, &g).unwrap(), &h).unwrap();
        let right = convolve(&f, &convolve(&g, &h).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn line_convolution_associates(a in values(16), b in values(16), c in values(16)) {
        let spec = line(0.0, 1.0, 16);
        let (f, g, h) = (density(a, spec), density(b, spec), density(c, spec));
        // pad the single factor to the width of the pair so the grid counts agree
        let pad = |d: &GridDensity| d.rewindow(0.0, 32).unwrap().0;
        let left = convolve(&convolve(&f, &g).unwrap(), &pad(&h)).unwrap();
        let right = convolve(&pad(&f), &convolve(&g, &h).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn convolution_theorem_on_the_circle(a in values(32), b in values(32), n in -20i64..20) {
        let spec = GridSpec::circle(32).unwrap();
        let (f, g) = (density(a, spec), density(b, spec));
        let fg = convolve(&f, &g).unwrap();
        let lhs = transform_eval(MeasureRef::Grid(&fg), TransformArg::Integer(n)).unwrap();
        let rhs = transform_eval(MeasureRef::Grid(&f), TransformArg::Integer(n)).unwrap()
            * transform_eval(MeasureRef::Grid(&g), TransformArg::Integer(n)).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn convolution_theorem_on_the_line(a in values(32), b in values(32), t in -3.0f64..3.0) {
        let spec = line(-1.0, 1.0, 32);
        let (f, g) = (density(a, spec), density(b, spec));
        let fg = convolve(&f, &g).unwrap();
        let lhs = transform_eval(MeasureRef::Grid(&fg), TransformArg::Real(t)).unwrap();
        let rhs = transform_eval(MeasureRef::Grid(&f), TransformArg::Real(t)).unwrap()
            * transform_eval(MeasureRef::Grid(&g), TransformArg::Real(t)).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn scale_round_trip(a in values(64), s in prop_oneof![0.1f64..10.0, -10.0f64..-0.1]) {
        let f = density(a, line(-2.0, 2.0, 64));
        let there = pushforward_grid(&f, MapKind::Scale(s)).unwrap();
        prop_assert!((there.mass() - f.mass()).abs() <= 1e-9 * f.mass());
        let back = pushforward_grid(&there, MapKind::Scale(1.0 / s)).unwrap();
        let back = back.resample(*f.spec()).unwrap();
        prop_assert!(close(&back, &f, 1e-9));
    }

    #[test]
    fn scale_matches_characteristic_function(a in values(64), s in 0.2f64..5.0, t in -2.0f64..2.0) {
        let f = density(a, line(-2.0, 2.0, 64));
        let image = pushforward_grid(&f, MapKind::Scale(s)).unwrap();
        let lhs = transform_eval(MeasureRef::Grid(&image), TransformArg::Real(t)).unwrap();
        let rhs = transform_eval(MeasureRef::Grid(&f), TransformArg::Real(s * t)).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn mod1_preserves_mass_and_stacks_tiles(a in values(128)) {
        let f = density(a, line(-2.0, 2.0, 128));
        let c = pushforward_grid(&f, MapKind::Mod1).unwrap();
        prop_assert!((c.mass() - f.mass()).abs() <= 1e-12 * f.mass().max(1.0));
        for i in 0..32 {
            let stacked: f64 = (0..4).map(|k| f.values()[i + 32 * k]).sum();
            prop_assert!((c.values()[i] - stacked).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetrize_is_idempotent_and_mass_preserving(a in values(64), lo in -8i32..8) {
        let f = density(a, line(lo as f64 * 0.25, lo as f64 * 0.25 + 4.0, 64));
        let s = symmetrize(&f).unwrap();
        prop_assert!(s.is_mirror_symmetric());
        prop_assert!((s.mass() - f.mass()).abs() <= 1e-12 * f.mass().max(1.0));
        prop_assert_eq!(symmetrize(&s).unwrap(), s);
    }

    #[test]
    fn affinity_is_symmetric_and_bounded(a in values(64), b in values(64)) {
        let spec = line(0.0, 1.0, 64);
        let f = density(a, spec).normalized().unwrap();
        let g = density(b, spec).normalized().unwrap();
        let fg = hellinger_affinity(&f, &g).unwrap();
        prop_assert_eq!(fg, hellinger_affinity(&g, &f).unwrap());
        prop_assert!((0.0..=1.0).contains(&fg));
        prop_assert!((hellinger_affinity(&f, &f).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn atom_pushforwards_keep_weights(xs in prop::collection::vec((-5.0f64..5.0, 0.01f64..1.0), 1..10), s in 0.1f64..4.0) {
        let m = AtomicMeasure::new(xs).unwrap();
        let image = pushforward_atoms(&m, MapKind::Scale(s)).unwrap();
        prop_assert!((image.mass() - m.mass()).abs() < 1e-12);
        let t = 0.7;
        prop_assert!((image.characteristic(t) - m.characteristic(s * t)).norm() < 1e-12);
    }
}

#[test]
fn mod1_of_atoms_folds_positions() {
    let m = AtomicMeasure::new([(-0.25, 0.5), (1.75, 0.5)]).unwrap();
    let c = pushforward_atoms(&m, MapKind::Mod1).unwrap();
    assert_eq!(c.atoms(), &[(0.75, 1.0)]);
    let coeff = c.circle_coefficient(2);
    assert!((coeff - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
}
