use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use proptest::prelude::*;
use selfsim_core::riesz::{Angle, RieszSpec};

/// Strictly lacunary frequencies: `n_j = 2 (n_1 + ... + n_{j-1}) + 1 + extra_j`.
fn strict_freqs(first: u64, extras: &[u64]) -> Vec<u64> {
    let mut out = vec![first];
    let mut sum = first;
    for e in extras {
        let n = 2 * sum + 1 + e;
        out.push(n);
        sum += n;
    }
    out
}

fn brute_force(n: &[u64], m: i64) -> Vec<Vec<i8>> {
    let j = n.len();
    let mut out = Vec::new();
    for code in 0..3usize.pow(j as u32) {
        let mut c = code;
        let mut digits = vec![0i8; j];
        let mut total = 0i64;
        for (idx, d) in digits.iter_mut().enumerate() {
            *d = (c % 3) as i8 - 1;
            c /= 3;
            total += *d as i64 * n[idx] as i64;
        }
        if total == m {
            out.push(digits);
        }
    }
    out
}

fn weight_strategy() -> impl Strategy<Value = Complex64> {
    (0.0f64..=1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_matches_brute_force(first in 1u64..4, extras in prop::collection::vec(0u64..4, 0..6)) {
        let n = strict_freqs(first, &extras);
        let spec = RieszSpec::from_u64(&n, vec![Complex64::new(1.0, 0.0); n.len()]).unwrap();
        prop_assert!(spec.is_strictly_lacunary());
        let total: i64 = n.iter().map(|&x| x as i64).sum();
        for m in -total..=total {
            let reps = brute_force(&n, m);
            prop_assert!(reps.len() <= 1, "strict lacunarity gives unique representations");
            let greedy = spec.decompose(&BigInt::from(m));
            match (reps.first(), greedy) {
                (None, None) => {}
                (Some(digits), Some(rep)) => {
                    for (j, d) in digits.iter().enumerate() {
                        prop_assert_eq!(rep.digit(j + 1), *d);
                    }
                    prop_assert_eq!(rep.reconstruct(&spec), BigInt::from(m));
                }
                (a, b) => prop_assert!(false, "m = {}: brute force {:?}, greedy {:?}", m, a, b),
            }
        }
        prop_assert!(spec.decompose(&BigInt::from(total + 1)).is_none());
    }

    #[test]
    fn fourier_formula_matches_partial_product(
        first in 1u64..4,
        extras in prop::collection::vec(0u64..4, 0..5),
        weights in prop::collection::vec(weight_strategy(), 5),
    ) {
        let n = strict_freqs(first, &extras);
        let a = weights[..n.len()].to_vec();
        let spec = RieszSpec::from_u64(&n, a).unwrap();
        let poly = spec.partial_product(n.len()).unwrap();
        prop_assert!(poly.is_hermitian());
        let total: i64 = n.iter().map(|&x| x as i64).sum();
        for m in -total - 2..=total + 2 {
            prop_assert_eq!(spec.fourier_coefficient(&BigInt::from(m)), poly.coeff(m));
        }
        prop_assert_eq!(spec.fourier_coefficient(&BigInt::from(0)), Complex64::new(1.0, 0.0));
        let count = (4 * total as usize + 4).next_power_of_two();
        let raster = poly.rasterize(count).unwrap();
        prop_assert!((raster.mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn weakly_lacunary_coefficients_sum_representations(
        weights in prop::collection::vec(weight_strategy(), 5),
    ) {
        // factorial frequencies tie the lacunary bound at j = 2, 3
        let spec = RieszSpec::factorial_with_weights(weights).unwrap();
        let poly = spec.partial_product(5).unwrap();
        for m in -153i64..=153 {
            let a = spec.fourier_coefficient(&BigInt::from(m));
            prop_assert!((a - poly.coeff(m)).norm() < 1e-15);
        }
    }
}

#[test]
fn rational_angles_vanish_from_the_denominator_on() {
    let spec = RieszSpec::factorial(40).unwrap();
    for q in 1..=12u64 {
        for p in 0..q {
            let angle = Angle::rational(p as i64, q).unwrap();
            let terms = spec.h_membership_terms(&angle, 40).unwrap();
            for (idx, t) in terms.iter().enumerate() {
                if idx + 1 >= q as usize {
                    assert_eq!(*t, 0.0, "p/q = {p}/{q}, j = {}", idx + 1);
                }
            }
        }
    }
}

#[test]
fn huge_factorial_frequencies_reduce_exactly() {
    let spec = RieszSpec::factorial(60).unwrap();
    assert!(spec.frequency(60) > BigUint::from(u64::MAX));
    assert_eq!(spec.h_membership_series(&Angle::rational(5, 7).unwrap(), 60).unwrap(), spec.h_membership_series(&Angle::rational(5, 7).unwrap(), 6).unwrap());
    assert!(spec.partial_product(25).is_err());
    let m = BigInt::from(spec.frequency(50)) - BigInt::from(spec.frequency(3));
    let rep = spec.decompose(&m).unwrap();
    assert_eq!(rep.reconstruct(&spec), m);
}
