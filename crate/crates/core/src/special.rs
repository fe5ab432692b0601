//! Distribution functions needed by the Monte-Carlo checks.

use core::f64::consts::SQRT_2;

#[allow(unused_imports)]
use num_traits::Float;

/// Euclidean remainder `x mod m` in `[0, m)` for `m > 0`.
pub fn rem_euclid(x: f64, m: f64) -> f64 {
    let r = libm::fmod(x, m);
    if r < 0.0 {
        r + m
    } else {
        r
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Quantile of the standard normal, by bracketed Newton on `normal_cdf`.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    let mut x = 0.0;
    for _ in 0..200 {
        let f = normal_cdf(x) - p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let pdf = (-0.5 * x * x).exp() / (2.0 * core::f64::consts::PI).sqrt();
        let mut next = if pdf > 1e-300 { x - f / pdf } else { 0.5 * (lo + hi) };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// `P(N = j)` for `N ~ Poisson(mu)`.
pub fn poisson_pmf(mu: f64, j: u64) -> f64 {
    if mu == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    let jf = j as f64;
    (jf * mu.ln() - mu - libm::lgamma(jf + 1.0)).exp()
}

/// `P(N >= j)` for `N ~ Poisson(mu)`.
pub fn poisson_upper_tail(mu: f64, j: u64) -> f64 {
    if j == 0 {
        return 1.0;
    }
    // P(N >= j) = P(j, mu), the regularized lower incomplete gamma.
    gamma_p(j as f64, mu)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cont_frac(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cont_frac(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut sum = 1.0 / a;
    let mut del = sum;
    for _ in 0..10_000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - libm::lgamma(a)).exp()
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn gamma_cont_frac(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - libm::lgamma(a)).exp() * h
}

/// Survival function of the chi-square distribution with `dof` degrees of freedom.
pub fn chi2_sf(stat: f64, dof: f64) -> f64 {
    if dof <= 0.0 {
        return 1.0;
    }
    gamma_q(0.5 * dof, 0.5 * stat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-12);
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-9);
        assert!((normal_quantile(0.01) + 2.3263478740408408).abs() < 1e-9);
    }

    #[test]
    fn poisson_values() {
        assert!((poisson_pmf(1.0, 0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((poisson_pmf(2.0, 3) - 0.180_447_044_315_483_6).abs() < 1e-12);
        // P(N >= 1) = 1 - e^{-mu}
        assert!((poisson_upper_tail(0.7, 1) - (1.0 - (-0.7f64).exp())).abs() < 1e-14);
        let direct: f64 = (0..5).map(|j| poisson_pmf(1.3, j)).sum();
        assert!((poisson_upper_tail(1.3, 5) - (1.0 - direct)).abs() < 1e-13);
    }

    #[test]
    fn chi2_reference_values() {
        // chi2 with 1 dof: sf(3.841458820694124) = 0.05
        assert!((chi2_sf(3.841458820694124, 1.0) - 0.05).abs() < 1e-10);
        // 2 dof: sf(x) = exp(-x/2)
        assert!((chi2_sf(4.0, 2.0) - (-2.0f64).exp()).abs() < 1e-14);
        // even dof: sf(x) = e^{-x/2} sum_{i < k/2} (x/2)^i / i!
        let x: f64 = 30.0;
        let mut term = 1.0;
        let mut closed = 0.0;
        for i in 0..5 {
            if i > 0 {
                term *= x / 2.0 / i as f64;
            }
            closed += term;
        }
        closed *= (-x / 2.0).exp();
        assert!((chi2_sf(x, 10.0) - closed).abs() < 1e-14 * closed.max(1e-300) + 1e-17);
    }
}
