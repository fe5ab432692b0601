use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;

use super::grid::{GridDensity, GridSpec};
use crate::error::{Error, Result};
use crate::fft;

/// Sparse trigonometric polynomial `sum_n c_n z^n`, `z = e^{2 pi i theta}`,
/// with Hermitian coefficients so it is real-valued on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    coeffs: BTreeMap<i64, Complex64>,
}

impl TrigPoly {
    /// The constant polynomial 1 (Haar measure density).
    pub fn one() -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, Complex64::new(1.0, 0.0));
        Self { coeffs }
    }

    /// Build from `(frequency, coefficient)` pairs; zero coefficients are
    /// dropped and Hermitian symmetry is checked exactly.
    pub fn from_coeffs(pairs: impl IntoIterator<Item = (i64, Complex64)>) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (n, c) in pairs {
            if !c.is_zero() {
                *coeffs.entry(n).or_insert_with(Complex64::zero) += c;
            }
        }
        let poly = Self { coeffs };
        if !poly.is_hermitian() {
            return Err(Error::InvalidArgument("coefficients are not Hermitian".into()));
        }
        Ok(poly)
    }

    pub(crate) fn from_map_unchecked(coeffs: BTreeMap<i64, Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn is_hermitian(&self) -> bool {
        self.coeffs.iter().all(|(&n, c)| {
            if n == 0 {
                c.im == 0.0
            } else {
                self.coeff(-n) == c.conj()
            }
        })
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or_else(Complex64::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(n, c)| (*n, *c))
    }

    /// Number of nonzero coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_frequency(&self) -> u64 {
        self.coeffs.keys().map(|n| n.unsigned_abs()).max().unwrap_or(0)
    }

    /// Sparse product. Each output coefficient accumulates `self_coef * other_coef`
    /// in increasing frequency order.
    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let mut out: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (&n1, c1) in &self.coeffs {
            for (&n2, c2) in &other.coeffs {
                let e = out.entry(n1 + n2).or_insert_with(Complex64::zero);
                *e += c1 * c2;
            }
        }
        out.retain(|_, c| !c.is_zero());
        TrigPoly { coeffs: out }
    }

    /// Value at `theta`, real part of `sum c_n e^{2 pi i n theta}`.
    pub fn eval(&self, theta: f64) -> f64 {
        let two_pi = 2.0 * core::f64::consts::PI;
        self.coeffs
            .iter()
            .map(|(&n, c)| (c * Complex64::from_polar(1.0, two_pi * (n as f64) * theta)).re)
            .sum()
    }

    /// Density on a circle grid of `count` nodes. Requires `count` above
    /// twice the top frequency so no coefficients alias; roundoff negatives
    /// down to `-1e-12 * peak` are clamped to 0.
    pub fn rasterize(&self, count: usize) -> Result<GridDensity> {
        let spec = GridSpec::circle(count)?;
        let top = self.max_frequency();
        if (count as u64) <= 2 * top {
            return Err(Error::GridTooCoarse(format!(
                "{count} nodes cannot resolve frequency {top} without aliasing"
            )));
        }
        let mut buf = vec![Complex64::zero(); count];
        for (&n, c) in &self.coeffs {
            buf[n.rem_euclid(count as i64) as usize] += c;
        }
        fft::ifft(&mut buf);
        let scale = count as f64;
        let raw: Vec<f64> = buf.iter().map(|c| c.re * scale).collect();
        let peak = raw.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * peak.max(1.0);
        let mut values = Vec::with_capacity(count);
        for (i, v) in raw.into_iter().enumerate() {
            if v < -tol {
                return Err(Error::InvalidArgument(format!("polynomial is negative ({v}) at node {i}")));
            }
            values.push(v.max(0.0));
        }
        GridDensity::new(spec, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hermitian_check() {
        assert!(TrigPoly::from_coeffs([(0, c(1.0)), (1, c(0.5)), (-1, c(0.5))]).is_ok());
        assert!(TrigPoly::from_coeffs([(0, c(1.0)), (1, Complex64::new(0.0, 0.5))]).is_err());
    }

    #[test]
    fn product_and_rasterize() {
        let p = TrigPoly::from_coeffs([(0, c(1.0)), (1, c(0.5)), (-1, c(0.5))]).unwrap();
        let q = p.mul(&p);
        assert_eq!(q.coeff(2), c(0.25));
        assert_eq!(q.coeff(0), c(1.5));
        let g = p.rasterize(16).unwrap();
        assert!((g.mass() - 1.0).abs() < 1e-14);
        assert!((g.values()[0] - 2.0).abs() < 1e-14);
        assert_eq!(g.values()[8], 0.0);
        assert!(p.rasterize(2).is_err());
        assert!((p.eval(0.25) - 1.0).abs() < 1e-15);
    }
}
