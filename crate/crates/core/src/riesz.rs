//! Riesz products `prod_j (1 + a_j z^{n_j}/2 + conj(a_j) z^{-n_j}/2)` over a
//! lacunary frequency sequence: exact partial products, the signed-digit
//! decomposition of frequencies, closed-form Fourier coefficients, and the
//! series behind the quasi-invariance group `H(rho)` and its criteria.
//!
//! Frequencies are arbitrary-precision integers, so the factorial family can
//! be evaluated far beyond `u64`. Operations that materialize polynomials are
//! limited to frequency sums that fit in `i64`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::measure::TrigPoly;

const WEIGHT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Frequencies {
    Explicit(Vec<BigUint>),
    /// `n_j = j!`
    Factorial,
}

/// Generator `(n_j, a_j)`, `j = 1..=J_max`, of a Riesz product.
///
/// Construction enforces `n_j >= 2 (n_1 + ... + n_{j-1})` and `|a_j| <= 1`.
/// With strict inequality every integer has at most one signed-digit
/// representation; see [`RieszSpec::is_strictly_lacunary`].
#[derive(Debug, Clone, PartialEq)]
pub struct RieszSpec {
    freqs: Frequencies,
    weights: Vec<Complex64>,
}

/// Digits `k_j in {-1, +1}` (indices start at 1) with `m = sum_j k_j n_j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SignedRepresentation {
    digits: BTreeMap<usize, i8>,
}

impl SignedRepresentation {
    pub fn digits(&self) -> &BTreeMap<usize, i8> {
        &self.digits
    }

    pub fn digit(&self, j: usize) -> i8 {
        self.digits.get(&j).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn reconstruct(&self, spec: &RieszSpec) -> BigInt {
        self.digits
            .iter()
            .map(|(&j, &k)| BigInt::from(k) * BigInt::from(spec.frequency(j)))
            .sum()
    }
}

/// Criterion sums over the finite spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criteria {
    /// `sum_{j < J} |a_j|^2 (n_j / n_{j+1})^2`
    pub lacunary_sum: f64,
    /// `sum_{j <= J} |a_j|^2`
    pub weight_sum: f64,
    /// Factorial family only: upper bound `1/J` on the omitted lacunary terms
    /// (valid for any continuation with `|a_j| <= 1`).
    pub tail_bound: Option<f64>,
    /// Factorial family only: integral estimate `|a_J|^2 / (J + 1/2)` of the
    /// omitted terms, assuming the last weight modulus persists.
    pub tail_estimate: Option<f64>,
}

/// Exact point of the circle, `num / den` reduced mod 1 on use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Angle {
    num: BigInt,
    den: BigUint,
}

impl Angle {
    pub fn rational(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("angle denominator is zero".into()));
        }
        let g = num.unsigned_abs().gcd(&den).max(1);
        Ok(Self { num: BigInt::from(num / g as i64), den: BigUint::from(den / g) })
    }

    /// Denominator in lowest terms.
    pub fn denominator(&self) -> &BigUint {
        &self.den
    }

    /// The exact dyadic rational equal to the binary64 value `theta`.
    pub fn from_f64(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("angle {theta} is not finite")));
        }
        if theta == 0.0 {
            return Ok(Self { num: BigInt::zero(), den: BigUint::one() });
        }
        let bits = theta.to_bits();
        let sign = if bits >> 63 == 1 { Sign::Minus } else { Sign::Plus };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let mag = BigUint::from(mantissa);
        if e >= 0 {
            Ok(Self { num: BigInt::from_biguint(sign, mag << (e as usize)), den: BigUint::one() })
        } else {
            let tz = (mantissa.trailing_zeros() as i64).min(-e);
            Ok(Self {
                num: BigInt::from_biguint(sign, mag >> (tz as usize)),
                den: BigUint::one() << ((-e - tz) as usize),
            })
        }
    }

    /// Nearest binary64 value in `[0, 1)`.
    pub fn to_f64(&self) -> f64 {
        let den = BigInt::from(self.den.clone());
        let r = self.num.mod_floor(&den);
        ratio_to_f64(&r.magnitude().clone(), &self.den)
    }

    /// `(theta * n) mod 1` as an exact fraction, returned as binary64.
    fn times_mod1(&self, n: &BigUint) -> f64 {
        let den = BigInt::from(self.den.clone());
        let r = (&self.num * BigInt::from(n.clone())).mod_floor(&den);
        ratio_to_f64(r.magnitude(), &self.den)
    }
}

/// `num / den` for big integers, accurate to a few ulps at any size.
pub(crate) fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = num.bits().max(den.bits()).saturating_sub(1000) as usize;
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    if d == 0.0 {
        // den is negligible next to num at this precision
        return f64::INFINITY;
    }
    n / d
}

fn factorial(j: usize) -> BigUint {
    (1..=j as u64).fold(BigUint::one(), |acc, k| acc * k)
}

impl RieszSpec {
    pub fn new(n: Vec<BigUint>, a: Vec<Complex64>) -> Result<Self> {
        if n.is_empty() {
            return Err(Error::InvalidSpec("empty frequency list".into()));
        }
        if n.len() != a.len() {
            return Err(Error::InvalidSpec(format!("{} frequencies but {} weights", n.len(), a.len())));
        }
        let mut prefix = BigUint::zero();
        for (j, nj) in n.iter().enumerate() {
            if nj.is_zero() {
                return Err(Error::InvalidSpec(format!("n_{} must be positive", j + 1)));
            }
            if *nj < &prefix * 2u32 {
                return Err(Error::InvalidSpec(format!(
                    "n_{} = {nj} violates n_j >= 2 (n_1 + ... + n_(j-1)) = {}",
                    j + 1,
                    &prefix * 2u32
                )));
            }
            if j > 0 && *nj <= n[j - 1] {
                return Err(Error::InvalidSpec(format!("n_{} is not increasing", j + 1)));
            }
            prefix += nj;
        }
        Self::check_weights(&a)?;
        Ok(Self { freqs: Frequencies::Explicit(n), weights: a })
    }

    pub fn from_u64(n: &[u64], a: Vec<Complex64>) -> Result<Self> {
        Self::new(n.iter().map(|&x| BigUint::from(x)).collect(), a)
    }

    /// `n_j = j!`, `a_j = 1` for `j = 1..=j_max`.
    pub fn factorial(j_max: usize) -> Result<Self> {
        Self::factorial_with_weights(vec![Complex64::new(1.0, 0.0); j_max])
    }

    /// `n_j = j!` with caller-supplied weights.
    pub fn factorial_with_weights(a: Vec<Complex64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidSpec("empty weight list".into()));
        }
        Self::check_weights(&a)?;
        Ok(Self { freqs: Frequencies::Factorial, weights: a })
    }

    fn check_weights(a: &[Complex64]) -> Result<()> {
        for (j, w) in a.iter().enumerate() {
            if !(w.re.is_finite() && w.im.is_finite()) || w.norm() > 1.0 + WEIGHT_SLACK {
                return Err(Error::InvalidSpec(format!("|a_{}| = {} exceeds 1", j + 1, w.norm())));
            }
        }
        Ok(())
    }

    /// `J_max`.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_factorial(&self) -> bool {
        matches!(self.freqs, Frequencies::Factorial)
    }

    /// `n_j`, 1-based.
    pub fn frequency(&self, j: usize) -> BigUint {
        assert!(j >= 1 && j <= self.len(), "frequency index {j} out of range");
        match &self.freqs {
            Frequencies::Explicit(n) => n[j - 1].clone(),
            Frequencies::Factorial => factorial(j),
        }
    }

    /// `a_j`, 1-based.
    pub fn weight(&self, j: usize) -> Complex64 {
        self.weights[j - 1]
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    fn frequencies_upto(&self, j: usize) -> Vec<BigUint> {
        match &self.freqs {
            Frequencies::Explicit(n) => n[..j].to_vec(),
            Frequencies::Factorial => {
                let mut out = Vec::with_capacity(j);
                let mut f = BigUint::one();
                for k in 1..=j as u64 {
                    f *= k;
                    out.push(f.clone());
                }
                out
            }
        }
    }

    /// `n_1 + ... + n_j`.
    pub fn frequency_sum(&self, j: usize) -> BigUint {
        self.frequencies_upto(j).into_iter().sum()
    }

    /// Whether `n_j > 2 (n_1 + ... + n_{j-1})` holds strictly for every `j`.
    pub fn is_strictly_lacunary(&self) -> bool {
        let mut prefix = BigUint::zero();
        for nj in self.frequencies_upto(self.len()) {
            if nj <= &prefix * 2u32 {
                return false;
            }
            prefix += nj;
        }
        true
    }

    /// Coefficient of `z^{k n_j}` in `P_j`, `k in {-1, 0, 1}`.
    fn factor(&self, j: usize, k: i8) -> Complex64 {
        let a = self.weights[j - 1];
        match k {
            0 => Complex64::new(1.0, 0.0),
            1 => a * 0.5,
            _ => a.conj() * 0.5,
        }
    }

    /// `prod_{k <= J} P_k` as an exact sparse trigonometric polynomial.
    pub fn partial_product(&self, j: usize) -> Result<TrigPoly> {
        if j == 0 || j > self.len() {
            return Err(Error::IndexOutOfRange { index: j, max: self.len() });
        }
        let freqs = self.frequencies_upto(j);
        let total: BigUint = freqs.iter().sum();
        if total.bits() > 62 {
            return Err(Error::FrequencyOverflow(format!("frequency sum {total} does not fit in i64")));
        }
        let mut poly = TrigPoly::one();
        for (idx, nj) in freqs.iter().enumerate() {
            let jj = idx + 1;
            if self.weights[idx] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let n = nj.to_i64().expect("bounded by the frequency sum");
            let mut coeffs = BTreeMap::new();
            coeffs.insert(-n, self.factor(jj, -1));
            coeffs.insert(0, self.factor(jj, 0));
            coeffs.insert(n, self.factor(jj, 1));
            poly = poly.mul(&TrigPoly::from_map_unchecked(coeffs));
        }
        Ok(poly)
    }

    /// Greedy signed-digit decomposition of `m`.
    ///
    /// From the top index down, digit `j` is taken as `sign(r)` exactly when
    /// the remainder exceeds `n_1 + ... + n_{j-1}` in absolute value. Under
    /// the lacunarity enforced at construction this finds a representation
    /// whenever one exists; it is the unique one for strictly lacunary specs.
    pub fn decompose(&self, m: &BigInt) -> Option<SignedRepresentation> {
        let freqs = self.frequencies_upto(self.len());
        let mut prefix: Vec<BigInt> = Vec::with_capacity(freqs.len() + 1);
        prefix.push(BigInt::zero());
        for nj in &freqs {
            let next = prefix.last().unwrap() + BigInt::from(nj.clone());
            prefix.push(next);
        }
        if m.abs() > *prefix.last().unwrap() {
            return None;
        }
        let mut r = m.clone();
        let mut digits = BTreeMap::new();
        for j in (1..=freqs.len()).rev() {
            if r.abs() > prefix[j - 1] {
                let k: i8 = if r.is_negative() { -1 } else { 1 };
                r -= BigInt::from(k) * BigInt::from(freqs[j - 1].clone());
                digits.insert(j, k);
            }
        }
        r.is_zero().then_some(SignedRepresentation { digits })
    }

    /// Every signed-digit representation of `m` (at most one for strictly
    /// lacunary specs). Branches only where `|r - k n_j|` ties the prefix sum.
    pub fn representations(&self, m: &BigInt) -> Vec<SignedRepresentation> {
        let freqs: Vec<BigInt> = self.frequencies_upto(self.len()).into_iter().map(BigInt::from).collect();
        let mut prefix = vec![BigInt::zero()];
        for nj in &freqs {
            let next = prefix.last().unwrap() + nj;
            prefix.push(next);
        }
        let mut out = Vec::new();
        let mut digits = vec![0i8; freqs.len() + 1];
        fn walk(
            j: usize,
            r: BigInt,
            freqs: &[BigInt],
            prefix: &[BigInt],
            digits: &mut Vec<i8>,
            out: &mut Vec<SignedRepresentation>,
        ) {
            if j == 0 {
                if r.is_zero() {
                    let map = digits
                        .iter()
                        .enumerate()
                        .filter(|(_, k)| **k != 0)
                        .map(|(i, k)| (i, *k))
                        .collect();
                    out.push(SignedRepresentation { digits: map });
                }
                return;
            }
            for k in [-1i8, 0, 1] {
                let next = &r - BigInt::from(k) * &freqs[j - 1];
                if next.abs() <= prefix[j - 1] {
                    digits[j] = k;
                    walk(j - 1, next, freqs, prefix, digits, out);
                    digits[j] = 0;
                }
            }
        }
        if m.abs() <= *prefix.last().unwrap() {
            walk(freqs.len(), m.clone(), &freqs, &prefix, &mut digits, &mut out);
        }
        out
    }

    /// `rho^(m) = int z^{-m} d rho`: the product of `a_j/2` over `k_j = +1`
    /// and `conj(a_j)/2` over `k_j = -1`, zero when `m` has no signed-digit
    /// representation. Factors are multiplied in increasing `j`, the same
    /// order [`RieszSpec::partial_product`] uses, so the two agree bit for bit
    /// on strictly lacunary specs.
    pub fn fourier_coefficient(&self, m: &BigInt) -> Complex64 {
        self.representations(m)
            .iter()
            .map(|rep| {
                let mut acc = Complex64::new(1.0, 0.0);
                for (&j, &k) in rep.digits() {
                    acc *= self.factor(j, k);
                }
                acc
            })
            .fold(Complex64::new(0.0, 0.0), |s, c| s + c)
    }

    /// Terms `|a_j|^2 |1 - a_j e^{2 pi i theta n_j}|^2`, `j = 1..=J`, with
    /// `theta n_j mod 1` reduced exactly.
    pub fn h_membership_terms(&self, theta: &Angle, j: usize) -> Result<Vec<f64>> {
        if j > self.len() {
            return Err(Error::IndexOutOfRange { index: j, max: self.len() });
        }
        let two_pi = 2.0 * core::f64::consts::PI;
        Ok(self
            .frequencies_upto(j)
            .iter()
            .zip(&self.weights)
            .map(|(nj, a)| {
                let r = theta.times_mod1(nj);
                let w = a * Complex64::from_polar(1.0, two_pi * r);
                let d = Complex64::new(1.0 - w.re, -w.im);
                a.norm_sqr() * d.norm_sqr()
            })
            .collect())
    }

    /// Partial sum `S_J(theta)` of the series defining `H(rho)`.
    pub fn h_membership_series(&self, theta: &Angle, j: usize) -> Result<f64> {
        Ok(self.h_membership_terms(theta, j)?.iter().sum())
    }

    fn ratio(&self, j: usize) -> f64 {
        match &self.freqs {
            Frequencies::Factorial => 1.0 / (j as f64 + 1.0),
            Frequencies::Explicit(n) => ratio_to_f64(&n[j - 1], &n[j]),
        }
    }

    pub fn criteria(&self) -> Result<Criteria> {
        let j_max = self.len();
        if j_max < 2 {
            return Err(Error::InvalidSpec("criteria need at least two terms".into()));
        }
        let lacunary_sum = (1..j_max)
            .map(|j| {
                let q = self.ratio(j);
                self.weights[j - 1].norm_sqr() * q * q
            })
            .sum();
        let weight_sum = self.weights.iter().map(|a| a.norm_sqr()).sum();
        let (tail_bound, tail_estimate) = if self.is_factorial() {
            let jf = j_max as f64;
            (Some(1.0 / jf), Some(self.weights[j_max - 1].norm_sqr() / (jf + 0.5)))
        } else {
            (None, None)
        };
        Ok(Criteria { lacunary_sum, weight_sum, tail_bound, tail_estimate })
    }
}
