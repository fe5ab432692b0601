//! Gaussian side of the construction: the convolution exponential
//! `exp'(sigma) = sum_p sigma^{*p} / p!`, the covariance `r(t)`, spectral
//! simulation of the stationary process, and weak-mixing and
//! self-similarity diagnostics.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fft;
use crate::lift::SigmaMeasure;
use crate::measure::{convolve_within, GridDensity};
use crate::rng::rng_from_seed;

/// Retained-mass floor for every convolution power.
pub const WINDOW_CAPTURE: f64 = 1.0 - 1e-6;

/// Default truncation order; `1/13!` is below every tolerance used here.
pub const DEFAULT_P_MAX: usize = 12;

/// Truncated convolution exponential.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralExp {
    /// `sigma^{*p} / p!` for `p = 1..=P_max`.
    pub terms: Vec<GridDensity>,
    pub sum: GridDensity,
    pub p_max: usize,
    /// `sum_{p > P_max} 1/p!`
    pub truncation_bound: f64,
    /// Smallest fraction of a convolution power kept inside the window.
    pub min_retained: f64,
}

/// `sum_{p = 1..=P} 1/p!`
pub fn exp_partial_sum(p_max: usize) -> f64 {
    let mut term = 1.0;
    let mut total = 0.0;
    for p in 1..=p_max {
        term /= p as f64;
        total += term;
    }
    total
}

fn exp_tail(p_max: usize) -> f64 {
    let mut term = 1.0;
    for p in 1..=p_max {
        term /= p as f64;
    }
    let mut total = 0.0;
    for p in p_max + 1..p_max + 40 {
        term /= p as f64;
        total += term;
    }
    total
}

/// `exp'(sigma)` truncated at `P_max`, computed on the line window
/// `[-L, L)` with `count` nodes. Each power is cropped back to that window
/// and mirror-averaged, so every term and the sum are exactly symmetric.
pub fn exp_prime(sigma: &SigmaMeasure, p_max: usize, half_width: f64, count: usize) -> Result<SpectralExp> {
    if p_max == 0 {
        return Err(Error::InvalidArgument("P_max must be at least 1".into()));
    }
    let (base, lost) = sigma.to_line_grid(half_width, count)?;
    let mass = sigma.mass();
    let mut min_retained = if mass > 0.0 { 1.0 - lost / mass } else { 1.0 };
    if min_retained < WINDOW_CAPTURE {
        return Err(Error::WindowTruncation { retained: min_retained, required: WINDOW_CAPTURE });
    }
    let spec = *base.spec();
    let mut power = base.clone();
    let mut factorial = 1.0;
    let mut terms = Vec::with_capacity(p_max);
    let mut sum = vec![0.0; count];
    for p in 1..=p_max {
        if p > 1 {
            let (next, retained) = convolve_within(&power, &base, spec)?;
            min_retained = min_retained.min(retained);
            if retained < WINDOW_CAPTURE {
                return Err(Error::WindowTruncation { retained, required: WINDOW_CAPTURE });
            }
            let mut v = next.into_values();
            v[0] = 0.0;
            power = GridDensity::new(spec, v)?.mirror_average()?;
            factorial *= p as f64;
        }
        let term = power.scaled(1.0 / factorial)?;
        for (s, t) in sum.iter_mut().zip(term.values()) {
            *s += t;
        }
        terms.push(term);
    }
    Ok(SpectralExp {
        terms,
        sum: GridDensity::new(spec, sum)?,
        p_max,
        truncation_bound: exp_tail(p_max),
        min_retained,
    })
}

/// `r(t) = int cos(t x) d sigma(x)`.
pub fn covariance(sigma: &SigmaMeasure, t: f64) -> f64 {
    sigma.covariance(t)
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

const DIRECT_PAIR_LIMIT: usize = 4096;
const MIXING_BINS: usize = 1 << 16;

/// Time average `(1/T) int_0^T r(t)^2 dt`, evaluated in closed form from
/// the spectral masses: `sum_{i,j} c_i c_j (sinc((x_i - x_j) T) + sinc((x_i + x_j) T)) / 2`.
/// Large supports are binned onto a uniform frequency grid first.
pub fn mixing_diagnostic(sigma: &SigmaMeasure, horizon: f64) -> Result<f64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon {horizon} must be positive")));
    }
    let (zero, pos) = sigma.positive_half();
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(pos.len() + 1);
    if zero > 0.0 {
        points.push((0.0, zero));
    }
    points.extend(pos.iter().map(|&(x, m)| (x, 2.0 * m)));
    if points.len() <= DIRECT_PAIR_LIMIT {
        let mut total = 0.0;
        for &(xi, ci) in &points {
            for &(xj, cj) in &points {
                total += ci * cj * (sinc((xi - xj) * horizon) + sinc((xi + xj) * horizon));
            }
        }
        return Ok(0.5 * total);
    }
    let x_max = points.iter().fold(0.0_f64, |m, p| m.max(p.0));
    let n = MIXING_BINS;
    let step = x_max / (n - 1) as f64;
    let mut c = vec![0.0; n];
    for &(x, w) in &points {
        let p = x / step;
        let i = (p.floor() as usize).min(n - 2);
        let f = p - i as f64;
        c[i] += (1.0 - f) * w;
        c[i + 1] += f * w;
    }
    let rev: Vec<f64> = c.iter().rev().copied().collect();
    let auto = fft::linear_convolve(&c, &rev);
    let selfc = fft::linear_convolve(&c, &c);
    let mut total = 0.0;
    for (idx, a) in auto.iter().enumerate().take(2 * n - 1) {
        let d = (n - 1) as f64 - idx as f64;
        total += a * sinc(d * step * horizon);
    }
    for (s, v) in selfc.iter().enumerate().take(2 * n - 1) {
        total += v * sinc(s as f64 * step * horizon);
    }
    Ok(0.5 * total)
}

/// Spectral quantization of `sigma` for simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSampler {
    zero_mass: f64,
    /// `(frequency, positive-half mass)` per occupied bin.
    modes: Vec<(f64, f64)>,
    /// Largest frequency spread inside one bin.
    spread: f64,
}

/// One simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSample {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub mode_count: usize,
    pub seed: u64,
}

impl ProcessSampler {
    /// Bins the positive half of `sigma` into `mode_count` equal-width
    /// frequency bins; each bin becomes one mode at its mass-weighted mean
    /// frequency.
    pub fn new(sigma: &SigmaMeasure, mode_count: usize) -> Result<Self> {
        if mode_count < 16 {
            return Err(Error::InvalidArgument(format!("mode count {mode_count} is below 16")));
        }
        let mass = sigma.mass();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { mass });
        }
        let (zero_mass, pos) = sigma.positive_half();
        let x_max = pos.iter().fold(0.0_f64, |m, p| m.max(p.0));
        let width = x_max / mode_count as f64;
        // (mass, first moment, min, max)
        let mut bins = vec![(0.0, 0.0, f64::INFINITY, f64::NEG_INFINITY); mode_count];
        for &(x, m) in &pos {
            let i = if width > 0.0 { ((x / width) as usize).min(mode_count - 1) } else { 0 };
            let b = &mut bins[i];
            b.0 += m;
            b.1 += m * x;
            b.2 = b.2.min(x);
            b.3 = b.3.max(x);
        }
        let mut spread = 0.0_f64;
        let modes = bins
            .iter()
            .filter(|b| b.0 > 0.0)
            .map(|b| {
                spread = spread.max(b.3 - b.2);
                (b.1 / b.0, b.0)
            })
            .collect();
        Ok(Self { zero_mass, modes, spread })
    }

    pub fn modes(&self) -> &[(f64, f64)] {
        &self.modes
    }

    /// Covariance of the quantized process.
    pub fn covariance(&self, t: f64) -> f64 {
        self.zero_mass + self.modes.iter().map(|&(x, w)| 2.0 * w * (x * t).cos()).sum::<f64>()
    }

    /// Checks that the within-bin frequency spread times the largest time is
    /// at most `pi`.
    pub fn check_horizon(&self, times: &[f64]) -> Result<()> {
        let t_max = times.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
        if self.spread * t_max > core::f64::consts::PI {
            return Err(Error::Resolution(format!(
                "bin spread {} times horizon {t_max} exceeds pi; raise the mode count",
                self.spread
            )));
        }
        Ok(())
    }

    /// `X(t) = sqrt(w_0) xi_0 + sum_m sqrt(2 w_m) (xi_m cos(x_m t) + eta_m sin(x_m t))`.
    pub fn sample(&self, times: &[f64], seed: u64) -> Result<ProcessSample> {
        self.check_horizon(times)?;
        let mut rng = rng_from_seed(seed);
        let xi0: f64 = rng.sample(StandardNormal);
        let coeffs: Vec<(f64, f64, f64)> = self
            .modes
            .iter()
            .map(|&(x, w)| {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                let amp = (2.0 * w).sqrt();
                (x, amp * a, amp * b)
            })
            .collect();
        let c0 = self.zero_mass.sqrt() * xi0;
        let values = times
            .iter()
            .map(|&t| c0 + coeffs.iter().map(|&(x, a, b)| a * (x * t).cos() + b * (x * t).sin()).sum::<f64>())
            .collect();
        Ok(ProcessSample { times: times.to_vec(), values, mode_count: self.modes.len(), seed })
    }
}

/// Simulates the stationary Gaussian process with spectral measure `sigma`.
pub fn sample_process(sigma: &SigmaMeasure, times: &[f64], mode_count: usize, seed: u64) -> Result<ProcessSample> {
    let mut s = ProcessSampler::new(sigma, mode_count)?.sample(times, seed)?;
    s.mode_count = mode_count;
    Ok(s)
}

enum Piece {
    Point(f64, f64),
    Cell(f64, f64, f64),
}

const MAX_LOG_BINS: f64 = (1u64 << 22) as f64;

/// Hellinger affinity between a symmetric measure and its image under
/// `x -> s x`, given the mass at the origin and the positive half as
/// log-coordinate pieces. Histograms use a bin width that divides `|log s|`,
/// so the image is an exact shift of the histogram.
fn scale_affinity(zero: f64, pieces: &[Piece], s: f64) -> Result<f64> {
    let half: f64 = pieces.iter().map(|p| match p { Piece::Point(_, m) | Piece::Cell(_, _, m) => *m }).sum();
    let total = zero + 2.0 * half;
    if !(total > 0.0) {
        return Err(Error::NotNormalized { mass: total });
    }
    let shift = s.abs().ln();
    if shift == 0.0 || pieces.is_empty() {
        return Ok(1.0);
    }
    let a = shift.abs();
    let (lo, hi) = pieces.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| match *p {
        Piece::Point(u, _) => (lo.min(u), hi.max(u)),
        Piece::Cell(u0, u1, _) => (lo.min(u0), hi.max(u1)),
    });
    let range = hi - lo;
    let mut k = 64usize;
    while k > 1 && range / (a / k as f64) > MAX_LOG_BINS {
        k /= 2;
    }
    let du = a / k as f64;
    if range / du > MAX_LOG_BINS {
        return Err(Error::Resolution(format!("scale factor {s} too close to 1 for the support width {range}")));
    }
    let n = (range / du).ceil() as usize + 2;
    let mut h = vec![0.0; n];
    for p in pieces {
        match *p {
            Piece::Point(u, m) => {
                let q = (u - lo) / du;
                let i = q.floor() as usize;
                let f = q - i as f64;
                h[i] += (1.0 - f) * m;
                h[i + 1] += f * m;
            }
            Piece::Cell(u0, u1, m) => {
                let (q0, q1) = ((u0 - lo) / du, (u1 - lo) / du);
                let width = q1 - q0;
                if width <= 0.0 {
                    h[q0 as usize] += m;
                    continue;
                }
                let mut i = q0.floor() as usize;
                while (i as f64) < q1 && i < n {
                    let overlap = q1.min(i as f64 + 1.0) - q0.max(i as f64);
                    if overlap > 0.0 {
                        h[i] += m * overlap / width;
                    }
                    i += 1;
                }
            }
        }
    }
    let cross: f64 = h.iter().zip(h.iter().skip(k)).map(|(x, y)| (x * y).sqrt()).sum();
    Ok(((zero + 2.0 * cross) / total).min(1.0))
}

fn sigma_pieces(sigma: &SigmaMeasure) -> (f64, Vec<Piece>) {
    match sigma {
        SigmaMeasure::LogHalf(h) => {
            let du = h.cell_width();
            (0.0, h.node_masses().filter(|p| p.1 > 0.0).map(|(u, m)| Piece::Cell(u - du / 2.0, u + du / 2.0, m)).collect())
        }
        SigmaMeasure::Line(g) => line_pieces(g),
        SigmaMeasure::Atoms(_) => {
            let (zero, pos) = sigma.positive_half();
            (zero, pos.into_iter().map(|(x, m)| Piece::Point(x.ln(), m)).collect())
        }
    }
}

fn line_pieces(g: &GridDensity) -> (f64, Vec<Piece>) {
    let dx = g.cell_width();
    let zero = g.spec().index_of(0.0).map(|i| g.values()[i] * dx).unwrap_or(0.0);
    let pieces = g
        .node_masses()
        .filter(|&(x, m)| x > 0.0 && m > 0.0)
        .map(|(x, m)| if x > dx / 2.0 { Piece::Cell((x - dx / 2.0).ln(), (x + dx / 2.0).ln(), m) } else { Piece::Point(x.ln(), m) })
        .collect();
    (zero, pieces)
}

/// Affinities of `sigma` and of `exp'(sigma)` with their images under `x -> s x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilarity {
    pub s: f64,
    pub affinity_sigma: f64,
    pub affinity_exp: f64,
}

/// Necessary-condition test for `s` to be a self-similarity: an affinity
/// near 0 means the image spectral type is singular to the original one.
/// The sign of `s` is irrelevant because `sigma` is symmetric.
pub fn spectral_selfsim_test(sigma: &SigmaMeasure, s: f64, exp: &SpectralExp) -> Result<SelfSimilarity> {
    if s == 0.0 || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("scale factor {s} must be finite and nonzero")));
    }
    let (zero, pieces) = sigma_pieces(sigma);
    let affinity_sigma = scale_affinity(zero, &pieces, s)?;
    let (zero, pieces) = line_pieces(&exp.sum);
    let affinity_exp = scale_affinity(zero, &pieces, s)?;
    Ok(SelfSimilarity { s, affinity_sigma, affinity_exp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{AtomicMeasure, Domain, GridSpec};

    fn two_atoms() -> SigmaMeasure {
        SigmaMeasure::atoms(AtomicMeasure::new([(-1.0, 0.5), (1.0, 0.5)]).unwrap()).unwrap()
    }

    #[test]
    fn exp_of_two_atoms() {
        let e = exp_prime(&two_atoms(), 2, 4.0, 64).unwrap();
        let zero = e.sum.spec().index_of(0.0).unwrap();
        // sigma has nothing at 0; sigma^{*2} has 1/2 there, divided by 2!
        assert!((e.sum.values()[zero] * e.sum.cell_width() - 0.25).abs() < 1e-14);
        let two = e.terms[1].spec().index_of(2.0).unwrap();
        assert!((e.terms[1].values()[two] * e.sum.cell_width() - 0.125).abs() < 1e-14);
        assert!(e.sum.is_mirror_symmetric());
        assert!((e.sum.mass() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn exp_reports_truncation() {
        assert!(matches!(exp_prime(&two_atoms(), 5, 4.0, 64), Err(Error::WindowTruncation { .. })));
        assert!(exp_prime(&two_atoms(), 0, 4.0, 64).is_err());
    }

    #[test]
    fn partial_sums() {
        assert_eq!(exp_partial_sum(1), 1.0);
        assert!((exp_partial_sum(12) + exp_tail(12) - (core::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!(exp_tail(12) < 5e-10);
    }

    #[test]
    fn covariance_of_two_atoms() {
        let s = two_atoms();
        for t in [0.0, core::f64::consts::FRAC_PI_2, core::f64::consts::PI] {
            assert!((covariance(&s, t) - t.cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn mixing_limits() {
        let v = mixing_diagnostic(&two_atoms(), 100.0 * core::f64::consts::PI).unwrap();
        assert!((v - 0.5).abs() < 1e-3);
        let dirac = SigmaMeasure::atoms(AtomicMeasure::dirac(0.0)).unwrap();
        assert_eq!(mixing_diagnostic(&dirac, 10.0).unwrap(), 1.0);
        assert!(mixing_diagnostic(&dirac, 0.0).is_err());
    }

    #[test]
    fn constant_path_for_zero_frequency() {
        let dirac = SigmaMeasure::atoms(AtomicMeasure::dirac(0.0)).unwrap();
        let p = sample_process(&dirac, &[0.0, 1.0, 5.0, -3.0], 16, 9).unwrap();
        assert!(p.values.iter().all(|v| *v == p.values[0]));
        assert_ne!(p.values[0], 0.0);
    }

    #[test]
    fn sampler_guards() {
        assert!(ProcessSampler::new(&two_atoms(), 8).is_err());
        let spec = GridSpec::new(Domain::RealLine, -2.0, 2.0, 1024).unwrap();
        let u = GridDensity::uniform(spec, -1.0, 1.0).unwrap();
        let sigma = SigmaMeasure::line(crate::measure::symmetrize(&u).unwrap()).unwrap();
        let sampler = ProcessSampler::new(&sigma, 16).unwrap();
        assert!(sampler.sample(&[0.0, 1000.0], 1).is_err());
        assert!(sampler.sample(&[0.0, 10.0], 1).is_ok());
        let half = SigmaMeasure::atoms(AtomicMeasure::new([(-1.0, 0.25), (1.0, 0.25)]).unwrap()).unwrap();
        assert!(matches!(ProcessSampler::new(&half, 16), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn selfsim_of_separated_atoms() {
        let s = two_atoms();
        let e = exp_prime(&s, 2, 4.0, 64).unwrap();
        let one = spectral_selfsim_test(&s, 1.0, &e).unwrap();
        assert_eq!((one.affinity_sigma, one.affinity_exp), (1.0, 1.0));
        let two = spectral_selfsim_test(&s, 2.0, &e).unwrap();
        assert!(two.affinity_sigma < 1e-12);
        // at s = 3 only the atom of exp' at 0 overlaps its image
        let three = spectral_selfsim_test(&s, 3.0, &e).unwrap();
        assert!((three.affinity_exp - 0.25 / 1.5).abs() < 1e-12);
    }
}
