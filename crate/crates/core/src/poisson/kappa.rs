use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::measure::{AtomicMeasure, Domain, GridDensity};
use crate::rng::Rng;
use crate::special::{normal_cdf, normal_quantile};

const MASS_TOL: f64 = 1e-6;

/// Measure on the positive reals that weights the ergodic components.
#[derive(Debug, Clone, PartialEq)]
pub enum Kappa {
    /// `log s ~ N(mu, sigma^2)`.
    LogNormal { mu: f64, sigma: f64 },
    /// Uniform in `s` on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Atoms at positive positions.
    Atoms(AtomicMeasure),
    /// Density in the log chart `u = log s`.
    Grid(GridDensity),
    /// Lebesgue measure `ds`; not a probability measure.
    Lebesgue,
}

impl Kappa {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::LogNormal { mu, sigma } => {
                if !(mu.is_finite() && sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::InvalidArgument(format!("lognormal needs finite mu and sigma > 0, got {mu}, {sigma}")));
                }
            }
            Self::Uniform { lo, hi } => {
                if !(*lo > 0.0 && hi > lo && hi.is_finite()) {
                    return Err(Error::InvalidArgument(format!("uniform kappa needs 0 < lo < hi, got [{lo}, {hi}]")));
                }
            }
            Self::Atoms(a) => {
                if a.atoms().iter().any(|p| p.0 <= 0.0) {
                    return Err(Error::InvalidArgument("kappa atoms must sit at positive positions".into()));
                }
                if (a.mass() - 1.0).abs() > MASS_TOL {
                    return Err(Error::NotNormalized { mass: a.mass() });
                }
            }
            Self::Grid(g) => {
                if g.domain() != Domain::PosRealsLog {
                    return Err(Error::IncompatibleDomain { op: "kappa", detail: "grid kappa must use the log chart".into() });
                }
                if (g.mass() - 1.0).abs() > MASS_TOL {
                    return Err(Error::NotNormalized { mass: g.mass() });
                }
            }
            Self::Lebesgue => {}
        }
        Ok(())
    }

    pub fn is_proper(&self) -> bool {
        !matches!(self, Self::Lebesgue)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::LogNormal { .. } => "lognormal",
            Self::Uniform { .. } => "uniform",
            Self::Atoms(_) => "atoms",
            Self::Grid(_) => "grid",
            Self::Lebesgue => "improper kappa (lebesgue)",
        }
    }

    /// `kappa([a, b))`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        match self {
            Self::LogNormal { mu, sigma } => {
                let z = |s: f64| if s <= 0.0 { 0.0 } else { normal_cdf((s.ln() - mu) / sigma) };
                (z(b) - z(a)).max(0.0)
            }
            Self::Uniform { lo, hi } => (b.min(*hi) - a.max(*lo)).max(0.0) / (hi - lo),
            Self::Atoms(m) => m.atoms().iter().filter(|p| p.0 >= a && p.0 < b).map(|p| p.1).sum(),
            Self::Grid(g) => g.node_masses().filter(|(u, _)| {
                let s = u.exp();
                s >= a && s < b
            })
            .map(|p| p.1)
            .sum(),
            Self::Lebesgue => b - a.max(0.0),
        }
    }

    /// Whether `s` lies in the support.
    pub fn contains(&self, s: f64) -> bool {
        if !(s > 0.0 && s.is_finite()) {
            return false;
        }
        match self {
            Self::LogNormal { .. } | Self::Lebesgue => true,
            Self::Uniform { lo, hi } => s >= *lo && s <= *hi,
            Self::Atoms(m) => m.atoms().iter().any(|p| (p.0 - s).abs() <= 1e-12 * s),
            Self::Grid(g) => g.value_at(s.ln()) > 0.0,
        }
    }

    /// Density with respect to `du` in the log chart; `None` for atoms.
    pub fn log_density(&self, u: f64) -> Option<f64> {
        match self {
            Self::LogNormal { mu, sigma } => {
                let z = (u - mu) / sigma;
                Some((-0.5 * z * z).exp() / (sigma * (2.0 * core::f64::consts::PI).sqrt()))
            }
            Self::Uniform { lo, hi } => {
                let s = u.exp();
                Some(if s >= *lo && s <= *hi { s / (hi - lo) } else { 0.0 })
            }
            Self::Atoms(_) => None,
            Self::Grid(g) => Some(g.value_at(u)),
            Self::Lebesgue => Some(u.exp()),
        }
    }

    fn atom_weight(m: &AtomicMeasure, s: f64) -> f64 {
        m.atoms().iter().find(|p| (p.0 - s).abs() <= 1e-12 * s).map(|p| p.1).unwrap_or(0.0)
    }

    /// Density ratio `D(s)` used by the transformation `(s, y) -> (h s, y D(s))`:
    /// the ratio of the `h`-scaled measure to the original one, evaluated at
    /// `h s`. With it the transformation preserves `kappa x Lebesgue`.
    pub fn density_ratio(&self, s: f64, h: f64) -> Result<f64> {
        if !(s > 0.0 && h > 0.0) {
            return Err(Error::UndefinedDensityRatio { s });
        }
        let a = h.ln();
        let d = match self {
            Self::LogNormal { mu, sigma } => {
                let u = s.ln() - mu;
                ((2.0 * a * u + a * a) / (2.0 * sigma * sigma)).exp()
            }
            Self::Uniform { lo, hi } => {
                let inside = |x: f64| x >= *lo && x <= *hi;
                if inside(s) && inside(h * s) {
                    1.0 / h
                } else {
                    0.0
                }
            }
            Self::Atoms(m) => {
                let num = Self::atom_weight(m, s);
                let den = Self::atom_weight(m, h * s);
                if den > 0.0 {
                    num / den
                } else {
                    0.0
                }
            }
            Self::Grid(g) => {
                let u = s.ln();
                let (num, den) = (g.value_at(u), g.value_at(u + a));
                if num > 0.0 && den > 0.0 {
                    num / den
                } else {
                    0.0
                }
            }
            Self::Lebesgue => 1.0 / h,
        };
        if d > 0.0 && d.is_finite() {
            Ok(d)
        } else {
            Err(Error::UndefinedDensityRatio { s })
        }
    }

    /// Sampler for `kappa` restricted to `[a, b)`.
    pub fn sampler(&self, a: f64, b: f64) -> Result<KappaSampler> {
        if self.mass_in(a, b) <= 0.0 {
            return Err(Error::InvalidArgument(format!("kappa has no mass in [{a}, {b})")));
        }
        Ok(match self {
            Self::LogNormal { mu, sigma } => {
                let z = |s: f64| if s <= 0.0 { 0.0 } else { normal_cdf((s.ln() - mu) / sigma) };
                KappaSampler::LogNormal { mu: *mu, sigma: *sigma, p0: z(a), p1: z(b) }
            }
            Self::Uniform { lo, hi } => KappaSampler::Interval { a: a.max(*lo), b: b.min(*hi) },
            Self::Lebesgue => KappaSampler::Interval { a: a.max(0.0), b },
            Self::Atoms(m) => {
                let pts: Vec<(f64, f64)> = m.atoms().iter().copied().filter(|p| p.0 >= a && p.0 < b).collect();
                KappaSampler::discrete(pts)
            }
            Self::Grid(g) => {
                let pts: Vec<(f64, f64)> = g
                    .node_masses()
                    .map(|(u, m)| (u.exp(), m))
                    .filter(|&(s, m)| m > 0.0 && s >= a && s < b)
                    .collect();
                KappaSampler::discrete(pts)
            }
        })
    }

    /// Quadrature `(s, weight)` of `kappa` with about `n` nodes.
    ///
    /// Lognormal: `n` equal cells in `log s` over `mu +- 8 sigma`, node at the
    /// cell midpoint, weight the exact cell mass. Uniform: `n` equal cells in
    /// `s`. Atoms and grids use their own nodes.
    pub fn quadrature(&self, n: usize) -> Result<Vec<(f64, f64)>> {
        if n == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
        }
        Ok(match self {
            Self::LogNormal { mu, sigma } => {
                let (lo, hi) = (mu - 8.0 * sigma, mu + 8.0 * sigma);
                let du = (hi - lo) / n as f64;
                (0..n)
                    .map(|i| {
                        let (u0, u1) = (lo + i as f64 * du, lo + (i + 1) as f64 * du);
                        let (c0, c1) = if i == 0 { (0.0, normal_cdf((u1 - mu) / sigma)) } else if i == n - 1 {
                            (normal_cdf((u0 - mu) / sigma), 1.0)
                        } else {
                            (normal_cdf((u0 - mu) / sigma), normal_cdf((u1 - mu) / sigma))
                        };
                        ((0.5 * (u0 + u1)).exp(), c1 - c0)
                    })
                    .collect()
            }
            Self::Uniform { lo, hi } => {
                let ds = (hi - lo) / n as f64;
                (0..n).map(|i| (lo + (i as f64 + 0.5) * ds, 1.0 / n as f64)).collect()
            }
            Self::Atoms(m) => m.atoms().to_vec(),
            Self::Grid(g) => g.node_masses().filter(|p| p.1 > 0.0).map(|(u, m)| (u.exp(), m)).collect(),
            Self::Lebesgue => return Err(Error::ImproperKappa("Lebesgue kappa has no finite quadrature".into())),
        })
    }
}

/// Inverse-CDF sampler for a restricted `kappa`.
#[derive(Debug, Clone, PartialEq)]
pub enum KappaSampler {
    LogNormal { mu: f64, sigma: f64, p0: f64, p1: f64 },
    Interval { a: f64, b: f64 },
    Discrete { points: Vec<f64>, cumulative: Vec<f64> },
}

impl KappaSampler {
    fn discrete(pts: Vec<(f64, f64)>) -> Self {
        let mut total = 0.0;
        let cumulative = pts
            .iter()
            .map(|p| {
                total += p.1;
                total
            })
            .collect();
        Self::Discrete { points: pts.iter().map(|p| p.0).collect(), cumulative }
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        let v: f64 = rng.random();
        match self {
            Self::LogNormal { mu, sigma, p0, p1 } => {
                let p = (p0 + v * (p1 - p0)).clamp(1e-300, 1.0 - 1e-16);
                (mu + sigma * normal_quantile(p)).exp()
            }
            Self::Interval { a, b } => a + v * (b - a),
            Self::Discrete { points, cumulative } => {
                let target = v * cumulative[cumulative.len() - 1];
                let i = cumulative.partition_point(|c| *c <= target).min(points.len() - 1);
                points[i]
            }
        }
    }
}
