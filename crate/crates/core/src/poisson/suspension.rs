use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng as _;
use rand_distr::{Distribution, Poisson};

use super::Kappa;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

/// Finite window `[s_lo, s_hi) x [y_lo, y_hi) x Z` of the product space.
///
/// `y = None` drops the middle coordinate (points then carry `y = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub s_lo: f64,
    pub s_hi: f64,
    pub y: Option<(f64, f64)>,
    /// Circumference `L` of the base circle.
    pub circumference: f64,
}

impl Window {
    pub fn new(s_lo: f64, s_hi: f64, y: Option<(f64, f64)>, circumference: f64) -> Result<Self> {
        if !(s_lo > 0.0 && s_hi >= s_lo && s_hi.is_finite()) {
            return Err(Error::InvalidArgument(format!("s range [{s_lo}, {s_hi}) must satisfy 0 < s_lo <= s_hi")));
        }
        if let Some((a, b)) = y {
            if !(a.is_finite() && b.is_finite() && b >= a) {
                return Err(Error::InvalidArgument(format!("y range [{a}, {b}) is invalid")));
            }
        }
        if !(circumference > 0.0 && circumference.is_finite()) {
            return Err(Error::InvalidArgument(format!("circumference {circumference} must be positive")));
        }
        Ok(Self { s_lo, s_hi, y, circumference })
    }

    pub fn y_length(&self) -> f64 {
        self.y.map(|(a, b)| b - a).unwrap_or(1.0)
    }

    pub fn contains(&self, p: &Point) -> bool {
        let y_ok = self.y.map(|(a, b)| p.y >= a && p.y < b).unwrap_or(true);
        p.s >= self.s_lo && p.s < self.s_hi && y_ok && p.z >= 0.0 && p.z < self.circumference
    }
}

/// `kappa` together with the window it is observed through.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductFlowSpec {
    pub kappa: Kappa,
    pub window: Window,
}

impl ProductFlowSpec {
    pub fn new(kappa: Kappa, window: Window) -> Result<Self> {
        kappa.validate()?;
        Ok(Self { kappa, window })
    }

    /// Intensity mass `kappa([s_lo, s_hi)) |y range| L` of the window.
    pub fn intensity_mass(&self) -> f64 {
        let w = &self.window;
        self.kappa.mass_in(w.s_lo, w.s_hi) * w.y_length() * w.circumference
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub s: f64,
    pub y: f64,
    pub z: f64,
}

/// Finite counting configuration; duplicates are allowed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointConfig {
    pub points: Vec<Point>,
}

impl PointConfig {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn count_where(&self, f: impl Fn(&Point) -> bool) -> u64 {
        self.points.iter().filter(|p| f(p)).count() as u64
    }
}

pub(crate) fn sample_with(spec: &ProductFlowSpec, rng: &mut Rng) -> Result<PointConfig> {
    let mu = spec.intensity_mass();
    if !mu.is_finite() {
        return Err(Error::InvalidArgument(format!("window intensity {mu} is not finite")));
    }
    if mu <= 0.0 {
        return Ok(PointConfig::default());
    }
    let count = Poisson::new(mu)
        .map_err(|e| Error::InvalidArgument(format!("poisson intensity {mu}: {e}")))?
        .sample(rng) as usize;
    let w = spec.window;
    let sampler = spec.kappa.sampler(w.s_lo, w.s_hi)?;
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let s = sampler.sample(rng);
        let y = match w.y {
            Some((a, b)) => a + rng.random::<f64>() * (b - a),
            None => 0.0,
        };
        let z = rng.random::<f64>() * w.circumference;
        points.push(Point { s, y, z });
    }
    Ok(PointConfig { points })
}

/// Poisson configuration in the window: count `~ Poisson(mu(W))`, points
/// i.i.d. from the normalized intensity. A window of zero intensity gives
/// the empty configuration.
pub fn sample_poisson(spec: &ProductFlowSpec, seed: u64) -> Result<PointConfig> {
    sample_with(spec, &mut rng_from_seed(seed))
}

fn wrap(z: f64, l: f64) -> f64 {
    let r = crate::special::rem_euclid(z, l);
    if r >= l {
        0.0
    } else {
        r
    }
}

/// `(s, y, z) -> (s, y, (z + s t) mod L)`.
pub fn apply_flow(cfg: &PointConfig, t: f64, circumference: f64) -> PointConfig {
    PointConfig {
        points: cfg.points.iter().map(|p| Point { z: wrap(p.z + p.s * t, circumference), ..*p }).collect(),
    }
}

/// `(s, y, z) -> (h s, y D(s), z)` with `D` the density ratio of `kappa`.
pub fn q_transform(kappa: &Kappa, h: f64, cfg: &PointConfig) -> Result<PointConfig> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("h = {h} must be positive")));
    }
    let points = cfg
        .points
        .iter()
        .map(|p| Ok(Point { s: h * p.s, y: p.y * kappa.density_ratio(p.s, h)?, z: p.z }))
        .collect::<Result<Vec<_>>>()?;
    Ok(PointConfig { points })
}
