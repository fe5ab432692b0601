//! JSON shapes of the library types.

use num_bigint::BigUint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use selfsim_core::gaussian::DEFAULT_P_MAX;
use selfsim_core::lift::{build_sigma, standard_lift, LiftSpec, SigmaMeasure};
use selfsim_core::measure::{symmetrize, AtomicMeasure, Domain, GridDensity, GridSpec};
use selfsim_core::poisson::{Kappa, SubWindow, Window};
use selfsim_core::riesz::{Angle, RieszSpec};

use crate::error::CliError;

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Frequency given as a JSON number or as a decimal string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Frequency {
    Number(u64),
    Text(String),
}

impl Frequency {
    fn value(&self) -> Result<BigUint, CliError> {
        match self {
            Self::Number(n) => Ok(BigUint::from(*n)),
            Self::Text(s) => s.trim().parse().map_err(|_| config(format!("frequency {s:?} is not a nonnegative integer"))),
        }
    }
}

/// Weight given as a real number or as `[re, im]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weight {
    Real(f64),
    Complex([f64; 2]),
}

impl Weight {
    fn value(&self) -> Complex64 {
        match *self {
            Self::Real(r) => Complex64::new(r, 0.0),
            Self::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// `{"n": [...], "a": [...]}` or `{"family": "factorial", "J": 40}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RieszDto {
    #[serde(default)]
    pub n: Option<Vec<Frequency>>,
    #[serde(default)]
    pub a: Option<Vec<Weight>>,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default, rename = "J")]
    pub j: Option<usize>,
}

impl RieszDto {
    pub fn build(&self) -> Result<RieszSpec, CliError> {
        let weights = |len: usize| -> Result<Vec<Complex64>, CliError> {
            match &self.a {
                Some(a) if a.len() != len => Err(config(format!("{} weights for {len} frequencies", a.len()))),
                Some(a) => Ok(a.iter().map(Weight::value).collect()),
                None => Ok(vec![Complex64::new(1.0, 0.0); len]),
            }
        };
        match (&self.family, &self.n) {
            (Some(f), None) if f == "factorial" => {
                let j = self.j.ok_or_else(|| config("factorial family needs J"))?;
                Ok(RieszSpec::factorial_with_weights(weights(j)?)?)
            }
            (Some(f), None) => Err(config(format!("unknown family {f:?}"))),
            (None, Some(n)) => {
                let n = n.iter().map(Frequency::value).collect::<Result<Vec<_>, _>>()?;
                let spec = RieszSpec::new(n.clone(), weights(n.len())?)?;
                if let Some(j) = self.j {
                    if j != spec.len() {
                        return Err(config(format!("J = {j} but {} frequencies given", spec.len())));
                    }
                }
                Ok(spec)
            }
            _ => Err(config("a Riesz spec needs exactly one of \"n\" or \"family\"")),
        }
    }
}

/// Angle as a number, a `"p/q"` string, or `{"p": .., "q": ..}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleDto {
    Number(f64),
    Text(String),
    Fraction { p: i64, q: u64 },
}

impl AngleDto {
    pub fn build(&self) -> Result<Angle, CliError> {
        match self {
            Self::Number(x) => Ok(Angle::from_f64(*x)?),
            Self::Fraction { p, q } => Ok(Angle::rational(*p, *q)?),
            Self::Text(s) => {
                let (p, q) = s.split_once('/').ok_or_else(|| config(format!("angle {s:?} is not of the form p/q")))?;
                let p: i64 = p.trim().parse().map_err(|_| config(format!("bad numerator in {s:?}")))?;
                let q: u64 = q.trim().parse().map_err(|_| config(format!("bad denominator in {s:?}")))?;
                Ok(Angle::rational(p, q)?)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Number(x) => format!("{x}"),
            Self::Text(s) => s.clone(),
            Self::Fraction { p, q } => format!("{p}/{q}"),
        }
    }
}

fn line_spec(lo: f64, hi: f64, count: usize) -> Result<GridSpec, CliError> {
    Ok(GridSpec::new(Domain::RealLine, lo, hi, count)?)
}

fn gaussian_bump(center: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let z = (x - center) / width;
        (-0.5 * z * z).exp()
    }
}

/// Symmetric spectral measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SigmaDto {
    /// Symmetric atoms `[[x, w], ...]`.
    Atoms { atoms: Vec<[f64; 2]> },
    /// Uniform on `[-half_width, half_width]`, on the grid `[-window, window)`.
    Uniform {
        #[serde(default = "one")]
        half_width: f64,
        window: f64,
        #[serde(rename = "N")]
        n: usize,
    },
    /// Gaussian bumps at `+-center`, normalized.
    Bump {
        center: f64,
        width: f64,
        window: f64,
        #[serde(rename = "N")]
        n: usize,
    },
    /// Grid values on `[lo, hi)`; symmetrized and normalized.
    Grid { window: [f64; 2], values: Vec<f64> },
    /// Built from a Riesz product through the standard lift.
    Lift {
        source: RieszDto,
        #[serde(rename = "K")]
        k: usize,
        #[serde(rename = "J")]
        j: usize,
        nodes_per_unit: usize,
    },
}

fn one() -> f64 {
    1.0
}

impl SigmaDto {
    pub fn build(&self) -> Result<SigmaMeasure, CliError> {
        Ok(match self {
            Self::Atoms { atoms } => SigmaMeasure::atoms(AtomicMeasure::new(atoms.iter().map(|p| (p[0], p[1])))?)?,
            Self::Uniform { half_width, window, n } => {
                let g = GridDensity::uniform(line_spec(-window, *window, *n)?, -half_width, *half_width)?;
                SigmaMeasure::line(symmetrize(&g)?)?
            }
            Self::Bump { center, width, window, n } => {
                let spec = line_spec(-window, *window, *n)?;
                let (f, g) = (gaussian_bump(*center, *width), gaussian_bump(-center, *width));
                let d = GridDensity::from_fn(spec, |x| f(x) + g(x))?.normalized()?;
                SigmaMeasure::line(symmetrize(&d)?)?
            }
            Self::Grid { window, values } => {
                let d = GridDensity::new(line_spec(window[0], window[1], values.len())?, values.clone())?;
                SigmaMeasure::line(symmetrize(&d.normalized()?)?)?
            }
            Self::Lift { source, k, j, nodes_per_unit } => {
                let spec = LiftSpec::new(source.build()?, *k, *j, *nodes_per_unit)?;
                build_sigma(&standard_lift(&spec)?)?
            }
        })
    }
}

/// Measure on the line, not necessarily symmetric.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LineMeasureDto {
    Atoms { atoms: Vec<[f64; 2]> },
    Grid { window: [f64; 2], values: Vec<f64> },
    Uniform {
        lo: f64,
        hi: f64,
        window: [f64; 2],
        #[serde(rename = "N")]
        n: usize,
    },
    Bump {
        center: f64,
        width: f64,
        window: [f64; 2],
        #[serde(rename = "N")]
        n: usize,
    },
}

pub enum LineMeasure {
    Grid(GridDensity),
    Atoms(AtomicMeasure),
}

impl LineMeasureDto {
    pub fn build(&self) -> Result<LineMeasure, CliError> {
        Ok(match self {
            Self::Atoms { atoms } => LineMeasure::Atoms(AtomicMeasure::new(atoms.iter().map(|p| (p[0], p[1])))?),
            Self::Grid { window, values } => {
                LineMeasure::Grid(GridDensity::new(line_spec(window[0], window[1], values.len())?, values.clone())?)
            }
            Self::Uniform { lo, hi, window, n } => {
                LineMeasure::Grid(GridDensity::uniform(line_spec(window[0], window[1], *n)?, *lo, *hi)?)
            }
            Self::Bump { center, width, window, n } => LineMeasure::Grid(
                GridDensity::from_fn(line_spec(window[0], window[1], *n)?, gaussian_bump(*center, *width))?.normalized()?,
            ),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KappaDto {
    Lognormal { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Atoms `[[s, w], ...]`.
    Atoms { atoms: Vec<[f64; 2]> },
    /// Density in `u = log s` on `[lo, hi)`; normalized.
    Grid { window: [f64; 2], values: Vec<f64> },
    Lebesgue {},
}

impl KappaDto {
    pub fn build(&self) -> Result<Kappa, CliError> {
        let k = match self {
            Self::Lognormal { mu, sigma } => Kappa::LogNormal { mu: *mu, sigma: *sigma },
            Self::Uniform { lo, hi } => Kappa::Uniform { lo: *lo, hi: *hi },
            Self::Atoms { atoms } => Kappa::Atoms(AtomicMeasure::new(atoms.iter().map(|p| (p[0], p[1])))?),
            Self::Grid { window, values } => {
                let spec = GridSpec::new(Domain::PosRealsLog, window[0], window[1], values.len())?;
                Kappa::Grid(GridDensity::new(spec, values.clone())?.normalized()?)
            }
            Self::Lebesgue {} => Kappa::Lebesgue,
        };
        k.validate()?;
        Ok(k)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDto {
    pub s: [f64; 2],
    #[serde(default)]
    pub y: Option<[f64; 2]>,
}

impl WindowDto {
    pub fn build(&self, circumference: f64) -> Result<Window, CliError> {
        Ok(Window::new(self.s[0], self.s[1], self.y.map(|y| (y[0], y[1])), circumference)?)
    }
}

/// Box inside the window; `y` defaults to the window's range and `z` to the
/// whole circle.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubWindowDto {
    pub s: [f64; 2],
    #[serde(default)]
    pub y: Option<[f64; 2]>,
    #[serde(default)]
    pub z: Option<[f64; 2]>,
}

impl SubWindowDto {
    pub fn build(&self, circumference: f64) -> SubWindow {
        SubWindow {
            s: (self.s[0], self.s[1]),
            y: self.y.map(|y| (y[0], y[1])),
            z: self.z.map(|z| (z[0], z[1])).unwrap_or((0.0, circumference)),
        }
    }
}

pub fn default_p_max() -> usize {
    DEFAULT_P_MAX
}
