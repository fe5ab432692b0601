use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Chart a grid density lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// The circle `R/Z`, window fixed to `[0, 1)`, periodic.
    Circle,
    /// The real line.
    RealLine,
    /// The multiplicative positive reals in the chart `t = ln s`; a
    /// multiplicative translation by `h` is an additive shift by `ln h`.
    PosRealsLog,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Circle => "circle-unit",
            Domain::RealLine => "real-line",
            Domain::PosRealsLog => "pos-reals-log",
        }
    }
}

/// Geometry of a uniform grid: `count` nodes `lo + i * (hi - lo) / count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub domain: Domain,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(domain: Domain, lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count == 0 || !count.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("grid count {count} is not a power of two")));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidGrid(format!("window [{lo}, {hi}) is empty or not finite")));
        }
        if domain == Domain::Circle && (lo != 0.0 || hi != 1.0) {
            return Err(Error::InvalidGrid(format!("circle window must be [0, 1), got [{lo}, {hi})")));
        }
        Ok(Self { domain, lo, hi, count })
    }

    pub fn circle(count: usize) -> Result<Self> {
        Self::new(Domain::Circle, 0.0, 1.0, count)
    }

    pub fn cell_width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.cell_width()
    }

    /// Fractional node coordinate of `x`, snapped to an integer when within
    /// `1e-9` of one so that exactly representable nodes land exactly.
    pub(crate) fn position(&self, x: f64) -> f64 {
        let p = (x - self.lo) / self.cell_width();
        let r = p.round();
        if (p - r).abs() < 1e-9 {
            r
        } else {
            p
        }
    }

    /// Index of the node at `x`, if `x` is (to 1e-9 cells) a node of this grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let p = self.position(x);
        if p.fract() == 0.0 && p >= 0.0 && (p as usize) < self.count {
            Some(p as usize)
        } else {
            None
        }
    }

    pub fn same_geometry(&self, other: &GridSpec) -> bool {
        let tol = 1e-12 * (self.hi - self.lo).abs().max(1.0);
        self.domain == other.domain
            && self.count == other.count
            && (self.lo - other.lo).abs() <= tol
            && (self.hi - other.hi).abs() <= tol
    }

    /// `[-L, L)` windows have mirror pairs `i <-> count - i`; node 0 is unpaired.
    pub fn is_symmetric(&self) -> bool {
        (self.lo + self.hi).abs() <= 1e-12 * self.hi.abs().max(1.0)
    }
}

/// Nonnegative density sampled at the nodes of a uniform grid.
///
/// The mass is the Riemann sum `cell_width * sum(values)`. Atoms are
/// represented by depositing `weight / cell_width` onto the nearest nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    spec: GridSpec,
    values: Vec<f64>,
    mass: f64,
}

impl GridDensity {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.count {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                spec.count
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidGrid(format!("value {v} at node {i} is negative or not finite")));
        }
        let mass = spec.cell_width() * values.iter().sum::<f64>();
        Ok(Self { spec, values, mass })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self { spec, values: vec![0.0; spec.count], mass: 0.0 }
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..spec.count).map(|i| f(spec.node(i))).collect();
        Self::new(spec, values)
    }

    /// Probability density of the uniform law on the nodes in `[a, b)`.
    pub fn uniform(spec: GridSpec, a: f64, b: f64) -> Result<Self> {
        let (pa, pb) = (spec.position(a), spec.position(b));
        let inside: Vec<bool> = (0..spec.count).map(|i| (i as f64) >= pa && (i as f64) < pb).collect();
        let count = inside.iter().filter(|b| **b).count();
        if count == 0 {
            return Err(Error::InvalidArgument(format!("no grid node inside [{a}, {b})")));
        }
        let height = 1.0 / (count as f64 * spec.cell_width());
        let values = inside.into_iter().map(|b| if b { height } else { 0.0 }).collect();
        Self::new(spec, values)
    }

    /// Rasterized point mass `weight * delta_x`.
    pub fn point_mass(spec: GridSpec, x: f64, weight: f64) -> Result<Self> {
        let mut values = vec![0.0; spec.count];
        let lost = deposit(&spec, &mut values, x, weight);
        if lost > 0.0 {
            return Err(Error::InvalidArgument(format!("point {x} outside window [{}, {})", spec.lo, spec.hi)));
        }
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn domain(&self) -> Domain {
        self.spec.domain
    }

    pub fn window(&self) -> (f64, f64) {
        (self.spec.lo, self.spec.hi)
    }

    pub fn grid_count(&self) -> usize {
        self.spec.count
    }

    pub fn cell_width(&self) -> f64 {
        self.spec.cell_width()
    }

    pub fn node(&self, i: usize) -> f64 {
        self.spec.node(i)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Mass carried by each node, `value * cell_width`.
    pub fn node_masses(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let dx = self.cell_width();
        self.values.iter().enumerate().map(move |(i, v)| (self.node(i), v * dx))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.spec, self.values.iter().map(|v| v * factor).collect())
    }

    pub fn normalized(&self) -> Result<Self> {
        if !(self.mass > 0.0) {
            return Err(Error::NotNormalized { mass: self.mass });
        }
        self.scaled(1.0 / self.mass)
    }

    /// Same values, relabeled to another chart with identical window.
    pub(crate) fn relabeled(&self, domain: Domain) -> Result<Self> {
        let spec = GridSpec::new(domain, self.spec.lo, self.spec.hi, self.spec.count)?;
        Self::new(spec, self.values.clone())
    }

    /// Linear interpolation between nodes; periodic on the circle, zero
    /// outside the window elsewhere (the node at `hi` is taken as zero).
    pub fn value_at(&self, x: f64) -> f64 {
        let n = self.spec.count;
        let mut p = self.spec.position(x);
        if self.spec.domain == Domain::Circle {
            p = crate::special::rem_euclid(p, n as f64);
        }
        if !(p >= 0.0) || p > n as f64 {
            return 0.0;
        }
        let i0 = p.floor() as usize;
        let frac = p - i0 as f64;
        let get = |i: usize| -> f64 {
            if self.spec.domain == Domain::Circle {
                self.values[i % n]
            } else if i < n {
                self.values[i]
            } else {
                0.0
            }
        };
        if frac == 0.0 {
            get(i0)
        } else {
            (1.0 - frac) * get(i0) + frac * get(i0 + 1)
        }
    }

    /// Linear-interpolation resampling onto another grid of the same chart.
    pub fn resample(&self, target: GridSpec) -> Result<Self> {
        if target.domain != self.spec.domain {
            return Err(Error::DomainMismatch(format!(
                "cannot resample {} onto {}",
                self.spec.domain.name(),
                target.domain.name()
            )));
        }
        if target.same_geometry(&self.spec) {
            return Ok(Self { spec: target, ..self.clone() });
        }
        Self::from_fn(target, |x| self.value_at(x))
    }

    /// Copy onto a window with the same cell width whose nodes are aligned
    /// with this grid's nodes. Returns the new density and the mass that fell
    /// outside the new window.
    pub fn rewindow(&self, lo: f64, count: usize) -> Result<(Self, f64)> {
        let dx = self.cell_width();
        let spec = GridSpec::new(self.spec.domain, lo, lo + dx * count as f64, count)?;
        let offset = (lo - self.spec.lo) / dx;
        let shift = offset.round();
        if (offset - shift).abs() > 1e-9 {
            return Err(Error::InvalidGrid(format!("window start {lo} is not aligned with the node lattice")));
        }
        let shift = shift as i64;
        let mut values = vec![0.0; count];
        let mut lost = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let j = i as i64 - shift;
            if j >= 0 && (j as usize) < count {
                values[j as usize] = *v;
            } else {
                lost += v * dx;
            }
        }
        Ok((Self::new(spec, values)?, lost))
    }

    /// Replace `v[i]` and `v[N - i]` by their average; node 0 (unpaired) is
    /// halved. Requires a `[-L, L)` window on the real line.
    pub(crate) fn mirror_average(&self) -> Result<Self> {
        if !self.spec.is_symmetric() {
            return Err(Error::InvalidGrid("mirror average needs a window [-L, L)".into()));
        }
        let n = self.spec.count;
        let mut out = vec![0.0; n];
        out[0] = 0.5 * self.values[0];
        for i in 1..n {
            out[i] = 0.5 * (self.values[i] + self.values[n - i]);
        }
        Self::new(self.spec, out)
    }

    /// Exact mirror symmetry on a `[-L, L)` window.
    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.spec.count;
        self.spec.is_symmetric() && self.values[0] == 0.0 && (1..n).all(|i| self.values[i] == self.values[n - i])
    }
}

/// Cloud-in-cell deposit of `mass` at `x`: split between the two bracketing
/// nodes so that mass and first moment are preserved. Returns the mass that
/// could not be placed inside the window.
pub(crate) fn deposit(spec: &GridSpec, values: &mut [f64], x: f64, mass: f64) -> f64 {
    let n = spec.count;
    let dx = spec.cell_width();
    let mut p = spec.position(x);
    if spec.domain == Domain::Circle {
        p = crate::special::rem_euclid(p, n as f64);
    }
    if !(p >= 0.0) || p > (n - 1) as f64 && spec.domain != Domain::Circle {
        return mass;
    }
    let i0 = p.floor() as usize;
    let frac = p - i0 as f64;
    if frac == 0.0 {
        values[i0 % n] += mass / dx;
    } else {
        values[i0 % n] += (1.0 - frac) * mass / dx;
        values[(i0 + 1) % n] += frac * mass / dx;
    }
    0.0
}
