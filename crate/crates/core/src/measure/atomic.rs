use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::grid::{deposit, GridDensity, GridSpec};
use crate::error::{Error, Result};

/// Finite purely atomic measure, atoms sorted by strictly increasing position.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    /// Sorts the atoms and merges coincident positions.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        for &(p, w) in &atoms {
            if !p.is_finite() || !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidArgument(format!("atom ({p}, {w}) needs finite position and positive weight")));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += w,
                _ => merged.push((p, w)),
            }
        }
        Ok(Self { atoms: merged })
    }

    pub fn dirac(x: f64) -> Self {
        Self { atoms: vec![(x, 1.0)] }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `m(-A) = m(A)` with exact weight equality.
    pub fn is_symmetric(&self) -> bool {
        let n = self.atoms.len();
        (0..n).all(|i| {
            let (p, w) = self.atoms[i];
            let (q, v) = self.atoms[n - 1 - i];
            p == -q && w == v
        })
    }

    pub(crate) fn map_positions(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.atoms.iter().map(|&(p, w)| (f(p), w)))
    }

    /// `sum_k w_k e^{i t x_k}`.
    pub fn characteristic(&self, t: f64) -> Complex64 {
        self.atoms.iter().map(|&(p, w)| Complex64::from_polar(w, t * p)).sum()
    }

    /// Circle convention `sum_k w_k e^{-2 pi i n x_k}`.
    pub fn circle_coefficient(&self, n: i64) -> Complex64 {
        let two_pi = 2.0 * core::f64::consts::PI;
        self.atoms
            .iter()
            .map(|&(p, w)| Complex64::from_polar(w, -two_pi * (n as f64) * crate::special::rem_euclid(p, 1.0)))
            .sum()
    }

    /// Deposit every atom onto `spec` (nearest-node split). Errors if an atom
    /// lies outside the window.
    pub fn rasterize(&self, spec: GridSpec) -> Result<GridDensity> {
        let mut values = vec![0.0; spec.count];
        for &(p, w) in &self.atoms {
            if deposit(&spec, &mut values, p, w) > 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "atom at {p} outside window [{}, {})",
                    spec.lo, spec.hi
                )));
            }
        }
        GridDensity::new(spec, values)
    }
}
