use alloc::format;
use alloc::vec;
#[allow(unused_imports)]
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{AtomicMeasure, Domain, GridDensity, GridSpec, TrigPoly};
use crate::error::{Error, Result};
use crate::fft;

const CLAMP_REL: f64 = 1e-12;

fn same_cell_width(f: &GridDensity, g: &GridDensity) -> bool {
    let (a, b) = (f.cell_width(), g.cell_width());
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

fn clamp_negatives(values: &mut [f64]) -> Result<()> {
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = CLAMP_REL * peak;
    for (i, v) in values.iter_mut().enumerate() {
        if *v < 0.0 {
            if -*v > tol {
                return Err(Error::NegativeConvolution { index: i, value: *v });
            }
            *v = 0.0;
        }
    }
    Ok(())
}

/// Convolution of two grid densities of the same chart and grid count.
///
/// On the circle this is circular convolution on the same grid. On the line
/// charts the output window is the Minkowski sum `[lo_f + lo_g, hi_f + hi_g)`
/// with `2N` nodes and the inputs must share a cell width.
pub fn convolve(f: &GridDensity, g: &GridDensity) -> Result<GridDensity> {
    if f.domain() != g.domain() {
        return Err(Error::DomainMismatch(format!(
            "cannot convolve {} with {}",
            f.domain().name(),
            g.domain().name()
        )));
    }
    if f.grid_count() != g.grid_count() || !same_cell_width(f, g) {
        return Err(Error::DomainMismatch("convolution needs equal grid counts and cell widths".into()));
    }
    let dx = f.cell_width();
    match f.domain() {
        Domain::Circle => {
            let mut out = fft::circular_convolve(f.values(), g.values());
            out.iter_mut().for_each(|v| *v *= dx);
            clamp_negatives(&mut out)?;
            GridDensity::new(*f.spec(), out)
        }
        Domain::RealLine | Domain::PosRealsLog => {
            let mut out = fft::linear_convolve(f.values(), g.values());
            out.iter_mut().for_each(|v| *v *= dx);
            clamp_negatives(&mut out)?;
            let (flo, fhi) = f.window();
            let (glo, ghi) = g.window();
            let n = out.len();
            let spec = GridSpec::new(f.domain(), flo + glo, fhi + ghi, n)?;
            GridDensity::new(spec, out)
        }
    }
}

/// Convolution cropped to `target` (same cell width, aligned nodes). Returns
/// the cropped density and the fraction of the full convolution's mass kept.
pub fn convolve_within(f: &GridDensity, g: &GridDensity, target: GridSpec) -> Result<(GridDensity, f64)> {
    let full = convolve(f, g)?;
    if full.domain() == Domain::Circle {
        return Ok((full, 1.0));
    }
    let total = full.mass();
    let (cropped, lost) = full.rewindow(target.lo, target.count)?;
    let retained = if total > 0.0 { 1.0 - lost / total } else { 1.0 };
    Ok((cropped, retained))
}

/// Maps whose image measures are supported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapKind {
    /// `x -> s x` on the line; multiplicative translation on the positive reals.
    Scale(f64),
    /// `t -> e^t`, real line to the positive reals (a relabel in the log chart).
    Exp,
    /// `t -> t mod 1`, real line to the circle.
    Mod1,
    /// `x -> -x`.
    Negate,
}

fn incompatible(op: &'static str, domain: Domain) -> Error {
    Error::IncompatibleDomain { op, detail: format!("not defined on {}", domain.name()) }
}

fn negate_grid(m: &GridDensity) -> Result<GridDensity> {
    let n = m.grid_count();
    match m.domain() {
        Domain::Circle => {
            let v = m.values();
            let out = (0..n).map(|i| v[(n - i) % n]).collect();
            GridDensity::new(*m.spec(), out)
        }
        Domain::RealLine => {
            // node lo + i dx maps to -lo - i dx = (dx - hi) + (N - 1 - i) dx
            let dx = m.cell_width();
            let (lo, hi) = m.window();
            let spec = GridSpec::new(Domain::RealLine, dx - hi, dx - lo, n)?;
            let out = m.values().iter().rev().copied().collect();
            GridDensity::new(spec, out)
        }
        Domain::PosRealsLog => Err(incompatible("negate", Domain::PosRealsLog)),
    }
}

/// Image of a grid density. Scaling rescales the window (values divided by
/// `|s|`), so no interpolation happens and mass is preserved exactly.
pub fn pushforward_grid(m: &GridDensity, map: MapKind) -> Result<GridDensity> {
    match map {
        MapKind::Scale(s) => {
            if s == 0.0 || !s.is_finite() {
                return Err(Error::InvalidArgument(format!("scale factor {s} must be finite and nonzero")));
            }
            match m.domain() {
                Domain::Circle => {
                    if s == 1.0 {
                        Ok(m.clone())
                    } else if s == -1.0 {
                        negate_grid(m)
                    } else {
                        Err(Error::IncompatibleDomain {
                            op: "scale",
                            detail: format!("scaling by {s} is not defined on the circle"),
                        })
                    }
                }
                Domain::RealLine => {
                    let base = if s < 0.0 { negate_grid(m)? } else { m.clone() };
                    let a = s.abs();
                    if a == 1.0 {
                        return Ok(base);
                    }
                    let (lo, hi) = base.window();
                    let spec = GridSpec::new(Domain::RealLine, a * lo, a * hi, base.grid_count())?;
                    GridDensity::new(spec, base.values().iter().map(|v| v / a).collect())
                }
                Domain::PosRealsLog => {
                    if s < 0.0 {
                        return Err(Error::IncompatibleDomain {
                            op: "scale",
                            detail: "negative factor leaves the positive reals".into(),
                        });
                    }
                    if s == 1.0 {
                        return Ok(m.clone());
                    }
                    let shift = s.ln();
                    let (lo, hi) = m.window();
                    let spec = GridSpec::new(Domain::PosRealsLog, lo + shift, hi + shift, m.grid_count())?;
                    GridDensity::new(spec, m.values().to_vec())
                }
            }
        }
        MapKind::Negate => negate_grid(m),
        MapKind::Exp => match m.domain() {
            Domain::RealLine => m.relabeled(Domain::PosRealsLog),
            d => Err(incompatible("exp", d)),
        },
        MapKind::Mod1 => {
            if m.domain() != Domain::RealLine {
                return Err(incompatible("mod1", m.domain()));
            }
            let dx = m.cell_width();
            let per_unit = (1.0 / dx).round();
            if ((1.0 / dx) - per_unit).abs() > 1e-9 || !(per_unit as usize).is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "mod1 needs a power-of-two number of nodes per unit length, got {}",
                    1.0 / dx
                )));
            }
            let (lo, _) = m.window();
            let start = lo / dx;
            if (start - start.round()).abs() > 1e-9 {
                return Err(Error::InvalidGrid("mod1 needs nodes on the lattice dx * Z".into()));
            }
            let count = per_unit as usize;
            let start = start.round() as i64;
            let mut out = vec![0.0; count];
            for (i, v) in m.values().iter().enumerate() {
                out[(start + i as i64).rem_euclid(count as i64) as usize] += v;
            }
            GridDensity::new(GridSpec::circle(count)?, out)
        }
    }
}

/// Image of an atomic measure; positions are mapped pointwise.
pub fn pushforward_atoms(m: &AtomicMeasure, map: MapKind) -> Result<AtomicMeasure> {
    match map {
        MapKind::Scale(s) => {
            if s == 0.0 || !s.is_finite() {
                return Err(Error::InvalidArgument(format!("scale factor {s} must be finite and nonzero")));
            }
            m.map_positions(|p| s * p)
        }
        MapKind::Negate => m.map_positions(|p| -p),
        MapKind::Exp => m.map_positions(|p| p.exp()),
        MapKind::Mod1 => m.map_positions(|p| crate::special::rem_euclid(p, 1.0)),
    }
}

/// Borrowed view of any measure representation.
#[derive(Debug, Clone, Copy)]
pub enum MeasureRef<'a> {
    Grid(&'a GridDensity),
    Atoms(&'a AtomicMeasure),
    Trig(&'a TrigPoly),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformArg {
    /// Characteristic-function argument, `int e^{i t x} dm(x)`.
    Real(f64),
    /// Circle Fourier coefficient, `int z^{-n} dm`.
    Integer(i64),
}

/// Fourier transform of a measure.
///
/// Line charts use `int e^{i t x} dm(x)` (in the log chart `x` is the log
/// coordinate). Circle measures use `int e^{-2 pi i n theta} dm(theta)`, which
/// for a trigonometric polynomial density is the coefficient of `z^n`.
pub fn transform_eval(m: MeasureRef<'_>, arg: TransformArg) -> Result<Complex64> {
    let two_pi = 2.0 * core::f64::consts::PI;
    match (m, arg) {
        (MeasureRef::Grid(g), TransformArg::Real(t)) if g.domain() != Domain::Circle => {
            Ok(g.node_masses().map(|(x, w)| Complex64::from_polar(w, t * x)).sum())
        }
        (MeasureRef::Grid(g), TransformArg::Integer(n)) if g.domain() == Domain::Circle => {
            let count = g.grid_count() as i64;
            let dx = g.cell_width();
            Ok(g.values()
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(k, v)| {
                    // reduce n*k mod N first so the phase stays accurate for large n
                    let r = ((n.rem_euclid(count)) * k as i64).rem_euclid(count);
                    Complex64::from_polar(v * dx, -two_pi * r as f64 / count as f64)
                })
                .sum())
        }
        (MeasureRef::Atoms(a), TransformArg::Real(t)) => Ok(a.characteristic(t)),
        (MeasureRef::Atoms(a), TransformArg::Integer(n)) => Ok(a.circle_coefficient(n)),
        (MeasureRef::Trig(p), TransformArg::Integer(n)) => Ok(p.coeff(n)),
        _ => Err(Error::InvalidArgument("transform argument type does not match the measure's domain".into())),
    }
}

fn check_same_grid(f: &GridDensity, g: &GridDensity) -> Result<()> {
    if !f.spec().same_geometry(g.spec()) {
        return Err(Error::DomainMismatch("densities live on different grids".into()));
    }
    Ok(())
}

/// `int sqrt(f g)` by Riemann sum, without normalization checks.
pub fn affinity_raw(f: &GridDensity, g: &GridDensity) -> Result<f64> {
    check_same_grid(f, g)?;
    let sum: f64 = f.values().iter().zip(g.values()).map(|(a, b)| (a * b).sqrt()).sum();
    Ok(sum * f.cell_width())
}

/// Hellinger affinity of two probability densities on the same grid.
///
/// 0 signals mutual singularity at grid resolution, 1 equality.
pub fn hellinger_affinity(f: &GridDensity, g: &GridDensity) -> Result<f64> {
    check_same_grid(f, g)?;
    for m in [f, g] {
        if (m.mass() - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { mass: m.mass() });
        }
    }
    Ok(affinity_raw(f, g)?.min(1.0))
}

/// `(m + negate(m)) / 2` on the line, placed on a window `[-L, L)`.
///
/// A window that is already of that form (with an empty unpaired node) is
/// kept; otherwise the grid is extended on the same node lattice.
pub fn symmetrize(m: &GridDensity) -> Result<GridDensity> {
    if m.domain() != Domain::RealLine {
        return Err(incompatible("symmetrize", m.domain()));
    }
    if m.spec().is_symmetric() && m.values()[0] == 0.0 {
        return m.mirror_average();
    }
    let dx = m.cell_width();
    let (lo, hi) = m.window();
    let start = lo / dx;
    if (start - start.round()).abs() > 1e-9 {
        return Err(Error::InvalidGrid("symmetrize needs nodes on the lattice dx * Z".into()));
    }
    let half_cells = ((-lo).max(hi) / dx).ceil() as usize + 1;
    let count = (2 * half_cells).next_power_of_two();
    let big_lo = -(count as f64 / 2.0) * dx;
    let (wide, lost) = m.rewindow(big_lo, count)?;
    debug_assert!(lost == 0.0);
    wide.mirror_average()
}
