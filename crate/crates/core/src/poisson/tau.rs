use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::Kappa;
use crate::error::{Error, Result};
use crate::measure::{affinity_raw, pushforward_grid, Domain, GridDensity, GridSpec, MapKind, MeasureRef};

#[derive(Debug, Clone, PartialEq)]
pub struct TauResult {
    pub tau: GridDensity,
    /// Mass that fell outside the target window.
    pub lost_mass: f64,
    /// `(s, affinity(sigma_V, sigma_V scaled by s))` for sampled nodes `s != 1`.
    pub orthogonality: Vec<(f64, f64)>,
}

/// Adds `amount` (density units) at `x`, split linearly between the two
/// bracketing nodes. Returns whether `x` fell inside the window.
fn splat(spec: &GridSpec, values: &mut [f64], x: f64, amount: f64) -> bool {
    let n = spec.count;
    let p = (x - spec.lo) / spec.cell_width();
    let r = p.round();
    let p = if (p - r).abs() < 1e-9 { r } else { p };
    if !(p >= 0.0) || p > (n - 1) as f64 {
        return false;
    }
    let i = p.floor() as usize;
    let f = p - i as f64;
    if f == 0.0 {
        values[i] += amount;
    } else {
        values[i] += (1.0 - f) * amount;
        values[i + 1] += f * amount;
    }
    true
}

fn scaled_affinity(sigma: MeasureRef<'_>, s: f64) -> Result<f64> {
    match sigma {
        MeasureRef::Grid(g) => {
            let image = pushforward_grid(g, MapKind::Scale(s))?.resample(*g.spec())?;
            let norm = (g.mass() * image.mass()).sqrt();
            Ok(if norm > 0.0 { (affinity_raw(g, &image)? / norm).min(1.0) } else { 0.0 })
        }
        MeasureRef::Atoms(a) => {
            let same = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs());
            let total: f64 = a
                .atoms()
                .iter()
                .map(|&(x, w)| {
                    let v = a.atoms().iter().find(|p| same(p.0, s * x)).map(|p| p.1).unwrap_or(0.0);
                    (w * v).sqrt()
                })
                .sum();
            Ok((total / a.mass()).min(1.0))
        }
        MeasureRef::Trig(_) => unreachable!(),
    }
}

/// `tau = sum_i w_i (sigma_V scaled by s_i)` over the quadrature nodes
/// `(s_i, w_i)` of `kappa`, rasterized onto `target`.
///
/// Nodes must lie in the support of `kappa`. Up to `report` nodes with
/// `s != 1` also get an affinity between `sigma_V` and its scaled copy.
pub fn tau_spectral(
    sigma_v: MeasureRef<'_>,
    kappa: &Kappa,
    nodes: &[(f64, f64)],
    target: GridSpec,
    report: usize,
) -> Result<TauResult> {
    if target.domain != Domain::RealLine {
        return Err(Error::IncompatibleDomain { op: "tau_spectral", detail: "target must be a real-line grid".into() });
    }
    let mass = match sigma_v {
        MeasureRef::Grid(g) if g.domain() == Domain::RealLine => g.mass(),
        MeasureRef::Atoms(a) => a.mass(),
        _ => {
            return Err(Error::IncompatibleDomain {
                op: "tau_spectral",
                detail: "sigma_V must be a line grid or an atomic measure".into(),
            })
        }
    };
    if (mass - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { mass });
    }
    for &(s, w) in nodes {
        if !(s > 0.0) || !kappa.contains(s) {
            return Err(Error::NodeOutsideSupport { s });
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!("quadrature weight {w} at s = {s}")));
        }
    }
    let dx = target.cell_width();
    let mut values = vec![0.0; target.count];
    let mut lost = 0.0;
    for &(s, w) in nodes {
        match sigma_v {
            MeasureRef::Grid(g) => {
                // density carried over as node mass per target cell
                let ratio = w * (g.cell_width() / dx);
                for (i, v) in g.values().iter().enumerate() {
                    if *v > 0.0 && !splat(&target, &mut values, s * g.node(i), ratio * v) {
                        lost += w * v * g.cell_width();
                    }
                }
            }
            MeasureRef::Atoms(a) => {
                for &(x, m) in a.atoms() {
                    if !splat(&target, &mut values, s * x, w * m / dx) {
                        lost += w * m;
                    }
                }
            }
            MeasureRef::Trig(_) => unreachable!(),
        }
    }
    let tau = GridDensity::new(target, values)?;
    let candidates: Vec<f64> = nodes.iter().map(|p| p.0).filter(|s| (s - 1.0).abs() > 1e-12).collect();
    let picks = report.min(candidates.len());
    let mut orthogonality = Vec::with_capacity(picks);
    for k in 0..picks {
        let s = candidates[k * candidates.len() / picks];
        orthogonality.push((s, scaled_affinity(sigma_v, s)?));
    }
    Ok(TauResult { tau, lost_mass: lost, orthogonality })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::AtomicMeasure;

    #[test]
    fn dirac_kappa_is_identity() {
        let spec = GridSpec::new(Domain::RealLine, -4.0, 4.0, 256).unwrap();
        let g = GridDensity::from_fn(spec, |x| (-x * x).exp()).unwrap().normalized().unwrap();
        let k = Kappa::Atoms(AtomicMeasure::dirac(1.0));
        let r = tau_spectral(MeasureRef::Grid(&g), &k, &k.quadrature(1).unwrap(), spec, 4).unwrap();
        assert_eq!(r.tau, g);
        assert!(r.orthogonality.is_empty());
    }

    #[test]
    fn atom_under_uniform_kappa() {
        let k = Kappa::Uniform { lo: 1.0, hi: 2.0 };
        let atom = AtomicMeasure::dirac(1.0);
        let spec = GridSpec::new(Domain::RealLine, 0.0, 4.0, 1024).unwrap();
        let r = tau_spectral(MeasureRef::Atoms(&atom), &k, &k.quadrature(256).unwrap(), spec, 3).unwrap();
        assert!((r.tau.mass() - 1.0).abs() < 1e-12);
        assert_eq!(r.lost_mass, 0.0);
        for x in [1.25, 1.5, 1.75] {
            assert!((r.tau.value_at(x) - 1.0).abs() < 1e-9, "density at {x}");
        }
        assert!(r.orthogonality.iter().all(|p| p.1 == 0.0));
    }

    #[test]
    fn nodes_must_be_in_support() {
        let k = Kappa::Uniform { lo: 1.0, hi: 2.0 };
        let atom = AtomicMeasure::dirac(1.0);
        let spec = GridSpec::new(Domain::RealLine, 0.0, 4.0, 64).unwrap();
        let bad = tau_spectral(MeasureRef::Atoms(&atom), &k, &[(3.0, 1.0)], spec, 0);
        assert!(matches!(bad, Err(Error::NodeOutsideSupport { .. })));
    }
}
