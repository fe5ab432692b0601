use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use super::Kappa;
use crate::error::{Error, Result};
use crate::lift::Verdict;

pub const DEFAULT_AFFINITY_THRESHOLD: f64 = 1e-3;
const UNION_NODES: usize = 8192;
const SUPPORT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaGroupResult {
    pub h: f64,
    pub affinity: f64,
    pub support_match: bool,
    pub verdict: Verdict,
}

/// Quasi-invariance evidence for `h`: the Hellinger affinity of `kappa` with
/// its image under `s -> h s` (a translation by `log h` in the log chart) and
/// whether the two supports agree.
pub fn kappa_group_test(kappa: &Kappa, h: f64, threshold: f64) -> Result<KappaGroupResult> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("h = {h} must be positive")));
    }
    kappa.validate()?;
    let shift = h.ln();
    let (affinity, support_match) = match kappa {
        Kappa::Lebesgue => {
            return Err(Error::ImproperKappa("affinity is undefined for an infinite measure".into()));
        }
        Kappa::Atoms(m) => {
            let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
            let weight_at = |s: f64| m.atoms().iter().find(|p| same(p.0, s)).map(|p| p.1).unwrap_or(0.0);
            let affinity: f64 = m.atoms().iter().map(|&(s, w)| (w * weight_at(s / h)).sqrt()).sum();
            let forward = m.atoms().iter().all(|&(s, _)| weight_at(h * s) > 0.0);
            let backward = m.atoms().iter().all(|&(s, _)| weight_at(s / h) > 0.0);
            (affinity, forward && backward)
        }
        _ => {
            let (lo, hi, du_hint) = match kappa {
                Kappa::LogNormal { mu, sigma } => (mu - 12.0 * sigma, mu + 12.0 * sigma, None),
                Kappa::Uniform { lo, hi } => (lo.ln(), hi.ln(), None),
                Kappa::Grid(g) => (g.window().0, g.window().1, Some(g.cell_width())),
                _ => unreachable!(),
            };
            let (a, b) = (lo.min(lo + shift), hi.max(hi + shift));
            let n = match du_hint {
                Some(du) => (((b - a) / du).ceil() as usize).max(UNION_NODES),
                None => UNION_NODES,
            };
            let du = (b - a) / n as f64;
            let mut sum = 0.0;
            let mut matched = true;
            for i in 0..n {
                let u = a + (i as f64 + 0.5) * du;
                let f = kappa.log_density(u).unwrap_or(0.0);
                let g = kappa.log_density(u - shift).unwrap_or(0.0);
                sum += (f * g).sqrt();
                if (f * du > SUPPORT_FLOOR) != (g * du > SUPPORT_FLOOR) {
                    matched = false;
                }
            }
            let support_match = match kappa {
                Kappa::LogNormal { .. } => true,
                Kappa::Uniform { .. } => h == 1.0,
                _ => matched,
            };
            (sum * du, support_match)
        }
    };
    let affinity = affinity.min(1.0);
    let verdict = if support_match && affinity > threshold { Verdict::MemberEvidence } else { Verdict::DivergenceEvidence };
    Ok(KappaGroupResult { h, affinity, support_match, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::AtomicMeasure;

    #[test]
    fn dirac_rejects_translation() {
        let k = Kappa::Atoms(AtomicMeasure::dirac(1.0));
        let r = kappa_group_test(&k, 2.0, DEFAULT_AFFINITY_THRESHOLD).unwrap();
        assert_eq!((r.affinity, r.support_match, r.verdict), (0.0, false, Verdict::DivergenceEvidence));
        let one = kappa_group_test(&k, 1.0, DEFAULT_AFFINITY_THRESHOLD).unwrap();
        assert_eq!((one.affinity, one.verdict), (1.0, Verdict::MemberEvidence));
    }

    #[test]
    fn uniform_support_mismatch() {
        let r = kappa_group_test(&Kappa::Uniform { lo: 1.0, hi: 2.0 }, 1.5, DEFAULT_AFFINITY_THRESHOLD).unwrap();
        assert!(!r.support_match);
        assert_eq!(r.verdict, Verdict::DivergenceEvidence);
        assert!(r.affinity > 0.0 && r.affinity < 1.0);
    }

    #[test]
    fn lognormal_affinity_closed_form() {
        let k = Kappa::LogNormal { mu: 0.0, sigma: 1.0 };
        let r = kappa_group_test(&k, core::f64::consts::E, DEFAULT_AFFINITY_THRESHOLD).unwrap();
        assert!((r.affinity - (-0.125f64).exp()).abs() < 1e-10);
        assert_eq!(r.verdict, Verdict::MemberEvidence);
        assert!(kappa_group_test(&Kappa::Lebesgue, 2.0, 1e-3).is_err());
        assert!(kappa_group_test(&k, 0.0, 1e-3).is_err());
    }
}
