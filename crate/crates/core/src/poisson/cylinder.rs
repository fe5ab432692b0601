use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::suspension::sample_with;
use super::{apply_flow, Point, ProductFlowSpec};
use crate::check::CheckRow;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::special::{chi2_sf, poisson_pmf, poisson_upper_tail};

/// Minimum trial count for a cylinder verification.
pub const MIN_TRIALS: usize = 10_000;
/// p-value floor for the chi-square rows.
pub const P_VALUE_FLOOR: f64 = 1e-3;

/// Box `[s0, s1) x [y0, y1) x [z0, z1)` inside a window. `y = None` means the
/// window's full y range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubWindow {
    pub s: (f64, f64),
    pub y: Option<(f64, f64)>,
    pub z: (f64, f64),
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0.max(b.0) < a.1.min(b.1)
}

impl SubWindow {
    fn y_range(&self, spec: &ProductFlowSpec) -> Option<(f64, f64)> {
        self.y.or(spec.window.y)
    }

    /// Intensity mass of the box.
    pub fn mass(&self, spec: &ProductFlowSpec) -> f64 {
        let y_len = self.y_range(spec).map(|(a, b)| b - a).unwrap_or(1.0);
        spec.kappa.mass_in(self.s.0, self.s.1) * y_len * (self.z.1 - self.z.0)
    }

    pub fn contains(&self, spec: &ProductFlowSpec, p: &Point) -> bool {
        let y_ok = self.y_range(spec).map(|(a, b)| p.y >= a && p.y < b).unwrap_or(true);
        p.s >= self.s.0 && p.s < self.s.1 && y_ok && p.z >= self.z.0 && p.z < self.z.1
    }

    /// Boxes spanning the whole circle are invariant under the flow.
    pub fn is_flow_invariant(&self, spec: &ProductFlowSpec) -> bool {
        self.z.0 <= 0.0 && self.z.1 >= spec.window.circumference
    }

    fn validate(&self, spec: &ProductFlowSpec) -> Result<()> {
        let w = &spec.window;
        let mut ok = self.s.0 >= w.s_lo && self.s.1 <= w.s_hi && self.s.0 <= self.s.1;
        ok &= self.z.0 >= 0.0 && self.z.1 <= w.circumference && self.z.0 <= self.z.1;
        if let (Some((a, b)), Some((wa, wb))) = (self.y, w.y) {
            ok &= a >= wa && b <= wb && a <= b;
        }
        if !ok {
            return Err(Error::InvalidArgument(format!("sub-window {self:?} is not inside the sampling window")));
        }
        Ok(())
    }

    fn overlaps(&self, other: &SubWindow, spec: &ProductFlowSpec) -> bool {
        let y_overlap = match (self.y_range(spec), other.y_range(spec)) {
            (Some(a), Some(b)) => overlap(a, b),
            _ => true,
        };
        overlap(self.s, other.s) && y_overlap && overlap(self.z, other.z)
    }
}

/// Counts observed in one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialCounts {
    pub k: u64,
    pub k_prime: u64,
    /// Count in `K` after the flow, per time.
    pub flowed: Vec<u64>,
}

/// Monte-Carlo check of the cylinder laws on two disjoint boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderPlan {
    pub spec: ProductFlowSpec,
    pub k: SubWindow,
    pub k_prime: SubWindow,
    pub t_values: Vec<f64>,
    pub trials: usize,
    pub j_max: u64,
}

impl CylinderPlan {
    pub fn new(
        spec: ProductFlowSpec,
        k: SubWindow,
        k_prime: SubWindow,
        t_values: Vec<f64>,
        trials: usize,
        j_max: u64,
    ) -> Result<Self> {
        if trials < MIN_TRIALS {
            return Err(Error::InvalidArgument(format!("{trials} trials is below the minimum {MIN_TRIALS}")));
        }
        k.validate(&spec)?;
        k_prime.validate(&spec)?;
        if k.overlaps(&k_prime, &spec) {
            return Err(Error::OverlappingWindows(format!("{k:?} and {k_prime:?} intersect")));
        }
        Ok(Self { spec, k, k_prime, t_values, trials, j_max })
    }

    /// Counts for trial `index`, drawn from the seed `derive_seed(seed, index)`.
    pub fn trial(&self, seed: u64, index: u64) -> Result<TrialCounts> {
        let mut rng = rng_from_seed(derive_seed(seed, index));
        let cfg = sample_with(&self.spec, &mut rng)?;
        let inside = |c: &super::PointConfig, b: &SubWindow| c.count_where(|p| b.contains(&self.spec, p));
        let flowed = self
            .t_values
            .iter()
            .map(|&t| inside(&apply_flow(&cfg, t, self.spec.window.circumference), &self.k))
            .collect();
        Ok(TrialCounts { k: inside(&cfg, &self.k), k_prime: inside(&cfg, &self.k_prime), flowed })
    }

    /// Runs every trial in index order on the current thread.
    pub fn run(&self, seed: u64) -> Result<Vec<CheckRow>> {
        let trials = (0..self.trials as u64).map(|i| self.trial(seed, i)).collect::<Result<Vec<_>>>()?;
        Ok(self.report(&trials))
    }

    /// Check rows from the per-trial counts (in trial order).
    pub fn report(&self, trials: &[TrialCounts]) -> Vec<CheckRow> {
        let n = trials.len() as f64;
        let mu = self.k.mass(&self.spec);
        let mu2 = self.k_prime.mass(&self.spec);
        let ks: Vec<u64> = trials.iter().map(|t| t.k).collect();
        let ks2: Vec<u64> = trials.iter().map(|t| t.k_prime).collect();

        let mut rows = c1_rows("c1:K", &ks, mu, self.j_max);
        rows.push(tail_row("c1-tail:K", &ks, mu));
        rows.extend(c1_rows("c1:K'", &ks2, mu2, self.j_max));
        rows.push(tail_row("c1-tail:K'", &ks2, mu2));

        let mean = |v: &[u64]| v.iter().map(|&x| x as f64).sum::<f64>() / n;
        let (m1, m2) = (mean(&ks), mean(&ks2));
        let cov = ks.iter().zip(&ks2).map(|(&a, &b)| (a as f64 - m1) * (b as f64 - m2)).sum::<f64>() / n;
        let band = 3.0 * (mu * mu2 / n).sqrt();
        rows.push(CheckRow::banded("c2:covariance", format!("mu={mu};mu'={mu2}"), Some(0.0), cov, -band, band));
        rows.push(independence_row(&ks, &ks2, mu, mu2));

        let invariant = self.k.is_flow_invariant(&self.spec);
        for (i, &t) in self.t_values.iter().enumerate() {
            let flowed: Vec<u64> = trials.iter().map(|c| c.flowed[i]).collect();
            rows.push(gof_row("flow-gof:K", format!("t={t}"), &flowed, mu));
            if invariant {
                let same = trials.iter().filter(|c| c.flowed[i] == c.k).count() as f64 / n;
                rows.push(CheckRow::banded("flow-exact:K", format!("t={t}"), Some(1.0), same, 1.0, 1.0));
            }
        }
        rows
    }
}

/// Empirical `P(count = j)` against `e^{-mu} mu^j / j!` with a 3-sigma
/// binomial band, one row per `j = 0..=j_max`.
pub fn c1_rows(label: &str, counts: &[u64], mu: f64, j_max: u64) -> Vec<CheckRow> {
    let n = counts.len() as f64;
    (0..=j_max)
        .map(|j| {
            let p = poisson_pmf(mu, j);
            let emp = counts.iter().filter(|&&c| c == j).count() as f64 / n;
            let sd = (p * (1.0 - p) / n).sqrt();
            CheckRow::banded(label, format!("mu={mu};j={j}"), Some(p), emp, p - 3.0 * sd, p + 3.0 * sd)
        })
        .collect()
}

fn tail_row(label: &str, counts: &[u64], mu: f64) -> CheckRow {
    let n = counts.len() as f64;
    let j = (10.0 * mu).floor() as u64 + 1;
    let p = poisson_upper_tail(mu, j);
    let emp = counts.iter().filter(|&&c| c >= j).count() as f64 / n;
    let hi = p + 3.0 * (p * (1.0 - p) / n).sqrt();
    CheckRow::banded(label, format!("mu={mu};j>={j}"), Some(p), emp, 0.0, hi)
}

/// Category cap `c`: counts `0..c` separately and `>= c` pooled, with `c`
/// the largest value whose pooled expectation is still at least 5.
fn category_cap(mu: f64, n: f64) -> u64 {
    let mut c = 1;
    while n * poisson_upper_tail(mu, c + 1) >= 5.0 && c < 1000 {
        c += 1;
    }
    c
}

fn gof_row(label: &str, parameter: String, counts: &[u64], mu: f64) -> CheckRow {
    let n = counts.len() as f64;
    let cap = category_cap(mu, n);
    let mut observed = vec![0.0; cap as usize + 1];
    for &c in counts {
        observed[c.min(cap) as usize] += 1.0;
    }
    let mut stat = 0.0;
    for (j, o) in observed.iter().enumerate() {
        let p = if (j as u64) < cap { poisson_pmf(mu, j as u64) } else { poisson_upper_tail(mu, cap) };
        let e = n * p;
        stat += (o - e) * (o - e) / e;
    }
    let p_value = chi2_sf(stat, cap as f64);
    CheckRow::banded(label, parameter, None, p_value, P_VALUE_FLOOR, 1.0)
}

fn independence_row(a: &[u64], b: &[u64], mu_a: f64, mu_b: f64) -> CheckRow {
    let n = a.len() as f64;
    let (ca, cb) = (category_cap(mu_a, n) as usize, category_cap(mu_b, n) as usize);
    let mut table = vec![vec![0.0; cb + 1]; ca + 1];
    for (&x, &y) in a.iter().zip(b) {
        table[(x as usize).min(ca)][(y as usize).min(cb)] += 1.0;
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..=cb).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let mut stat = 0.0;
    for (i, r) in table.iter().enumerate() {
        for (j, o) in r.iter().enumerate() {
            let e = rows[i] * cols[j] / n;
            if e > 0.0 {
                stat += (o - e) * (o - e) / e;
            }
        }
    }
    let live_r = rows.iter().filter(|&&x| x > 0.0).count();
    let live_c = cols.iter().filter(|&&x| x > 0.0).count();
    let dof = (live_r.saturating_sub(1) * live_c.saturating_sub(1)) as f64;
    let p_value = if dof > 0.0 { chi2_sf(stat, dof) } else { 1.0 };
    CheckRow::banded("c2:independence", format!("mu={mu_a};mu'={mu_b}"), None, p_value, P_VALUE_FLOOR, 1.0)
}
