//! Standard lift of a circle measure to the line and the symmetric measure
//! `sigma` on the nonzero reals whose positive half, in log coordinates, is
//! half the lift.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::measure::{deposit, AtomicMeasure, Domain, GridDensity, GridSpec};
use crate::riesz::{Angle, RieszSpec};

/// Weight `2^{-|k|} / 3` of tile `[k, k + 1)`; the weights over all of `Z` sum to 1.
pub fn tile_weight(k: i64) -> f64 {
    libm::ldexp(1.0 / 3.0, -(k.unsigned_abs().min(2000) as i32))
}

/// Mass of the tiles `|k| > K` left out of a lift with `K` tiles per side.
pub fn tile_deficit(tile_count: usize) -> f64 {
    libm::ldexp(2.0 / 3.0, -(tile_count.min(2000) as i32))
}

/// Total weight of the tiles `|k| <= K`.
pub fn captured_mass(tile_count: usize) -> f64 {
    (-(tile_count as i64)..=tile_count as i64).map(tile_weight).sum()
}

/// Parameters of a lift: tiles `-K..=K`, raster index `J` of the source's
/// partial products, and circle nodes per unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftSpec {
    pub source: RieszSpec,
    pub tile_count: usize,
    pub raster_index: usize,
    pub nodes_per_unit: usize,
}

impl LiftSpec {
    pub fn new(source: RieszSpec, tile_count: usize, raster_index: usize, nodes_per_unit: usize) -> Result<Self> {
        if tile_count == 0 {
            return Err(Error::InvalidArgument("tile count must be positive".into()));
        }
        if raster_index == 0 || raster_index > source.len() {
            return Err(Error::IndexOutOfRange { index: raster_index, max: source.len() });
        }
        Ok(Self { source, tile_count, raster_index, nodes_per_unit })
    }

    pub fn deficit(&self) -> f64 {
        tile_deficit(self.tile_count)
    }
}

/// Line window used for a lift with `K` tiles per side: `[-2^p, 2^p)` with
/// `2^p >= K + 1`, so tiles `-K..=K` fit and the node count is a power of two.
pub fn lift_window(tile_count: usize, nodes_per_unit: usize) -> Result<GridSpec> {
    let half = (tile_count + 1).next_power_of_two();
    GridSpec::new(Domain::RealLine, -(half as f64), half as f64, 2 * half * nodes_per_unit)
}

/// Rasterizes `prod_{j <= J} P_j` and lifts it.
pub fn standard_lift(spec: &LiftSpec) -> Result<GridDensity> {
    let m = spec.nodes_per_unit;
    let top = spec.source.frequency(spec.raster_index);
    let need = top * 4u32;
    if num_bigint::BigUint::from(m) < need {
        return Err(Error::GridTooCoarse(format!(
            "cell width 1/{m} exceeds 1/(4 n_J) = 1/{need}"
        )));
    }
    let circle = spec.source.partial_product(spec.raster_index)?.rasterize(m)?;
    standard_lift_of(&circle, spec.tile_count)
}

/// Lift of an arbitrary circle density: on tile `[k, k + 1)` the density is
/// `w_k` times the circle density translated by `k`. Zero outside the tiles.
pub fn standard_lift_of(circle: &GridDensity, tile_count: usize) -> Result<GridDensity> {
    if circle.domain() != Domain::Circle {
        return Err(Error::IncompatibleDomain { op: "standard_lift", detail: "source must live on the circle".into() });
    }
    if tile_count == 0 {
        return Err(Error::InvalidArgument("tile count must be positive".into()));
    }
    let m = circle.grid_count();
    let spec = lift_window(tile_count, m)?;
    let half = spec.count / (2 * m);
    let mut values = vec![0.0; spec.count];
    for k in -(tile_count as i64)..=tile_count as i64 {
        let w = tile_weight(k);
        let base = ((k + half as i64) as usize) * m;
        for (i, v) in circle.values().iter().enumerate() {
            values[base + i] = w * v;
        }
    }
    GridDensity::new(spec, values)
}

/// The symmetric measure `sigma` on the line.
///
/// `LogHalf` stores the restriction of `sigma` to the positive reals in log
/// coordinates (the negative half is its mirror image). `Line` and `Atoms`
/// hold symmetric measures given directly on the line.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaMeasure {
    LogHalf(GridDensity),
    Line(GridDensity),
    Atoms(AtomicMeasure),
}

/// `sigma` with positive half `rho_prime / 2` in the log chart.
pub fn build_sigma(rho_prime: &GridDensity) -> Result<SigmaMeasure> {
    if rho_prime.domain() != Domain::RealLine {
        return Err(Error::IncompatibleDomain { op: "build_sigma", detail: "the lift must live on the real line".into() });
    }
    let spec = GridSpec::new(Domain::PosRealsLog, rho_prime.window().0, rho_prime.window().1, rho_prime.grid_count())?;
    Ok(SigmaMeasure::LogHalf(GridDensity::new(spec, rho_prime.values().iter().map(|v| 0.5 * v).collect())?))
}

impl SigmaMeasure {
    /// Symmetric line density; values at mirrored nodes must agree.
    pub fn line(density: GridDensity) -> Result<Self> {
        if density.domain() != Domain::RealLine || !density.is_mirror_symmetric() {
            return Err(Error::InvalidArgument("line sigma must be mirror-symmetric on a window [-L, L)".into()));
        }
        Ok(Self::Line(density))
    }

    pub fn atoms(atoms: AtomicMeasure) -> Result<Self> {
        if !atoms.is_symmetric() {
            return Err(Error::InvalidArgument("atomic sigma must be symmetric".into()));
        }
        Ok(Self::Atoms(atoms))
    }

    pub fn mass(&self) -> f64 {
        match self {
            Self::LogHalf(h) => 2.0 * h.mass(),
            Self::Line(g) => g.mass(),
            Self::Atoms(a) => a.mass(),
        }
    }

    /// Mass at the origin and the (position, mass) pairs on `(0, inf)`.
    pub fn positive_half(&self) -> (f64, Vec<(f64, f64)>) {
        match self {
            Self::LogHalf(h) => (0.0, h.node_masses().filter(|m| m.1 > 0.0).map(|(u, m)| (u.exp(), m)).collect()),
            Self::Line(g) => {
                let zero = g.spec().index_of(0.0).map(|i| g.values()[i] * g.cell_width()).unwrap_or(0.0);
                (zero, g.node_masses().filter(|&(x, m)| x > 0.0 && m > 0.0).collect())
            }
            Self::Atoms(a) => {
                let zero = a.atoms().iter().filter(|p| p.0 == 0.0).map(|p| p.1).sum();
                (zero, a.atoms().iter().copied().filter(|p| p.0 > 0.0).collect())
            }
        }
    }

    /// `sigma([a, b])`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        let inside = |x: f64| x >= a && x <= b;
        let (zero, pos) = self.positive_half();
        let mut total = if inside(0.0) { zero } else { 0.0 };
        for (x, m) in pos {
            if inside(x) {
                total += m;
            }
            if inside(-x) {
                total += m;
            }
        }
        total
    }

    /// `r(t) = int cos(t x) d sigma(x)`.
    pub fn covariance(&self, t: f64) -> f64 {
        match self {
            Self::Line(g) => g.node_masses().map(|(x, m)| m * (t * x).cos()).sum(),
            Self::Atoms(a) => a.atoms().iter().map(|&(x, w)| w * (t * x).cos()).sum(),
            Self::LogHalf(h) => 2.0 * h.node_masses().map(|(u, m)| m * (t * u.exp()).cos()).sum::<f64>(),
        }
    }

    /// Rasterizes onto the line window `[-L, L)` with `count` nodes,
    /// mirror-averaged so the result is exactly symmetric. Also returns the
    /// mass that fell outside the window.
    pub fn to_line_grid(&self, half_width: f64, count: usize) -> Result<(GridDensity, f64)> {
        let spec = GridSpec::new(Domain::RealLine, -half_width, half_width, count)?;
        if let Self::Line(g) = self {
            if g.spec().same_geometry(&spec) {
                return Ok((g.clone(), 0.0));
            }
        }
        let mut values = vec![0.0; count];
        let (zero, pos) = self.positive_half();
        let mut lost = 0.0;
        if zero > 0.0 {
            lost += deposit(&spec, &mut values, 0.0, zero);
        }
        for (x, m) in pos {
            lost += deposit(&spec, &mut values, x, m);
            lost += deposit(&spec, &mut values, -x, m);
        }
        // node 0 at -L has no mirror partner; its mass counts as lost
        lost += values[0] * spec.cell_width();
        values[0] = 0.0;
        let raw = GridDensity::new(spec, values)?;
        Ok((raw.mirror_average()?, lost))
    }
}

/// Verdict of the membership heuristic for a point of a quasi-invariance group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    MemberEvidence,
    DivergenceEvidence,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Self::MemberEvidence => "member-evidence",
            Self::DivergenceEvidence => "divergence-evidence",
        }
    }
}

/// Thresholds of the membership heuristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipThresholds {
    /// Every term in the last quarter below this counts as eventual vanishing.
    pub tail_term: f64,
    /// Partial sums at most this, with non-increasing last-quarter terms,
    /// count as convergent.
    pub series_bound: f64,
}

impl Default for MembershipThresholds {
    fn default() -> Self {
        Self { tail_term: 1e-9, series_bound: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub theta: f64,
    pub series: f64,
    pub verdict: Verdict,
}

/// Classifies `S_J(theta)` from its terms.
pub fn classify_terms(terms: &[f64], th: MembershipThresholds) -> Verdict {
    let n = terms.len();
    let tail = &terms[n - (n / 4).max(1)..];
    let series: f64 = terms.iter().sum();
    let vanishing = tail.iter().all(|&x| x < th.tail_term);
    let settling = series <= th.series_bound && tail.windows(2).all(|w| w[1] <= w[0]);
    if vanishing || settling {
        Verdict::MemberEvidence
    } else {
        Verdict::DivergenceEvidence
    }
}

/// `theta = frac(log |s|)`, snapped to the nearest fraction with denominator
/// at most 1000 when it lies within `1e-12` of one.
pub fn log_angle(s: f64) -> Result<Angle> {
    if s == 0.0 || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("s = {s} must be finite and nonzero")));
    }
    let theta = crate::special::rem_euclid(s.abs().ln(), 1.0);
    for q in 1..=1000i64 {
        let p = (theta * q as f64).round();
        if (theta - p / q as f64).abs() < 1e-12 {
            return Angle::rational(p as i64 % q, q as u64);
        }
    }
    Angle::from_f64(theta)
}

/// Membership evidence for `s` in the quasi-invariance group of `sigma`,
/// read off the circle series at `theta = log |s| mod 1`.
pub fn h_sigma_membership(
    source: &RieszSpec,
    s: f64,
    j: usize,
    th: MembershipThresholds,
) -> Result<Membership> {
    let angle = log_angle(s)?;
    h_sigma_membership_at(source, &angle, j, th)
}

/// As [`h_sigma_membership`], with the angle given exactly.
pub fn h_sigma_membership_at(
    source: &RieszSpec,
    angle: &Angle,
    j: usize,
    th: MembershipThresholds,
) -> Result<Membership> {
    if j == 0 {
        return Err(Error::IndexOutOfRange { index: j, max: source.len() });
    }
    let terms = source.h_membership_terms(angle, j)?;
    Ok(Membership { theta: angle.to_f64(), series: terms.iter().sum(), verdict: classify_terms(&terms, th) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_and_deficit() {
        assert_eq!(tile_weight(0), 1.0 / 3.0);
        assert_eq!(tile_weight(-2), 1.0 / 12.0);
        for k in [1usize, 2, 5, 20] {
            let total = captured_mass(k) + tile_deficit(k);
            assert!((total - 1.0).abs() < 1e-15);
            assert!(tile_deficit(k) <= libm::ldexp(1.0, -(k as i32)));
        }
    }

    #[test]
    fn lift_of_haar_is_a_step_function() {
        let circle = GridDensity::new(GridSpec::circle(16).unwrap(), vec![1.0; 16]).unwrap();
        let lift = standard_lift_of(&circle, 1).unwrap();
        assert_eq!(lift.window(), (-2.0, 2.0));
        for (x, expected) in [(-1.5, 0.0), (-0.25, tile_weight(-1)), (0.5, tile_weight(0)), (1.0, tile_weight(1)), (-2.0, 0.0), (1.9375, tile_weight(1))] {
            let i = lift.spec().index_of(x).unwrap();
            assert_eq!(lift.values()[i], expected, "x = {x}");
        }
        assert!((lift.mass() - captured_mass(1)).abs() < 1e-15);
    }

    #[test]
    fn lift_rejects_coarse_grids() {
        let spec = LiftSpec::new(RieszSpec::from_u64(&[1, 3, 9], vec![num_complex::Complex64::new(1.0, 0.0); 3]).unwrap(), 2, 3, 32).unwrap();
        assert!(matches!(standard_lift(&spec), Err(Error::GridTooCoarse(_))));
        let ok = LiftSpec { nodes_per_unit: 64, ..spec };
        assert!(standard_lift(&ok).is_ok());
    }

    #[test]
    fn sigma_of_point_mass() {
        let spec = GridSpec::new(Domain::RealLine, -2.0, 2.0, 64).unwrap();
        let rho = GridDensity::point_mass(spec, 0.0, 1.0).unwrap();
        let sigma = build_sigma(&rho).unwrap();
        assert_eq!(sigma.mass(), 1.0);
        let (zero, pos) = sigma.positive_half();
        assert_eq!(zero, 0.0);
        assert_eq!(pos, vec![(1.0, 0.5)]);
        assert_eq!(sigma.mass_in(0.5, 1.5), 0.5);
        assert_eq!(sigma.mass_in(-1.5, -0.5), 0.5);
        assert_eq!(sigma.covariance(0.0), 1.0);
    }

    #[test]
    fn angle_snapping() {
        assert_eq!(log_angle(1.0).unwrap(), Angle::rational(0, 1).unwrap());
        assert_eq!(log_angle(-(0.5f64).exp()).unwrap(), Angle::rational(1, 2).unwrap());
        assert_eq!(log_angle((2.0f64 + 1.0 / 3.0).exp()).unwrap(), Angle::rational(1, 3).unwrap());
        assert!(log_angle(0.0).is_err());
    }

    #[test]
    fn membership_examples() {
        let f = RieszSpec::factorial(40).unwrap();
        let th = MembershipThresholds::default();
        let one = h_sigma_membership(&f, 1.0, 40, th).unwrap();
        assert_eq!((one.series, one.verdict), (0.0, Verdict::MemberEvidence));
        let half = h_sigma_membership(&f, -(0.5f64).exp(), 40, th).unwrap();
        assert_eq!((half.series, half.verdict), (4.0, Verdict::MemberEvidence));
        let generic = h_sigma_membership(&f, (0.123456789f64).exp(), 40, th).unwrap();
        assert_eq!(generic.verdict, Verdict::DivergenceEvidence);
        assert!(generic.series > 4.0);
    }
}
