//! One handler per command. Handlers parse their params, call into the core
//! crate and turn results into rows and tables; no numerics live here.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use rand::Rng as _;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use selfsim_core::check::CheckRow;
use selfsim_core::gaussian::{exp_partial_sum, exp_prime, mixing_diagnostic, spectral_selfsim_test, ProcessSampler};
use selfsim_core::lift::{
    build_sigma, captured_mass, classify_terms, h_sigma_membership, standard_lift, LiftSpec, MembershipThresholds,
    Verdict,
};
use selfsim_core::measure::{Domain, GridSpec, MeasureRef};
use selfsim_core::poisson::{
    apply_flow, c1_rows, kappa_group_test, q_transform, sample_poisson, tau_spectral, CylinderPlan, Kappa, Point,
    PointConfig, ProductFlowSpec, Window, DEFAULT_AFFINITY_THRESHOLD,
};
use selfsim_core::rng::{derive_seed, rng_from_seed};

use crate::dto::{
    default_p_max, AngleDto, KappaDto, LineMeasure, LineMeasureDto, RieszDto, SigmaDto, SubWindowDto, WindowDto,
};
use crate::error::CliError;
use crate::parallel::Pool;
use crate::report::{num, Row, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    RieszCoeff,
    RieszHgroup,
    RieszCriteria,
    LiftSigma,
    GaussExp,
    GaussCov,
    GaussSim,
    GaussMix,
    GaussSelfsim,
    PoissonSample,
    PoissonVerify,
    PoissonConjugacy,
    KappaGroup,
    SpectralTau,
}

const NAMES: [(&str, Command); 14] = [
    ("riesz-coeff", Command::RieszCoeff),
    ("riesz-hgroup", Command::RieszHgroup),
    ("riesz-criteria", Command::RieszCriteria),
    ("lift-sigma", Command::LiftSigma),
    ("gauss-exp", Command::GaussExp),
    ("gauss-cov", Command::GaussCov),
    ("gauss-sim", Command::GaussSim),
    ("gauss-mix", Command::GaussMix),
    ("gauss-selfsim", Command::GaussSelfsim),
    ("poisson-sample", Command::PoissonSample),
    ("poisson-verify", Command::PoissonVerify),
    ("poisson-conjugacy", Command::PoissonConjugacy),
    ("kappa-group", Command::KappaGroup),
    ("spectral-tau", Command::SpectralTau),
];

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        NAMES
            .iter()
            .find(|(n, _)| *n == s)
            .map(|(_, c)| *c)
            .ok_or_else(|| CliError::Config(format!("unknown command {s:?}")))
    }
}

impl Command {
    pub fn name(self) -> &'static str {
        NAMES.iter().find(|(_, c)| *c == self).map(|(n, _)| *n).unwrap_or_default()
    }
}

/// Rows and tables produced by one command.
#[derive(Debug, Default)]
pub struct Output {
    pub rows: Vec<Row>,
    pub tables: Vec<Table>,
}

impl Output {
    fn row(&mut self, r: CheckRow) {
        self.rows.push(r.into());
    }

    /// Descriptive row with no verdict attached.
    fn info(&mut self, check: &str, parameter: String, value: f64) {
        self.row(CheckRow::banded(check, parameter, None, value, f64::NEG_INFINITY, f64::INFINITY));
    }
}

fn parse<T: DeserializeOwned>(v: Value) -> Result<T, CliError> {
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("params: {e}")))
}

/// Pull the Riesz-spec keys out of `params`, leaving the rest.
fn split_riesz(params: &Value) -> Result<(RieszDto, Value), CliError> {
    let mut map: Map<String, Value> = match params {
        Value::Object(m) => m.clone(),
        _ => return Err(CliError::Config("params must be an object".into())),
    };
    let mut spec = Map::new();
    for key in ["n", "a", "family", "J"] {
        if let Some(v) = map.remove(key) {
            spec.insert(key.into(), v);
        }
    }
    let j = spec.get("J").cloned();
    let dto: RieszDto = parse(Value::Object(spec))?;
    if let Some(j) = j {
        map.insert("J".into(), j);
    }
    Ok((dto, Value::Object(map)))
}

pub fn run(command: Command, params: &Value, seed: u64, pool: &Pool) -> Result<Output, CliError> {
    match command {
        Command::RieszCoeff => riesz_coeff(params),
        Command::RieszHgroup => riesz_hgroup(params),
        Command::RieszCriteria => riesz_criteria(params),
        Command::LiftSigma => lift_sigma(params, seed),
        Command::GaussExp => gauss_exp(params),
        Command::GaussCov => gauss_cov(params),
        Command::GaussSim => gauss_sim(params, seed, pool),
        Command::GaussMix => gauss_mix(params),
        Command::GaussSelfsim => gauss_selfsim(params),
        Command::PoissonSample => poisson_sample(params, seed, pool),
        Command::PoissonVerify => poisson_verify(params, seed, pool),
        Command::PoissonConjugacy => poisson_conjugacy(params, seed, pool),
        Command::KappaGroup => kappa_group(params),
        Command::SpectralTau => spectral_tau(params),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Integer {
    Number(i64),
    Text(String),
}

impl Integer {
    fn value(&self) -> Result<BigInt, CliError> {
        match self {
            Self::Number(n) => Ok(BigInt::from(*n)),
            Self::Text(s) => s.trim().parse().map_err(|_| CliError::Config(format!("{s:?} is not an integer"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffParams {
    #[serde(rename = "J", default)]
    _j: Option<usize>,
    m: Vec<Integer>,
}

/// Coefficients from the representation sum, checked against the exact
/// partial product when its frequencies fit in 62 bits.
fn riesz_coeff(params: &Value) -> Result<Output, CliError> {
    let (dto, rest) = split_riesz(params)?;
    let p: CoeffParams = parse(rest)?;
    let spec = dto.build()?;
    let ms = p.m.iter().map(Integer::value).collect::<Result<Vec<_>, _>>()?;
    let product = spec.partial_product(spec.len()).ok();
    let mut out = Output::default();
    let mut table = Table::new("coefficients", &["m", "re", "im", "representation"]);
    for m in &ms {
        let c = spec.fourier_coefficient(m);
        let exact = product.as_ref().and_then(|poly| i64::try_from(m).ok().map(|k| poly.coeff(k)));
        let param = format!("m={m}");
        match exact {
            Some(e) => {
                out.row(CheckRow::within("riesz-coeff:re", param.clone(), e.re, c.re, 1e-12));
                out.row(CheckRow::within("riesz-coeff:im", param, e.im, c.im, 1e-12));
            }
            None => {
                out.info("riesz-coeff:re", param.clone(), c.re);
                out.info("riesz-coeff:im", param, c.im);
            }
        }
        let rep = match spec.decompose(m) {
            Some(r) if r.is_empty() => "empty".to_string(),
            Some(r) => r.digits().iter().rev().map(|(j, d)| format!("{j}:{d:+}")).collect::<Vec<_>>().join(" "),
            None => "none".to_string(),
        };
        table.push(vec![m.to_string(), num(c.re), num(c.im), rep]);
    }
    out.tables.push(table);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HgroupParams {
    #[serde(rename = "J", default)]
    j: Option<usize>,
    theta: Vec<AngleDto>,
    #[serde(default)]
    tail_term: Option<f64>,
    #[serde(default)]
    series_bound: Option<f64>,
}

fn thresholds(tail_term: Option<f64>, series_bound: Option<f64>) -> MembershipThresholds {
    let d = MembershipThresholds::default();
    MembershipThresholds { tail_term: tail_term.unwrap_or(d.tail_term), series_bound: series_bound.unwrap_or(d.series_bound) }
}

/// Partial sums `S_J(theta)`. For the factorial family and `theta = p/q`
/// every term with `j >= q` vanishes, so `S_J = S_{q-1}` is the expected
/// value whenever `q <= J`.
fn riesz_hgroup(params: &Value) -> Result<Output, CliError> {
    let (dto, rest) = split_riesz(params)?;
    let p: HgroupParams = parse(rest)?;
    let spec = dto.build()?;
    let j = p.j.unwrap_or(spec.len()).min(spec.len());
    let th = thresholds(p.tail_term, p.series_bound);
    let mut out = Output::default();
    let mut table = Table::new("membership", &["theta", "J", "series", "verdict"]);
    for theta in &p.theta {
        let angle = theta.build()?;
        let terms = spec.h_membership_terms(&angle, j)?;
        let series: f64 = terms.iter().sum();
        let param = format!("theta={};J={j}", theta.label());
        let q = angle.denominator();
        let exact = if spec.is_factorial() && *q <= BigUint::from(j) {
            let q = usize::try_from(q).unwrap_or(usize::MAX);
            Some(if q <= 1 { 0.0 } else { spec.h_membership_series(&angle, q - 1)? })
        } else {
            None
        };
        match exact {
            Some(e) => out.row(CheckRow::within("riesz-hgroup", param, e, series, 1e-9 * e.abs().max(1.0))),
            None => out.info("riesz-hgroup", param, series),
        }
        table.push(vec![theta.label(), j.to_string(), num(series), classify_terms(&terms, th).label().into()]);
    }
    out.tables.push(table);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {
    #[serde(rename = "J", default)]
    _j: Option<usize>,
}

/// Criterion sums. For the factorial family with unit weights the lacunary
/// sum has the closed-form limit `pi^2/6 - 1`.
fn riesz_criteria(params: &Value) -> Result<Output, CliError> {
    let (dto, rest) = split_riesz(params)?;
    let _: NoParams = parse(rest)?;
    let spec = dto.build()?;
    let c = spec.criteria()?;
    let j = spec.len();
    let mut out = Output::default();
    out.info("criteria:lacunary-sum", format!("J={j}"), c.lacunary_sum);
    out.info("criteria:weight-sum", format!("J={j}"), c.weight_sum);
    let unit = spec.weights().iter().all(|a| a.re == 1.0 && a.im == 0.0);
    if let (Some(bound), Some(estimate)) = (c.tail_bound, c.tail_estimate) {
        let limit = (unit && spec.is_factorial()).then(|| PI * PI / 6.0 - 1.0);
        out.row(CheckRow::banded(
            "criteria:lacunary-bracket",
            format!("J={j}"),
            limit,
            c.lacunary_sum + estimate,
            c.lacunary_sum,
            c.lacunary_sum + bound,
        ));
        if let Some(limit) = limit {
            out.row(CheckRow::within("criteria:lacunary-limit", format!("J={j}"), limit, c.lacunary_sum + estimate, 1e-6));
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LiftParams {
    source: RieszDto,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "J")]
    j: usize,
    nodes_per_unit: usize,
    #[serde(default)]
    s: Vec<f64>,
    #[serde(default)]
    series_terms: Option<usize>,
    #[serde(default)]
    tail_term: Option<f64>,
    #[serde(default)]
    series_bound: Option<f64>,
}

fn density_table(name: &str, g: &selfsim_core::measure::GridDensity) -> Table {
    let mut t = Table::new(name, &["x", "density"]);
    for (i, v) in g.values().iter().enumerate() {
        t.push(vec![num(g.node(i)), num(*v)]);
    }
    t
}

fn lift_sigma(params: &Value, seed: u64) -> Result<Output, CliError> {
    let p: LiftParams = parse(params.clone())?;
    let source = p.source.build()?;
    let spec = LiftSpec::new(source.clone(), p.k, p.j, p.nodes_per_unit)?;
    let lift = standard_lift(&spec)?;
    let sigma = build_sigma(&lift)?;
    let mut out = Output::default();
    let param = format!("K={};J={}", p.k, p.j);
    out.row(CheckRow::within("lift:mass", param.clone(), captured_mass(p.k), lift.mass(), 1e-9));
    out.row(CheckRow::within("sigma:mass", param.clone(), lift.mass(), sigma.mass(), 1e-12));

    let (lo, hi) = lift.window();
    let reach = lo.abs().max(hi.abs()).exp();
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let a = rng.random_range(0.0..reach);
        let b = rng.random_range(a..=reach);
        worst = worst.max((sigma.mass_in(a, b) - sigma.mass_in(-b, -a)).abs());
    }
    out.row(CheckRow::banded("sigma:symmetry", param, Some(0.0), worst, 0.0, 1e-12));

    let th = thresholds(p.tail_term, p.series_bound);
    let terms = p.series_terms.unwrap_or(source.len());
    let mut table = Table::new("membership", &["s", "theta", "series", "verdict"]);
    for &s in &p.s {
        let m = h_sigma_membership(&source, s, terms, th)?;
        out.info("h-sigma", format!("s={s};J={terms}"), m.series);
        table.push(vec![num(s), num(m.theta), num(m.series), m.verdict.label().into()]);
    }
    out.tables.push(table);
    out.tables.push(density_table("lift", &lift));
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpParams {
    sigma: SigmaDto,
    #[serde(rename = "P_max", default = "default_p_max")]
    p_max: usize,
    half_width: f64,
    #[serde(rename = "N")]
    n: usize,
    #[serde(default)]
    tol: Option<f64>,
}

/// Mass of `exp'(sigma)` against `sum_{p <= P} m^p / p!` for `m` the mass of
/// `sigma`, plus exact mirror symmetry of the sum.
fn gauss_exp(params: &Value) -> Result<Output, CliError> {
    let p: ExpParams = parse(params.clone())?;
    let sigma = p.sigma.build()?;
    let exp = exp_prime(&sigma, p.p_max, p.half_width, p.n)?;
    let m = sigma.mass();
    let theory = if (m - 1.0).abs() < 1e-15 {
        exp_partial_sum(p.p_max)
    } else {
        (1..=p.p_max).scan(1.0, |t, k| {
            *t *= m / k as f64;
            Some(*t)
        })
        .sum()
    };
    let mut out = Output::default();
    let param = format!("P_max={}", p.p_max);
    out.row(CheckRow::within("exp:mass", param.clone(), theory, exp.sum.mass(), p.tol.unwrap_or(1e-6)));
    let sym = if exp.sum.is_mirror_symmetric() { 1.0 } else { 0.0 };
    out.row(CheckRow::banded("exp:symmetry", param.clone(), Some(1.0), sym, 1.0, 1.0));
    out.info("exp:truncation-bound", param.clone(), exp.truncation_bound);
    out.info("exp:min-retained", param, exp.min_retained);
    out.tables.push(density_table("exp", &exp.sum));
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CovParams {
    sigma: SigmaDto,
    t: Vec<f64>,
    #[serde(default)]
    closed_form: Option<String>,
    #[serde(default)]
    tol: Option<f64>,
}

fn closed_form(name: &str) -> Result<fn(f64) -> f64, CliError> {
    fn sinc(t: f64) -> f64 {
        if t == 0.0 {
            1.0
        } else {
            t.sin() / t
        }
    }
    match name {
        "cos" => Ok(f64::cos),
        "sinc" => Ok(sinc),
        other => Err(CliError::Config(format!("unknown closed form {other:?}; expected cos or sinc"))),
    }
}

/// `r(t)` at the requested times, optionally against a closed form, and the
/// smallest eigenvalue of the Gram matrix `r(t_i - t_j)`.
fn gauss_cov(params: &Value) -> Result<Output, CliError> {
    let p: CovParams = parse(params.clone())?;
    let sigma = p.sigma.build()?;
    let form = p.closed_form.as_deref().map(closed_form).transpose()?;
    let tol = p.tol.unwrap_or(1e-8);
    let mut out = Output::default();
    for &t in &p.t {
        let r = sigma.covariance(t);
        match form {
            Some(f) => out.row(CheckRow::within("cov", format!("t={t}"), f(t), r, tol)),
            None => out.info("cov", format!("t={t}"), r),
        }
    }
    let n = p.t.len();
    if n > 0 {
        let gram = DMatrix::from_fn(n, n, |i, j| sigma.covariance(p.t[i] - p.t[j]));
        let min = gram.symmetric_eigenvalues().min();
        let floor = -1e-9 * n as f64 * sigma.mass().max(1.0);
        out.row(CheckRow::banded("cov:psd", format!("n={n}"), None, min, floor, f64::INFINITY));
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimParams {
    sigma: SigmaDto,
    #[serde(rename = "M")]
    m: usize,
    times: Vec<f64>,
    samples: usize,
}

/// Empirical `E[X(t_0) X(t_i)]` over seeded paths against the covariance
/// of the sampled mode set, with 4-sigma CLT bands.
fn gauss_sim(params: &Value, seed: u64, pool: &Pool) -> Result<Output, CliError> {
    let p: SimParams = parse(params.clone())?;
    if p.times.is_empty() || p.samples < 2 {
        return Err(CliError::Config("gauss-sim needs at least one time and two samples".into()));
    }
    let sigma = p.sigma.build()?;
    let sampler = ProcessSampler::new(&sigma, p.m)?;
    sampler.check_horizon(&p.times)?;
    let paths = pool.map(p.samples, |k| sampler.sample(&p.times, derive_seed(seed, k as u64)).map(|s| s.values))?;
    let n = p.samples as f64;
    let t0 = p.times[0];
    let r0 = sampler.covariance(0.0);
    let mut out = Output::default();
    let mean = paths.iter().map(|x| x[0]).sum::<f64>() / n;
    let sd = (r0 / n).sqrt();
    out.row(CheckRow::banded("sim:mean", format!("t={t0}"), Some(0.0), mean, -4.0 * sd, 4.0 * sd));
    for (i, &t) in p.times.iter().enumerate() {
        let r = sampler.covariance(t - t0);
        let emp = paths.iter().map(|x| x[0] * x[i]).sum::<f64>() / n;
        let sd = ((r0 * r0 + r * r) / n).sqrt();
        out.row(CheckRow::banded("sim:cov", format!("lag={}", t - t0), Some(r), emp, r - 4.0 * sd, r + 4.0 * sd));
    }
    let mut table = Table::new("path", &["t", "x"]);
    for (t, x) in p.times.iter().zip(&paths[0]) {
        table.push(vec![num(*t), num(*x)]);
    }
    out.tables.push(table);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixParams {
    sigma: SigmaDto,
    #[serde(rename = "T")]
    horizons: Vec<f64>,
    #[serde(default)]
    limit: Option<f64>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    below: Option<f64>,
}

/// `(1/T) int_0^T r(t)^2 dt`, against a limit or an upper bound if given.
fn gauss_mix(params: &Value) -> Result<Output, CliError> {
    let p: MixParams = parse(params.clone())?;
    let sigma = p.sigma.build()?;
    let mut out = Output::default();
    for &t in &p.horizons {
        let v = mixing_diagnostic(&sigma, t)?;
        let param = format!("T={t}");
        match (p.limit, p.below) {
            (Some(l), _) => out.row(CheckRow::within("mix", param, l, v, p.tol.unwrap_or(1e-3))),
            (None, Some(b)) => out.row(CheckRow::banded("mix", param, None, v, 0.0, b)),
            (None, None) => out.info("mix", param, v),
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelfsimParams {
    sigma: SigmaDto,
    s: Vec<f64>,
    #[serde(rename = "P_max", default = "default_p_max")]
    p_max: usize,
    half_width: f64,
    #[serde(rename = "N")]
    n: usize,
}

fn gauss_selfsim(params: &Value) -> Result<Output, CliError> {
    let p: SelfsimParams = parse(params.clone())?;
    let sigma = p.sigma.build()?;
    let exp = exp_prime(&sigma, p.p_max, p.half_width, p.n)?;
    let mut out = Output::default();
    for &s in &p.s {
        let r = spectral_selfsim_test(&sigma, s, &exp)?;
        let param = format!("s={s}");
        if s.abs() == 1.0 {
            out.row(CheckRow::within("selfsim:sigma", param.clone(), 1.0, r.affinity_sigma, 1e-9));
            out.row(CheckRow::within("selfsim:exp", param, 1.0, r.affinity_exp, 1e-9));
        } else {
            out.row(CheckRow::banded("selfsim:sigma", param.clone(), None, r.affinity_sigma, 0.0, 1.0));
            out.row(CheckRow::banded("selfsim:exp", param, None, r.affinity_exp, 0.0, 1.0));
        }
    }
    Ok(out)
}

fn flow_spec(kappa: &KappaDto, window: &WindowDto, circumference: f64) -> Result<ProductFlowSpec, CliError> {
    Ok(ProductFlowSpec::new(kappa.build()?, window.build(circumference)?)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleParams {
    kappa: KappaDto,
    window: WindowDto,
    #[serde(rename = "L")]
    circumference: f64,
    #[serde(default = "one")]
    configs: usize,
    #[serde(default)]
    flow_t: Option<f64>,
}

fn one() -> usize {
    1
}

/// Seeded configurations; the mean count is checked against the intensity
/// mass and the first configuration is written out as a table.
fn poisson_sample(params: &Value, seed: u64, pool: &Pool) -> Result<Output, CliError> {
    let p: SampleParams = parse(params.clone())?;
    if p.configs == 0 {
        return Err(CliError::Config("configs must be at least 1".into()));
    }
    let spec = flow_spec(&p.kappa, &p.window, p.circumference)?;
    let mu = spec.intensity_mass();
    let configs = pool.map(p.configs, |i| sample_poisson(&spec, derive_seed(seed, i as u64)))?;
    let n = p.configs as f64;
    let mean = configs.iter().map(|c| c.len() as f64).sum::<f64>() / n;
    let sd = (mu / n).sqrt();
    let mut out = Output::default();
    out.row(CheckRow::banded("sample:mean-count", format!("mu={mu};configs={}", p.configs), Some(mu), mean, mu - 4.0 * sd, mu + 4.0 * sd));
    let first = &configs[0];
    let flowed = p.flow_t.map(|t| apply_flow(first, t, p.circumference));
    let mut table = Table::new("points", &["s", "y", "z", "z_flowed"]);
    for (i, pt) in first.points.iter().enumerate() {
        let zf = flowed.as_ref().map(|f| num(f.points[i].z)).unwrap_or_default();
        table.push(vec![num(pt.s), num(pt.y), num(pt.z), zf]);
    }
    out.tables.push(table);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimpleVerifyParams {
    mu: f64,
    j_max: u64,
    #[serde(rename = "N")]
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyParams {
    kappa: KappaDto,
    window: WindowDto,
    #[serde(rename = "L")]
    circumference: f64,
    #[serde(rename = "K")]
    k: SubWindowDto,
    #[serde(rename = "K_prime")]
    k_prime: SubWindowDto,
    #[serde(default)]
    t: Vec<f64>,
    #[serde(rename = "N")]
    n: usize,
    j_max: u64,
}

/// Cylinder laws. The short form `{mu, j_max, N}` checks the one-window
/// count law on a window of intensity mass `mu`.
fn poisson_verify(params: &Value, seed: u64, pool: &Pool) -> Result<Output, CliError> {
    let mut out = Output::default();
    if params.get("mu").is_some() {
        let p: SimpleVerifyParams = parse(params.clone())?;
        if p.n == 0 {
            return Err(CliError::Config("N must be positive".into()));
        }
        let window = Window::new(1.0, 2.0, Some((0.0, p.mu)), 1.0)?;
        let spec = ProductFlowSpec::new(Kappa::Uniform { lo: 1.0, hi: 2.0 }, window)?;
        let counts = pool.map(p.n, |i| sample_poisson(&spec, derive_seed(seed, i as u64)).map(|c| c.len() as u64))?;
        for r in c1_rows("c1:K", &counts, spec.intensity_mass(), p.j_max) {
            out.row(r);
        }
        return Ok(out);
    }
    let p: VerifyParams = parse(params.clone())?;
    let spec = flow_spec(&p.kappa, &p.window, p.circumference)?;
    let plan = CylinderPlan::new(spec, p.k.build(p.circumference), p.k_prime.build(p.circumference), p.t, p.n, p.j_max)?;
    let trials = pool.map(p.n, |i| plan.trial(seed, i as u64))?;
    for r in plan.report(&trials) {
        out.row(r);
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConjugacyParams {
    #[serde(default)]
    kappa: Option<KappaDto>,
    #[serde(rename = "L", default = "unit")]
    circumference: f64,
    #[serde(default = "thousand")]
    triples: usize,
    #[serde(default = "ten")]
    t_max: f64,
    #[serde(default = "h_range")]
    h_range: [f64; 2],
    #[serde(default = "s_range")]
    s_range: [f64; 2],
}

fn unit() -> f64 {
    1.0
}
fn thousand() -> usize {
    1000
}
fn ten() -> f64 {
    10.0
}
fn h_range() -> [f64; 2] {
    [0.1, 10.0]
}
fn s_range() -> [f64; 2] {
    [0.05, 20.0]
}

fn circle_dist(a: f64, b: f64, l: f64) -> f64 {
    let d = (a - b).rem_euclid(l);
    d.min(l - d)
}

/// `Q_{1/h} T_t Q_h = T_{ht}` on seeded triples: the largest coordinate
/// error, absolute and relative to the size of the flowed displacement.
fn poisson_conjugacy(params: &Value, seed: u64, pool: &Pool) -> Result<Output, CliError> {
    let p: ConjugacyParams = parse(params.clone())?;
    let kappa = match &p.kappa {
        Some(k) => k.build()?,
        None => Kappa::LogNormal { mu: 0.0, sigma: 1.0 },
    };
    let [h_lo, h_hi] = p.h_range;
    let [s_lo, s_hi] = p.s_range;
    if !(0.0 < h_lo && h_lo <= h_hi && 0.0 < s_lo && s_lo <= s_hi && p.t_max >= 0.0 && p.circumference > 0.0) {
        return Err(CliError::Config("conjugacy ranges must be positive and ordered".into()));
    }
    let l = p.circumference;
    let errors = pool.map(p.triples, |i| -> Result<(f64, f64), CliError> {
        let mut rng = rng_from_seed(derive_seed(seed, i as u64));
        let s = (rng.random_range(s_lo.ln()..=s_hi.ln())).exp();
        let y = rng.random_range(-1.0..1.0);
        let z = rng.random_range(0.0..l);
        let t = rng.random_range(-p.t_max..=p.t_max);
        let h = (rng.random_range(h_lo.ln()..=h_hi.ln())).exp();
        let cfg = PointConfig { points: vec![Point { s, y, z }] };
        let lhs = q_transform(&kappa, 1.0 / h, &apply_flow(&q_transform(&kappa, h, &cfg)?, t, l))?;
        let rhs = apply_flow(&cfg, h * t, l);
        let (a, b) = (lhs.points[0], rhs.points[0]);
        let (ds, dy, dz) = ((a.s - b.s).abs(), (a.y - b.y).abs(), circle_dist(a.z, b.z, l));
        let absolute = ds.max(dy).max(dz);
        let scaled = (ds / b.s.max(1.0)).max(dy / b.y.abs().max(1.0)).max(dz / (1.0 + (s * h * t).abs()));
        Ok((absolute, scaled))
    })?;
    let absolute = errors.iter().map(|e| e.0).fold(0.0, f64::max);
    let scaled = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    let mut out = Output::default();
    let param = format!("triples={}", p.triples);
    out.row(CheckRow::banded("conjugacy:absolute", param.clone(), Some(0.0), absolute, 0.0, 1e-12));
    out.row(CheckRow::banded("conjugacy:scaled", param, Some(0.0), scaled, 0.0, 1e-12));
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KappaGroupParams {
    kappa: KappaDto,
    h: Vec<f64>,
    #[serde(default)]
    threshold: Option<f64>,
    #[serde(default)]
    expect: Option<Vec<String>>,
}

fn expected_verdict(s: &str) -> Result<Verdict, CliError> {
    match s {
        "member" | "member-evidence" => Ok(Verdict::MemberEvidence),
        "non-member" | "divergence-evidence" => Ok(Verdict::DivergenceEvidence),
        other => Err(CliError::Config(format!("unknown verdict {other:?}"))),
    }
}

/// Affinity between `kappa` and its translate by `h`. For a lognormal law
/// the affinity is `exp(-(ln h)^2 / (8 sigma^2))`.
fn kappa_group(params: &Value) -> Result<Output, CliError> {
    let p: KappaGroupParams = parse(params.clone())?;
    let kappa = p.kappa.build()?;
    let expect = match &p.expect {
        Some(e) if e.len() != p.h.len() => return Err(CliError::Config("expect must match h in length".into())),
        Some(e) => Some(e.iter().map(|s| expected_verdict(s)).collect::<Result<Vec<_>, _>>()?),
        None => None,
    };
    let mut out = Output::default();
    let mut table = Table::new("verdicts", &["h", "affinity", "support_match", "verdict"]);
    for (i, &h) in p.h.iter().enumerate() {
        let r = kappa_group_test(&kappa, h, p.threshold.unwrap_or(DEFAULT_AFFINITY_THRESHOLD))?;
        let param = format!("h={h}");
        match kappa {
            Kappa::LogNormal { sigma, .. } => {
                let theory = (-(h.ln().powi(2)) / (8.0 * sigma * sigma)).exp();
                out.row(CheckRow::within("kappa-group:affinity", param.clone(), theory, r.affinity, 1e-4));
            }
            _ => out.row(CheckRow::banded("kappa-group:affinity", param.clone(), None, r.affinity, 0.0, 1.0)),
        }
        if let Some(e) = &expect {
            let hit = if r.verdict == e[i] { 1.0 } else { 0.0 };
            out.row(CheckRow::banded("kappa-group:verdict", param, Some(1.0), hit, 1.0, 1.0));
        }
        table.push(vec![num(h), num(r.affinity), r.support_match.to_string(), r.verdict.label().into()]);
    }
    out.tables.push(table);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TauParams {
    sigma_v: LineMeasureDto,
    kappa: KappaDto,
    #[serde(default = "nodes")]
    nodes: usize,
    window: [f64; 2],
    #[serde(rename = "N")]
    n: usize,
    #[serde(default)]
    report: usize,
}

fn nodes() -> usize {
    256
}

/// `tau` from `sigma_V` and the quadrature of `kappa`. Mass is conserved up
/// to what falls outside the target window.
fn spectral_tau(params: &Value) -> Result<Output, CliError> {
    let p: TauParams = parse(params.clone())?;
    let sigma_v = p.sigma_v.build()?;
    let kappa = p.kappa.build()?;
    let quad = kappa.quadrature(p.nodes)?;
    let target = GridSpec::new(Domain::RealLine, p.window[0], p.window[1], p.n)?;
    let (source, v_mass) = match &sigma_v {
        LineMeasure::Grid(g) => (MeasureRef::Grid(g), g.mass()),
        LineMeasure::Atoms(a) => (MeasureRef::Atoms(a), a.mass()),
    };
    let r = tau_spectral(source, &kappa, &quad, target, p.report)?;
    let k_mass: f64 = quad.iter().map(|(_, w)| w).sum();
    let mut out = Output::default();
    let theory = v_mass * k_mass;
    out.row(CheckRow::within("tau:mass", format!("nodes={}", quad.len()), theory, r.tau.mass() + r.lost_mass, 1e-9 * theory.max(1.0)));
    out.info("tau:lost-mass", format!("N={}", p.n), r.lost_mass);
    for (s, a) in &r.orthogonality {
        out.row(CheckRow::banded("tau:affinity", format!("s={s}"), None, *a, 0.0, 1.0));
    }
    out.tables.push(density_table("tau", &r.tau));
    Ok(out)
}
