//! Command-line front end: scenario runs with JSON/CSV reports, the
//! constants table and band-limited sandwich data.

use std::fmt;
use std::io::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modphi::engine::{
    check_h2, check_h3_domination, check_h3prime, check_h4prime, decreasing_trend, local_limit, McParams, Method, Scenario,
};
use modphi::fourier::{sandwich_approximation, stable_constant, Region, SandwichOptions};
use modphi::mc::{Executor, ThreadPool};
use modphi::scenarios_arithmetic::{
    dedekind_scenario, dedekind_unscaled_scenario, eta_constant, sqrt_log_tau, squarefree_scenario, zeta_dist_scenario,
    zeta_index, SquarefreeVariant,
};
use modphi::scenarios_classical::{
    gamma_shift_scenario, poisson_scenario, stable_scenario, winding_scenario, Increment, PoissonVariant,
};
use modphi::scenarios_matrix::{
    biased_so_scenario, ks_conjecture_phi, ks_scenario, stochastic_zeta_scenario, GroupFamily, CONJECTURE_PRIME_CUTOFF,
};
use modphi::specfun::{barnes_g_log, ln_gamma, zeta_real};
use modphi::{limits, Complex64, Point};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "v1";

/// Exit status of a diagnostic flag; errors exit with 1.
pub const EXIT_FLAGGED: i32 = 2;

pub const SCENARIOS: &[&str] = &[
    "stable",
    "winding",
    "poisson",
    "cycles",
    "gamma-shift",
    "dedekind",
    "zeta-dist",
    "squarefree",
    "rmt",
    "rmt-biased",
    "stochastic-zeta",
    "ks-phi",
];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(modphi::Error),
    Io(std::io::Error),
    Encode(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Encode(m) => write!(f, "encoding failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<modphi::Error> for CliError {
    fn from(e: modphi::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "modphi", version, about = "Local limit theorems: scenario runs, constants and sandwich data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Local-limit reports for one scenario across an index list.
    Run(RunArgs),
    /// Table of constants with cross-checks.
    Constants(ConstantsArgs),
    /// Band-limited minorant and majorant of a builtin function.
    Sandwich(SandwichArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Auto,
    Exact,
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Scenario name.
    pub scenario: String,
    #[arg(long)]
    pub variant: Option<String>,
    /// Index values (n, λ, log u, σ or x depending on the scenario).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          visible_aliases = ["ns", "lambdas", "log-us", "sigmas", "xs"])]
    pub index: Vec<f64>,
    /// `a,b`, `box:x0,x1,y0,y1` or `disc:cx,cy,r`.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cutoffs for the domination check.
    #[arg(long, value_delimiter = ',')]
    pub k_list: Vec<f64>,
    /// `eps,k` for the shell integral of |φ_n|.
    #[arg(long, value_delimiter = ',')]
    pub h3prime: Vec<f64>,
    /// `a,eps` for the rescaled tail integral.
    #[arg(long, value_delimiter = ',')]
    pub h4prime: Vec<f64>,
    /// Radius of the frequency grid for the convergence diagnostics.
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long = "format", value_enum, default_value_t = OutFormat::Json)]
    pub format: OutFormat,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Raise every enumeration cap tenfold.
    #[arg(long)]
    pub slow: bool,
    /// Relative gap to the predicted limit above which the last index is flagged.
    #[arg(long, default_value_t = 0.5)]
    pub tolerance: f64,
    /// Stable index.
    #[arg(long)]
    pub p: Option<f64>,
    /// Increment law for `stable`.
    #[arg(long)]
    pub increment: Option<String>,
    /// Shift constant for `gamma-shift`.
    #[arg(long)]
    pub c: Option<f64>,
    /// Field size for `squarefree --variant fq`.
    #[arg(long)]
    pub q: Option<u64>,
    /// Group family for `rmt`: u, so or usp.
    #[arg(long)]
    pub family: Option<String>,
    /// Frequency `t1,t2` for `ks-phi`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t: Vec<f64>,
    /// Prime cutoff for `ks-phi`.
    #[arg(long)]
    pub prime_cutoff: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ConstantsArgs {
    #[arg(long = "format", value_enum, default_value_t = OutFormat::Json)]
    pub format: OutFormat,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SandwichArgs {
    /// `triangle` or `bump2d`.
    pub function: String,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// `csv` emits the grid; `json` the summary only.
    #[arg(long = "format", value_enum, default_value_t = OutFormat::Csv)]
    pub format: OutFormat,
    #[arg(long)]
    pub out: Option<String>,
}

/// Full configuration echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: String,
    pub variant: Option<String>,
    pub index: Vec<f64>,
    pub region: String,
    pub method: MethodArg,
    pub samples: u64,
    pub seed: u64,
    pub k_list: Vec<f64>,
    pub h3prime: Option<[f64; 2]>,
    pub h4prime: Option<[f64; 2]>,
    pub t_max: Option<f64>,
    pub out_format: OutFormat,
    pub slow: bool,
    pub workers: usize,
    pub tolerance: f64,
    pub p: Option<f64>,
    pub increment: Option<String>,
    pub c: Option<f64>,
    pub q: Option<u64>,
    pub family: Option<String>,
    pub t: Option<[f64; 2]>,
    pub prime_cutoff: Option<u64>,
}

fn pair(v: &[f64], what: &str) -> CliResult<Option<[f64; 2]>> {
    match v.len() {
        0 => Ok(None),
        2 => Ok(Some([v[0], v[1]])),
        _ => Err(CliError::Usage(format!("--{what} takes two comma-separated values"))),
    }
}

impl RunConfig {
    pub fn from_args(a: &RunArgs) -> CliResult<Self> {
        if !SCENARIOS.contains(&a.scenario.as_str()) {
            return Err(CliError::Usage(format!("unknown scenario {:?}; known: {}", a.scenario, SCENARIOS.join(", "))));
        }
        if a.method == MethodArg::MonteCarlo && a.samples < 100 {
            return Err(CliError::Usage("Monte Carlo runs need at least 100 samples".into()));
        }
        if a.index.is_empty() && a.scenario != "ks-phi" {
            return Err(CliError::Usage(format!("{} needs an index list (--index / --ns / --xs …)", a.scenario)));
        }
        Ok(RunConfig {
            scenario: a.scenario.clone(),
            variant: a.variant.clone(),
            index: a.index.clone(),
            region: a.region.clone().unwrap_or_default(),
            method: a.method,
            samples: a.samples,
            seed: a.seed,
            k_list: a.k_list.clone(),
            h3prime: pair(&a.h3prime, "h3prime")?,
            h4prime: pair(&a.h4prime, "h4prime")?,
            t_max: a.t_max,
            out_format: a.format,
            slow: a.slow,
            workers: a.workers.max(1),
            tolerance: a.tolerance,
            p: a.p,
            increment: a.increment.clone(),
            c: a.c,
            q: a.q,
            family: a.family.clone(),
            t: pair(&a.t, "t")?,
            prime_cutoff: a.prime_cutoff,
        })
    }
}

pub fn parse_region(spec: &str) -> CliResult<Region> {
    let nums = |body: &str| -> CliResult<Vec<f64>> {
        body.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad number {s:?} in region {spec:?}"))))
            .collect()
    };
    let region = if let Some(body) = spec.strip_prefix("box:") {
        match nums(body)?.as_slice() {
            &[x0, x1, y0, y1] => Region::Box { x0, x1, y0, y1 },
            _ => return Err(CliError::Usage(format!("box region needs four values: {spec:?}"))),
        }
    } else if let Some(body) = spec.strip_prefix("disc:") {
        match nums(body)?.as_slice() {
            &[cx, cy, r] => Region::Disc { cx, cy, r },
            _ => return Err(CliError::Usage(format!("disc region needs three values: {spec:?}"))),
        }
    } else {
        match nums(spec)?.as_slice() {
            &[a, b] => Region::Interval { a, b },
            _ => return Err(CliError::Usage(format!("interval region needs two values: {spec:?}"))),
        }
    };
    Ok(region.validated()?)
}

/// A scenario together with the engine indices of the requested values.
pub struct Registered {
    pub scenario: Scenario,
    pub indices: Vec<f64>,
}

fn variant_is(cfg: &RunConfig, allowed: &[&str]) -> CliResult<()> {
    match &cfg.variant {
        Some(v) if !allowed.contains(&v.as_str()) => {
            Err(CliError::Usage(format!("variant {v:?} not valid for {}; expected one of {allowed:?}", cfg.scenario)))
        }
        _ => Ok(()),
    }
}

pub fn build_scenario(cfg: &RunConfig) -> CliResult<Registered> {
    let idx = cfg.index.clone();
    let simple = |scenario: Scenario| Registered { indices: scenario.index_set.clone(), scenario };
    let reg = match cfg.scenario.as_str() {
        "stable" => {
            variant_is(cfg, &[])?;
            let inc = Increment::parse(cfg.increment.as_deref().unwrap_or("exact-stable"))?;
            let p = cfg.p.unwrap_or(if inc == Increment::Cauchy { 1.0 } else if inc == Increment::UniformSymmetric { 2.0 } else { 1.5 });
            simple(stable_scenario(p, inc, idx, None)?)
        }
        "winding" => simple(winding_scenario(idx)?),
        "poisson" => simple(poisson_scenario(idx, PoissonVariant::Poisson)?),
        "cycles" => simple(poisson_scenario(idx, PoissonVariant::PermutationCycles)?),
        "gamma-shift" => simple(gamma_shift_scenario(idx, cfg.c.unwrap_or(1.0))?),
        "dedekind" => {
            variant_is(cfg, &["log-log", "sqrt-log", "unscaled"])?;
            match cfg.variant.as_deref() {
                Some("unscaled") => simple(dedekind_unscaled_scenario(idx)?),
                Some("sqrt-log") => simple(dedekind_scenario(idx, Some(std::sync::Arc::new(sqrt_log_tau)))?),
                _ => simple(dedekind_scenario(idx, None)?),
            }
        }
        "zeta-dist" => {
            let mut sigmas = idx;
            sigmas.sort_by(|a, b| b.total_cmp(a));
            let scenario = zeta_dist_scenario(&sigmas)?;
            let indices = cfg.index.iter().map(|&s| zeta_index(s)).collect();
            Registered { scenario, indices }
        }
        "squarefree" => {
            let v = SquarefreeVariant::parse(cfg.variant.as_deref().unwrap_or("symmetrized"), cfg.q)?;
            simple(squarefree_scenario(idx, v)?)
        }
        "rmt" => {
            let family = GroupFamily::parse(cfg.family.as_deref().unwrap_or("u"))?;
            simple(ks_scenario(family, &idx)?)
        }
        "rmt-biased" => simple(biased_so_scenario(&idx)?),
        "stochastic-zeta" => simple(stochastic_zeta_scenario(&idx)?),
        other => return Err(CliError::Usage(format!("{other} is not a local-limit scenario"))),
    };
    Ok(reg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionJson {
    pub kind: String,
    pub params: Vec<f64>,
    pub measure: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub h2_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub h3prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub h4prime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub domination_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub improving: bool,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub scenario: String,
    pub variant: Option<String>,
    pub index: f64,
    pub region: RegionJson,
    pub method: String,
    pub scaled_probability: f64,
    pub predicted_limit: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub effective_samples: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub consistent: Option<bool>,
    pub diagnostics: Diagnostics,
    pub trend: Trend,
    pub flags: Vec<String>,
    pub config: RunConfig,
}

/// Value of the conjectural limiting function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjecturalPhiReport {
    pub schema: String,
    pub scenario: String,
    pub t: [f64; 2],
    pub re: f64,
    pub im: f64,
    pub truncation_bound: f64,
    pub prime_cutoff: u64,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutput {
    Reports(Vec<Report>),
    ConjecturalPhi(ConjecturalPhiReport),
}

impl RunOutput {
    pub fn flags(&self) -> Vec<String> {
        match self {
            RunOutput::Reports(r) => r.first().map(|x| x.flags.clone()).unwrap_or_default(),
            RunOutput::ConjecturalPhi(_) => Vec::new(),
        }
    }
}

fn frequency_grid(dim: usize, t_max: f64) -> Vec<Point> {
    if dim == 1 {
        (0..=200).map(|i| [-t_max + 2.0 * t_max * i as f64 / 200.0, 0.0]).collect()
    } else {
        let mut g = vec![[0.0, 0.0]];
        for r in 1..=10 {
            let rho = t_max * r as f64 / 10.0;
            for j in 0..16 {
                let th = 2.0 * std::f64::consts::PI * j as f64 / 16.0;
                g.push([rho * th.cos(), rho * th.sin()]);
            }
        }
        g
    }
}

/// Values already at round-off level carry no trend information.
const SETTLED: f64 = 1e-12;

fn settled(values: &[f64]) -> bool {
    values.iter().all(|v| v.abs() <= SETTLED)
}

fn pick_method(cfg: &RunConfig, scn: &Scenario) -> Method {
    match cfg.method {
        MethodArg::Exact => Method::Exact,
        MethodArg::Analytic => Method::Analytic,
        MethodArg::MonteCarlo => Method::MonteCarlo,
        MethodArg::Auto => {
            if scn.exact_prob.is_some() {
                Method::Exact
            } else if !scn.discrete {
                Method::Analytic
            } else {
                Method::MonteCarlo
            }
        }
    }
}

fn apply_capacity(slow: bool) {
    if let Ok(v) = std::env::var("MODPHI_CAPACITY") {
        if let Ok(f) = v.trim().parse::<f64>() {
            limits::scale_all(f);
        }
    }
    if slow {
        limits::scale_all(10.0);
    }
}

pub fn cmd_run(cfg: &RunConfig) -> CliResult<RunOutput> {
    apply_capacity(cfg.slow);
    if cfg.scenario == "ks-phi" {
        let t = cfg.t.unwrap_or([1.0, 0.0]);
        let cutoff = cfg.prime_cutoff.unwrap_or(CONJECTURE_PRIME_CUTOFF);
        let v = ks_conjecture_phi(t[0], t[1], cutoff)?;
        return Ok(RunOutput::ConjecturalPhi(ConjecturalPhiReport {
            schema: SCHEMA.into(),
            scenario: cfg.scenario.clone(),
            t,
            re: v.value.re,
            im: v.value.im,
            truncation_bound: v.truncation_bound,
            prime_cutoff: v.prime_cutoff,
            config: cfg.clone(),
        }));
    }
    let Registered { scenario: scn, indices } = build_scenario(cfg)?;
    let region = if cfg.region.is_empty() {
        if scn.dim == 1 {
            Region::Interval { a: -1.0, b: 1.0 }
        } else {
            Region::Disc { cx: 0.0, cy: 0.0, r: 1.0 }
        }
    } else {
        parse_region(&cfg.region)?
    };
    let method = pick_method(cfg, &scn);
    let exec: Box<dyn Executor> = Box::new(ThreadPool::new(cfg.workers));
    let mc = McParams { samples: cfg.samples, seed: cfg.seed };

    let mut raw = Vec::with_capacity(indices.len());
    for &n in &indices {
        raw.push(local_limit(&scn, n, &region, method, Some(&mc), exec.as_ref())?);
    }

    let mut flags = Vec::new();
    let t_max = cfg.t_max.unwrap_or(if scn.dim == 1 { 5.0 } else { 2.0 });
    let grid = frequency_grid(scn.dim, t_max);
    let h2 = check_h2(&scn, &indices, &grid)?;
    if indices.len() > 1 && !settled(&h2.values) && !h2.decreasing {
        flags.push("h2-not-decreasing".to_string());
    }
    let h3p = match cfg.h3prime {
        Some([eps, k]) => {
            let r = check_h3prime(&scn, eps, k, &indices)?;
            if indices.len() > 1 && !r.decreasing {
                flags.push("h3prime-not-decreasing".to_string());
            }
            Some(r.values)
        }
        None => None,
    };
    let h4p = match cfg.h4prime {
        Some([a, eps]) => Some(check_h4prime(&scn, a, eps, &indices)?.trend.values),
        None => None,
    };
    let mut domination = None;
    for &k in &cfg.k_list {
        let d = check_h3_domination(&scn, k, &indices, &grid)?;
        if !d.holds {
            flags.push(format!("domination-fails-k={k}"));
        }
        domination = Some(domination.unwrap_or(0.0f64).max(d.worst_ratio));
    }

    let values: Vec<f64> = raw.iter().map(|r| r.scaled_probability).collect();
    let errors: Vec<f64> = raw.iter().map(|r| (r.scaled_probability - r.predicted_limit).abs()).collect();
    let improving = indices.len() < 2 || settled(&errors) || decreasing_trend(&errors);
    if !improving {
        flags.push("trend-not-improving".to_string());
    }
    if let Some(last) = raw.last() {
        let gap = (last.scaled_probability - last.predicted_limit).abs();
        if gap > cfg.tolerance * last.predicted_limit.abs().max(f64::MIN_POSITIVE) {
            flags.push("local-limit-mismatch".to_string());
        }
    }

    let reports = raw
        .iter()
        .enumerate()
        .map(|(i, r)| Report {
            schema: SCHEMA.into(),
            scenario: cfg.scenario.clone(),
            variant: cfg.variant.clone(),
            index: cfg.index[i],
            region: RegionJson { kind: region.kind().into(), params: region.params(), measure: region.measure() },
            method: r.method.label().into(),
            scaled_probability: r.scaled_probability,
            predicted_limit: r.predicted_limit,
            stderr: r.stderr,
            samples: r.samples,
            seed: r.seed,
            effective_samples: r.effective_samples,
            consistent: r.consistent,
            diagnostics: Diagnostics {
                h2_deviation: Some(h2.values[i]),
                h3prime: h3p.as_ref().map(|v| v[i]),
                h4prime: h4p.as_ref().map(|v| v[i]),
                domination_ratio: domination,
            },
            trend: Trend { improving, values: values.clone() },
            flags: flags.clone(),
            config: cfg.clone(),
        })
        .collect();
    Ok(RunOutput::Reports(reports))
}

/// One CSV line per report; list-valued fields are joined with `;`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub schema: String,
    pub scenario: String,
    pub variant: Option<String>,
    pub index: f64,
    pub region_kind: String,
    pub region_params: String,
    pub region_measure: f64,
    pub method: String,
    pub scaled_probability: f64,
    pub predicted_limit: f64,
    pub stderr: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    pub effective_samples: Option<f64>,
    pub consistent: Option<bool>,
    pub h2_deviation: Option<f64>,
    pub h3prime: Option<f64>,
    pub h4prime: Option<f64>,
    pub domination_ratio: Option<f64>,
    pub trend_improving: bool,
    pub trend_values: String,
    pub flags: String,
    pub config: String,
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

pub fn split_floats(s: &str) -> Vec<f64> {
    if s.is_empty() {
        return Vec::new();
    }
    s.split(';').filter_map(|x| x.parse().ok()).collect()
}

impl CsvRow {
    pub fn from_report(r: &Report) -> CliResult<Self> {
        Ok(CsvRow {
            schema: r.schema.clone(),
            scenario: r.scenario.clone(),
            variant: r.variant.clone(),
            index: r.index,
            region_kind: r.region.kind.clone(),
            region_params: join(&r.region.params),
            region_measure: r.region.measure,
            method: r.method.clone(),
            scaled_probability: r.scaled_probability,
            predicted_limit: r.predicted_limit,
            stderr: r.stderr,
            samples: r.samples,
            seed: r.seed,
            effective_samples: r.effective_samples,
            consistent: r.consistent,
            h2_deviation: r.diagnostics.h2_deviation,
            h3prime: r.diagnostics.h3prime,
            h4prime: r.diagnostics.h4prime,
            domination_ratio: r.diagnostics.domination_ratio,
            trend_improving: r.trend.improving,
            trend_values: join(&r.trend.values),
            flags: r.flags.join(";"),
            config: serde_json::to_string(&r.config).map_err(|e| CliError::Encode(e.to_string()))?,
        })
    }
}

fn csv_of<T: Serialize>(rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Encode(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Encode(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Encode(e.to_string()))
}

fn json_of<T: Serialize + ?Sized>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| CliError::Encode(e.to_string()))
}

pub fn render_run(out: &RunOutput, format: OutFormat) -> CliResult<String> {
    match (out, format) {
        (RunOutput::Reports(r), OutFormat::Json) => json_of(r),
        (RunOutput::Reports(r), OutFormat::Csv) => {
            let rows = r.iter().map(CsvRow::from_report).collect::<CliResult<Vec<_>>>()?;
            csv_of(&rows)
        }
        (RunOutput::ConjecturalPhi(k), OutFormat::Json) => json_of(k),
        (RunOutput::ConjecturalPhi(k), OutFormat::Csv) => {
            #[derive(Serialize)]
            struct Row<'a> {
                schema: &'a str,
                scenario: &'a str,
                t1: f64,
                t2: f64,
                re: f64,
                im: f64,
                truncation_bound: f64,
                prime_cutoff: u64,
            }
            csv_of(&[Row {
                schema: &k.schema,
                scenario: &k.scenario,
                t1: k.t[0],
                t2: k.t[1],
                re: k.re,
                im: k.im,
                truncation_bound: k.truncation_bound,
                prime_cutoff: k.prime_cutoff,
            }])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub name: String,
    pub value: f64,
    pub reference: Option<f64>,
    pub residual: Option<f64>,
    pub method: String,
    pub ok: bool,
}

/// Tolerance of every cross-check in the constants table.
pub const CONSTANT_TOL: f64 = 1e-4;

pub fn cmd_constants() -> CliResult<Vec<ConstantRow>> {
    let row = |name: String, value: f64, reference: f64, method: &str, tol: f64| {
        let residual = (value - reference).abs();
        ConstantRow { name, value, reference: Some(reference), residual: Some(residual), method: method.into(), ok: residual <= tol }
    };
    let mut rows = Vec::new();
    for p in [0.5, 1.0, 1.5, 2.0] {
        let closed = ln_gamma(1.0 + 1.0 / p).exp() / std::f64::consts::PI;
        rows.push(row(format!("c_{p}"), stable_constant(p)?, closed, "quadrature vs Γ(1+1/p)/π", 1e-10));
    }
    let eta = eta_constant()?;
    rows.push(ConstantRow {
        name: "eta".into(),
        value: eta.value,
        reference: Some(eta.dickman),
        residual: Some(eta.residual),
        method: "Fourier integral vs Dickman ρ² integral".into(),
        ok: eta.residual <= CONSTANT_TOL,
    });
    let pi = std::f64::consts::PI;
    rows.push(row("zeta(2)".into(), zeta_real(2.0)?, pi * pi / 6.0, "Euler–Maclaurin vs π²/6", 1e-12));
    for (k, want) in [(1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 2.0)] {
        let g = barnes_g_log(Complex64::new(k, 0.0))?.exp().re;
        rows.push(row(format!("G({k})"), g, want, "asymptotic series vs recurrence", 1e-10));
    }
    Ok(rows)
}

pub fn render_constants(rows: &[ConstantRow], format: OutFormat) -> CliResult<String> {
    match format {
        OutFormat::Json => json_of(&serde_json::json!({ "schema": SCHEMA, "constants": rows })),
        OutFormat::Csv => csv_of(rows),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichSummary {
    pub schema: String,
    pub function: String,
    pub dim: usize,
    pub eta: f64,
    pub epsilon: f64,
    pub gap_integral: f64,
    pub fourier_support_radius: f64,
    pub order_violation: f64,
    pub spectral_leakage: f64,
    pub nodes: usize,
    pub order_holds: bool,
}

pub struct SandwichOutput {
    pub summary: SandwichSummary,
    pub grid_csv: String,
}

pub fn cmd_sandwich(function: &str, eta: f64) -> CliResult<SandwichOutput> {
    let (dim, f): (usize, Box<dyn Fn(Point) -> f64 + Sync>) = match function {
        "triangle" => (1, Box::new(|x: Point| (1.0 - x[0].abs()).max(0.0))),
        "bump2d" => (2, Box::new(|x: Point| (1.0 - x[0] * x[0] - x[1] * x[1]).max(0.0).powi(2))),
        other => return Err(CliError::Usage(format!("unknown builtin {other:?}; expected triangle or bump2d"))),
    };
    let pair = sandwich_approximation(f.as_ref(), dim, 1.0, eta, &SandwichOptions::default())?;
    let violation = pair.order_violation();
    let summary = SandwichSummary {
        schema: SCHEMA.into(),
        function: function.into(),
        dim,
        eta,
        epsilon: pair.epsilon,
        gap_integral: pair.gap_integral,
        fourier_support_radius: pair.fourier_support_radius,
        order_violation: violation,
        spectral_leakage: pair.spectral_leakage,
        nodes: pair.nodes.len(),
        order_holds: violation == 0.0 && pair.gap_integral <= eta,
    };
    Ok(SandwichOutput { summary, grid_csv: pair.to_csv() })
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn emit(body: String, out: &Option<String>, inv: &mut Invocation) -> CliResult<()> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(body.as_bytes())?;
        }
        None => inv.stdout.push_str(&body),
    }
    Ok(())
}

fn dispatch(cli: Cli, inv: &mut Invocation) -> CliResult<i32> {
    match cli.command {
        Command::Run(args) => {
            let cfg = RunConfig::from_args(&args)?;
            let out = cmd_run(&cfg)?;
            emit(render_run(&out, cfg.out_format)?, &args.out, inv)?;
            let flags = out.flags();
            if flags.is_empty() {
                Ok(0)
            } else {
                inv.stderr.push_str(&format!("diagnostic flags: {}\n", flags.join(", ")));
                Ok(EXIT_FLAGGED)
            }
        }
        Command::Constants(args) => {
            let rows = cmd_constants()?;
            emit(render_constants(&rows, args.format)?, &args.out, inv)?;
            let bad: Vec<&str> = rows.iter().filter(|r| !r.ok).map(|r| r.name.as_str()).collect();
            if bad.is_empty() {
                Ok(0)
            } else {
                inv.stderr.push_str(&format!("cross-check failed: {}\n", bad.join(", ")));
                Ok(EXIT_FLAGGED)
            }
        }
        Command::Sandwich(args) => {
            let out = cmd_sandwich(&args.function, args.eta)?;
            let body = match args.format {
                OutFormat::Csv => out.grid_csv.clone(),
                OutFormat::Json => json_of(&out.summary)?,
            };
            emit(body, &args.out, inv)?;
            let s = &out.summary;
            inv.stderr.push_str(&format!(
                "gap {:.6} (eta {}), epsilon {:.3e}, order violation {:.3e}, support radius {:.4}\n",
                s.gap_integral, s.eta, s.epsilon, s.order_violation, s.fourier_support_radius
            ));
            Ok(if s.order_holds { 0 } else { EXIT_FLAGGED })
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, S>(args: I) -> Invocation
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let mut inv = Invocation { stdout: String::new(), stderr: String::new(), code: 0 };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                inv.stderr = text;
                inv.code = 1;
            } else {
                inv.stdout = text;
            }
            return inv;
        }
    };
    match dispatch(cli, &mut inv) {
        Ok(code) => inv.code = code,
        Err(e) => {
            inv.stderr.push_str(&format!("error: {e}\n"));
            inv.code = 1;
        }
    }
    inv
}
