//! Scenarios of mod-φ convergence: hypothesis diagnostics, the local limit
//! estimator, and the shift and linear-change transforms.
//!
//! A scenario describes a family `X_n` through its characteristic functions
//! `φ_n`, invertible scalings `A_n` with `Σ_n = A_n⁻¹`, and the limit `φ` of
//! `s ↦ φ_n(Σ_n* s)`. Indices are real so that continuous parameters
//! (`λ`, `u`, `σ`) fit the same shape as integer `n`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;

use crate::fourier::{density_at, rescaled_probability, CharFn, InversionOptions, Region};
use crate::linalg::Mat2;
use crate::mc::{hit_probability, Executor, Sample, Sampler};
use crate::numerics::{integrate_panels, integrate_to_inf, QuadOptions};
use crate::error::finite;
use crate::{Error, Point, Result};

pub type MatrixSeq = Arc<dyn Fn(f64) -> Mat2 + Send + Sync>;
pub type Envelope = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type ExactProb = Arc<dyn Fn(f64, &Region) -> Result<f64> + Send + Sync>;
pub type CharFnSeq = Arc<dyn Fn(f64) -> Result<CharFn> + Send + Sync>;
pub type SamplerSeq = Arc<dyn Fn(f64) -> Result<Sampler> + Send + Sync>;
pub type EnvelopeFamily = Arc<dyn Fn(f64) -> Option<Envelope> + Send + Sync>;

/// Relative slack allowed in monotone-trend flags.
pub const TREND_SLACK: f64 = 0.1;

/// Each value at most `1 + slack` times its predecessor.
pub fn nonincreasing_with_slack(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack) + 1e-300)
}

/// Nonincreasing with slack and strictly smaller at the end.
pub fn decreasing_trend(values: &[f64]) -> bool {
    nonincreasing_with_slack(values, TREND_SLACK)
        && match (values.first(), values.last()) {
            (Some(a), Some(b)) if values.len() > 1 => b < a,
            _ => true,
        }
}

/// The scalings `A_n`. On the line only the top-left entry is used.
#[derive(Clone)]
pub struct ScalingSeq {
    dim: usize,
    a_of: MatrixSeq,
}

impl ScalingSeq {
    pub fn scalar(a: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalingSeq { dim: 1, a_of: Arc::new(move |n| Mat2::diag(a(n), 1.0)) }
    }

    pub fn isotropic(a: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalingSeq { dim: 2, a_of: Arc::new(move |n| Mat2::scalar(a(n))) }
    }

    pub fn matrix(a: impl Fn(f64) -> Mat2 + Send + Sync + 'static) -> Self {
        ScalingSeq { dim: 2, a_of: Arc::new(a) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self, n: f64) -> Mat2 {
        (self.a_of)(n)
    }

    pub fn sigma(&self, n: f64) -> Result<Mat2> {
        self.a(n).inverse()
    }

    pub fn det_a(&self, n: f64) -> f64 {
        let a = self.a(n);
        if self.dim == 1 {
            a.0[0][0].abs()
        } else {
            a.det().abs()
        }
    }

    /// Operator norm of `Σ_n`.
    pub fn sigma_norm(&self, n: f64) -> Result<f64> {
        let s = self.sigma(n)?;
        Ok(op_norm(self.dim, &s))
    }

    /// Checks `A_n Σ_n = I` to 1e-12 and that `‖Σ_n‖` decreases along `ns`.
    pub fn check(&self, ns: &[f64]) -> Result<()> {
        let mut norms = Vec::with_capacity(ns.len());
        for &n in ns {
            let a = self.a(n);
            let s = a.inverse()?;
            let resid = a.mul(&s).max_abs_diff(&Mat2::IDENTITY);
            if resid > 1e-12 * (1.0 + a.norm() * s.norm()) {
                return Err(Error::Precondition(format!("A_n Σ_n deviates from the identity by {resid:e} at n = {n}")));
            }
            norms.push(op_norm(self.dim, &s));
        }
        if !decreasing_trend(&norms) {
            return Err(Error::Precondition("‖Σ_n‖ does not decrease along the index set".into()));
        }
        Ok(())
    }
}

fn op_norm(dim: usize, m: &Mat2) -> f64 {
    if dim == 1 {
        m.0[0][0].abs()
    } else {
        m.norm()
    }
}

/// Adjoint used to evaluate `φ_n(Σ* t)`; on the line the unused entry is zeroed.
fn adjoint(dim: usize, m: &Mat2) -> Mat2 {
    if dim == 1 {
        Mat2::diag(m.0[0][0], 0.0)
    } else {
        m.transpose()
    }
}

fn norm_in(dim: usize, t: Point) -> f64 {
    if dim == 1 {
        t[0].abs()
    } else {
        libm::hypot(t[0], t[1])
    }
}

/// Limit law `μ` with characteristic function `φ` and density `dμ/dm`.
#[derive(Clone)]
pub struct ReferenceLaw {
    pub name: String,
    pub phi: CharFn,
    density: Arc<dyn Fn(Point) -> Result<f64> + Send + Sync>,
}

impl ReferenceLaw {
    pub fn new(name: impl Into<String>, phi: CharFn, density: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        ReferenceLaw { name: name.into(), phi, density: Arc::new(move |x| Ok(density(x))) }
    }

    /// Density obtained by Fourier inversion of `phi`.
    pub fn from_charfn(name: impl Into<String>, phi: CharFn) -> Self {
        let inner = phi.clone();
        ReferenceLaw { name: name.into(), phi, density: Arc::new(move |x| density_at(&inner, x)) }
    }

    pub fn gaussian() -> Self {
        let phi = CharFn::gaussian(1).expect("dimension 1");
        Self::new("gaussian-real", phi, |x| libm::exp(-0.5 * x[0] * x[0]) / libm::sqrt(2.0 * PI))
    }

    /// Standard Gaussian on `C = R²`, identity covariance.
    pub fn gaussian_complex() -> Self {
        let phi = CharFn::gaussian(2).expect("dimension 2");
        Self::new("gaussian-complex", phi, |x| libm::exp(-0.5 * (x[0] * x[0] + x[1] * x[1])) / (2.0 * PI))
    }

    pub fn cauchy() -> Self {
        Self::new("cauchy", CharFn::cauchy(), |x| 1.0 / (PI * (1.0 + x[0] * x[0])))
    }

    pub fn laplace() -> Self {
        Self::new("laplace", CharFn::laplace(), |x| 0.5 * libm::exp(-x[0].abs()))
    }

    pub fn stable(p: f64) -> Result<Self> {
        Ok(Self::from_charfn(format!("stable({p})"), CharFn::stable(p)?))
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn density_at(&self, x: Point) -> Result<f64> {
        (self.density)(x)
    }

    /// Largest gap between the stored density and Fourier inversion on `grid`.
    pub fn density_mismatch(&self, grid: &[Point]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &x in grid {
            worst = worst.max((self.density_at(x)? - density_at(&self.phi, x)?).abs());
        }
        Ok(worst)
    }

    /// Law translated by `-alpha`: characteristic function `φ(t)e^{-i⟨t,α⟩}`, density `x ↦ f(x+α)`.
    pub fn shifted(&self, alpha: Point) -> Self {
        let inner = self.density.clone();
        ReferenceLaw {
            name: format!("{} shifted by ({}, {})", self.name, alpha[0], alpha[1]),
            phi: self.phi.translate([-alpha[0], -alpha[1]]),
            density: Arc::new(move |x| inner([x[0] + alpha[0], x[1] + alpha[1]])),
        }
    }
}

/// A family `X_n` with its scalings and limit law.
#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub dim: usize,
    pub index_set: Vec<f64>,
    pub charfn_of: CharFnSeq,
    pub scaling: ScalingSeq,
    pub reference: ReferenceLaw,
    pub exact_prob: Option<ExactProb>,
    pub sampler: Option<SamplerSeq>,
    /// `k ↦ h` with `|φ_n(Σ_n* t)| ≤ h(t)` whenever `|Σ_n* t| ≤ k`.
    pub domination_h: Option<EnvelopeFamily>,
    /// Lattice or atomic laws: the analytic inversion path is refused.
    pub discrete: bool,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        index_set: Vec<f64>,
        charfn_of: impl Fn(f64) -> Result<CharFn> + Send + Sync + 'static,
        scaling: ScalingSeq,
        reference: ReferenceLaw,
    ) -> Result<Self> {
        let dim = scaling.dim();
        if reference.dim() != dim {
            return Err(Error::Precondition(format!(
                "reference law on R^{} for a scaling on R^{dim}",
                reference.dim()
            )));
        }
        if index_set.iter().any(|n| !n.is_finite()) || index_set.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition(format!("index set must be finite and increasing: {index_set:?}")));
        }
        Ok(Scenario {
            name: name.into(),
            dim,
            index_set,
            charfn_of: Arc::new(charfn_of),
            scaling,
            reference,
            exact_prob: None,
            sampler: None,
            domination_h: None,
            discrete: false,
        })
    }

    pub fn with_exact(mut self, f: impl Fn(f64, &Region) -> Result<f64> + Send + Sync + 'static) -> Self {
        self.exact_prob = Some(Arc::new(f));
        self
    }

    pub fn with_sampler(mut self, f: impl Fn(f64) -> Result<Sampler> + Send + Sync + 'static) -> Self {
        self.sampler = Some(Arc::new(f));
        self
    }

    pub fn with_domination(mut self, f: impl Fn(f64) -> Option<Envelope> + Send + Sync + 'static) -> Self {
        self.domination_h = Some(Arc::new(f));
        self
    }

    pub fn discrete(mut self, yes: bool) -> Self {
        self.discrete = yes;
        self
    }

    pub fn charfn(&self, n: f64) -> Result<CharFn> {
        (self.charfn_of)(n)
    }

    /// `s ↦ φ_n(Σ_n* s)`.
    pub fn rescaled_charfn(&self, n: f64) -> Result<CharFn> {
        let s = self.scaling.sigma(n)?;
        let adj = if self.dim == 1 { Mat2::diag(s.0[0][0], 1.0) } else { s.transpose() };
        self.charfn(n)?.compose_linear(adj)
    }

    /// `(dμ/dm)(0)·m(B)`.
    pub fn predicted_limit(&self, region: &Region) -> Result<f64> {
        Ok(self.reference.density_at([0.0, 0.0])? * region.measure())
    }

    /// Worst violation of the characteristic-function axioms of `φ_n` on `grid`.
    pub fn axiom_violation(&self, n: f64, grid: &[Point]) -> Result<f64> {
        Ok(self.charfn(n)?.axiom_violation(grid))
    }
}

/// Per-index values with a decreasing-trend flag.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub ns: Vec<f64>,
    pub values: Vec<f64>,
    pub decreasing: bool,
}

impl TrendReport {
    fn new(ns: &[f64], values: Vec<f64>) -> Self {
        let decreasing = decreasing_trend(&values);
        TrendReport { ns: ns.to_vec(), values, decreasing }
    }
}

/// `sup_{t ∈ grid} |φ_n(Σ_n* t) - φ(t)|` for each `n`.
pub fn check_h2(scn: &Scenario, ns: &[f64], t_grid: &[Point]) -> Result<TrendReport> {
    let mut values = Vec::with_capacity(ns.len());
    for &n in ns {
        let psi = scn.rescaled_charfn(n)?;
        let mut worst: f64 = 0.0;
        for &t in t_grid {
            worst = worst.max((psi.eval(t) - scn.reference.phi.eval(t)).norm());
        }
        values.push(worst);
    }
    Ok(TrendReport::new(ns, values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    pub k: f64,
    pub holds: bool,
    /// `max |φ_n(Σ_n* t)| / h(t)` over the checked points.
    pub worst_ratio: f64,
    pub checked_points: usize,
}

/// Checks `|φ_n(Σ_n* t)| ≤ h(t)` on `{t ∈ grid : |Σ_n* t| ≤ k}`.
pub fn check_h3_domination(scn: &Scenario, k: f64, ns: &[f64], t_grid: &[Point]) -> Result<DominationReport> {
    let h = scn
        .domination_h
        .as_ref()
        .and_then(|family| family(k))
        .ok_or(Error::MissingEnvelope(k))?;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for &n in ns {
        let adj = adjoint(scn.dim, &scn.scaling.sigma(n)?);
        let phi_n = scn.charfn(n)?;
        for &t in t_grid {
            let arg = adj.apply(t);
            if norm_in(scn.dim, arg) > k {
                continue;
            }
            let bound = h(t);
            let v = phi_n.eval(arg).norm();
            let ratio = if bound > 0.0 {
                v / bound
            } else if v > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            worst = worst.max(ratio);
            checked += 1;
        }
    }
    Ok(DominationReport { k, holds: worst <= 1.0, worst_ratio: worst, checked_points: checked })
}

const RADIAL_QUAD: QuadOptions = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-8, max_panels: 400_000 };
const ANGLES: usize = 128;

/// `∫_{lo ≤ |t| ≤ hi(direction)} |f(t)| dt`, with `panels_per_unit` initial panels per unit radius.
fn shell_integral(
    dim: usize,
    f: &dyn Fn(Point) -> f64,
    lo: f64,
    hi: &dyn Fn(Point) -> f64,
    panels_per_unit: f64,
) -> f64 {
    let radial = |u: Point, weight: f64| -> f64 {
        let top = hi(u);
        if top <= lo {
            return 0.0;
        }
        let pieces = libm::ceil((top - lo) * panels_per_unit).clamp(8.0, 200_000.0) as usize;
        let breaks: Vec<f64> = (0..=pieces).map(|i| lo + (top - lo) * i as f64 / pieces as f64).collect();
        let mut g = |r: f64| [f([r * u[0], r * u[1]]).abs() * if dim == 1 { 1.0 } else { r }];
        integrate_panels(&mut g, &breaks, RADIAL_QUAD).value[0] * weight
    };
    if dim == 1 {
        radial([1.0, 0.0], 1.0) + radial([-1.0, 0.0], 1.0)
    } else {
        let dtheta = 2.0 * PI / ANGLES as f64;
        (0..ANGLES)
            .map(|j| {
                let th = (j as f64 + 0.5) * dtheta;
                radial([libm::cos(th), libm::sin(th)], dtheta)
            })
            .sum()
    }
}

/// `|det A_n| ∫_{ε ≤ |t| ≤ k} |φ_n(t)| dt` for each `n`.
pub fn check_h3prime(scn: &Scenario, eps: f64, k: f64, ns: &[f64]) -> Result<TrendReport> {
    if !(eps > 0.0 && eps < k) {
        return Err(Error::Domain(format!("need 0 < eps < k, got eps = {eps}, k = {k}")));
    }
    let mut values = Vec::with_capacity(ns.len());
    for &n in ns {
        let phi_n = scn.charfn(n)?;
        // |φ_n| varies on the scale 1/‖A_n‖
        let a_norm = op_norm(scn.dim, &scn.scaling.a(n));
        let per_unit = (4.0 * a_norm / PI).max(16.0);
        let v = shell_integral(scn.dim, &|t| phi_n.eval(t).norm(), eps, &|_| k, per_unit);
        values.push(scn.scaling.det_a(n) * v);
    }
    Ok(TrendReport::new(ns, values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct H4Report {
    pub trend: TrendReport,
    /// `∫_{|t| ≥ a} |φ(t)| dt` for the limit, the level the values are compared with.
    pub reference_tail: f64,
}

/// `∫_{a ≤ |t|, |Σ_n* t| ≤ ε} |φ_n(Σ_n* t)| dt` for each `n`.
pub fn check_h4prime(scn: &Scenario, a: f64, eps: f64, ns: &[f64]) -> Result<H4Report> {
    if !(a > 0.0 && eps > 0.0) {
        return Err(Error::Domain(format!("need a > 0 and eps > 0, got a = {a}, eps = {eps}")));
    }
    let mut values = Vec::with_capacity(ns.len());
    for &n in ns {
        let psi = scn.rescaled_charfn(n)?;
        let adj = adjoint(scn.dim, &scn.scaling.sigma(n)?);
        let dim = scn.dim;
        let hi = move |u: Point| {
            let g = norm_in(dim, adj.apply(u));
            if g > 0.0 {
                eps / g
            } else {
                f64::INFINITY
            }
        };
        values.push(shell_integral(scn.dim, &|t| psi.eval(t).norm(), a, &hi, 4.0));
    }
    let phi = &scn.reference.phi;
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-10, max_panels: 20_000 };
    let reference_tail = if scn.dim == 1 {
        integrate_to_inf(|r| phi.eval1(r).norm() + phi.eval1(-r).norm(), a, opts).value[0]
    } else {
        let dtheta = 2.0 * PI / ANGLES as f64;
        (0..ANGLES)
            .map(|j| {
                let th = (j as f64 + 0.5) * dtheta;
                let (s, c) = libm::sincos(th);
                integrate_to_inf(|r| r * phi.eval([r * c, r * s]).norm(), a, opts).value[0] * dtheta
            })
            .sum()
    };
    Ok(H4Report { trend: TrendReport::new(ns, values), reference_tail })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Analytic,
    MonteCarlo,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Analytic => "analytic",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McParams {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalLimitReport {
    pub n: f64,
    pub region: Region,
    /// `|det A_n| P[X_n ∈ B]`.
    pub scaled_probability: f64,
    /// `(dμ/dm)(0) m(B)`.
    pub predicted_limit: f64,
    pub method: Method,
    pub stderr: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    /// Kish effective sample size of weighted draws.
    pub effective_samples: Option<f64>,
    /// Whether the prediction lies within four standard errors.
    pub consistent: Option<bool>,
}

/// Estimates `|det A_n| P[X_n ∈ B]` and the predicted limit.
pub fn local_limit(
    scn: &Scenario,
    n: f64,
    region: &Region,
    method: Method,
    mc: Option<&McParams>,
    exec: &dyn Executor,
) -> Result<LocalLimitReport> {
    if region.dim() != scn.dim {
        return Err(Error::Precondition(format!("region on R^{} for a scenario on R^{}", region.dim(), scn.dim)));
    }
    let region = region.validated()?;
    let det = scn.scaling.det_a(n);
    let predicted = scn.predicted_limit(&region)?;
    let mut report = LocalLimitReport {
        n,
        region,
        scaled_probability: 0.0,
        predicted_limit: predicted,
        method,
        stderr: None,
        samples: None,
        seed: None,
        effective_samples: None,
        consistent: None,
    };
    match method {
        Method::Exact => {
            let f = scn
                .exact_prob
                .as_ref()
                .ok_or_else(|| Error::MethodUnavailable(format!("{} has no exact probabilities", scn.name)))?;
            report.scaled_probability = det * f(n, &region)?;
        }
        Method::Analytic => {
            if scn.discrete {
                return Err(Error::MethodUnavailable(format!(
                    "{} is discrete; density inversion does not apply",
                    scn.name
                )));
            }
            let psi = scn.rescaled_charfn(n)?;
            let sigma = scn.scaling.sigma(n)?;
            let inv = rescaled_probability(&psi, &region, &sigma, &InversionOptions::default())?;
            report.scaled_probability = inv.value;
        }
        Method::MonteCarlo => {
            let params = mc.ok_or_else(|| Error::Precondition("Monte Carlo needs sample parameters".into()))?;
            let make = scn
                .sampler
                .as_ref()
                .ok_or_else(|| Error::MethodUnavailable(format!("{} has no sampler", scn.name)))?;
            let sampler = make(n)?;
            let est = hit_probability(exec, &sampler, params.samples, params.seed, |x| region.contains(x))?;
            let se = det * est.stderr;
            report.scaled_probability = det * est.p;
            report.stderr = Some(se);
            report.samples = Some(params.samples);
            report.seed = Some(params.seed);
            report.effective_samples = Some(est.effective_samples);
            report.consistent = Some((report.scaled_probability - predicted).abs() <= 4.0 * se);
        }
    }
    // inversion noise can leave tiny negative values
    report.scaled_probability = finite(report.scaled_probability, "scaled probability")?.max(0.0);
    Ok(report)
}

/// `Y_n = X_n - α_n`, whose limit has characteristic function `φ(t)e^{-i⟨t,α⟩}`.
///
/// Fails with a calibration error unless `|Σ_n α_n - α|` decreases along the
/// index set to at most `0.05·max(1, |α|)`.
pub fn shift_mean(
    scn: &Scenario,
    alpha: Point,
    alpha_n: impl Fn(f64) -> Point + Send + Sync + 'static,
) -> Result<Scenario> {
    let alpha_n: Arc<dyn Fn(f64) -> Point + Send + Sync> = Arc::new(alpha_n);
    let mut drift = Vec::with_capacity(scn.index_set.len());
    for &n in &scn.index_set {
        let s = scn.scaling.sigma(n)?;
        let v = alpha_n(n);
        let w = if scn.dim == 1 { [s.0[0][0] * v[0], 0.0] } else { s.apply(v) };
        drift.push(norm_in(scn.dim, [w[0] - alpha[0], w[1] - alpha[1]]));
    }
    let scale = norm_in(scn.dim, alpha).max(1.0);
    // rounding-level drifts count as exact
    for d in drift.iter_mut() {
        if *d <= 1e-12 * scale {
            *d = 0.0;
        }
    }
    let last = drift.last().copied().unwrap_or(0.0);
    if !nonincreasing_with_slack(&drift, TREND_SLACK) || last > 0.05 * scale {
        return Err(Error::Calibration(format!("Σ_n α_n does not approach α: distances {drift:?}")));
    }
    let inner_phi = scn.charfn_of.clone();
    let an = alpha_n.clone();
    let charfn_of = move |n: f64| -> Result<CharFn> {
        let v = an(n);
        Ok(inner_phi(n)?.translate([-v[0], -v[1]]))
    };
    let mut out = Scenario {
        name: format!("{} shifted", scn.name),
        dim: scn.dim,
        index_set: scn.index_set.clone(),
        charfn_of: Arc::new(charfn_of),
        scaling: scn.scaling.clone(),
        reference: scn.reference.shifted(alpha),
        exact_prob: None,
        sampler: None,
        domination_h: scn.domination_h.clone(),
        discrete: scn.discrete,
    };
    if let Some(exact) = scn.exact_prob.clone() {
        let an = alpha_n.clone();
        out.exact_prob = Some(Arc::new(move |n, b: &Region| exact(n, &b.translate(an(n)))));
    }
    if let Some(make) = scn.sampler.clone() {
        let an = alpha_n.clone();
        out.sampler = Some(Arc::new(move |n| {
            let inner = make(n)?;
            let v = an(n);
            let s: Sampler = Arc::new(move |rng: &mut ChaCha8Rng| {
                let d = inner(rng);
                Sample { x: [d.x[0] - v[0], d.x[1] - v[1]], w: d.w }
            });
            Ok(s)
        }));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub holds: bool,
    /// `max |Σ_n t|` over `|Σ_n T_n t| = 1`, maximized over the indices.
    pub worst: f64,
    pub worst_index: f64,
    /// Direction `t` attaining `worst`.
    pub witness: Point,
    pub per_index: Vec<f64>,
    /// The same search with both maps replaced by their adjoints; always at most `sup ‖T_n⁻¹‖`.
    pub adjoint_worst: f64,
}

pub const BALANCE_DIRECTIONS: usize = 720;

/// Searches `|Σ_n T_n t| = 1` over 720 directions for the largest `|Σ_n t|`.
/// On the line the condition always holds and `worst` is the witness constant.
pub fn balancedness_check(
    sigma_n: &dyn Fn(f64) -> Mat2,
    t_n: &dyn Fn(f64) -> Mat2,
    dim: usize,
    ns: &[f64],
    c_max: f64,
) -> Result<BalanceReport> {
    let mut report = BalanceReport {
        holds: true,
        worst: 0.0,
        worst_index: f64::NAN,
        witness: [0.0, 0.0],
        per_index: Vec::with_capacity(ns.len()),
        adjoint_worst: 0.0,
    };
    for &n in ns {
        let s = sigma_n(n);
        let t = t_n(n);
        let st = s.mul(&t);
        let (mut best, mut arg, mut best_adj) = (0.0f64, [0.0, 0.0], 0.0f64);
        if dim == 1 {
            let v = (s.0[0][0] / st.0[0][0]).abs();
            best = v;
            best_adj = v;
            arg = [1.0 / st.0[0][0].abs(), 0.0];
        } else {
            let (s_adj, st_adj) = (s.transpose(), st.transpose());
            for j in 0..BALANCE_DIRECTIONS {
                let th = 2.0 * PI * j as f64 / BALANCE_DIRECTIONS as f64;
                let u = [libm::cos(th), libm::sin(th)];
                let w = norm_in(2, st.apply(u));
                if w == 0.0 {
                    return Err(Error::Precondition(format!("Σ_n T_n is singular at n = {n}")));
                }
                let v = norm_in(2, s.apply(u)) / w;
                if v > best {
                    best = v;
                    arg = [u[0] / w, u[1] / w];
                }
                let wa = norm_in(2, st_adj.apply(u));
                best_adj = best_adj.max(norm_in(2, s_adj.apply(u)) / wa);
            }
        }
        report.per_index.push(best);
        report.adjoint_worst = report.adjoint_worst.max(best_adj);
        if best > report.worst || report.worst_index.is_nan() {
            report.worst = best;
            report.worst_index = n;
            report.witness = arg;
        }
    }
    report.holds = dim == 1 || report.worst <= c_max;
    Ok(report)
}

/// `T_n⁻¹ X_n` with scalings `(Σ_n T_n)⁻¹`; its scaled probabilities are
/// `|det A_n|/|det T_n| P[X_n ∈ T_n B]`.
///
/// Requires `‖Σ_n T_n‖` to decrease along the index set and, unless
/// `allow_unbalanced`, the balancedness search to pass with constant `c_max`.
pub fn linear_change(
    scn: &Scenario,
    t_n: impl Fn(f64) -> Mat2 + Send + Sync + 'static,
    c_max: f64,
    allow_unbalanced: bool,
) -> Result<Scenario> {
    let dim = scn.dim;
    let t_n: MatrixSeq = Arc::new(move |n| {
        let m = t_n(n);
        if dim == 1 {
            Mat2::diag(m.0[0][0], 1.0)
        } else {
            m
        }
    });
    let mut norms = Vec::with_capacity(scn.index_set.len());
    for &n in &scn.index_set {
        let st = scn.scaling.sigma(n)?.mul(&t_n(n));
        norms.push(op_norm(dim, &st));
    }
    if !decreasing_trend(&norms) {
        return Err(Error::Precondition(format!("‖Σ_n T_n‖ does not decrease: {norms:?}")));
    }
    let sc = scn.scaling.clone();
    let sigma_fn = move |n: f64| sc.sigma(n).unwrap_or(Mat2::IDENTITY);
    let tf = t_n.clone();
    let balance = balancedness_check(&sigma_fn, &|n| tf(n), dim, &scn.index_set, c_max)?;
    if !balance.holds && !allow_unbalanced {
        return Err(Error::Unbalanced(balance.worst));
    }

    let inner_phi = scn.charfn_of.clone();
    let tf = t_n.clone();
    let charfn_of = move |n: f64| -> Result<CharFn> {
        let tinv = tf(n).inverse()?;
        let adj = if dim == 1 { tinv } else { tinv.transpose() };
        inner_phi(n)?.compose_linear(adj)
    };
    let sc = scn.scaling.clone();
    let tf = t_n.clone();
    let a_of: MatrixSeq = Arc::new(move |n| {
        let t = tf(n);
        match t.inverse() {
            Ok(ti) => ti.mul(&sc.a(n)),
            Err(_) => Mat2([[f64::NAN; 2]; 2]),
        }
    });
    let mut out = Scenario {
        name: format!("{} after linear change", scn.name),
        dim,
        index_set: scn.index_set.clone(),
        charfn_of: Arc::new(charfn_of),
        scaling: ScalingSeq { dim, a_of },
        reference: scn.reference.clone(),
        exact_prob: None,
        sampler: None,
        domination_h: scn.domination_h.clone(),
        discrete: scn.discrete,
    };
    if let Some(exact) = scn.exact_prob.clone() {
        let tf = t_n.clone();
        out.exact_prob = Some(Arc::new(move |n, b: &Region| {
            let image = b
                .linear_image(&tf(n))
                .ok_or_else(|| Error::Precondition(format!("image of {} under T_n is not a supported region", b.describe())))?;
            exact(n, &image)
        }));
    }
    if let Some(make) = scn.sampler.clone() {
        let tf = t_n.clone();
        out.sampler = Some(Arc::new(move |n| {
            let inner = make(n)?;
            let tinv = tf(n).inverse()?;
            let s: Sampler = Arc::new(move |rng: &mut ChaCha8Rng| {
                let d = inner(rng);
                let y = if dim == 1 { [tinv.0[0][0] * d.x[0], 0.0] } else { tinv.apply(d.x) };
                Sample { x: y, w: d.w }
            });
            Ok(s)
        }));
    }
    Ok(out)
}
