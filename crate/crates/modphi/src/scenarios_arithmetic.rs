//! Arithmetic case studies: Dedekind sums over Farey-type pairs, the
//! ζ-distribution, and random models of squarefree integers together with
//! two lattice-valued models that satisfy H1 and H2 but fail the local limit.

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use once_cell::race::OnceBox;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::arith::{count_irreducible, dedekind_sum_scaled, enumerate_coprime_pairs, mobius, sieve_primes};
use crate::engine::{nonincreasing_with_slack, ReferenceLaw, ScalingSeq, Scenario, TREND_SLACK};
use crate::fourier::{CharFn, Region};
use crate::limits::{self, Cap};
use crate::mc::{Sample, Sampler};
use crate::numerics::{fft, integrate_panels, NeumaierSum, QuadOptions};
use crate::scenarios_classical::uniform_open;
use crate::specfun::{cosine_integral, dickman_rho, dickman_rho_sq_integral, hurwitz_zeta, power_sum, zeta_complex, zeta_real, EULER_GAMMA};
use crate::{Error, Result};

type IndexMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

fn interval_of(region: &Region) -> Result<(f64, f64)> {
    match *region {
        Region::Interval { a, b } => Ok((a, b)),
        _ => Err(Error::Precondition("arithmetic scenarios live on the line".into())),
    }
}

fn check_increasing(index: &[f64]) -> Result<()> {
    if index.is_empty() || index.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(format!("index set must be nonempty and increasing: {index:?}")));
    }
    Ok(())
}

/// Lazily built per-index tables.
struct PerIndex<T> {
    slots: Vec<(f64, OnceBox<Arc<T>>)>,
}

impl<T> PerIndex<T> {
    fn new(index: &[f64]) -> Self {
        PerIndex { slots: index.iter().map(|&i| (i, OnceBox::new())).collect() }
    }

    fn get(&self, i: f64, build: impl FnOnce() -> Result<T>) -> Result<Arc<T>> {
        match self.slots.iter().find(|(j, _)| *j == i) {
            Some((_, slot)) => slot.get_or_try_init(|| build().map(|t| Box::new(Arc::new(t)))).cloned(),
            None => build().map(Arc::new),
        }
    }
}

// ---------------------------------------------------------------------------
// Dedekind sums

/// Values of s(d, c) over `0 < d < c < N`, `gcd(d, c) = 1`.
///
/// The law is symmetric under `d ↦ c − d`; only `d < c/2` is stored, plus the
/// single self-paired point `(1, 2)` with value 0.
#[derive(Debug, Clone)]
pub struct DedekindTable {
    pub n: u64,
    /// Number of pairs, `Σ_{2≤c<N} φ(c)`.
    pub count: u64,
    half: Vec<f64>,
}

impl DedekindTable {
    pub fn build(n: u64) -> Result<Self> {
        limits::check(Cap::DedekindN, n)?;
        let (pairs, count) = enumerate_coprime_pairs(n)?;
        let mut half = Vec::with_capacity((count / 2) as usize);
        for pair in pairs {
            if 2 * pair.d < pair.c {
                let u = dedekind_sum_scaled(pair.d, pair.c)?;
                half.push(u as f64 / (12 * pair.c) as f64);
            }
        }
        half.sort_by(f64::total_cmp);
        Ok(DedekindTable { n, count, half })
    }

    fn count_in(&self, lo: f64, hi: f64) -> u64 {
        // stored values in [lo, hi) plus their negatives in [lo, hi)
        let pos = self.half.partition_point(|&v| v < hi) - self.half.partition_point(|&v| v < lo);
        let neg = self.half.partition_point(|&v| v <= -lo) - self.half.partition_point(|&v| v <= -hi);
        let origin = u64::from(lo <= 0.0 && 0.0 < hi);
        (pos + neg) as u64 + origin
    }

    /// P_N[lo ≤ s < hi].
    pub fn probability(&self, lo: f64, hi: f64) -> f64 {
        self.count_in(lo, hi) as f64 / self.count as f64
    }

    /// E[cos(u·s)]; the law is symmetric, so this is the characteristic function.
    pub fn charfn(&self, u: f64) -> f64 {
        let mut acc = NeumaierSum::new();
        for &v in &self.half {
            acc.add(libm::cos(u * v));
        }
        (2.0 * acc.value() + 1.0) / self.count as f64
    }

    /// One uniform draw from the pairs.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let k = rng.random_range(0..self.count);
        let i = (k / 2) as usize;
        if i >= self.half.len() {
            0.0
        } else if k % 2 == 0 {
            self.half[i]
        } else {
            -self.half[i]
        }
    }
}

/// Default normalisation `τ_N = log log N`.
pub fn default_tau(n: f64) -> f64 {
    libm::log(libm::log(n))
}

/// `τ_N = √(log N)`.
pub fn sqrt_log_tau(n: f64) -> f64 {
    libm::sqrt(libm::log(n))
}

fn dedekind_build(name: &str, ns: Vec<f64>, tau: IndexMap) -> Result<Scenario> {
    check_increasing(&ns)?;
    for &n in &ns {
        if n < 3.0 || n != libm::floor(n) {
            return Err(Error::Precondition(format!("N = {n} must be an integer >= 3")));
        }
        limits::check(Cap::DedekindN, n as u64)?;
    }
    let tables: Arc<PerIndex<DedekindTable>> = Arc::new(PerIndex::new(&ns));
    let t1 = tables.clone();
    let tau1 = tau.clone();
    let charfn_of = move |n: f64| -> Result<CharFn> {
        let table = t1.get(n, || DedekindTable::build(n as u64))?;
        let tn = tau1(n);
        Ok(CharFn::line(move |t| Complex64::new(table.charfn(t / tn), 0.0)))
    };
    let tau2 = tau.clone();
    let scaling = ScalingSeq::scalar(move |n| libm::log(n) / (2.0 * PI * tau2(n)));
    let t2 = tables.clone();
    let tau3 = tau.clone();
    let t3 = tables;
    let tau4 = tau;
    Ok(Scenario::new(name, ns, charfn_of, scaling, ReferenceLaw::cauchy())?
        .discrete(true)
        .with_exact(move |n, region| {
            let (a, b) = interval_of(region)?;
            let tn = tau3(n);
            let table = t2.get(n, || DedekindTable::build(n as u64))?;
            Ok(table.probability(a * tn, b * tn))
        })
        .with_sampler(move |n| {
            let table = t3.get(n, || DedekindTable::build(n as u64))?;
            let tn = tau4(n);
            let s: Sampler = Arc::new(move |rng: &mut ChaCha8Rng| Sample::scalar(table.sample(rng) / tn));
            Ok(s)
        }))
}

/// `X_N/τ_N` with `X_N = s(d, c)` uniform over the coprime pairs below `N`,
/// scaled by `A_N = log N/(2π τ_N)` against the Cauchy law.
///
/// `tau` defaults to `log log N`; it must increase along the index set, as
/// must `log N/τ_N`.
pub fn dedekind_scenario(ns: Vec<f64>, tau: Option<IndexMap>) -> Result<Scenario> {
    let tau = tau.unwrap_or_else(|| Arc::new(default_tau));
    let taus: Vec<f64> = ns.iter().map(|&n| tau(n)).collect();
    let ratios: Vec<f64> = ns.iter().zip(&taus).map(|(&n, &t)| libm::log(n) / t).collect();
    if taus.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Precondition(format!("τ_N must be positive: {taus:?}")));
    }
    if taus.windows(2).any(|w| w[1] <= w[0]) || ratios.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(format!(
            "τ_N and log N/τ_N must both increase: τ = {taus:?}, log N/τ = {ratios:?}"
        )));
    }
    dedekind_build("dedekind", ns, tau)
}

/// The unnormalised Dedekind sums, `τ_N = 1`.
pub fn dedekind_unscaled_scenario(ns: Vec<f64>) -> Result<Scenario> {
    dedekind_build("dedekind-unscaled", ns, Arc::new(|_| 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub n: f64,
    /// Smallest `C` with `|φ_N(2πt)| ≤ C N^{-|t|} + N^{-1/3}` on the grid.
    pub fitted_c: f64,
    /// max over the grid of `|φ_N(2πt)| / (C N^{-|t|} + N^{-1/3})` with the global `C`.
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    /// Largest fitted constant over all `N`.
    pub c: f64,
    /// Fitted constants grow along `N` beyond the trend slack.
    pub drifting: bool,
}

/// Fits the constant in `|φ_N(2πt)| ≤ C N^{-|t|} + N^{-1/3}` for `t ∈ (0, 1/4]`.
pub fn vardi_bound_check(ns: &[f64], t_grid: &[f64]) -> Result<DecayReport> {
    check_increasing(ns)?;
    if t_grid.is_empty() || t_grid.iter().any(|t| !(t.abs() > 0.0 && t.abs() <= 0.25)) {
        return Err(Error::Precondition("t grid must lie in 0 < |t| <= 1/4".into()));
    }
    let mut fits = Vec::new();
    for &n in ns {
        if n < 3.0 || n != libm::floor(n) {
            return Err(Error::Precondition(format!("N = {n} must be an integer >= 3")));
        }
        let table = DedekindTable::build(n as u64)?;
        let floor = libm::pow(n, -1.0 / 3.0);
        let values: Vec<(f64, f64)> =
            t_grid.iter().map(|&t| (libm::pow(n, -t.abs()), table.charfn(2.0 * PI * t).abs())).collect();
        let c = values.iter().map(|&(main, v)| (v - floor).max(0.0) / main).fold(0.0, f64::max);
        fits.push((n, floor, c, values));
    }
    let c = fits.iter().map(|f| f.2).fold(0.0, f64::max);
    let fitted: Vec<f64> = fits.iter().map(|f| f.2).collect();
    let rows = fits
        .into_iter()
        .map(|(n, floor, fitted_c, values)| DecayRow {
            n,
            fitted_c,
            worst_ratio: values.iter().map(|&(main, v)| v / (c * main + floor)).fold(0.0, f64::max),
        })
        .collect();
    Ok(DecayReport { rows, c, drifting: !nonincreasing_with_slack(&fitted, TREND_SLACK) })
}

// ---------------------------------------------------------------------------
// ζ-distribution

const ZETA_HEAD_MIN: f64 = 1e6;
const ZETA_HEAD_MAX: f64 = 1e8;
const ZETA_TAIL_TOL: f64 = 1e-8;

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 1.0 && sigma <= 2.0) {
        return Err(Error::Domain(format!("σ = {sigma} outside (1, 2]")));
    }
    Ok(())
}

/// Σ_{n≥1} n^{-σ} Σ_{k: α ≤ k/n < β} k^{-σ}; either end may be open or closed.
///
/// Denominators up to a cutoff are summed exactly; beyond it the inner sum is
/// replaced by its integral, whose error is bounded and checked against
/// `1e-8` of the total mass `ζ(σ)²`.
fn ratio_mass(sigma: f64, alpha: f64, beta: f64, lower_closed: bool, upper_closed: bool) -> Result<f64> {
    check_sigma(sigma)?;
    if !(alpha > 0.0) || !(beta > alpha) {
        return Err(Error::Precondition(format!("ratio window ({alpha}, {beta}) is empty")));
    }
    let zeta = zeta_real(sigma)?;
    let scale = 2.0 * libm::pow(alpha, -sigma) / ((2.0 * sigma - 1.0) * zeta * zeta);
    let bound_at = |m: f64| scale * libm::pow(m, 1.0 - 2.0 * sigma);
    let needed = libm::pow(scale / ZETA_TAIL_TOL, 1.0 / (2.0 * sigma - 1.0));
    let head_len = libm::ceil(ZETA_HEAD_MIN.max(100.0 / alpha).max(needed));
    if head_len > ZETA_HEAD_MAX {
        return Err(Error::Truncation(bound_at(ZETA_HEAD_MAX)));
    }
    // past 2^53 the upper end is a continuum: Σ_{k>y} k^{-σ} = y^{1-σ}/(σ-1) to relative 1e-16
    const HUGE: f64 = 9.007_199_254_740_992e15;
    let m = head_len as u64;
    let mut acc = NeumaierSum::new();
    for n in 1..=m {
        let nf = n as f64;
        let lo = if lower_closed { libm::ceil(alpha * nf) } else { libm::floor(alpha * nf) + 1.0 }.max(1.0);
        let y = beta * nf;
        let inner = if y >= HUGE {
            hurwitz_zeta(sigma, lo)? - if beta.is_infinite() { 0.0 } else { libm::pow(y, 1.0 - sigma) / (sigma - 1.0) }
        } else {
            let hi = if upper_closed { libm::floor(y) } else { libm::ceil(y) - 1.0 };
            if hi < lo {
                continue;
            }
            power_sum(sigma, lo as u64, hi as u64)
        };
        acc.add(libm::pow(nf, -sigma) * inner);
    }
    let upper = if beta.is_infinite() { 0.0 } else { libm::pow(beta, 1.0 - sigma) };
    let coeff = (upper - libm::pow(alpha, 1.0 - sigma)) / (1.0 - sigma);
    acc.add(coeff * hurwitz_zeta(2.0 * sigma - 1.0, head_len + 1.0)?);
    Ok(acc.value())
}

/// P[a ≤ Y < b] for `Y = log X₁ − log X₂` with independent `P[X = n] = n^{-σ}/ζ(σ)`.
/// `b` may be `+∞`.
pub fn zeta_dist_probability(sigma: f64, a: f64, b: f64) -> Result<f64> {
    if !(a < b) || a.is_nan() {
        return Err(Error::Precondition(format!("empty interval [{a}, {b})")));
    }
    let zeta = zeta_real(sigma)?;
    // Y is symmetric; reflecting keeps the ratio window above 1, where the tail bound is small
    let mass = if a >= 0.0 {
        ratio_mass(sigma, libm::exp(a), libm::exp(b), true, false)?
    } else if b <= 0.0 {
        ratio_mass(sigma, libm::exp(-b), libm::exp(-a), false, true)?
    } else {
        ratio_mass(sigma, 1.0, libm::exp(-a), false, true)? + ratio_mass(sigma, 1.0, libm::exp(b), true, false)?
    };
    Ok(mass / (zeta * zeta))
}

/// `(σ−1) Σ (kn)^{-σ}` over coprime `k, n` with `α < k/n < β`.
pub fn coprime_ratio_sum(sigma: f64, alpha: f64, beta: f64) -> Result<f64> {
    // every pair is d·(k, n) with (k, n) coprime, so the full sum is ζ(2σ) times the coprime one
    Ok((sigma - 1.0) * ratio_mass(sigma, alpha, beta, false, false)? / zeta_real(2.0 * sigma)?)
}

/// Draws `log X` for `P[X = n] = n^{-σ}/ζ(σ)` by rejection from the Pareto
/// envelope, in log space so that `σ` close to 1 does not overflow.
fn sample_log_zeta(sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    let e = sigma - 1.0;
    let b_minus_one = libm::expm1(e * core::f64::consts::LN_2);
    let b = 1.0 + b_minus_one;
    loop {
        let log_x = -libm::log(uniform_open(rng)) / e;
        let v: f64 = rng.random();
        if log_x < 36.0 {
            let x = libm::floor(libm::exp(log_x));
            let t_minus_one = libm::expm1(e * libm::log1p(1.0 / x));
            if v * x * t_minus_one / b_minus_one <= (1.0 + t_minus_one) / b {
                return libm::log(x);
            }
        } else if v * e / b_minus_one <= 1.0 / b {
            return log_x;
        }
    }
}

/// Maps `σ ∈ (1, 2]` to the scenario index `1/(σ − 1)`.
pub fn zeta_index(sigma: f64) -> f64 {
    1.0 / (sigma - 1.0)
}

/// Inverse of [`zeta_index`].
pub fn zeta_sigma(index: f64) -> f64 {
    1.0 + 1.0 / index
}

/// `Y^σ = log X₁ − log X₂` for σ decreasing to 1, indexed by `1/(σ − 1)`,
/// with `A = 1/(σ − 1)` against the Laplace law.
pub fn zeta_dist_scenario(sigmas: &[f64]) -> Result<Scenario> {
    for &s in sigmas {
        check_sigma(s)?;
    }
    if sigmas.is_empty() || sigmas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition(format!("σ values must decrease: {sigmas:?}")));
    }
    let index: Vec<f64> = sigmas.iter().map(|&s| zeta_index(s)).collect();
    let charfn_of = |i: f64| -> Result<CharFn> {
        let sigma = zeta_sigma(i);
        let z = zeta_real(sigma)?;
        let norm = z * z;
        Ok(CharFn::line(move |t| match zeta_complex(sigma, t) {
            Ok(v) => Complex64::new(v.norm_sqr() / norm, 0.0),
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }))
    };
    Ok(Scenario::new("zeta-dist", index, charfn_of, ScalingSeq::scalar(|i| i), ReferenceLaw::laplace())?
        .discrete(true)
        .with_exact(|i, region| {
            let (a, b) = interval_of(region)?;
            zeta_dist_probability(zeta_sigma(i), a, b)
        })
        .with_sampler(|i| {
            let sigma = zeta_sigma(i);
            let s: Sampler = Arc::new(move |rng: &mut ChaCha8Rng| {
                let x1 = sample_log_zeta(sigma, rng);
                let x2 = sample_log_zeta(sigma, rng);
                Sample::scalar(x1 - x2)
            });
            Ok(s)
        }))
}

// ---------------------------------------------------------------------------
// Squarefree models

const SMALL_T: f64 = 1e-3;

/// Bound on `Ci` over `(0, ∞)`, attained at `π/2`.
const CI_MAX: f64 = 0.472_000_651_439_568_6;

/// `exp(−4∫₀¹ sin²(tv/2) dv/v)` by adaptive quadrature.
pub fn squarefree_limit_charfn_quadrature(t: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-13, ..QuadOptions::default() };
    let breaks = panel_breaks(0.0, 1.0, t.abs());
    let r = integrate_panels(
        &mut |v: f64| {
            if v == 0.0 {
                return [0.0];
            }
            let s = libm::sin(0.5 * t * v);
            [s * s / v]
        },
        &breaks,
        opts,
    );
    libm::exp(-4.0 * r.value[0])
}

fn panel_breaks(a: f64, b: f64, freq: f64) -> Vec<f64> {
    let pieces = (libm::ceil((b - a) * freq / PI) as usize).clamp(1, 4096);
    (0..=pieces).map(|k| a + (b - a) * k as f64 / pieces as f64).collect()
}

/// The limit characteristic function of the squarefree model,
/// `φ(t) = exp(−2γ − 2 log|t| + 2 Ci(|t|))`.
pub fn squarefree_limit_charfn(t: f64) -> f64 {
    let a = t.abs();
    if a <= SMALL_T {
        return squarefree_limit_charfn_quadrature(t);
    }
    match cosine_integral(a) {
        Ok(ci) => libm::exp(2.0 * (ci - EULER_GAMMA) - 2.0 * libm::log(a)),
        Err(_) => f64::NAN,
    }
}

/// `C` with `φ(t) ≤ C/t²` for all `t`.
pub fn squarefree_decay_constant() -> f64 {
    libm::exp(2.0 * (CI_MAX - EULER_GAMMA))
}

fn squarefree_limit() -> CharFn {
    let c = squarefree_decay_constant();
    CharFn::line(|t| Complex64::new(squarefree_limit_charfn(t), 0.0)).with_decay(move |r| (c / (r * r)).min(1.0))
}

/// `(1/2π)∫_{|t|≤T} φ(t) dt`.
pub fn eta_truncated(t_max: f64) -> f64 {
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_panels: 200_000 };
    let breaks = panel_breaks(0.0, t_max, 1.0);
    integrate_panels(&mut |t: f64| [squarefree_limit_charfn(t)], &breaks, opts).value[0] / PI
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaConstant {
    /// `(1/2π)∫φ`.
    pub value: f64,
    /// `e^{−2γ}∫ρ²`.
    pub dickman: f64,
    pub residual: f64,
}

static ETA: OnceBox<EtaConstant> = OnceBox::new();

const ETA_CUT: f64 = 2000.0;

fn eta_compute() -> Result<EtaConstant> {
    // beyond the cut, e^{2Ci(t)} = 1 + 2 sin t/t + O(t^{-2}) gives the tail in closed form
    let g = libm::exp(-2.0 * EULER_GAMMA);
    let tail = g * (1.0 / ETA_CUT + 2.0 * libm::cos(ETA_CUT) / (ETA_CUT * ETA_CUT * ETA_CUT));
    let value = eta_truncated(ETA_CUT) + tail / PI;
    let dickman = g * dickman_rho_sq_integral();
    let residual = (value - dickman).abs();
    if residual > 1e-4 {
        return Err(Error::CrossCheck(residual));
    }
    Ok(EtaConstant { value, dickman, residual })
}

/// The local-limit constant `η = (1/2π)∫φ = e^{−2γ}∫ρ(u)² du`, computed both ways.
pub fn eta_constant() -> Result<EtaConstant> {
    ETA.get_or_try_init(|| eta_compute().map(Box::new)).copied()
}

/// `ζ(2) e^{−γ} Σ_{k<e^a} μ²(k)/k`, the limit of `(log x) P[Y < e^a]` in the one-sided model.
pub fn one_sided_limit(a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("a = {a} must be positive")));
    }
    let top = k_below(a);
    limits::check(Cap::Sieve, top.max(2))?;
    let s = squarefree_smooth_harmonic(1, top, u64::MAX)?;
    Ok(PI * PI / 6.0 * libm::exp(-EULER_GAMMA) * s)
}

/// Largest integer `k` with `log k < a` (0 if none).
fn k_below(a: f64) -> u64 {
    let mut k = libm::ceil(libm::exp(a)).max(1.0) as u64;
    while k > 0 && libm::log(k as f64) >= a {
        k -= 1;
    }
    while libm::log((k + 1) as f64) < a {
        k += 1;
    }
    k
}

/// Σ 1/k over squarefree `k ∈ [lo, hi]` whose prime factors are all `≤ x`.
fn squarefree_smooth_harmonic(lo: u64, hi: u64, x: u64) -> Result<f64> {
    if hi < lo {
        return Ok(0.0);
    }
    let len = (hi - lo + 1) as usize;
    let mut rest: Vec<u64> = (lo..=hi).collect();
    let mut good = vec![true; len];
    if hi >= 2 {
        for p in sieve_primes(hi)? {
            let first = (lo + p - 1) / p * p;
            let mut m = first;
            while m <= hi {
                let i = (m - lo) as usize;
                if p <= x {
                    rest[i] /= p;
                } else {
                    good[i] = false;
                }
                m += p;
            }
            if let Some(pp) = p.checked_mul(p) {
                let mut m = (lo + pp - 1) / pp * pp;
                while m <= hi {
                    good[(m - lo) as usize] = false;
                    m += pp;
                }
            }
        }
    }
    let mut acc = NeumaierSum::new();
    for i in 0..len {
        if good[i] && rest[i] == 1 {
            acc.add(1.0 / (lo + i as u64) as f64);
        }
    }
    Ok(acc.value())
}

/// Which random model a squarefree scenario uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SquarefreeVariant {
    /// `Σ η_p log p` with `P[η_p = ±1] = p/(p+1)²`.
    Symmetrized,
    /// `Σ ν_p log p` with `P[ν_p = 1] = 1/(p+1)`.
    OneSided,
    /// `Σ deg(π) η_π` over monic irreducibles of degree at most `n` over 𝔽_q.
    FiniteField(u64),
    /// `Σ_{j≤n} (D_j − E_j)` with `P[D_j = j] = P[E_j = j] = 1/j`.
    Lattice,
}

impl SquarefreeVariant {
    pub fn parse(s: &str, q: Option<u64>) -> Result<Self> {
        match s {
            "symmetrized" => Ok(SquarefreeVariant::Symmetrized),
            "one-sided" => Ok(SquarefreeVariant::OneSided),
            "fq" => Ok(SquarefreeVariant::FiniteField(q.unwrap_or(2))),
            "lattice" => Ok(SquarefreeVariant::Lattice),
            _ => Err(Error::Precondition(format!("unknown squarefree variant {s:?}"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SquarefreeVariant::Symmetrized => "symmetrized",
            SquarefreeVariant::OneSided => "one-sided",
            SquarefreeVariant::FiniteField(_) => "fq",
            SquarefreeVariant::Lattice => "lattice",
        }
    }
}

/// Calls `hit(i)` for each success of independent Bernoulli(`probs[i]`);
/// `probs` must be nonincreasing. Geometric jumps at the current rate are
/// thinned to the rate at the landing point.
fn decreasing_bernoulli(probs: &[f64], rng: &mut ChaCha8Rng, mut hit: impl FnMut(usize)) {
    let mut i = 0;
    while i < probs.len() {
        let q = probs[i];
        if q >= 1.0 {
            hit(i);
            i += 1;
            continue;
        }
        if q <= 0.0 {
            return;
        }
        let skip = libm::floor(libm::log(uniform_open(rng)) / libm::log1p(-q));
        if skip >= (probs.len() - i) as f64 {
            return;
        }
        let j = i + skip as usize;
        if rng.random::<f64>() * q < probs[j] {
            hit(j);
        }
        i = j + 1;
    }
}

/// Primes up to each index and the largest of them.
struct PrimeModel {
    logs: Vec<f64>,
    primes: Vec<f64>,
}

fn prime_model(x: f64, all: &[u64]) -> PrimeModel {
    let primes: Vec<f64> = all.iter().take_while(|&&p| p as f64 <= x).map(|&p| p as f64).collect();
    PrimeModel { logs: primes.iter().map(|&p| libm::log(p)).collect(), primes }
}

fn prime_scenario(xs: Vec<f64>, one_sided: bool) -> Result<Scenario> {
    check_increasing(&xs)?;
    if xs[0] < 2.0 {
        return Err(Error::Precondition(format!("x = {} has no primes below it", xs[0])));
    }
    let top = xs[xs.len() - 1];
    limits::check(Cap::PrimeModel, libm::ceil(top) as u64)?;
    let all = sieve_primes(libm::floor(top) as u64)?;
    let models: Arc<Vec<(f64, Arc<PrimeModel>)>> =
        Arc::new(xs.iter().map(|&x| (x, Arc::new(prime_model(x, &all)))).collect());
    let all = Arc::new(all);
    let lookup = {
        let models = models.clone();
        let all = all.clone();
        move |x: f64| -> Result<Arc<PrimeModel>> {
            match models.iter().find(|(y, _)| *y == x) {
                Some((_, m)) => Ok(m.clone()),
                None if x >= 2.0 && x <= all[all.len() - 1] as f64 + 1.0 => Ok(Arc::new(prime_model(x, &all))),
                None => Err(Error::Precondition(format!("x = {x} outside the prepared prime range"))),
            }
        }
    };
    let scale_models = models.clone();
    let scaling = ScalingSeq::scalar(move |x| match scale_models.iter().find(|(y, _)| *y == x) {
        Some((_, m)) => m.logs[m.logs.len() - 1],
        None => libm::log(x),
    });
    let lk = lookup.clone();
    let scn = if one_sided {
        let charfn_of = move |x: f64| -> Result<CharFn> {
            let m = lk(x)?;
            Ok(CharFn::line(move |t| {
                let mut log_sum = Complex64::new(0.0, 0.0);
                for (&p, &l) in m.primes.iter().zip(&m.logs) {
                    let (s, c) = libm::sincos(t * l);
                    log_sum += (Complex64::new(p + c, s) / (p + 1.0)).ln();
                }
                log_sum.exp()
            }))
        };
        let lk2 = lookup.clone();
        let lk3 = lookup;
        Scenario::new("squarefree-one-sided", xs, charfn_of, scaling, one_sided_reference())?
            .discrete(true)
            .with_exact(move |x, region| {
                let (a, b) = interval_of(region)?;
                let m = lk2(x)?;
                let lo = k_below(a) + 1;
                let hi = k_below(b);
                if hi < lo {
                    return Ok(0.0);
                }
                limits::check(Cap::Sieve, hi)?;
                let xmax = m.primes.last().copied().unwrap_or(1.0) as u64;
                let z: f64 = m.primes.iter().map(|&p| libm::log1p(1.0 / p)).sum();
                Ok(squarefree_smooth_harmonic(lo, hi, xmax)? * libm::exp(-z))
            })
            .with_sampler(move |x| {
                let m = lk3(x)?;
                let probs: Vec<f64> = m.primes.iter().map(|&p| 1.0 / (p + 1.0)).collect();
                let s: Sampler = Arc::new(move |rng: &mut ChaCha8Rng| {
                    let mut acc = 0.0;
                    decreasing_bernoulli(&probs, rng, |i| acc += m.logs[i]);
                    Sample::scalar(acc)
                });
                Ok(s)
            })
    } else {
        let charfn_of = move |x: f64| -> Result<CharFn> {
            let m = lk(x)?;
            Ok(CharFn::line(move |t| Complex64::new(libm::exp(symmetrized_product_log(&m.primes, &m.logs, t)), 0.0)))
        };
        let lk3 = lookup;
        Scenario::new("squarefree", xs, charfn_of, scaling, squarefree_reference())?.discrete(true).with_sampler(
            move |x| {
                let m = lk3(x)?;
                let probs: Vec<f64> = m.primes.iter().map(|&p| 2.0 * p / ((p + 1.0) * (p + 1.0))).collect();
                let s: Sampler = Arc::new(move |rng: &mut ChaCha8Rng| {
                    let mut hits = Vec::new();
                    decreasing_bernoulli(&probs, rng, |i| hits.push(i));
                    let mut acc = 0.0;
                    for i in hits {
                        if rng.random::<bool>() {
                            acc += m.logs[i];
                        } else {
                            acc -= m.logs[i];
                        }
                    }
                    Sample::scalar(acc)
                });
                Ok(s)
            },
        )
    };
    Ok(scn)
}

/// `Σ_p log(1 − (4p/(p+1)²) sin²(t log p/2))`.
fn symmetrized_product_log(primes: &[f64], logs: &[f64], t: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    for (&p, &l) in primes.iter().zip(logs) {
        let s = libm::sin(0.5 * t * l);
        acc.add(libm::log1p(-4.0 * p / ((p + 1.0) * (p + 1.0)) * s * s));
    }
    acc.value()
}

/// The symmetrized characteristic function at `t` as a direct product over `p ≤ x`.
pub fn squarefree_product(x: u64, t: f64) -> Result<f64> {
    limits::check(Cap::PrimeModel, x)?;
    let mut v = 1.0;
    for p in sieve_primes(x)? {
        let pf = p as f64;
        let s = libm::sin(0.5 * t * libm::log(pf));
        v *= 1.0 - 4.0 * pf / ((pf + 1.0) * (pf + 1.0)) * s * s;
    }
    Ok(v)
}

fn squarefree_reference() -> ReferenceLaw {
    ReferenceLaw::from_charfn("squarefree-limit", squarefree_limit())
}

/// `exp(∫₀¹ (e^{itv} − 1) dv/v)`, the transform of `e^{−γ}ρ`.
pub fn one_sided_limit_charfn(t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, ..QuadOptions::default() };
    let breaks = panel_breaks(0.0, 1.0, t.abs());
    let r = integrate_panels(
        &mut |v: f64| {
            if v == 0.0 {
                return [0.0, t];
            }
            let (s, c) = libm::sincos(t * v);
            [(c - 1.0) / v, s / v]
        },
        &breaks,
        opts,
    );
    Complex64::new(r.value[0], r.value[1]).exp()
}

fn one_sided_reference() -> ReferenceLaw {
    let g = libm::exp(-EULER_GAMMA);
    ReferenceLaw::new("dickman", CharFn::line(one_sided_limit_charfn), move |x| {
        if x[0] < 0.0 {
            0.0
        } else {
            g * dickman_rho(x[0])
        }
    })
}

/// `Π_q(j)` in floating point; exact while it fits in 64 bits.
fn irreducible_count(q: u64, j: u32) -> Result<f64> {
    match count_irreducible(q, j) {
        Ok(c) => Ok(c as f64),
        Err(Error::Precondition(m)) if j <= 63 => Err(Error::Precondition(m)),
        Err(_) => {
            let qf = q as f64;
            let mut acc = 0.0;
            for d in 1..=j {
                if j % d == 0 {
                    acc += f64::from(mobius(u64::from(d))) * libm::pow(qf, f64::from(j / d));
                }
            }
            Ok(acc / f64::from(j))
        }
    }
}

/// Per-degree data of a lattice model: weight `j`, multiplicity and the
/// probability of a nonzero term.
#[derive(Debug, Clone)]
struct LatticeModel {
    terms: Vec<(f64, f64, f64)>,
}

impl LatticeModel {
    fn finite_field(q: u64, n: u32) -> Result<Self> {
        let qf = q as f64;
        let mut terms = Vec::with_capacity(n as usize);
        for j in 1..=n {
            let qj = libm::pow(qf, f64::from(j));
            terms.push((f64::from(j), irreducible_count(q, j)?, 2.0 * qj / ((qj + 1.0) * (qj + 1.0))));
        }
        Ok(LatticeModel { terms })
    }

    fn lattice(n: u32) -> Self {
        // D_j − E_j is ±j with probability (1/j)(1 − 1/j) each
        LatticeModel {
            terms: (1..=n)
                .map(|j| {
                    let jf = f64::from(j);
                    (jf, 1.0, 2.0 / jf * (1.0 - 1.0 / jf))
                })
                .collect(),
        }
    }

    fn charfn(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &(j, mult, q) in &self.terms {
            let s = libm::sin(0.5 * j * t);
            let factor = 1.0 - 2.0 * q * s * s;
            if factor <= 0.0 {
                return 0.0;
            }
            acc += mult * libm::log1p(-2.0 * q * s * s);
        }
        libm::exp(acc)
    }

    /// Probabilities of the integer values `−M/2 .. M/2` by inverse FFT.
    fn pmf(&self, width: usize) -> Vec<f64> {
        let m = width.next_power_of_two();
        let mut buf: Vec<Complex64> =
            (0..m).map(|k| Complex64::new(self.charfn(2.0 * PI * k as f64 / m as f64), 0.0)).collect();
        fft(&mut buf, false);
        let mut out = vec![0.0; m];
        for (k, v) in buf.iter().enumerate() {
            // value k for k < M/2, k − M otherwise; stored at offset M/2
            let value = if k < m / 2 { k as i64 } else { k as i64 - m as i64 };
            out[(value + (m / 2) as i64) as usize] = v.re / m as f64;
        }
        out
    }
}

/// Exact probabilities of an integer-valued model on a symmetric window.
#[derive(Debug, Clone)]
struct IntegerLaw {
    pmf: Vec<f64>,
}

impl IntegerLaw {
    fn probability(&self, a: f64, b: f64) -> f64 {
        let half = (self.pmf.len() / 2) as i64;
        let lo = (libm::ceil(a) as i64).max(-half);
        let hi = ((libm::ceil(b) as i64) - 1).min(half - 1);
        let mut acc = NeumaierSum::new();
        for k in lo..=hi {
            acc.add(self.pmf[(k + half) as usize]);
        }
        acc.value()
    }
}

const LATTICE_MAX_N: f64 = 4096.0;

fn lattice_scenario(ns: Vec<f64>, q: Option<u64>) -> Result<Scenario> {
    check_increasing(&ns)?;
    for &n in &ns {
        if n < 1.0 || n != libm::floor(n) || n > LATTICE_MAX_N {
            return Err(Error::Precondition(format!("degree bound {n} must be an integer in 1..={LATTICE_MAX_N}")));
        }
    }
    if let Some(q) = q {
        count_irreducible(q, 1)?;
    }
    let build = move |n: f64| -> Result<LatticeModel> {
        match q {
            Some(q) => LatticeModel::finite_field(q, n as u32),
            None => Ok(LatticeModel::lattice(n as u32)),
        }
    };
    let charfn_of = move |n: f64| -> Result<CharFn> {
        let model = build(n)?;
        Ok(CharFn::line(move |t| Complex64::new(model.charfn(t), 0.0)))
    };
    let laws: Arc<PerIndex<IntegerLaw>> = Arc::new(PerIndex::new(&ns));
    let name = if q.is_some() { "squarefree-fq" } else { "squarefree-lattice" };
    Ok(Scenario::new(name, ns, charfn_of, ScalingSeq::scalar(|n| n), squarefree_reference())?
        .discrete(true)
        .with_exact(move |n, region| {
            let (a, b) = interval_of(region)?;
            let law = laws.get(n, || Ok(IntegerLaw { pmf: build(n)?.pmf(64 * n as usize) }))?;
            Ok(law.probability(a, b))
        })
        .with_sampler(move |n| {
            let model = build(n)?;
            let mut draws = Vec::with_capacity(model.terms.len());
            for &(j, mult, p) in &model.terms {
                let law = if mult < 9.0e18 {
                    TermLaw::Binomial(Binomial::new(mult as u64, p).map_err(|e| Error::Domain(format!("{e}")))?)
                } else {
                    TermLaw::Poisson(Poisson::new(mult * p).map_err(|e| Error::Domain(format!("{e}")))?)
                };
                draws.push((j, law));
            }
            let s: Sampler = Arc::new(move |rng: &mut ChaCha8Rng| {
                let mut acc = 0.0;
                for (j, law) in &draws {
                    let k = match law {
                        TermLaw::Binomial(b) => b.sample(rng),
                        TermLaw::Poisson(p) => p.sample(rng) as u64,
                    };
                    if k == 0 {
                        continue;
                    }
                    let plus = Binomial::new(k, 0.5).map(|b| b.sample(rng)).unwrap_or(0);
                    acc += j * (2.0 * plus as f64 - k as f64);
                }
                Sample::scalar(acc)
            });
            Ok(s)
        }))
}

#[derive(Debug, Clone, Copy)]
enum TermLaw {
    Binomial(Binomial),
    Poisson(Poisson<f64>),
}

/// Squarefree-integer models indexed by the prime cutoff `x` (or the degree
/// bound `n` for the finite-field and lattice variants).
pub fn squarefree_scenario(xs: Vec<f64>, variant: SquarefreeVariant) -> Result<Scenario> {
    match variant {
        SquarefreeVariant::Symmetrized => prime_scenario(xs, false),
        SquarefreeVariant::OneSided => prime_scenario(xs, true),
        SquarefreeVariant::FiniteField(q) => lattice_scenario(xs, Some(q)),
        SquarefreeVariant::Lattice => lattice_scenario(xs, None),
    }
}
