//! Probability case studies: sums of stable increments, the winding number
//! of planar Brownian motion, relaxed Poisson variables and permutation
//! cycles, and a Gamma example for shifted local limits.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use once_cell::race::OnceBox;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::engine::{shift_mean, Envelope, ReferenceLaw, ScalingSeq, Scenario};
use crate::fourier::{interval_probability, CharFn, Region};
use crate::mc::{Sample, Sampler};
use crate::specfun::{bessel_i_log, log_gamma, zeta_real};
use crate::{Error, Result};

/// Increment laws for [`stable_scenario`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Increment {
    /// `ψ(t) = e^{-|t|^p}`.
    ExactStable,
    /// Standard Cauchy, `p = 1`.
    Cauchy,
    /// Uniform on `[-1, 1]`, attracted to `e^{-t²}` with `b_n = √(n/6)`.
    UniformSymmetric,
    /// `±1` with equal probability: a lattice law, always rejected.
    Rademacher,
}

impl Increment {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact-stable" => Ok(Increment::ExactStable),
            "cauchy" => Ok(Increment::Cauchy),
            "uniform-symmetric" => Ok(Increment::UniformSymmetric),
            "rademacher" => Ok(Increment::Rademacher),
            _ => Err(Error::Domain(format!("unknown increment law {s}"))),
        }
    }
}

pub(crate) fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    // (0, 1]
    1.0 - rng.random::<f64>()
}

/// Symmetric stable draw with characteristic function `e^{-|t|^p}`
/// (Chambers–Mallows–Stuck).
pub fn sample_symmetric_stable(p: f64, rng: &mut ChaCha8Rng) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    if p == 1.0 {
        return libm::tan(v);
    }
    let w: f64 = Exp1.sample(rng);
    libm::sin(p * v) / libm::pow(libm::cos(v), 1.0 / p) * libm::pow(libm::cos((1.0 - p) * v) / w, (1.0 - p) / p)
}

/// `X_n = Y_1 + … + Y_n` with `A_n = b_n`; the limit is `e^{-|t|^p}` with density `c_p` at 0.
///
/// `b_of` defaults to `n^{1/p}` for stable increments and `√(n/6)` for uniform ones.
pub fn stable_scenario(
    p: f64,
    increment: Increment,
    ns: Vec<f64>,
    b_of: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
) -> Result<Scenario> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::Domain(format!("stable index {p} outside (0, 2]")));
    }
    match increment {
        Increment::Rademacher => {
            return Err(Error::Precondition("lattice increments are excluded: the local limit needs a non-lattice law".into()))
        }
        Increment::Cauchy if p != 1.0 => return Err(Error::Precondition("Cauchy increments have p = 1".into())),
        Increment::UniformSymmetric if p != 2.0 => {
            return Err(Error::Precondition("uniform increments are attracted to p = 2".into()))
        }
        _ => {}
    }
    let b_of: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match b_of {
        Some(b) => b,
        None => match increment {
            Increment::UniformSymmetric => Arc::new(|n: f64| libm::sqrt(n / 6.0)),
            _ => Arc::new(move |n: f64| libm::pow(n, 1.0 / p)),
        },
    };
    let reference = stable_reference(p)?;
    let b = b_of.clone();
    let scaling = ScalingSeq::scalar(move |n| b(n));
    let name = format!("stable(p={p}, {increment:?})");
    let charfn_of = move |n: f64| -> Result<CharFn> {
        Ok(match increment {
            Increment::UniformSymmetric => CharFn::line(move |t| {
                let s = if t.abs() < 1e-8 { 1.0 - t * t / 6.0 } else { libm::sin(t) / t };
                Complex64::new(libm::pow(s, n), 0.0)
            })
            .with_decay(move |r| if r <= 1.0 { 1.0 } else { libm::pow(r, -n) }),
            _ => CharFn::line(move |t| Complex64::new(libm::exp(-n * libm::pow(t.abs(), p)), 0.0))
                .with_decay(move |r| libm::exp(-n * libm::pow(r, p))),
        })
    };
    let mut scn = Scenario::new(name, ns, charfn_of, scaling, reference)?.with_sampler(move |n| {
        let s: Sampler = match increment {
            Increment::UniformSymmetric => {
                let count = n as u64;
                Arc::new(move |rng: &mut ChaCha8Rng| {
                    let mut acc = 0.0;
                    for _ in 0..count {
                        acc += 2.0 * rng.random::<f64>() - 1.0;
                    }
                    Sample::scalar(acc)
                })
            }
            Increment::Cauchy => Arc::new(move |rng: &mut ChaCha8Rng| Sample::scalar(n * libm::tan(PI * (rng.random::<f64>() - 0.5)))),
            _ => {
                let scale = libm::pow(n, 1.0 / p);
                Arc::new(move |rng: &mut ChaCha8Rng| Sample::scalar(scale * sample_symmetric_stable(p, rng)))
            }
        };
        Ok(s)
    });
    if increment != Increment::UniformSymmetric {
        // S_n has the law of n^{1/p} Z exactly
        let standard = CharFn::stable(p)?;
        scn = scn
            .with_exact(move |n, region| {
                let Region::Interval { a, b } = *region else {
                    return Err(Error::Precondition("stable sums live on the line".into()));
                };
                let scale = libm::pow(n, 1.0 / p);
                let (a, b) = (a / scale, b / scale);
                if p == 1.0 {
                    Ok((libm::atan(b) - libm::atan(a)) / PI)
                } else if p == 2.0 {
                    Ok(0.5 * (libm::erf(b / 2.0) - libm::erf(a / 2.0)))
                } else {
                    interval_probability(&standard, &Region::Interval { a, b })
                }
            })
            .with_domination(move |_k| {
                let h: Envelope = Arc::new(move |t| libm::exp(-libm::pow(t[0].abs(), p)));
                Some(h)
            });
    }
    Ok(scn)
}

fn stable_reference(p: f64) -> Result<ReferenceLaw> {
    if p == 1.0 {
        Ok(ReferenceLaw::cauchy())
    } else if p == 2.0 {
        let phi = CharFn::stable(2.0)?;
        Ok(ReferenceLaw::new("stable(2)", phi, |x| libm::exp(-0.25 * x[0] * x[0]) / (2.0 * libm::sqrt(PI))))
    } else {
        ReferenceLaw::stable(p)
    }
}

/// `E e^{itθ_u}` for the winding number `θ_u` of a planar Brownian motion
/// started at 1, as a function of `log u`:
/// `√(π/2) z^{1/2} e^{-z} (I_{(|t|-1)/2}(z) + I_{(|t|+1)/2}(z))` with `z = 1/(4u)`.
pub fn winding_charfn(log_u: f64, t: f64) -> Result<f64> {
    if !log_u.is_finite() {
        return Err(Error::Domain(format!("log u = {log_u}")));
    }
    let ln_z = -log_u - 2.0 * LN_2;
    let z = libm::exp(ln_z);
    let a = t.abs();
    let pre = 0.5 * libm::log(PI / 2.0) + 0.5 * ln_z - z;
    let lo = bessel_i_log(0.5 * (a - 1.0), ln_z)?;
    let hi = bessel_i_log(0.5 * (a + 1.0), ln_z)?;
    Ok(libm::exp(pre + lo) + libm::exp(pre + hi))
}

/// Constant `B` in `|φ_u(τ)| ≤ B (z/2)^{|τ|/2}` for `u ≥ 1`, from
/// `I_ν(z) ≤ (z/2)^ν cosh(z)/Γ(ν+1)` (ν ≥ -1/2) and `min Γ = 0.8856…`.
pub const WINDING_ENVELOPE: f64 = 1.772_453_850_905_516 * 1.125 / 0.885_603_194_410_888;

/// Winding numbers indexed by `log u`, with `A = (log u)/2` and Cauchy limit.
pub fn winding_scenario(log_us: Vec<f64>) -> Result<Scenario> {
    if log_us.iter().any(|&l| !(l > 1.0)) || log_us.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("winding indices must be increasing values of log u above 1".into()));
    }
    let charfn_of = |log_u: f64| -> Result<CharFn> {
        let rate = 0.5 * (log_u + 3.0 * LN_2);
        Ok(CharFn::line(move |t| Complex64::new(winding_charfn(log_u, t).unwrap_or(f64::NAN), 0.0))
            .with_decay(move |r| (WINDING_ENVELOPE * libm::exp(-rate * r)).min(1.0)))
    };
    let scn = Scenario::new("winding", log_us, charfn_of, ScalingSeq::scalar(|l| 0.5 * l), ReferenceLaw::cauchy())?
        .with_domination(|k| {
            if k < 1.0 {
                return None;
            }
            let h: Envelope = Arc::new(move |t| WINDING_ENVELOPE * libm::exp(-t[0].abs() / k));
            Some(h)
        });
    Ok(scn)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonVariant {
    /// Index is `λ`.
    Poisson,
    /// Index is the permutation size `n`, with `λ = log n`.
    PermutationCycles,
}

/// `λ(e^{iu} - 1) - iλu` without cancellation for small `u`.
fn poisson_exponent(lambda: f64, u: f64) -> Complex64 {
    let s = libm::sin(0.5 * u);
    let re = -2.0 * lambda * s * s;
    let im = if u.abs() < 0.1 {
        // sin u - u
        let u2 = u * u;
        -u * u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0 * (1.0 - u2 / 72.0 * (1.0 - u2 / 110.0))))
    } else {
        libm::sin(u) - u
    };
    Complex64::new(re, lambda * im)
}

/// `log Γ(n + a) - log Γ(n + b)` for large `n` from the Stirling series.
fn log_gamma_ratio(n: f64, a: Complex64, b: Complex64) -> Complex64 {
    let bern = |k: usize, x: Complex64| -> Complex64 {
        let x2 = x * x;
        match k {
            2 => x2 - x + 1.0 / 6.0,
            3 => x2 * x - 1.5 * x2 + 0.5 * x,
            4 => x2 * x2 - 2.0 * x2 * x + x2 - 1.0 / 30.0,
            5 => x2 * x2 * x - 2.5 * x2 * x2 + 5.0 / 3.0 * x2 * x - x / 6.0,
            6 => x2 * x2 * x2 - 3.0 * x2 * x2 * x + 2.5 * x2 * x2 - 0.5 * x2 + 1.0 / 42.0,
            _ => {
                x2 * x2 * x2 * x - 3.5 * x2 * x2 * x2 + 3.5 * x2 * x2 * x - 7.0 / 6.0 * x2 * x + x / 6.0
            }
        }
    };
    let mut acc = (a - b) * libm::log(n);
    let mut pow = n;
    for k in 1..=6 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        acc += (bern(k + 1, a) - bern(k + 1, b)) * (sign / ((k * (k + 1)) as f64 * pow));
        pow *= n;
    }
    acc
}

static ZETA_TABLE: OnceBox<Vec<f64>> = OnceBox::new();

/// `log Γ(1 + ε)`, exactly zero at `ε = 0`.
fn log_gamma_one_plus(eps: Complex64) -> Result<Complex64> {
    if eps.norm() < 0.5 {
        let zetas = ZETA_TABLE.get_or_init(|| {
            let v: Vec<f64> = (0..64).map(|k| if k < 2 { 0.0 } else { zeta_real(k as f64).unwrap_or(1.0) }).collect();
            alloc::boxed::Box::new(v)
        });
        const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
        let mut acc = -EULER_GAMMA * eps;
        let mut pow = eps;
        for (k, z) in zetas.iter().enumerate().skip(2) {
            pow *= eps;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += pow * (sign * z / k as f64);
        }
        Ok(acc)
    } else {
        log_gamma(Complex64::new(1.0, 0.0) + eps)
    }
}

/// `log E e^{iuC_n}` for the cycle count `C_n`: `Σ_{j≤n} log((j-1+e^{iu})/j)`.
pub fn cycle_count_log_charfn(n: u64, u: f64) -> Result<Complex64> {
    let w = Complex64::new(libm::cos(u), libm::sin(u));
    if n < 2000 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=n {
            let jf = j as f64;
            acc += ((w + (jf - 1.0)) / jf).ln();
        }
        return Ok(acc);
    }
    // Γ(n+w)/(Γ(w) Γ(n+1))
    let one = Complex64::new(1.0, 0.0);
    Ok(log_gamma_ratio(n as f64, w, one) - log_gamma_one_plus(w - one)?)
}

fn pmf_log_poisson(lambda: f64, k: f64) -> f64 {
    if k == 0.0 {
        return -lambda;
    }
    // -λ D(k/λ) - ½ log(2πk) - stirlerr(k)
    let d = (k - lambda) / lambda;
    let dev = if d.abs() < 0.1 {
        // (1+d) log(1+d) - d
        let mut acc = 0.0;
        let mut pow = d * d;
        let mut j = 2.0;
        let mut sign = 1.0;
        loop {
            let term = sign * pow / (j * (j - 1.0));
            acc += term;
            if term.abs() < 1e-18 * acc.abs() || j > 60.0 {
                break;
            }
            pow *= d;
            j += 1.0;
            sign = -sign;
        }
        acc
    } else {
        (1.0 + d) * libm::log1p(d) - d
    };
    let stirlerr = if k < 30.0 {
        libm::lgamma(k + 1.0) - (k + 0.5) * libm::log(k) + k - 0.5 * libm::log(2.0 * PI)
    } else {
        let k2 = k * k;
        (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / (1260.0 * k2)) / k2) / k
    };
    -lambda * dev - 0.5 * libm::log(2.0 * PI * k) - stirlerr
}

/// `P[lo ≤ P < hi]` for `P ~ Poisson(λ)`, summing the pmf over `λ ± 12√λ`.
pub fn poisson_window_probability(lambda: f64, lo: f64, hi: f64) -> Result<f64> {
    let half = 12.0 * libm::sqrt(lambda) + 12.0;
    let first = libm::ceil(lo.max(lambda - half).max(0.0));
    let last = libm::ceil(hi.min(lambda + half)) - 1.0;
    if last < first {
        return Ok(0.0);
    }
    if last - first > 1e8 {
        return Err(Error::Overflow(format!("pmf summation over {} integers", last - first + 1.0)));
    }
    let mut acc = 0.0;
    let mut k = first;
    while k <= last {
        acc += libm::exp(pmf_log_poisson(lambda, k));
        k += 1.0;
    }
    Ok(acc)
}

/// Distribution of the cycle count of a uniform permutation of `n` letters,
/// truncated where the remaining mass is negligible.
pub fn cycle_count_distribution(n: u64) -> Vec<f64> {
    let h = libm::log(n as f64) + 0.58;
    let cap = ((h + 15.0 * libm::sqrt(h) + 30.0) as u64).min(n) as usize;
    let mut dist = vec![0.0; cap + 1];
    dist[0] = 1.0;
    for j in 1..=n {
        let q = 1.0 / j as f64;
        let top = (j as usize).min(cap);
        for k in (1..=top).rev() {
            dist[k] = dist[k] * (1.0 - q) + dist[k - 1] * q;
        }
        dist[0] *= 1.0 - q;
    }
    dist
}

/// `(P_n - λ)/λ^{1/3}` with `A = λ^{1/6}` and a standard Gaussian limit.
pub fn poisson_scenario(index: Vec<f64>, variant: PoissonVariant) -> Result<Scenario> {
    let lambda_of: fn(f64) -> f64 = match variant {
        PoissonVariant::Poisson => |l| l,
        PoissonVariant::PermutationCycles => |n| libm::log(n),
    };
    for &i in &index {
        let ok = match variant {
            PoissonVariant::Poisson => i >= 10.0,
            PoissonVariant::PermutationCycles => i >= 3.0 && i == libm::floor(i),
        };
        if !ok {
            return Err(Error::Precondition(format!("index {i} out of range for {variant:?}")));
        }
    }
    if index.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("index set must be increasing".into()));
    }
    let charfn_of = move |i: f64| -> Result<CharFn> {
        let lambda = lambda_of(i);
        let c = libm::cbrt(lambda);
        Ok(match variant {
            PoissonVariant::Poisson => CharFn::line(move |t| poisson_exponent(lambda, t / c).exp()),
            PoissonVariant::PermutationCycles => {
                let n = i as u64;
                CharFn::line(move |t| {
                    let u = t / c;
                    let phase = Complex64::new(0.0, -u * lambda);
                    match cycle_count_log_charfn(n, u) {
                        Ok(l) => (l + phase).exp(),
                        Err(_) => Complex64::new(f64::NAN, f64::NAN),
                    }
                })
            }
        })
    };
    let name = match variant {
        PoissonVariant::Poisson => "poisson",
        PoissonVariant::PermutationCycles => "cycles",
    };
    let scaling = ScalingSeq::scalar(move |i| libm::pow(lambda_of(i), 1.0 / 6.0));
    let mut scn = Scenario::new(name, index.clone(), charfn_of, scaling, ReferenceLaw::gaussian())?.discrete(true);

    let bounds = move |i: f64, region: &Region| -> Result<(f64, f64)> {
        let Region::Interval { a, b } = *region else {
            return Err(Error::Precondition("Poisson counts live on the line".into()));
        };
        let lambda = lambda_of(i);
        let c = libm::cbrt(lambda);
        Ok((lambda + a * c, lambda + b * c))
    };
    match variant {
        PoissonVariant::Poisson => {
            scn = scn
                .with_exact(move |i, region| {
                    let (lo, hi) = bounds(i, region)?;
                    poisson_window_probability(i, lo, hi)
                })
                .with_sampler(|lambda| {
                    let law = Poisson::new(lambda).map_err(|e| Error::Domain(format!("{e}")))?;
                    let c = libm::cbrt(lambda);
                    let s: Sampler = Arc::new(move |rng: &mut ChaCha8Rng| Sample::scalar((law.sample(rng) - lambda) / c));
                    Ok(s)
                })
                .with_domination(|_k| {
                    let h: Envelope = Arc::new(|t| libm::exp(-0.25 * t[0] * t[0]));
                    Some(h)
                });
        }
        PoissonVariant::PermutationCycles => {
            let cache: Arc<Vec<(f64, OnceBox<Vec<f64>>)>> = Arc::new(index.iter().map(|&i| (i, OnceBox::new())).collect());
            scn = scn
                .with_exact(move |i, region| {
                    let (lo, hi) = bounds(i, region)?;
                    let n = i as u64;
                    let fresh;
                    let dist: &Vec<f64> = match cache.iter().find(|(j, _)| *j == i) {
                        Some((_, slot)) => slot.get_or_init(|| alloc::boxed::Box::new(cycle_count_distribution(n))),
                        None => {
                            fresh = cycle_count_distribution(n);
                            &fresh
                        }
                    };
                    Ok(dist
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| (*k as f64) >= lo && (*k as f64) < hi)
                        .map(|(_, p)| p)
                        .sum())
                })
                .with_sampler(|i| {
                    let n = i as u64;
                    let lambda = libm::log(i);
                    let c = libm::cbrt(lambda);
                    let s: Sampler = Arc::new(move |rng: &mut ChaCha8Rng| {
                        // successes of independent Bernoulli(1/j): the next one after j
                        // exceeds m with probability j/m
                        let mut j = 1u64;
                        let mut count = 1u64;
                        loop {
                            let next = libm::floor(j as f64 / uniform_open(rng)) + 1.0;
                            if next > n as f64 {
                                break;
                            }
                            j = next as u64;
                            count += 1;
                        }
                        Sample::scalar((count as f64 - lambda) / c)
                    });
                    Ok(s)
                });
        }
    }
    Ok(scn)
}

/// `P[G < x]` for `G ~ Gamma(2, 1)`, accurate for small `x`.
fn gamma2_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < 0.5 {
        // Σ_{k≥2} (-1)^k (k-1) x^k / k!
        let mut acc = 0.0f64;
        let mut term = x * x / 2.0;
        let mut k = 2.0;
        while term.abs() > 1e-20 * acc.abs().max(1e-300) {
            acc += term * (k - 1.0);
            term *= -x / (k + 1.0);
            k += 1.0;
        }
        acc
    } else {
        1.0 - libm::exp(-x) * (1.0 + x)
    }
}

/// `P[a ≤ G < b]` for `G ~ Gamma(2, 1)`.
fn gamma2_mass(a: f64, b: f64) -> f64 {
    let (a, b) = (a.max(0.0), b.max(0.0));
    if b <= a {
        return 0.0;
    }
    if b < 0.5 {
        gamma2_cdf(b) - gamma2_cdf(a)
    } else {
        let tail = |x: f64| libm::exp(-x) * (1.0 + x);
        if a < 0.5 {
            1.0 - gamma2_cdf(a) - tail(b)
        } else {
            tail(a) - tail(b)
        }
    }
}

/// `X_n = n(E_1 + E_2)` with `A = n`, limit `1/(1-it)²` (density `x e^{-x}`),
/// shifted by `α_n = cn` when `c > 0`.
pub fn gamma_shift_scenario(ns: Vec<f64>, c: f64) -> Result<Scenario> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("shift constant {c} must be nonnegative")));
    }
    let law = |t: f64| {
        let d = Complex64::new(1.0, -t);
        (d * d).inv()
    };
    let phi = CharFn::line(law).with_decay(|r| 1.0 / (1.0 + r * r));
    let reference = ReferenceLaw::new("gamma(2)", phi, |x| if x[0] > 0.0 { x[0] * libm::exp(-x[0]) } else { 0.0 });
    let charfn_of = move |n: f64| -> Result<CharFn> {
        Ok(CharFn::line(move |t| law(n * t)).with_decay(move |r| 1.0 / (1.0 + n * n * r * r)))
    };
    let base = Scenario::new("gamma-shift", ns, charfn_of, ScalingSeq::scalar(|n| n), reference)?
        .with_exact(|n, region| {
            let Region::Interval { a, b } = *region else {
                return Err(Error::Precondition("Gamma variables live on the line".into()));
            };
            Ok(gamma2_mass(a / n, b / n))
        })
        .with_sampler(|n| {
            let s: Sampler = Arc::new(move |rng: &mut ChaCha8Rng| {
                let e1: f64 = Exp1.sample(rng);
                let e2: f64 = Exp1.sample(rng);
                Sample::scalar(n * (e1 + e2))
            });
            Ok(s)
        })
        .with_domination(|_k| {
            let h: Envelope = Arc::new(|t| 1.0 / (1.0 + t[0] * t[0]));
            Some(h)
        });
    if c == 0.0 {
        Ok(base)
    } else {
        shift_mean(&base, [c, 0.0], move |n| [c * n, 0.0])
    }
}
