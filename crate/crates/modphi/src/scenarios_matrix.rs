//! Random-matrix families, the stochastic zeta model and the arithmetic
//! limiting function built on them.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::arith::{mobius, sieve_primes};
use crate::engine::{Envelope, ReferenceLaw, ScalingSeq, Scenario};
use crate::fourier::CharFn;
use crate::limits::{self, Cap};
use crate::linalg::{determinant, eigenvalues, qr_positive, CMatrix, Matrix, RMatrix};
use crate::mc::{Sample, Sampler};
use crate::scenarios_classical::uniform_open;
use crate::specfun::{barnes_g_log, hyp2f1_c1, log_gamma, zeta_real};
use crate::{Error, Point, Result};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupFamily {
    Unitary,
    Symplectic,
    Orthogonal,
}

impl GroupFamily {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "u" | "U" => Ok(GroupFamily::Unitary),
            "usp" | "USp" => Ok(GroupFamily::Symplectic),
            "so" | "SO" => Ok(GroupFamily::Orthogonal),
            other => Err(Error::Domain(format!("unknown group family {other:?} (u, usp, so)"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            GroupFamily::Unitary => "U",
            GroupFamily::Symplectic => "USp",
            GroupFamily::Orthogonal => "SO",
        }
    }

    /// Dimension of the log-determinant: 2 for `U`, 1 otherwise.
    pub fn dim(&self) -> usize {
        if *self == GroupFamily::Unitary {
            2
        } else {
            1
        }
    }
}

/// `U(n)`, `USp(2n)` or `SO(2n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupLabel {
    pub family: GroupFamily,
    pub n: usize,
}

impl GroupLabel {
    pub fn new(family: GroupFamily, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("group rank must be at least 1".into()));
        }
        let g = GroupLabel { family, n };
        limits::check(Cap::Matrix, g.matrix_size() as u64)?;
        Ok(g)
    }

    pub fn matrix_size(&self) -> usize {
        match self.family {
            GroupFamily::Unitary => self.n,
            _ => 2 * self.n,
        }
    }
}

/// `log det(1−g) − α`, with an importance weight (1 under Haar measure).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDetSample {
    pub value: Point,
    pub weight: f64,
}

impl From<LogDetSample> for Sample {
    fn from(s: LogDetSample) -> Sample {
        Sample { x: s.value, w: s.weight }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn complex_ginibre(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    Matrix::from_fn(n, |_, _| Complex64::new(s * normal(rng), s * normal(rng)))
}

/// Haar element of `SO(m)`.
pub fn haar_special_orthogonal(m: usize, rng: &mut ChaCha8Rng) -> RMatrix {
    let z: RMatrix = Matrix::from_fn(m, |_, _| normal(rng));
    let mut q = qr_positive(&z);
    if determinant(&q) < 0.0 {
        for i in 0..m {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    q
}

/// Haar element of `USp(2n)` in the block form `[[A, −B̄], [B, Ā]]`.
fn haar_symplectic(n: usize, rng: &mut ChaCha8Rng) -> Result<CMatrix> {
    let m = 2 * n;
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for _ in 0..n {
        let mut w: Vec<Complex64> = (0..m).map(|_| Complex64::new(normal(rng), normal(rng))).collect();
        for _ in 0..2 {
            for v in &cols {
                let dot: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= dot * vi;
                }
            }
        }
        let norm = libm::sqrt(w.iter().map(|z| z.norm_sqr()).sum::<f64>());
        if !(norm > 1e-8) {
            return Err(Error::NonFinite("symplectic Gram-Schmidt"));
        }
        for z in w.iter_mut() {
            *z /= norm;
        }
        let partner: Vec<Complex64> = (0..m).map(|i| if i < n { -w[i + n].conj() } else { w[i - n].conj() }).collect();
        cols.push(w);
        cols.push(partner);
    }
    // cols alternates u_k, ũ_k; place u_k in column k and ũ_k in column n+k
    let g = Matrix::from_fn(m, |i, j| if j < n { cols[2 * j][i] } else { cols[2 * (j - n) + 1][i] });
    let residual = symplectic_residual(&g);
    if residual > 1e-10 {
        return Err(Error::CrossCheck(residual));
    }
    Ok(g)
}

/// `max |(gᵀJg − J)_{ij}|` with `J = [[0, I], [−I, 0]]`.
pub fn symplectic_residual(g: &CMatrix) -> f64 {
    let m = g.dim();
    let n = m / 2;
    let j = Matrix::from_fn(m, |r, c| {
        if c == r + n {
            C1
        } else if r == c + n {
            -C1
        } else {
            C0
        }
    });
    g.transpose().matmul(&j).matmul(g).max_abs_diff(&j)
}

/// A Haar-distributed element of the group, as a complex matrix.
pub fn haar_sample(group: GroupLabel, rng: &mut ChaCha8Rng) -> Result<CMatrix> {
    limits::check(Cap::Matrix, group.matrix_size() as u64)?;
    match group.family {
        GroupFamily::Unitary => Ok(qr_positive(&complex_ginibre(group.n, rng))),
        GroupFamily::Orthogonal => {
            let q = haar_special_orthogonal(2 * group.n, rng);
            Ok(Matrix::from_fn(q.dim(), |i, j| Complex64::new(q[(i, j)], 0.0)))
        }
        GroupFamily::Symplectic => haar_symplectic(group.n, rng),
    }
}

/// `Σ_λ log(1−λ)` with principal logarithms.
///
/// For `SO` and `USp` the determinant is a nonnegative real and only its
/// logarithm is returned, computed from an LU factorization.
pub fn log_det_one_minus(g: &CMatrix, family: GroupFamily) -> Result<Point> {
    match family {
        GroupFamily::Unitary => {
            let mut acc = C0;
            for lam in eigenvalues(g)? {
                let z = C1 - lam;
                if z.norm() < 1e-12 {
                    return Err(Error::EigenvalueAtOne);
                }
                acc += z.ln();
            }
            Ok([acc.re, acc.im])
        }
        _ => {
            let d = determinant(&g.one_minus()).re;
            if !(d > 0.0) {
                return Err(Error::EigenvalueAtOne);
            }
            Ok([libm::log(d), 0.0])
        }
    }
}

fn log_det_real(g: &RMatrix) -> Result<f64> {
    let d = determinant(&g.one_minus());
    if !(d > 0.0) {
        return Err(Error::EigenvalueAtOne);
    }
    Ok(libm::log(d))
}

/// Draw of `log det(1−g)` for Haar `g ∈ U(n)` from independent factors
/// `1 − e^{iω}√β` with `β ~ Beta(1, k)`, `k = 0..n−1`.
pub fn unitary_log_det_draw(n: usize, rng: &mut ChaCha8Rng) -> Point {
    let mut acc = C0;
    for k in 0..n {
        let r = if k == 0 { 1.0 } else { libm::sqrt(1.0 - libm::pow(uniform_open(rng), 1.0 / k as f64)) };
        let w = 2.0 * PI * rng.random::<f64>();
        acc += (C1 - Complex64::from_polar(r, w)).ln();
    }
    [acc.re, acc.im]
}

/// Centring `α_n`.
pub fn alpha_n(family: GroupFamily, n: f64) -> f64 {
    match family {
        GroupFamily::Unitary => 0.0,
        GroupFamily::Symplectic => 0.5 * libm::log(PI * n / 2.0),
        GroupFamily::Orthogonal => 0.5 * libm::log(8.0 * PI / n),
    }
}

/// Scale `A_n` (a multiple of the identity).
pub fn scale_n(family: GroupFamily, n: f64) -> f64 {
    match family {
        GroupFamily::Unitary => libm::sqrt(libm::log(n) / 2.0),
        _ => libm::sqrt(libm::log(n / 2.0)),
    }
}

/// Limiting function `Φ_G`; `t[1]` is ignored unless the family is `U`.
pub fn limiting_function(family: GroupFamily, t: Point) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let lg = match family {
        GroupFamily::Unitary => {
            let a = (i * t[0] - t[1]) * 0.5;
            let b = (i * t[0] + t[1]) * 0.5;
            barnes_g_log(C1 + a)? + barnes_g_log(C1 + b)? - barnes_g_log(C1 + i * t[0])?
        }
        GroupFamily::Symplectic => {
            let h = Complex64::new(1.5, 0.0);
            barnes_g_log(h)? - barnes_g_log(h + i * t[0])?
        }
        GroupFamily::Orthogonal => {
            let h = Complex64::new(0.5, 0.0);
            barnes_g_log(h)? - barnes_g_log(h + i * t[0])?
        }
    };
    Ok(lg.exp())
}

/// Region `|t| ≤ n^{1/6}` where the surrogate is asserted.
pub fn surrogate_valid(n: f64, t: Point) -> bool {
    libm::hypot(t[0], t[1]) <= libm::pow(n, 1.0 / 6.0)
}

/// `log E[exp(s·log det(1−g))]` under Haar measure on `SO(2n)` or `USp(2n)`.
pub fn haar_log_mgf(family: GroupFamily, n: usize, s: Complex64) -> Result<Complex64> {
    let nf = n as f64;
    let mut acc = s * (2.0 * nf * LN_2);
    for j in 1..=n {
        let jf = j as f64;
        let (fixed, shift) = match family {
            GroupFamily::Orthogonal => (log_gamma((nf + jf - 1.0).into())? - log_gamma((jf - 0.5).into())?, -0.5),
            GroupFamily::Symplectic => (log_gamma((nf + jf + 1.0).into())? - log_gamma((jf + 0.5).into())?, 0.5),
            GroupFamily::Unitary => return Err(Error::Domain("use unitary_exact_charfn for U(n)".into())),
        };
        let bottom = match family {
            GroupFamily::Orthogonal => s + jf + nf - 1.0,
            _ => s + jf + nf + 1.0,
        };
        acc += fixed + log_gamma(s + jf + shift)? - log_gamma(bottom)?;
    }
    Ok(acc)
}

/// `E[exp(i⟨t, log det(1−g)⟩)]` under Haar measure on `U(n)`.
pub fn unitary_exact_charfn(n: usize, t: Point) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let a = (i * t[0] + t[1]) * 0.5;
    let b = (i * t[0] - t[1]) * 0.5;
    let mut acc = C0;
    for j in 1..=n {
        let jf = Complex64::new(j as f64, 0.0);
        acc += log_gamma(jf)? + log_gamma(jf + i * t[0])? - log_gamma(jf + a)? - log_gamma(jf + b)?;
    }
    Ok(acc.exp())
}

/// Exact characteristic function of `log det(1−g) − α_n` under Haar measure.
pub fn haar_exact_charfn(family: GroupFamily, n: usize, t: Point) -> Result<Complex64> {
    match family {
        GroupFamily::Unitary => unitary_exact_charfn(n, t),
        _ => {
            let s = Complex64::new(0.0, t[0]);
            let shift = Complex64::new(0.0, -t[0] * alpha_n(family, n as f64));
            Ok((haar_log_mgf(family, n, s)? + shift).exp())
        }
    }
}

fn surrogate(family: GroupFamily, n: f64, t: Point) -> Complex64 {
    let a = scale_n(family, n);
    let r2 = match family {
        GroupFamily::Unitary => t[0] * t[0] + t[1] * t[1],
        _ => t[0] * t[0],
    };
    match limiting_function(family, t) {
        Ok(phi) => phi * libm::exp(-0.5 * a * a * r2),
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    }
}

fn disc_grid(dim: usize, radius: f64, rings: usize, angles: usize) -> Vec<Point> {
    let mut pts = vec![[0.0, 0.0]];
    for r in 1..=rings {
        let rho = radius * r as f64 / rings as f64;
        if dim == 1 {
            pts.push([rho, 0.0]);
            pts.push([-rho, 0.0]);
        } else {
            for j in 0..angles {
                let th = 2.0 * PI * j as f64 / angles as f64;
                pts.push([rho * libm::cos(th), rho * libm::sin(th)]);
            }
        }
    }
    pts
}

/// Per-`n` ratio `max |φ_n(t)| / |Φ_G(t)φ(A_n t)|` over `|t| ≤ n^{1/6}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateFit {
    pub rows: Vec<(f64, f64)>,
    pub constant: f64,
    pub growing: bool,
}

pub fn fit_surrogate_constant(family: GroupFamily, ns: &[f64]) -> Result<SurrogateFit> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let radius = libm::pow(n, 1.0 / 6.0);
        let mut worst: f64 = 0.0;
        for t in disc_grid(family.dim(), radius, 12, 12) {
            let exact = haar_exact_charfn(family, n as usize, t)?.norm();
            let approx = surrogate(family, n, t).norm();
            if approx > 0.0 {
                worst = worst.max(exact / approx);
            }
        }
        rows.push((n, worst));
    }
    let constant = rows.iter().map(|r| r.1).fold(1.0, f64::max);
    let growing = rows.windows(2).all(|w| w[1].1 > w[0].1) && rows.len() > 1;
    Ok(SurrogateFit { rows, constant, growing })
}

fn check_group_indices(family: GroupFamily, ns: &[f64], min: f64, max_rank: Option<f64>) -> Result<()> {
    for &n in ns {
        if !(libm::trunc(n) == n && n >= min) {
            return Err(Error::Precondition(format!("{} rank must be an integer ≥ {min}, got {n}", family.label())));
        }
        if let Some(m) = max_rank {
            if n > m {
                return Err(Error::Precondition(format!("rank {n} above {m}")));
            }
        }
        GroupLabel::new(family, n as usize)?;
    }
    Ok(())
}

/// `log det(1−g) − α_n` for Haar `g`, rescaled by `A_n`.
pub fn ks_scenario(family: GroupFamily, ns: &[f64]) -> Result<Scenario> {
    check_group_indices(family, ns, if family == GroupFamily::Unitary { 2.0 } else { 3.0 }, None)?;
    let (scaling, reference) = match family {
        GroupFamily::Unitary => (ScalingSeq::isotropic(move |n| scale_n(family, n)), ReferenceLaw::gaussian_complex()),
        _ => (ScalingSeq::scalar(move |n| scale_n(family, n)), ReferenceLaw::gaussian()),
    };
    let dim = family.dim();
    let fit = fit_surrogate_constant(family, ns)?;
    let c = fit.constant;
    let scn = Scenario::new(
        format!("rmt-{}", family.label()),
        ns.to_vec(),
        move |n| CharFn::new(dim, move |t| surrogate(family, n, t)),
        scaling,
        reference,
    )?
    .with_sampler(move |n| {
        let g = GroupLabel::new(family, n as usize)?;
        let alpha = alpha_n(family, n);
        let sampler: Sampler = match family {
            GroupFamily::Unitary => Arc::new(move |rng: &mut ChaCha8Rng| Sample::plane(unitary_log_det_draw(g.n, rng))),
            GroupFamily::Orthogonal => Arc::new(move |rng: &mut ChaCha8Rng| {
                let q = haar_special_orthogonal(2 * g.n, rng);
                match log_det_real(&q) {
                    Ok(v) => Sample::scalar(v - alpha),
                    Err(_) => Sample { x: [0.0, 0.0], w: 0.0 },
                }
            }),
            GroupFamily::Symplectic => Arc::new(move |rng: &mut ChaCha8Rng| {
                match haar_sample(g, rng).and_then(|m| log_det_one_minus(&m, family)) {
                    Ok(v) => Sample::scalar(v[0] - alpha),
                    Err(_) => Sample { x: [0.0, 0.0], w: 0.0 },
                }
            }),
        };
        Ok(sampler)
    })
    .with_domination(move |k| {
        let peak = disc_grid(dim, k, 40, 24)
            .into_iter()
            .map(|u| limiting_function(family, u).map(|v| v.norm()).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        let level = 1.05 * c * peak;
        let h: Envelope = Arc::new(move |t: Point| level * libm::exp(-0.5 * (t[0] * t[0] + t[1] * t[1])));
        Some(h)
    });
    Ok(scn)
}

/// Centring of the biased ensemble, `½ log(2πn)`.
pub fn biased_so_alpha(n: f64) -> f64 {
    0.5 * libm::log(2.0 * PI * n)
}

/// `E[e^{itY}]` for `Y = log det(1−g)` under `½det(1−g)` times Haar measure on `SO(2n)`.
pub fn biased_so_charfn_raw(n: usize, t: f64) -> Result<Complex64> {
    Ok(0.5 * haar_log_mgf(GroupFamily::Orthogonal, n, Complex64::new(1.0, t))?.exp())
}

/// Characteristic function of the centred biased variable `Y − ½log(32πn)`.
pub fn biased_so_charfn(n: usize, t: f64) -> Result<Complex64> {
    let phase = Complex64::from_polar(1.0, -t * biased_so_alpha(n as f64));
    Ok(biased_so_charfn_raw(n, t)? * phase)
}

/// Determinant-biased `SO(2n)` ensemble, sampled by importance weighting of Haar draws.
pub fn biased_so_scenario(ns: &[f64]) -> Result<Scenario> {
    check_group_indices(GroupFamily::Orthogonal, ns, 3.0, Some(256.0))?;
    let scn = Scenario::new(
        "rmt-biased-SO",
        ns.to_vec(),
        |n| {
            let n = n as usize;
            Ok(CharFn::line(move |t| biased_so_charfn(n, t).unwrap_or(Complex64::new(f64::NAN, f64::NAN))))
        },
        ScalingSeq::scalar(|n| libm::sqrt(libm::log(n / 2.0))),
        ReferenceLaw::gaussian(),
    )?
    .with_sampler(|n| {
        let m = 2 * n as usize;
        let alpha = biased_so_alpha(n);
        let sampler: Sampler = Arc::new(move |rng: &mut ChaCha8Rng| {
            let q = haar_special_orthogonal(m, rng);
            let d = determinant(&q.one_minus());
            if d > 0.0 {
                Sample { x: [libm::log(d) - alpha, 0.0], w: 0.5 * d }
            } else {
                Sample { x: [0.0, 0.0], w: 0.0 }
            }
        });
        Ok(sampler)
    });
    Ok(scn)
}

/// Importance-weighted draw from the biased ensemble.
pub fn biased_so_draw(n: usize, rng: &mut ChaCha8Rng) -> Result<LogDetSample> {
    limits::check(Cap::Matrix, 2 * n as u64)?;
    let q = haar_special_orthogonal(2 * n, rng);
    let d = determinant(&q.one_minus()).max(0.0);
    let value = if d > 0.0 { libm::log(d) - biased_so_alpha(n as f64) } else { f64::NEG_INFINITY };
    Ok(LogDetSample { value: [value, 0.0], weight: 0.5 * d })
}

fn hyp_args(t: Point) -> (Complex64, Complex64) {
    let i = Complex64::new(0.0, 1.0);
    ((i * t[0] + t[1]) * 0.5, (i * t[0] - t[1]) * 0.5)
}

/// `Π_p ₂F₁(½(it₁+t₂), ½(it₁−t₂); 1; 1/p)` over the given primes.
pub fn prime_hyp_product(primes: &[u64], t: Point) -> Result<Complex64> {
    let (a, b) = hyp_args(t);
    let mut acc = C1;
    for &p in primes {
        acc *= hyp2f1_c1(a, b, 1.0 / p as f64)?;
    }
    Ok(acc)
}

fn primes_up_to(x: f64) -> Result<Vec<u64>> {
    if !(x >= 2.0 && x.is_finite()) {
        return Err(Error::Domain(format!("prime bound must be at least 2, got {x}")));
    }
    limits::check(Cap::PrimeModel, libm::floor(x) as u64)?;
    sieve_primes(libm::floor(x) as u64)
}

/// `sup_{x, |u| ≤ k} |φ_x(u)| e^{(log log x)|u|²/16}` on a polar grid, with a 10% margin.
pub fn stochastic_zeta_domination_constant(primes: &[u64], xs: &[f64], k: f64) -> f64 {
    let grid = disc_grid(2, k, 16, 16);
    let mut worst: f64 = 0.0;
    for &x in xs {
        let cut = primes.partition_point(|&p| p as f64 <= x);
        let ll = libm::log(libm::log(x));
        for &u in &grid {
            let v = prime_hyp_product(&primes[..cut], u).map(|z| z.norm()).unwrap_or(f64::INFINITY);
            worst = worst.max(v * libm::exp(ll * (u[0] * u[0] + u[1] * u[1]) / 16.0));
        }
    }
    1.1 * worst
}

/// `−Σ_{p≤x} log(1 − Y_p/√p)` with `Y_p` uniform on the unit circle.
pub fn stochastic_zeta_scenario(xs: &[f64]) -> Result<Scenario> {
    let top = xs.iter().copied().fold(0.0, f64::max);
    if xs.iter().any(|&x| !(x >= 16.0)) {
        return Err(Error::Precondition("stochastic zeta needs x ≥ 16".into()));
    }
    let primes = Arc::new(primes_up_to(top)?);
    let prefix = {
        let primes = primes.clone();
        move |x: f64| -> Arc<Vec<u64>> { Arc::new(primes[..primes.partition_point(|&p| p as f64 <= x)].to_vec()) }
    };
    let pf = prefix.clone();
    let xs_dom = xs.to_vec();
    let primes_dom = primes.clone();
    let scn = Scenario::new(
        "stochastic-zeta",
        xs.to_vec(),
        move |x| {
            let ps = pf(x);
            CharFn::new(2, move |t| prime_hyp_product(&ps, t).unwrap_or(Complex64::new(f64::NAN, f64::NAN)))
        },
        ScalingSeq::isotropic(|x| libm::sqrt(libm::log(libm::log(x)) / 2.0)),
        ReferenceLaw::gaussian_complex(),
    )?
    .with_sampler(move |x| {
        let ps: Vec<f64> = prefix(x).iter().map(|&p| 1.0 / libm::sqrt(p as f64)).collect();
        let sampler: Sampler = Arc::new(move |rng: &mut ChaCha8Rng| {
            let mut acc = C0;
            for &r in &ps {
                let w = 2.0 * PI * rng.random::<f64>();
                acc -= (C1 - Complex64::from_polar(r, w)).ln();
            }
            Sample::plane([acc.re, acc.im])
        });
        Ok(sampler)
    })
    .with_domination(move |k| {
        let c = stochastic_zeta_domination_constant(&primes_dom, &xs_dom, k);
        let h: Envelope = Arc::new(move |t: Point| c * libm::exp(-(t[0] * t[0] + t[1] * t[1]) / 8.0));
        Some(h)
    });
    Ok(scn)
}

/// Value of the conjectural limiting function with its truncation bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjecturalPhi {
    pub value: Complex64,
    pub truncation_bound: f64,
    pub prime_cutoff: u64,
}

const TAIL_TERMS: usize = 10;

/// `Σ_p p^{−k}` via `Σ_m μ(m)/m · log ζ(mk)`.
fn prime_zeta(k: usize) -> Result<f64> {
    let mut acc = 0.0;
    let mut m = 1u64;
    while (m as usize) * k <= 64 {
        let mu = mobius(m);
        if mu != 0 {
            let z = zeta_real((m as usize * k) as f64)?;
            acc += mu as f64 / m as f64 * libm::log1p(z - 1.0);
        }
        m += 1;
    }
    Ok(acc)
}

/// Power-series coefficients `c_1..c_K` of `log[(1−x)^{−|t|²/4} ₂F₁(a, b; 1; x)]`.
fn log_factor_coefficients(t: Point, terms: usize) -> Vec<Complex64> {
    let (a, b) = hyp_args(t);
    let mut h = vec![C1; terms + 1];
    for m in 1..=terms {
        let mf = (m - 1) as f64;
        h[m] = h[m - 1] * (a + mf) * (b + mf) / ((mf + 1.0) * (mf + 1.0));
    }
    let mut l = vec![C0; terms + 1];
    for m in 1..=terms {
        let mut s = C0;
        for k in 1..m {
            s += l[k] * h[m - k] * k as f64;
        }
        l[m] = h[m] - s / m as f64;
    }
    let c = 0.25 * (t[0] * t[0] + t[1] * t[1]);
    (1..=terms).map(|k| l[k] + c / k as f64).collect()
}

/// Barnes factor `Φ_U(t)` times the normalised Euler product
/// `Π_p (1−1/p)^{−|t|²/4} ₂F₁(½(it₁+t₂), ½(it₁−t₂); 1; 1/p)`.
///
/// Primes up to `prime_cutoff` are multiplied directly; the rest of the
/// product is summed through its expansion in `p^{−k}`.
pub fn ks_conjecture_phi(t1: f64, t2: f64, prime_cutoff: u64) -> Result<ConjecturalPhi> {
    let t = [t1, t2];
    if !(t1.is_finite() && t2.is_finite()) {
        return Err(Error::NonFinite("ks_conjecture_phi argument"));
    }
    let primes = primes_up_to(prime_cutoff as f64)?;
    let (a, b) = hyp_args(t);
    let c = 0.25 * (t1 * t1 + t2 * t2);
    let mut log_prod = C0;
    for &p in &primes {
        let x = 1.0 / p as f64;
        log_prod += hyp2f1_c1(a, b, x)?.ln() - c * libm::log1p(-x);
    }
    let coeffs = log_factor_coefficients(t, TAIL_TERMS + 1);
    let pf = prime_cutoff as f64;
    for k in 2..=TAIL_TERMS {
        let head: f64 = primes.iter().rev().map(|&p| libm::pow(p as f64, -(k as f64))).sum();
        let tail = (prime_zeta(k)? - head).max(0.0);
        log_prod += coeffs[k - 1] * tail;
    }
    let k = TAIL_TERMS + 1;
    let bound = 2.0 * coeffs[k - 1].norm() * libm::pow(pf, 1.0 - k as f64) / (k as f64 - 1.0)
        + 64.0 * f64::EPSILON * (1.0 + log_prod.norm());
    if !(bound < 1e-8) {
        return Err(Error::Truncation(bound));
    }
    let value = limiting_function(GroupFamily::Unitary, t)? * log_prod.exp();
    Ok(ConjecturalPhi { value, truncation_bound: bound, prime_cutoff })
}

/// Default prime cutoff for [`ks_conjecture_phi`].
pub const CONJECTURE_PRIME_CUTOFF: u64 = 10_000;
