//! Scalar special functions.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use once_cell::race::OnceBox;

use crate::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Derivative of the Riemann zeta function at -1.
const ZETA_PRIME_MINUS_ONE: f64 = -0.165_421_143_700_450_93;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Even Bernoulli numbers B_2, B_4, ..., B_22.
const BERNOULLI_EVEN: [f64; 11] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
];

/// Series truncation controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionPolicy {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self { rel_tol: 1e-12, max_terms: 10_000 }
    }
}

impl PrecisionPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.max_terms < 1 {
            return Err(Error::Precondition(format!("bad policy {self:?}")));
        }
        Ok(())
    }
}

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == libm::floor(z.re)
}

/// Principal branch of log Γ(z), cut along the negative real axis.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("log_gamma argument"));
    }
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(z.re));
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    Ok(stirling(w) - shift)
}

fn stirling(w: Complex64) -> Complex64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut corr = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(10) {
        let k = (k + 1) as f64;
        corr += p * (b / (2.0 * k * (2.0 * k - 1.0)));
        p *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * LN_2PI + corr
}

/// Real log Γ for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Modified Bessel function I_ν(z) from its Taylor series.
pub fn bessel_i(nu: f64, z: f64) -> Result<f64> {
    bessel_i_with(nu, z, &PrecisionPolicy::default())
}

pub fn bessel_i_with(nu: f64, z: f64, policy: &PrecisionPolicy) -> Result<f64> {
    policy.validate()?;
    if !(nu >= -0.5) || !(z >= 0.0) {
        return Err(Error::Domain(format!("bessel_i(nu={nu}, z={z})")));
    }
    if z == 0.0 {
        return if nu == 0.0 {
            Ok(1.0)
        } else if nu > 0.0 {
            Ok(0.0)
        } else {
            Err(Error::Domain(format!("bessel_i diverges at z=0 for nu={nu}")))
        };
    }
    let (log_sum, _) = bessel_i_series(nu, libm::log(z), policy)?;
    Ok(libm::exp(log_sum))
}

/// log I_ν(e^{ln_z}), stable when z underflows.
pub fn bessel_i_log(nu: f64, ln_z: f64) -> Result<f64> {
    if !(nu >= -0.5) {
        return Err(Error::Domain(format!("bessel_i_log(nu={nu})")));
    }
    Ok(bessel_i_series(nu, ln_z, &PrecisionPolicy::default())?.0)
}

fn bessel_i_series(nu: f64, ln_z: f64, policy: &PrecisionPolicy) -> Result<(f64, usize)> {
    let ln_half = ln_z - core::f64::consts::LN_2;
    let lead = nu * ln_half - libm::lgamma(nu + 1.0);
    let q = libm::exp(2.0 * ln_half);
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..=policy.max_terms {
        let mf = m as f64;
        term *= q / (mf * (nu + mf));
        sum += term;
        if term <= policy.rel_tol * sum && mf > libm::sqrt(q) {
            return Ok((lead + libm::log(sum), m));
        }
    }
    Err(Error::NonConvergence(policy.max_terms))
}

/// log G(z) for the Barnes G-function, with G(1) = 1 and G(z+1) = Γ(z)G(z).
pub fn barnes_g_log(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("barnes_g_log argument"));
    }
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(z.re));
    }
    let mut w = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while w.re < 20.0 {
        acc += log_gamma(w)?;
        w += 1.0;
    }
    Ok(barnes_asymptotic(w - 1.0) - acc)
}

/// log G(1+w) for large |w|.
fn barnes_asymptotic(w: Complex64) -> Complex64 {
    let lw = w.ln();
    let w2 = w * w;
    let mut s = (w2 * 0.5 - 1.0 / 12.0) * lw - w2 * 0.75 + w * (0.5 * LN_2PI) + ZETA_PRIME_MINUS_ONE;
    let inv2 = (w2).inv();
    let mut p = inv2;
    for k in 1..=9usize {
        let kf = k as f64;
        s += p * (BERNOULLI_EVEN[k] / (4.0 * kf * (kf + 1.0)));
        p *= inv2;
    }
    s
}

/// Gauss ₂F₁(a, b; 1; x) by direct summation.
pub fn hyp2f1_c1(a: Complex64, b: Complex64, x: f64) -> Result<Complex64> {
    hyp2f1_c1_with(a, b, x, &PrecisionPolicy::default())
}

pub fn hyp2f1_c1_with(a: Complex64, b: Complex64, x: f64, policy: &PrecisionPolicy) -> Result<Complex64> {
    policy.validate()?;
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("hyp2f1_c1 requires 0 <= x < 1, got {x}")));
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    if x == 0.0 {
        return Ok(sum);
    }
    for m in 0..policy.max_terms {
        let mf = m as f64;
        let r = (a + mf) * (b + mf) * (x / ((mf + 1.0) * (mf + 1.0)));
        term *= r;
        if term == Complex64::new(0.0, 0.0) {
            return Ok(sum);
        }
        sum += term;
        let rn = r.norm();
        if rn < 1.0 && term.norm() * rn / (1.0 - rn) <= 0.1 * policy.rel_tol * sum.norm() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence(policy.max_terms))
}

/// Cosine integral Ci(t) for t > 0.
pub fn cosine_integral(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("cosine_integral requires t > 0, got {t}")));
    }
    if t <= 8.0 {
        Ok(EULER_GAMMA + libm::log(t) + cin_series(t))
    } else {
        Ok(ci_continued_fraction(t))
    }
}

/// ∫₀ᵗ (cos u − 1)/u du by its power series.
fn cin_series(t: f64) -> f64 {
    let t2 = t * t;
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -t2 / ((2.0 * kf - 1.0) * (2.0 * kf));
        let c = term / (2.0 * kf);
        sum += c;
        if c.abs() < 1e-17 * (1.0 + sum.abs()) {
            break;
        }
    }
    sum
}

/// Ci(t) = −Re E₁(it), with E₁ evaluated by a Lentz continued fraction.
fn ci_continued_fraction(t: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, t);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..1000 {
        let a = -((i - 1) * (i - 1)) as f64;
        b += 2.0;
        d = (d * a + b).inv();
        c = b + c.inv() * a;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h *= Complex64::new(libm::cos(t), -libm::sin(t));
    -h.re
}

const RHO_STEPS: usize = 1024;
const RHO_MAX: usize = 64;

fn rho_table() -> &'static Vec<f64> {
    static TABLE: OnceBox<Vec<f64>> = OnceBox::new();
    TABLE.get_or_init(|| Box::new(build_rho_table()))
}

/// Values of ρ on the grid j/1024, j = 0..=64·1024.
///
/// Uses uρ(u) = ∫_{u-1}^{u} ρ, which is a sum of positive pieces, so the
/// relative accuracy survives the super-exponential decay. The pieces are
/// kept in a sliding window; the newest one is implicit (Adams–Moulton).
fn build_rho_table() -> Vec<f64> {
    let m = RHO_STEPS;
    let h = 1.0 / m as f64;
    let total = RHO_MAX * m;
    let mut rho = Vec::with_capacity(total + 1);
    let mut piece = Vec::with_capacity(total + 1);
    piece.push(0.0);
    rho.push(1.0);
    let prim = |u: f64| 2.0 * u - u * libm::log(u);
    for j in 1..=2 * m {
        let u = j as f64 * h;
        if j <= m {
            rho.push(1.0);
            piece.push(h);
        } else {
            rho.push(1.0 - libm::log(u));
            piece.push(prim(u) - prim(u - h));
        }
    }
    let mut window: f64 = piece[m + 1..=2 * m].iter().sum();
    for j in 2 * m + 1..=total {
        if j % m == 0 {
            window = piece[j - m + 1..j].iter().sum();
        } else {
            window -= piece[j - m];
        }
        let u = j as f64 * h;
        let rest = window + (19.0 * rho[j - 1] - 5.0 * rho[j - 2] + rho[j - 3]) * h / 24.0;
        let r = rest / (u - 9.0 * h / 24.0);
        rho.push(r);
        let p = (9.0 * r + 19.0 * rho[j - 1] - 5.0 * rho[j - 2] + rho[j - 3]) * h / 24.0;
        piece.push(p);
        window += p;
        if j % m == 0 {
            window = piece[j - m + 1..=j].iter().sum();
        }
    }
    rho
}

/// Dickman–de Bruijn function: ρ = 1 on [0,1], uρ'(u) = −ρ(u−1) beyond.
/// Returns 0 past u = 64, where ρ is below 1e-100.
pub fn dickman_rho(u: f64) -> f64 {
    if u.is_nan() {
        return f64::NAN;
    }
    if u <= 1.0 {
        return 1.0;
    }
    if u >= RHO_MAX as f64 {
        return 0.0;
    }
    let t = rho_table();
    let m = RHO_STEPS;
    let x = u * m as f64;
    let j = libm::floor(x) as usize;
    let frac = x - j as f64;
    if frac == 0.0 {
        return t[j];
    }
    // cubic Lagrange on four nodes inside the same unit segment
    let seg_lo = (j / m) * m;
    let seg_hi = seg_lo + m;
    let start = j.saturating_sub(1).clamp(seg_lo, seg_hi - 3);
    let s = x - start as f64;
    let mut v = 0.0;
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (s - b as f64) / (a as f64 - b as f64);
            }
        }
        v += w * t[start + a];
    }
    v
}

/// ∫₀^∞ ρ(u)² du from the memo grid (Simpson per unit segment).
pub fn dickman_rho_sq_integral() -> f64 {
    let t = rho_table();
    let m = RHO_STEPS;
    let h = 1.0 / m as f64;
    let mut total = crate::numerics::NeumaierSum::new();
    for k in 0..RHO_MAX {
        let mut s = 0.0;
        for i in 0..=m {
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let v = t[k * m + i];
            s += w * v * v;
        }
        total.add(s * h / 3.0);
    }
    total.value()
}

/// ζ(σ) for real σ > 1 (same code path as the complex evaluator).
pub fn zeta_real(sigma: f64) -> Result<f64> {
    Ok(zeta_complex(sigma, 0.0)?.re)
}

/// ζ(σ + it) for σ > 1 by Euler–Maclaurin summation.
pub fn zeta_complex(sigma: f64, t: f64) -> Result<Complex64> {
    if !(sigma > 1.0) || !sigma.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("zeta requires sigma > 1, got {sigma}")));
    }
    let s = Complex64::new(sigma, t);
    let n = 20usize.max(libm::ceil(t.abs()) as usize);
    let mut head = Complex64::new(0.0, 0.0);
    for k in (1..n).rev() {
        head += npow(k as f64, s);
    }
    Ok(head + em_tail(s, n as f64))
}

/// n^{-s} for real n > 0.
fn npow(n: f64, s: Complex64) -> Complex64 {
    let l = libm::log(n);
    let mag = libm::exp(-s.re * l);
    let ang = -s.im * l;
    if ang == 0.0 {
        Complex64::new(mag, 0.0)
    } else {
        Complex64::new(mag * libm::cos(ang), mag * libm::sin(ang))
    }
}

/// Σ_{k≥0} (N+k)^{-s} by Euler–Maclaurin at base N.
fn em_tail(s: Complex64, n: f64) -> Complex64 {
    let ns = npow(n, s);
    let mut tail = ns * n / (s - 1.0) + ns * 0.5;
    let mut rising = s;
    let mut pw = ns / n;
    let mut fact = 2.0;
    for k in 1..=11usize {
        tail += rising * pw * (BERNOULLI_EVEN[k - 1] / fact);
        let kf = k as f64;
        rising *= (s + 2.0 * kf - 1.0) * (s + 2.0 * kf);
        pw /= n * n;
        fact *= (2.0 * kf + 1.0) * (2.0 * kf + 2.0);
    }
    tail
}

/// Hurwitz ζ(s, a) = Σ_{k≥0} (k+a)^{-s} for real s > 1, a > 0.
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if !(s > 1.0) || !(a > 0.0) {
        return Err(Error::Domain(format!("hurwitz_zeta(s={s}, a={a})")));
    }
    let sc = Complex64::new(s, 0.0);
    let shift = if a < 20.0 { libm::ceil(20.0 - a) as usize } else { 0 };
    let mut head = 0.0;
    for k in (0..shift).rev() {
        head += libm::pow(k as f64 + a, -s);
    }
    Ok(head + em_tail(sc, a + shift as f64).re)
}

/// Σ_{k=a}^{b} k^{-σ} over integers, for any σ > 0 (σ ≠ 1).
pub fn power_sum(sigma: f64, a: u64, b: u64) -> f64 {
    if b < a {
        return 0.0;
    }
    if b - a < 64 || a < 20 {
        if b - a < 4096 {
            let mut s = crate::numerics::NeumaierSum::new();
            for k in a..=b {
                s.add(libm::pow(k as f64, -sigma));
            }
            return s.value();
        }
        let mut s = crate::numerics::NeumaierSum::new();
        for k in a..20 {
            s.add(libm::pow(k as f64, -sigma));
        }
        return s.value() + power_sum(sigma, 20, b);
    }
    // Euler–Maclaurin on [a, b]
    let (af, bf) = (a as f64, b as f64);
    let one_minus = 1.0 - sigma;
    let integral = libm::pow(af, one_minus) * libm::expm1(one_minus * libm::log(bf / af)) / one_minus;
    let fa = libm::pow(af, -sigma);
    let fb = libm::pow(bf, -sigma);
    let mut s = integral + 0.5 * (fa + fb);
    // derivatives: f^{(2k-1)}(x) = -σ(σ+1)...(σ+2k-2) x^{-σ-2k+1}
    let mut rising = sigma;
    let mut pa = fa / af;
    let mut pb = fb / bf;
    let mut fact = 2.0;
    for k in 1..=6usize {
        s += BERNOULLI_EVEN[k - 1] / fact * (-rising) * (pb - pa);
        let kf = k as f64;
        rising *= (sigma + 2.0 * kf - 1.0) * (sigma + 2.0 * kf);
        pa /= af * af;
        pb /= bf * bf;
        fact *= (2.0 * kf + 1.0) * (2.0 * kf + 2.0);
    }
    s
}

/// Digamma ψ(x) for real x > 0.
pub fn digamma(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x < 20.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let series = inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    acc + libm::log(x) - 0.5 / x - series
}
