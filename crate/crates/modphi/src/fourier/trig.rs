//! Trigonometric polynomials and the periodic Jackson kernel.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::numerics::fft;
use crate::{Error, Result};

/// `Σ_{|j|≤M} c_j e^{2πijx/period}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    pub period: f64,
    /// Coefficients `c_{-M}, …, c_M`.
    pub coeffs: Vec<Complex64>,
}

impl TrigPoly {
    pub fn degree(&self) -> usize {
        (self.coeffs.len() - 1) / 2
    }

    pub fn coeff(&self, j: i64) -> Complex64 {
        let m = self.degree() as i64;
        if j.abs() > m {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(j + m) as usize]
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let m = self.degree() as i64;
        let w = 2.0 * PI / self.period;
        let (s, c) = libm::sincos(w * x);
        let step = Complex64::new(c, s);
        let mut e = Complex64::new(1.0, 0.0);
        let mut acc = self.coeff(0).re;
        for j in 1..=m {
            e *= step;
            // resynchronise the recurrence every 64 steps
            if j % 64 == 0 {
                let (s, c) = libm::sincos(w * x * j as f64);
                e = Complex64::new(c, s);
            }
            acc += (self.coeff(j) * e + self.coeff(-j) * e.conj()).re;
        }
        acc
    }

    /// Frequencies whose coefficient exceeds `threshold` in modulus.
    pub fn support(&self, threshold: f64) -> Vec<i64> {
        let m = self.degree() as i64;
        (-m..=m).filter(|&j| self.coeff(j).norm() > threshold).collect()
    }
}

/// Normalised Jackson weights `k_0 = 1, …, k_{2m-2}` (symmetric in `j`):
/// the Fourier coefficients of the square of the order-`m` Fejér kernel.
pub fn jackson_coefficients(m: usize) -> Vec<f64> {
    let m = m.max(1);
    let deg = 2 * m - 2;
    let len = (2 * deg + 2).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for i in 0..m {
        let v = 1.0 - i as f64 / m as f64;
        buf[i] = Complex64::new(v, 0.0);
        if i > 0 {
            buf[len - i] = Complex64::new(v, 0.0);
        }
    }
    fft(&mut buf, false);
    for z in buf.iter_mut() {
        *z = *z * *z;
    }
    fft(&mut buf, true);
    let c0 = (2.0 * (m * m) as f64 + 1.0) / (3.0 * m as f64);
    (0..=deg).map(|j| (buf[j].re / c0).max(0.0)).collect()
}

/// Samples of a periodic function on `L` equispaced nodes, `L` a power of two.
fn sample(target: &dyn Fn(f64) -> f64, period: f64, l: usize) -> Vec<Complex64> {
    (0..l).map(|q| Complex64::new(target(period * q as f64 / l as f64), 0.0)).collect()
}

/// Uniform trigonometric approximation of a continuous `period`-periodic
/// function. Tries the truncated Fourier series of degree `M` first, then its
/// Jackson mean, doubling `M` until the error on a dense grid is at most `tol`.
pub fn trig_poly_approx(target: &dyn Fn(f64) -> f64, period: f64, tol: f64) -> Result<TrigPoly> {
    if !(period > 0.0 && tol > 0.0) {
        return Err(Error::Domain("period and tolerance must be positive".into()));
    }
    const MAX_DEGREE: usize = 1 << 14;
    let mut best = f64::INFINITY;
    let mut m = 1usize;
    while m <= MAX_DEGREE {
        let l = (4 * m).next_power_of_two();
        let mut buf = sample(target, period, l);
        fft(&mut buf, false);
        let raw: Vec<Complex64> = (-(m as i64)..=m as i64)
            .map(|j| buf[j.rem_euclid(l as i64) as usize] / l as f64)
            .collect();
        let plain = TrigPoly { period, coeffs: raw.clone() };
        let err = grid_error(&plain, target, l);
        best = best.min(err);
        if err <= tol {
            return Ok(prune(plain));
        }
        let kj = jackson_coefficients(m / 2 + 1);
        let smooth = TrigPoly {
            period,
            coeffs: raw
                .iter()
                .enumerate()
                .map(|(idx, c)| {
                    let j = (idx as i64 - m as i64).unsigned_abs() as usize;
                    c * kj.get(j).copied().unwrap_or(0.0)
                })
                .collect(),
        };
        let err = grid_error(&smooth, target, l);
        best = best.min(err);
        if err <= tol {
            return Ok(smooth);
        }
        m *= 2;
    }
    Err(Error::Tuning { achieved: best, target: tol })
}

/// Drops coefficients at rounding level so exact inputs give exact supports.
fn prune(mut p: TrigPoly) -> TrigPoly {
    let scale = p.coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()));
    for c in p.coeffs.iter_mut() {
        if c.norm() <= 1e-14 * scale.max(1e-300) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    let m = p.degree();
    let keep = (0..=m).rev().find(|&j| p.coeff(j as i64).norm() > 0.0 || p.coeff(-(j as i64)).norm() > 0.0).unwrap_or(0);
    p.coeffs = p.coeffs[m - keep..=m + keep].to_vec();
    p
}

/// Max error on a grid 8× finer than the sampling grid, evaluated by FFT.
fn grid_error(p: &TrigPoly, target: &dyn Fn(f64) -> f64, l: usize) -> f64 {
    let n = (8 * l).max(4096);
    let m = p.degree() as i64;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for j in -m..=m {
        buf[j.rem_euclid(n as i64) as usize] += p.coeff(j);
    }
    fft(&mut buf, true);
    let mut worst: f64 = 0.0;
    for (q, v) in buf.iter().enumerate() {
        let x = p.period * q as f64 / n as f64;
        worst = worst.max((v.re * n as f64 - target(x)).abs());
    }
    worst
}

/// The Jackson kernel of order `m` on the period `2·half_period`, normalised
/// to unit mass over one period.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Jackson {
    pub m: usize,
    pub half_period: f64,
    omega: f64,
    norm: f64,
}

impl Jackson {
    pub fn new(m: usize, half_period: f64) -> Self {
        let mf = m as f64;
        Jackson {
            m,
            half_period,
            omega: PI / half_period,
            norm: 3.0 / (2.0 * half_period * mf * (2.0 * mf * mf + 1.0)),
        }
    }

    pub fn degree(&self) -> usize {
        2 * self.m - 2
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn eval(&self, y: f64) -> f64 {
        let u = 0.5 * self.omega * y;
        let s = libm::sin(u);
        let mf = self.m as f64;
        let ratio = if s.abs() < 1e-12 { mf } else { libm::sin(mf * u) / s };
        let r2 = ratio * ratio;
        self.norm * r2 * r2
    }

    /// Upper bound of the kernel at periodic distance `y ∈ (0, half_period]`.
    fn envelope(&self, y: f64) -> f64 {
        let s = libm::sin(0.5 * self.omega * y);
        let mf = self.m as f64;
        let inv = if s <= 0.0 { f64::INFINITY } else { 1.0 / (s * s * s * s) };
        self.norm * inv.min(mf * mf * mf * mf)
    }

    /// Bound on `Σ spacing·K(x - x_ℓ)` over grid nodes at periodic distance
    /// beyond `r`, uniformly in `x`.
    pub fn discrete_tail(&self, r: f64, spacing: f64) -> f64 {
        let mut acc = 0.0;
        let mut y = r;
        while y <= self.half_period {
            acc += self.envelope(y);
            y += spacing;
        }
        2.0 * spacing * acc
    }
}
