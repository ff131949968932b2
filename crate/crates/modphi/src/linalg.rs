//! Dense linear algebra for the random-matrix samplers.
//!
//! Matrices are square and row-major. Only what the samplers need is here:
//! Householder QR, LU determinants, and eigenvalues of complex matrices via
//! Hessenberg reduction and shifted QR sweeps.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

/// Scalar field for the generic kernels.
pub trait Scalar:
    Copy
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + core::fmt::Debug
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_re(x: f64) -> Self;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn abs_sq(self) -> f64;
    /// `self / |self|`, or 1 at zero.
    fn phase(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        libm::fabs(self)
    }
    fn abs_sq(self) -> f64 {
        self * self
    }
    fn phase(self) -> Self {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn abs(self) -> f64 {
        libm::hypot(self.re, self.im)
    }
    fn abs_sq(self) -> f64 {
        self.norm_sqr()
    }
    fn phase(self) -> Self {
        let r = Scalar::abs(self);
        if r == 0.0 {
            Self::one()
        } else {
            self / r
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

pub type RMatrix = Matrix<f64>;
pub type CMatrix = Matrix<Complex64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Row-major construction; `data.len()` must be a perfect square.
    pub fn from_rows(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Precondition(alloc::format!("expected {} entries, got {}", n * n, data.len())));
        }
        Ok(Matrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(&a, &b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `max |(M* M − I)_{ij}|`.
    pub fn unitarity_residual(&self) -> f64 {
        self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.n))
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |s, i| s + self[(i, i)])
    }

    /// `I − M`.
    pub fn one_minus(&self) -> Self {
        Self::from_fn(self.n, |i, j| if i == j { T::one() - self[(i, j)] } else { -self[(i, j)] })
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (self.n, other.n);
        Self::from_fn(a + b, |i, j| {
            if i < a && j < a {
                self[(i, j)]
            } else if i >= a && j >= a {
                other[(i - a, j - a)]
            } else {
                T::zero()
            }
        })
    }
}

impl<T> core::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> core::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Householder QR. Returns `Q` with the phases of `R`'s diagonal absorbed so
/// that `R` has a positive diagonal; for Ginibre input this `Q` is Haar.
pub fn qr_positive<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    let n = a.n;
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let norm = libm::sqrt((k..n).map(|i| r[(i, k)].abs_sq()).sum::<f64>());
        let x0 = r[(k, k)];
        let alpha = -(x0.phase() * T::from_re(norm));
        let mut v: Vec<T> = (k..n).map(|i| r[(i, k)]).collect();
        v[0] = v[0] - alpha;
        let vn = libm::sqrt(v.iter().map(|x| x.abs_sq()).sum::<f64>());
        if vn > 0.0 {
            for x in v.iter_mut() {
                *x = *x / T::from_re(vn);
            }
            // R[k.., j] -= 2 v (v* R[k.., j])
            for j in k..n {
                let mut dot = T::zero();
                for (idx, i) in (k..n).enumerate() {
                    dot = dot + v[idx].conj() * r[(i, j)];
                }
                let two_dot = T::from_re(2.0) * dot;
                for (idx, i) in (k..n).enumerate() {
                    r[(i, j)] = r[(i, j)] - v[idx] * two_dot;
                }
            }
            diag.push(alpha);
        } else {
            diag.push(x0);
        }
        reflectors.push(v);
    }
    let mut q = Matrix::<T>::identity(n);
    for k in (0..n).rev() {
        let v = &reflectors[k];
        let vn: f64 = v.iter().map(|x| x.abs_sq()).sum();
        if vn == 0.0 {
            continue;
        }
        for j in 0..n {
            let mut dot = T::zero();
            for (idx, i) in (k..n).enumerate() {
                dot = dot + v[idx].conj() * q[(i, j)];
            }
            let two_dot = T::from_re(2.0) * dot;
            for (idx, i) in (k..n).enumerate() {
                q[(i, j)] = q[(i, j)] - v[idx] * two_dot;
            }
        }
    }
    for (j, &d) in diag.iter().enumerate() {
        let ph = d.phase();
        for i in 0..n {
            q[(i, j)] = q[(i, j)] * ph;
        }
    }
    q
}

/// Determinant by partial-pivot LU.
pub fn determinant<T: Scalar>(a: &Matrix<T>) -> T {
    let n = a.n;
    let mut m = a.clone();
    let mut det = T::one();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs())).unwrap_or(k);
        if m[(p, k)] == T::zero() {
            return T::zero();
        }
        if p != k {
            for j in 0..n {
                m.data.swap(p * n + j, k * n + j);
            }
            det = -det;
        }
        let piv = m[(k, k)];
        det = det * piv;
        for i in k + 1..n {
            let f = m[(i, k)] / piv;
            if f == T::zero() {
                continue;
            }
            for j in k + 1..n {
                let upd = m[(k, j)];
                m[(i, j)] = m[(i, j)] - f * upd;
            }
        }
    }
    det
}

/// Eigenvalues of a complex matrix (unordered).
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    let n = a.n;
    let mut h = a.clone();
    hessenberg(&mut h);
    let eps = f64::EPSILON;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(out);
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let max_iter = 60 * n.max(1);
    let mut total = 0usize;
    loop {
        if hi == 0 {
            out[0] = h[(0, 0)];
            break;
        }
        // find the start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if h[(lo, lo - 1)].norm() <= eps * s.max(f64::MIN_POSITIVE) {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_iter {
            return Err(Error::NonConvergence(total));
        }
        let mu = if iter % 11 == 10 {
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(&mut h, lo, hi, mu);
    }
    Ok(out)
}

fn hessenberg(h: &mut CMatrix) {
    let n = h.n;
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let norm = libm::sqrt((k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let alpha = -(Scalar::phase(x0) * norm);
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vn = libm::sqrt(v.iter().map(|x| x.norm_sqr()).sum::<f64>());
        if vn == 0.0 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= vn;
        }
        // left: rows k+1.. of all columns
        for j in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (idx, i) in (k + 1..n).enumerate() {
                dot += v[idx].conj() * h[(i, j)];
            }
            for (idx, i) in (k + 1..n).enumerate() {
                let upd = v[idx] * dot * 2.0;
                h[(i, j)] -= upd;
            }
        }
        // right: columns k+1.. of all rows
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (idx, j) in (k + 1..n).enumerate() {
                dot += h[(i, j)] * v[idx];
            }
            for (idx, j) in (k + 1..n).enumerate() {
                let upd = dot * v[idx].conj() * 2.0;
                h[(i, j)] -= upd;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr_half = (a + d) * 0.5;
    let disc = ((a - d) * 0.5) * ((a - d) * 0.5) + b * c;
    let s = disc.sqrt();
    let l1 = tr_half + s;
    let l2 = tr_half - s;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let r = libm::hypot(na, nb);
    (na / r, (a / na) * b.conj() / r)
}

fn qr_sweep(h: &mut CMatrix, lo: usize, hi: usize, mu: Complex64) {
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for j in lo..hi {
        let (c, s) = givens(h[(j, j)], h[(j + 1, j)]);
        for col in j..=hi {
            let x = h[(j, col)];
            let y = h[(j + 1, col)];
            h[(j, col)] = x * c + s * y;
            h[(j + 1, col)] = -s.conj() * x + y * c;
        }
        rots.push((c, s));
    }
    for (off, &(c, s)) in rots.iter().enumerate() {
        let j = lo + off;
        let last = (j + 2).min(hi);
        for row in lo..=last {
            let x = h[(row, j)];
            let y = h[(row, j + 1)];
            h[(row, j)] = x * c + y * s.conj();
            h[(row, j + 1)] = -x * s + y * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}

/// Real 2×2 matrix, the scaling maps of every scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2([[a, 0.0], [0.0, b]])
    }

    pub fn scalar(a: f64) -> Self {
        Self::diag(a, a)
    }

    pub fn det(&self) -> f64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(Error::Precondition(alloc::format!("singular scaling matrix {:?}", self.0)));
        }
        let m = self.0;
        Ok(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    pub fn transpose(&self) -> Self {
        let m = self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn mul(&self, o: &Mat2) -> Self {
        let (a, b) = (self.0, o.0);
        let mut r = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        let m = self.0;
        [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
    }

    /// Operator 2-norm.
    pub fn norm(&self) -> f64 {
        let m = self.0;
        let fro = m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1];
        let d = self.det();
        let disc = libm::sqrt((fro * fro - 4.0 * d * d).max(0.0));
        libm::sqrt((fro + disc) / 2.0)
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                r = r.max((self.0[i][j] - o.0[i][j]).abs());
            }
        }
        r
    }
}
