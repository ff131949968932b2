//! Band-limited lower and upper envelopes of a compactly supported function.
//!
//! The upper envelope is `p·h`: `p` is a Jackson mean, with period `2N`, of
//! a dilation of `f + θ`, and `h(x) = Π sin²(a x_j)/(a x_j)²`. The lower
//! envelope is a band-limited mean of an erosion of `f`, minus a
//! band-limited majorant of the kernel tails, so it stays below `f` on the
//! whole space.

use alloc::format;
use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt::Write;

use num_complex::Complex64;

use super::trig::{jackson_coefficients, Jackson};
use crate::numerics::fft;
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Copy)]
pub struct SandwichOptions {
    /// Check nodes per axis on `[-k, k]^d`; defaults to 4096 on the line and 64 in the plane.
    pub nodes_per_dim: Option<usize>,
    /// Number of tenfold reductions of the buffer level tried before giving up.
    pub max_refinements: usize,
}

impl Default for SandwichOptions {
    fn default() -> Self {
        SandwichOptions { nodes_per_dim: None, max_refinements: 24 }
    }
}

/// Grid samples of `g2 ≤ f ≤ g1` with the certified properties.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLimitedPair {
    pub dim: usize,
    pub nodes: Vec<Point>,
    pub f: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    /// Both Fourier transforms vanish outside `[-R, R]^d`.
    pub fourier_support_radius: f64,
    /// `∫ (g1 - g2)`, computed from exact transforms.
    pub gap_integral: f64,
    /// Buffer level of the accepted construction.
    pub epsilon: f64,
    /// Fraction of the spectral energy of `g1` (its `y = 0` slice in the
    /// plane) beyond the radius of the upper construction.
    pub spectral_leakage: f64,
}

impl BandLimitedPair {
    /// `max(g2 - f, f - g1, 0)` over the nodes.
    pub fn order_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.f.len() {
            worst = worst.max(self.g2[i] - self.f[i]).max(self.f[i] - self.g1[i]);
        }
        worst
    }

    /// `x,f,g1,g2` rows (`x,y,f,g1,g2` in the plane).
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        if self.dim == 1 {
            s.push_str("x,f,g1,g2\n");
        } else {
            s.push_str("x,y,f,g1,g2\n");
        }
        for (i, x) in self.nodes.iter().enumerate() {
            if self.dim == 1 {
                let _ = writeln!(s, "{},{},{},{}", x[0], self.f[i], self.g1[i], self.g2[i]);
            } else {
                let _ = writeln!(s, "{},{},{},{},{}", x[0], x[1], self.f[i], self.g1[i], self.g2[i]);
            }
        }
        s
    }
}

/// Builds `g2 ≤ f ≤ g1` with compactly supported Fourier transforms and
/// `∫(g1 - g2) ≤ eta`, for continuous `f` vanishing outside `[-support, support]^d`.
pub fn sandwich_approximation(
    f: &(dyn Fn(Point) -> f64 + Sync),
    dim: usize,
    support: f64,
    eta: f64,
    opts: &SandwichOptions,
) -> Result<BandLimitedPair> {
    if dim != 1 && dim != 2 {
        return Err(Error::Precondition(format!("dimension {dim} not supported")));
    }
    if !(support > 0.0 && support.is_finite() && eta > 0.0) {
        return Err(Error::Domain("support and eta must be positive".into()));
    }
    let k = support + 1.0;
    let n = opts.nodes_per_dim.unwrap_or(if dim == 1 { 4096 } else { 64 });
    let axis: Vec<f64> = (0..n).map(|i| -k + (i as f64 + 0.5) * 2.0 * k / n as f64).collect();
    let nodes: Vec<Point> = if dim == 1 {
        axis.iter().map(|&x| [x, 0.0]).collect()
    } else {
        axis.iter().flat_map(|&x| axis.iter().map(move |&y| [x, y])).collect()
    };
    let fvals: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    if fvals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sandwich input"));
    }

    let (sup_pos, sup_neg) = dense_extrema(f, dim, k);
    if sup_pos.max(sup_neg) < 1e-12 {
        let zeros = vec![0.0; nodes.len()];
        return Ok(BandLimitedPair {
            dim,
            nodes,
            f: fvals,
            g1: zeros.clone(),
            g2: zeros,
            fourier_support_radius: 0.0,
            gap_integral: 0.0,
            epsilon: 0.0,
            spectral_leakage: 0.0,
        });
    }
    let pos = |x: Point| f(x).max(0.0);
    let neg = |x: Point| (-f(x)).max(0.0);
    let mut halves: Vec<(&(dyn Fn(Point) -> f64 + Sync), f64, f64)> = Vec::new();
    if sup_pos > 0.0 {
        halves.push((&pos, sup_pos, 1.0));
    }
    if sup_neg > 0.0 {
        halves.push((&neg, sup_neg, -1.0));
    }
    let share = eta / halves.len() as f64;

    let lows = halves
        .iter()
        .map(|&(h, _, _)| Lower::build(h, dim, k, 0.02 * share))
        .collect::<Result<Vec<_>>>()?;
    let low_values: Vec<Vec<f64>> = lows.iter().map(|l| l.eval_grid(&axis)).collect();

    let mut best = f64::INFINITY;
    for j in 1..=opts.max_refinements {
        let eps = libm::pow(10.0, -(j as f64));
        let beta = libm::pow(eps, 1.0 / (4.0 * dim as f64));
        // the crude first levels are skipped: their buffer alone exceeds the target
        if beta * libm::pow(2.0 * k - 1.0, dim as f64) > share {
            continue;
        }
        let mut g1 = vec![0.0; nodes.len()];
        let mut g2 = vec![0.0; nodes.len()];
        let mut gap = 0.0;
        let mut radius: f64 = 0.0;
        let mut leakage: f64 = 0.0;
        for (idx, &(h, sup, sign)) in halves.iter().enumerate() {
            let up = Upper::build(h, dim, k, sup, eps, 0.05 * share)?;
            let low = &lows[idx];
            let uv = up.eval_grid(&axis);
            let lv = &low_values[idx];
            for i in 0..nodes.len() {
                if sign > 0.0 {
                    g1[i] += uv[i];
                    g2[i] += lv[i];
                } else {
                    g1[i] -= lv[i];
                    g2[i] -= uv[i];
                }
            }
            gap += up.integral() - low.integral();
            radius = radius.max(up.radius()).max(low.radius());
            leakage = leakage.max(up.spectral_leakage());
        }
        best = best.min(gap);
        if gap <= eta {
            return Ok(BandLimitedPair {
                dim,
                nodes,
                f: fvals,
                g1,
                g2,
                fourier_support_radius: radius,
                gap_integral: gap,
                epsilon: eps,
                spectral_leakage: leakage,
            });
        }
    }
    Err(Error::Tuning { achieved: best, target: eta })
}

fn dense_extrema(f: &(dyn Fn(Point) -> f64 + Sync), dim: usize, k: f64) -> (f64, f64) {
    let n = if dim == 1 { 1 << 14 } else { 512 };
    let step = 2.0 * k / n as f64;
    let mut hi: f64 = 0.0;
    let mut lo: f64 = 0.0;
    for i in 0..=n {
        let x = -k + i as f64 * step;
        if dim == 1 {
            let v = f([x, 0.0]);
            hi = hi.max(v);
            lo = lo.min(v);
        } else {
            for j in 0..=n {
                let v = f([x, -k + j as f64 * step]);
                hi = hi.max(v);
                lo = lo.min(v);
            }
        }
    }
    (hi, -lo)
}

/// Samples of `g` on the tensor grid `(i0..=i1)^dim · spacing`, row-major.
fn sample_grid(g: &dyn Fn(Point) -> f64, dim: usize, half: i64, spacing: f64) -> Vec<f64> {
    let side = (2 * half + 1) as usize;
    let coord = |i: usize| (i as i64 - half) as f64 * spacing;
    if dim == 1 {
        (0..side).map(|i| g([coord(i), 0.0])).collect()
    } else {
        let mut v = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                v.push(g([coord(i), coord(j)]));
            }
        }
        v
    }
}

/// Sliding max (or min) with half-width `w` along every axis.
fn sliding_extreme(v: &[f64], dim: usize, side: usize, w: usize, take_max: bool) -> Vec<f64> {
    let beats = |a: f64, b: f64| if take_max { a >= b } else { a <= b };
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut line = |src: &dyn Fn(usize) -> f64, out: &mut dyn FnMut(usize, f64)| {
        queue.clear();
        let mut next = 0;
        for i in 0..side {
            let hi = (i + w).min(side - 1);
            while next <= hi {
                let x = src(next);
                while queue.back().is_some_and(|&q| beats(x, src(q))) {
                    queue.pop_back();
                }
                queue.push_back(next);
                next += 1;
            }
            while queue.front().is_some_and(|&q| q + w < i) {
                queue.pop_front();
            }
            out(i, src(queue[0]));
        }
    };
    if dim == 1 {
        let mut out = vec![0.0; side];
        line(&|q| v[q], &mut |i, m| out[i] = m);
        out
    } else {
        let mut rows = vec![0.0; side * side];
        for r in 0..side {
            line(&|q| v[r * side + q], &mut |i, m| rows[r * side + i] = m);
        }
        let mut out = vec![0.0; side * side];
        for c in 0..side {
            line(&|q| rows[q * side + c], &mut |i, m| out[i * side + c] = m);
        }
        out
    }
}

/// Largest difference quotient between neighbouring samples.
fn lipschitz_estimate(v: &[f64], dim: usize, side: usize, spacing: f64) -> f64 {
    let mut worst: f64 = 0.0;
    if dim == 1 {
        for w in v.windows(2) {
            worst = worst.max((w[1] - w[0]).abs());
        }
    } else {
        for i in 0..side {
            for j in 0..side {
                let here = v[i * side + j];
                if j + 1 < side {
                    worst = worst.max((v[i * side + j + 1] - here).abs());
                }
                if i + 1 < side {
                    worst = worst.max((v[(i + 1) * side + j] - here).abs());
                }
            }
        }
    }
    worst / spacing
}

/// `Σ_{ℓ} w_ℓ Π_j K(c_{i_j} - x_{ℓ_j})` on the check grid, for separable kernels
/// given as tables `ker[i][ℓ]`.
fn separable_sum(weights: &[f64], dim: usize, side: usize, ker: &[Vec<f64>]) -> Vec<f64> {
    let n = ker.len();
    if dim == 1 {
        ker.iter().map(|row| row.iter().zip(weights).map(|(k, w)| k * w).sum()).collect()
    } else {
        // h[l1][j] = Σ_l2 w[l1][l2] ker[j][l2]
        let mut h = vec![0.0; side * n];
        for l1 in 0..side {
            let wrow = &weights[l1 * side..(l1 + 1) * side];
            if wrow.iter().all(|&x| x == 0.0) {
                continue;
            }
            for (j, krow) in ker.iter().enumerate() {
                h[l1 * n + j] = wrow.iter().zip(krow).map(|(a, b)| a * b).sum();
            }
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for l1 in 0..side {
                    acc += ker[i][l1] * h[l1 * n + j];
                }
                out[i * n + j] = acc;
            }
        }
        out
    }
}

fn sinc2(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0
    } else {
        let s = libm::sin(x) / x;
        s * s
    }
}

/// Upper envelope `p·h`.
struct Upper {
    dim: usize,
    eps: f64,
    a: f64,
    spacing: f64,
    half: i64,
    excess: Vec<f64>,
    kernel: Jackson,
    coeffs: Vec<f64>,
}

impl Upper {
    fn build(f: &dyn Fn(Point) -> f64, dim: usize, k: f64, sup: f64, eps: f64, tail_budget: f64) -> Result<Self> {
        let d = dim as f64;
        let beta = libm::pow(eps, 1.0 / (4.0 * d));
        let r = beta;
        let delta = beta / (d * (beta + sup));
        let a = libm::sqrt(2.0 * delta) / k;
        let n_half = (2.0 * k).max(libm::pow(eps, -1.0 / (2.0 * d)).min(12.0 / a));
        let theta = move |x: Point| {
            let mut lam = 1.0;
            for &xi in x.iter().take(dim) {
                lam *= (k - xi.abs()).clamp(0.0, 1.0);
            }
            eps + beta * lam
        };
        let big_f = |x: Point| f(x) + theta(x);
        let sup_f = sup + eps + beta;
        let grid_volume = libm::pow(2.0 * (k + 1.5 * r), d);

        let mut m = (libm::ceil(4.0 * n_half / (PI * r)) as usize).max(2);
        let (kernel, spacing, c_t) = loop {
            let kernel = Jackson::new(m, n_half);
            let l = (kernel.degree() + 1).max(libm::ceil(16.0 * n_half / r) as usize).next_power_of_two();
            let spacing = 2.0 * n_half / l as f64;
            let tail = d * kernel.discrete_tail(r, spacing);
            // lifting every node weight by c_t keeps p ≥ F on [-k, k]^d despite the far mass
            let c_t = if tail < 0.5 { (sup_f - eps) * tail / (1.0 - tail) } else { f64::INFINITY };
            if c_t * grid_volume <= tail_budget || m > 1 << 21 {
                break (kernel, spacing, c_t);
            }
            m *= 2;
        };

        let half = libm::ceil((k + r) / spacing) as i64 + 1;
        let w = libm::floor((r + 0.5 * spacing) / spacing) as i64 + 1;
        let ext = half + w;
        let side_ext = (2 * ext + 1) as usize;
        let samples = sample_grid(&big_f, dim, ext, spacing);
        let slack = d * 1.5 * lipschitz_estimate(&samples, dim, side_ext, spacing) * spacing * 0.5;
        let dilated = sliding_extreme(&samples, dim, side_ext, w as usize, true);
        let side = (2 * half + 1) as usize;
        let excess: Vec<f64> = if dim == 1 {
            (0..side).map(|i| dilated[i + w as usize] + slack - eps + c_t).collect()
        } else {
            let mut v = Vec::with_capacity(side * side);
            for i in 0..side {
                for j in 0..side {
                    v.push(dilated[(i + w as usize) * side_ext + j + w as usize] + slack - eps + c_t);
                }
            }
            v
        };
        let coeffs = jackson_coefficients(m);
        Ok(Upper { dim, eps, a, spacing, half, excess, kernel, coeffs })
    }

    fn node(&self, l: usize) -> f64 {
        (l as i64 - self.half) as f64 * self.spacing
    }

    fn side(&self) -> usize {
        (2 * self.half + 1) as usize
    }

    fn eval_grid(&self, axis: &[f64]) -> Vec<f64> {
        let side = self.side();
        let ker: Vec<Vec<f64>> =
            axis.iter().map(|&c| (0..side).map(|l| self.kernel.eval(c - self.node(l))).collect()).collect();
        let sums = separable_sum(&self.excess, self.dim, side, &ker);
        let vol = libm::pow(self.spacing, self.dim as f64);
        let n = axis.len();
        sums.iter()
            .enumerate()
            .map(|(idx, s)| {
                let p = self.eps + vol * s;
                let h = if self.dim == 1 {
                    sinc2(self.a * axis[idx])
                } else {
                    sinc2(self.a * axis[idx / n]) * sinc2(self.a * axis[idx % n])
                };
                p * h
            })
            .collect()
    }

    /// `∫ K(x - c) sin²(ax)/(ax)² dx` from the transform `(π/a)(1 - |ξ|/2a)⁺`.
    fn window_moment(&self, c: f64) -> f64 {
        let om = self.kernel.omega();
        let a = self.a;
        let mut acc = PI / a;
        let mut j = 1;
        while (j as f64) * om < 2.0 * a && j < self.coeffs.len() {
            let xi = j as f64 * om;
            acc += 2.0 * self.coeffs[j] * libm::cos(xi * c) * (PI / a) * (1.0 - xi / (2.0 * a));
            j += 1;
        }
        acc / (2.0 * self.kernel.half_period)
    }

    fn integral(&self) -> f64 {
        let side = self.side();
        let mom: Vec<f64> = (0..side).map(|l| self.window_moment(self.node(l))).collect();
        let vol = libm::pow(self.spacing, self.dim as f64);
        let mut acc = 0.0;
        if self.dim == 1 {
            for l in 0..side {
                acc += self.excess[l] * mom[l];
            }
        } else {
            for l1 in 0..side {
                for l2 in 0..side {
                    acc += self.excess[l1 * side + l2] * mom[l1] * mom[l2];
                }
            }
        }
        self.eps * libm::pow(PI / self.a, self.dim as f64) + vol * acc
    }

    fn radius(&self) -> f64 {
        self.kernel.omega() * self.kernel.degree() as f64 + 2.0 * self.a
    }

    /// Energy fraction of `g1` (or its `y = 0` slice) beyond `radius()`,
    /// from samples over eight periods at twice the Nyquist rate.
    fn spectral_leakage(&self) -> f64 {
        let side = self.side();
        let line: Vec<f64> = if self.dim == 1 {
            self.excess.clone()
        } else {
            let ky: Vec<f64> = (0..side).map(|l| self.kernel.eval(-self.node(l))).collect();
            (0..side)
                .map(|l1| self.spacing * (0..side).map(|l2| self.excess[l1 * side + l2] * ky[l2]).sum::<f64>())
                .collect()
        };
        let n_half = self.kernel.half_period;
        let l = libm::round(2.0 * n_half / self.spacing) as usize;
        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        for (idx, &v) in line.iter().enumerate() {
            let pos = (idx as i64 - self.half).rem_euclid(l as i64) as usize;
            buf[pos] += Complex64::new(v, 0.0);
        }
        fft(&mut buf, false);
        let deg = self.kernel.degree();
        let scale = self.spacing / (2.0 * n_half);
        let l2 = (2 * (2 * deg + libm::ceil(4.0 * self.a * n_half / PI) as usize) + 1).next_power_of_two();
        let mut pbuf = vec![Complex64::new(0.0, 0.0); l2];
        for j in 0..=deg {
            let c = buf[j % l] * (self.coeffs[j] * scale);
            pbuf[j] += c;
            if j > 0 {
                pbuf[l2 - j] += c.conj();
            }
        }
        pbuf[0] += Complex64::new(self.eps, 0.0);
        fft(&mut pbuf, true);
        let periods = 8;
        let total_n = periods * l2;
        let dx = 2.0 * n_half / l2 as f64;
        let start = -7.0 * n_half;
        let mut samples = vec![Complex64::new(0.0, 0.0); total_n];
        for (i, s) in samples.iter_mut().enumerate() {
            let x = start + i as f64 * dx;
            let p = pbuf[(i + l2 / 2) % l2].re * l2 as f64;
            *s = Complex64::new(p * sinc2(self.a * x), 0.0);
        }
        fft(&mut samples, false);
        let cutoff = self.radius() * (1.0 + 1e-9);
        let mut inside = 0.0;
        let mut outside = 0.0;
        for (q, z) in samples.iter().enumerate() {
            let qs = if q <= total_n / 2 { q as f64 } else { q as f64 - total_n as f64 };
            let nu = 2.0 * PI * qs / (total_n as f64 * dx);
            let e = z.norm_sqr();
            if nu.abs() > cutoff {
                outside += e;
            } else {
                inside += e;
            }
        }
        outside / (inside + outside).max(f64::MIN_POSITIVE)
    }
}

/// Lower envelope: band-limited mean of an erosion minus a tail majorant.
struct Lower {
    dim: usize,
    rho: f64,
    kappa: f64,
    power: i32,
    spacing: f64,
    half: i64,
    eroded: Vec<f64>,
    majorant: f64,
    b: f64,
}

impl Lower {
    fn build(f: &dyn Fn(Point) -> f64, dim: usize, k: f64, budget: f64) -> Result<Self> {
        let d = dim as f64;
        let power = dim as i32 + 1;
        let sinc_mass = if dim == 1 { 2.0 * PI / 3.0 } else { 11.0 * PI / 20.0 };
        let support = k - 1.0;
        // erosion radius tied to the support scale; the dilation counterpart uses the buffer level
        let r = (0.02 * support).max(1e-3);
        let mut rho = 10.0 / r;
        let mut last = None;
        for _ in 0..10 {
            let spacing = PI / (2.0 * power as f64 * rho);
            let kappa = rho / sinc_mass;
            let half = libm::ceil(support / spacing) as i64;
            let w = libm::floor((r + 0.5 * spacing) / spacing) as i64 + 1;
            let ext = half + w;
            let side_ext = (2 * ext + 1) as usize;
            let samples = sample_grid(f, dim, ext, spacing);
            let slack = d * 1.5 * lipschitz_estimate(&samples, dim, side_ext, spacing) * spacing * 0.5;
            let minimum = sliding_extreme(&samples, dim, side_ext, w as usize, false);
            let side = (2 * half + 1) as usize;
            let mut eroded = vec![0.0; side.pow(dim as u32)];
            let mut e_max: f64 = 0.0;
            let mut reach: f64 = 0.0;
            for (idx, e) in eroded.iter_mut().enumerate() {
                let (i, j) = if dim == 1 { (idx, w as usize) } else { (idx / side, idx % side) };
                let src = if dim == 1 {
                    minimum[i + w as usize]
                } else {
                    minimum[(i + w as usize) * side_ext + j + w as usize]
                };
                let v = (src - slack).max(0.0);
                *e = v;
                if v > 0.0 {
                    e_max = e_max.max(v);
                    let xi = ((i as i64 - half) as f64 * spacing).abs();
                    let yj = if dim == 1 { 0.0 } else { ((j as i64 - half) as f64 * spacing).abs() };
                    reach = reach.max(xi).max(yj);
                }
            }
            let b = PI / (2.0 * reach.max(r));
            let tail_1 = |s: f64| -> f64 {
                let rs = rho * s;
                let p2 = 2 * power;
                let t = 2.0 * kappa
                    * (spacing / libm::pow(rs, p2 as f64)
                        + libm::pow(s, 1.0 - p2 as f64) / ((p2 - 1) as f64 * libm::pow(rho, p2 as f64)));
                t.min(1.0)
            };
            let grow = |dd: f64| libm::pow(b * (dd + reach) + PI / 2.0, 2.0 * d);
            let mut sup_ratio = d * tail_1(r) * grow(r);
            let mut dd = r;
            let stop = 1e8 * reach.max(r);
            while dd < stop {
                let next = dd * 1.05;
                sup_ratio = sup_ratio.max(d * tail_1(dd) * grow(next));
                dd = next;
            }
            let majorant = e_max * sup_ratio;
            let low = Lower { dim, rho, kappa, power, spacing, half, eroded, majorant, b };
            if low.majorant_integral() <= budget {
                return Ok(low);
            }
            last = Some(low);
            rho *= 2.0;
        }
        last.ok_or(Error::NonConvergence(10))
    }

    fn majorant_integral(&self) -> f64 {
        self.majorant * libm::pow(2.0 * PI / self.b, self.dim as f64)
    }

    fn kernel(&self, y: f64) -> f64 {
        let s = sinc2(self.rho * y);
        self.kappa * libm::pow(s, self.power as f64)
    }

    fn node(&self, l: usize) -> f64 {
        (l as i64 - self.half) as f64 * self.spacing
    }

    fn side(&self) -> usize {
        (2 * self.half + 1) as usize
    }

    fn shape(&self, y: f64) -> f64 {
        sinc2(self.b * y) + sinc2(self.b * y - PI / 2.0)
    }

    fn eval_grid(&self, axis: &[f64]) -> Vec<f64> {
        let side = self.side();
        let ker: Vec<Vec<f64>> = axis.iter().map(|&c| (0..side).map(|l| self.kernel(c - self.node(l))).collect()).collect();
        let sums = separable_sum(&self.eroded, self.dim, side, &ker);
        let vol = libm::pow(self.spacing, self.dim as f64);
        let n = axis.len();
        sums.iter()
            .enumerate()
            .map(|(idx, s)| {
                let v = if self.dim == 1 {
                    self.shape(axis[idx])
                } else {
                    self.shape(axis[idx / n]) * self.shape(axis[idx % n])
                };
                vol * s - self.majorant * v
            })
            .collect()
    }

    fn integral(&self) -> f64 {
        let vol = libm::pow(self.spacing, self.dim as f64);
        vol * self.eroded.iter().sum::<f64>() - self.majorant_integral()
    }

    fn radius(&self) -> f64 {
        (2.0 * self.power as f64 * self.rho).max(2.0 * self.b)
    }
}
