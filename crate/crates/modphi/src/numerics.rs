//! Quadrature, compensated summation and FFT kernels.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn neumaier<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = NeumaierSum::new();
    for x in it {
        s.add(x);
    }
    s.value()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 15/7 panel for a vector-valued integrand.
/// Returns the Kronrod estimate and the max-component |K - G| error.
pub fn gk15<const K: usize, F: FnMut(f64) -> [f64; K]>(f: &mut F, a: f64, b: f64) -> ([f64; K], f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = [0.0; K];
    let mut rg = [0.0; K];
    for k in 0..K {
        rk[k] = WGK[7] * fc[k];
        rg[k] = WG[3] * fc[k];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for k in 0..K {
            let s = f1[k] + f2[k];
            rk[k] += WGK[j] * s;
            if j % 2 == 1 {
                rg[k] += WG[j / 2] * s;
            }
        }
    }
    let mut err: f64 = 0.0;
    for k in 0..K {
        rk[k] *= h;
        rg[k] *= h;
        err = err.max((rk[k] - rg[k]).abs());
    }
    (rk, err)
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<const K: usize> {
    pub value: [f64; K],
    pub error: f64,
    pub converged: bool,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_panels: 20_000 }
    }
}

/// Globally adaptive Gauss–Kronrod on a finite interval.
pub fn integrate_vec<const K: usize, F: FnMut(f64) -> [f64; K]>(
    mut f: F,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> QuadResult<K> {
    integrate_panels(&mut f, &[a, b], opts)
}

/// Adaptive integration starting from the given breakpoints.
pub fn integrate_panels<const K: usize, F: FnMut(f64) -> [f64; K]>(
    f: &mut F,
    breaks: &[f64],
    opts: QuadOptions,
) -> QuadResult<K> {
    struct Panel<const K: usize> {
        a: f64,
        b: f64,
        v: [f64; K],
        e: f64,
    }
    impl<const K: usize> PartialEq for Panel<K> {
        fn eq(&self, o: &Self) -> bool {
            self.e.total_cmp(&o.e).is_eq()
        }
    }
    impl<const K: usize> Eq for Panel<K> {}
    impl<const K: usize> PartialOrd for Panel<K> {
        fn partial_cmp(&self, o: &Self) -> Option<core::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl<const K: usize> Ord for Panel<K> {
        fn cmp(&self, o: &Self) -> core::cmp::Ordering {
            self.e.total_cmp(&o.e)
        }
    }
    let mut heap: BinaryHeap<Panel<K>> = BinaryHeap::new();
    let mut total = [0.0; K];
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let (v, e) = gk15(f, w[0], w[1]);
        for k in 0..K {
            total[k] += v[k];
        }
        err += e;
        heap.push(Panel { a: w[0], b: w[1], v, e });
    }
    let mut steps = 0usize;
    loop {
        steps += 1;
        if steps % 128 == 0 {
            total = [0.0; K];
            err = 0.0;
            for p in heap.iter() {
                for k in 0..K {
                    total[k] += p.v[k];
                }
                err += p.e;
            }
        }
        let scale = total.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = opts.abs_tol.max(opts.rel_tol * scale);
        let worst = heap.peek().expect("at least one panel");
        let tiny = (worst.b - worst.a).abs() <= 1e-14 * (worst.a.abs() + worst.b.abs() + 1e-300);
        if err <= tol || heap.len() >= opts.max_panels || tiny {
            let panels = heap.into_vec();
            let mut value = [0.0; K];
            for k in 0..K {
                value[k] = neumaier(panels.iter().map(|p| p.v[k]));
            }
            let err: f64 = panels.iter().map(|p| p.e).sum();
            return QuadResult { value, error: err, converged: err <= tol, panels: panels.len() };
        }
        let p = heap.pop().expect("nonempty");
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(f, p.a, m);
        let (v2, e2) = gk15(f, m, p.b);
        for k in 0..K {
            total[k] += v1[k] + v2[k] - p.v[k];
        }
        err += e1 + e2 - p.e;
        heap.push(Panel { a: p.a, b: m, v: v1, e: e1 });
        heap.push(Panel { a: m, b: p.b, v: v2, e: e2 });
    }
}

/// Scalar convenience wrapper.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult<1> {
    integrate_vec(|x| [f(x)], a, b, opts)
}

/// Integral over `[a, ∞)` via `x = a + s/(1-s)`.
pub fn integrate_to_inf<F: FnMut(f64) -> f64>(mut f: F, a: f64, opts: QuadOptions) -> QuadResult<1> {
    integrate_vec(
        |s| {
            if s >= 1.0 {
                return [0.0];
            }
            let d = 1.0 - s;
            let v = f(a + s / d) / (d * d);
            [if v.is_finite() { v } else { 0.0 }]
        },
        0.0,
        1.0,
        opts,
    )
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// In-place radix-2 FFT; `inverse` uses the positive exponent and divides by the length.
pub fn fft(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let half_n = n / 2;
    let twiddle: Vec<Complex64> = (0..half_n)
        .map(|k| {
            let (s, c) = libm::sincos(sign * 2.0 * PI * k as f64 / n as f64);
            Complex64::new(c, s)
        })
        .collect();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddle[k * stride];
                let u = buf[start + k];
                let v = buf[start + k + half] * w;
                buf[start + k] = u + v;
                buf[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
    if inverse {
        let s = 1.0 / n as f64;
        for z in buf.iter_mut() {
            *z *= s;
        }
    }
}
