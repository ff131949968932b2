//! Characteristic functions, Fourier inversion and band-limited envelopes.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::Mat2;
use crate::numerics::{integrate, integrate_panels, integrate_to_inf, integrate_vec, QuadOptions};
use crate::{Error, Point, Result};

mod sandwich;
mod trig;

pub use sandwich::{sandwich_approximation, BandLimitedPair, SandwichOptions};
pub use trig::{jackson_coefficients, trig_poly_approx, TrigPoly};

pub type CharEval = Arc<dyn Fn(Point) -> Complex64 + Send + Sync>;
pub type RadialBound = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A characteristic function on the line or the plane.
///
/// `decay_bound(r)` must dominate `|φ(t)|` for every `|t| = r`.
#[derive(Clone)]
pub struct CharFn {
    dim: usize,
    eval: CharEval,
    decay_bound: Option<RadialBound>,
}

impl core::fmt::Debug for CharFn {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CharFn").field("dim", &self.dim).field("decay_bound", &self.decay_bound.is_some()).finish()
    }
}

impl CharFn {
    pub fn new(dim: usize, eval: impl Fn(Point) -> Complex64 + Send + Sync + 'static) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Precondition(format!("dimension {dim} not supported")));
        }
        Ok(CharFn { dim, eval: Arc::new(eval), decay_bound: None })
    }

    /// One-dimensional constructor from a scalar evaluator.
    pub fn line(eval: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        CharFn { dim: 1, eval: Arc::new(move |t: Point| eval(t[0])), decay_bound: None }
    }

    pub fn with_decay(mut self, bound: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.decay_bound = Some(Arc::new(bound));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn decay_bound(&self) -> Option<&RadialBound> {
        self.decay_bound.as_ref()
    }

    pub fn eval(&self, t: Point) -> Complex64 {
        (self.eval)(t)
    }

    pub fn eval1(&self, t: f64) -> Complex64 {
        (self.eval)([t, 0.0])
    }

    /// `s ↦ φ(M s)`, where the decay bound becomes `r ↦ bound(r / ‖M⁻¹‖)`.
    pub fn compose_linear(&self, m: Mat2) -> Result<CharFn> {
        let inner = self.eval.clone();
        let eval: CharEval = Arc::new(move |s: Point| inner(m.apply(s)));
        let decay_bound = match &self.decay_bound {
            None => None,
            Some(b) => {
                let lower = 1.0 / m.inverse()?.norm();
                let b = b.clone();
                let f: RadialBound = Arc::new(move |r: f64| b(r * lower));
                Some(f)
            }
        };
        Ok(CharFn { dim: self.dim, eval, decay_bound })
    }

    /// `t ↦ φ(t)·e^{i⟨t,α⟩}`, the law translated by `α`.
    pub fn translate(&self, alpha: Point) -> CharFn {
        let inner = self.eval.clone();
        CharFn {
            dim: self.dim,
            eval: Arc::new(move |t: Point| {
                let ph = t[0] * alpha[0] + t[1] * alpha[1];
                inner(t) * Complex64::new(libm::cos(ph), libm::sin(ph))
            }),
            decay_bound: self.decay_bound.clone(),
        }
    }

    /// `e^{-|t|²/2}`.
    pub fn gaussian(dim: usize) -> Result<Self> {
        Ok(Self::new(dim, |t| Complex64::new(libm::exp(-0.5 * (t[0] * t[0] + t[1] * t[1])), 0.0))?
            .with_decay(|r| libm::exp(-0.5 * r * r)))
    }

    /// `e^{-|t|}`.
    pub fn cauchy() -> Self {
        Self::line(|t| Complex64::new(libm::exp(-t.abs()), 0.0)).with_decay(|r| libm::exp(-r))
    }

    /// `1/(1+t²)`.
    pub fn laplace() -> Self {
        Self::line(|t| Complex64::new(1.0 / (1.0 + t * t), 0.0)).with_decay(|r| 1.0 / (1.0 + r * r))
    }

    /// `e^{-|t|^p}`.
    pub fn stable(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 2.0) {
            return Err(Error::Domain(format!("stable index {p} outside (0, 2]")));
        }
        Ok(Self::line(move |t| Complex64::new(libm::exp(-libm::pow(t.abs(), p)), 0.0))
            .with_decay(move |r| libm::exp(-libm::pow(r, p))))
    }

    /// Largest violation of `φ(0)=1`, `|φ|≤1` and `φ(-t)=conj φ(t)` on `grid`.
    pub fn axiom_violation(&self, grid: &[Point]) -> f64 {
        let mut worst = (self.eval([0.0, 0.0]) - Complex64::new(1.0, 0.0)).norm();
        for &t in grid {
            let v = self.eval(t);
            let w = self.eval([-t[0], -t[1]]);
            worst = worst.max(v.norm() - 1.0).max((w - v.conj()).norm());
        }
        worst
    }
}

/// Bounded integration region with exact Lebesgue measure.
///
/// Membership is half-open (`a ≤ x < b`, `|x-c| < r`), so adjacent regions
/// partition the line without double counting atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Interval { a: f64, b: f64 },
    Box { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disc { cx: f64, cy: f64, r: f64 },
}

impl Region {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Region::Interval { a, b }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Region::Interval { a, b } => a.is_finite() && b.is_finite() && a <= b,
            Region::Box { x0, x1, y0, y1 } => [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x0 <= x1 && y0 <= y1,
            Region::Disc { cx, cy, r } => cx.is_finite() && cy.is_finite() && r.is_finite() && r >= 0.0,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::Domain(format!("invalid region {self:?}")))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn measure(&self) -> f64 {
        match *self {
            Region::Interval { a, b } => b - a,
            Region::Box { x0, x1, y0, y1 } => (x1 - x0) * (y1 - y0),
            Region::Disc { r, .. } => PI * r * r,
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        match *self {
            Region::Interval { a, b } => a <= x[0] && x[0] < b,
            Region::Box { x0, x1, y0, y1 } => x0 <= x[0] && x[0] < x1 && y0 <= x[1] && x[1] < y1,
            Region::Disc { cx, cy, r } => {
                let (dx, dy) = (x[0] - cx, x[1] - cy);
                dx * dx + dy * dy < r * r
            }
        }
    }

    pub fn translate(&self, s: Point) -> Region {
        match *self {
            Region::Interval { a, b } => Region::Interval { a: a + s[0], b: b + s[0] },
            Region::Box { x0, x1, y0, y1 } => Region::Box { x0: x0 + s[0], x1: x1 + s[0], y0: y0 + s[1], y1: y1 + s[1] },
            Region::Disc { cx, cy, r } => Region::Disc { cx: cx + s[0], cy: cy + s[1], r },
        }
    }

    /// Image under `x ↦ c·x` for `c > 0`.
    pub fn scale(&self, c: f64) -> Region {
        match *self {
            Region::Interval { a, b } => Region::Interval { a: a * c, b: b * c },
            Region::Box { x0, x1, y0, y1 } => Region::Box { x0: x0 * c, x1: x1 * c, y0: y0 * c, y1: y1 * c },
            Region::Disc { cx, cy, r } => Region::Disc { cx: cx * c, cy: cy * c, r: r * c },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Region::Interval { .. } => "interval",
            Region::Box { .. } => "box",
            Region::Disc { .. } => "disc",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Region::Interval { a, b } => alloc::vec![a, b],
            Region::Box { x0, x1, y0, y1 } => alloc::vec![x0, x1, y0, y1],
            Region::Disc { cx, cy, r } => alloc::vec![cx, cy, r],
        }
    }

    pub fn describe(&self) -> String {
        format!("{}:{:?}", self.kind(), self.params())
    }

    /// `∫_B e^{-i⟨t,x⟩} dx`.
    pub fn fourier_indicator(&self, t: Point) -> Complex64 {
        match *self {
            Region::Interval { a, b } => interval_kernel(t[0], a, b),
            Region::Box { x0, x1, y0, y1 } => interval_kernel(t[0], x0, x1) * interval_kernel(t[1], y0, y1),
            Region::Disc { cx, cy, r } => {
                let rho = libm::hypot(t[0], t[1]);
                let ph = t[0] * cx + t[1] * cy;
                let amp = if rho * r < 1e-8 { PI * r * r } else { 2.0 * PI * r * libm::j1(r * rho) / rho };
                Complex64::new(libm::cos(ph), -libm::sin(ph)) * amp
            }
        }
    }

    /// Image under `x ↦ M x` when it is again an interval, box or disc:
    /// any nonzero scalar on the line, diagonal or anti-diagonal matrices
    /// on boxes, and scaled orthogonal matrices on discs.
    pub fn linear_image(&self, m: &Mat2) -> Option<Region> {
        let [[p, q], [r, s]] = m.0;
        match *self {
            Region::Interval { a, b } => (p != 0.0).then(|| Region::Interval { a: (p * a).min(p * b), b: (p * a).max(p * b) }),
            Region::Box { x0, x1, y0, y1 } => {
                let span = |c: f64, lo: f64, hi: f64| ((c * lo).min(c * hi), (c * lo).max(c * hi));
                if q == 0.0 && r == 0.0 && p != 0.0 && s != 0.0 {
                    let (x0, x1) = span(p, x0, x1);
                    let (y0, y1) = span(s, y0, y1);
                    Some(Region::Box { x0, x1, y0, y1 })
                } else if p == 0.0 && s == 0.0 && q != 0.0 && r != 0.0 {
                    let (nx0, nx1) = span(q, y0, y1);
                    let (ny0, ny1) = span(r, x0, x1);
                    Some(Region::Box { x0: nx0, x1: nx1, y0: ny0, y1: ny1 })
                } else {
                    None
                }
            }
            Region::Disc { cx, cy, r: rad } => {
                let mtm = m.transpose().mul(m);
                let c2 = mtm.0[0][0];
                let conformal = c2 > 0.0
                    && (mtm.0[1][1] - c2).abs() <= 1e-12 * c2
                    && mtm.0[0][1].abs() <= 1e-12 * c2;
                conformal.then(|| {
                    let c = m.apply([cx, cy]);
                    Region::Disc { cx: c[0], cy: c[1], r: rad * libm::sqrt(c2) }
                })
            }
        }
    }

    /// Largest `|x|` over the region, the oscillation rate of its transform.
    fn frequency(&self) -> f64 {
        match *self {
            Region::Interval { a, b } => a.abs().max(b.abs()),
            Region::Box { x0, x1, y0, y1 } => libm::hypot(x0.abs().max(x1.abs()), y0.abs().max(y1.abs())),
            Region::Disc { cx, cy, r } => libm::hypot(cx, cy) + r,
        }
    }

    /// Radial bound on `|fourier_indicator(t)|` at `|t| = rho`.
    fn kernel_bound(&self, rho: f64) -> f64 {
        match *self {
            Region::Interval { a, b } => (b - a).min(if rho > 0.0 { 2.0 / rho } else { f64::INFINITY }),
            Region::Box { .. } => self.measure(),
            Region::Disc { r, .. } => {
                // |J1(x)| ≤ min(x/2, 0.8/√x)
                let x = r * rho;
                if x <= 0.0 {
                    PI * r * r
                } else {
                    (PI * r * r).min(2.0 * PI * r * 0.8 / (libm::sqrt(x) * rho))
                }
            }
        }
    }
}

fn interval_kernel(t: f64, a: f64, b: f64) -> Complex64 {
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let amp = if (t * h).abs() < 1e-8 { 2.0 * h } else { 2.0 * libm::sin(t * h) / t };
    Complex64::new(libm::cos(t * m), -libm::sin(t * m)) * amp
}

/// Controls for the inversion integrals.
#[derive(Debug, Clone, Copy)]
pub struct InversionOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// First cutoff; the integration range doubles from here.
    pub initial_cutoff: f64,
    pub max_doublings: usize,
    /// Angular nodes on the half circle for planar transforms.
    pub angular_nodes: usize,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions { abs_tol: 1e-11, rel_tol: 1e-10, initial_cutoff: 4.0, max_doublings: 20, angular_nodes: 96 }
    }
}

/// Value of an inversion integral with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub value: f64,
    /// Imaginary part of the full-line integral; zero for a valid characteristic function.
    pub imag_residue: f64,
    pub cutoff: f64,
    pub error: f64,
}

const IMAG_RESIDUE_LIMIT: f64 = 1e-9;

/// `(2π)^{-d} ∫ φ(t) K(t) dt` for a kernel with `K(-t) = conj K(t)`.
fn invert(
    phi: &CharFn,
    kernel: &dyn Fn(Point) -> Complex64,
    kernel_bound: &dyn Fn(f64) -> f64,
    frequency: f64,
    opts: &InversionOptions,
) -> Result<Inversion> {
    let norm = if phi.dim == 1 { 1.0 / (2.0 * PI) } else { 1.0 / (4.0 * PI * PI) };
    let nodes = opts.angular_nodes.max(8);
    let angles: Vec<(f64, f64)> = (0..nodes)
        .map(|i| {
            let th = PI * (i as f64 + 0.5) / nodes as f64;
            (libm::cos(th), libm::sin(th))
        })
        .collect();
    let dtheta = PI / nodes as f64;
    let mut radial = |r: f64| -> [f64; 2] {
        let mut acc = Complex64::new(0.0, 0.0);
        if phi.dim == 1 {
            let t = [r, 0.0];
            let u = [-r, 0.0];
            acc += phi.eval(t) * kernel(t) + phi.eval(u) * kernel(u);
        } else {
            for &(c, s) in &angles {
                let t = [r * c, r * s];
                let u = [-t[0], -t[1]];
                acc += (phi.eval(t) * kernel(t) + phi.eval(u) * kernel(u)) * (r * dtheta);
            }
        }
        [acc.re * norm, acc.im * norm]
    };
    let tail = |cut: f64| -> Option<f64> {
        let b = phi.decay_bound.as_ref()?;
        let geom = if phi.dim == 1 { 2.0 } else { 2.0 * PI };
        let q = integrate_to_inf(
            |r| b(r) * kernel_bound(r) * if phi.dim == 1 { 1.0 } else { r },
            cut,
            QuadOptions { abs_tol: 1e-16, rel_tol: 1e-6, max_panels: 2000 },
        );
        Some(q.value[0] * geom * norm)
    };
    let quad = QuadOptions { abs_tol: opts.abs_tol * 0.1, rel_tol: opts.rel_tol * 0.1, max_panels: 4000 };
    let mut cut = opts.initial_cutoff;
    // one initial panel per half oscillation of the kernel
    let mut over = |lo: f64, hi: f64| {
        let pieces = libm::ceil((hi - lo) * frequency / PI).clamp(1.0, 1e6) as usize;
        let breaks: Vec<f64> = (0..=pieces).map(|i| lo + (hi - lo) * i as f64 / pieces as f64).collect();
        integrate_panels(&mut radial, &breaks, QuadOptions { max_panels: quad.max_panels + 4 * pieces, ..quad })
    };
    let first = over(0.0, cut);
    let mut re = first.value[0];
    let mut im = first.value[1];
    let mut err = first.error;
    let mut small_annuli = 0;
    let mut last = f64::INFINITY;
    for _ in 0..=opts.max_doublings {
        let tol = opts.abs_tol.max(opts.rel_tol * re.abs());
        if let Some(tb) = tail(cut) {
            if tb < 0.1 * tol {
                return finish(re, im, cut, err + tb);
            }
            last = tb;
        }
        if small_annuli >= 2 {
            return finish(re, im, cut, err);
        }
        let ann = over(cut, 2.0 * cut);
        re += ann.value[0];
        im += ann.value[1];
        err += ann.error;
        if ann.value[0].abs().max(ann.value[1].abs()) < tol {
            small_annuli += 1;
        } else {
            small_annuli = 0;
            last = ann.value[0].abs();
        }
        cut *= 2.0;
    }
    if frequency == 0.0 {
        // without kernel oscillation the remaining tail is integrated on [cut, ∞)
        let q = integrate_vec(
            |s| {
                if s >= 1.0 {
                    return [0.0, 0.0];
                }
                let d = 1.0 - s;
                let v = radial(cut + s / d);
                [v[0] / (d * d), v[1] / (d * d)]
            },
            0.0,
            1.0,
            quad,
        );
        let tol = opts.abs_tol.max(opts.rel_tol * re.abs());
        if q.error <= tol && q.value.iter().all(|v| v.is_finite()) {
            return finish(re + q.value[0], im + q.value[1], f64::INFINITY, err + q.error);
        }
    }
    Err(Error::NotIntegrable(last))
}

fn finish(re: f64, im: f64, cutoff: f64, error: f64) -> Result<Inversion> {
    if !(re.is_finite() && im.is_finite()) {
        return Err(Error::NonFinite("Fourier inversion"));
    }
    if im.abs() > IMAG_RESIDUE_LIMIT {
        return Err(Error::CrossCheck(im));
    }
    Ok(Inversion { value: re, imag_residue: im, cutoff, error })
}

/// Density of the law of `phi` at `x`, with diagnostics.
pub fn density_at_detailed(phi: &CharFn, x: Point, opts: &InversionOptions) -> Result<Inversion> {
    let kernel = move |t: Point| {
        let ph = t[0] * x[0] + t[1] * x[1];
        Complex64::new(libm::cos(ph), -libm::sin(ph))
    };
    invert(phi, &kernel, &|_| 1.0, libm::hypot(x[0], x[1]), opts)
}

pub fn density_at(phi: &CharFn, x: Point) -> Result<f64> {
    Ok(density_at_detailed(phi, x, &InversionOptions::default())?.value)
}

/// `P[X ∈ B]` through the Fourier transform of the indicator of `B`.
pub fn interval_probability_detailed(phi: &CharFn, region: &Region, opts: &InversionOptions) -> Result<Inversion> {
    if region.dim() != phi.dim {
        return Err(Error::Precondition(format!("region of dimension {} for a law on R^{}", region.dim(), phi.dim)));
    }
    let region = region.validated()?;
    let kernel = move |t: Point| region.fourier_indicator(t);
    let bound = move |r: f64| region.kernel_bound(r);
    invert(phi, &kernel, &bound, region.frequency(), opts)
}

pub fn interval_probability(phi: &CharFn, region: &Region) -> Result<f64> {
    Ok(interval_probability_detailed(phi, region, &InversionOptions::default())?.value)
}

/// `|det Σ|⁻¹ P[X ∈ B]` from the rescaled characteristic function
/// `psi(s) = E e^{i⟨s, ΣX⟩}`, as `(2π)^{-d} ∫ psi(s) 1̂_B(Σ* s) ds`.
pub fn rescaled_probability(psi: &CharFn, region: &Region, sigma: &Mat2, opts: &InversionOptions) -> Result<Inversion> {
    if region.dim() != psi.dim {
        return Err(Error::Precondition(format!("region of dimension {} for a law on R^{}", region.dim(), psi.dim)));
    }
    let region = region.validated()?;
    let adj = if psi.dim == 1 { Mat2::diag(sigma.0[0][0], 0.0) } else { sigma.transpose() };
    let (big, small) = if psi.dim == 1 {
        (sigma.0[0][0].abs(), sigma.0[0][0].abs())
    } else {
        let n = sigma.norm();
        (n, if n > 0.0 { sigma.det().abs() / n } else { 0.0 })
    };
    if small == 0.0 {
        return Err(Error::Precondition("singular rescaling".into()));
    }
    let kernel = move |s: Point| region.fourier_indicator(adj.apply(s));
    let bound = move |r: f64| region.kernel_bound(small * r);
    invert(psi, &kernel, &bound, region.frequency() * big, opts)
}

/// `(1/2π) ∫ e^{-|t|^p} dt`, the density at 0 of the symmetric `p`-stable law.
pub fn stable_constant(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::Domain(format!("stable index {p} outside (0, 2]")));
    }
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-14, max_panels: 20_000 };
    let head = integrate(|t| libm::exp(-libm::pow(t, p)), 0.0, 1.0, opts);
    let tail = integrate_to_inf(|t| libm::exp(-libm::pow(t, p)), 1.0, opts);
    Ok((head.value[0] + tail.value[0]) / PI)
}
