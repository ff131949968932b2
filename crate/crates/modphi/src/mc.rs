//! Reproducible block-parallel Monte Carlo.
//!
//! Draws are grouped in blocks of [`BLOCK`] samples. Block `b` uses the
//! ChaCha8 stream `b` of the run seed, and block results are merged in
//! index order, so estimates are bit-identical for any worker count.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use once_cell::race::OnceBox;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub const BLOCK: u64 = 4096;

/// One weighted draw. Unweighted samplers set `w = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: [f64; 2],
    pub w: f64,
}

impl Sample {
    pub fn scalar(x: f64) -> Self {
        Sample { x: [x, 0.0], w: 1.0 }
    }
    pub fn plane(x: [f64; 2]) -> Self {
        Sample { x, w: 1.0 }
    }
}

pub type Sampler = Arc<dyn Fn(&mut ChaCha8Rng) -> Sample + Send + Sync>;

/// Runs `tasks` independent jobs, each exactly once.
pub trait Executor: Sync {
    fn workers(&self) -> usize;
    fn run(&self, tasks: usize, job: &(dyn Fn(usize) + Sync));
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn workers(&self) -> usize {
        1
    }
    fn run(&self, tasks: usize, job: &(dyn Fn(usize) + Sync)) {
        for i in 0..tasks {
            job(i);
        }
    }
}

/// Scoped OS threads pulling task indices from a shared counter.
#[cfg(feature = "std")]
#[derive(Debug, Clone, Copy)]
pub struct ThreadPool {
    workers: usize,
}

#[cfg(feature = "std")]
impl ThreadPool {
    pub fn new(workers: usize) -> Self {
        ThreadPool { workers: workers.max(1) }
    }
}

#[cfg(feature = "std")]
impl Executor for ThreadPool {
    fn workers(&self) -> usize {
        self.workers
    }
    fn run(&self, tasks: usize, job: &(dyn Fn(usize) + Sync)) {
        use core::sync::atomic::{AtomicUsize, Ordering};
        if self.workers == 1 || tasks <= 1 {
            return Sequential.run(tasks, job);
        }
        let next = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for _ in 0..self.workers.min(tasks) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= tasks {
                        break;
                    }
                    job(i);
                });
            }
        });
    }
}

/// `f(i)` for `i < tasks`, collected in index order.
pub fn map_tasks<R: Clone + Send + Sync>(exec: &dyn Executor, tasks: usize, f: impl Fn(usize) -> R + Sync) -> Vec<R> {
    let slots: Vec<OnceBox<R>> = (0..tasks).map(|_| OnceBox::new()).collect();
    exec.run(tasks, &|i| {
        let _ = slots[i].set(Box::new(f(i)));
    });
    slots
        .iter()
        .map(|s| s.get().expect("executor skipped a task").clone())
        .collect()
}

/// Generator for block `block` of a run seeded by `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Per-feature weighted sums over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl Moments {
    pub fn mean(&self, k: usize) -> f64 {
        self.sum[k] / self.count as f64
    }

    /// Standard error of `mean(k)` with the plug-in variance.
    pub fn stderr(&self, k: usize) -> f64 {
        let n = self.count as f64;
        let m = self.mean(k);
        libm::sqrt((self.sum_sq[k] / n - m * m).max(0.0) / n)
    }
}

/// Accumulates `features(sample, out)` over `samples` draws.
pub fn moments(
    exec: &dyn Executor,
    sampler: &Sampler,
    samples: u64,
    seed: u64,
    nfeat: usize,
    features: impl Fn(&Sample, &mut [f64]) + Sync,
) -> Result<Moments> {
    if samples == 0 {
        return Err(Error::Precondition("at least one sample required".into()));
    }
    let blocks = samples.div_ceil(BLOCK);
    let parts = map_tasks(exec, blocks as usize, |b| {
        let mut rng = block_rng(seed, b as u64);
        let len = BLOCK.min(samples - b as u64 * BLOCK);
        let mut s = vec![0.0; nfeat];
        let mut q = vec![0.0; nfeat];
        let mut buf = vec![0.0; nfeat];
        for _ in 0..len {
            let draw = sampler(&mut rng);
            features(&draw, &mut buf);
            for k in 0..nfeat {
                s[k] += buf[k];
                q[k] += buf[k] * buf[k];
            }
        }
        (s, q)
    });
    let mut m = Moments { count: samples, sum: vec![0.0; nfeat], sum_sq: vec![0.0; nfeat] };
    for (s, q) in parts {
        for k in 0..nfeat {
            m.sum[k] += s[k];
            m.sum_sq[k] += q[k];
        }
    }
    if m.sum.iter().chain(&m.sum_sq).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("Monte Carlo accumulation"));
    }
    Ok(m)
}

/// Weighted hit frequency of `inside` with its standard error, plus the
/// effective sample size `(Σw)²/Σw²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitEstimate {
    pub p: f64,
    pub stderr: f64,
    pub weight_mean: f64,
    pub effective_samples: f64,
}

pub fn hit_probability(
    exec: &dyn Executor,
    sampler: &Sampler,
    samples: u64,
    seed: u64,
    inside: impl Fn(&[f64; 2]) -> bool + Sync,
) -> Result<HitEstimate> {
    let m = moments(exec, sampler, samples, seed, 2, |s, out| {
        out[0] = if inside(&s.x) { s.w } else { 0.0 };
        out[1] = s.w;
    })?;
    let ess = if m.sum_sq[1] > 0.0 { m.sum[1] * m.sum[1] / m.sum_sq[1] } else { 0.0 };
    Ok(HitEstimate { p: m.mean(0), stderr: m.stderr(0), weight_mean: m.mean(1), effective_samples: ess })
}

/// Empirical characteristic function `E[w e^{i⟨t,x⟩}]` with per-component
/// standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharEstimate {
    pub t: [f64; 2],
    pub value: Complex64,
    pub stderr_re: f64,
    pub stderr_im: f64,
}

impl CharEstimate {
    /// Distance to `target` in units of the larger component standard error.
    pub fn sigmas_from(&self, target: Complex64) -> f64 {
        let s = self.stderr_re.max(self.stderr_im).max(f64::MIN_POSITIVE);
        (self.value - target).norm() / s
    }
}

pub fn empirical_charfn(
    exec: &dyn Executor,
    sampler: &Sampler,
    ts: &[[f64; 2]],
    samples: u64,
    seed: u64,
) -> Result<Vec<CharEstimate>> {
    let k = ts.len();
    let m = moments(exec, sampler, samples, seed, 2 * k, |s, out| {
        for (j, t) in ts.iter().enumerate() {
            let ph = t[0] * s.x[0] + t[1] * s.x[1];
            let (sn, cs) = libm::sincos(ph);
            out[2 * j] = s.w * cs;
            out[2 * j + 1] = s.w * sn;
        }
    })?;
    Ok(ts
        .iter()
        .enumerate()
        .map(|(j, &t)| CharEstimate {
            t,
            value: Complex64::new(m.mean(2 * j), m.mean(2 * j + 1)),
            stderr_re: m.stderr(2 * j),
            stderr_im: m.stderr(2 * j + 1),
        })
        .collect())
}
