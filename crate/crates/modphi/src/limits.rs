//! Process-wide enumeration caps.
//!
//! Every cap can be raised at runtime; the CLI scales them from the
//! `MODPHI_CAPACITY` environment variable.

use core::sync::atomic::{AtomicU64, Ordering};

use crate::{Error, Result};

static SIEVE: AtomicU64 = AtomicU64::new(100_000_000);
static PAIRS: AtomicU64 = AtomicU64::new(100_000);
static BRUTE: AtomicU64 = AtomicU64::new(100_000);
static DEDEKIND_N: AtomicU64 = AtomicU64::new(10_000);
static PRIME_MODEL: AtomicU64 = AtomicU64::new(100_000);
static MATRIX: AtomicU64 = AtomicU64::new(512);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cap {
    Sieve,
    CoprimePairs,
    BruteForce,
    DedekindN,
    PrimeModel,
    Matrix,
}

fn slot(c: Cap) -> &'static AtomicU64 {
    match c {
        Cap::Sieve => &SIEVE,
        Cap::CoprimePairs => &PAIRS,
        Cap::BruteForce => &BRUTE,
        Cap::DedekindN => &DEDEKIND_N,
        Cap::PrimeModel => &PRIME_MODEL,
        Cap::Matrix => &MATRIX,
    }
}

pub fn get(c: Cap) -> u64 {
    slot(c).load(Ordering::Relaxed)
}

pub fn set(c: Cap, v: u64) {
    slot(c).store(v, Ordering::Relaxed);
}

/// Multiply every cap by `factor` (values below 1 are ignored).
pub fn scale_all(factor: f64) {
    if !(factor > 1.0) {
        return;
    }
    for c in [
        Cap::Sieve,
        Cap::CoprimePairs,
        Cap::BruteForce,
        Cap::DedekindN,
        Cap::PrimeModel,
        Cap::Matrix,
    ] {
        let v = get(c) as f64 * factor;
        set(c, if v >= u64::MAX as f64 { u64::MAX } else { v as u64 });
    }
}

pub fn check(c: Cap, requested: u64) -> Result<()> {
    let limit = get(c);
    if requested > limit {
        Err(Error::Capacity { requested, limit })
    } else {
        Ok(())
    }
}
