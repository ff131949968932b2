//! Primes, squarefree integers, Dedekind sums and related counting.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::limits::{self, Cap};
use crate::numerics::QuadOptions;
use crate::{Error, Result};

/// All primes `<= limit`, ascending (odd-only sieve).
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    if limit < 2 {
        return Err(Error::Precondition(format!("sieve limit {limit} < 2")));
    }
    limits::check(Cap::Sieve, limit)?;
    let half = ((limit - 1) / 2) as usize; // odd numbers 3,5,..., index i -> 2i+3
    let mut composite = vec![false; half];
    let mut i = 0usize;
    loop {
        let p = 2 * i as u64 + 3;
        if p * p > limit {
            break;
        }
        if !composite[i] {
            let mut j = ((p * p - 3) / 2) as usize;
            while j < half {
                composite[j] = true;
                j += p as usize;
            }
        }
        i += 1;
    }
    let mut out = Vec::with_capacity(estimate_pi(limit));
    out.push(2);
    out.extend(composite.iter().enumerate().filter(|(_, &c)| !c).map(|(i, _)| 2 * i as u64 + 3));
    Ok(out)
}

fn estimate_pi(x: u64) -> usize {
    let xf = x as f64;
    (1.3 * xf / libm::log(xf.max(3.0))) as usize + 8
}

/// 1 if no prime square divides `n`, else 0.
pub fn mobius_squared(n: u64) -> u8 {
    assert!(n >= 1, "mobius_squared requires n >= 1");
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return 0;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    1
}

/// Möbius function.
pub fn mobius(n: u64) -> i8 {
    assert!(n >= 1);
    let mut m = n;
    let mut sign = 1i8;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        sign = -sign;
    }
    sign
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

/// Exact rational in lowest terms with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i128,
    den: i128,
}

impl Rational {
    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        let g = gcd_i128(num, den).max(1);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = n.checked_neg().ok_or_else(|| Error::Overflow("rational sign".into()))?;
            d = d.checked_neg().ok_or_else(|| Error::Overflow("rational sign".into()))?;
        }
        Ok(Self { num: n, den: d })
    }

    pub fn integer(n: i128) -> Self {
        Self { num: n, den: 1 }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn checked_add(self, o: Self) -> Result<Self> {
        let ovf = || Error::Overflow("rational add".into());
        let g = gcd_i128(self.den, o.den);
        let l = (self.den / g).checked_mul(o.den).ok_or_else(ovf)?;
        let a = self.num.checked_mul(l / self.den).ok_or_else(ovf)?;
        let b = o.num.checked_mul(l / o.den).ok_or_else(ovf)?;
        Self::new(a.checked_add(b).ok_or_else(ovf)?, l)
    }

    pub fn checked_neg(self) -> Result<Self> {
        Ok(Self { num: self.num.checked_neg().ok_or_else(|| Error::Overflow("rational neg".into()))?, den: self.den })
    }

    pub fn checked_sub(self, o: Self) -> Result<Self> {
        self.checked_add(o.checked_neg()?)
    }

    pub fn checked_mul(self, o: Self) -> Result<Self> {
        let ovf = || Error::Overflow("rational mul".into());
        let g1 = gcd_i128(self.num, o.den).max(1);
        let g2 = gcd_i128(o.num, self.den).max(1);
        let n = (self.num / g1).checked_mul(o.num / g2).ok_or_else(ovf)?;
        let d = (self.den / g2).checked_mul(o.den / g1).ok_or_else(ovf)?;
        Self::new(n, d)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.num.checked_mul(other.den), other.num.checked_mul(self.den)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// A coprime pair with `0 < d < c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoprimePair {
    pub d: u64,
    pub c: u64,
}

fn check_pair(d: u64, c: u64) -> Result<()> {
    if d == 0 || d >= c || gcd(d, c) != 1 {
        return Err(Error::Precondition(format!("need 0 < d < c with gcd 1, got ({d}, {c})")));
    }
    Ok(())
}

/// 12c·s(d,c) as an exact integer, via reciprocity.
pub fn dedekind_sum_scaled(d: u64, c: u64) -> Result<i128> {
    check_pair(d, c)?;
    let mut chain: Vec<(i128, i128)> = Vec::new();
    let (mut d, mut c) = (d as i128, c as i128);
    while d != 1 {
        chain.push((d, c));
        let r = c % d;
        c = d;
        d = r;
    }
    let mut u = (c - 1) * (c - 2);
    while let Some((d, c)) = chain.pop() {
        let num = d * d + c * c + 1 - 3 * d * c - c * u;
        debug_assert_eq!(num % d, 0);
        u = num / d;
    }
    Ok(u)
}

/// Dedekind sum s(d,c) = Σ_{0<k<c} ((k/c))((kd/c)) in O(log c).
pub fn dedekind_sum(d: u64, c: u64) -> Result<Rational> {
    let u = dedekind_sum_scaled(d, c)?;
    Rational::new(u, 12 * c as i128)
}

/// Direct O(c) summation of the defining sum.
pub fn dedekind_sum_bruteforce(d: u64, c: u64) -> Result<Rational> {
    check_pair(d, c)?;
    limits::check(Cap::BruteForce, c)?;
    let (di, ci) = (d as i128, c as i128);
    let mut s: i128 = 0;
    for k in 1..ci {
        let r = (k * di) % ci;
        s += (2 * k - ci) * (2 * r - ci);
    }
    Rational::new(s, 4 * ci * ci)
}

/// Streams all `(d, c)` with `0 < d < c < n`, `gcd(d, c) = 1`, ordered by `c` then `d`.
#[derive(Debug, Clone)]
pub struct CoprimePairs {
    n: u64,
    c: u64,
    d: u64,
}

impl Iterator for CoprimePairs {
    type Item = CoprimePair;

    fn next(&mut self) -> Option<CoprimePair> {
        loop {
            self.d += 1;
            if self.d >= self.c {
                self.c += 1;
                self.d = 1;
            }
            if self.c >= self.n {
                return None;
            }
            if gcd(self.d, self.c) == 1 {
                return Some(CoprimePair { d: self.d, c: self.c });
            }
        }
    }
}

/// Pairs restricted to one denominator `c`.
pub fn coprime_pairs_with_denominator(c: u64) -> impl Iterator<Item = CoprimePair> {
    (1..c).filter(move |&d| gcd(d, c) == 1).map(move |d| CoprimePair { d, c })
}

/// Stream of the pairs together with their exact count Σ_{c=2}^{n-1} φ(c).
pub fn enumerate_coprime_pairs(n: u64) -> Result<(CoprimePairs, u64)> {
    if n < 3 {
        return Err(Error::Precondition(format!("coprime pairs need N >= 3, got {n}")));
    }
    limits::check(Cap::CoprimePairs, n)?;
    let count = totients(n - 1).iter().skip(2).sum();
    Ok((CoprimePairs { n, c: 2, d: 0 }, count))
}

/// φ(0..=n) by sieve (φ(0) = 0).
pub fn totients(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for i in 2..=n {
        if phi[i] == i as u64 {
            let mut j = i;
            while j <= n {
                phi[j] -= phi[j] / i as u64;
                j += i;
            }
        }
    }
    phi
}

fn prime_power_base(q: u64) -> Option<u64> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut m = q;
            while m % p == 0 {
                m /= p;
            }
            return if m == 1 { Some(p) } else { None };
        }
        p += 1;
    }
    Some(q)
}

/// Number of monic irreducible polynomials of degree `j` over 𝔽_q.
pub fn count_irreducible(q: u64, j: u32) -> Result<u64> {
    if prime_power_base(q).is_none() {
        return Err(Error::Precondition(format!("{q} is not a prime power")));
    }
    if j == 0 || j > 63 {
        return Err(Error::Precondition(format!("degree {j} outside 1..=63")));
    }
    let ovf = || Error::Overflow(format!("count_irreducible({q}, {j})"));
    let mut total: i128 = 0;
    for d in 1..=j {
        if j % d != 0 {
            continue;
        }
        let mu = mobius(d as u64) as i128;
        if mu == 0 {
            continue;
        }
        let pw = (q as i128).checked_pow(j / d).ok_or_else(ovf)?;
        total = total.checked_add(mu * pw).ok_or_else(ovf)?;
    }
    let v = total / j as i128;
    u64::try_from(v).map_err(|_| ovf())
}

/// Both sides of the prime-sum approximation and its error envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimeSumComparison {
    pub prime_sum: f64,
    pub integral: f64,
    pub discrepancy: f64,
    pub envelope: f64,
}

/// Compares Σ_{y≤p≤x} f(p) with ∫_y^x f(u) du / log u.
///
/// The envelope is x|f(x)|/log²x + y|f(y)|/log²y + ∫|f'(u)| u du/log²u.
pub fn prime_sum_vs_integral<F, D>(f: F, fprime: D, y: f64, x: f64) -> Result<PrimeSumComparison>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(y >= 2.0) || !(x > y) {
        return Err(Error::Precondition(format!("need 2 <= y < x, got y={y}, x={x}")));
    }
    let primes = sieve_primes(libm::floor(x) as u64)?;
    let mut sum = crate::numerics::NeumaierSum::new();
    for &p in primes.iter().filter(|&&p| p as f64 >= y) {
        sum.add(f(p as f64));
    }
    let (ly, lx) = (libm::log(y), libm::log(x));
    // substitute u = e^s
    let panels = 64;
    let breaks: Vec<f64> = (0..=panels).map(|i| ly + (lx - ly) * i as f64 / panels as f64).collect();
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-11, max_panels: 20_000 };
    let mut g = |s: f64| {
        let u = libm::exp(s);
        [f(u) * u / s, libm::fabs(fprime(u)) * u * u / (s * s)]
    };
    let q = crate::numerics::integrate_panels(&mut g, &breaks, opts);
    let integral = q.value[0];
    let envelope = x * libm::fabs(f(x)) / (lx * lx) + y * libm::fabs(f(y)) / (ly * ly) + q.value[1];
    let s = sum.value();
    Ok(PrimeSumComparison { prime_sum: s, integral, discrepancy: s - integral, envelope })
}
