use modphi::arith::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d).unwrap()
}

// Independent prime test by trial division.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

// Second sieve: plain Eratosthenes over all integers.
fn plain_sieve_count(n: usize) -> usize {
    let mut is = vec![true; n + 1];
    is[0] = false;
    is[1] = false;
    let mut i = 2;
    while i * i <= n {
        if is[i] {
            let mut j = i * i;
            while j <= n {
                is[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    is.iter().filter(|&&b| b).count()
}

#[test]
fn sieve_examples() {
    assert_eq!(sieve_primes(10).unwrap(), vec![2, 3, 5, 7]);
    assert_eq!(sieve_primes(2).unwrap(), vec![2]);
    let p = sieve_primes(1_000_000).unwrap();
    assert_eq!(p.len(), plain_sieve_count(1_000_000));
    assert_eq!(p.len(), 78498);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for _ in 0..500 {
        let n: u64 = rng.random_range(2..1_000_000);
        assert_eq!(p.binary_search(&n).is_ok(), is_prime(n), "{n}");
    }
    assert!(sieve_primes(1).is_err());
    assert!(matches!(sieve_primes(100_000_001), Err(modphi::Error::Capacity { .. })));
}

#[test]
fn sieve_strictly_increasing_and_prime() {
    let p = sieve_primes(200_000).unwrap();
    assert!(p.windows(2).all(|w| w[0] < w[1]));
    assert!(p.iter().all(|&q| is_prime(q)));
}

// Squarefree test by full factorization.
fn squarefree_by_factoring(mut n: u64) -> bool {
    let mut k = 2;
    while k <= n {
        let mut e = 0;
        while n % k == 0 {
            n /= k;
            e += 1;
        }
        if e >= 2 {
            return false;
        }
        k += 1;
    }
    true
}

#[test]
fn mobius_squared_examples() {
    assert_eq!(mobius_squared(1), 1);
    assert_eq!(mobius_squared(4), 0);
    assert_eq!(mobius_squared(6), 1);
    let bound = 5f64.exp();
    let mut a = 0.0;
    let mut b = 0.0;
    for k in 1..149u64 {
        assert!((k as f64) < bound);
        a += mobius_squared(k) as f64 / k as f64;
        if squarefree_by_factoring(k) {
            b += 1.0 / k as f64;
        }
    }
    assert_eq!(a, b);
    assert!((149f64) > bound);
}

#[test]
fn dedekind_examples() {
    assert_eq!(dedekind_sum(1, 2).unwrap(), r(0, 1));
    assert_eq!(dedekind_sum(1, 3).unwrap(), r(1, 18));
    assert_eq!(dedekind_sum(2, 3).unwrap(), r(-1, 18));
    assert_eq!(dedekind_sum_bruteforce(1, 3).unwrap(), r(1, 18));
    assert_eq!(dedekind_sum_bruteforce(1, 5).unwrap(), r(1, 5));
    assert_eq!(dedekind_sum_bruteforce(3, 7).unwrap(), dedekind_sum(3, 7).unwrap());
    assert!(dedekind_sum(2, 4).is_err());
    assert!(dedekind_sum(5, 5).is_err());
}

#[test]
fn dedekind_closed_form_s1c() {
    for c in 2..300u64 {
        let want = r(((c - 1) * (c - 2)) as i128, (12 * c) as i128);
        assert_eq!(dedekind_sum(1, c).unwrap(), want);
        assert_eq!(dedekind_sum_bruteforce(1, c).unwrap(), want);
    }
}

#[test]
fn dedekind_fast_matches_bruteforce_200_pairs() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 200 {
        let c: u64 = rng.random_range(2..=10_000);
        let d: u64 = rng.random_range(1..c);
        if gcd(d, c) != 1 {
            continue;
        }
        let fast = dedekind_sum(d, c).unwrap();
        assert_eq!(fast, dedekind_sum_bruteforce(d, c).unwrap(), "({d},{c})");
        // reciprocity against the reduced partner
        if d > 1 {
            let partner = dedekind_sum(c % d, d).unwrap();
            let lhs = fast.checked_add(partner).unwrap();
            let (di, ci) = (d as i128, c as i128);
            let rhs = r(di * di + ci * ci + 1, 12 * di * ci).checked_sub(r(1, 4)).unwrap();
            assert_eq!(lhs, rhs);
        }
        checked += 1;
    }
}

#[test]
fn dedekind_law_is_symmetric() {
    let n = 200;
    let (pairs, _) = enumerate_coprime_pairs(n).unwrap();
    let mut a: Vec<Rational> = Vec::new();
    let mut b: Vec<Rational> = Vec::new();
    for p in pairs {
        a.push(dedekind_sum(p.d, p.c).unwrap());
        b.push(dedekind_sum(p.c - p.d, p.c).unwrap().checked_neg().unwrap());
    }
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn coprime_pair_examples() {
    let (it, count) = enumerate_coprime_pairs(3).unwrap();
    let v: Vec<_> = it.collect();
    assert_eq!(v, vec![CoprimePair { d: 1, c: 2 }]);
    assert_eq!(count, 1);
    let (it, count) = enumerate_coprime_pairs(10).unwrap();
    let mut brute = 0;
    for c in 1..10u64 {
        for d in 1..c {
            if gcd(d, c) == 1 {
                brute += 1;
            }
        }
    }
    assert_eq!(brute, 27);
    assert_eq!(count, 27);
    assert_eq!(it.count(), 27);
    assert!(enumerate_coprime_pairs(2).is_err());
    assert!(enumerate_coprime_pairs(100_001).is_err());
}

#[test]
fn coprime_count_density_trend() {
    let ratio = |n: u64| {
        let (_, count) = enumerate_coprime_pairs(n).unwrap();
        count as f64 * std::f64::consts::PI.powi(2) / (3.0 * (n as f64).powi(2))
    };
    let (r3, r4) = (ratio(1000), ratio(10_000));
    assert!((r4 - 1.0).abs() < (r3 - 1.0).abs());
    assert!((r4 - 1.0).abs() < 1e-3);
    let (it, count) = enumerate_coprime_pairs(1000).unwrap();
    assert_eq!(it.count() as u64, count);
}

#[test]
fn irreducible_examples() {
    assert_eq!(count_irreducible(2, 1).unwrap(), 2);
    assert_eq!(count_irreducible(2, 2).unwrap(), 1);
    assert_eq!(count_irreducible(2, 3).unwrap(), 2);
    // enumeration over GF(2): bitmask polynomials, irreducible iff no factor of degree <= j/2
    for j in 1..=10u32 {
        let brute = (0..(1u64 << j)).filter(|&low| gf2_irreducible((1u64 << j) | low, j)).count() as u64;
        assert_eq!(count_irreducible(2, j).unwrap(), brute, "j={j}");
    }
    assert!(count_irreducible(6, 2).is_err());
    assert!(count_irreducible(2, 64).is_err());
    assert!(matches!(count_irreducible(3, 63), Err(modphi::Error::Overflow(_))));
}

fn gf2_mod(mut a: u64, b: u64) -> u64 {
    let db = 63 - b.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= db {
        a ^= b << (63 - a.leading_zeros() - db);
    }
    a
}

fn gf2_irreducible(f: u64, deg: u32) -> bool {
    for g in 2..(1u64 << (deg / 2 + 1)) {
        let dg = 63 - g.leading_zeros();
        if dg >= 1 && dg <= deg / 2 && gf2_mod(f, g) == 0 {
            return false;
        }
    }
    true
}

#[test]
fn necklace_identity() {
    for q in [2u64, 3, 4] {
        for j in 1..=12u32 {
            let mut s: u128 = 0;
            for d in 1..=j {
                if j % d == 0 {
                    s += d as u128 * count_irreducible(q, d).unwrap() as u128;
                }
            }
            assert_eq!(s, (q as u128).pow(j));
        }
    }
}

#[test]
fn prime_sum_examples() {
    let z = prime_sum_vs_integral(|_| 0.0, |_| 0.0, 100.0, 1000.0).unwrap();
    assert_eq!((z.prime_sum, z.integral, z.discrepancy), (0.0, 0.0, 0.0));
    let c = prime_sum_vs_integral(|u| 1.0 / u, |u| -1.0 / (u * u), 100.0, 1e6).unwrap();
    // Σ 1/p ≈ log log x - log log y; integral exact
    let exact = (1e6f64).ln().ln() - 100f64.ln().ln();
    assert!((c.integral - exact).abs() < 1e-10);
    assert!(c.discrepancy.abs() < c.envelope, "{c:?}");
    let x = 1e6f64;
    let t = 1.0;
    let lx = x.ln();
    let f = move |u: f64| (t * u.ln() / (2.0 * lx)).sin().powi(2) / u;
    let fp = move |u: f64| {
        let a = t * u.ln() / (2.0 * lx);
        -a.sin().powi(2) / (u * u) + t / (u * u * lx) * a.sin() * a.cos()
    };
    let s = prime_sum_vs_integral(f, fp, 100.0, x).unwrap();
    assert!(s.discrepancy.abs() < s.envelope, "{s:?}");
}

proptest! {
    #[test]
    fn rational_normalized(n in -1_000_000i128..1_000_000, d in 1i128..1_000_000) {
        let q = Rational::new(n, -d).unwrap();
        prop_assert!(q.den() > 0);
        let g = {
            let (mut a, mut b) = (q.num().abs(), q.den());
            while b != 0 { let t = a % b; a = b; b = t; }
            a
        };
        prop_assert!(g == 1 || q.num() == 0);
    }

    #[test]
    fn dedekind_reciprocity_random(c in 2u64..5000, seed in 0u64..1000) {
        let d = 1 + seed % (c - 1);
        prop_assume!(gcd(d, c) == 1);
        prop_assert_eq!(dedekind_sum(d, c).unwrap(), dedekind_sum_bruteforce(d, c).unwrap());
    }
}
