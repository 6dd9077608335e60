//! Primality testing, prime enumeration and factorization.
//!
//! Below 2^64 Miller–Rabin runs on a fixed base set that is known to be
//! deterministic; above it the test is probabilistic and callers receive
//! [`PrimalityMode::Probable`] so certificates can say so.

use std::fmt;

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Bases that make Miller–Rabin exact for every n < 3.3 * 10^24.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Random-base rounds above 2^64; 4^-65 < 2^-128.
const BIG_MR_ROUNDS: usize = 65;

/// Default sieve segment, in numbers.
pub const DEFAULT_SEGMENT: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimalityMode {
    Deterministic,
    Probable,
}

impl PrimalityMode {
    /// The weaker of two modes: one probable input makes the whole claim probable.
    pub fn combine(self, other: PrimalityMode) -> PrimalityMode {
        self.max(other)
    }
}

impl fmt::Display for PrimalityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimalityMode::Deterministic => "deterministic",
            PrimalityMode::Probable => "probable",
        })
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic primality for any `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn miller_rabin_round(n: &BigUint, n_minus_one: &BigUint, d: &BigUint, s: u64, a: &BigUint) -> bool {
    let mut x = a.modpow(d, n);
    if x.is_one() || &x == n_minus_one {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if &x == n_minus_one {
            return true;
        }
    }
    false
}

/// Primality of an arbitrary integer: `None` if composite, otherwise how the
/// answer was obtained. Random bases are drawn from a ChaCha stream seeded by
/// `n` itself, so repeated calls agree.
pub fn is_prime_big(n: &BigUint) -> Option<PrimalityMode> {
    if let Some(w) = n.to_u64() {
        return is_prime(w).then_some(PrimalityMode::Deterministic);
    }
    for p in small_primes() {
        if (n % p).is_zero() {
            return None;
        }
    }
    let n_minus_one = n - 1u32;
    let s = n_minus_one.trailing_zeros().expect("n > 1");
    let d = &n_minus_one >> s;
    for &a in &MR_BASES {
        if !miller_rabin_round(n, &n_minus_one, &d, s, &BigUint::from(a)) {
            return None;
        }
    }
    let mut seed = [0u8; 32];
    for (slot, byte) in seed.iter_mut().zip(n.to_bytes_le()) {
        *slot = byte;
    }
    let mut rng = ChaCha20Rng::from_seed(seed);
    let two = BigUint::from(2u32);
    for _ in 0..BIG_MR_ROUNDS {
        let a = rng.gen_biguint_range(&two, &n_minus_one);
        if !miller_rabin_round(n, &n_minus_one, &d, s, &a) {
            return None;
        }
    }
    Some(PrimalityMode::Probable)
}

fn small_primes() -> impl Iterator<Item = u32> {
    const SMALL: [u32; 25] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    ];
    SMALL.into_iter()
}

/// Plain sieve of Eratosthenes up to and including `limit`.
pub fn sieve_upto(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Primes in `[lo, hi)`, ascending, sieved one segment at a time.
#[derive(Debug, Clone)]
pub struct PrimesInRange {
    base: Vec<u64>,
    segment_len: u64,
    seg_lo: u64,
    hi: u64,
    buf: Vec<u64>,
    pos: usize,
}

impl PrimesInRange {
    pub fn new(lo: u64, hi: u64) -> Self {
        Self::with_segment(lo, hi, DEFAULT_SEGMENT)
    }

    pub fn with_segment(lo: u64, hi: u64, segment_len: usize) -> Self {
        assert!(lo <= hi, "empty or reversed range [{lo}, {hi})");
        let root = (hi as f64).sqrt() as u64 + 1;
        PrimesInRange {
            base: sieve_upto(root),
            segment_len: segment_len.max(64) as u64,
            seg_lo: lo.max(2),
            hi,
            buf: Vec::new(),
            pos: 0,
        }
    }

    fn fill(&mut self) {
        self.buf.clear();
        self.pos = 0;
        while self.buf.is_empty() && self.seg_lo < self.hi {
            let lo = self.seg_lo;
            let hi = lo.saturating_add(self.segment_len).min(self.hi);
            let mut composite = vec![false; (hi - lo) as usize];
            for &p in &self.base {
                if p.saturating_mul(p) >= hi {
                    break;
                }
                let mut start = (lo.div_ceil(p) * p).max(p * p);
                while start < hi {
                    composite[(start - lo) as usize] = true;
                    start += p;
                }
            }
            self.buf.extend(
                composite
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| !c)
                    .map(|(i, _)| lo + i as u64),
            );
            self.seg_lo = hi;
        }
    }
}

impl Iterator for PrimesInRange {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.pos >= self.buf.len() {
            self.fill();
            if self.buf.is_empty() {
                return None;
            }
        }
        let p = self.buf[self.pos];
        self.pos += 1;
        Some(p)
    }
}

pub fn primes_in_range(lo: u64, hi: u64) -> PrimesInRange {
    PrimesInRange::new(lo, hi)
}

/// Prime factorization `[(prime, exponent)]`, sorted by prime.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization(Vec<(BigUint, u32)>);

impl Factorization {
    pub fn from_pairs(mut pairs: Vec<(BigUint, u32)>) -> Self {
        pairs.sort();
        let mut merged: Vec<(BigUint, u32)> = Vec::with_capacity(pairs.len());
        for (p, e) in pairs {
            match merged.last_mut() {
                Some((last, exp)) if *last == p => *exp += e,
                _ => merged.push((p, e)),
            }
        }
        Factorization(merged)
    }

    pub fn pairs(&self) -> &[(BigUint, u32)] {
        &self.0
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.0.iter().map(|(p, _)| p)
    }

    /// The product of all prime powers.
    pub fn value(&self) -> BigUint {
        self.0
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, (p, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            if *e == 1 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{p}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FactorError {
    #[error("cannot factor zero")]
    Zero,
    #[error("cofactor {0} resisted factoring")]
    Resistant(BigUint),
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Brent's variant of Pollard rho on a composite odd `n`.
fn pollard_rho(n: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    for c in 1..64u64 {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, mut r, mut q, m) = (2u64, 1u64, 1u64, 128u64);
        let (mut g, mut x, mut ys) = (1u64, 0u64, 0u64);
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd_u64(q, n);
                k += m;
            }
            r *= 2;
            if r > 1 << 26 {
                break;
            }
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd_u64(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n && g != 1 {
            return Some(g);
        }
    }
    None
}

fn factor_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n).expect("rho splits every composite u64");
    factor_into(d, out);
    factor_into(n / d, out);
}

/// Complete factorization of a nonzero `u64` as sorted `(prime, exponent)` pairs.
pub fn factorize_u64(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n > 0, "cannot factor zero");
    let mut raw = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        while n % p == 0 {
            raw.push(p);
            n /= p;
        }
    }
    factor_into(n, &mut raw);
    raw.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in raw {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// Trial-division bound for cofactors above 2^64.
const TRIAL_LIMIT: u64 = 1 << 20;

/// Sign and complete factorization of a nonzero integer.
///
/// Word-sized cofactors always split. Larger ones are trial-divided up to
/// 2^20; a remaining cofactor that is not a probable prime yields
/// [`FactorError::Resistant`].
pub fn factorize(m: &BigInt) -> Result<(Sign, Factorization), FactorError> {
    if m.is_zero() {
        return Err(FactorError::Zero);
    }
    let sign = m.sign();
    let mut rest = m.abs().to_biguint().expect("absolute value");
    let mut pairs: Vec<(BigUint, u32)> = Vec::new();
    if rest.to_u64().is_none() {
        for p in sieve_upto(TRIAL_LIMIT) {
            let mut e = 0;
            while (&rest % p).is_zero() {
                rest /= p;
                e += 1;
            }
            if e > 0 {
                pairs.push((BigUint::from(p), e));
            }
            if rest.to_u64().is_some() {
                break;
            }
        }
    }
    match rest.to_u64() {
        Some(w) => pairs.extend(
            factorize_u64(w)
                .into_iter()
                .map(|(p, e)| (BigUint::from(p), e)),
        ),
        None => {
            if is_prime_big(&rest).is_none() {
                return Err(FactorError::Resistant(rest));
            }
            pairs.push((rest, 1));
        }
    }
    let fac = Factorization::from_pairs(pairs);
    debug_assert_eq!(BigInt::from_biguint(Sign::Plus, fac.value()), m.abs());
    Ok((sign, fac))
}

/// True when `d` divides `m` (both nonzero), without factoring.
pub fn divides(d: &BigUint, m: &BigInt) -> bool {
    (m.abs().to_biguint().expect("abs") % d).is_zero()
}

/// Integer square root floor for `u64`.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}
