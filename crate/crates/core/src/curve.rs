//! The auxiliary curve `E / K` of conductor `P2^3` and its Frobenius traces at
//! split primes.
//!
//! The model is read from a small text record: one line `a1 a2 a3 a4 a6`, each
//! coefficient written `a,b` for `a + b*phi`; `#` starts a comment. A record is
//! only accepted once the curve reproduces `a_89 = -6` at both primes above 89
//! and `a_q = q + 1 mod 4` at the first ten split primes.

use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use sha2::{Digest, Sha256};

use crate::modarith::{sqrt_mod, ModArith, WordModulus};
use crate::okring::{split_type, GoldenInt, SplitType};
use crate::primes;

/// The bundled record.
pub const BUNDLED_CURVE: &str = include_str!("../data/curve_p2_cubed.txt");

/// Split prime and the trace the curve must have at both primes above it.
pub const ANCHOR: (u64, i64) = (89, -6);

const CONGRUENCE_SAMPLES: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum CurveError {
    #[error("cannot read curve record: {0}")]
    Io(#[from] std::io::Error),
    #[error("curve record is empty")]
    Empty,
    #[error("curve record line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("singular model: discriminant is zero")]
    Singular,
    #[error("curve failed validation: {0}")]
    Validation(String),
    #[error("{q} is {kind} in Z[phi], expected an odd split prime")]
    NotSplit { q: u64, kind: SplitType },
    #[error("{q} is not prime")]
    NotPrime { q: u64 },
    #[error("bad reduction at the prime above {q} with sqrt(5) = {root}")]
    BadReduction { q: u64, root: u64 },
    #[error("{root} is not a square root of 5 mod {q}")]
    NotRootOfFive { q: u64, root: u64 },
}

/// Long Weierstrass model `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveOverK {
    pub a1: GoldenInt,
    pub a2: GoldenInt,
    pub a3: GoldenInt,
    pub a4: GoldenInt,
    pub a6: GoldenInt,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BInvariants {
    pub b2: GoldenInt,
    pub b4: GoldenInt,
    pub b6: GoldenInt,
    pub b8: GoldenInt,
}

impl CurveOverK {
    pub fn new(coeffs: [GoldenInt; 5], label: impl Into<String>) -> Self {
        let [a1, a2, a3, a4, a6] = coeffs;
        CurveOverK {
            a1,
            a2,
            a3,
            a4,
            a6,
            label: label.into(),
        }
    }

    /// The bundled curve, validated.
    pub fn bundled() -> Result<Self, CurveError> {
        parse_curve(BUNDLED_CURVE, "bundled")
    }

    pub fn coefficients(&self) -> [&GoldenInt; 5] {
        [&self.a1, &self.a2, &self.a3, &self.a4, &self.a6]
    }

    pub fn b_invariants(&self) -> BInvariants {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        let k = |n: i64| GoldenInt::from_int(n);
        let b2 = &(a1 * a1) + &(&k(4) * a2);
        let b4 = &(&k(2) * a4) + &(a1 * a3);
        let b6 = &(a3 * a3) + &(&k(4) * a6);
        let b8 = &(&(&(&(&(a1 * a1) * a6) + &(&(&k(4) * a2) * a6)) - &(&(a1 * a3) * a4))
            + &(&(a2 * a3) * a3))
            - &(a4 * a4);
        BInvariants { b2, b4, b6, b8 }
    }

    pub fn discriminant(&self) -> GoldenInt {
        let BInvariants { b2, b4, b6, b8 } = self.b_invariants();
        let k = |n: i64| GoldenInt::from_int(n);
        let t1 = -&(&(&b2 * &b2) * &b8);
        let t2 = &k(8) * &(&(&b4 * &b4) * &b4);
        let t3 = &k(27) * &(&b6 * &b6);
        let t4 = &k(9) * &(&(&b2 * &b4) * &b6);
        &(&(&t1 - &t2) - &t3) + &t4
    }

    /// The record line this curve serializes to.
    pub fn record(&self) -> String {
        self.coefficients()
            .iter()
            .map(|c| format!("{},{}", c.a, c.b))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// SHA-256 of [`record`](Self::record), hex encoded.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.record().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for CurveOverK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}, {}]", self.a1, self.a2, self.a3, self.a4, self.a6)
    }
}

fn parse_coefficient(token: &str, line: usize) -> Result<GoldenInt, CurveError> {
    let bad = |msg: String| CurveError::Parse { line, msg };
    let (a, b) = token
        .split_once(',')
        .ok_or_else(|| bad(format!("expected `a,b`, found `{token}`")))?;
    let a: BigInt = a.trim().parse().map_err(|_| bad(format!("bad integer `{a}`")))?;
    let b: BigInt = b.trim().parse().map_err(|_| bad(format!("bad integer `{b}`")))?;
    Ok(GoldenInt::new(a, b))
}

/// Parses and validates a curve record.
pub fn parse_curve(text: &str, label: &str) -> Result<CurveOverK, CurveError> {
    let mut found = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if found.is_some() {
            return Err(CurveError::Parse {
                line: idx + 1,
                msg: "more than one curve in record".into(),
            });
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(CurveError::Parse {
                line: idx + 1,
                msg: format!("expected 5 coefficients, found {}", tokens.len()),
            });
        }
        let mut coeffs = Vec::with_capacity(5);
        for t in tokens {
            coeffs.push(parse_coefficient(t, idx + 1)?);
        }
        let coeffs: [GoldenInt; 5] = coeffs.try_into().expect("five coefficients");
        found = Some(CurveOverK::new(coeffs, label));
    }
    let curve = found.ok_or(CurveError::Empty)?;
    validate(&curve)?;
    Ok(curve)
}

/// Reads and validates a curve record from disk.
pub fn load_curve(path: &Path) -> Result<CurveOverK, CurveError> {
    let text = std::fs::read_to_string(path)?;
    parse_curve(&text, &path.display().to_string())
}

fn validate(curve: &CurveOverK) -> Result<(), CurveError> {
    let disc = curve.discriminant();
    if disc.is_zero() {
        return Err(CurveError::Singular);
    }
    let mut norm = disc.norm().abs();
    while norm.is_even() {
        norm >>= 1;
    }
    if !norm.is_one() {
        return Err(CurveError::Validation(format!(
            "discriminant {disc} has odd part in its norm"
        )));
    }
    let (q, expected) = ANCHOR;
    let pair = trace_pair(curve, q)?;
    if pair.traces != [expected, expected] {
        return Err(CurveError::Validation(format!(
            "traces at {q} are {:?}, expected [{expected}, {expected}]",
            pair.traces
        )));
    }
    for q in split_primes().take(CONGRUENCE_SAMPLES) {
        let pair = trace_pair(curve, q)?;
        if !pair.satisfies_congruence() {
            return Err(CurveError::Validation(format!(
                "traces {:?} at {q} are not q + 1 mod 4",
                pair.traces
            )));
        }
    }
    Ok(())
}

/// Odd primes `q = +-1 mod 5`, ascending.
pub fn split_primes() -> impl Iterator<Item = u64> {
    (3u64..).filter(|&q| split_type(q) == SplitType::Split && primes::is_prime(q))
}

/// `E` reduced modulo one prime above `q`; coefficients in `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedCurve {
    pub q: u64,
    pub a: [u64; 5],
}

impl ReducedCurve {
    /// Coefficients of `4x^3 + b2 x^2 + 2 b4 x + b6`, the cubic obtained by
    /// completing the square in `y`.
    fn cubic(&self) -> [u64; 4] {
        let m = WordModulus::new_unchecked(self.q);
        let [a1, a2, a3, a4, a6] = self.a;
        let add = |x: u64, y: u64| ((x as u128 + y as u128) % self.q as u128) as u64;
        let b2 = add(m.mul_mod(a1, a1), m.mul_mod(4, a2));
        let b4 = add(m.mul_mod(2, a4), m.mul_mod(a1, a3));
        let b6 = add(m.mul_mod(a3, a3), m.mul_mod(4, a6));
        [b6, m.mul_mod(2, b4), b2, 4 % self.q]
    }

    pub fn is_singular(&self) -> bool {
        let [c0, c1, c2, c3] = self.cubic();
        // discriminant of c3 x^3 + c2 x^2 + c1 x + c0
        let q = self.q as i128;
        let r = |x: u64| x as i128;
        let md = |x: i128| x.rem_euclid(q);
        let mul = |x: i128, y: i128| md(x * y);
        let (a, b, c, d) = (r(c3), r(c2), r(c1), r(c0));
        let t = [
            mul(mul(18, a), mul(b, mul(c, d))),
            -mul(4, mul(mul(b, b), mul(b, d))),
            mul(mul(b, b), mul(c, c)),
            -mul(4, mul(a, mul(c, mul(c, c)))),
            -mul(27, mul(mul(a, a), mul(d, d))),
        ];
        t.iter().fold(0, |acc, x| md(acc + x)) == 0
    }

    /// `a_q = q + 1 - #E(F_q)` from the quadratic character sum over `x`.
    pub fn trace(&self) -> i64 {
        let q = self.q;
        let m = WordModulus::new_unchecked(q);
        let mut square = vec![false; q as usize];
        for x in 1..=q / 2 {
            square[m.mul_mod(x, x) as usize] = true;
        }
        let [c0, c1, c2, c3] = self.cubic();
        let mut sum: i64 = 0;
        for x in 0..q {
            let mut f = c3;
            f = (m.mul_mod(f, x) + c2) % q;
            f = (m.mul_mod(f, x) + c1) % q;
            f = (m.mul_mod(f, x) + c0) % q;
            if f != 0 {
                sum += if square[f as usize] { 1 } else { -1 };
            }
        }
        let a = -sum;
        assert!(
            (a as i128) * (a as i128) <= 4 * q as i128,
            "Hasse bound violated at q = {q}: a = {a}"
        );
        a
    }

    pub fn count_points(&self) -> u64 {
        (self.q as i64 + 1 - self.trace()) as u64
    }
}

fn reduce_coeff(x: &GoldenInt, phi: u64, q: u64) -> u64 {
    let qb = BigInt::from(q);
    let a = x.a.mod_floor(&qb).to_u64().expect("< q");
    let b = x.b.mod_floor(&qb).to_u64().expect("< q");
    let m = WordModulus::new_unchecked(q);
    (a + m.mul_mod(b, phi)) % q
}

fn check_split(q: u64) -> Result<(), CurveError> {
    let kind = split_type(q);
    if kind != SplitType::Split || q == 2 {
        return Err(CurveError::NotSplit { q, kind });
    }
    if !primes::is_prime(q) {
        return Err(CurveError::NotPrime { q });
    }
    Ok(())
}

/// Reduces `E` at the prime above `q` where `sqrt 5 = root`, i.e.
/// `phi = (1 + root) / 2`.
pub fn reduce_at_split_prime(
    curve: &CurveOverK,
    q: u64,
    root: u64,
) -> Result<ReducedCurve, CurveError> {
    check_split(q)?;
    let m = WordModulus::new_unchecked(q);
    let root = root % q;
    if m.mul_mod(root, root) != 5 % q {
        return Err(CurveError::NotRootOfFive { q, root });
    }
    let half = q.div_ceil(2);
    let phi = m.mul_mod((1 + root) % q, half);
    let coeffs = curve.coefficients().map(|c| reduce_coeff(c, phi, q));
    let reduced = ReducedCurve { q, a: coeffs };
    if reduced.is_singular() {
        return Err(CurveError::BadReduction { q, root });
    }
    Ok(reduced)
}

/// Square roots of 5 mod a split prime `q`, smaller first.
pub fn roots_of_five(q: u64) -> Result<(u64, u64), CurveError> {
    check_split(q)?;
    let m = WordModulus::new_unchecked(q);
    let five = m.from_u64(5);
    let (r, s) = sqrt_mod(&m, &five).expect("5 is a square mod a split prime");
    Ok((r, s))
}

/// Frobenius traces at the two primes above a split `q`, ordered by the
/// square root of 5 used for the embedding (smaller first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TracePair {
    pub q: u64,
    pub traces: [i64; 2],
}

impl TracePair {
    /// The traces as a multiset, independent of embedding order.
    pub fn unordered(&self) -> [i64; 2] {
        let [x, y] = self.traces;
        [x.min(y), x.max(y)]
    }

    /// `a = q + 1 mod 4` for both traces.
    pub fn satisfies_congruence(&self) -> bool {
        self.traces
            .iter()
            .all(|&a| (a - (self.q as i64 + 1)).rem_euclid(4) == 0)
    }

    pub fn within_hasse(&self) -> bool {
        self.traces
            .iter()
            .all(|&a| (a as i128) * (a as i128) <= 4 * self.q as i128)
    }
}

impl fmt::Display for TracePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={} a=({}, {})", self.q, self.traces[0], self.traces[1])
    }
}

pub fn trace_pair(curve: &CurveOverK, q: u64) -> Result<TracePair, CurveError> {
    let (r, s) = roots_of_five(q)?;
    let t0 = reduce_at_split_prime(curve, q, r)?.trace();
    let t1 = reduce_at_split_prime(curve, q, s)?.trace();
    Ok(TracePair { q, traces: [t0, t1] })
}
