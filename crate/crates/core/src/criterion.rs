//! Deciding an exponent: the witness search, the two shortcut criteria, the
//! exceptional pairs, and certificates that can be re-checked from their
//! fields alone.

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::curve::{self, CurveError, CurveOverK, TracePair};
use crate::modarith::{PrimeModulus, WordModulus};
use crate::okring::{split_type_big, SplitType};
use crate::primes::{self, PrimalityMode};
use crate::wendt::{self, WendtError};

/// `(p, n)` settled through the auxiliary curve rather than the witness search.
pub const EXCEPTIONAL_TABLE: [(u64, u64); 8] = [
    (11, 8),
    (23, 20),
    (53, 20),
    (59, 20),
    (67, 4),
    (79, 100),
    (83, 56),
    (127, 4),
];

pub fn exceptional_n(p: u64) -> Option<u64> {
    EXCEPTIONAL_TABLE
        .iter()
        .find(|&&(ep, _)| ep == p)
        .map(|&(_, n)| n)
}

#[derive(Debug, thiserror::Error)]
pub enum CriterionError {
    #[error("p = 3 is not covered: (9+sqrt 5)^3 + (9-sqrt 5)^3 = 12^3 is a solution over Q(sqrt 5)")]
    ExponentThree,
    #[error("exponent {0} must be a prime >= 5")]
    BadExponent(BigUint),
    #[error("n = {0} must be even and positive")]
    OddWitness(u64),
    #[error("q = {0} is too large for point counting")]
    TraceModulusTooLarge(BigUint),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Wendt(#[from] WendtError),
}

/// Checks that `p` is a prime exponent `>= 5` and reports how primality was established.
pub fn check_exponent(p: &BigUint) -> Result<PrimalityMode, CriterionError> {
    if *p == BigUint::from(3u32) {
        return Err(CriterionError::ExponentThree);
    }
    if *p < BigUint::from(5u32) {
        return Err(CriterionError::BadExponent(p.clone()));
    }
    primes::is_prime_big(p).ok_or_else(|| CriterionError::BadExponent(p.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Theorem,
    Corollary2a,
    Corollary2b,
    Exceptional,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Theorem => "theorem",
            Method::Corollary2a => "corollary2a",
            Method::Corollary2b => "corollary2b",
            Method::Exceptional => "exceptional",
        })
    }
}

/// Integers that fit in `u64` are written as JSON numbers, larger ones as strings.
mod num_or_string {
    use num_bigint::BigUint;
    use num_traits::ToPrimitive;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        match v.to_u64() {
            Some(w) => s.serialize_u64(w),
            None => s.serialize_str(&v.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(u64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(w) => Ok(BigUint::from(w)),
            Raw::Str(s) => s.parse().map_err(de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    #[serde(with = "num_or_string")]
    pub p: BigUint,
    pub n: u64,
    #[serde(with = "num_or_string")]
    pub q: BigUint,
    pub method: Method,
    pub primality_mode: PrimalityMode,
}

impl fmt::Display for WitnessCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} n={} q={} method={}", self.p, self.n, self.q, self.method)?;
        if self.primality_mode == PrimalityMode::Probable {
            f.write_str(" primality=probable")?;
        }
        Ok(())
    }
}

/// The first theorem condition that fails for a candidate `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    NotTwoModFour,
    TooLarge,
    QComposite,
    QNotSplit,
    QDividesWendt,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::NotTwoModFour => "n is not 2 mod 4",
            Violation::TooLarge => "n >= p - 2",
            Violation::QComposite => "np+1 is not prime",
            Violation::QNotSplit => "np+1 is not +-1 mod 5",
            Violation::QDividesWendt => "np+1 divides W_n",
        })
    }
}

fn q_is_split(q: &BigUint) -> bool {
    split_type_big(q) == SplitType::Split
}

/// Whether `q | W_n`, for a prime `q = 1 mod n`.
fn q_divides_wendt(q: &BigUint, n: u64) -> Result<bool, WendtError> {
    let m = PrimeModulus::from_prime_unchecked(q.clone());
    wendt::divides_wendt(&m, n)
}

/// Evaluates the theorem's conditions for `(p, n)` in order. On success the
/// returned mode covers the primality of `q`.
pub fn theorem_conditions(p: &BigUint, n: u64) -> Result<Result<PrimalityMode, Violation>, WendtError> {
    if n % 4 != 2 {
        return Ok(Err(Violation::NotTwoModFour));
    }
    if BigUint::from(n) + 2u32 >= *p {
        return Ok(Err(Violation::TooLarge));
    }
    let q = p * n + 1u32;
    let Some(mode) = primes::is_prime_big(&q) else {
        return Ok(Err(Violation::QComposite));
    };
    if !q_is_split(&q) {
        return Ok(Err(Violation::QNotSplit));
    }
    if q_divides_wendt(&q, n)? {
        return Ok(Err(Violation::QDividesWendt));
    }
    Ok(Ok(mode))
}

/// Cheap word-sized check of one candidate; `None` when `q` overflows `u64`.
fn word_candidate(p: u64, n: u64) -> Option<bool> {
    let q = p.checked_mul(n)?.checked_add(1)?;
    if !matches!(q % 5, 1 | 4) || !primes::is_prime(q) {
        return Some(false);
    }
    let m = WordModulus::new_unchecked(q);
    Some(!wendt::divides_wendt_in(&m, n).expect("n divides q - 1"))
}

/// Smallest `n = 2 mod 4` with `n < min(p - 2, n_max)` meeting the theorem's
/// conditions. `p` must be a prime `>= 5`.
pub fn theorem_witness(p: &BigUint, n_max: Option<u64>) -> Option<u64> {
    let cap = match (p - 2u32).to_u64() {
        Some(bound) => n_max.map_or(bound, |m| m.min(bound)),
        None => n_max.unwrap_or(u64::MAX),
    };
    let word = p.to_u64();
    let mut n = 2u64;
    while n < cap {
        // W_n = 0 when 6 | n
        if n % 3 != 0 {
            let ok = match word.and_then(|w| word_candidate(w, n)) {
                Some(ok) => ok,
                None => matches!(theorem_conditions(p, n), Ok(Ok(_))),
            };
            if ok {
                return Some(n);
            }
        }
        n = match n.checked_add(4) {
            Some(next) => next,
            None => break,
        };
    }
    None
}

/// Corollary 2: `p = 4 mod 5` with `2p + 1` prime, or `10p + 1` prime.
pub fn corollary2_check(p: &BigUint) -> Option<(Method, u64, PrimalityMode)> {
    if (p % 5u32).to_u64() == Some(4) {
        if let Some(mode) = primes::is_prime_big(&(p * 2u32 + 1u32)) {
            return Some((Method::Corollary2a, 2, mode));
        }
    }
    let q = p * 10u32 + 1u32;
    if let Some(mode) = primes::is_prime_big(&q) {
        // W_10 = -3 * 11^9 * 31^3 and q > 31
        debug_assert!(!q_divides_wendt(&q, 10).expect("10 | q - 1"));
        return Some((Method::Corollary2b, 10, mode));
    }
    None
}

/// What [`exceptional_check`] found for a pair `(p, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionalEvidence {
    pub p: u64,
    pub n: u64,
    pub q: u64,
    pub q_prime: bool,
    pub q_split: bool,
    /// `None` when `q` is not a prime split in `Z[phi]`.
    pub q_divides_wendt: Option<bool>,
    pub traces: Option<TracePair>,
    /// Both traces avoid `+-2 mod p`.
    pub traces_excluded: bool,
}

impl ExceptionalEvidence {
    pub fn holds(&self) -> bool {
        self.q_prime && self.q_split && self.q_divides_wendt == Some(false) && self.traces_excluded
    }
}

impl fmt::Display for ExceptionalEvidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={} n={} q={}", self.p, self.n, self.q)?;
        if !self.q_prime {
            return f.write_str(" q composite");
        }
        if !self.q_split {
            return f.write_str(" q not split");
        }
        if let Some(d) = self.q_divides_wendt {
            write!(f, " q|W_n={d}")?;
        }
        if let Some(t) = self.traces {
            let [a, b] = t.traces;
            let p = self.p as i64;
            write!(f, " a=({a}, {b}) a mod p=({}, {})", a.rem_euclid(p), b.rem_euclid(p))?;
        }
        write!(f, " holds={}", self.holds())
    }
}

/// The exceptional criterion for an even `n`: `q = np + 1` a split prime not
/// dividing `W_n`, and no trace of the auxiliary curve above `q` congruent to
/// `+-2 mod p`.
pub fn exceptional_check(p: u64, n: u64, curve: &CurveOverK) -> Result<ExceptionalEvidence, CriterionError> {
    if n == 0 || n % 2 == 1 {
        return Err(CriterionError::OddWitness(n));
    }
    let q = p
        .checked_mul(n)
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| CriterionError::TraceModulusTooLarge(BigUint::from(p) * n + 1u32))?;
    let mut ev = ExceptionalEvidence {
        p,
        n,
        q,
        q_prime: primes::is_prime(q),
        q_split: matches!(q % 5, 1 | 4),
        q_divides_wendt: None,
        traces: None,
        traces_excluded: false,
    };
    if !ev.q_prime || !ev.q_split {
        return Ok(ev);
    }
    ev.q_divides_wendt = Some(wendt::divides_wendt_in(&WordModulus::new_unchecked(q), n)?);
    let pair = curve::trace_pair(curve, q)?;
    let pi = p as i64;
    let plus = 2i64.rem_euclid(pi);
    let minus = (-2i64).rem_euclid(pi);
    ev.traces_excluded = pair
        .traces
        .iter()
        .all(|a| a.rem_euclid(pi) != plus && a.rem_euclid(pi) != minus);
    ev.traces = Some(pair);
    Ok(ev)
}

/// Order in which [`decide_with`] tries the three routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precedence {
    /// Corollary 2, witness search, exceptional table.
    #[default]
    CheapestFirst,
    /// Witness search, Corollary 2, exceptional table.
    TheoremFirst,
}

/// [`decide_with`] under [`Precedence::CheapestFirst`].
pub fn decide(
    p: &BigUint,
    curve: &CurveOverK,
    n_max: Option<u64>,
) -> Result<Option<WitnessCertificate>, CriterionError> {
    decide_with(p, curve, n_max, Precedence::CheapestFirst)
}

/// Settles `p` by the first route that succeeds. With an explicit `n_max` a
/// failed capped search is retried without the cap.
pub fn decide_with(
    p: &BigUint,
    curve: &CurveOverK,
    n_max: Option<u64>,
    order: Precedence,
) -> Result<Option<WitnessCertificate>, CriterionError> {
    let p_mode = check_exponent(p)?;
    let cert = |n: u64, method: Method, q_mode: PrimalityMode| WitnessCertificate {
        p: p.clone(),
        n,
        q: p * n + 1u32,
        method,
        primality_mode: p_mode.combine(q_mode),
    };
    let corollary = || corollary2_check(p).map(|(method, n, mode)| cert(n, method, mode));
    let theorem = || {
        let mut found = theorem_witness(p, n_max);
        if found.is_none() && n_max.is_some() {
            found = theorem_witness(p, None);
        }
        found.map(|n| {
            let mode = primes::is_prime_big(&(p * n + 1u32)).expect("witness q is prime");
            cert(n, Method::Theorem, mode)
        })
    };
    let first = match order {
        Precedence::CheapestFirst => corollary().or_else(theorem),
        Precedence::TheoremFirst => theorem().or_else(corollary),
    };
    if first.is_some() {
        return Ok(first);
    }
    if let Some((pw, n)) = p.to_u64().and_then(|w| exceptional_n(w).map(|n| (w, n))) {
        if exceptional_check(pw, n, curve)?.holds() {
            return Ok(Some(cert(n, Method::Exceptional, PrimalityMode::Deterministic)));
        }
    }
    Ok(None)
}

/// Why a certificate failed [`recheck`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecheckFailure {
    #[error("p is not a prime >= 5")]
    BadExponent,
    #[error("q != n p + 1")]
    WrongQ,
    #[error("theorem condition fails: {0}")]
    Theorem(Violation),
    #[error("corollary 2 condition fails")]
    Corollary,
    #[error("(p, n) is not in the exceptional table")]
    NotTabled,
    #[error("exceptional check fails: {0}")]
    Exceptional(String),
    #[error("primality mode is {found}, recomputed {expected}")]
    Mode {
        found: PrimalityMode,
        expected: PrimalityMode,
    },
}

/// Re-verifies a certificate from its fields and the curve alone.
pub fn recheck(cert: &WitnessCertificate, curve: &CurveOverK) -> Result<(), RecheckFailure> {
    let p = &cert.p;
    let n = cert.n;
    let p_mode = check_exponent(p).map_err(|_| RecheckFailure::BadExponent)?;
    let q = p * n + 1u32;
    if cert.q != q {
        return Err(RecheckFailure::WrongQ);
    }
    let q_mode = match cert.method {
        Method::Theorem => match theorem_conditions(p, n) {
            Ok(Ok(mode)) => mode,
            Ok(Err(v)) => return Err(RecheckFailure::Theorem(v)),
            Err(e) => return Err(RecheckFailure::Exceptional(e.to_string())),
        },
        Method::Corollary2a | Method::Corollary2b => match corollary2_check(p) {
            Some((m, cn, mode)) if m == cert.method && cn == n => mode,
            _ => return Err(RecheckFailure::Corollary),
        },
        Method::Exceptional => {
            let pw = p.to_u64().ok_or(RecheckFailure::NotTabled)?;
            if exceptional_n(pw) != Some(n) {
                return Err(RecheckFailure::NotTabled);
            }
            let ev = exceptional_check(pw, n, curve)
                .map_err(|e| RecheckFailure::Exceptional(e.to_string()))?;
            if !ev.holds() {
                return Err(RecheckFailure::Exceptional(ev.to_string()));
            }
            PrimalityMode::Deterministic
        }
    };
    let expected = p_mode.combine(q_mode);
    if cert.primality_mode != expected {
        return Err(RecheckFailure::Mode {
            found: cert.primality_mode,
            expected,
        });
    }
    Ok(())
}

/// `10^100 + 267`, the smallest prime above a googol.
pub fn googol_prime() -> BigUint {
    num_traits::pow(BigUint::from(10u32), 100) + 267u32
}
