//! Wendt resultants `W_n = Res(X^n - 1, (X + 1)^n - 1)`.
//!
//! Exact values come from a subresultant remainder sequence and are only
//! computed for small `n`. Divisibility `q | W_n` for a prime `q = 1 mod n`
//! never touches the exact value: it asks whether some `n`-th root of unity
//! `a` in `F_q` also has `(a + 1)^n = 1`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::modarith::{self, ArithError, ModArith, PrimeModulus};

/// Largest `n` accepted by [`wendt_exact`] unless a caller raises it.
pub const DEFAULT_EXACT_BOUND: u64 = 64;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WendtError {
    #[error("n = {n} exceeds the exact-computation bound {bound}")]
    TooLarge { n: u64, bound: u64 },
    #[error("n must be positive")]
    ZeroIndex,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WendtValue {
    pub n: u64,
    pub value: BigInt,
}

/// Dense integer polynomial, coefficients from the constant term up.
pub type IntPoly = Vec<BigInt>;

fn trim(p: &mut IntPoly) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn degree(p: &IntPoly) -> usize {
    p.len().saturating_sub(1)
}

fn content(p: &IntPoly) -> BigInt {
    p.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// `lc(b)^(deg a - deg b + 1) * a mod b`.
fn pseudo_rem(a: &IntPoly, b: &IntPoly) -> IntPoly {
    let mut r = a.clone();
    let db = degree(b);
    let lb = b[db].clone();
    let mut steps = degree(a) + 1 - db;
    while !r.is_empty() && degree(&r) >= db {
        let dr = degree(&r);
        let lr = r[dr].clone();
        for c in r.iter_mut() {
            *c *= &lb;
        }
        let shift = dr - db;
        for (i, c) in b.iter().enumerate() {
            r[i + shift] -= &lr * c;
        }
        trim(&mut r);
        steps -= 1;
    }
    let factor = num_traits::pow(lb, steps);
    for c in r.iter_mut() {
        *c *= &factor;
    }
    r
}

/// Resultant of two integer polynomials by the subresultant PRS.
pub fn resultant(f: &IntPoly, g: &IntPoly) -> BigInt {
    let mut a = f.clone();
    let mut b = g.clone();
    trim(&mut a);
    trim(&mut b);
    if a.is_empty() || b.is_empty() {
        return BigInt::zero();
    }
    let ca = content(&a);
    let cb = content(&b);
    for c in a.iter_mut() {
        *c /= &ca;
    }
    for c in b.iter_mut() {
        *c /= &cb;
    }
    let mut sign = BigInt::one();
    let t = num_traits::pow(ca, degree(&b)) * num_traits::pow(cb, degree(&a));
    if degree(&a) < degree(&b) {
        if degree(&a) % 2 == 1 && degree(&b) % 2 == 1 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut b);
    }
    let mut g_acc = BigInt::one();
    let mut h = BigInt::one();
    while degree(&b) > 0 {
        let delta = degree(&a) - degree(&b);
        if degree(&a) % 2 == 1 && degree(&b) % 2 == 1 {
            sign = -sign;
        }
        let r = pseudo_rem(&a, &b);
        if r.is_empty() {
            return BigInt::zero();
        }
        let divisor = &g_acc * num_traits::pow(h.clone(), delta);
        a = b;
        b = r.into_iter().map(|c| c / &divisor).collect();
        g_acc = a[degree(&a)].clone();
        h = if delta == 0 {
            h
        } else {
            num_traits::pow(g_acc.clone(), delta) / num_traits::pow(h, delta - 1)
        };
    }
    let da = degree(&a);
    let lb = b[0].clone();
    let tail = if da == 0 {
        BigInt::one()
    } else {
        num_traits::pow(lb, da) / num_traits::pow(h, da - 1)
    };
    sign * t * tail
}

/// The pair `(X^n - 1, (X + 1)^n - 1)`.
pub fn wendt_pair(n: u64) -> (IntPoly, IntPoly) {
    let n = n as usize;
    let mut f = vec![BigInt::zero(); n + 1];
    f[0] = BigInt::from(-1);
    f[n] = BigInt::one();
    let mut g = Vec::with_capacity(n + 1);
    let mut binom = BigInt::one();
    for k in 0..=n {
        g.push(binom.clone());
        binom = binom * (n - k) / (k + 1);
    }
    g[0] -= 1;
    (f, g)
}

fn cache() -> &'static Mutex<HashMap<u64, BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, BigInt>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Exact `W_n` for `1 <= n <=` [`DEFAULT_EXACT_BOUND`].
pub fn wendt_exact(n: u64) -> Result<WendtValue, WendtError> {
    wendt_exact_bounded(n, DEFAULT_EXACT_BOUND)
}

pub fn wendt_exact_bounded(n: u64, bound: u64) -> Result<WendtValue, WendtError> {
    if n == 0 {
        return Err(WendtError::ZeroIndex);
    }
    if n > bound {
        return Err(WendtError::TooLarge { n, bound });
    }
    if let Some(v) = cache().lock().expect("wendt cache poisoned").get(&n) {
        return Ok(WendtValue { n, value: v.clone() });
    }
    let (f, g) = wendt_pair(n);
    let value = resultant(&f, &g);
    debug_assert_eq!(value.is_zero(), n % 6 == 0);
    cache()
        .lock()
        .expect("wendt cache poisoned")
        .insert(n, value.clone());
    Ok(WendtValue { n, value })
}

/// Whether `q | W_n`, decided in `F_q`. Requires `n | q - 1`.
pub fn divides_wendt(q: &PrimeModulus, n: u64) -> Result<bool, WendtError> {
    match q {
        PrimeModulus::Word(m) => divides_wendt_in(m, n),
        PrimeModulus::Big(m) => divides_wendt_in(m, n),
    }
}

/// [`divides_wendt`] over any backend.
pub fn divides_wendt_in<M: ModArith>(m: &M, n: u64) -> Result<bool, WendtError> {
    if n == 0 {
        return Err(WendtError::ZeroIndex);
    }
    let roots = modarith::nth_roots_of_unity(m, n)?;
    if n % 6 == 0 {
        // W_n = 0
        return Ok(true);
    }
    let one = m.one();
    for alpha in roots {
        let shifted = m.add(&alpha, &one);
        if m.is_one(&m.pow_u64(&shifted, n)) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Sign and magnitude rendering used by the CLI: `-3 * 11^9 * 31^3`.
pub fn format_factored(value: &BigInt) -> Result<String, crate::primes::FactorError> {
    if value.is_zero() {
        return Ok("0".to_string());
    }
    let (sign, fac) = crate::primes::factorize(value)?;
    let body = fac.to_string();
    Ok(match (sign == num_bigint::Sign::Minus, value.abs().is_one()) {
        (true, true) => "-1".to_string(),
        (true, false) => format!("-{body}"),
        (false, _) => body,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes;
    use num_bigint::BigUint;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn modulus(q: u64) -> PrimeModulus {
        PrimeModulus::from_u64(q).unwrap()
    }

    #[test]
    fn exact_examples() {
        assert_eq!(wendt_exact(2).unwrap().value, big(-3));
        assert_eq!(wendt_exact(6).unwrap().value, big(0));
        let w10 = big(-3) * big(11).pow(9) * big(31).pow(3);
        assert_eq!(wendt_exact(10).unwrap().value, w10);
        let w8 = -(big(3).pow(7) * big(5).pow(3) * big(17).pow(3));
        assert_eq!(wendt_exact(8).unwrap().value, w8);
    }

    #[test]
    fn odd_indices_follow_operand_order() {
        // Res(X^n - 1, (X+1)^n - 1) in that order, cross-checked with a CAS.
        assert_eq!(wendt_exact(1).unwrap().value, big(1));
        assert_eq!(wendt_exact(3).unwrap().value, big(28));
        assert_eq!(wendt_exact(5).unwrap().value, big(3751));
        assert_eq!(wendt_exact(7).unwrap().value, big(6_835_648));
        assert_eq!(wendt_exact(11).unwrap().value, big(101_832_157_445_630_503));
    }

    #[test]
    fn bound_is_enforced() {
        assert_eq!(
            wendt_exact(65),
            Err(WendtError::TooLarge { n: 65, bound: 64 })
        );
        assert_eq!(wendt_exact(0), Err(WendtError::ZeroIndex));
        assert!(wendt_exact_bounded(70, 80).is_ok());
    }

    #[test]
    fn zero_exactly_at_multiples_of_six() {
        for n in 1..=36 {
            assert_eq!(wendt_exact(n).unwrap().value.is_zero(), n % 6 == 0, "n={n}");
        }
    }

    #[test]
    fn operand_order_invariance_for_even_n() {
        for n in (2..=12).step_by(2) {
            let (f, g) = wendt_pair(n);
            assert_eq!(resultant(&f, &g), resultant(&g, &f), "n={n}");
        }
        let (f, g) = wendt_pair(5);
        assert_eq!(resultant(&f, &g), -resultant(&g, &f));
    }

    #[test]
    fn resultant_small_cases() {
        // Res(x - 2, x^2 + 1) = 5; Res(2x, 3) = 3.
        assert_eq!(resultant(&vec![big(-2), big(1)], &vec![big(1), big(0), big(1)]), big(5));
        assert_eq!(resultant(&vec![big(0), big(2)], &vec![big(3)]), big(3));
        assert_eq!(resultant(&vec![], &vec![big(3)]), big(0));
    }

    #[test]
    fn divides_examples() {
        assert!(!divides_wendt(&modulus(89), 8).unwrap());
        assert!(divides_wendt(&modulus(31), 10).unwrap());
        assert!(divides_wendt(&modulus(3), 2).unwrap());
        assert!(divides_wendt(&modulus(7), 6).unwrap());
        assert!(matches!(
            divides_wendt(&modulus(11), 3),
            Err(WendtError::Arith(ArithError::NotDivisor { .. }))
        ));
    }

    #[test]
    fn root_test_matches_exact_values() {
        for n in 1..=20u64 {
            if n % 6 == 0 {
                continue;
            }
            let w = wendt_exact(n).unwrap().value;
            for q in primes::primes_in_range(3, 2000) {
                if (q - 1) % n != 0 {
                    continue;
                }
                let exact = primes::divides(&BigUint::from(q), &w);
                assert_eq!(divides_wendt(&modulus(q), n).unwrap(), exact, "q={q} n={n}");
            }
        }
    }

    #[test]
    fn big_backend_agrees() {
        use crate::modarith::BigModulus;
        for (q, n) in [(89u64, 8u64), (31, 10), (131, 10), (61, 10), (1021, 20)] {
            let b = BigModulus::new_unchecked(BigUint::from(q));
            assert_eq!(divides_wendt_in(&b, n).unwrap(), divides_wendt(&modulus(q), n).unwrap());
        }
    }

    #[test]
    fn factored_rendering() {
        assert_eq!(format_factored(&wendt_exact(10).unwrap().value).unwrap(), "-3 * 11^9 * 31^3");
        assert_eq!(format_factored(&wendt_exact(2).unwrap().value).unwrap(), "-3");
        assert_eq!(format_factored(&big(0)).unwrap(), "0");
        assert_eq!(format_factored(&big(1)).unwrap(), "1");
    }
}
