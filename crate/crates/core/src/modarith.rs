//! Arithmetic modulo an odd prime.
//!
//! Two backends implement [`ModArith`]: [`WordModulus`] keeps residues in a
//! `u64` and multiplies through `u128`, [`BigModulus`] works on [`BigUint`]
//! for moduli of any size. The algorithms in this module (square roots,
//! primitive roots, roots of unity) are written once against the trait.
//! [`PrimeModulus`] and [`Residue`] are the checked, backend-agnostic surface.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::primes::{self, Factorization, PrimalityMode};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("modulus {0} is not an odd prime")]
    NotOddPrime(BigUint),
    #[error("{n} does not divide q - 1 = {q_minus_one}")]
    NotDivisor { n: BigUint, q_minus_one: BigUint },
    #[error("factorization does not multiply out to q - 1 = {0}")]
    InconsistentFactorization(BigUint),
    #[error("no primitive root found; the supplied factorization of q - 1 is wrong")]
    NoPrimitiveRoot,
    #[error("residues belong to different moduli")]
    ModulusMismatch,
}

/// Field operations modulo an odd prime, abstracted over the residue representation.
pub trait ModArith: Send + Sync {
    type Elem: Clone + PartialEq + Eq + fmt::Debug + Send + Sync;

    fn modulus(&self) -> BigUint;
    fn from_u64(&self, x: u64) -> Self::Elem;
    fn from_big(&self, x: &BigUint) -> Self::Elem;
    fn to_big(&self, x: &Self::Elem) -> BigUint;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn pow(&self, base: &Self::Elem, exp: &BigUint) -> Self::Elem;

    fn pow_u64(&self, base: &Self::Elem, exp: u64) -> Self::Elem {
        let mut result = self.one();
        let mut b = base.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &b);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b);
            }
        }
        result
    }

    fn zero(&self) -> Self::Elem {
        self.from_u64(0)
    }

    fn one(&self) -> Self::Elem {
        self.from_u64(1)
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.sub(&self.zero(), a)
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }
}

/// Word-sized odd modulus; products go through `u128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WordModulus(u64);

impl WordModulus {
    /// Unchecked: the caller guarantees `q` is an odd prime.
    pub const fn new_unchecked(q: u64) -> Self {
        WordModulus(q)
    }

    pub const fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn mul_mod(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }

    #[inline]
    pub fn pow_mod(self, base: u64, mut exp: u64) -> u64 {
        let mut result = 1 % self.0;
        let mut b = base % self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul_mod(result, b);
            }
            exp >>= 1;
            if exp > 0 {
                b = self.mul_mod(b, b);
            }
        }
        result
    }
}

impl ModArith for WordModulus {
    type Elem = u64;

    fn modulus(&self) -> BigUint {
        BigUint::from(self.0)
    }

    fn from_u64(&self, x: u64) -> u64 {
        x % self.0
    }

    fn from_big(&self, x: &BigUint) -> u64 {
        (x % self.0).to_u64().expect("reduced below a u64 modulus")
    }

    fn to_big(&self, x: &u64) -> BigUint {
        BigUint::from(*x)
    }

    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let (s, overflow) = a.overflowing_add(*b);
        if overflow || s >= self.0 {
            s.wrapping_sub(self.0)
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.0 - (b - a)
        }
    }

    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.mul_mod(*a, *b)
    }

    fn pow(&self, base: &u64, exp: &BigUint) -> u64 {
        match exp.to_u64() {
            Some(e) => self.pow_mod(*base, e),
            None => {
                // Fermat: reduce the exponent mod q - 1 unless the base is zero.
                if *base % self.0 == 0 {
                    return 0;
                }
                let e = (exp % (self.0 - 1)).to_u64().expect("reduced exponent fits");
                self.pow_mod(*base, e)
            }
        }
    }

    fn pow_u64(&self, base: &u64, exp: u64) -> u64 {
        self.pow_mod(*base, exp)
    }
}

/// Arbitrary-precision odd modulus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BigModulus(BigUint);

impl BigModulus {
    /// Unchecked: the caller guarantees `q` is an odd prime.
    pub fn new_unchecked(q: BigUint) -> Self {
        BigModulus(q)
    }

    pub fn get(&self) -> &BigUint {
        &self.0
    }
}

impl ModArith for BigModulus {
    type Elem = BigUint;

    fn modulus(&self) -> BigUint {
        self.0.clone()
    }

    fn from_u64(&self, x: u64) -> BigUint {
        BigUint::from(x) % &self.0
    }

    fn from_big(&self, x: &BigUint) -> BigUint {
        x % &self.0
    }

    fn to_big(&self, x: &BigUint) -> BigUint {
        x.clone()
    }

    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.0 {
            s - &self.0
        } else {
            s
        }
    }

    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.0 - (b - a)
        }
    }

    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.0
    }

    fn pow(&self, base: &BigUint, exp: &BigUint) -> BigUint {
        base.modpow(exp, &self.0)
    }

    fn pow_u64(&self, base: &BigUint, exp: u64) -> BigUint {
        base.modpow(&BigUint::from(exp), &self.0)
    }
}

/// An odd prime modulus, word-sized when it fits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PrimeModulus {
    Word(WordModulus),
    Big(BigModulus),
}

impl PrimeModulus {
    /// Checks primality of `q` (deterministically below 2^64) and picks the backend.
    pub fn new(q: BigUint) -> Result<(Self, PrimalityMode), ArithError> {
        let mode = match primes::is_prime_big(&q) {
            Some(mode) => mode,
            None => return Err(ArithError::NotOddPrime(q)),
        };
        if q == BigUint::from(2u32) {
            return Err(ArithError::NotOddPrime(q));
        }
        Ok((Self::from_prime_unchecked(q), mode))
    }

    pub fn from_u64(q: u64) -> Result<Self, ArithError> {
        if q == 2 || !primes::is_prime(q) {
            return Err(ArithError::NotOddPrime(BigUint::from(q)));
        }
        Ok(PrimeModulus::Word(WordModulus(q)))
    }

    pub(crate) fn from_prime_unchecked(q: BigUint) -> Self {
        match q.to_u64() {
            Some(w) => PrimeModulus::Word(WordModulus(w)),
            None => PrimeModulus::Big(BigModulus(q)),
        }
    }

    pub fn value(&self) -> BigUint {
        match self {
            PrimeModulus::Word(w) => w.modulus(),
            PrimeModulus::Big(b) => b.modulus(),
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self {
            PrimeModulus::Word(w) => Some(w.get()),
            PrimeModulus::Big(_) => None,
        }
    }

    pub fn residue(&self, value: impl Into<BigUint>) -> Residue {
        let q = self.value();
        Residue {
            value: value.into() % q,
            modulus: self.clone(),
        }
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// A residue class modulo a [`PrimeModulus`], stored as its least non-negative representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Residue {
    value: BigUint,
    modulus: PrimeModulus,
}

impl Residue {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn modulus(&self) -> &PrimeModulus {
        &self.modulus
    }

    pub fn pow(&self, exp: &BigUint) -> Residue {
        let value = match &self.modulus {
            PrimeModulus::Word(m) => m.to_big(&m.pow(&m.from_big(&self.value), exp)),
            PrimeModulus::Big(m) => m.pow(&self.value, exp),
        };
        Residue {
            value,
            modulus: self.modulus.clone(),
        }
    }

    pub fn mul(&self, other: &Residue) -> Result<Residue, ArithError> {
        if self.modulus != other.modulus {
            return Err(ArithError::ModulusMismatch);
        }
        let value = (&self.value * &other.value) % self.modulus.value();
        Ok(Residue {
            value,
            modulus: self.modulus.clone(),
        })
    }

    /// Both square roots `{r, q - r}` with `r <= q - r`, or `None` for a non-residue.
    pub fn sqrt(&self) -> Option<(Residue, Residue)> {
        let wrap = |v: BigUint| Residue {
            value: v,
            modulus: self.modulus.clone(),
        };
        match &self.modulus {
            PrimeModulus::Word(m) => {
                sqrt_mod(m, &m.from_big(&self.value)).map(|(r, s)| (wrap(r.into()), wrap(s.into())))
            }
            PrimeModulus::Big(m) => sqrt_mod(m, &self.value).map(|(r, s)| (wrap(r), wrap(s))),
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

/// Legendre-symbol test via Euler's criterion: `a^((q-1)/2)`.
pub fn is_square<M: ModArith>(m: &M, a: &M::Elem) -> bool {
    if m.is_zero(a) {
        return true;
    }
    let half = (m.modulus() - 1u32) >> 1;
    m.is_one(&m.pow(a, &half))
}

/// Tonelli–Shanks. Returns `(r, q - r)` ordered so the first is the smaller representative.
pub fn sqrt_mod<M: ModArith>(m: &M, a: &M::Elem) -> Option<(M::Elem, M::Elem)> {
    if m.is_zero(a) {
        return Some((m.zero(), m.zero()));
    }
    if !is_square(m, a) {
        return None;
    }
    let q = m.modulus();
    let q_minus_one = &q - 1u32;
    let s = q_minus_one.trailing_zeros().expect("q - 1 is nonzero");
    let odd = &q_minus_one >> s;

    let root = if s == 1 {
        // q = 3 mod 4
        m.pow(a, &((&q + 1u32) >> 2))
    } else {
        let mut z = 2u64;
        while is_square(m, &m.from_u64(z)) {
            z += 1;
        }
        let mut c = m.pow(&m.from_u64(z), &odd);
        let mut x = m.pow(a, &((&odd + 1u32) >> 1));
        let mut t = m.pow(a, &odd);
        let mut order_exp = s;
        while !m.is_one(&t) {
            let mut i = 0u64;
            let mut t2 = t.clone();
            while !m.is_one(&t2) {
                t2 = m.mul(&t2, &t2);
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(order_exp - i - 1) {
                b = m.mul(&b, &b);
            }
            x = m.mul(&x, &b);
            c = m.mul(&b, &b);
            t = m.mul(&t, &c);
            order_exp = i;
        }
        x
    };
    let other = m.neg(&root);
    if m.to_big(&root) <= m.to_big(&other) {
        Some((root, other))
    } else {
        Some((other, root))
    }
}

/// Smallest `g` in 2, 3, 4, ... of multiplicative order exactly `q - 1`.
///
/// `factors` must be the complete factorization of `q - 1`; it is checked by
/// recomposition before the search starts.
pub fn primitive_root<M: ModArith>(m: &M, factors: &Factorization) -> Result<M::Elem, ArithError> {
    let q = m.modulus();
    let q_minus_one = &q - 1u32;
    if factors.value() != q_minus_one {
        return Err(ArithError::InconsistentFactorization(q_minus_one));
    }
    if q == BigUint::from(3u32) {
        return Ok(m.from_u64(2));
    }
    let cofactors: Vec<BigUint> = factors.primes().map(|l| &q_minus_one / l).collect();
    let mut candidate = BigUint::from(2u32);
    while candidate < q {
        let g = m.from_big(&candidate);
        if cofactors.iter().all(|e| !m.is_one(&m.pow(&g, e))) {
            return Ok(g);
        }
        candidate += 1u32;
    }
    Err(ArithError::NoPrimitiveRoot)
}

/// The multiplicative order of `x` divides `n`; returns true when it is exactly `n`.
fn has_exact_order<M: ModArith>(m: &M, x: &M::Elem, n: u64, n_primes: &[u64]) -> bool {
    m.is_one(&m.pow_u64(x, n)) && n_primes.iter().all(|&l| !m.is_one(&m.pow_u64(x, n / l)))
}

/// Lazily enumerated group of `n`-th roots of unity modulo `q`: `1, z, z^2, ..., z^(n-1)`.
#[derive(Debug, Clone)]
pub struct RootsOfUnity<'m, M: ModArith> {
    m: &'m M,
    generator: M::Elem,
    next: M::Elem,
    remaining: u64,
}

impl<'m, M: ModArith> RootsOfUnity<'m, M> {
    pub fn generator(&self) -> &M::Elem {
        &self.generator
    }
}

impl<M: ModArith> Iterator for RootsOfUnity<'_, M> {
    type Item = M::Elem;

    fn next(&mut self) -> Option<M::Elem> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let out = self.next.clone();
        if self.remaining > 0 {
            self.next = self.m.mul(&self.next, &self.generator);
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.remaining as usize;
        (r, Some(r))
    }
}

impl<M: ModArith> ExactSizeIterator for RootsOfUnity<'_, M> {}

/// Streams the `n` residues with `x^n = 1`. Requires `n | q - 1`.
///
/// The generator is `c^((q-1)/n)` for the first `c = 2, 3, ...` whose image has
/// order exactly `n`; only `n` needs to be factored, never `q - 1`.
pub fn nth_roots_of_unity<M: ModArith>(m: &M, n: u64) -> Result<RootsOfUnity<'_, M>, ArithError> {
    let q_minus_one = m.modulus() - 1u32;
    let n_big = BigUint::from(n);
    if n == 0 || !q_minus_one.is_multiple_of(&n_big) {
        return Err(ArithError::NotDivisor {
            n: n_big,
            q_minus_one,
        });
    }
    let cofactor = &q_minus_one / &n_big;
    let n_primes: Vec<u64> = primes::factorize_u64(n).iter().map(|&(l, _)| l).collect();
    let mut c = 2u64;
    let generator = loop {
        let z = m.pow(&m.from_u64(c), &cofactor);
        if has_exact_order(m, &z, n, &n_primes) {
            break z;
        }
        c += 1;
    };
    Ok(RootsOfUnity {
        m,
        next: m.one(),
        generator,
        remaining: n,
    })
}

/// Convenience wrapper: the roots as residues of a checked [`PrimeModulus`].
pub fn nth_roots_of_unity_residues(q: &PrimeModulus, n: u64) -> Result<Vec<Residue>, ArithError> {
    let values: Vec<BigUint> = match q {
        PrimeModulus::Word(m) => nth_roots_of_unity(m, n)?.map(BigUint::from).collect(),
        PrimeModulus::Big(m) => nth_roots_of_unity(m, n)?.collect(),
    };
    Ok(values.into_iter().map(|v| q.residue(v)).collect())
}

/// `q - 1` factored, for word-sized `q`.
pub fn factor_q_minus_one(q: u64) -> Factorization {
    Factorization::from_pairs(
        primes::factorize_u64(q - 1)
            .into_iter()
            .map(|(p, e)| (BigUint::from(p), e))
            .collect(),
    )
}
