//! The ring of integers `Z[phi]` of `Q(sqrt 5)`, `phi^2 = phi + 1`, and its
//! residue ring modulo 4 (the square of the inert prime above 2).
//!
//! Besides exact arithmetic this module hosts the finite checks on `O_K / 4`:
//! the normalization of Fermat triples modulo 4 ([`lemma1_verify`]) and the
//! 2-adic valuation table of the Frey invariants ([`lemma3_verify`]).

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RingError {
    #[error("valuation of zero is undefined")]
    ZeroValuation,
    #[error("p mod 12 must be one of 1, 5, 7, 11 (got {0})")]
    BadExponentClass(u64),
    #[error("degenerate triple: one of A, B, C = -A-B is zero")]
    Degenerate,
}

/// `a + b*phi` with arbitrary-precision coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GoldenInt {
    pub a: BigInt,
    pub b: BigInt,
}

impl GoldenInt {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        GoldenInt {
            a: a.into(),
            b: b.into(),
        }
    }

    pub fn from_int(a: impl Into<BigInt>) -> Self {
        GoldenInt::new(a, 0)
    }

    pub fn phi() -> Self {
        GoldenInt::new(0, 1)
    }

    pub fn zero() -> Self {
        GoldenInt::new(0, 0)
    }

    pub fn one() -> Self {
        GoldenInt::new(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// `N(a + b phi) = a^2 + ab - b^2`.
    pub fn norm(&self) -> BigInt {
        &self.a * &self.a + &self.a * &self.b - &self.b * &self.b
    }

    /// Galois conjugate: `phi -> 1 - phi`.
    pub fn conj(&self) -> Self {
        GoldenInt::new(&self.a + &self.b, -&self.b)
    }

    pub fn trace(&self) -> BigInt {
        BigInt::from(2) * &self.a + &self.b
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = GoldenInt::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        GoldenInt::new(&self.a * k, &self.b * k)
    }

    /// Valuation at the prime above 2. Since 2 is inert, this is half the
    /// 2-adic valuation of the norm.
    pub fn v_p2(&self) -> Result<u32, RingError> {
        if self.is_zero() {
            return Err(RingError::ZeroValuation);
        }
        let n = self.norm();
        let v = n.trailing_zeros().expect("nonzero norm") as u32;
        assert!(v % 2 == 0, "2-adic valuation of N({self}) is odd");
        Ok(v / 2)
    }

    pub fn mod4(&self) -> ResidueMod4 {
        ResidueMod4::from_coords(mod4_of(&self.a), mod4_of(&self.b))
    }
}

fn mod4_of(x: &BigInt) -> u8 {
    x.mod_floor(&BigInt::from(4)).to_u8().expect("in [0, 4)")
}

impl fmt::Display for GoldenInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*phi", self.b),
            (false, false) if self.b.is_negative() => write!(f, "{} - {}*phi", self.a, -&self.b),
            (false, false) => write!(f, "{} + {}*phi", self.a, self.b),
        }
    }
}

impl<'a> Add<&'a GoldenInt> for &'a GoldenInt {
    type Output = GoldenInt;
    fn add(self, o: &GoldenInt) -> GoldenInt {
        GoldenInt::new(&self.a + &o.a, &self.b + &o.b)
    }
}

impl<'a> Sub<&'a GoldenInt> for &'a GoldenInt {
    type Output = GoldenInt;
    fn sub(self, o: &GoldenInt) -> GoldenInt {
        GoldenInt::new(&self.a - &o.a, &self.b - &o.b)
    }
}

impl<'a> Mul<&'a GoldenInt> for &'a GoldenInt {
    type Output = GoldenInt;
    fn mul(self, o: &GoldenInt) -> GoldenInt {
        let bd = &self.b * &o.b;
        GoldenInt::new(
            &self.a * &o.a + &bd,
            &self.a * &o.b + &self.b * &o.a + bd,
        )
    }
}

impl Neg for &GoldenInt {
    type Output = GoldenInt;
    fn neg(self) -> GoldenInt {
        GoldenInt::new(-&self.a, -&self.b)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for GoldenInt {
            type Output = GoldenInt;
            fn $m(self, o: GoldenInt) -> GoldenInt { (&self).$m(&o) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for GoldenInt {
    type Output = GoldenInt;
    fn neg(self) -> GoldenInt {
        -&self
    }
}

/// A digit of the residue field `O_K / P2 = F_4`, represented by `0, 1, u, u^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Digit {
    Zero,
    One,
    U,
    U2,
}

impl Digit {
    pub const ALL: [Digit; 4] = [Digit::Zero, Digit::One, Digit::U, Digit::U2];

    /// Coordinates in the basis `(1, phi)`; `u^2 = 1 + u`.
    fn coords(self) -> (u8, u8) {
        match self {
            Digit::Zero => (0, 0),
            Digit::One => (1, 0),
            Digit::U => (0, 1),
            Digit::U2 => (1, 1),
        }
    }

    fn from_coords(a: u8, b: u8) -> Digit {
        match (a & 1, b & 1) {
            (0, 0) => Digit::Zero,
            (1, 0) => Digit::One,
            (0, 1) => Digit::U,
            _ => Digit::U2,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Digit::Zero => "0",
            Digit::One => "1",
            Digit::U => "u",
            Digit::U2 => "u^2",
        }
    }
}

/// A class of `O_K / 4`, written canonically as `x + 2y` with `x, y` in `{0, 1, u, u^2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueMod4 {
    a: u8,
    b: u8,
}

impl ResidueMod4 {
    pub const ZERO: ResidueMod4 = ResidueMod4 { a: 0, b: 0 };
    pub const ONE: ResidueMod4 = ResidueMod4 { a: 1, b: 0 };
    pub const U: ResidueMod4 = ResidueMod4 { a: 0, b: 1 };

    pub fn from_coords(a: u8, b: u8) -> Self {
        ResidueMod4 { a: a % 4, b: b % 4 }
    }

    pub fn from_digits(x: Digit, y: Digit) -> Self {
        let (xa, xb) = x.coords();
        let (ya, yb) = y.coords();
        ResidueMod4::from_coords(xa + 2 * ya, xb + 2 * yb)
    }

    /// The pair `(x, y)` of the canonical form `x + 2y`.
    pub fn digits(self) -> (Digit, Digit) {
        let x = Digit::from_coords(self.a, self.b);
        let (xa, xb) = x.coords();
        let y = Digit::from_coords((self.a + 4 - xa) / 2, (self.b + 4 - xb) / 2);
        (x, y)
    }

    pub fn coords(self) -> (u8, u8) {
        (self.a, self.b)
    }

    /// The smallest non-negative lift `a + b phi`.
    pub fn lift(self) -> GoldenInt {
        GoldenInt::new(self.a, self.b)
    }

    pub fn is_unit(self) -> bool {
        self.digits().0 != Digit::Zero
    }

    pub fn mul(self, o: ResidueMod4) -> ResidueMod4 {
        let (a, b, c, d) = (self.a as u16, self.b as u16, o.a as u16, o.b as u16);
        ResidueMod4::from_coords(((a * c + b * d) % 4) as u8, ((a * d + b * c + b * d) % 4) as u8)
    }

    pub fn add(self, o: ResidueMod4) -> ResidueMod4 {
        ResidueMod4::from_coords(self.a + o.a, self.b + o.b)
    }

    pub fn neg(self) -> ResidueMod4 {
        ResidueMod4::from_coords(4 - self.a, 4 - self.b)
    }

    pub fn pow(self, mut e: u64) -> ResidueMod4 {
        let mut acc = ResidueMod4::ONE;
        let mut base = self;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }
}

impl fmt::Display for ResidueMod4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (x, y) = self.digits();
        match (x, y) {
            (x, Digit::Zero) => f.write_str(x.symbol()),
            (Digit::Zero, Digit::One) => f.write_str("2"),
            (Digit::Zero, y) => write!(f, "2{}", y.symbol()),
            (Digit::One, Digit::One) => f.write_str("3"),
            (x, y) if x == y => write!(f, "3{}", x.symbol()),
            (x, Digit::One) => write!(f, "{}+2", x.symbol()),
            (x, y) => write!(f, "{}+2{}", x.symbol(), y.symbol()),
        }
    }
}

/// The sixteen classes of `O_K / 4`, split into units and non-units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMod4 {
    pub all: Vec<ResidueMod4>,
    pub units: Vec<ResidueMod4>,
    pub non_units: Vec<ResidueMod4>,
}

/// Enumerates `{x + 2y | x, y = 0, 1, u, u^2}`; units are exactly `x != 0`.
pub fn ring_mod4() -> RingMod4 {
    let all: Vec<ResidueMod4> = Digit::ALL
        .iter()
        .flat_map(|&x| Digit::ALL.iter().map(move |&y| ResidueMod4::from_digits(x, y)))
        .collect();
    let (units, non_units) = all.iter().partition(|r| r.is_unit());
    RingMod4 {
        all,
        units,
        non_units,
    }
}

fn check_class(p_class: u64) -> Result<u64, RingError> {
    match p_class % 12 {
        c @ (1 | 5 | 7 | 11) if p_class < 12 => Ok(c),
        _ => Err(RingError::BadExponentClass(p_class)),
    }
}

/// `x^p mod 4` for a prime `p >= 5`, determined by `p mod 12`: units have
/// exponent dividing 12 and non-units square to zero.
pub fn pth_power_mod4(x: ResidueMod4, p_class: u64) -> Result<ResidueMod4, RingError> {
    let c = check_class(p_class)?;
    Ok(x.pow(c + 12))
}

/// The four admissible `(a^p, b^p) mod 4` pairs for triples prime to 2:
/// `(u, 1+2u)`, `(3, u^2)`, `(1, u)`, `(1, u^2+2u)`.
pub fn odd_normal_forms() -> [(ResidueMod4, ResidueMod4); 4] {
    use Digit::*;
    let r = ResidueMod4::from_digits;
    [
        (r(U, Zero), r(One, U)),
        (r(One, One), r(U2, Zero)),
        (r(One, Zero), r(U, Zero)),
        (r(One, Zero), r(U2, U)),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma1Report {
    pub p_class: u64,
    /// Triples `(a, b, c)` mod 4 with `a^p + b^p + c^p = 0` and the coprimality pattern.
    pub triples: usize,
    /// Orbits under permutation, sign and unit scaling.
    pub orbits: usize,
    /// Triples with no normalized representative in their orbit.
    pub failures: Vec<[ResidueMod4; 3]>,
}

impl Lemma1Report {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The two identities in `O_K` used to pick the scaling unit:
/// `1 + 2u = u^3` and `u (u^2 + 2) = 1 + 4u`.
pub fn lemma1_identities() -> (bool, bool) {
    let u = GoldenInt::phi();
    let one = GoldenInt::one();
    let two = GoldenInt::from_int(2);
    let four = GoldenInt::from_int(4);
    let first = &one + &(&two * &u) == u.pow(3);
    let second = &u * &(&u.pow(2) + &two) == &one + &(&four * &u);
    (first, second)
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Exhaustive check over `(O_K / 4)^3` that every admissible triple can be
/// permuted and scaled by a unit into one of the two normal forms:
/// 1. `2 | a`, `b c` prime to 2 and `b` a square mod 4;
/// 2. `abc` prime to 2 and `(a^p, b^p)` one of [`odd_normal_forms`].
pub fn lemma1_verify(p_class: u64) -> Result<Lemma1Report, RingError> {
    let c = check_class(p_class)?;
    let ring = ring_mod4();
    let power = |x: ResidueMod4| x.pow(c + 12);
    let squares: BTreeSet<ResidueMod4> = ring.all.iter().map(|&t| t.mul(t)).collect();
    let normal = odd_normal_forms();
    let minus_one = ResidueMod4::ONE.neg();

    let admissible = |t: &[ResidueMod4; 3]| {
        let non_units = t.iter().filter(|x| !x.is_unit()).count();
        non_units <= 1
            && power(t[0]).add(power(t[1])).add(power(t[2])) == ResidueMod4::ZERO
    };
    let is_normal = |t: &[ResidueMod4; 3]| {
        let [a, b, c] = *t;
        if !a.is_unit() {
            b.is_unit() && c.is_unit() && squares.contains(&b)
        } else {
            b.is_unit() && c.is_unit() && normal.contains(&(power(a), power(b)))
        }
    };
    let orbit = |t: &[ResidueMod4; 3]| -> Vec<[ResidueMod4; 3]> {
        let mut out = Vec::with_capacity(6 * 2 * ring.units.len());
        for perm in PERMUTATIONS {
            for sign in [ResidueMod4::ONE, minus_one] {
                for &xi in &ring.units {
                    let s = xi.mul(sign);
                    out.push([t[perm[0]].mul(s), t[perm[1]].mul(s), t[perm[2]].mul(s)]);
                }
            }
        }
        out
    };

    let mut triples = 0;
    let mut failures = Vec::new();
    let mut seen: BTreeSet<[ResidueMod4; 3]> = BTreeSet::new();
    let mut orbits = 0;
    for &a in &ring.all {
        for &b in &ring.all {
            for &cc in &ring.all {
                let t = [a, b, cc];
                if !admissible(&t) {
                    continue;
                }
                triples += 1;
                let members = orbit(&t);
                if members.iter().all(|m| !is_normal(m)) {
                    failures.push(t);
                }
                if !seen.contains(&t) {
                    orbits += 1;
                    seen.extend(members);
                }
            }
        }
    }
    Ok(Lemma1Report {
        p_class: c,
        triples,
        orbits,
        failures,
    })
}

/// Standard invariants of `y^2 = x (x - A)(x + B)` with `C = -A - B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreyInvariants {
    pub c4: GoldenInt,
    pub c6: GoldenInt,
    pub delta: GoldenInt,
}

/// `c4 = 16(A^2 + AB + B^2)`, `c6 = -32(A - B)(B - C)(C - A)`, `Delta = 16(ABC)^2`.
/// The identity `c4^3 - c6^2 = 1728 Delta` is asserted on every call.
pub fn frey_invariants(a: &GoldenInt, b: &GoldenInt) -> Result<FreyInvariants, RingError> {
    let c = -(a + b);
    if a.is_zero() || b.is_zero() || c.is_zero() {
        return Err(RingError::Degenerate);
    }
    let k = |n: i64| GoldenInt::from_int(n);
    let c4 = &k(16) * &(&(&(a * a) + &(a * b)) + &(b * b));
    let c6 = &k(-32) * &(&(&(a - b) * &(b - &c)) * &(&c - a));
    let abc = &(a * b) * &c;
    let delta = &k(16) * &(&abc * &abc);
    assert_eq!(
        &c4.pow(3) - &c6.pow(2),
        &k(1728) * &delta,
        "c4^3 - c6^2 != 1728 Delta"
    );
    Ok(FreyInvariants { c4, c6, delta })
}

/// Congruence classes of `(A, B) mod 4` treated by the valuation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lemma3Case {
    /// `2 | A`, `B` a unit square mod 4.
    Even,
    /// `(A, B) = (u, 1 + 2u)`.
    UOnePlus2U,
    /// `(A, B) = (3, u^2)`.
    ThreeU2,
    /// `(A, B) = (1, u)`.
    OneU,
    /// `(A, B) = (1, u^2 + 2u)`.
    OneU2Plus2U,
}

impl Lemma3Case {
    pub const ALL: [Lemma3Case; 5] = [
        Lemma3Case::Even,
        Lemma3Case::UOnePlus2U,
        Lemma3Case::ThreeU2,
        Lemma3Case::OneU,
        Lemma3Case::OneU2Plus2U,
    ];

    fn residues(self) -> Option<(ResidueMod4, ResidueMod4)> {
        let forms = odd_normal_forms();
        match self {
            Lemma3Case::Even => None,
            Lemma3Case::UOnePlus2U => Some(forms[0]),
            Lemma3Case::ThreeU2 => Some(forms[1]),
            Lemma3Case::OneU => Some(forms[2]),
            Lemma3Case::OneU2Plus2U => Some(forms[3]),
        }
    }

    /// Expected `(v(c4), v(c6))`, and `v(Delta)` when it does not depend on `A`.
    pub fn expected(self) -> (u32, u32, Option<u32>) {
        match self {
            Lemma3Case::Even => (4, 6, None),
            Lemma3Case::UOnePlus2U => (6, 5, Some(4)),
            _ => (5, 5, Some(4)),
        }
    }
}

impl fmt::Display for Lemma3Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.residues() {
            None => f.write_str("2|A, B square"),
            Some((a, b)) => write!(f, "({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma3Sample {
    pub a: GoldenInt,
    pub b: GoldenInt,
    /// `(v(c4), v(c6), v(Delta))`.
    pub valuations: (u32, u32, u32),
    /// `v(A B C)`.
    pub v_abc: u32,
    /// `v(A^2+AB+B^2), v(A^2+AC+C^2), v(B^2+BC+C^2)`.
    pub quadratic_valuations: [u32; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma3Report {
    pub case: Lemma3Case,
    pub samples: Vec<Lemma3Sample>,
    pub mismatches: Vec<Lemma3Sample>,
}

impl Lemma3Report {
    pub fn holds(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// Smallest `v(Delta)` seen among samples with `v(A) >= 11` (even case only).
    pub fn min_delta_valuation_deep(&self) -> Option<u32> {
        self.samples
            .iter()
            .filter(|s| s.v_abc >= 11)
            .map(|s| s.valuations.2)
            .min()
    }
}

fn random_golden(rng: &mut impl Rng, bound: i64) -> GoldenInt {
    GoldenInt::new(rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound))
}

fn lift_with_noise(r: ResidueMod4, rng: &mut impl Rng) -> GoldenInt {
    &r.lift() + &random_golden(rng, 1 << 20).scale(&BigInt::from(4))
}

fn random_unit_mod2(rng: &mut impl Rng) -> GoldenInt {
    loop {
        let w = random_golden(rng, 1 << 20);
        if w.mod4().is_unit() {
            return w;
        }
    }
}

/// Draws `samples` exact pairs `(A, B)` in the given class and compares the
/// valuations of the Frey invariants with the table. In the even case `v(A)`
/// cycles through `2..=12`, so `v(A) in {11, 12}` is always exercised.
pub fn lemma3_verify(case: Lemma3Case, samples: usize, seed: u64) -> Lemma3Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ring = ring_mod4();
    let unit_squares: Vec<ResidueMod4> = {
        let set: BTreeSet<ResidueMod4> = ring.units.iter().map(|&t| t.mul(t)).collect();
        set.into_iter().collect()
    };
    let (e4, e6, e_delta) = case.expected();
    let mut out = Vec::with_capacity(samples);
    let mut mismatches = Vec::new();
    for i in 0..samples {
        let (a, b) = match case.residues() {
            Some((ra, rb)) => (lift_with_noise(ra, &mut rng), lift_with_noise(rb, &mut rng)),
            None => {
                let k = 2 + (i % 11) as u32;
                let a = random_unit_mod2(&mut rng).scale(&BigInt::from(2).pow(k));
                let s = unit_squares[rng.gen_range(0..unit_squares.len())];
                (a, lift_with_noise(s, &mut rng))
            }
        };
        let c = -(&a + &b);
        let inv = frey_invariants(&a, &b).expect("sampled triple is nondegenerate");
        let v = |x: &GoldenInt| x.v_p2().expect("nonzero");
        let v_abc = v(&(&(&a * &b) * &c));
        let quad = |x: &GoldenInt, y: &GoldenInt| v(&(&(&(x * x) + &(x * y)) + &(y * y)));
        let sample = Lemma3Sample {
            valuations: (v(&inv.c4), v(&inv.c6), v(&inv.delta)),
            v_abc,
            quadratic_valuations: [quad(&a, &b), quad(&a, &c), quad(&b, &c)],
            a,
            b,
        };
        let delta_expected = e_delta.unwrap_or(4 + 2 * v_abc);
        let mut ok = sample.valuations == (e4, e6, delta_expected);
        if case == Lemma3Case::OneU2Plus2U {
            ok &= sample.quadratic_valuations == [1, 1, 1];
        }
        if case == Lemma3Case::Even && v_abc >= 11 {
            ok &= sample.valuations.2 >= 26;
        }
        if !ok {
            mismatches.push(sample.clone());
        }
        out.push(sample);
    }
    Lemma3Report {
        case,
        samples: out,
        mismatches,
    }
}

/// How a rational prime decomposes in `Z[phi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitType {
    Split,
    Inert,
    Ramified,
}

impl fmt::Display for SplitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitType::Split => "split",
            SplitType::Inert => "inert",
            SplitType::Ramified => "ramified",
        })
    }
}

/// Splitting of a prime `q`: split iff `q = +-1 mod 5`, ramified iff `q = 5`.
pub fn split_type(q: u64) -> SplitType {
    split_type_from_residue(q == 5, q % 5)
}

pub fn split_type_big(q: &num_bigint::BigUint) -> SplitType {
    let r = (q % 5u32).to_u64().expect("< 5");
    split_type_from_residue(*q == num_bigint::BigUint::from(5u32), r)
}

fn split_type_from_residue(is_five: bool, r: u64) -> SplitType {
    if is_five {
        SplitType::Ramified
    } else if r == 1 || r == 4 {
        SplitType::Split
    } else {
        SplitType::Inert
    }
}
