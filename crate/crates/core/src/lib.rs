//! Witness search and certificate checking for Fermat's equation
//! `a^p + b^p + c^p = 0` over the golden field `Q(sqrt 5)`.
//!
//! An odd prime exponent `p` is settled by an integer `n` such that
//! `q = n p + 1` is a prime splitting in `Z[phi]` and not dividing the Wendt
//! resultant `W_n`; a handful of small exponents additionally need the
//! Frobenius traces of an auxiliary elliptic curve of conductor `P2^3`.
//!
//! Modules, bottom-up:
//! - [`modarith`]: arithmetic modulo odd primes, word-sized and unbounded.
//! - [`primes`]: Miller–Rabin, a segmented sieve, factorization.
//! - [`wendt`]: exact Wendt resultants and the `q | W_n` root test.
//! - [`okring`]: the ring `Z[phi]`, its quotient mod 4, and the 2-adic checks.
//! - [`curve`]: the auxiliary curve, reduction at split primes, point counts.
//! - [`criterion`]: witness search, the shortcut criteria, exceptional pairs.
//! - [`driver`]: range verification with checkpoints and certificate logs.

pub mod modarith;
pub mod primes;
pub mod okring;
pub mod wendt;
pub mod curve;
pub mod criterion;
pub mod driver;

pub use criterion::{Method, WitnessCertificate};
pub use curve::{CurveOverK, TracePair};
pub use driver::{VerifyOptions, VerifySummary};
pub use modarith::{PrimeModulus, Residue};
pub use okring::{FreyInvariants, GoldenInt};
pub use primes::{Factorization, PrimalityMode};
pub use wendt::WendtValue;
