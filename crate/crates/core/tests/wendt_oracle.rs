//! Independent route to `W_n`: since `X^n - 1` is monic,
//! `Res(X^n - 1, g) = prod_{d | n} N(g(zeta_d))`, and each norm is the
//! determinant of multiplication by `g` on `Z[x] / Phi_d`. The determinant is
//! taken with Bareiss elimination, sharing nothing with the subresultant code.

use flt5_core::wendt::wendt_exact;
use num_bigint::BigInt;
use num_traits::{One, Zero};

type Poly = Vec<BigInt>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// Division by a monic divisor; returns (quotient, remainder).
fn divrem_monic(a: &Poly, m: &Poly) -> (Poly, Poly) {
    let dm = m.len() - 1;
    let mut r = a.clone();
    if r.len() <= dm {
        return (vec![], r);
    }
    let mut q = vec![BigInt::zero(); r.len() - dm];
    for k in (dm..r.len()).rev() {
        let c = r[k].clone();
        if c.is_zero() {
            continue;
        }
        q[k - dm] = c.clone();
        for (i, mi) in m.iter().enumerate() {
            r[k - dm + i] -= &c * mi;
        }
    }
    r.truncate(dm);
    (trim(q), trim(r))
}

fn cyclotomic(d: usize) -> Poly {
    let mut num = vec![BigInt::zero(); d + 1];
    num[0] = BigInt::from(-1);
    num[d] = BigInt::one();
    for e in 1..d {
        if d % e == 0 {
            let (q, r) = divrem_monic(&num, &cyclotomic(e));
            assert!(r.is_empty());
            num = q;
        }
    }
    num
}

fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

fn norm_mod_cyclotomic(g: &Poly, d: usize) -> BigInt {
    let phi = cyclotomic(d);
    let deg = phi.len() - 1;
    let mut cols = Vec::with_capacity(deg);
    for i in 0..deg {
        let mut shifted = vec![BigInt::zero(); i];
        shifted.extend(g.iter().cloned());
        let (_, mut r) = divrem_monic(&trim(shifted), &phi);
        r.resize(deg, BigInt::zero());
        cols.push(r);
    }
    let matrix: Vec<Vec<BigInt>> = (0..deg)
        .map(|row| (0..deg).map(|col| cols[col][row].clone()).collect())
        .collect();
    bareiss_det(matrix)
}

fn wendt_by_cyclotomic_norms(n: usize) -> BigInt {
    let mut g = vec![BigInt::zero(); n + 1];
    let mut binom = BigInt::one();
    for (k, slot) in g.iter_mut().enumerate() {
        *slot = binom.clone();
        binom = binom * (n - k) / (k + 1);
    }
    g[0] -= 1;
    (1..=n)
        .filter(|d| n % d == 0)
        .map(|d| norm_mod_cyclotomic(&g, d))
        .product()
}

#[test]
fn oracle_reproduces_known_values() {
    let b = |x: i64| BigInt::from(x);
    assert_eq!(wendt_by_cyclotomic_norms(2), b(-3));
    assert_eq!(
        wendt_by_cyclotomic_norms(8),
        -(b(3).pow(7) * b(5).pow(3) * b(17).pow(3))
    );
    assert_eq!(
        wendt_by_cyclotomic_norms(10),
        b(-3) * b(11).pow(9) * b(31).pow(3)
    );
}

#[test]
fn subresultant_matches_cyclotomic_oracle() {
    for n in 1..=30u64 {
        assert_eq!(
            wendt_exact(n).unwrap().value,
            wendt_by_cyclotomic_norms(n as usize),
            "n={n}"
        );
    }
}
