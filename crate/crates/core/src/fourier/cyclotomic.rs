//! Exact vanishing test for sums of roots of unity.
//!
//! `Σ c_j ζ_q^{a_j} = 0` iff the q-th cyclotomic polynomial divides
//! `Σ c_j x^{a_j}`. With `r = rad(q)` and `k = q / r`, the powers
//! `ζ_q^b (0 <= b < k)` form a basis of `ℚ(ζ_q)` over `ℚ(ζ_r)` and
//! `ζ_q^{b + k e} = ζ_q^b ζ_r^e`, so the test splits into one division by
//! `Φ_r` per residue class `b mod k`. Only `r` has to be small.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Distinct prime factors by trial division.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn mobius(n: u64) -> i32 {
    let mut m = n;
    let mut sign = 1;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if m > 1 {
        sign = -sign;
    }
    sign
}

/// Dense coefficients (lowest degree first) of `Φ_r`, from
/// `Φ_r = Π_{d | r} (x^d − 1)^{μ(r/d)}`.
pub(crate) fn cyclotomic_polynomial(r: u64) -> Vec<i128> {
    let divisors: Vec<u64> = (1..=r).filter(|d| r % d == 0).collect();
    let mut poly: Vec<i128> = vec![1];
    for &d in &divisors {
        if mobius(r / d) == 1 {
            // multiply by x^d − 1
            let d = d as usize;
            let mut next = vec![0i128; poly.len() + d];
            for (i, &c) in poly.iter().enumerate() {
                next[i + d] += c;
                next[i] -= c;
            }
            poly = next;
        }
    }
    for &d in &divisors {
        if mobius(r / d) == -1 {
            // exact division by x^d − 1
            let d = d as usize;
            let len = poly.len() - d;
            let mut q = vec![0i128; len];
            for i in 0..len {
                let prev = if i >= d { q[i - d] } else { 0 };
                q[i] = prev - poly[i];
            }
            poly = q;
        }
    }
    poly
}

fn divisible_by(mut p: Vec<i128>, phi: &[i128]) -> bool {
    let deg = phi.len() - 1;
    for i in (deg..p.len()).rev() {
        let c = p[i];
        if c == 0 {
            continue;
        }
        for (t, &f) in phi.iter().enumerate() {
            p[i - deg + t] -= c * f;
        }
    }
    p.iter().all(|&c| c == 0)
}

/// Whether `Σ_j ζ_q^{a_j}` vanishes, for exponents `0 <= a_j < q`.
/// `primes` must contain every prime factor of `q`. Returns `None` when
/// `rad(q)` exceeds `max_radical`.
pub(crate) fn root_sum_vanishes(exponents: &[BigInt], q: &BigInt, primes: &[u64], max_radical: u64) -> Option<bool> {
    if q.is_one() {
        return Some(exponents.is_empty());
    }
    let mut radical: u64 = 1;
    let mut rest = q.clone();
    for &p in primes {
        let bp = BigInt::from(p);
        if rest.is_multiple_of(&bp) {
            radical = radical.checked_mul(p)?;
            while rest.is_multiple_of(&bp) {
                rest /= &bp;
            }
        }
    }
    if !rest.is_one() || radical > max_radical {
        return None;
    }
    let k = q / BigInt::from(radical);
    let r = radical as usize;
    let mut groups: BTreeMap<BigInt, Vec<i128>> = BTreeMap::new();
    for a in exponents {
        let (e, b) = a.div_rem(&k);
        let e = e.to_usize().expect("exponent below q");
        groups.entry(b).or_insert_with(|| vec![0; r])[e] += 1;
    }
    let phi = cyclotomic_polynomial(radical);
    Some(groups.into_values().all(|g| g.iter().all(Zero::is_zero) || divisible_by(g, &phi)))
}
