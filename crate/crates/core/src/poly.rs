//! Rational-root extraction for exact polynomials, used to split
//! characteristic polynomials over the rationals.

use crate::rat::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationFailed;

/// All rational roots of `sum coeffs[k] x^k` with multiplicities, sorted.
/// Roots are found by the rational-root theorem on the primitive integer
/// form and removed by exact deflation.
pub fn rational_roots(coeffs: &[Rat]) -> Result<Vec<(Rat, usize)>, FactorizationFailed> {
    let mut poly: Vec<Rat> = coeffs.to_vec();
    while poly.last().is_some_and(Rat::is_zero) {
        poly.pop();
    }
    assert!(!poly.is_empty(), "zero polynomial");

    let mut roots: Vec<(Rat, usize)> = Vec::new();

    // Roots at zero.
    let mut zero_mult = 0usize;
    while poly.len() > 1 && poly[0].is_zero() {
        poly.remove(0);
        zero_mult += 1;
    }
    if zero_mult > 0 {
        roots.push((Rat::zero(), zero_mult));
    }

    while poly.len() > 1 {
        match find_root(&poly)? {
            None => break,
            Some(r) => {
                let mut mult = 0usize;
                while let Some(q) = deflate(&poly, &r) {
                    poly = q;
                    mult += 1;
                }
                roots.push((r, mult));
            }
        }
    }

    roots.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(roots)
}

/// Divides by `(x - r)` when `r` is a root; `None` otherwise.
fn deflate(poly: &[Rat], r: &Rat) -> Option<Vec<Rat>> {
    let n = poly.len() - 1;
    let mut quotient = vec![Rat::zero(); n];
    let mut acc = Rat::zero();
    for k in (0..=n).rev() {
        acc = &poly[k] + &(&acc * r);
        if k > 0 {
            quotient[k - 1] = acc.clone();
        }
    }
    if acc.is_zero() {
        Some(quotient)
    } else {
        None
    }
}

fn eval(poly: &[Rat], x: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in poly.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

fn find_root(poly: &[Rat]) -> Result<Option<Rat>, FactorizationFailed> {
    // Clear denominators to get integer coefficients.
    let mut den = BigInt::one();
    for c in poly {
        den = den.lcm(c.denom());
    }
    let int_coeffs: Vec<BigInt> = poly
        .iter()
        .map(|c| c.numer() * (&den / c.denom()))
        .collect();
    let a0 = int_coeffs.first().unwrap().clone();
    let an = int_coeffs.last().unwrap().clone();
    debug_assert!(!a0.is_zero() && !an.is_zero());

    let num_divs = divisors(&a0.abs())?;
    let den_divs = divisors(&an.abs())?;
    for u in &num_divs {
        for v in &den_divs {
            if u.gcd(v) != BigInt::one() {
                continue;
            }
            for sign in [1i64, -1] {
                let cand = Rat::from_big(u * BigInt::from(sign), v.clone());
                if eval(poly, &cand).is_zero() {
                    return Ok(Some(cand));
                }
            }
        }
    }
    Ok(None)
}

const DIVISOR_CAP: usize = 1 << 16;

/// All positive divisors of `n > 0`, via trial division plus Pollard-Brent
/// rho for large cofactors.
fn divisors(n: &BigInt) -> Result<Vec<BigInt>, FactorizationFailed> {
    assert!(n.is_positive() || n.is_one());
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut rest = n.clone();
    let mut d = BigInt::from(2u32);
    while (&d * &d) <= rest && d < BigInt::from(1u32 << 16) {
        if (&rest % &d).is_zero() {
            let mut e = 0u32;
            while (&rest % &d).is_zero() {
                rest /= &d;
                e += 1;
            }
            factors.push((d.clone(), e));
        }
        d += 1u32;
    }
    if !rest.is_one() {
        factor_large(&rest, &mut factors)?;
    }

    let mut divs = vec![BigInt::one()];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(divs.len() * (e as usize + 1));
        for d in &divs {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        divs = next;
        if divs.len() > DIVISOR_CAP {
            return Err(FactorizationFailed);
        }
    }
    divs.sort();
    divs.dedup();
    Ok(divs)
}

fn factor_large(n: &BigInt, out: &mut Vec<(BigInt, u32)>) -> Result<(), FactorizationFailed> {
    if n.is_one() {
        return Ok(());
    }
    if is_probable_prime(n) {
        merge_factor(out, n.clone());
        return Ok(());
    }
    let d = pollard_brent(n).ok_or(FactorizationFailed)?;
    factor_large(&d, out)?;
    factor_large(&(n / &d), out)
}

fn merge_factor(out: &mut Vec<(BigInt, u32)>, p: BigInt) {
    for (q, e) in out.iter_mut() {
        if *q == p {
            *e += 1;
            return;
        }
    }
    out.push((p, 1));
}

/// Deterministic Miller-Rabin for machine-word sized inputs.
pub fn is_prime_u64(n: u64) -> bool {
    is_probable_prime(&BigInt::from(n))
}

fn is_probable_prime(n: &BigInt) -> bool {
    if n < &BigInt::from(2u32) {
        return false;
    }
    for p in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let p = BigInt::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - BigInt::one();
    let mut d = n_minus_1.clone();
    let mut s = 0u32;
    while (&d % 2u32).is_zero() {
        d /= 2u32;
        s += 1;
    }
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = x.modpow(&BigInt::from(2u32), n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: &BigInt) -> Option<BigInt> {
    if (n % 2u32).is_zero() {
        return Some(BigInt::from(2u32));
    }
    for c in 1u32..64 {
        let c = BigInt::from(c);
        let mut x = BigInt::from(2u32);
        let mut y = BigInt::from(2u32);
        let mut d = BigInt::one();
        let f = |v: &BigInt| (v * v + &c) % n;
        let mut iter = 0u64;
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            d = (&x - &y).abs().gcd(n);
            iter += 1;
            if iter > 1 << 22 {
                break;
            }
        }
        if d != *n && !d.is_one() {
            return Some(d);
        }
    }
    None
}
