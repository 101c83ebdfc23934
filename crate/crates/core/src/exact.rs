//! Rational arithmetic with a cheap normalization step.
//!
//! `BigRational`'s own operators reduce through a binary gcd that reallocates
//! on every shift, which dominates when millions of ~100-bit fractions are
//! combined. These helpers run Euclid on `BigUint` until both operands fit in
//! a `u128`, finish with a word-sized binary gcd, and build the result with
//! `new_raw`. Results are always in lowest terms with a positive denominator,
//! so they compare and hash exactly like values from `Ratio::new`.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

use crate::geometry::Rational;

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

pub(crate) fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    let (mut a, mut b) = (a.clone(), b.clone());
    loop {
        if let (Some(x), Some(y)) = (a.to_u128(), b.to_u128()) {
            return BigUint::from(gcd_u128(x, y));
        }
        if b.is_zero() {
            return a;
        }
        let r = &a % &b;
        a = b;
        b = r;
    }
}

/// `num / den` in lowest terms. Panics if `den` is zero.
pub(crate) fn reduce(num: BigInt, den: BigInt) -> Rational {
    assert!(!den.is_zero(), "zero denominator");
    let (num, den) = if den.sign() == Sign::Minus {
        (-num, -den)
    } else {
        (num, den)
    };
    let g = gcd(num.magnitude(), den.magnitude());
    if g.is_one() {
        return Rational::new_raw(num, den);
    }
    let g = BigInt::from(g);
    Rational::new_raw(num / &g, den / &g)
}

pub(crate) fn add(a: &Rational, b: &Rational) -> Rational {
    if a.denom() == b.denom() {
        return reduce(a.numer() + b.numer(), a.denom().clone());
    }
    reduce(
        a.numer() * b.denom() + b.numer() * a.denom(),
        a.denom() * b.denom(),
    )
}

pub(crate) fn sub(a: &Rational, b: &Rational) -> Rational {
    if a.denom() == b.denom() {
        return reduce(a.numer() - b.numer(), a.denom().clone());
    }
    reduce(
        a.numer() * b.denom() - b.numer() * a.denom(),
        a.denom() * b.denom(),
    )
}

pub(crate) fn mul(a: &Rational, b: &Rational) -> Rational {
    reduce(a.numer() * b.numer(), a.denom() * b.denom())
}

/// Order by cross-multiplication; denominators are positive.
pub(crate) fn cmp(a: &Rational, b: &Rational) -> Ordering {
    if a.denom() == b.denom() {
        return a.numer().cmp(b.numer());
    }
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}

pub(crate) fn lt(a: &Rational, b: &Rational) -> bool {
    cmp(a, b) == Ordering::Less
}

pub(crate) fn le(a: &Rational, b: &Rational) -> bool {
    cmp(a, b) != Ordering::Greater
}

/// Panics if `b` is zero.
pub(crate) fn div(a: &Rational, b: &Rational) -> Rational {
    reduce(a.numer() * b.denom(), a.denom() * b.numer())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;

    #[test]
    fn small_gcds() {
        assert_eq!(gcd_u128(0, 0), 0);
        assert_eq!(gcd_u128(0, 9), 9);
        assert_eq!(gcd_u128(12, 18), 6);
        assert_eq!(gcd_u128(1 << 100, 3 << 90), 1 << 90);
    }

    #[test]
    fn wide_gcd_matches_num_integer() {
        use num_integer::Integer;
        let a = BigUint::from(3u32).pow(150) * BigUint::from(1u128 << 100);
        let b = (BigUint::from(3u32).pow(90) * BigUint::from(5u32).pow(70)) << 20;
        assert_eq!(gcd(&a, &b), a.gcd(&b));
    }

    #[test]
    fn operations_agree_with_ratio() {
        let xs = [
            rat(0, 1),
            rat(3, 7),
            rat(-5, 12),
            rat(1, 1),
            rat(22, 6),
            rat(-9, 4),
        ];
        for a in &xs {
            for b in &xs {
                assert_eq!(add(a, b), a + b);
                assert_eq!(sub(a, b), a - b);
                assert_eq!(mul(a, b), a * b);
                assert_eq!(cmp(a, b), a.cmp(b));
                if !b.is_zero() {
                    let q = div(a, b);
                    assert_eq!(q, a / b);
                    assert!(q.denom() > &BigInt::zero());
                }
            }
        }
        let r = reduce(BigInt::from(6), BigInt::from(-4));
        assert_eq!(
            (r.numer().clone(), r.denom().clone()),
            (BigInt::from(-3), BigInt::from(2))
        );
    }
}
