//! Exact rationals, backed by `num_rational::BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn ri(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Very large parts: scale down by a common power of two first.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Exact rational power when the result is rational, e.g. (4/9)^(3/2) = 8/27.
pub fn rat_pow(base: &Rat, exp: &Rat) -> Option<Rat> {
    if exp.is_integer() {
        let e = exp.to_integer().to_i32()?;
        if base.is_zero() && e < 0 {
            return None;
        }
        return Some(num_traits::pow::Pow::pow(base, e));
    }
    let q = exp.denom().to_u32()?;
    if base.is_negative() && q % 2 == 0 {
        return None;
    }
    let root_n = int_nth_root(base.numer(), q)?;
    let root_d = int_nth_root(base.denom(), q)?;
    let root = Rat::new(root_n, root_d);
    let p = exp.numer().to_i32()?;
    if root.is_zero() && p < 0 {
        return None;
    }
    Some(num_traits::pow::Pow::pow(&root, p))
}

/// Exact integer n-th root (odd n allows negative input).
pub fn int_nth_root(a: &BigInt, n: u32) -> Option<BigInt> {
    if n == 0 {
        return None;
    }
    if a.is_negative() {
        if n.is_multiple_of(2) {
            return None;
        }
        return int_nth_root(&-a, n).map(|r| -r);
    }
    let r = a.nth_root(n);
    (num_traits::pow::Pow::pow(&r, n) == *a).then_some(r)
}

pub fn lcm_denoms<'a>(it: impl Iterator<Item = &'a Rat>) -> BigInt {
    it.fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_powers() {
        assert_eq!(rat_pow(&rat(4, 9), &rat(3, 2)), Some(rat(8, 27)));
        assert_eq!(rat_pow(&rat(-8, 1), &rat(1, 3)), Some(ri(-2)));
        assert_eq!(rat_pow(&ri(2), &rat(1, 2)), None);
        assert_eq!(rat_pow(&ri(2), &ri(-2)), Some(rat(1, 4)));
    }

    #[test]
    fn float_conversion_of_huge_values() {
        let big = Rat::new(BigInt::from(3) << 2000u32, BigInt::from(2) << 2000u32);
        assert!((rat_to_f64(&big) - 1.5).abs() < 1e-15);
    }
}
