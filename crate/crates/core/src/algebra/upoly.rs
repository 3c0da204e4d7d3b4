//! Dense univariate polynomials over ℚ.

use super::poly::{Monomial, MPoly};
use super::rat::Rat;
use super::var::Var;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficients in ascending order, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct UPoly(Vec<Rat>);

impl UPoly {
    pub fn new(mut c: Vec<Rat>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn zero() -> Self {
        UPoly(Vec::new())
    }

    pub fn one() -> Self {
        UPoly(vec![Rat::one()])
    }

    pub fn constant(c: Rat) -> Self {
        UPoly::new(vec![c])
    }

    pub fn x() -> Self {
        UPoly(vec![Rat::zero(), Rat::one()])
    }

    pub fn from_ints(c: &[i64]) -> Self {
        UPoly::new(c.iter().map(|&k| Rat::from_integer(BigInt::from(k))).collect())
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.0
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.0.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports -1.
    pub fn degree(&self) -> i64 {
        self.0.len() as i64 - 1
    }

    pub fn lc(&self) -> Rat {
        self.0.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return UPoly::zero();
        }
        self.scale(&self.lc().recip())
    }

    pub fn scale(&self, c: &Rat) -> UPoly {
        UPoly::new(self.0.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.0.iter().enumerate().skip(1).map(|(k, c)| c * Rat::from_integer(BigInt::from(k))).collect(),
        )
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.0.iter().rev().fold(Rat::zero(), |acc, c| acc * x + c)
    }

    pub fn pow(&self, k: u32) -> UPoly {
        (0..k).fold(UPoly::one(), |acc, _| &acc * self)
    }

    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.degree() as usize;
        let inv = d.lc().recip();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (UPoly::zero(), self.clone());
        }
        let mut q = vec![Rat::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] * &inv;
            if !c.is_zero() {
                for (j, dc) in d.0.iter().enumerate() {
                    r[i + j] -= &c * dc;
                }
            }
            q[i] = c;
        }
        r.truncate(dd);
        (UPoly::new(q), UPoly::new(r))
    }

    pub fn rem(&self, d: &UPoly) -> UPoly {
        self.div_rem(d).1
    }

    pub fn div_exact(&self, d: &UPoly) -> Option<UPoly> {
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }

    /// Monic GCD.
    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Extended Euclid: returns (g, s, t) with s·self + t·other = g (monic).
    pub fn ext_gcd(&self, other: &UPoly) -> (UPoly, UPoly, UPoly) {
        let (mut r0, mut r1) = (self.clone(), other.clone());
        let (mut s0, mut s1) = (UPoly::one(), UPoly::zero());
        let (mut t0, mut t1) = (UPoly::zero(), UPoly::one());
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s = &s0 - &(&q * &s1);
            let t = &t0 - &(&q * &t1);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            t0 = std::mem::replace(&mut t1, t);
        }
        let inv = r0.lc().recip();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    /// Inverse of `self` modulo `m` when coprime.
    pub fn inverse_mod(&self, m: &UPoly) -> Option<UPoly> {
        let (g, s, _) = self.rem(m).ext_gcd(m);
        (g.degree() == 0).then(|| s.rem(m))
    }

    /// Yun's square-free decomposition: monic factors f_i with self = c·∏ f_i^i.
    pub fn squarefree(&self) -> Vec<(UPoly, u32)> {
        let mut out = Vec::new();
        if self.degree() < 1 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let mut a = f.gcd(&df);
        let mut b = f.div_exact(&a).unwrap();
        let mut c = df.div_exact(&a).unwrap();
        let mut d = &c - &b.derivative();
        let mut i = 1;
        while b.degree() > 0 {
            a = b.gcd(&d);
            if a.degree() > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_exact(&a).unwrap();
            c = d.div_exact(&a).unwrap();
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    pub fn from_mpoly(p: &MPoly, v: Var) -> Result<UPoly> {
        let mut c = vec![Rat::zero(); p.degree_in(v) as usize + 1];
        for (m, a) in p.terms() {
            let (e, rest) = m.split(v);
            if !rest.is_one() {
                return Err(Error::Domain(format!("`{p}` is not univariate in {v}")));
            }
            c[e as usize] = a.clone();
        }
        Ok(UPoly::new(c))
    }

    pub fn to_mpoly(&self, v: Var) -> MPoly {
        MPoly::from_terms(self.0.iter().enumerate().map(|(k, c)| (Monomial::var_pow(v, k as u32), c.clone())))
    }

    /// Integer primitive version with positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        let p = self.to_mpoly(Var::X).primitive();
        let u = UPoly::from_mpoly(&p, Var::X).unwrap();
        u.0.iter().map(|c| c.to_integer()).collect()
    }
}

impl Add for &UPoly {
    type Output = UPoly;
    fn add(self, rhs: &UPoly) -> UPoly {
        let n = self.0.len().max(rhs.0.len());
        UPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &UPoly {
    type Output = UPoly;
    fn sub(self, rhs: &UPoly) -> UPoly {
        let n = self.0.len().max(rhs.0.len());
        UPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &UPoly {
    type Output = UPoly;
    fn neg(self) -> UPoly {
        UPoly(self.0.iter().map(|c| -c).collect())
    }
}

impl Mul for &UPoly {
    type Output = UPoly;
    fn mul(self, rhs: &UPoly) -> UPoly {
        if self.is_zero() || rhs.is_zero() {
            return UPoly::zero();
        }
        let mut c = vec![Rat::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        UPoly::new(c)
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_mpoly(Var::X))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_and_gcd() {
        let a = UPoly::from_ints(&[-1, 0, 1]);
        let b = UPoly::from_ints(&[1, 1]);
        assert_eq!(a.div_exact(&b).unwrap(), UPoly::from_ints(&[-1, 1]));
        assert_eq!(a.gcd(&UPoly::from_ints(&[-1, 1])), UPoly::from_ints(&[-1, 1]));
        let (g, s, t) = a.ext_gcd(&UPoly::from_ints(&[2, 1]));
        assert_eq!(g, UPoly::one());
        assert_eq!(&(&s * &a) + &(&t * &UPoly::from_ints(&[2, 1])), UPoly::one());
    }

    #[test]
    fn yun() {
        // (x-1)^3 (x+2)
        let p = &UPoly::from_ints(&[-1, 1]).pow(3) * &UPoly::from_ints(&[2, 1]);
        let sf = p.squarefree();
        assert_eq!(sf, vec![(UPoly::from_ints(&[2, 1]), 1), (UPoly::from_ints(&[-1, 1]), 3)]);
    }
}
