//! Canonical multivariate rational functions.
//!
//! Invariant: gcd(num, den) = 1 and the denominator has graded-lex leading
//! coefficient +1. Two values are equal iff their fields are equal.

use super::gcd::gcd;
use super::poly::{Monomial, MPoly};
use super::rat::Rat;
use super::var::Var;
use crate::error::{Error, Result};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatFunc {
    num: MPoly,
    den: MPoly,
}

impl RatFunc {
    pub fn new(num: MPoly, den: MPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: MPoly, den: MPoly) -> Self {
        if num.is_zero() {
            return RatFunc::zero();
        }
        let g = gcd(&num, &den);
        let (n, d) = if g.is_one() { (num, den) } else { (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap()) };
        Self::scaled(n, d)
    }

    // Fix the scale only; caller guarantees coprimality.
    fn scaled(num: MPoly, den: MPoly) -> Self {
        let lc = den.lc();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let s = lc.recip();
            RatFunc { num: num.scale(&s), den: den.scale(&s) }
        }
    }

    pub fn zero() -> Self {
        RatFunc { num: MPoly::zero(), den: MPoly::one() }
    }

    pub fn one() -> Self {
        RatFunc::from_poly(MPoly::one())
    }

    pub fn constant(c: Rat) -> Self {
        RatFunc::from_poly(MPoly::constant(c))
    }

    pub fn int(c: i64) -> Self {
        RatFunc::from_poly(MPoly::int(c))
    }

    pub fn var(v: Var) -> Self {
        RatFunc::from_poly(MPoly::var(v))
    }

    pub fn from_poly(p: MPoly) -> Self {
        RatFunc { num: p, den: MPoly::one() }
    }

    pub fn num(&self) -> &MPoly {
        &self.num
    }

    pub fn den(&self) -> &MPoly {
        &self.den
    }

    pub fn into_parts(self) -> (MPoly, MPoly) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<Rat> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    pub fn scale(&self, c: &Rat) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn recip(&self) -> Result<RatFunc> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::scaled(self.den.clone(), self.num.clone()))
    }

    pub fn pow(&self, k: i64) -> Result<RatFunc> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let e = k.unsigned_abs() as u32;
        Ok(RatFunc { num: base.num.pow(e), den: base.den.pow(e) })
    }

    pub fn checked_div(&self, other: &RatFunc) -> Result<RatFunc> {
        Ok(self * &other.recip()?)
    }

    pub fn diff(&self, v: Var) -> RatFunc {
        if self.den.is_one() {
            return RatFunc::from_poly(self.num.diff(v));
        }
        let dn = self.num.diff(v);
        let dd = self.den.diff(v);
        if dd.is_zero() {
            return RatFunc::reduce(dn, self.den.clone());
        }
        // (n' d - n d') / d^2; any common factor divides d.
        let t = &(&dn * &self.den) - &(&self.num * &dd);
        if t.is_zero() {
            return RatFunc::zero();
        }
        let g = gcd(&t, &self.den);
        let t = t.div_exact(&g).unwrap();
        let d1 = self.den.div_exact(&g).unwrap();
        RatFunc::reduce(t, &d1 * &self.den)
    }

    /// Homogeneity degree when both numerator and denominator are homogeneous.
    pub fn homogeneity_degree(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        Some(self.num.homogeneous_degree()? as i64 - self.den.homogeneous_degree()? as i64)
    }

    /// Simultaneous substitution of variables by rational functions.
    pub fn substitute(&self, map: &BTreeMap<Var, RatFunc>) -> Result<RatFunc> {
        let (n, d) = self.substitute_raw(map)?;
        RatFunc::new(n, d)
    }

    /// Substitution returning an unreduced (numerator, denominator) pair.
    pub fn substitute_raw(&self, map: &BTreeMap<Var, RatFunc>) -> Result<(MPoly, MPoly)> {
        // Variables whose images share a denominator are homogenized together.
        let mut groups: Vec<(MPoly, Vec<Var>)> = Vec::new();
        for (v, img) in map {
            match groups.iter_mut().find(|(b, _)| b == img.den()) {
                Some((_, vs)) => vs.push(*v),
                None => groups.push((img.den().clone(), vec![*v])),
            }
        }
        let (nn, ne) = hom_subst(&self.num, map, &groups);
        let (dn, de) = hom_subst(&self.den, map, &groups);
        if dn.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // self(X) = (nn / Π b^ne) / (dn / Π b^de)
        let mut num = nn;
        let mut den = dn;
        for (g, (b, _)) in groups.iter().enumerate() {
            let (en, ed) = (ne[g], de[g]);
            if b.is_one() || en == ed {
                continue;
            }
            if ed > en {
                num = &num * &b.pow(ed - en);
            } else {
                den = &den * &b.pow(en - ed);
            }
        }
        Ok((num, den))
    }

    /// Replace v by v*s for every v in `vars`.
    pub fn scale_vars(&self, vars: &[Var], s: Var) -> RatFunc {
        let n = self.num.scale_vars(vars, s);
        let d = self.den.scale_vars(vars, s);
        // Scaling is invertible over ℚ(s); only a power of s can become common.
        let k = n.monomial_content().exp(s).min(d.monomial_content().exp(s));
        let m = Monomial::var_pow(s, k);
        RatFunc::scaled(n.div_monomial(&m).unwrap(), d.div_monomial(&m).unwrap())
    }

    pub fn eval_rat(&self, point: &BTreeMap<Var, Rat>) -> Result<Rat> {
        let n = self.num.eval_rat(point).ok_or_else(|| Error::UnknownVariable("unbound".into()))?;
        let d = self.den.eval_rat(point).ok_or_else(|| Error::UnknownVariable("unbound".into()))?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(n / d)
    }

    pub fn eval_f64(&self, point: &dyn Fn(Var) -> f64) -> f64 {
        self.num.eval_f64(point) / self.den.eval_f64(point)
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> RatFunc {
        RatFunc::scaled(self.num.rename(map), self.den.rename(map))
    }

    /// Sum of many terms over a common denominator, reduced once.
    pub fn sum<'a>(items: impl IntoIterator<Item = &'a RatFunc>) -> RatFunc {
        items.into_iter().fold(RatFunc::zero(), |acc, t| &acc + t)
    }
}

/// Homogenized substitution: returns (P, e) with p(X) = P / Π b_g^{e_g} over denominator groups.
fn hom_subst(p: &MPoly, map: &BTreeMap<Var, RatFunc>, groups: &[(MPoly, Vec<Var>)]) -> (MPoly, Vec<u32>) {
    let group_of: BTreeMap<Var, usize> =
        groups.iter().enumerate().flat_map(|(g, (_, vs))| vs.iter().map(move |&v| (v, g))).collect();
    let gdeg = |m: &Monomial, g: usize| -> u32 { m.pairs().filter(|(v, _)| group_of.get(v) == Some(&g)).map(|(_, e)| e).sum() };
    let e: Vec<u32> = (0..groups.len()).map(|g| p.terms().map(|(m, _)| gdeg(m, g)).max().unwrap_or(0)).collect();
    let mut num_cache: BTreeMap<(Var, u32), MPoly> = BTreeMap::new();
    let mut den_cache: BTreeMap<(usize, u32), MPoly> = BTreeMap::new();
    let mut out = MPoly::zero();
    for (m, c) in p.terms() {
        let mut t = MPoly::constant(c.clone());
        let mut keep = Monomial::one();
        for (v, k) in m.pairs() {
            match map.get(&v) {
                Some(img) => {
                    let f = num_cache.entry((v, k)).or_insert_with(|| img.num().pow(k));
                    t = &t * f;
                }
                None => keep = keep.mul(&Monomial::var_pow(v, k)),
            }
        }
        for (g, (b, _)) in groups.iter().enumerate() {
            let k = e[g] - gdeg(m, g);
            if k > 0 && !b.is_one() {
                let f = den_cache.entry((g, k)).or_insert_with(|| b.pow(k));
                t = &t * f;
            }
        }
        out += &t.mul_monomial(&keep);
    }
    (out, e)
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return RatFunc::reduce(&self.num + &rhs.num, self.den.clone());
        }
        if self.den.is_one() {
            return RatFunc { num: &(&self.num * &rhs.den) + &rhs.num, den: rhs.den.clone() };
        }
        if rhs.den.is_one() {
            return RatFunc { num: &self.num + &(&rhs.num * &self.den), den: self.den.clone() };
        }
        let g = gcd(&self.den, &rhs.den);
        let b1 = self.den.div_exact(&g).unwrap();
        let d1 = rhs.den.div_exact(&g).unwrap();
        let t = &(&self.num * &d1) + &(&rhs.num * &b1);
        if t.is_zero() {
            return RatFunc::zero();
        }
        if g.is_one() {
            return RatFunc::scaled(t, &self.den * &rhs.den);
        }
        let g2 = gcd(&t, &g);
        let t = t.div_exact(&g2).unwrap();
        let den = &b1 * &rhs.den.div_exact(&g2).unwrap();
        RatFunc::scaled(t, den)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.is_zero() || rhs.is_zero() {
            return RatFunc::zero();
        }
        if let Some(c) = self.constant_value() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.constant_value() {
            return self.scale(&c);
        }
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let (a, d) = if g1.is_one() {
            (self.num.clone(), rhs.den.clone())
        } else {
            (self.num.div_exact(&g1).unwrap(), rhs.den.div_exact(&g1).unwrap())
        };
        let (c, b) = if g2.is_one() {
            (rhs.num.clone(), self.den.clone())
        } else {
            (rhs.num.div_exact(&g2).unwrap(), self.den.div_exact(&g2).unwrap())
        };
        RatFunc::scaled(&a * &c, &b * &d)
    }
}

impl Div for &RatFunc {
    type Output = RatFunc;
    /// Panics on division by zero; use `checked_div` for fallible division.
    fn div(self, rhs: &RatFunc) -> RatFunc {
        self.checked_div(rhs).expect("division by the zero rational function")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for RatFunc {
            type Output = RatFunc;
            fn $f(self, rhs: RatFunc) -> RatFunc {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        -&self
    }
}

impl From<MPoly> for RatFunc {
    fn from(p: MPoly) -> Self {
        RatFunc::from_poly(p)
    }
}

fn is_bare_power(p: &MPoly) -> bool {
    p.nterms() == 1 && {
        let (m, c) = p.leading().unwrap();
        c.is_one() && m.pairs().count() == 1
    }
}

fn is_single_term(p: &MPoly) -> bool {
    p.nterms() <= 1
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if is_single_term(&self.num) {
            write!(f, "{}", self.num)?;
        } else {
            write!(f, "({})", self.num)?;
        }
        if is_bare_power(&self.den) {
            write!(f, "/{}", self.den)
        } else {
            write!(f, "/({})", self.den)
        }
    }
}
