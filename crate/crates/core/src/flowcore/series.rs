//! Truncated Laurent series in one parameter with rational-function coefficients.

use crate::algebra::{ClosedForm, MPoly, Rat, RatFunc, Var};
use crate::error::{Error, Result};
use num_traits::{One, Signed, ToPrimitive};

/// `Σ coeffs[k] t^(val+k)`, known modulo `t^(val+coeffs.len())`.
/// The leading coefficient is nonzero unless the series is pure error term.
#[derive(Clone, Debug, PartialEq)]
pub struct PSeries {
    val: i64,
    coeffs: Vec<RatFunc>,
}

impl PSeries {
    pub fn new(val: i64, mut coeffs: Vec<RatFunc>) -> Self {
        let lead = coeffs.iter().take_while(|c| c.is_zero()).count();
        coeffs.drain(..lead);
        PSeries { val: val + lead as i64, coeffs }
    }

    pub fn constant(c: RatFunc, prec: usize) -> Self {
        if c.is_zero() {
            return PSeries { val: prec as i64, coeffs: Vec::new() };
        }
        PSeries { val: 0, coeffs: vec![c] }.extend_exact(prec)
    }

    /// Pads a series that is known to be exact (a polynomial in t) up to relative precision `n`.
    fn extend_exact(mut self, n: usize) -> Self {
        while self.coeffs.len() < n {
            self.coeffs.push(RatFunc::zero());
        }
        self
    }

    pub fn valuation(&self) -> i64 {
        self.val
    }

    /// Absolute precision: the series is known modulo t^precision.
    pub fn precision(&self) -> i64 {
        self.val + self.coeffs.len() as i64
    }

    pub fn is_undetermined(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `t^k`, or `None` beyond the known precision.
    pub fn coeff(&self, k: i64) -> Option<RatFunc> {
        if k >= self.precision() {
            None
        } else if k < self.val {
            Some(RatFunc::zero())
        } else {
            Some(self.coeffs[(k - self.val) as usize].clone())
        }
    }

    pub fn shift(&self, k: i64) -> PSeries {
        PSeries { val: self.val + k, coeffs: self.coeffs.clone() }
    }

    pub fn truncate(&self, prec: i64) -> PSeries {
        let keep = (prec - self.val).clamp(0, self.coeffs.len() as i64) as usize;
        PSeries::new(self.val, self.coeffs[..keep].to_vec())
    }

    /// Expansion of a polynomial under `v -> v t` for every v in `vars`.
    pub fn from_poly(p: &MPoly, vars: &[Var], n: usize) -> PSeries {
        let parts = p.graded_parts(vars);
        let Some((&lo, _)) = parts.iter().next() else {
            return PSeries { val: n as i64, coeffs: Vec::new() };
        };
        let coeffs = (0..n as u32)
            .map(|k| parts.get(&(lo + k)).map_or_else(RatFunc::zero, |q| RatFunc::from_poly(q.clone())))
            .collect();
        PSeries { val: lo as i64, coeffs }
    }

    pub fn from_ratfunc(r: &RatFunc, vars: &[Var], n: usize) -> Result<PSeries> {
        let num = PSeries::from_poly(r.num(), vars, n);
        let den = PSeries::from_poly(r.den(), vars, n);
        Ok(num.mul(&den.inv()?))
    }

    pub fn add(&self, other: &PSeries) -> PSeries {
        let val = self.val.min(other.val);
        let prec = self.precision().min(other.precision());
        let coeffs = (val..prec)
            .map(|k| &self.coeff(k).unwrap() + &other.coeff(k).unwrap())
            .collect();
        PSeries::new(val, coeffs)
    }

    pub fn neg(&self) -> PSeries {
        PSeries { val: self.val, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &PSeries) -> PSeries {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PSeries) -> PSeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| RatFunc::sum(&(0..=k).map(|j| &self.coeffs[j] * &other.coeffs[k - j]).collect::<Vec<_>>()))
            .collect();
        PSeries::new(self.val + other.val, coeffs)
    }

    pub fn scale(&self, c: &RatFunc) -> PSeries {
        PSeries::new(self.val, self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn inv(&self) -> Result<PSeries> {
        let Some(c0) = self.coeffs.first() else {
            return Err(Error::Domain("inverse of an undetermined series".into()));
        };
        let c0inv = c0.recip()?;
        let mut b: Vec<RatFunc> = vec![c0inv.clone()];
        for k in 1..self.coeffs.len() {
            let s = RatFunc::sum(&(1..=k).map(|j| &self.coeffs[j] * &b[k - j]).collect::<Vec<_>>());
            b.push(-(&s * &c0inv));
        }
        Ok(PSeries { val: -self.val, coeffs: b })
    }

    /// Principal power `self^e`; the leading term must have an exact rational root.
    pub fn pow(&self, e: &Rat) -> Result<PSeries> {
        let Some(c0) = self.coeffs.first() else {
            return Err(Error::Domain("power of an undetermined series".into()));
        };
        let ve = Rat::from_integer(self.val.into()) * e;
        if !ve.is_integer() {
            return Err(Error::Branch(format!("t^{} has no rational power {e}", self.val)));
        }
        let lead = ClosedForm::Rational(c0.clone()).pow(e)?;
        let b0 = lead
            .as_rational()
            .cloned()
            .ok_or_else(|| Error::Branch(format!("leading coefficient {c0} has no rational power {e}")))?;
        // b_k = 1/(k a_0) Σ_{j=1..k} (j(e+1) - k) a_j b_{k-j}
        let a = &self.coeffs;
        let a0inv = c0.recip()?;
        let mut b = vec![b0];
        for k in 1..a.len() {
            let terms: Vec<RatFunc> = (1..=k)
                .map(|j| {
                    let w = Rat::from_integer(j.into()) * (e + Rat::one()) - Rat::from_integer(k.into());
                    (&a[j] * &b[k - j]).scale(&w)
                })
                .collect();
            let s = RatFunc::sum(&terms).scale(&Rat::new(1.into(), (k as i64).into()));
            b.push(&s * &a0inv);
        }
        let val = ve.to_integer().to_i64().ok_or_else(|| Error::Domain("exponent too large".into()))?;
        Ok(PSeries { val, coeffs: b })
    }

    /// Expansion of a closed form under `v -> v t` for every v in `vars`.
    pub fn from_closed(f: &ClosedForm, vars: &[Var], n: usize) -> Result<PSeries> {
        match f {
            ClosedForm::Rational(r) => PSeries::from_ratfunc(r, vars, n),
            ClosedForm::Sum(ts) => {
                let mut acc: Option<PSeries> = None;
                for t in ts {
                    // Cancellation in sums can cost precision; expand terms generously.
                    let s = PSeries::from_closed(t, vars, n + 2)?;
                    acc = Some(match acc {
                        None => s,
                        Some(a) => a.add(&s),
                    });
                }
                Ok(acc.unwrap_or_else(|| PSeries::constant(RatFunc::zero(), n)))
            }
            ClosedForm::Product(fs) => {
                let mut acc = PSeries::constant(RatFunc::one(), n);
                for f in fs {
                    acc = acc.mul(&PSeries::from_closed(f, vars, n)?);
                }
                Ok(acc)
            }
            ClosedForm::Power(b, e) => {
                if e.is_negative() && e.is_integer() {
                    return PSeries::from_closed(b, vars, n)?.inv()?.pow(&-e);
                }
                PSeries::from_closed(b, vars, n)?.pow(e)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_any, parse_ratfunc};

    const XY: &[Var] = &[Var::X, Var::Y];

    #[test]
    fn geometric_series() {
        let s = PSeries::from_ratfunc(&parse_ratfunc("x/(1-x)").unwrap(), XY, 4).unwrap();
        assert_eq!(s.valuation(), 1);
        assert_eq!(s.coeff(3).unwrap(), parse_ratfunc("x^3").unwrap());
        assert_eq!(s.precision(), 5);
    }

    #[test]
    fn fractional_power() {
        let f = parse_any("(y+1)^(4/3)").unwrap();
        let s = PSeries::from_closed(&f, XY, 3).unwrap();
        assert_eq!(s.coeff(0).unwrap(), RatFunc::one());
        assert_eq!(s.coeff(1).unwrap(), parse_ratfunc("4/3*y").unwrap());
        assert_eq!(s.coeff(2).unwrap(), parse_ratfunc("2/9*y^2").unwrap());
        let g = parse_any("(x^3+y^4)^(1/3)").unwrap();
        let s = PSeries::from_closed(&g, XY, 2).unwrap();
        assert_eq!(s.valuation(), 1);
        assert_eq!(s.coeff(1).unwrap(), RatFunc::var(Var::X));
        assert_eq!(s.coeff(2).unwrap(), parse_ratfunc("1/3*y^4/x^2").unwrap());
    }

    #[test]
    fn inverse_round_trip() {
        let s = PSeries::from_ratfunc(&parse_ratfunc("1+x+y^2").unwrap(), XY, 6).unwrap();
        let p = s.mul(&s.inv().unwrap());
        assert_eq!(p.coeff(0).unwrap(), RatFunc::one());
        for k in 1..6 {
            assert!(p.coeff(k).unwrap().is_zero());
        }
    }
}
