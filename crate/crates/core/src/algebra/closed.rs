//! Expressions with rational-exponent powers over rational-function leaves.

use super::poly::fmt_rat;
use super::rat::{rat_pow, rat_to_f64, Rat};
use super::ratfunc::RatFunc;
use super::var::Var;
use crate::error::{Error, Result};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum ClosedForm {
    Rational(RatFunc),
    Sum(Vec<ClosedForm>),
    Product(Vec<ClosedForm>),
    /// Base raised to an exact rational exponent. Integer exponents only
    /// survive here when the base itself is not rational.
    Power(Box<ClosedForm>, Rat),
}

impl From<RatFunc> for ClosedForm {
    fn from(r: RatFunc) -> Self {
        ClosedForm::Rational(r)
    }
}

impl ClosedForm {
    pub fn zero() -> Self {
        ClosedForm::Rational(RatFunc::zero())
    }

    pub fn one() -> Self {
        ClosedForm::Rational(RatFunc::one())
    }

    pub fn var(v: Var) -> Self {
        ClosedForm::Rational(RatFunc::var(v))
    }

    pub fn constant(c: Rat) -> Self {
        ClosedForm::Rational(RatFunc::constant(c))
    }

    pub fn as_rational(&self) -> Option<&RatFunc> {
        match self {
            ClosedForm::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn to_ratfunc(&self) -> Result<RatFunc> {
        self.as_rational().cloned().ok_or_else(|| Error::NotRational(self.to_string()))
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, ClosedForm::Rational(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ClosedForm::Rational(r) if r.is_zero())
    }

    pub fn add(&self, other: &ClosedForm) -> ClosedForm {
        ClosedForm::sum_of([self.clone(), other.clone()])
    }

    pub fn sub(&self, other: &ClosedForm) -> ClosedForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ClosedForm {
        self.mul(&ClosedForm::constant(-Rat::one()))
    }

    pub fn mul(&self, other: &ClosedForm) -> ClosedForm {
        ClosedForm::product_of([self.clone(), other.clone()])
    }

    pub fn div(&self, other: &ClosedForm) -> Result<ClosedForm> {
        Ok(self.mul(&other.pow(&-Rat::one())?))
    }

    /// Sum with rational terms folded together.
    pub fn sum_of(items: impl IntoIterator<Item = ClosedForm>) -> ClosedForm {
        let mut rational = RatFunc::zero();
        let mut rest = Vec::new();
        for it in items {
            match it {
                ClosedForm::Rational(r) => rational = &rational + &r,
                ClosedForm::Sum(v) => {
                    for t in v {
                        match t {
                            ClosedForm::Rational(r) => rational = &rational + &r,
                            t => rest.push(t),
                        }
                    }
                }
                t => rest.push(t),
            }
        }
        if rest.is_empty() {
            return ClosedForm::Rational(rational);
        }
        if !rational.is_zero() {
            rest.insert(0, ClosedForm::Rational(rational));
        }
        if rest.len() == 1 {
            rest.pop().unwrap()
        } else {
            ClosedForm::Sum(rest)
        }
    }

    /// Product with rational factors folded and equal power bases merged.
    pub fn product_of(items: impl IntoIterator<Item = ClosedForm>) -> ClosedForm {
        let mut rational = RatFunc::one();
        let mut powers: Vec<(ClosedForm, Rat)> = Vec::new();
        let mut push = |f: ClosedForm, rational: &mut RatFunc| match f {
            ClosedForm::Rational(r) => *rational = &*rational * &r,
            ClosedForm::Power(b, e) => {
                if let Some(slot) = powers.iter_mut().find(|(pb, _)| *pb == *b) {
                    slot.1 += e;
                } else {
                    powers.push((*b, e));
                }
            }
            other => {
                if let Some(slot) = powers.iter_mut().find(|(pb, _)| *pb == other) {
                    slot.1 += Rat::one();
                } else {
                    powers.push((other, Rat::one()));
                }
            }
        };
        for it in items {
            match it {
                ClosedForm::Product(v) => v.into_iter().for_each(|f| push(f, &mut rational)),
                f => push(f, &mut rational),
            }
        }
        if rational.is_zero() {
            return ClosedForm::zero();
        }
        let mut factors = Vec::new();
        for (b, e) in powers {
            if e.is_zero() {
                continue;
            }
            match b.pow(&e) {
                Ok(ClosedForm::Rational(r)) => rational = &rational * &r,
                Ok(f) => factors.push(f),
                Err(_) => factors.push(ClosedForm::Power(Box::new(b), e)),
            }
        }
        if factors.is_empty() {
            return ClosedForm::Rational(rational);
        }
        if !rational.is_one() {
            factors.insert(0, ClosedForm::Rational(rational));
        }
        if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            ClosedForm::Product(factors)
        }
    }

    /// Principal power. Rational bases with exact roots fold back to rational form.
    pub fn pow(&self, e: &Rat) -> Result<ClosedForm> {
        if e.is_zero() {
            return Ok(ClosedForm::one());
        }
        if e.is_one() {
            return Ok(self.clone());
        }
        match self {
            ClosedForm::Rational(r) => {
                if e.is_integer() {
                    let k = e.to_integer().to_i64().ok_or_else(|| Error::Domain("exponent too large".into()))?;
                    return r.pow(k).map(ClosedForm::Rational);
                }
                if r.is_zero() {
                    return if e.is_positive() { Ok(ClosedForm::zero()) } else { Err(Error::DivisionByZero) };
                }
                if let Some(c) = r.constant_value() {
                    if let Some(v) = rat_pow(&c, e) {
                        return Ok(ClosedForm::constant(v));
                    }
                }
                let q = e.denom().to_u32().ok_or_else(|| Error::Domain("exponent too large".into()))?;
                if let (Some(n), Some(d)) = (r.num().nth_root(q), r.den().nth_root(q)) {
                    let root = RatFunc::new(n, d)?;
                    let p = e.numer().to_i64().ok_or_else(|| Error::Domain("exponent too large".into()))?;
                    return root.pow(p).map(ClosedForm::Rational);
                }
                Ok(ClosedForm::Power(Box::new(self.clone()), e.clone()))
            }
            ClosedForm::Power(b, f) => b.pow(&(f * e)),
            _ => Ok(ClosedForm::Power(Box::new(self.clone()), e.clone())),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        match self {
            ClosedForm::Rational(r) => r.vars(),
            ClosedForm::Sum(v) | ClosedForm::Product(v) => v.iter().flat_map(ClosedForm::vars).collect(),
            ClosedForm::Power(b, _) => b.vars(),
        }
    }

    pub fn diff(&self, v: Var) -> ClosedForm {
        match self {
            ClosedForm::Rational(r) => ClosedForm::Rational(r.diff(v)),
            ClosedForm::Sum(ts) => ClosedForm::sum_of(ts.iter().map(|t| t.diff(v))),
            ClosedForm::Product(fs) => ClosedForm::sum_of((0..fs.len()).map(|i| {
                ClosedForm::product_of(
                    fs.iter().enumerate().map(|(j, f)| if i == j { f.diff(v) } else { f.clone() }),
                )
            })),
            ClosedForm::Power(b, e) => {
                let db = b.diff(v);
                if db.is_zero() {
                    return ClosedForm::zero();
                }
                let lower = ClosedForm::Power(b.clone(), e - Rat::one());
                let lower = if (e - Rat::one()).is_zero() { ClosedForm::one() } else { lower };
                ClosedForm::product_of([ClosedForm::constant(e.clone()), lower, db])
            }
        }
    }

    /// Simultaneous substitution of variables by expressions.
    pub fn substitute(&self, map: &BTreeMap<Var, ClosedForm>) -> Result<ClosedForm> {
        match self {
            ClosedForm::Rational(r) => {
                let relevant: BTreeMap<Var, &ClosedForm> =
                    map.iter().filter(|(v, _)| r.vars().contains(v)).map(|(v, f)| (*v, f)).collect();
                if relevant.is_empty() {
                    return Ok(self.clone());
                }
                if relevant.values().all(|f| f.is_rational()) {
                    let rm: BTreeMap<Var, RatFunc> =
                        relevant.iter().map(|(v, f)| (*v, f.as_rational().unwrap().clone())).collect();
                    return Ok(ClosedForm::Rational(r.substitute(&rm)?));
                }
                let n = poly_on_forms(r.num(), &relevant);
                let d = poly_on_forms(r.den(), &relevant);
                if d.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                n.div(&d)
            }
            ClosedForm::Sum(ts) => {
                Ok(ClosedForm::sum_of(ts.iter().map(|t| t.substitute(map)).collect::<Result<Vec<_>>>()?))
            }
            ClosedForm::Product(fs) => {
                Ok(ClosedForm::product_of(fs.iter().map(|t| t.substitute(map)).collect::<Result<Vec<_>>>()?))
            }
            ClosedForm::Power(b, e) => b.substitute(map)?.pow(e),
        }
    }

    /// Homogeneity degree by structure; exact for rational leaves.
    pub fn homogeneity_degree(&self) -> Option<Rat> {
        match self {
            ClosedForm::Rational(r) => r.homogeneity_degree().map(|d| Rat::from_integer(d.into())),
            ClosedForm::Sum(ts) => {
                let mut d: Option<Rat> = None;
                for t in ts.iter().filter(|t| !t.is_zero()) {
                    let dt = t.homogeneity_degree()?;
                    match &d {
                        None => d = Some(dt),
                        Some(prev) if *prev == dt => {}
                        Some(_) => return None,
                    }
                }
                d
            }
            ClosedForm::Product(fs) => {
                fs.iter().try_fold(Rat::zero(), |acc, f| f.homogeneity_degree().map(|d| acc + d))
            }
            ClosedForm::Power(b, e) => b.homogeneity_degree().map(|d| d * e),
        }
    }

    /// Principal-branch floating-point evaluation.
    pub fn eval_numeric(&self, point: &BTreeMap<Var, f64>) -> Result<f64> {
        let mut cert = f64::INFINITY;
        self.eval_cert(&|v| point.get(&v).copied(), &mut cert)
    }

    /// Evaluation that also records the smallest fractional-power base seen.
    pub fn eval_cert(&self, point: &dyn Fn(Var) -> Option<f64>, min_base: &mut f64) -> Result<f64> {
        match self {
            ClosedForm::Rational(r) => {
                for v in r.vars() {
                    if point(v).is_none() {
                        return Err(Error::UnknownVariable(v.name()));
                    }
                }
                let f = |v: Var| point(v).unwrap();
                let d = r.den().eval_f64(&f);
                if d == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                Ok(r.num().eval_f64(&f) / d)
            }
            ClosedForm::Sum(ts) => ts.iter().map(|t| t.eval_cert(point, min_base)).sum(),
            ClosedForm::Product(fs) => fs.iter().map(|t| t.eval_cert(point, min_base)).product(),
            ClosedForm::Power(b, e) => {
                let x = b.eval_cert(point, min_base)?;
                if e.is_integer() {
                    if x == 0.0 && e.is_negative() {
                        return Err(Error::DivisionByZero);
                    }
                    return Ok(x.powi(e.to_integer().to_i32().unwrap_or(i32::MAX)));
                }
                *min_base = min_base.min(x);
                if x <= 0.0 {
                    return Err(Error::Branch(format!("base {x} under exponent {}", fmt_rat(e))));
                }
                Ok(x.powf(rat_to_f64(e)))
            }
        }
    }

    pub fn compile(&self, slots: &[Var]) -> Result<Compiled> {
        Compiled::new(self, slots)
    }
}

fn poly_on_forms(p: &super::poly::MPoly, map: &BTreeMap<Var, &ClosedForm>) -> ClosedForm {
    let mut terms = Vec::new();
    for (m, c) in p.terms() {
        let mut factors = vec![ClosedForm::constant(c.clone())];
        for (v, e) in m.pairs() {
            match map.get(&v) {
                Some(f) => factors.push(f.pow(&Rat::from_integer(e.into())).expect("integer power")),
                None => factors.push(ClosedForm::var(v).pow(&Rat::from_integer(e.into())).expect("integer power")),
            }
        }
        terms.push(ClosedForm::product_of(factors));
    }
    ClosedForm::sum_of(terms)
}

fn needs_parens(f: &ClosedForm) -> bool {
    match f {
        ClosedForm::Rational(r) => !(r.is_poly() && r.num().nterms() <= 1 && !r.num().lc().is_negative()),
        ClosedForm::Sum(_) | ClosedForm::Product(_) => true,
        ClosedForm::Power(_, _) => false,
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedForm::Rational(r) => write!(f, "{r}"),
            ClosedForm::Sum(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    if matches!(t, ClosedForm::Sum(_)) {
                        write!(f, "({t})")?;
                    } else {
                        write!(f, "{t}")?;
                    }
                }
                Ok(())
            }
            ClosedForm::Product(fs) => {
                for (i, t) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    if needs_parens(t) {
                        write!(f, "({t})")?;
                    } else {
                        write!(f, "{t}")?;
                    }
                }
                Ok(())
            }
            ClosedForm::Power(b, e) => {
                let base = b.to_string();
                let simple_base = matches!(&**b, ClosedForm::Rational(r) if r.is_poly() && r.num().nterms() == 1
                    && r.num().lc().is_one() && r.num().leading().unwrap().0.pairs().count() == 1
                    && r.num().leading().unwrap().0.degree() == 1);
                if simple_base {
                    write!(f, "{base}")?;
                } else {
                    write!(f, "({base})")?;
                }
                if e.is_integer() && !e.is_negative() {
                    write!(f, "^{}", e.numer())
                } else {
                    write!(f, "^({}/{})", e.numer(), e.denom())
                }
            }
        }
    }
}

// ---- compiled floating-point evaluation ----

#[derive(Clone, Debug)]
struct CPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CPoly {
    fn new(p: &super::poly::MPoly, slots: &[Var]) -> Result<CPoly> {
        let mut terms = Vec::with_capacity(p.nterms());
        for (m, c) in p.terms() {
            let mut f = Vec::new();
            for (v, e) in m.pairs() {
                let s = slots.iter().position(|&w| w == v).ok_or_else(|| Error::UnknownVariable(v.name()))?;
                f.push((s, e as i32));
            }
            terms.push((rat_to_f64(c), f));
        }
        Ok(CPoly { terms })
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, f)| f.iter().fold(*c, |acc, &(s, e)| acc * x[s].powi(e))).sum()
    }
}

#[derive(Clone, Debug)]
enum CNode {
    Ratio(CPoly, CPoly),
    Sum(Vec<CNode>),
    Product(Vec<CNode>),
    Power(Box<CNode>, f64, bool),
}

/// A closed form lowered to f64 arithmetic over a fixed variable order.
#[derive(Clone, Debug)]
pub struct Compiled {
    node: CNode,
}

/// Denominators smaller than this in magnitude are treated as singular.
pub const DENOMINATOR_GUARD: f64 = 1e-12;

impl Compiled {
    fn new(f: &ClosedForm, slots: &[Var]) -> Result<Compiled> {
        fn lower(f: &ClosedForm, slots: &[Var]) -> Result<CNode> {
            Ok(match f {
                ClosedForm::Rational(r) => CNode::Ratio(CPoly::new(r.num(), slots)?, CPoly::new(r.den(), slots)?),
                ClosedForm::Sum(ts) => CNode::Sum(ts.iter().map(|t| lower(t, slots)).collect::<Result<_>>()?),
                ClosedForm::Product(ts) => {
                    CNode::Product(ts.iter().map(|t| lower(t, slots)).collect::<Result<_>>()?)
                }
                ClosedForm::Power(b, e) => CNode::Power(Box::new(lower(b, slots)?), rat_to_f64(e), e.is_integer()),
            })
        }
        Ok(Compiled { node: lower(f, slots)? })
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let mut cert = f64::INFINITY;
        self.eval_cert(x, &mut cert)
    }

    pub fn eval_cert(&self, x: &[f64], min_base: &mut f64) -> Result<f64> {
        fn go(n: &CNode, x: &[f64], mb: &mut f64) -> Result<f64> {
            match n {
                CNode::Ratio(p, q) => {
                    let d = q.eval(x);
                    if d.abs() < DENOMINATOR_GUARD {
                        return Err(Error::Singular(format!("denominator {d:e}")));
                    }
                    Ok(p.eval(x) / d)
                }
                CNode::Sum(ts) => ts.iter().map(|t| go(t, x, mb)).sum(),
                CNode::Product(ts) => ts.iter().map(|t| go(t, x, mb)).product(),
                CNode::Power(b, e, integral) => {
                    let v = go(b, x, mb)?;
                    if *integral {
                        return Ok(v.powi(*e as i32));
                    }
                    *mb = mb.min(v);
                    if v <= 0.0 {
                        return Err(Error::Branch(format!("base {v} under exponent {e}")));
                    }
                    Ok(v.powf(*e))
                }
            }
        }
        go(&self.node, x, min_base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse::parse_any;
    use crate::algebra::rat::rat;

    fn cf(s: &str) -> ClosedForm {
        parse_any(s).unwrap()
    }

    #[test]
    fn integer_powers_fold_to_rational() {
        assert!(cf("x*(y+1)^2").is_rational());
        assert!(cf("(x^2+2*x*y+y^2)^(1/2)").is_rational());
        assert!(matches!(cf("(y+1)^(4/3)"), ClosedForm::Power(_, ref e) if *e == rat(4, 3)));
        assert!(cf("(y+1)^(1/3)*(y+1)^(2/3)").is_rational());
    }

    #[test]
    fn derivatives() {
        assert!(cf("(y+1)^(4/3)").diff(Var::X).is_zero());
        let d = cf("(y+1)^(4/3)").diff(Var::Y);
        let at = |y: f64| d.eval_numeric(&[(Var::Y, y)].into_iter().collect()).unwrap();
        assert!((at(0.0) - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn numeric_evaluation() {
        let p = |pairs: &[(Var, f64)]| pairs.iter().copied().collect::<BTreeMap<_, _>>();
        assert_eq!(cf("x/(y+1)").eval_numeric(&p(&[(Var::X, 1.0), (Var::Y, 1.0)])).unwrap(), 0.5);
        assert_eq!(cf("(y+1)^(4/3)").eval_numeric(&p(&[(Var::Y, 0.0)])).unwrap(), 1.0);
        assert!(matches!(cf("(y+1)^(1/2)").eval_numeric(&p(&[(Var::Y, -2.0)])), Err(Error::Branch(_))));
    }

    #[test]
    fn homogeneity_of_radicals() {
        assert_eq!(cf("(x^3+y^3)^(1/3)").homogeneity_degree(), Some(Rat::one()));
        assert_eq!(cf("(x^3+y^4)^(1/3)").homogeneity_degree(), None);
    }

    #[test]
    fn display_round_trip() {
        for s in ["(x^3+y^4)^(1/3)*(y+1)^(-4/3)", "x^3/(x^3+x^2+y^2)+x*y^2*(x^3+x^2+y^2)^(-1/3)"] {
            let f = cf(s);
            assert_eq!(cf(&f.to_string()), f, "{s} printed as {f}");
        }
    }
}
