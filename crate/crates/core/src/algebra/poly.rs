//! Sparse multivariate polynomials over ℚ.

use super::rat::{rat_to_f64, Rat};
use super::var::Var;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A power product, stored as (variable, exponent) pairs sorted by variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(SmallVec<[(Var, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var_pow(v: Var, e: u32) -> Self {
        let mut m = Monomial::one();
        if e > 0 {
            m.0.push((v, e));
        }
        m
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, u32)>) -> Self {
        let mut acc: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *acc.entry(v).or_default() += e;
        }
        Monomial(acc.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exp(&self, v: Var) -> u32 {
        self.0.iter().find(|&&(w, _)| w == v).map_or(0, |&(_, e)| e)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Var, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = SmallVec::new();
        let mut j = 0;
        let b = &other.0;
        for &(v, e) in &self.0 {
            if j < b.len() && b[j].0 < v {
                return None;
            }
            if j < b.len() && b[j].0 == v {
                match e.cmp(&b[j].1) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((v, e - b[j].1)),
                }
                j += 1;
            } else {
                out.push((v, e));
            }
        }
        (j == b.len()).then_some(Monomial(out))
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|&(v, e)| {
                    let f = other.exp(v);
                    (f > 0).then_some((v, e.min(f)))
                })
                .collect(),
        )
    }

    pub fn pow(&self, k: u32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|&(v, e)| (v, e * k)).collect())
    }

    /// Split off the exponent of `v`.
    pub fn split(&self, v: Var) -> (u32, Monomial) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|&&(w, f)| {
                if w == v {
                    e = f;
                    false
                } else {
                    true
                }
            })
            .copied()
            .collect();
        (e, Monomial(rest))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|&(v, _)| v)
    }
}

impl Ord for Monomial {
    /// Graded lexicographic order with x > y > z > w > ...
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(va, ea)), Some(&(vb, eb))) => match va.cmp(&vb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                        i += 1;
                        j += 1;
                    }
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial: monomial → nonzero rational coefficient.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct MPoly {
    terms: BTreeMap<Monomial, Rat>,
}

impl MPoly {
    pub fn zero() -> Self {
        MPoly::default()
    }

    pub fn one() -> Self {
        MPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        MPoly::term(Monomial::one(), c)
    }

    pub fn int(c: i64) -> Self {
        MPoly::constant(Rat::from_integer(BigInt::from(c)))
    }

    pub fn var(v: Var) -> Self {
        MPoly::term(Monomial::var_pow(v, 1), Rat::one())
    }

    pub fn term(m: Monomial, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MPoly { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Monomial, Rat)>) -> Self {
        let mut p = MPoly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rat)> {
        self.terms.iter().rev()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Rat)> {
        self.terms.into_iter()
    }

    pub fn constant_value(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.constant_value().is_some()
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn lc(&self) -> Rat {
        self.leading().map_or_else(Rat::zero, |(_, c)| c.clone())
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn min_total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).min().unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    /// Homogeneous of some degree (the zero polynomial counts as homogeneous of degree 0).
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(Monomial::degree);
        let d = degs.next().unwrap_or(0);
        degs.all(|e| e == d).then_some(d)
    }

    pub fn scale(&self, c: &Rat) -> MPoly {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly { terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> MPoly {
        MPoly { terms: self.terms.iter().map(|(k, a)| (k.mul(m), a.clone())).collect() }
    }

    pub fn div_monomial(&self, m: &Monomial) -> Option<MPoly> {
        let mut terms = BTreeMap::new();
        for (k, a) in &self.terms {
            terms.insert(k.div(m)?, a.clone());
        }
        Some(MPoly { terms })
    }

    /// Greatest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        match it.next() {
            None => Monomial::one(),
            Some(first) => it.fold(first.clone(), |g, m| g.gcd(m)),
        }
    }

    pub fn pow(&self, k: u32) -> MPoly {
        let mut result = MPoly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Scale so the graded-lex leading coefficient is 1.
    pub fn monic(&self) -> MPoly {
        match self.leading() {
            None => MPoly::zero(),
            Some((_, c)) if c.is_one() => self.clone(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Rational content c with self = c · (primitive integer polynomial with positive lc).
    pub fn content(&self) -> Rat {
        if self.is_zero() {
            return Rat::one();
        }
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        let c = Rat::new(num, den);
        if self.lc().is_negative() {
            -c
        } else {
            c
        }
    }

    pub fn primitive(&self) -> MPoly {
        if self.is_zero() {
            return MPoly::zero();
        }
        self.scale(&self.content().recip())
    }

    pub fn diff(&self, v: Var) -> MPoly {
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split(v);
            if e > 0 {
                out.add_term(rest.mul(&Monomial::var_pow(v, e - 1)), c * Rat::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Coefficients with respect to `v`: result[k] is the coefficient of v^k.
    pub fn coeffs_in(&self, v: Var) -> Vec<MPoly> {
        let mut out = vec![MPoly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split(v);
            out[e as usize].terms.insert(rest, c.clone());
        }
        out
    }

    pub fn from_coeffs_in(v: Var, coeffs: &[MPoly]) -> MPoly {
        let mut out = MPoly::zero();
        for (k, c) in coeffs.iter().enumerate() {
            let vk = Monomial::var_pow(v, k as u32);
            for (m, a) in &c.terms {
                out.terms.insert(m.mul(&vk), a.clone());
            }
        }
        out
    }

    /// Exact quotient, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &MPoly) -> Option<MPoly> {
        assert!(!d.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(MPoly::zero());
        }
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.recip()));
        }
        if d.nterms() == 1 {
            let (m, c) = d.leading().unwrap();
            return self.div_monomial(m).map(|q| q.scale(&c.recip()));
        }
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c.recip())).unwrap();
        // Cheap degree rejections.
        if self.total_degree() < d.total_degree() {
            return None;
        }
        for v in d.vars() {
            if self.degree_in(v) < d.degree_in(v) {
                return None;
            }
        }
        let mut rem = self.clone();
        let mut quot = MPoly::zero();
        while let Some((lm, lc)) = rem.leading() {
            let qm = lm.div(&dm)?;
            let qc = lc * &dc;
            for (m, c) in &d.terms {
                rem.add_term(m.mul(&qm), -(c * &qc));
            }
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Substitute `v := value`.
    pub fn eval_var(&self, v: Var, value: &Rat) -> MPoly {
        let mut out = MPoly::zero();
        let mut powers: Vec<Rat> = vec![Rat::one()];
        for (m, c) in &self.terms {
            let (e, rest) = m.split(v);
            while powers.len() <= e as usize {
                let next = powers.last().unwrap() * value;
                powers.push(next);
            }
            out.add_term(rest, c * &powers[e as usize]);
        }
        out
    }

    /// Polynomial composition: every variable in `map` is replaced by its image.
    pub fn compose(&self, map: &BTreeMap<Var, MPoly>) -> MPoly {
        let mut cache: BTreeMap<(Var, u32), MPoly> = BTreeMap::new();
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            let mut t = MPoly::constant(c.clone());
            let mut keep = Monomial::one();
            for (v, e) in m.pairs() {
                match map.get(&v) {
                    Some(img) => {
                        let p = cache.entry((v, e)).or_insert_with(|| img.pow(e));
                        t = &t * p;
                    }
                    None => keep = keep.mul(&Monomial::var_pow(v, e)),
                }
            }
            out += &t.mul_monomial(&keep);
        }
        out
    }

    /// Replace every variable `v` by `v * s` (s a variable), i.e. the scaling used by time shifts.
    pub fn scale_vars(&self, vars: &[Var], s: Var) -> MPoly {
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            let k: u32 = m.pairs().filter(|(v, _)| vars.contains(v)).map(|(_, e)| e).sum();
            out.terms.insert(m.mul(&Monomial::var_pow(s, k)), c.clone());
        }
        out
    }

    /// Split into parts homogeneous in `vars`, keyed by their degree in those variables.
    pub fn graded_parts(&self, vars: &[Var]) -> BTreeMap<u32, MPoly> {
        let mut out: BTreeMap<u32, MPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let k: u32 = m.pairs().filter(|(v, _)| vars.contains(v)).map(|(_, e)| e).sum();
            out.entry(k).or_insert_with(MPoly::zero).terms.insert(m.clone(), c.clone());
        }
        out
    }

    /// Rename variables (must be injective on the variables present).
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> MPoly {
        MPoly::from_terms(self.terms.iter().map(|(m, c)| {
            (Monomial::from_pairs(m.pairs().map(|(v, e)| (*map.get(&v).unwrap_or(&v), e))), c.clone())
        }))
    }

    pub fn eval_rat(&self, point: &BTreeMap<Var, Rat>) -> Option<Rat> {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.pairs() {
                t *= num_traits::pow::Pow::pow(point.get(&v)?, e);
            }
            acc += t;
        }
        Some(acc)
    }

    /// Floating-point coefficients for repeated evaluation.
    pub fn to_f64_terms(&self) -> Vec<(Vec<(Var, u32)>, f64)> {
        self.terms.iter().map(|(m, c)| (m.pairs().collect(), rat_to_f64(c))).collect()
    }

    pub fn eval_f64(&self, point: &dyn Fn(Var) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| m.pairs().fold(rat_to_f64(c), |acc, (v, e)| acc * point(v).powi(e as i32)))
            .sum()
    }

    /// Exact root: `Some(r)` with r^k = self, choosing r with positive leading coefficient for even k.
    pub fn nth_root(&self, k: u32) -> Option<MPoly> {
        if k == 1 || self.is_zero() {
            return Some(self.clone());
        }
        let (lm, lc) = self.leading()?;
        let root_lc = super::rat::rat_pow(lc, &Rat::new(BigInt::one(), BigInt::from(k)))?;
        let mut root_lm = Vec::new();
        for (v, e) in lm.pairs() {
            if e % k != 0 {
                return None;
            }
            root_lm.push((v, e / k));
        }
        let lead_m = Monomial::from_pairs(root_lm);
        let mut r = MPoly::term(lead_m.clone(), root_lc.clone());
        // Each new term t satisfies LT(self - r^k) = k * LT(r)^(k-1) * t.
        let d = MPoly::term(lead_m, root_lc).pow(k - 1).scale(&Rat::from_integer(BigInt::from(k)));
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let min_deg = self.min_total_degree();
        let mut last = r.leading().unwrap().0.clone();
        loop {
            let rem = self - &r.pow(k);
            let Some((m, c)) = rem.leading() else {
                return Some(r);
            };
            let t = m.div(&dm)?;
            if t >= last || t.degree() * k < min_deg {
                return None;
            }
            r.add_term(t.clone(), c / &dc);
            last = t;
        }
    }

    pub fn to_integer_coeffs(&self) -> Option<Vec<(Monomial, BigInt)>> {
        self.terms
            .iter()
            .map(|(m, c)| c.is_integer().then(|| (m.clone(), c.to_integer())))
            .collect()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| rat_to_f64(c).abs()).fold(0.0, f64::max)
    }

    pub fn coeff_bits(&self) -> u64 {
        self.terms.values().map(|c| c.numer().bits().max(c.denom().bits())).max().unwrap_or(0)
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        let (mut big, small) = if self.nterms() >= rhs.nterms() { (self.clone(), rhs) } else { (rhs.clone(), self) };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }
}

impl std::ops::AddAssign<&MPoly> for MPoly {
    fn add_assign(&mut self, rhs: &MPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        MPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        if self.is_zero() || rhs.is_zero() {
            return MPoly::zero();
        }
        if let Some(c) = self.constant_value() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.constant_value() {
            return self.scale(&c);
        }
        let mut acc: std::collections::HashMap<Monomial, Rat> =
            std::collections::HashMap::with_capacity(self.nterms() * rhs.nterms());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.entry(m) {
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                    std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += c,
                }
            }
        }
        MPoly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for MPoly {
            type Output = MPoly;
            fn $f(self, rhs: MPoly) -> MPoly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        -&self
    }
}

pub(crate) fn fmt_rat(c: &Rat) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn fmt_monomial(m: &Monomial) -> String {
    m.pairs()
        .map(|(v, e)| if e == 1 { v.name() } else { format!("{}^{}", v.name(), e) })
        .collect::<Vec<_>>()
        .join("*")
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { "-" } else { "+" })?;
            }
            first = false;
            if m.is_one() {
                f.write_str(&fmt_rat(&a))?;
            } else if a.is_one() {
                f.write_str(&fmt_monomial(m))?;
            } else {
                write!(f, "{}*{}", fmt_rat(&a), fmt_monomial(m))?;
            }
        }
        Ok(())
    }
}
