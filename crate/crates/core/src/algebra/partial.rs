//! Partial fractions over ℚ with the common-residue test for each irreducible factor.

use super::factor::factor;
use super::poly::MPoly;
use super::rat::Rat;
use super::ratfunc::RatFunc;
use super::upoly::UPoly;
use super::var::Var;
use crate::error::{domain, Result};
use num_traits::Zero;

/// One irreducible denominator factor `p` with the numerators of `a_j / p^j`, j = 1..=multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialTerm {
    pub factor: UPoly,
    pub multiplicity: u32,
    pub numerators: Vec<UPoly>,
    /// For a simple factor: the residue shared by all its roots, when rational.
    pub residue: Option<Rat>,
}

impl PartialTerm {
    pub fn is_simple(&self) -> bool {
        self.multiplicity == 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartialFractions {
    pub var: Var,
    pub poly_part: UPoly,
    pub terms: Vec<PartialTerm>,
}

impl PartialFractions {
    pub fn poly_part_mpoly(&self) -> MPoly {
        self.poly_part.to_mpoly(self.var)
    }

    /// Reassemble the decomposition into a single rational function.
    pub fn recombine(&self) -> RatFunc {
        let v = self.var;
        let mut acc = RatFunc::from_poly(self.poly_part.to_mpoly(v));
        for t in &self.terms {
            let p = t.factor.to_mpoly(v);
            for (j, a) in t.numerators.iter().enumerate() {
                let piece = RatFunc::new(a.to_mpoly(v), p.pow(j as u32 + 1)).expect("nonzero factor");
                acc = &acc + &piece;
            }
        }
        acc
    }
}

fn single_var(f: &RatFunc) -> Result<Var> {
    let vars = f.vars();
    match vars.len() {
        0 => Ok(Var::X),
        1 => Ok(*vars.iter().next().unwrap()),
        _ => Err(domain(format!("`{f}` is not univariate"))),
    }
}

/// Trace of multiplication by `g` in ℚ[x]/(p).
fn trace_mod(g: &UPoly, p: &UPoly) -> Rat {
    let n = p.degree() as usize;
    let mut basis = UPoly::one();
    let mut tr = Rat::zero();
    for i in 0..n {
        tr += (g * &basis).rem(p).coeff(i);
        basis = &basis * &UPoly::x();
    }
    tr
}

pub fn partial_fractions(f: &RatFunc) -> Result<PartialFractions> {
    let var = single_var(f)?;
    let num = UPoly::from_mpoly(f.num(), var)?;
    let den = UPoly::from_mpoly(f.den(), var)?;
    let lc = den.lc();
    let (num, den) = (num.scale(&lc.recip()), den.monic());
    let (poly_part, rem) = num.div_rem(&den);
    let dden = den.derivative();
    let mut terms = Vec::new();
    if !rem.is_zero() {
        for (p, m) in factor(&den) {
            let pm = p.pow(m);
            let cofactor = den.div_exact(&pm).expect("factor divides");
            let inv = cofactor.inverse_mod(&pm).expect("coprime cofactor");
            // h / p^m with deg h < m·deg p, expanded p-adically.
            let mut h = (&rem * &inv).rem(&pm);
            let mut numerators = vec![UPoly::zero(); m as usize];
            for k in 0..m as usize {
                let (q, a) = h.div_rem(&p);
                numerators[m as usize - 1 - k] = a;
                h = q;
            }
            let residue = (m == 1)
                .then(|| {
                    let dinv = dden.inverse_mod(&p)?;
                    let g = (&rem * &dinv).rem(&p);
                    let r = trace_mod(&g, &p) / Rat::from_integer(p.degree().into());
                    (&rem - &dden.scale(&r)).rem(&p).is_zero().then_some(r)
                })
                .flatten();
            terms.push(PartialTerm { factor: p, multiplicity: m, numerators, residue });
        }
    }
    Ok(PartialFractions { var, poly_part, terms })
}
