//! Flow maps and vector fields.

use crate::algebra::{parse_expr, split_tuple, ClosedForm, RatFunc, Var};
use crate::error::{domain, Error, Result};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Coordinate variables for a tuple of `n` components written in `text`:
/// x, y, then z or w for the third slot (whichever the text uses), then x1..xn.
pub fn coords_for(n: usize, text: &str) -> Vec<Var> {
    if n == 3 {
        let uses_w = text.contains('w');
        let uses_z = text.contains('z');
        if uses_w && !uses_z {
            return vec![Var::X, Var::Y, Var::W];
        }
    }
    Var::coords(n)
}

/// An n-tuple of closed-form components in n coordinate variables.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowMap {
    vars: Vec<Var>,
    comps: Vec<ClosedForm>,
}

impl FlowMap {
    pub fn new(vars: Vec<Var>, comps: Vec<ClosedForm>) -> Result<Self> {
        if vars.len() != comps.len() || vars.is_empty() {
            return Err(domain(format!("{} components for {} variables", comps.len(), vars.len())));
        }
        let allowed: BTreeSet<Var> = vars.iter().copied().collect();
        for c in &comps {
            if let Some(v) = c.vars().into_iter().find(|v| !allowed.contains(v)) {
                return Err(Error::UnknownVariable(v.name()));
            }
        }
        Ok(FlowMap { vars, comps })
    }

    pub fn from_rational(vars: Vec<Var>, comps: Vec<RatFunc>) -> Result<Self> {
        FlowMap::new(vars, comps.into_iter().map(ClosedForm::Rational).collect())
    }

    pub fn planar(u: RatFunc, v: RatFunc) -> Self {
        FlowMap::from_rational(vec![Var::X, Var::Y], vec![u, v]).expect("planar components")
    }

    pub fn identity(vars: Vec<Var>) -> Self {
        let comps = vars.iter().map(|&v| ClosedForm::var(v)).collect();
        FlowMap { vars, comps }
    }

    /// Comma-separated components; coordinates fixed by arity.
    pub fn parse(text: &str) -> Result<Self> {
        let parts = split_tuple(text);
        FlowMap::parse_with(text, &coords_for(parts.len(), text))
    }

    pub fn parse_with(text: &str, vars: &[Var]) -> Result<Self> {
        let comps = split_tuple(text).into_iter().map(|p| parse_expr(p, vars)).collect::<Result<Vec<_>>>()?;
        FlowMap::new(vars.to_vec(), comps)
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn components(&self) -> &[ClosedForm] {
        &self.comps
    }

    pub fn is_rational(&self) -> bool {
        self.comps.iter().all(ClosedForm::is_rational)
    }

    pub fn rational_components(&self) -> Option<Vec<RatFunc>> {
        self.comps.iter().map(|c| c.as_rational().cloned()).collect()
    }

    pub fn rational(&self) -> Result<Vec<RatFunc>> {
        self.rational_components().ok_or_else(|| Error::NotRational(self.to_string()))
    }

    /// `self ∘ inner`: substitute the components of `inner` for the coordinates.
    pub fn compose(&self, inner: &FlowMap) -> Result<FlowMap> {
        if self.vars != inner.vars {
            return Err(domain("composition of maps in different coordinates"));
        }
        let map: BTreeMap<Var, ClosedForm> = self.vars.iter().copied().zip(inner.comps.iter().cloned()).collect();
        let comps = self.comps.iter().map(|c| c.substitute(&map)).collect::<Result<Vec<_>>>()?;
        FlowMap::new(self.vars.clone(), comps)
    }

    /// Swap two coordinates in both the arguments and the output slots.
    pub fn swap_coords(&self, i: usize, j: usize) -> Result<FlowMap> {
        let map: BTreeMap<Var, ClosedForm> = [(self.vars[i], ClosedForm::var(self.vars[j])), (self.vars[j], ClosedForm::var(self.vars[i]))]
            .into_iter()
            .collect();
        let mut comps = self.comps.iter().map(|c| c.substitute(&map)).collect::<Result<Vec<_>>>()?;
        comps.swap(i, j);
        FlowMap::new(self.vars.clone(), comps)
    }
}

impl fmt::Display for FlowMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(", "))
    }
}

/// A tuple of 2-homogeneous rational functions.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    vars: Vec<Var>,
    comps: Vec<RatFunc>,
}

impl VectorField {
    pub fn new(vars: Vec<Var>, comps: Vec<RatFunc>) -> Result<Self> {
        if vars.len() != comps.len() || vars.is_empty() {
            return Err(domain(format!("{} components for {} variables", comps.len(), vars.len())));
        }
        let allowed: BTreeSet<Var> = vars.iter().copied().collect();
        for c in &comps {
            if let Some(v) = c.vars().into_iter().find(|v| !allowed.contains(v)) {
                return Err(Error::UnknownVariable(v.name()));
            }
            if !c.is_zero() && c.homogeneity_degree() != Some(2) {
                return Err(domain(format!("vector field component `{c}` is not 2-homogeneous")));
            }
        }
        Ok(VectorField { vars, comps })
    }

    pub fn planar(p: RatFunc, r: RatFunc) -> Result<Self> {
        VectorField::new(vec![Var::X, Var::Y], vec![p, r])
    }

    pub fn zero(vars: Vec<Var>) -> Self {
        let comps = vec![RatFunc::zero(); vars.len()];
        VectorField { vars, comps }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let parts = split_tuple(text);
        VectorField::parse_with(text, &coords_for(parts.len(), text))
    }

    pub fn parse_with(text: &str, vars: &[Var]) -> Result<Self> {
        let comps = split_tuple(text)
            .into_iter()
            .map(|p| parse_expr(p, vars)?.to_ratfunc())
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(vars.to_vec(), comps)
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn components(&self) -> &[RatFunc] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(RatFunc::is_zero)
    }

    /// First two components of a planar field.
    pub fn pair(&self) -> Result<(&RatFunc, &RatFunc)> {
        if self.dim() != 2 {
            return Err(domain(format!("expected a planar field, got dimension {}", self.dim())));
        }
        Ok((&self.comps[0], &self.comps[1]))
    }

    pub fn scale(&self, c: &RatFunc) -> VectorField {
        VectorField { vars: self.vars.clone(), comps: self.comps.iter().map(|p| p * c).collect() }
    }

    /// Numeric evaluation at a point given in coordinate order.
    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        let lookup = |v: Var| self.vars.iter().position(|&u| u == v).map_or(0.0, |i| x[i]);
        self.comps.iter().map(|c| c.eval_f64(&lookup)).collect()
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arity_picks_coordinates() {
        let f = FlowMap::parse("x*(w+1), y*(w+1), w/(w+1)").unwrap();
        assert_eq!(f.vars(), &[Var::X, Var::Y, Var::W]);
        let g = FlowMap::parse("x/(x+1), y/(y+1), z*(x+1)^2").unwrap();
        assert_eq!(g.vars(), &[Var::X, Var::Y, Var::Z]);
        assert!(FlowMap::parse("x, z").is_err());
    }

    #[test]
    fn field_homogeneity_enforced() {
        assert!(VectorField::parse("x^2, y^2").is_ok());
        assert!(VectorField::parse("x^2, y").is_err());
        assert!(VectorField::parse("0, 0").unwrap().is_zero());
    }

    #[test]
    fn compose_and_swap() {
        let f = FlowMap::parse("x/(1-x), y").unwrap();
        let g = f.compose(&f).unwrap();
        assert_eq!(g, FlowMap::parse("x/(1-2*x), y").unwrap());
        let s = FlowMap::parse("x*(y+1)^2, y/(y+1)").unwrap().swap_coords(0, 1).unwrap();
        assert_eq!(s, FlowMap::parse("x/(x+1), y*(x+1)^2").unwrap());
    }
}
