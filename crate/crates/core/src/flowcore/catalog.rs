//! Named flow families.

use super::flow::FlowMap;
use crate::algebra::{MPoly, Rat, RatFunc, Var};
use crate::error::{Error, Result};
use num_traits::Zero;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadMember {
    Phi1,
    Psi1,
    Psi1Prime,
    Phi1Prime,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Catalog {
    /// x(y+1)^(N-1) • y/(y+1)
    PhiN(i64),
    PsiN(i64),
    PsiPrimeN(i64),
    PhiSphInf,
    /// x(w+1)^(n-1) • y(w+1)^(m-1) • w/(w+1)
    PsiNm(i64, i64),
    /// x/(x+1) • y/(y+1) • z(x+1)^A (y+1)^B
    PhiAB(i64, i64),
    /// c·L(x)² + x with L(c) = 0
    PhiCL { c: Vec<Rat>, l: Vec<Rat> },
    /// x/(x+1) • y(x+1)^(N-1), the swap-conjugate of `PhiN`
    PhiHatN(i64),
    Quad(QuadMember),
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: BTreeMap<&'static str, &'static str>,
}

pub fn catalog_list() -> Vec<CatalogEntry> {
    let entry = |name, params: &[(&'static str, &'static str)]| CatalogEntry { name, params: params.iter().copied().collect() };
    vec![
        entry("phi_N", &[("N", "int ≥ 0")]),
        entry("psi_N", &[("N", "int ≥ 0")]),
        entry("psi_prime_N", &[("N", "int ≥ 0")]),
        entry("phi_sph_inf", &[]),
        entry("psi_nm", &[("n", "int"), ("m", "int")]),
        entry("Phi_AB", &[("A", "int"), ("B", "int")]),
        entry("phi_c_L", &[("c", "list of rationals"), ("L", "list of rationals, same length, L·c = 0")]),
        entry("phi_hat_N", &[("N", "int ≥ 0")]),
        entry("quad_phi1", &[]),
        entry("quad_psi1", &[]),
        entry("quad_psi1_prime", &[]),
        entry("quad_phi1_prime", &[]),
    ]
}

fn int_param(params: &BTreeMap<String, String>, key: &str) -> Result<i64> {
    let raw = params.get(key).ok_or_else(|| Error::InvalidParams(format!("missing parameter {key}")))?;
    raw.trim().parse().map_err(|_| Error::InvalidParams(format!("{key} must be an integer, got `{raw}`")))
}

fn rat_list(params: &BTreeMap<String, String>, key: &str) -> Result<Vec<Rat>> {
    let raw = params.get(key).ok_or_else(|| Error::InvalidParams(format!("missing parameter {key}")))?;
    raw.split(',')
        .map(|s| s.trim().parse::<Rat>().map_err(|_| Error::InvalidParams(format!("bad rational `{s}` in {key}"))))
        .collect()
}

impl Catalog {
    pub fn from_name(name: &str, params: &BTreeMap<String, String>) -> Result<Catalog> {
        Ok(match name {
            "phi_N" => Catalog::PhiN(int_param(params, "N")?),
            "psi_N" => Catalog::PsiN(int_param(params, "N")?),
            "psi_prime_N" => Catalog::PsiPrimeN(int_param(params, "N")?),
            "phi_sph_inf" => Catalog::PhiSphInf,
            "psi_nm" => Catalog::PsiNm(int_param(params, "n")?, int_param(params, "m")?),
            "Phi_AB" => Catalog::PhiAB(int_param(params, "A")?, int_param(params, "B")?),
            "phi_c_L" => Catalog::PhiCL { c: rat_list(params, "c")?, l: rat_list(params, "L")? },
            "phi_hat_N" => Catalog::PhiHatN(int_param(params, "N")?),
            "quad_phi1" => Catalog::Quad(QuadMember::Phi1),
            "quad_psi1" => Catalog::Quad(QuadMember::Psi1),
            "quad_psi1_prime" => Catalog::Quad(QuadMember::Psi1Prime),
            "quad_phi1_prime" => Catalog::Quad(QuadMember::Phi1Prime),
            other => return Err(Error::UnknownName(other.into())),
        })
    }
}

fn nonneg(n: i64, what: &str) -> Result<()> {
    if n < 0 {
        return Err(Error::InvalidParams(format!("{what} must be ≥ 0, got {n}")));
    }
    Ok(())
}

fn xyz(text: &str, third: Var) -> Result<FlowMap> {
    FlowMap::parse_with(text, &[Var::X, Var::Y, third])
}

pub fn catalog(entry: &Catalog) -> Result<FlowMap> {
    let xy = [Var::X, Var::Y];
    match entry {
        Catalog::PhiN(n) => {
            nonneg(*n, "N")?;
            FlowMap::parse_with(&format!("x*(y+1)^({}), y/(y+1)", n - 1), &xy)
        }
        Catalog::PsiN(n) => {
            nonneg(*n, "N")?;
            let t = format!("((y+1)^{n}*(x+y)+(x-y))/((y+1)^{n}*(x+y)-(x-y))*y/(y+1), y/(y+1)");
            FlowMap::parse_with(&t, &xy)
        }
        Catalog::PsiPrimeN(n) => {
            nonneg(*n, "N")?;
            let t = format!("((y+1)^{n}*(x-y)+(x+y))/(-(y+1)^{n}*(x-y)+(x+y))*y/(y+1), y/(y+1)");
            FlowMap::parse_with(&t, &xy)
        }
        Catalog::PhiSphInf => FlowMap::parse_with("(x-y)^2+x, (x-y)^2+y", &xy),
        Catalog::PsiNm(n, m) => xyz(&format!("x*(w+1)^({}), y*(w+1)^({}), w/(w+1)", n - 1, m - 1), Var::W),
        Catalog::PhiAB(a, b) => xyz(&format!("x/(x+1), y/(y+1), z*(x+1)^({a})*(y+1)^({b})"), Var::Z),
        Catalog::PhiHatN(n) => {
            nonneg(*n, "N")?;
            FlowMap::parse_with(&format!("x/(x+1), y*(x+1)^({})", n - 1), &xy)
        }
        Catalog::PhiCL { c, l } => phi_c_l(c, l),
        Catalog::Quad(q) => {
            let t = match q {
                QuadMember::Phi1 => "(2*x*y^2+x^2+2*x*y+y^2)*x/(x*y+x+y)^2, (2*x*y^2+x^2+2*x*y+y^2)*y/((y^2+x+y)*(x*y+x+y))",
                QuadMember::Psi1 => "(x*y+y^2+2*x)/((2+x+y)*(y+1)), y/(y+1)",
                QuadMember::Psi1Prime => "(x*y-y^2+2*x)/((2-x+y)*(y+1)), y/(y+1)",
                QuadMember::Phi1Prime => "(2*x*y^2+x^2-2*x*y+y^2)*x/(x*y-x+y)^2, (2*x*y^2+x^2-2*x*y+y^2)*y/((y^2+x-y)*(-x*y+x-y))",
            };
            FlowMap::parse_with(t, &xy)
        }
    }
}

fn phi_c_l(c: &[Rat], l: &[Rat]) -> Result<FlowMap> {
    if c.len() != l.len() || c.is_empty() {
        return Err(Error::InvalidParams("c and L must have the same positive length".into()));
    }
    let lc: Rat = c.iter().zip(l).map(|(a, b)| a * b).sum();
    if !lc.is_zero() {
        return Err(Error::InvalidParams(format!("L(c) = {lc}, must vanish")));
    }
    let vars = Var::coords(c.len());
    let form = vars.iter().zip(l).fold(MPoly::zero(), |acc, (&v, k)| &acc + &MPoly::var(v).scale(k));
    let sq = form.pow(2);
    let comps = vars.iter().zip(c).map(|(&v, ci)| RatFunc::from_poly(&sq.scale(ci) + &MPoly::var(v))).collect();
    FlowMap::from_rational(vars, comps)
}

/// The rational catalog flows used by the property and acceptance suites.
pub fn rational_catalog() -> Vec<(String, FlowMap)> {
    let mut out = Vec::new();
    let mut push = |name: String, e: Catalog| out.push((name, catalog(&e).expect("catalog entry")));
    for n in 0..=6 {
        push(format!("phi_N(N={n})"), Catalog::PhiN(n));
        push(format!("phi_hat_N(N={n})"), Catalog::PhiHatN(n));
    }
    for n in 1..=5 {
        push(format!("psi_N(N={n})"), Catalog::PsiN(n));
        push(format!("psi_prime_N(N={n})"), Catalog::PsiPrimeN(n));
    }
    push("phi_sph_inf".into(), Catalog::PhiSphInf);
    for (name, q) in [
        ("quad_phi1", QuadMember::Phi1),
        ("quad_psi1", QuadMember::Psi1),
        ("quad_psi1_prime", QuadMember::Psi1Prime),
        ("quad_phi1_prime", QuadMember::Phi1Prime),
    ] {
        push(name.into(), Catalog::Quad(q));
    }
    for n in -1..=4 {
        for m in -1..=4 {
            push(format!("psi_nm(n={n},m={m})"), Catalog::PsiNm(n, m));
        }
    }
    for a in -2..=3 {
        for b in -2..=3 {
            push(format!("Phi_AB(A={a},B={b})"), Catalog::PhiAB(a, b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_ratfunc, ri};
    use crate::flowcore::verify::{verify_translation, VerifyMode};

    #[test]
    fn named_examples() {
        assert_eq!(catalog(&Catalog::PhiN(3)).unwrap(), FlowMap::parse("x*(y+1)^2, y/(y+1)").unwrap());
        assert_eq!(
            catalog(&Catalog::PsiNm(2, 2)).unwrap(),
            FlowMap::parse("x*(w+1), y*(w+1), w/(w+1)").unwrap()
        );
        let f = catalog(&Catalog::PhiCL { c: vec![ri(1), ri(-1)], l: vec![ri(1), ri(1)] }).unwrap();
        assert_eq!(f.components()[0].as_rational().unwrap(), &parse_ratfunc("(x+y)^2+x").unwrap());
        assert!(catalog(&Catalog::PhiCL { c: vec![ri(1), ri(1)], l: vec![ri(1), ri(1)] }).is_err());
        assert!(catalog(&Catalog::PhiN(-1)).is_err());
    }

    #[test]
    fn psi_one_matches_quadruple() {
        assert_eq!(catalog(&Catalog::PsiN(1)).unwrap(), catalog(&Catalog::Quad(QuadMember::Psi1)).unwrap());
        assert_eq!(
            catalog(&Catalog::PsiPrimeN(1)).unwrap(),
            catalog(&Catalog::Quad(QuadMember::Psi1Prime)).unwrap()
        );
    }

    #[test]
    fn lookup_by_name() {
        let p: BTreeMap<String, String> = [("N".to_string(), "3".to_string())].into_iter().collect();
        assert_eq!(Catalog::from_name("phi_N", &p).unwrap(), Catalog::PhiN(3));
        assert!(matches!(Catalog::from_name("nope", &p), Err(Error::UnknownName(_))));
        assert!(matches!(Catalog::from_name("psi_nm", &p), Err(Error::InvalidParams(_))));
        assert!(catalog_list().iter().any(|e| e.name == "phi_sph_inf" && e.params.is_empty()));
    }

    #[test]
    fn quadruple_are_flows() {
        for q in [QuadMember::Phi1, QuadMember::Psi1, QuadMember::Psi1Prime, QuadMember::Phi1Prime] {
            let f = catalog(&Catalog::Quad(q)).unwrap();
            assert!(verify_translation(&f, VerifyMode::Exact).unwrap().pass, "{q:?}");
        }
    }
}
