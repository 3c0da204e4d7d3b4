//! Inductive construction of flows one dimension up from a flow and a homogeneous
//! first integral, n-dimensional level-0 flows, and hyperplane sections.

use crate::algebra::{MPoly, RatFunc, Var};
use crate::error::{domain, Error, Result};
use crate::flowcore::{shift_rational, FlowMap, ShiftEvaluator, VectorField};
use std::collections::BTreeMap;
use std::fmt;

/// Homogeneous integral W in the base coordinates plus one new coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct Integral3 {
    pub w: RatFunc,
    pub degree: i64,
}

impl Integral3 {
    pub fn new(w: RatFunc) -> Result<Self> {
        let degree = w.homogeneity_degree().ok_or_else(|| domain(format!("W = {w} is not homogeneous")))?;
        Ok(Integral3 { w, degree })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Integral3::new(crate::algebra::parse_ratfunc(text)?)
    }
}

impl fmt::Display for Integral3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.w)
    }
}

/// The single variable of W outside the base coordinates.
fn new_coordinate(base: &[Var], w: &RatFunc) -> Result<Var> {
    let extra: Vec<Var> = w.vars().into_iter().filter(|v| !base.contains(v)).collect();
    match extra[..] {
        [v] => Ok(v),
        [] => Err(domain(format!("W = {w} does not depend on a new coordinate"))),
        _ => Err(domain(format!("W = {w} has more than one new coordinate"))),
    }
}

/// Polynomial equation Σ c_k·T^k = 0 for the new component, with the branch taken
/// by continuation in time from T = z.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtrusionEquation {
    pub coeffs: Vec<RatFunc>,
    base: FlowMap,
    w: RatFunc,
    new: Var,
}

const CONTINUATION_STEPS: usize = 64;

impl ExtrusionEquation {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut v = self.base.vars().to_vec();
        v.push(self.new);
        v
    }

    /// Φ^t at a point of the extended space.
    pub fn eval(&self, point: &[f64], t: f64) -> Result<Vec<f64>> {
        let n = self.base.dim();
        if point.len() != n + 1 {
            return Err(domain(format!("expected {} coordinates", n + 1)));
        }
        let vars = self.vars();
        let ev = ShiftEvaluator::new(&self.base)?;
        let (num, den) = (self.w.num(), self.w.den());
        let (num_t, den_t) = (num.diff(self.new), den.diff(self.new));
        let at = |p: &MPoly, x: &[f64], last: f64| {
            p.eval_f64(&|v| match vars.iter().position(|&u| u == v) {
                Some(i) if i < n => x[i],
                Some(_) => last,
                None => f64::NAN,
            })
        };
        let (n0, d0) = (at(num, point, point[n]), at(den, point, point[n]));
        let mut last = point[n];
        let mut moved = point[..n].to_vec();
        for k in 1..=CONTINUATION_STEPS {
            let s = t * k as f64 / CONTINUATION_STEPS as f64;
            moved = ev.eval(&point[..n], s)?;
            let mut converged = false;
            for _ in 0..50 {
                let g = at(num, &moved, last) * d0 - at(den, &moved, last) * n0;
                let dg = at(&num_t, &moved, last) * d0 - at(&den_t, &moved, last) * n0;
                if dg == 0.0 || !dg.is_finite() {
                    break;
                }
                let step = g / dg;
                last -= step;
                if step.abs() <= 1e-15 * last.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged || !last.is_finite() {
                return Err(Error::Branch(format!("continuation lost the branch at t = {s}")));
            }
        }
        moved.push(last);
        Ok(moved)
    }
}

impl fmt::Display for ExtrusionEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("({c})*T^{k}"))
            .collect();
        write!(f, "{} = 0", terms.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Extruded {
    Rational(FlowMap),
    Algebraic(ExtrusionEquation),
}

impl Extruded {
    pub fn rational(self) -> Option<FlowMap> {
        match self {
            Extruded::Rational(f) => Some(f),
            Extruded::Algebraic(_) => None,
        }
    }
}

/// Solve W(φ(x), T) = W(x, z) for T. The result is rational exactly when W is
/// linear-fractional in the new coordinate.
pub fn extrude_flow(phi: &FlowMap, integral: &Integral3) -> Result<Extruded> {
    let new = new_coordinate(phi.vars(), &integral.w)?;
    let comps = phi.rational_components().ok_or_else(|| domain("extrusion needs a rational base flow"))?;
    let t = Var::aux(3);
    let mut sub: BTreeMap<Var, RatFunc> = phi.vars().iter().copied().zip(comps.iter().cloned()).collect();
    sub.insert(new, RatFunc::var(t));
    let g = &integral.w.substitute(&sub)? - &integral.w;
    let coeffs: Vec<RatFunc> = g
        .num()
        .coeffs_in(t)
        .into_iter()
        .map(|c| RatFunc::from_poly(c).checked_div(&RatFunc::from_poly(g.den().clone())))
        .collect::<Result<_>>()?;
    let mut vars = phi.vars().to_vec();
    vars.push(new);
    match coeffs.len() {
        0 | 1 => Err(domain(format!("W = {} gives no equation for the new component", integral.w))),
        2 => {
            let last = (-&coeffs[0]).checked_div(&coeffs[1])?;
            let mut all = comps;
            all.push(last);
            Ok(Extruded::Rational(FlowMap::from_rational(vars, all)?))
        }
        _ => Ok(Extruded::Algebraic(ExtrusionEquation { coeffs, base: phi.clone(), w: integral.w.clone(), new })),
    }
}

/// Extends a field by σ = −(Σ W_{x_i}·V_i)/W_z so that W is a first integral.
pub fn vf3_from_integral(v: &VectorField, integral: &Integral3) -> Result<VectorField> {
    let new = new_coordinate(v.vars(), &integral.w)?;
    let wz = integral.w.diff(new);
    if wz.is_zero() {
        return Err(domain("W_z vanishes identically"));
    }
    let terms: Vec<RatFunc> = v.vars().iter().zip(v.components()).map(|(&x, c)| &integral.w.diff(x) * c).collect();
    let sigma = (-&RatFunc::sum(&terms)).checked_div(&wz)?;
    let mut vars = v.vars().to_vec();
    vars.push(new);
    let mut comps = v.components().to_vec();
    comps.push(sigma);
    VectorField::new(vars, comps)
}

/// x_i/(1 − J(x)) in n coordinates.
pub fn level0_ndim(j: &RatFunc, n: usize) -> Result<FlowMap> {
    let vars = Var::coords(n);
    if let Some(v) = j.vars().into_iter().find(|v| !vars.contains(v)) {
        return Err(domain(format!("J uses {v}, not a coordinate of dimension {n}")));
    }
    if j.homogeneity_degree() != Some(1) {
        return Err(domain(format!("J = {j} is not 1-homogeneous")));
    }
    let den = &RatFunc::one() - j;
    let comps = vars.iter().map(|&v| RatFunc::var(v).checked_div(&den)).collect::<Result<_>>()?;
    FlowMap::from_rational(vars, comps)
}

/// F(x, t) = t⁻¹·φ(x·t, t), i.e. the time-t map restricted to the hyperplane where
/// the last coordinate is 1.
pub struct Section {
    phi: FlowMap,
    time: Var,
    symbolic: Option<Vec<RatFunc>>,
}

impl Section {
    pub fn time(&self) -> Var {
        self.time
    }

    /// Components of F((x, 1), t) in the first n coordinates and t, when rational.
    pub fn symbolic(&self) -> Option<&[RatFunc]> {
        self.symbolic.as_deref()
    }

    /// True when the hyperplane is invariant, so the first n slots form a flow on their own.
    pub fn is_affine(&self) -> bool {
        self.symbolic.as_ref().is_some_and(|s| s.last().is_some_and(RatFunc::is_one))
    }

    /// t⁻¹·φ(p·t) at an arbitrary point p of the (n+1)-space.
    pub fn eval(&self, p: &[f64], t: f64) -> Result<Vec<f64>> {
        ShiftEvaluator::new(&self.phi)?.eval(p, t)
    }

    pub fn eval_on_hyperplane(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut p = x.to_vec();
        p.push(1.0);
        self.eval(&p, t)
    }

    /// F(F((x,1), s), t) = F((x,1), s + t), checked symbolically.
    pub fn check_composition(&self) -> Result<bool> {
        let Some(f) = &self.symbolic else {
            return Err(domain("composition law is checked symbolically only for rational flows"));
        };
        let s = Var::aux(5);
        let vars = self.phi.vars();
        let comps = self.phi.rational()?;
        let rename_t = |r: &RatFunc, to: Var| r.rename(&[(self.time, to)].into_iter().collect());
        let inner: BTreeMap<Var, RatFunc> = vars.iter().copied().zip(f.iter().map(|c| rename_t(c, s))).collect();
        let outer: Vec<RatFunc> = comps
            .iter()
            .map(|c| shift_rational(c, vars, self.time).substitute(&inner))
            .collect::<Result<_>>()?;
        let sum = &RatFunc::var(self.time) + &RatFunc::var(s);
        let direct: Vec<RatFunc> =
            f.iter().map(|c| c.substitute(&[(self.time, sum.clone())].into_iter().collect())).collect::<Result<_>>()?;
        Ok(outer == direct)
    }
}

pub fn section_affine(phi: &FlowMap) -> Result<Section> {
    let time = Var::from_name("t").expect("letter variable");
    if phi.vars().contains(&time) || phi.dim() < 2 {
        return Err(domain("section needs at least two coordinates, none named t"));
    }
    let symbolic = match phi.rational_components() {
        Some(comps) => {
            let last = *phi.vars().last().expect("nonempty");
            let pin: BTreeMap<Var, RatFunc> = [(last, RatFunc::one())].into_iter().collect();
            Some(comps.iter().map(|c| shift_rational(c, phi.vars(), time).substitute(&pin)).collect::<Result<Vec<_>>>()?)
        }
        None => None,
    };
    Ok(Section { phi: phi.clone(), time, symbolic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_ratfunc, Rat};
    use crate::classify::is_solenoidal;
    use crate::conjugation::{conjugate_flow, Conjugator, TupleMap};
    use crate::flowcore::{catalog, level0_detect, vector_field, verify_translation, Catalog, VerifyMode};
    use crate::random;
    use num_traits::Zero;

    fn rf(s: &str) -> RatFunc {
        parse_ratfunc(s).unwrap()
    }

    fn xyz() -> Vec<Var> {
        vec![Var::X, Var::Y, Var::Z]
    }

    fn tuple(fwd: &str, inv: &str) -> Conjugator {
        Conjugator::Tuple(TupleMap::parse(xyz(), fwd, inv).unwrap())
    }

    #[test]
    fn extrusion_of_phi_hat() {
        let w = Integral3::parse("z*(x^2+x*y)").unwrap();
        assert_eq!(w.degree, 3);
        let ell = tuple("x, y, y*z/(x+y)", "x, y, (x+y)*z/y");
        for n in 1..=5 {
            let base = catalog(&Catalog::PhiHatN(n)).unwrap();
            let big = extrude_flow(&base, &w).unwrap().rational().unwrap();
            let t = rf(&format!("z*(x+y)*(x+1)^2/(x+(x+1)^{n}*y)"));
            assert_eq!(big.rational().unwrap()[2], t);
            assert!(verify_translation(&big, VerifyMode::Exact).unwrap().pass);
            let expect = FlowMap::parse_with(&format!("x/(x+1), y*(x+1)^({}), z*(x+1)^({})", n - 1, 2 - n), &xyz()).unwrap();
            assert_eq!(conjugate_flow(&big, &ell).unwrap(), expect);
        }
    }

    #[test]
    fn extrusion_with_monomial_integral() {
        let base = FlowMap::parse("x/(x+1), y/(y+1)").unwrap();
        for (a, b) in [(2, 2), (-1, 3), (0, -2)] {
            let w = Integral3::parse(&format!("z*x^({a})*y^({b})")).unwrap();
            let big = extrude_flow(&base, &w).unwrap().rational().unwrap();
            assert_eq!(big, catalog(&Catalog::PhiAB(a, b)).unwrap());
        }
        assert!(extrude_flow(&base, &Integral3::parse("x*y").unwrap()).is_err());
    }

    #[test]
    fn zero_degree_integral() {
        let base = FlowMap::parse("x/(x+1), y/(y+1)").unwrap();
        let w = Integral3::parse("z/(x+y)").unwrap();
        assert_eq!(w.degree, 0);
        let big = extrude_flow(&base, &w).unwrap().rational().unwrap();
        assert!(verify_translation(&big, VerifyMode::Exact).unwrap().pass);
    }

    #[test]
    fn quadratic_integral_gives_branch_evaluator() {
        let base = FlowMap::parse("x/(x+1), y/(y+1)").unwrap();
        let Extruded::Algebraic(eq) = extrude_flow(&base, &Integral3::parse("z^2+x*y").unwrap()).unwrap() else {
            panic!("expected an algebraic extrusion")
        };
        assert_eq!(eq.degree(), 2);
        let p = [0.2, 0.3, 0.25];
        let t = 0.4;
        let got = eq.eval(&p, t).unwrap();
        let (u, v) = (p[0] / (1.0 + t * p[0]), p[1] / (1.0 + t * p[1]));
        let closed = (p[2] * p[2] + p[0] * p[1] - u * v).sqrt();
        assert!((got[2] - closed).abs() < 1e-12);
        let two_steps = eq.eval(&eq.eval(&p, 0.15).unwrap(), 0.25).unwrap();
        for (a, b) in two_steps.iter().zip(&got) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fourth_coordinate_by_iteration() {
        let base = FlowMap::parse("x/(x+1), y/(y+1)").unwrap();
        let three = extrude_flow(&base, &Integral3::parse("z*x*y").unwrap()).unwrap().rational().unwrap();
        let four = extrude_flow(&three, &Integral3::parse("w*z").unwrap()).unwrap().rational().unwrap();
        assert_eq!(four.dim(), 4);
        assert!(verify_translation(&four, VerifyMode::Exact).unwrap().pass);
    }

    #[test]
    fn third_component_of_field() {
        let w = Integral3::parse("z*(x^2+x*y)").unwrap();
        for n in 1..=4 {
            let base = catalog(&Catalog::PhiHatN(n)).unwrap();
            let v3 = vf3_from_integral(&vector_field(&base).unwrap(), &w).unwrap();
            let big = extrude_flow(&base, &w).unwrap().rational().unwrap();
            assert_eq!(v3, vector_field(&big).unwrap());
        }
        let zero = VectorField::zero(vec![Var::X, Var::Y]);
        assert!(vf3_from_integral(&zero, &w).unwrap().components()[2].is_zero());
        assert!(vf3_from_integral(&zero, &Integral3::parse("x+y").unwrap()).is_err());
    }

    #[test]
    fn solenoidal_families() {
        for n in -1..=4 {
            for m in -1..=4 {
                let v = vector_field(&catalog(&Catalog::PsiNm(n, m)).unwrap()).unwrap();
                let expect = VectorField::parse_with(&format!("{}*x*w, {}*y*w, -w^2", n - 1, m - 1), &[Var::X, Var::Y, Var::W]).unwrap();
                assert_eq!(v, expect);
                assert_eq!(is_solenoidal(&v), n + m == 4, "n={n} m={m}");
            }
        }
        for a in -2..=3 {
            for b in -2..=3 {
                let v = vector_field(&catalog(&Catalog::PhiAB(a, b)).unwrap()).unwrap();
                assert_eq!(is_solenoidal(&v), a == 2 && b == 2);
            }
        }
        let mut r = random::rng(0);
        for _ in 0..10 {
            let l: Vec<Rat> = (0..3).map(|_| random::nonzero_rat(&mut r)).collect();
            let s: Vec<Rat> = (0..3).map(|_| random::small_rat(&mut r)).collect();
            let c = vec![&l[1] * &s[2] - &l[2] * &s[1], &l[2] * &s[0] - &l[0] * &s[2], &l[0] * &s[1] - &l[1] * &s[0]];
            if c.iter().all(Zero::is_zero) {
                continue;
            }
            let v = vector_field(&catalog(&Catalog::PhiCL { c, l }).unwrap()).unwrap();
            assert!(is_solenoidal(&v));
        }
    }

    #[test]
    fn phi_ab_conjugation_laws() {
        let inv_z = tuple("x, y, x^2/z", "x, y, x^2/z");
        let inv_xy = tuple("x, y, x*y/z", "x, y, x*y/z");
        for a in -2..=3 {
            for b in -2..=3 {
                let f = catalog(&Catalog::PhiAB(a, b)).unwrap();
                let swapped = conjugate_flow(&f, &inv_z).unwrap();
                assert_eq!(swapped, catalog(&Catalog::PhiAB(-2 - a, -b)).unwrap());
                assert_ne!(swapped, catalog(&Catalog::PhiAB(2 - a, -b)).unwrap());
                assert_eq!(conjugate_flow(&f, &inv_xy).unwrap(), catalog(&Catalog::PhiAB(-1 - a, -1 - b)).unwrap());
            }
        }
    }

    #[test]
    fn level0_in_any_dimension() {
        let f = level0_ndim(&rf("x+y+z"), 3).unwrap();
        assert_eq!(f, FlowMap::parse("x/(1-x-y-z), y/(1-x-y-z), z/(1-x-y-z)").unwrap());
        assert!(verify_translation(&f, VerifyMode::Exact).unwrap().pass);
        let j = rf("x*y/(x+y)");
        let f = level0_ndim(&j, 2).unwrap();
        let (found, again) = level0_detect(&vector_field(&f).unwrap()).unwrap().unwrap();
        assert_eq!((found, again), (j, f));
        assert!(level0_ndim(&rf("x^2"), 2).is_err());
        assert!(level0_ndim(&rf("z"), 2).is_err());
        assert!(verify_translation(&level0_ndim(&rf("x1-x5"), 5).unwrap(), VerifyMode::Exact).unwrap().pass);
    }

    #[test]
    fn sections() {
        let s = section_affine(&catalog(&Catalog::PhiAB(2, 2)).unwrap()).unwrap();
        assert!(s.check_composition().unwrap());
        assert!(!s.is_affine());

        let id = section_affine(&FlowMap::parse("x, y, z").unwrap()).unwrap();
        assert_eq!(id.symbolic().unwrap(), &[rf("x"), rf("y"), rf("1")][..]);
        assert!(id.is_affine());

        let psi = section_affine(&catalog(&Catalog::PsiNm(2, 2)).unwrap()).unwrap();
        assert_eq!(psi.symbolic().unwrap(), &[rf("x*(t+1)"), rf("y*(t+1)"), rf("1/(t+1)")][..]);
        assert!(psi.check_composition().unwrap());

        // invariant hyperplane: the first slot alone is a flow in one variable
        let aff = section_affine(&FlowMap::parse("x+y^2, y").unwrap()).unwrap();
        assert!(aff.is_affine());
        assert_eq!(aff.symbolic().unwrap()[0], rf("x+t"));
        assert!(aff.check_composition().unwrap());
        let p = aff.eval_on_hyperplane(&[0.3], 0.2).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
        let quad = section_affine(&FlowMap::parse("x/(1-x), y").unwrap()).unwrap();
        assert_eq!(quad.symbolic().unwrap()[0], rf("x/(1-x*t)"));
        assert!(quad.check_composition().unwrap());
    }
}
