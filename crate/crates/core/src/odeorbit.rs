//! The fundamental ODE f·A + f′·B = ±1 of a planar field, its radical solutions,
//! orbit integrals, and flows rebuilt from ODE data or from a first integral.

use crate::algebra::factor::factor;
use crate::algebra::linsolve::solve_affine;
use crate::algebra::{partial_fractions, MPoly, Rat, RatFunc, UPoly, Var};
use crate::error::{domain, Error, Result};
use crate::flowcore::verify::{sample_point, TIME_BOX};
use crate::flowcore::{FlowMap, ShiftEvaluator, VectorField, VerificationReport, VerifyMode};
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Sign of the right-hand side of the fundamental ODE.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rhs {
    Plus,
    Minus,
}

impl Rhs {
    pub fn from_sign(s: i64) -> Result<Rhs> {
        match s {
            1 => Ok(Rhs::Plus),
            -1 => Ok(Rhs::Minus),
            _ => Err(Error::InvalidParams(format!("rhs must be +1 or -1, got {s}"))),
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            Rhs::Plus => 1,
            Rhs::Minus => -1,
        }
    }

    pub fn value(self) -> Rat {
        Rat::from_integer(self.sign().into())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalOde {
    /// ρ(x, 1)
    pub a: RatFunc,
    /// xρ(x, 1) − ϖ(x, 1)
    pub b: RatFunc,
    pub rhs: Rhs,
}

fn x() -> RatFunc {
    RatFunc::var(Var::X)
}

fn y() -> RatFunc {
    RatFunc::var(Var::Y)
}

fn at_y_one(f: &RatFunc) -> Result<RatFunc> {
    f.substitute(&[(Var::Y, RatFunc::one())].into_iter().collect())
}

/// y^k f(x/y) for a univariate f in x.
fn homogenize(f: &RatFunc, k: u32) -> Result<RatFunc> {
    let ratio = x().checked_div(&y())?;
    let g = f.substitute(&[(Var::X, ratio)].into_iter().collect())?;
    Ok(&g * &RatFunc::from_poly(MPoly::var(Var::Y).pow(k)))
}

pub fn fundamental_ode(v: &VectorField, rhs: Rhs) -> Result<FundamentalOde> {
    let (p, r) = v.pair()?;
    let k = &(&x() * r) - &(&y() * p);
    if k.is_zero() {
        return Err(domain("xρ − yϖ vanishes identically (level-0 field)"));
    }
    Ok(FundamentalOde { a: at_y_one(r)?, b: at_y_one(&k)?, rhs })
}

/// f = r + σ·q^(1/N).
#[derive(Clone, Debug, PartialEq)]
pub struct OdeSolution {
    pub r: RatFunc,
    pub q: RatFunc,
    pub n: u32,
    pub rhs: Rhs,
}

impl OdeSolution {
    /// Both residual identities, exactly.
    pub fn check(&self, ode: &FundamentalOde) -> bool {
        let n = RatFunc::int(i64::from(self.n));
        let part = &(&self.r * &ode.a) + &(&self.r.diff(Var::X) * &ode.b);
        let hom = &(&(&n * &self.q) * &ode.a) + &(&self.q.diff(Var::X) * &ode.b);
        part == RatFunc::constant(ode.rhs.value()) && hom.is_zero()
    }
}

impl fmt::Display for OdeSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f = {} + σ·({})^(1/{})", self.r, self.q, self.n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OdeOutcome {
    Solved(OdeSolution),
    NonAlgebraicHomogeneous(String),
    NoRationalParticularWithinBound { max_deg: i64 },
}

impl OdeOutcome {
    pub fn verdict(&self) -> &'static str {
        match self {
            OdeOutcome::Solved(_) => "Solved",
            OdeOutcome::NonAlgebraicHomogeneous(_) => "NonAlgebraicHomogeneous",
            OdeOutcome::NoRationalParticularWithinBound { .. } => "NoRationalParticularWithinBound",
        }
    }

    pub fn solution(&self) -> Option<&OdeSolution> {
        match self {
            OdeOutcome::Solved(s) => Some(s),
            _ => None,
        }
    }
}

fn upoly(p: &MPoly) -> Result<UPoly> {
    UPoly::from_mpoly(p, Var::X)
}

fn degree(p: &MPoly) -> i64 {
    i64::from(p.degree_in(Var::X))
}

pub fn default_max_deg(ode: &FundamentalOde) -> i64 {
    2 * (degree(ode.a.den()) + degree(ode.b.den())) + 4
}

struct Homogeneous {
    q: RatFunc,
    n: u32,
    residues: Vec<(UPoly, Rat)>,
}

fn homogeneous_part(ode: &FundamentalOde) -> Result<std::result::Result<Homogeneous, String>> {
    if ode.a.is_zero() {
        return Ok(Ok(Homogeneous { q: RatFunc::one(), n: 1, residues: Vec::new() }));
    }
    let ratio = (-&ode.a).checked_div(&ode.b)?;
    let pf = partial_fractions(&ratio)?;
    if !pf.poly_part.is_zero() {
        return Ok(Err(format!("−A/B has polynomial part {}", pf.poly_part_mpoly())));
    }
    let mut residues = Vec::new();
    for t in &pf.terms {
        let p = t.factor.to_mpoly(Var::X);
        if !t.is_simple() {
            return Ok(Err(format!("−A/B has a pole of order {} at the roots of {p}", t.multiplicity)));
        }
        match &t.residue {
            Some(r) => residues.push((t.factor.clone(), r.clone())),
            None => return Ok(Err(format!("residue of −A/B at the roots of {p} is not rational"))),
        }
    }
    let n = crate::algebra::rat::lcm_denoms(residues.iter().map(|(_, r)| r));
    let n = n.to_u32().ok_or_else(|| domain("level does not fit in u32"))?;
    let mut q = RatFunc::one();
    for (p, r) in &residues {
        let e = (r * Rat::from_integer(n.into())).to_integer().to_i64().ok_or_else(|| domain("exponent overflow"))?;
        q = &q * &RatFunc::from_poly(p.to_mpoly(Var::X)).pow(e)?;
    }
    Ok(Ok(Homogeneous { q, n, residues }))
}

fn bump(exps: &mut Vec<(UPoly, u32)>, p: UPoly, e: u32) {
    match exps.iter_mut().find(|(f, _)| *f == p) {
        Some((_, old)) => *old = (*old).max(e),
        None => exps.push((p, e)),
    }
}

/// Rational particular solution with denominator D and numerator degree ≤ max_deg + deg D.
fn particular(ode: &FundamentalOde, h: &Homogeneous, max_deg: i64) -> Result<Option<RatFunc>> {
    let (an, ad) = (upoly(ode.a.num())?, upoly(ode.a.den())?);
    let (bn, bd) = (upoly(ode.b.num())?, upoly(ode.b.den())?);
    let mut exps = Vec::new();
    for poly in [&bn, &bd, &ad] {
        for (p, m) in factor(poly) {
            bump(&mut exps, p, m);
        }
    }
    for (p, r) in &h.residues {
        let k = -(r * Rat::from_integer(h.n.into()));
        let k = if k.is_positive() { k.to_integer().to_u32().unwrap_or(u32::MAX) } else { 0 };
        bump(&mut exps, p.clone(), k);
    }
    let d = exps.iter().fold(UPoly::one(), |acc, (p, e)| &acc * &p.pow(e + 1));
    let dd = d.derivative();
    let deg_n = (max_deg + d.degree()).max(0) as u32;
    let cols: Vec<UPoly> = (0..=deg_n)
        .map(|k| {
            let xk = UPoly::x().pow(k);
            let dxk = if k == 0 { UPoly::zero() } else { UPoly::x().pow(k - 1).scale(&Rat::from_integer(k.into())) };
            let left = &(&(&xk * &d) * &an) * &bd;
            let right = &(&(&(&dxk * &d) - &(&xk * &dd)) * &bn) * &ad;
            &left + &right
        })
        .collect();
    let target = (&(&(&d * &d) * &bd) * &ad).scale(&ode.rhs.value());
    let rows = cols.iter().map(UPoly::degree).chain([target.degree()]).max().unwrap_or(0).max(0) as usize + 1;
    let matrix: Vec<Vec<Rat>> = (0..rows).map(|i| cols.iter().map(|c| c.coeff(i)).collect()).collect();
    let rhs: Vec<Rat> = (0..rows).map(|i| target.coeff(i)).collect();
    let Some((sol, _)) = solve_affine(&matrix, &rhs) else { return Ok(None) };
    let num = UPoly::new(sol);
    Ok(Some(RatFunc::new(num.to_mpoly(Var::X), d.to_mpoly(Var::X))?))
}

/// Canonical representative of r modulo ℚ·q: over the common denominator L,
/// the numerator has no term in x^deg(qL).
pub fn normalize_modulo(r: &RatFunc, q: &RatFunc) -> Result<RatFunc> {
    let (rd, qd) = (upoly(r.den())?, upoly(q.den())?);
    let l = (&rd * &qd).div_exact(&rd.gcd(&qd)).expect("gcd divides");
    let lf = RatFunc::from_poly(l.to_mpoly(Var::X));
    let a = upoly((r * &lf).num())?;
    let b = upoly((q * &lf).num())?;
    let c = -(a.coeff(b.degree() as usize) / b.lc());
    Ok(r + &q.scale(&c))
}

/// Radical solutions of the fundamental ODE: homogeneous part from the residues
/// of −A/B, then a rational particular solution by undetermined coefficients.
pub fn solve_ode_radical(ode: &FundamentalOde, max_deg: i64) -> Result<OdeOutcome> {
    if max_deg < 0 {
        return Err(Error::InvalidParams(format!("max_deg must be ≥ 0, got {max_deg}")));
    }
    if ode.b.is_zero() {
        return Err(domain("B vanishes identically"));
    }
    let h = match homogeneous_part(ode)? {
        Ok(h) => h,
        Err(why) => return Ok(OdeOutcome::NonAlgebraicHomogeneous(why)),
    };
    let Some(mut r) = particular(ode, &h, max_deg)? else {
        return Ok(OdeOutcome::NoRationalParticularWithinBound { max_deg });
    };
    if h.n == 1 {
        r = normalize_modulo(&r, &h.q)?;
    }
    let sol = OdeSolution { r, q: h.q, n: h.n, rhs: ode.rhs };
    if !sol.check(ode) {
        return Err(domain(format!("residual check failed for {sol}")));
    }
    Ok(OdeOutcome::Solved(sol))
}

/// A homogeneous first integral together with its degree.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitIntegral {
    pub w: RatFunc,
    pub degree: i64,
}

impl OrbitIntegral {
    pub fn new(w: RatFunc) -> Result<Self> {
        if w.is_zero() {
            return Err(domain("orbit integral must be nonzero"));
        }
        let degree = w.homogeneity_degree().ok_or_else(|| domain(format!("`{w}` is not homogeneous")))?;
        Ok(OrbitIntegral { w, degree })
    }
}

impl fmt::Display for OrbitIntegral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.w)
    }
}

/// W(x, y) = y^N / q(x/y).
pub fn orbit_integral_from_q(q: &RatFunc, n: u32) -> Result<OrbitIntegral> {
    if q.is_zero() {
        return Err(domain("q must be nonzero"));
    }
    let w = homogenize(&q.recip()?, n)?;
    OrbitIntegral::new(w)
}

/// The first-integral identity Σ W_{x_i}·V_i = 0.
pub fn verify_orbit(w: &OrbitIntegral, v: &VectorField) -> bool {
    let terms: Vec<RatFunc> = v.vars().iter().zip(v.components()).map(|(&x, c)| &w.w.diff(x) * c).collect();
    w.w.vars().iter().all(|u| v.vars().contains(u)) && RatFunc::sum(&terms).is_zero()
}

/// Solve rρ + r′(xρ − ϖ) = 1, Nqρ + q′(xρ − ϖ) = 0 and homogenize.
pub fn vf_from_ode_data(r: &RatFunc, q: &RatFunc, n: u32) -> Result<VectorField> {
    let n = RatFunc::int(i64::from(n));
    let (dr, dq) = (r.diff(Var::X), q.diff(Var::X));
    let det = &(r * &dq) - &(&(&n * &dr) * q);
    if det.is_zero() {
        return Err(Error::Singular("rq′ = N r′q: r is a multiple of q^(1/N)".into()));
    }
    let rho = dq.checked_div(&det)?;
    let e = (-&(&n * q)).checked_div(&det)?;
    let varpi = &(&x() * &rho) - &e;
    VectorField::planar(homogenize(&varpi, 2)?, homogenize(&rho, 2)?)
}

/// F(x, y) = (1/y)·f(x/y).
fn implicit_f(f: &RatFunc) -> Result<RatFunc> {
    homogenize(f, 0)?.checked_div(&y())
}

/// Implicit system: W(u, v) = W(x, y) and F(u, v) = F(x, y) − rhs
/// with F(x, y) = f(x/y)/y.
pub fn verify_implicit(phi: &FlowMap, f: &RatFunc, rhs: Rhs, w: &OrbitIntegral, mode: VerifyMode) -> Result<VerificationReport> {
    if phi.dim() != 2 {
        return Err(domain("implicit system is planar"));
    }
    let big_f = implicit_f(f)?;
    match mode {
        VerifyMode::Exact => {
            let comps = phi.rational()?;
            let map: BTreeMap<Var, RatFunc> = [(Var::X, comps[0].clone()), (Var::Y, comps[1].clone())].into_iter().collect();
            let report = VerificationReport::new(mode, None);
            let w_uv = w.w.substitute(&map)?;
            if w_uv != w.w {
                return Ok(report.fail("W(u,v) = W(x,y)", w_uv, &w.w));
            }
            let f_uv = big_f.substitute(&map)?;
            let want = &big_f - &RatFunc::constant(rhs.value());
            if f_uv != want {
                return Ok(report.fail("F(u,v) = F(x,y) − rhs", f_uv, want));
            }
            Ok(report)
        }
        VerifyMode::Numeric { tol, samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<(Vec<f64>, f64)> =
                (0..samples).map(|_| (sample_point(&mut rng, 2), rng.gen_range(TIME_BOX.0..TIME_BOX.1))).collect();
            implicit_numeric(phi, &big_f, rhs, w, &pts, tol, mode)
        }
        VerifyMode::Series(_) => Err(Error::InvalidParams("implicit system supports exact or numeric mode".into())),
    }
}

/// Numeric check of the implicit system for φ itself (z = 1) at the given points.
pub fn verify_implicit_at(phi: &FlowMap, f: &RatFunc, rhs: Rhs, w: &OrbitIntegral, points: &[Vec<f64>], tol: f64) -> Result<VerificationReport> {
    let big_f = implicit_f(f)?;
    let pts: Vec<(Vec<f64>, f64)> = points.iter().map(|p| (p.clone(), 1.0)).collect();
    let mode = VerifyMode::Numeric { tol, samples: points.len(), seed: 0 };
    implicit_numeric(phi, &big_f, rhs, w, &pts, tol, mode)
}

fn implicit_numeric(
    phi: &FlowMap,
    big_f: &RatFunc,
    rhs: Rhs,
    w: &OrbitIntegral,
    pts: &[(Vec<f64>, f64)],
    tol: f64,
    mode: VerifyMode,
) -> Result<VerificationReport> {
    let ev = ShiftEvaluator::new(phi)?;
    let report = VerificationReport::new(mode, Some(pts.len()));
    let at = |g: &RatFunc, p: &[f64]| g.eval_f64(&|v| if v == Var::X { p[0] } else { p[1] });
    let close = |a: f64, b: f64| a.is_finite() && (a - b).abs() <= tol * b.abs().max(1.0);
    for (p, z) in pts {
        let u = ev.eval(p, *z)?;
        let loc = format!("x={p:?}, z={z}");
        let (w0, w1) = (at(&w.w, p), at(&w.w, &u));
        if !close(w1, w0) {
            return Ok(report.fail(format!("W at {loc}"), w1, w0));
        }
        let (f0, f1) = (at(big_f, p) - z * rhs.sign() as f64, at(big_f, &u));
        if !close(f1, f0) {
            return Ok(report.fail(format!("F at {loc}"), f1, f0));
        }
    }
    Ok(report)
}

/// Sign of the second field component in the univariate form: ρ = −y² or ρ = +y².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SecondSlot {
    #[default]
    NegSquare,
    PosSquare,
}

impl SecondSlot {
    fn sign(self) -> i64 {
        match self {
            SecondSlot::NegSquare => -1,
            SecondSlot::PosSquare => 1,
        }
    }

    /// The second flow component y/(1 − s·y).
    pub fn component(self) -> RatFunc {
        let den = &RatFunc::one() - &y().scale(&Rat::from_integer(self.sign().into()));
        y().checked_div(&den).expect("nonzero")
    }
}

/// Polynomial equation Σ c_k(x, y)·𝒰^k = 0 for the first flow component,
/// with the branch selected by continuation from 𝒰 = x at z = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicEquation {
    pub coeffs: Vec<RatFunc>,
    w: RatFunc,
    slot: SecondSlot,
}

const CONTINUATION_STEPS: usize = 64;

impl AlgebraicEquation {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// First component of φ^z at (x, y).
    pub fn eval(&self, x0: f64, y0: f64, z: f64) -> Result<f64> {
        let (n, d) = (self.w.num(), self.w.den());
        let (nx, dx) = (n.diff(Var::X), d.diff(Var::X));
        let ev = |p: &MPoly, a: f64, b: f64| p.eval_f64(&|v| if v == Var::X { a } else { b });
        let (n0, d0) = (ev(n, x0, y0), ev(d, x0, y0));
        let s = self.slot.sign() as f64;
        let mut u = x0;
        for k in 1..=CONTINUATION_STEPS {
            let t = z * k as f64 / CONTINUATION_STEPS as f64;
            let v = y0 / (1.0 - s * t * y0);
            let mut converged = false;
            for _ in 0..50 {
                let g = ev(n, u, v) * d0 - ev(d, u, v) * n0;
                let dg = ev(&nx, u, v) * d0 - ev(&dx, u, v) * n0;
                if dg == 0.0 || !dg.is_finite() {
                    break;
                }
                let step = g / dg;
                u -= step;
                if step.abs() <= 1e-15 * u.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged || !u.is_finite() {
                return Err(Error::Branch(format!("continuation lost the branch at z = {t}")));
            }
        }
        Ok(u)
    }
}

impl fmt::Display for AlgebraicEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("({c})*U^{k}"))
            .collect();
        write!(f, "{} = 0", terms.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum IntegralFlow {
    Rational(FlowMap),
    Algebraic(AlgebraicEquation),
}

/// Solve W(𝒰, y/(1 − s·y)) = W(x, y) for 𝒰 and return the field
/// ϖ = −s(N·y·W/W_x − xy), ρ = s·y².
pub fn flow_from_integral_univariate(w: &OrbitIntegral, slot: SecondSlot) -> Result<(IntegralFlow, VectorField)> {
    let wx = w.w.diff(Var::X);
    if wx.is_zero() {
        return Err(domain("W does not depend on x"));
    }
    if is_perfect_power(&w.w) {
        return Err(domain(format!("W = {} is a perfect power", w.w)));
    }
    let s = RatFunc::int(slot.sign());
    let n = RatFunc::int(w.degree);
    let xy = &x() * &y();
    let varpi = -&(&s * &(&(&(&n * &y()) * &w.w).checked_div(&wx)? - &xy));
    let rho = &s * &(&y() * &y());
    let field = VectorField::planar(varpi, rho)?;

    let u = Var::aux(0);
    let v = slot.component();
    let at_uv = |p: &MPoly| RatFunc::from_poly(p.clone()).substitute(&[(Var::X, RatFunc::var(u)), (Var::Y, v.clone())].into_iter().collect());
    let (n0, d0) = (RatFunc::from_poly(w.w.num().clone()), RatFunc::from_poly(w.w.den().clone()));
    let g = &(&at_uv(w.w.num())? * &d0) - &(&at_uv(w.w.den())? * &n0);
    let poly = g.num();
    let den = RatFunc::from_poly(g.den().clone());
    let coeffs: Vec<RatFunc> =
        poly.coeffs_in(u).into_iter().map(|c| RatFunc::from_poly(c).checked_div(&den)).collect::<Result<_>>()?;
    if coeffs.len() == 2 {
        let first = (-&coeffs[0]).checked_div(&coeffs[1])?;
        let flow = FlowMap::planar(first, v);
        return Ok((IntegralFlow::Rational(flow), field));
    }
    if coeffs.len() < 2 {
        return Err(domain("equation for 𝒰 is degenerate"));
    }
    Ok((IntegralFlow::Algebraic(AlgebraicEquation { coeffs, w: w.w.clone(), slot }), field))
}

fn is_perfect_power(w: &RatFunc) -> bool {
    let (n, d) = (w.num().monic(), w.den().monic());
    let top = n.total_degree().max(d.total_degree());
    (2..=top).any(|m| n.nth_root(m).is_some() && d.nth_root(m).is_some())
}

/// c with a = c·b, if any.
pub fn proportional(a: &RatFunc, b: &RatFunc) -> Option<Rat> {
    if b.is_zero() {
        return None;
    }
    a.checked_div(b).ok()?.constant_value().filter(|c| !c.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_ratfunc, rat, ri};
    use crate::flowcore::{vector_field, verify_translation};

    fn rf(s: &str) -> RatFunc {
        parse_ratfunc(s).unwrap()
    }

    fn field(s: &str) -> VectorField {
        VectorField::parse(s).unwrap()
    }

    fn quintic() -> VectorField {
        field("-x*(3*x^5+x^3*y^2+2*y^5)/(3*(x^2+y^2)^2), -y*(3*y^5+y^3*x^2+2*x^5)/(3*(x^2+y^2)^2)")
    }

    fn solve(v: &VectorField, rhs: Rhs) -> OdeSolution {
        let ode = fundamental_ode(v, rhs).unwrap();
        let out = solve_ode_radical(&ode, default_max_deg(&ode)).unwrap();
        out.solution().cloned().unwrap_or_else(|| panic!("{out:?}"))
    }

    #[test]
    fn ode_coefficients() {
        let ode = fundamental_ode(&field("2*x*y, -y^2"), Rhs::Plus).unwrap();
        assert_eq!((ode.a, ode.b), (rf("-1"), rf("-3*x")));
        let ode = fundamental_ode(&field("4*x*y, -y^2"), Rhs::Plus).unwrap();
        assert_eq!(ode.b, rf("-5*x"));
        assert!(fundamental_ode(&field("x*(x+y), y*(x+y)"), Rhs::Plus).is_err());
    }

    #[test]
    fn quintic_solution() {
        let s = solve(&quintic(), Rhs::Plus);
        assert_eq!(s.r, rf("-(x^2+1)/x^3"));
        assert_eq!(s.q, rf("(x^5+x^3-x^2-1)/x^3"));
        assert_eq!(s.n, 1);
    }

    #[test]
    fn canonical_level_n() {
        for n in 1..=5 {
            let v = VectorField::planar(rf(&format!("{}*x*y", n - 1)), rf("-y^2")).unwrap();
            let s = solve(&v, Rhs::Minus);
            assert_eq!((s.q.clone(), s.n), (rf("1/x"), n as u32));
            assert_eq!(s.r, rf("1"));
        }
    }

    #[test]
    fn pure_b_case() {
        let ode = FundamentalOde { a: RatFunc::zero(), b: rf("x^2"), rhs: Rhs::Plus };
        let s = solve_ode_radical(&ode, 4).unwrap().solution().cloned().unwrap();
        assert_eq!((s.r, s.q, s.n), (rf("-1/x"), RatFunc::one(), 1));
    }

    #[test]
    fn verdicts() {
        let ode = FundamentalOde { a: rf("1"), b: rf("x^2"), rhs: Rhs::Plus };
        assert_eq!(solve_ode_radical(&ode, 6).unwrap().verdict(), "NonAlgebraicHomogeneous");
        let ode = FundamentalOde { a: rf("1"), b: rf("x^2-2"), rhs: Rhs::Plus };
        assert_eq!(solve_ode_radical(&ode, 6).unwrap().verdict(), "NonAlgebraicHomogeneous");
        // f′·x = 1 needs a logarithm.
        let ode = FundamentalOde { a: RatFunc::zero(), b: rf("x"), rhs: Rhs::Plus };
        assert_eq!(solve_ode_radical(&ode, 6).unwrap().verdict(), "NoRationalParticularWithinBound");
        assert!(solve_ode_radical(&ode, -1).is_err());
    }

    #[test]
    fn orbit_integrals() {
        let w = orbit_integral_from_q(&rf("(x^5+x^3-x^2-1)/x^3"), 1).unwrap();
        assert!(proportional(&w.w, &rf("x^3*y^3/(x^5+x^3*y^2-x^2*y^3-y^5)")).is_some());
        assert!(verify_orbit(&w, &quintic()));
        assert_eq!(orbit_integral_from_q(&rf("x"), 1).unwrap().w, rf("y^2/x"));
        let w = orbit_integral_from_q(&rf("x^3-1"), 1).unwrap();
        assert!(proportional(&w.w, &rf("y^4/(x^3-y^3)")).is_some());
        assert!(verify_orbit(&w, &field("-4/3*x*y+1/3*y^4/x^2, -y^2")));
        assert!(verify_orbit(&OrbitIntegral::new(rf("x/y")).unwrap(), &field("x*(x+2*y), y*(x+2*y)")));
        for n in 1..=6 {
            let w = OrbitIntegral::new(rf(&format!("x*y^{}", n - 1))).unwrap();
            assert!(verify_orbit(&w, &VectorField::planar(rf(&format!("{}*x*y", n - 1)), rf("-y^2")).unwrap()));
        }
    }

    #[test]
    fn reconstruct_from_ode_data() {
        for n in 1..=4 {
            let v = vf_from_ode_data(&rf("-1"), &rf("1/x"), n).unwrap();
            assert_eq!(v, VectorField::planar(rf(&format!("{}*x*y", n as i64 - 1)), rf("-y^2")).unwrap());
        }
        let s = solve(&quintic(), Rhs::Plus);
        let v = vf_from_ode_data(&s.r, &s.q, s.n).unwrap();
        assert_eq!(solve(&v, Rhs::Plus), s);
        assert!(vf_from_ode_data(&rf("x+1"), &rf("x+1"), 1).is_err());
    }

    #[test]
    fn homogeneous_solution_law() {
        for v in [quintic(), field("-4/3*x*y+1/3*y^4/x^2, -y^2")] {
            let ode = fundamental_ode(&v, Rhs::Plus).unwrap();
            let s = solve(&v, Rhs::Plus);
            let w1 = orbit_integral_from_q(&s.q, s.n).unwrap().w;
            for m in -2..=3 {
                let g = at_y_one(&w1).unwrap().pow(-m).unwrap();
                let lhs = &(&RatFunc::int(m) * &(&g * &ode.a)) + &(&g.diff(Var::X) * &ode.b);
                assert!(lhs.is_zero(), "M = {m}");
            }
        }
    }

    #[test]
    fn implicit_system() {
        let phi3 = FlowMap::parse("x*(y+1)^2, y/(y+1)").unwrap();
        let w = OrbitIntegral::new(rf("x*y^2")).unwrap();
        assert!(verify_implicit(&phi3, &rf("-1"), Rhs::Plus, &w, VerifyMode::Exact).unwrap().pass);
        assert!(verify_implicit(&phi3, &rf("-1"), Rhs::Plus, &w, VerifyMode::numeric_default()).unwrap().pass);
        let id = FlowMap::parse("x, y").unwrap();
        assert!(!verify_implicit(&id, &rf("-1"), Rhs::Plus, &w, VerifyMode::Exact).unwrap().pass);
    }

    #[test]
    fn flow_from_linear_integral() {
        for sigma in [ri(0), ri(2), rat(-3, 4)] {
            let w = OrbitIntegral::new(&rf("x") + &rf("y").scale(&sigma)).unwrap();
            let (flow, v) = flow_from_integral_univariate(&w, SecondSlot::NegSquare).unwrap();
            let want = rf("x*y+x").checked_div(&rf("y+1")).unwrap();
            let want = &want + &rf("y^2/(y+1)").scale(&sigma);
            let IntegralFlow::Rational(phi) = flow else { panic!("expected a rational flow") };
            assert_eq!(phi, FlowMap::planar(want, rf("y/(y+1)")));
            assert!(verify_translation(&phi, VerifyMode::Exact).unwrap().pass);
            assert_eq!(vector_field(&phi).unwrap(), v);
        }
    }

    #[test]
    fn flow_from_cubic_integral() {
        let w = OrbitIntegral::new(rf("y^4/(x^3-y^3)")).unwrap();
        let (flow, v) = flow_from_integral_univariate(&w, SecondSlot::NegSquare).unwrap();
        assert_eq!(v, field("-4/3*x*y+1/3*y^4/x^2, -y^2"));
        let IntegralFlow::Algebraic(eq) = flow else { panic!("expected an algebraic equation") };
        assert_eq!(eq.degree(), 3);
        for (a, b) in [(0.3, 0.2), (0.1, 0.5), (0.45, 0.15)] {
            let got = eq.eval(a, b, 1.0).unwrap();
            let want = (a * a * a + b.powi(4)).cbrt() / (b + 1.0).powf(4.0 / 3.0);
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(flow_from_integral_univariate(&OrbitIntegral::new(rf("x^2+2*x*y+y^2")).unwrap(), SecondSlot::NegSquare).is_err());
        assert!(flow_from_integral_univariate(&OrbitIntegral::new(rf("y")).unwrap(), SecondSlot::NegSquare).is_err());
    }

    #[test]
    fn positive_square_slot() {
        let w = OrbitIntegral::new(rf("x+y")).unwrap();
        let (flow, v) = flow_from_integral_univariate(&w, SecondSlot::PosSquare).unwrap();
        let IntegralFlow::Rational(phi) = flow else { panic!() };
        assert!(verify_translation(&phi, VerifyMode::Exact).unwrap().pass);
        assert_eq!(vector_field(&phi).unwrap(), v);
        assert_eq!(v.components()[1], rf("y^2"));
    }
}
