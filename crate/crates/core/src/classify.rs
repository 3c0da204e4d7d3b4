//! Level, solenoidality, symmetry and shared-orbit predicates, and the search for
//! solenoidal normal forms among univariate quadratic fields.

use crate::algebra::factor::factor;
use crate::algebra::linsolve::solve_affine;
use crate::algebra::{MPoly, Monomial, Rat, RatFunc, UPoly, Var};
use crate::conjugation::{conjugate_flow, conjugate_vf, conjugate_vf_linear, BirMap1H, Conjugator, LinMap, TupleMap};
use crate::error::{domain, Error, Result};
use crate::flowcore::verify::{sample_point, DEFAULT_SAMPLES, DEFAULT_TOL};
use crate::flowcore::{vector_field, FlowMap, ShiftEvaluator, VectorField};
use crate::odeorbit::{default_max_deg, fundamental_ode, solve_ode_radical, Rhs};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

fn x() -> RatFunc {
    RatFunc::var(Var::X)
}

fn y() -> RatFunc {
    RatFunc::var(Var::Y)
}

fn swap_xy(f: &RatFunc) -> RatFunc {
    f.rename(&[(Var::X, Var::Y), (Var::Y, Var::X)].into_iter().collect())
}

/// Exact divergence test.
pub fn is_solenoidal(v: &VectorField) -> bool {
    let parts: Vec<RatFunc> = v.vars().iter().zip(v.components()).map(|(&x, c)| c.diff(x)).collect();
    RatFunc::sum(&parts).is_zero()
}

/// 0 for xρ = yϖ; otherwise the N of a radical solution of the fundamental ODE, if one is found.
pub fn level_of(v: &VectorField, max_deg: Option<i64>) -> Result<Option<u32>> {
    let (p, r) = v.pair()?;
    if (&(&x() * r) - &(&y() * p)).is_zero() {
        return Ok(Some(0));
    }
    let ode = fundamental_ode(v, Rhs::Plus)?;
    let bound = max_deg.unwrap_or_else(|| default_max_deg(&ode));
    Ok(solve_ode_radical(&ode, bound)?.solution().map(|s| s.n))
}

/// Result of a flow-level symmetry test together with how it was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Symmetry {
    pub pass: bool,
    pub mode: &'static str,
}

fn numeric_conjugation_check(phi: &FlowMap, m: impl Fn(&[f64]) -> Vec<f64>) -> Result<bool> {
    let ev = ShiftEvaluator::new(phi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..DEFAULT_SAMPLES {
        let p = sample_point(&mut rng, 2);
        let lhs = m(&ev.eval_map(&m(&p))?);
        let rhs = ev.eval_map(&p)?;
        if lhs.iter().zip(&rhs).any(|(a, b)| !a.is_finite() || (a - b).abs() > DEFAULT_TOL * b.abs().max(1.0)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// i₀∘φ∘i₀ = φ with i₀ the coordinate swap.
pub fn i0_symmetric(phi: &FlowMap) -> Result<Symmetry> {
    if phi.dim() != 2 {
        return Err(domain("symmetry tests are planar"));
    }
    if phi.is_rational() {
        return Ok(Symmetry { pass: phi.swap_coords(0, 1)? == *phi, mode: "exact" });
    }
    let pass = numeric_conjugation_check(phi, |p| vec![p[1], p[0]])?;
    Ok(Symmetry { pass, mode: "numeric" })
}

/// ϖ(x, y) = ρ(y, x).
pub fn i0_symmetric_vf(v: &VectorField) -> Result<bool> {
    let (p, r) = v.pair()?;
    Ok(*p == swap_xy(r))
}

/// i∘φ∘i = φ with i(x, y) = (y²/x, y).
pub fn i_symmetric(phi: &FlowMap) -> Result<Symmetry> {
    if phi.dim() != 2 {
        return Err(domain("symmetry tests are planar"));
    }
    if phi.is_rational() {
        let pass = match conjugate_flow(phi, &Conjugator::Tuple(TupleMap::involution_i())) {
            Ok(c) => c == *phi,
            Err(Error::Domain(_)) => false,
            Err(e) => return Err(e),
        };
        return Ok(Symmetry { pass, mode: "exact" });
    }
    let pass = numeric_conjugation_check(phi, |p| vec![p[1] * p[1] / p[0], p[1]])?;
    Ok(Symmetry { pass, mode: "numeric" })
}

/// (2x/y)ρ = ϖ(x, y) + ϖ(y, x).
pub fn i_symmetric_vf(v: &VectorField) -> Result<bool> {
    let (p, r) = v.pair()?;
    let lhs = &x().checked_div(&y())?.scale(&Rat::from_integer(2.into())) * r;
    Ok(lhs == p + &swap_xy(p))
}

/// x/(1 − J) • y/(1 − J) with J = y·r(x/y), for r(t) = r(1/t).
pub fn symmetric_level0(r: &RatFunc) -> Result<FlowMap> {
    let vars = r.vars();
    if vars.len() > 1 {
        return Err(domain(format!("`{r}` is not univariate")));
    }
    let r = match vars.iter().next() {
        Some(&t) => r.rename(&[(t, Var::X)].into_iter().collect()),
        None => r.clone(),
    };
    let inv = r.substitute(&[(Var::X, x().recip()?)].into_iter().collect())?;
    if inv != r {
        return Err(Error::InvalidParams(format!("r(t) = {r} is not invariant under t ↦ 1/t")));
    }
    let j = &r.substitute(&[(Var::X, x().checked_div(&y())?)].into_iter().collect())? * &y();
    let den = &RatFunc::one() - &j;
    FlowMap::from_rational(vec![Var::X, Var::Y], vec![x().checked_div(&den)?, y().checked_div(&den)?])
}

/// ℓ₀ = (xy/(x+y), y²/(x+y)), which satisfies i₀∘ℓ₀ = ℓ₀∘i.
pub fn ell0() -> BirMap1H {
    BirMap1H::from_ratio(y().checked_div(&(&x() + &y())).expect("nonzero")).expect("0-homogeneous")
}

/// s⁻¹∘ℓ₀⁻¹∘φ∘ℓ₀∘s for an i₀-symmetric φ and a symmetric ratio of s.
pub fn transport_symmetry(phi: &FlowMap, s: &BirMap1H) -> Result<FlowMap> {
    if !i0_symmetric(phi)?.pass {
        return Err(Error::InvalidParams("flow is not i₀-symmetric".into()));
    }
    if swap_xy(s.ratio()) != *s.ratio() {
        return Err(Error::InvalidParams(format!("A = {} is not symmetric", s.ratio())));
    }
    conjugate_flow(phi, &Conjugator::Bir(ell0().compose(s)))
}

fn nonzero_planar(v: &VectorField) -> Result<(&RatFunc, &RatFunc)> {
    let pair = v.pair()?;
    if v.is_zero() {
        return Err(domain("orbit comparison needs nonzero fields"));
    }
    Ok(pair)
}

/// ϖ₁ρ₂ = ϖ₂ρ₁.
pub fn shared_orbits(v1: &VectorField, v2: &VectorField) -> Result<bool> {
    let (p1, r1) = nonzero_planar(v1)?;
    let (p2, r2) = nonzero_planar(v2)?;
    Ok(&(p1 * r2) - &(p2 * r1) == RatFunc::zero())
}

/// ϖ₁ϖ₂ + ρ₁ρ₂ = 0.
pub fn orthogonal_orbits(v1: &VectorField, v2: &VectorField) -> Result<bool> {
    let (p1, r1) = v1.pair()?;
    let (p2, r2) = v2.pair()?;
    Ok((&(p1 * p2) + &(r1 * r2)).is_zero())
}

/// ϖ = s·(ax + by)² for a field with vanishing second component.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq)]
pub enum ZeroSecond {
    Square { a: Rat, b: Rat, scale: Rat, flow: FlowMap },
    NotPerfectSquare,
}

fn poly_of(f: &RatFunc) -> Option<MPoly> {
    let c = f.den().constant_value()?;
    Some(f.num().scale(&c.recip()))
}

/// (scale, a, b) with f = scale·(ax + by)²; scale is 1 whenever its square root is rational.
fn square_of_linear(f: &MPoly) -> Option<(Rat, Rat, Rat)> {
    if f.is_zero() || f.homogeneous_degree() != Some(2) {
        return None;
    }
    let root = f.monic().nth_root(2)?;
    let a = root.coeff(&Monomial::var_pow(Var::X, 1));
    let b = root.coeff(&Monomial::var_pow(Var::Y, 1));
    let k = f.lc();
    match crate::algebra::rat::rat_pow(&k, &Rat::new(1.into(), 2.into())) {
        Some(sq) => Some((Rat::one(), a * &sq, b * sq)),
        None => Some((k, a, b)),
    }
}

pub fn level1_zero_second(v: &VectorField) -> Result<ZeroSecond> {
    let (p, r) = v.pair()?;
    if !r.is_zero() {
        return Err(domain("second component must vanish"));
    }
    let Some((k, a, b)) = poly_of(p).as_ref().and_then(square_of_linear) else {
        return Ok(ZeroSecond::NotPerfectSquare);
    };
    let lin = &x().scale(&a) + &y().scale(&b);
    let first = if a.is_zero() {
        &x() + &(&y() * &y()).scale(&(&k * &b * &b))
    } else {
        let moved = lin.checked_div(&(&RatFunc::one() - &lin.scale(&(&a * &k))))?;
        (&moved - &y().scale(&b)).scale(&a.recip())
    };
    let flow = FlowMap::planar(first, y());
    Ok(ZeroSecond::Square { a, b, scale: k, flow })
}

/// ϖ = Ux² + Vxy + W₀y², ρ = −y².
#[derive(Clone, Debug, PartialEq)]
pub struct QuadPair {
    pub u: Rat,
    pub v: Rat,
    pub w0: Rat,
}

impl QuadPair {
    pub fn field(&self) -> VectorField {
        let p = &(&(&x() * &x()).scale(&self.u) + &(&x() * &y()).scale(&self.v)) + &(&y() * &y()).scale(&self.w0);
        VectorField::planar(p, -&(&y() * &y())).expect("quadratic forms")
    }

    /// (V + 1)² − 4·U·W₀.
    pub fn discriminant(&self) -> Rat {
        let v1 = &self.v + Rat::one();
        &v1 * &v1 - Rat::from_integer(4.into()) * &self.u * &self.w0
    }

    /// √discriminant when it is a nonnegative integer.
    pub fn claimed_level(&self) -> Option<u32> {
        let d = self.discriminant();
        if !d.is_integer() || d.is_negative() {
            return None;
        }
        let d = d.to_integer();
        let n = d.sqrt();
        (&n * &n == d).then(|| n.to_u32()).flatten()
    }
}

/// One solenoidal normal form found by the search.
#[derive(Clone, Debug, PartialEq)]
pub struct SolenoidalHit {
    pub level: u32,
    pub branch: String,
    pub quad: QuadPair,
    pub conjugator: BirMap1H,
    pub field: VectorField,
    pub solenoidal: bool,
    pub target: &'static str,
    pub witness: Option<LinMap>,
}

fn ri(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// ((x − ξy)/y)^e
fn shifted_power(xi: &Rat, e: i64) -> Result<RatFunc> {
    (&x() - &y().scale(xi)).checked_div(&y())?.pow(e)
}

pub fn target_field(level: u32) -> Option<(&'static str, VectorField)> {
    match level {
        1 => Some(("phi_sph_inf", VectorField::parse("(x-y)^2, (x-y)^2").expect("fixed field"))),
        3 => Some(("phi_3", VectorField::parse("2*x*y, -y^2").expect("fixed field"))),
        _ => None,
    }
}

/// For each level up to `n_max`, the univariate quadratic fields whose ℓ-conjugate by the
/// ratio forced by zero divergence is rational, with a linear witness to the reference field.
pub fn solenoidal_search(n_max: u32) -> Result<Vec<SolenoidalHit>> {
    if n_max < 1 {
        return Err(Error::InvalidParams("N_max must be ≥ 1".into()));
    }
    let mut hits: Vec<SolenoidalHit> = Vec::new();
    for n in 1..=n_max {
        let nr = ri(n.into());
        let mut candidates: Vec<(String, QuadPair, RatFunc)> = Vec::new();
        for s in [1i64, -1] {
            // U = 0, V = ±N − 1: A(x,1) = (x + W₀/(V+1))^((V−2)/(2(V+1))).
            let v = &nr * ri(s) - ri(1);
            let e = (&v - ri(2)) / (ri(2) * (&v + ri(1)));
            if e.is_integer() {
                let quad = QuadPair { u: Rat::zero(), v: v.clone(), w0: ri(1) };
                let xi = -(&quad.w0 / (&v + ri(1)));
                let a = shifted_power(&xi, e.to_integer().to_i64().unwrap_or(0))?;
                candidates.push((format!("U=0, V={v}"), quad, a));
            }
            // U ≠ 0: exponents (M, 1 − M) at the two roots with M = 1/2 − 3/(2sN).
            let m = Rat::new(1.into(), 2.into()) - ri(3) / (ri(2) * ri(s) * &nr);
            if m.is_integer() {
                let quad = QuadPair { u: ri(1), v: Rat::zero(), w0: (ri(1) - &nr * &nr) / ri(4) };
                let xi1 = (-(&quad.v + ri(1)) + ri(s) * &nr) / (ri(2) * &quad.u);
                let xi2 = (-(&quad.v + ri(1)) - ri(s) * &nr) / (ri(2) * &quad.u);
                let m = m.to_integer().to_i64().unwrap_or(0);
                let a = &shifted_power(&xi1, m)? * &shifted_power(&xi2, 1 - m)?;
                candidates.push((format!("U=1, sign {s}"), quad, a));
            }
        }
        for (branch, quad, a) in candidates {
            let conjugator = BirMap1H::from_ratio(a)?;
            let field = conjugate_vf(&quad.field(), &conjugator)?;
            if hits.iter().any(|h| h.level == n && h.field == field) {
                continue;
            }
            let (target, reference) = target_field(n).unwrap_or(("none", quad.field()));
            let witness = linear_witness(&field, &reference);
            hits.push(SolenoidalHit { level: n, branch, solenoidal: is_solenoidal(&field), quad, conjugator, field, target, witness });
        }
    }
    Ok(hits)
}

/// L with L⁻¹·V(L·x) = target, for polynomial quadratic planar fields.
pub fn linear_witness(v: &VectorField, target: &VectorField) -> Option<LinMap> {
    let found = square_type_witness(v, target).or_else(|| direction_witness(v, target))?;
    (conjugate_vf_linear(v, &found).ok()? == *target).then_some(found)
}

/// Fields c·L(x)² with L(c) = 0: map c′ to c and pull L back to L′.
fn square_type(v: &VectorField) -> Option<([Rat; 2], [Rat; 2])> {
    let (p, r) = v.pair().ok()?;
    let (p, r) = (poly_of(p)?, poly_of(r)?);
    let base = if p.is_zero() { &r } else { &p };
    let (_, a, b) = square_of_linear(base)?;
    let lin = MPoly::var(Var::X).scale(&a) + MPoly::var(Var::Y).scale(&b);
    let sq = lin.pow(2);
    let c1 = RatFunc::new(p, sq.clone()).ok()?.constant_value()?;
    let c2 = RatFunc::new(r, sq).ok()?.constant_value()?;
    (&a * &c1 + &b * &c2).is_zero().then_some(([c1, c2], [a, b]))
}

fn square_type_witness(v: &VectorField, target: &VectorField) -> Option<LinMap> {
    let (c, l) = square_type(v)?;
    let (ct, lt) = square_type(target)?;
    let z = Rat::zero;
    // unknowns m11, m12, m21, m22
    let rows = vec![
        vec![ct[0].clone(), ct[1].clone(), z(), z()],
        vec![z(), z(), ct[0].clone(), ct[1].clone()],
        vec![l[0].clone(), z(), l[1].clone(), z()],
        vec![z(), l[0].clone(), z(), l[1].clone()],
    ];
    let rhs = vec![c[0].clone(), c[1].clone(), lt[0].clone(), lt[1].clone()];
    let (base, null) = solve_affine(&rows, &rhs)?;
    for t in 0..8i64 {
        let mut m = base.clone();
        for (k, nv) in null.iter().enumerate() {
            let coef = ri((t + k as i64 + 1) * if k % 2 == 0 { 1 } else { -1 }) * ri(i64::from(t > 0));
            for (mi, ni) in m.iter_mut().zip(nv) {
                *mi += &coef * ni;
            }
        }
        if let Ok(lm) = LinMap::new(vec![vec![m[0].clone(), m[1].clone()], vec![m[2].clone(), m[3].clone()]]) {
            if conjugate_vf_linear(v, &lm).ok().as_ref() == Some(target) {
                return Some(lm);
            }
        }
    }
    None
}

type Direction = ([Rat; 2], u32);

/// Rational invariant directions of a polynomial field: linear factors of xρ − yϖ.
fn directions(v: &VectorField) -> Option<Vec<Direction>> {
    let (p, r) = v.pair().ok()?;
    let (p, r) = (poly_of(p)?, poly_of(r)?);
    let k = &(&MPoly::var(Var::X) * &r) - &(&MPoly::var(Var::Y) * &p);
    if k.is_zero() {
        return None;
    }
    let total = k.total_degree() as i64;
    let kx = UPoly::from_mpoly(&k.eval_var(Var::Y, &Rat::one()), Var::X).ok()?;
    let mut out = Vec::new();
    if total > kx.degree() {
        out.push(([Rat::one(), Rat::zero()], (total - kx.degree()) as u32));
    }
    for (f, m) in factor(&kx) {
        if f.degree() == 1 {
            out.push(([-f.coeff(0), Rat::one()], m));
        }
    }
    Some(out)
}

/// Groups a polynomial in (x, y, λ) by its (x, y)-monomials.
fn coefficients_in(p: &MPoly, lambda: Var) -> BTreeMap<Monomial, UPoly> {
    let mut out: BTreeMap<Monomial, Vec<Rat>> = BTreeMap::new();
    for (m, c) in p.terms() {
        let (e, rest) = m.split(lambda);
        let slot = out.entry(rest).or_default();
        if slot.len() <= e as usize {
            slot.resize(e as usize + 1, Rat::zero());
        }
        slot[e as usize] = c.clone();
    }
    out.into_iter().map(|(m, c)| (m, UPoly::new(c))).collect()
}

/// Map two invariant directions of the target to two of `v` with matching multiplicity,
/// then solve for the two column scales.
fn direction_witness(v: &VectorField, target: &VectorField) -> Option<LinMap> {
    let dv = directions(v)?;
    let dt = directions(target)?;
    if dt.len() < 2 {
        return None;
    }
    let (t1, t2) = (&dt[0], &dt[1]);
    let p = LinMap::new(vec![vec![t1.0[0].clone(), t2.0[0].clone()], vec![t1.0[1].clone(), t2.0[1].clone()]]).ok()?;
    let pinv = p.inverse();
    for (i, v1) in dv.iter().enumerate().filter(|(_, d)| d.1 == t1.1) {
        for (_, v2) in dv.iter().enumerate().filter(|(j, d)| *j != i && d.1 == t2.1) {
            if let Some(m) = solve_column_scales(v, target, &v1.0, &v2.0, &pinv) {
                return Some(m);
            }
        }
    }
    None
}

fn solve_column_scales(v: &VectorField, target: &VectorField, v1: &[Rat; 2], v2: &[Rat; 2], pinv: &LinMap) -> Option<LinMap> {
    let lambda = Var::aux(7);
    let lam = RatFunc::var(lambda);
    // M₁ = [v1 | λ·v2]·P⁻¹
    let cols = [[RatFunc::constant(v1[0].clone()), RatFunc::constant(v1[1].clone())], [&lam * &RatFunc::constant(v2[0].clone()), &lam * &RatFunc::constant(v2[1].clone())]];
    let pm = pinv.matrix();
    let m1: Vec<Vec<RatFunc>> = (0..2)
        .map(|i| (0..2).map(|j| &(&cols[0][i] * &RatFunc::constant(pm[0][j].clone())) + &(&cols[1][i] * &RatFunc::constant(pm[1][j].clone()))).collect())
        .collect();
    let lin = |row: &[RatFunc]| &(&row[0] * &x()) + &(&row[1] * &y());
    let sub: BTreeMap<Var, RatFunc> = [(Var::X, lin(&m1[0])), (Var::Y, lin(&m1[1]))].into_iter().collect();
    let lhs: Vec<MPoly> = v.components().iter().map(|c| c.substitute(&sub).ok().and_then(|f| poly_of(&f))).collect::<Option<_>>()?;
    let tc = target.components();
    let rhs: Vec<MPoly> = (0..2)
        .map(|i| poly_of(&(&(&m1[i][0] * &tc[0]) + &(&m1[i][1] * &tc[1]))))
        .collect::<Option<_>>()?;
    let mut pairs: Vec<(UPoly, UPoly)> = Vec::new();
    for comp in 0..2 {
        let q = coefficients_in(&lhs[comp], lambda);
        let l = coefficients_in(&rhs[comp], lambda);
        let keys: std::collections::BTreeSet<&Monomial> = q.keys().chain(l.keys()).collect();
        for k in keys {
            pairs.push((q.get(k).cloned().unwrap_or_default(), l.get(k).cloned().unwrap_or_default()));
        }
    }
    let mut g = UPoly::zero();
    for (i, (qi, li)) in pairs.iter().enumerate() {
        for (qj, lj) in &pairs[i + 1..] {
            g = g.gcd(&(&(qi * lj) - &(qj * li)));
        }
    }
    let candidates: Vec<Rat> = if g.is_zero() {
        (1..=4).map(ri).collect()
    } else {
        factor(&g).into_iter().filter(|(f, _)| f.degree() == 1).map(|(f, _)| -f.coeff(0)).filter(|r| !r.is_zero()).collect()
    };
    for lv in candidates {
        let Some(a) = pairs.iter().find_map(|(q, l)| {
            let qv = q.eval(&lv);
            (!qv.is_zero()).then(|| l.eval(&lv) / qv)
        }) else {
            continue;
        };
        if a.is_zero() {
            continue;
        }
        let at: BTreeMap<Var, Rat> = [(lambda, lv.clone())].into_iter().collect();
        let m = m1.iter().map(|row| row.iter().map(|e| e.eval_rat(&at).map(|r| r * &a)).collect::<Result<Vec<_>>>()).collect::<Result<Vec<_>>>().ok()?;
        if let Ok(lm) = LinMap::new(m) {
            if conjugate_vf_linear(v, &lm).ok().as_ref() == Some(target) {
                return Some(lm);
            }
        }
    }
    None
}

/// Summary of the classification predicates for one field or flow.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassReport {
    pub level: Option<u32>,
    pub solenoidal: bool,
    pub i0_symmetric: bool,
    pub i_symmetric: bool,
    pub mode: &'static str,
    pub notes: Vec<String>,
}

pub fn classify_field(v: &VectorField) -> Result<ClassReport> {
    let mut notes = Vec::new();
    let level = level_of(v, None)?;
    if level.is_none() {
        notes.push("no radical solution of the fundamental ODE within the default degree bound".into());
    }
    Ok(ClassReport {
        level,
        solenoidal: is_solenoidal(v),
        i0_symmetric: i0_symmetric_vf(v)?,
        i_symmetric: i_symmetric_vf(v)?,
        mode: "exact",
        notes,
    })
}

pub fn classify_flow(phi: &FlowMap) -> Result<ClassReport> {
    let v = vector_field(phi)?;
    let mut report = classify_field(&v)?;
    let s0 = i0_symmetric(phi)?;
    let s1 = i_symmetric(phi)?;
    report.i0_symmetric = s0.pass;
    report.i_symmetric = s1.pass;
    if s0.mode == "numeric" || s1.mode == "numeric" {
        report.mode = "numeric";
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_ratfunc, rat};
    use crate::flowcore::{catalog, verify_translation, Catalog, QuadMember, VerifyMode};

    fn field(s: &str) -> VectorField {
        VectorField::parse(s).unwrap()
    }

    fn rf(s: &str) -> RatFunc {
        parse_ratfunc(s).unwrap()
    }

    #[test]
    fn divergence() {
        assert!(is_solenoidal(&field("(x-y)^2, (x-y)^2")));
        assert!(is_solenoidal(&field("2*x*y, -y^2")));
        assert!(!is_solenoidal(&field("x^2, y^2")));
        assert!(is_solenoidal(&field("x*w, y*w, -w^2")));
    }

    #[test]
    fn levels() {
        assert_eq!(level_of(&field("x*(x+y), y*(x+y)"), None).unwrap(), Some(0));
        for n in 1..=6 {
            let v = VectorField::planar(rf(&format!("{}*x*y", n - 1)), rf("-y^2")).unwrap();
            assert_eq!(level_of(&v, None).unwrap(), Some(n as u32));
        }
    }

    #[test]
    fn swap_symmetry() {
        let sph = catalog(&Catalog::PhiSphInf).unwrap();
        assert!(i0_symmetric(&sph).unwrap().pass);
        assert!(!i0_symmetric(&catalog(&Catalog::PhiN(3)).unwrap()).unwrap().pass);
        assert!(i0_symmetric_vf(&field("x^2, y^2")).unwrap());
    }

    #[test]
    fn involution_symmetry() {
        for q in [QuadMember::Phi1, QuadMember::Psi1, QuadMember::Psi1Prime, QuadMember::Phi1Prime] {
            let f = catalog(&Catalog::Quad(q)).unwrap();
            assert_eq!(i_symmetric(&f).unwrap(), Symmetry { pass: true, mode: "exact" }, "{q:?}");
            assert!(i_symmetric_vf(&vector_field(&f).unwrap()).unwrap());
        }
        for n in 1..=5 {
            assert!(!i_symmetric(&catalog(&Catalog::PhiN(n)).unwrap()).unwrap().pass);
        }
        let sym = symmetric_level0(&rf("x+1/x")).unwrap();
        assert_eq!(sym, FlowMap::parse("x/(1-(x^2+y^2)/x), y/(1-(x^2+y^2)/x)").unwrap());
        assert!(i_symmetric(&sym).unwrap().pass);
        assert_eq!(symmetric_level0(&rf("1")).unwrap(), FlowMap::parse("x/(1-y), y/(1-y)").unwrap());
        assert!(symmetric_level0(&rf("x")).is_err());
    }

    #[test]
    fn algebraic_flow_falls_back_to_sampling() {
        let f = FlowMap::parse("(x^3+y^4)^(1/3)/(y+1)^(4/3), y/(y+1)").unwrap();
        let s = i_symmetric(&f).unwrap();
        assert_eq!(s, Symmetry { pass: false, mode: "numeric" });
    }

    #[test]
    fn transport() {
        let l0inv = Conjugator::Bir(ell0().inverse());
        for n in 1..=4 {
            let psi = catalog(&Catalog::PsiN(n)).unwrap();
            assert!(i_symmetric(&psi).unwrap().pass);
            let big = conjugate_flow(&psi, &l0inv).unwrap();
            assert!(i0_symmetric(&big).unwrap().pass, "N = {n}");
            let back = transport_symmetry(&big, &BirMap1H::identity()).unwrap();
            assert_eq!(back, psi);
            if n <= 2 {
                let s = BirMap1H::parse("x^2+y^2", "x*y").unwrap();
                assert!(i_symmetric(&transport_symmetry(&big, &s).unwrap()).unwrap().pass);
            }
        }
        let id = FlowMap::parse("x, y").unwrap();
        assert_eq!(transport_symmetry(&id, &BirMap1H::identity()).unwrap(), id);
        assert!(transport_symmetry(&catalog(&Catalog::PhiN(3)).unwrap(), &BirMap1H::identity()).is_err());
        assert!(transport_symmetry(&id, &BirMap1H::parse("x", "y").unwrap()).is_err());
    }

    #[test]
    fn orbit_relations() {
        let a = field("-4*x*y+3*y^2, (-2*x*y^2+y^3)/x");
        let b = field("-4*x^2+3*x*y, -2*x*y+y^2");
        assert!(shared_orbits(&a, &b).unwrap());
        assert!(!shared_orbits(&field("2*x*y, -y^2"), &field("x^2, y^2")).unwrap());
        assert!(shared_orbits(&b, &b.scale(&RatFunc::int(-3))).unwrap());
        assert!(shared_orbits(&b, &VectorField::zero(vec![Var::X, Var::Y])).is_err());
        assert!(orthogonal_orbits(&field("y^2, 0"), &field("0, -y^2")).unwrap());
        let sph1 = field("-1/2*x^2+1/2*y^2-x*y, 1/2*x^2-1/2*y^2-x*y");
        let alpha = field("1/2*x^2-1/2*y^2-x*y, 1/2*x^2-1/2*y^2+x*y");
        assert!(orthogonal_orbits(&sph1, &alpha).unwrap());
        assert!(!orthogonal_orbits(&b, &b).unwrap());
    }

    #[test]
    fn zero_second_component() {
        match level1_zero_second(&field("(x+2*y)^2, 0")).unwrap() {
            ZeroSecond::Square { a, b, scale, flow } => {
                assert_eq!((a, b, scale), (Rat::one(), ri(2), Rat::one()));
                assert!(verify_translation(&flow, VerifyMode::Exact).unwrap().pass);
                assert_eq!(vector_field(&flow).unwrap(), field("(x+2*y)^2, 0"));
            }
            other => panic!("{other:?}"),
        }
        match level1_zero_second(&field("y^2, 0")).unwrap() {
            ZeroSecond::Square { a, b, flow, .. } => {
                assert_eq!((a, b), (Rat::zero(), Rat::one()));
                assert_eq!(flow, FlowMap::parse("x+y^2, y").unwrap());
            }
            other => panic!("{other:?}"),
        }
        match level1_zero_second(&field("2*(x-y)^2, 0")).unwrap() {
            ZeroSecond::Square { scale, flow, .. } => {
                assert_eq!(scale, ri(2));
                assert_eq!(vector_field(&flow).unwrap(), field("2*(x-y)^2, 0"));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(level1_zero_second(&field("x*y, 0")).unwrap(), ZeroSecond::NotPerfectSquare);
        assert!(level1_zero_second(&field("x*y, y^2")).is_err());
    }

    #[test]
    fn quad_pair_discriminant() {
        let q = QuadPair { u: Rat::zero(), v: ri(2), w0: ri(5) };
        assert_eq!(q.claimed_level(), Some(3));
        assert_eq!(level_of(&q.field(), None).unwrap(), Some(3));
        let q = QuadPair { u: ri(1), v: Rat::zero(), w0: rat(-3, 4) };
        assert_eq!(q.claimed_level(), Some(2));
        assert_eq!(level_of(&q.field(), None).unwrap(), Some(2));
    }

    #[test]
    fn search_hits_only_one_and_three() {
        let hits = solenoidal_search(10).unwrap();
        let levels: std::collections::BTreeSet<u32> = hits.iter().map(|h| h.level).collect();
        assert_eq!(levels, [1, 3].into_iter().collect());
        for h in &hits {
            assert!(h.solenoidal, "{h:?}");
            let (_, reference) = target_field(h.level).unwrap();
            let w = h.witness.as_ref().unwrap_or_else(|| panic!("no witness for {:?}", h.field));
            assert_eq!(conjugate_vf_linear(&h.field, w).unwrap(), reference);
        }
        assert!(solenoidal_search(2).unwrap().iter().all(|h| h.level == 1));
    }

    #[test]
    fn witnesses_for_named_fields() {
        let (_, sph) = target_field(1).unwrap();
        let w = linear_witness(&field("0, x^2"), &sph).unwrap();
        assert_eq!(conjugate_vf_linear(&field("0, x^2"), &w).unwrap(), sph);
        let (_, phi3) = target_field(3).unwrap();
        let v = field("-x^2+4*x*y-3*y^2, 2*x*y-2*y^2");
        assert!(linear_witness(&v, &phi3).is_some());
        assert!(linear_witness(&field("x^2, y^2"), &phi3).is_none());
    }
}
