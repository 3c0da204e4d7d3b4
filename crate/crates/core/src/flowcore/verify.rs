//! Time shifts, vector-field extraction, formal series and flow verification.

use super::flow::{FlowMap, VectorField};
use super::series::PSeries;
use crate::algebra::{ClosedForm, RatFunc, Var};
use crate::error::{domain, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

pub const DEFAULT_ORDER: usize = 8;
pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-9;
/// Coordinate box and time ranges for numeric sampling; small enough to keep
/// fractional-power bases positive.
pub const SAMPLE_BOX: (f64, f64) = (0.05, 0.4);
pub const TIME_BOX: (f64, f64) = (0.01, 0.1);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VerifyMode {
    Exact,
    Series(usize),
    Numeric { tol: f64, samples: usize, seed: u64 },
}

impl VerifyMode {
    pub fn numeric_default() -> Self {
        VerifyMode::Numeric { tol: DEFAULT_TOL, samples: DEFAULT_SAMPLES, seed: 0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            VerifyMode::Exact => "exact",
            VerifyMode::Series(_) => "series",
            VerifyMode::Numeric { .. } => "numeric",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub location: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub mode: String,
    pub pass: bool,
    pub order_or_samples: Option<usize>,
    pub first_discrepancy: Option<Discrepancy>,
}

impl VerificationReport {
    pub(crate) fn new(mode: VerifyMode, count: Option<usize>) -> Self {
        VerificationReport { mode: mode.name().into(), pass: true, order_or_samples: count, first_discrepancy: None }
    }

    pub(crate) fn fail(mut self, location: impl Into<String>, lhs: impl ToString, rhs: impl ToString) -> Self {
        self.pass = false;
        let tidy = |s: String| s.replace("_t0", "s").replace("_t1", "t");
        self.first_discrepancy =
            Some(Discrepancy { location: location.into(), lhs: tidy(lhs.to_string()), rhs: tidy(rhs.to_string()) });
        self
    }
}

/// `t⁻¹ f(x t)` for a rational component.
pub fn shift_rational(f: &RatFunc, vars: &[Var], t: Var) -> RatFunc {
    &f.scale_vars(vars, t) * &RatFunc::var(t).recip().expect("nonzero symbol")
}

/// φ^t(x) = t⁻¹ φ(x t) as closed forms in the coordinates and `t`.
pub fn time_shift(phi: &FlowMap, t: Var) -> Result<Vec<ClosedForm>> {
    if phi.vars().contains(&t) {
        return Err(domain(format!("time symbol {t} clashes with a coordinate")));
    }
    let scale: BTreeMap<Var, ClosedForm> = phi
        .vars()
        .iter()
        .map(|&v| (v, ClosedForm::Rational(&RatFunc::var(v) * &RatFunc::var(t))))
        .collect();
    let inv_t = ClosedForm::Rational(RatFunc::var(t).recip()?);
    phi.components()
        .iter()
        .map(|c| match c {
            ClosedForm::Rational(r) => Ok(ClosedForm::Rational(shift_rational(r, phi.vars(), t))),
            _ => Ok(c.substitute(&scale)?.mul(&inv_t)),
        })
        .collect()
}

/// Formal solution coefficients: `coeffs[i][k]` multiplies z^k in component i.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesFlow {
    pub vars: Vec<Var>,
    pub coeffs: Vec<Vec<RatFunc>>,
}

impl SeriesFlow {
    pub fn order(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }
}

/// Expansion of φ^z in powers of z through z^(order-1).
pub fn time_shift_series(phi: &FlowMap, order: usize) -> Result<SeriesFlow> {
    let mut coeffs = Vec::new();
    for c in phi.components() {
        let s = PSeries::from_closed(c, phi.vars(), order + 2)?.shift(-1);
        if s.valuation() < 0 {
            return Err(domain("boundary condition fails: component blows up as z -> 0"));
        }
        let cs = (0..order as i64)
            .map(|k| s.coeff(k).ok_or_else(|| domain("series precision exhausted")))
            .collect::<Result<Vec<_>>>()?;
        coeffs.push(cs);
    }
    Ok(SeriesFlow { vars: phi.vars().to_vec(), coeffs })
}

fn boundary_holds(s: &SeriesFlow) -> bool {
    s.vars.iter().zip(&s.coeffs).all(|(&v, c)| c[0] == RatFunc::var(v))
}

pub fn verify_boundary(phi: &FlowMap) -> bool {
    time_shift_series(phi, 1).is_ok_and(|s| boundary_holds(&s))
}

/// The z-linear coefficient of φ^z.
pub fn vector_field(phi: &FlowMap) -> Result<VectorField> {
    let s = time_shift_series(phi, 2)?;
    if !boundary_holds(&s) {
        return Err(domain("boundary condition fails"));
    }
    VectorField::new(phi.vars().to_vec(), s.coeffs.into_iter().map(|mut c| c.swap_remove(1)).collect())
}

fn eval_poly_series(p: &crate::algebra::MPoly, xs: &[PSeries], vars: &[Var], prec: usize) -> PSeries {
    let mut powers: BTreeMap<(usize, u32), PSeries> = BTreeMap::new();
    let mut acc = PSeries::constant(RatFunc::zero(), prec);
    for (m, c) in p.terms() {
        let mut t = PSeries::constant(RatFunc::constant(c.clone()), prec);
        for (v, e) in m.pairs() {
            let i = vars.iter().position(|&u| u == v).expect("field variable");
            powers.entry((i, e)).or_insert_with(|| {
                let mut q = PSeries::constant(RatFunc::one(), prec);
                for _ in 0..e {
                    q = q.mul(&xs[i]);
                }
                q
            });
            t = t.mul(&powers[&(i, e)]);
        }
        acc = acc.add(&t);
    }
    acc
}

/// Formal solution of X' = V(X), X(0) = x, through z^(order-1).
pub fn series_flow(v: &VectorField, order: usize) -> Result<SeriesFlow> {
    if order < 1 {
        return Err(domain("series order must be at least 1"));
    }
    let vars = v.vars().to_vec();
    let base: Vec<PSeries> = vars.iter().map(|&x| PSeries::constant(RatFunc::var(x), 1)).collect();
    let mut xs = base.clone();
    for j in 1..order {
        let mut next = Vec::with_capacity(xs.len());
        for (i, f) in v.components().iter().enumerate() {
            let num = eval_poly_series(f.num(), &xs, &vars, j);
            let den = eval_poly_series(f.den(), &xs, &vars, j);
            let g = num.mul(&den.inv()?);
            // ∫ g dz, then add the initial value.
            let coeffs: Vec<RatFunc> = (0..j as i64)
                .map(|k| g.coeff(k).expect("precision").scale(&crate::algebra::rat(1, k + 1)))
                .collect();
            let integral = PSeries::new(1, coeffs);
            let x0 = PSeries::constant(RatFunc::var(vars[i]), j + 1);
            next.push(x0.add(&integral));
        }
        xs = next;
    }
    let coeffs = xs
        .iter()
        .map(|s| (0..order as i64).map(|k| s.coeff(k).expect("precision")).collect())
        .collect();
    Ok(SeriesFlow { vars, coeffs })
}

pub fn verify_translation(phi: &FlowMap, mode: VerifyMode) -> Result<VerificationReport> {
    match mode {
        VerifyMode::Exact => exact_translation(phi),
        VerifyMode::Series(k) => Ok(series_translation(phi, k)),
        VerifyMode::Numeric { tol, samples, seed } => Ok(numeric_translation(phi, tol, samples, seed)),
    }
}

fn exact_translation(phi: &FlowMap) -> Result<VerificationReport> {
    let comps = phi.rational()?;
    let report = VerificationReport::new(VerifyMode::Exact, None);
    let vars = phi.vars();
    let (z, w) = (Var::aux(0), Var::aux(1));
    let fz: Vec<RatFunc> = comps.iter().map(|c| shift_rational(c, vars, z)).collect();
    let fw: Vec<RatFunc> = comps.iter().map(|c| shift_rational(c, vars, w)).collect();
    let inner: BTreeMap<Var, RatFunc> = vars.iter().copied().zip(fz.iter().cloned()).collect();
    let sum: BTreeMap<Var, RatFunc> = [(z, &RatFunc::var(z) + &RatFunc::var(w))].into_iter().collect();
    for (i, (a, b)) in fw.iter().zip(&fz).enumerate() {
        let lhs = match a.substitute(&inner) {
            Ok(l) => l,
            Err(e) => return Ok(report.fail(format!("component {}", i + 1), e, "defined")),
        };
        let rhs = b.substitute(&sum)?;
        if lhs != rhs {
            return Ok(report.fail(format!("component {}", i + 1), lhs, rhs));
        }
    }
    Ok(report)
}

fn series_translation(phi: &FlowMap, order: usize) -> VerificationReport {
    let report = VerificationReport::new(VerifyMode::Series(order), Some(order));
    let ts = match time_shift_series(phi, order.max(2)) {
        Ok(s) => s,
        Err(e) => return report.fail("expansion", e, "formal series"),
    };
    if !boundary_holds(&ts) {
        return report.fail("order 0", "boundary term", "coordinates");
    }
    let v = match VectorField::new(ts.vars.clone(), ts.coeffs.iter().map(|c| c[1].clone()).collect()) {
        Ok(v) => v,
        Err(e) => return report.fail("order 1", e, "2-homogeneous field"),
    };
    let sf = match series_flow(&v, order) {
        Ok(s) => s,
        Err(e) => return report.fail("series recursion", e, "solution"),
    };
    for k in 0..order {
        for (i, (a, b)) in ts.coeffs.iter().zip(&sf.coeffs).enumerate() {
            if a[k] != b[k] {
                return report.fail(format!("component {}, order {k}", i + 1), &a[k], &b[k]);
            }
        }
    }
    report
}

/// Numeric evaluator of φ^t(x) = φ(t x)/t.
pub struct ShiftEvaluator {
    compiled: Vec<crate::algebra::Compiled>,
}

impl ShiftEvaluator {
    pub fn new(phi: &FlowMap) -> Result<Self> {
        let compiled = phi.components().iter().map(|c| c.compile(phi.vars())).collect::<Result<Vec<_>>>()?;
        Ok(ShiftEvaluator { compiled })
    }

    pub fn eval(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut cert = f64::INFINITY;
        self.eval_cert(x, t, &mut cert)
    }

    pub fn eval_cert(&self, x: &[f64], t: f64, min_base: &mut f64) -> Result<Vec<f64>> {
        let scaled: Vec<f64> = x.iter().map(|v| v * t).collect();
        self.compiled.iter().map(|c| Ok(c.eval_cert(&scaled, min_base)? / t)).collect()
    }

    /// φ itself (t = 1).
    pub fn eval_map(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval(x, 1.0)
    }
}

pub(crate) fn sample_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(SAMPLE_BOX.0..SAMPLE_BOX.1)).collect()
}

fn numeric_translation(phi: &FlowMap, tol: f64, samples: usize, seed: u64) -> VerificationReport {
    let report = VerificationReport::new(VerifyMode::Numeric { tol, samples, seed }, Some(samples));
    let ev = match ShiftEvaluator::new(phi) {
        Ok(e) => e,
        Err(e) => return report.fail("compile", e, "evaluator"),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..samples {
        let x = sample_point(&mut rng, phi.dim());
        let z = rng.gen_range(TIME_BOX.0..TIME_BOX.1);
        let w = rng.gen_range(TIME_BOX.0..TIME_BOX.1);
        let lhs = ev.eval(&x, z).and_then(|a| ev.eval(&a, w));
        let rhs = ev.eval(&x, z + w);
        let loc = format!("sample {s} at x={x:?}, z={z}, w={w}");
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => {
                for (a, b) in l.iter().zip(&r) {
                    if (a - b).abs() > tol * b.abs().max(1.0) || !a.is_finite() {
                        return report.fail(loc, format!("{l:?}"), format!("{r:?}"));
                    }
                }
            }
            (Err(e), _) | (_, Err(e)) => return report.fail(loc, e, "evaluation"),
        }
    }
    report
}

/// Σ_j ∂_j u (V_j − x_j) + u for one component.
fn pde_residual(u: &ClosedForm, v: &VectorField) -> ClosedForm {
    let mut terms = vec![u.clone()];
    for (&x, vj) in v.vars().iter().zip(v.components()) {
        let shift = ClosedForm::Rational(vj - &RatFunc::var(x));
        terms.push(u.diff(x).mul(&shift));
    }
    ClosedForm::sum_of(terms)
}

/// The PDE system satisfied by a flow and its field; exact for rational flows,
/// sampled otherwise.
pub fn verify_pde(phi: &FlowMap, v: &VectorField) -> Result<bool> {
    verify_pde_with(phi, v, if phi.is_rational() { VerifyMode::Exact } else { VerifyMode::numeric_default() })
}

pub fn verify_pde_with(phi: &FlowMap, v: &VectorField, mode: VerifyMode) -> Result<bool> {
    if phi.vars() != v.vars() {
        return Err(domain("flow and field dimensions differ"));
    }
    let residuals: Vec<ClosedForm> = phi.components().iter().map(|u| pde_residual(u, v)).collect();
    match mode {
        VerifyMode::Exact | VerifyMode::Series(_) if residuals.iter().all(ClosedForm::is_rational) => {
            Ok(residuals.iter().all(ClosedForm::is_zero))
        }
        VerifyMode::Exact => Err(crate::error::Error::NotRational(phi.to_string())),
        VerifyMode::Series(_) => verify_pde_with(phi, v, VerifyMode::numeric_default()),
        VerifyMode::Numeric { tol, samples, seed } => {
            let compiled = residuals.iter().map(|r| r.compile(phi.vars())).collect::<Result<Vec<_>>>()?;
            let scale = phi.components().iter().map(|c| c.compile(phi.vars())).collect::<Result<Vec<_>>>()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let x = sample_point(&mut rng, phi.dim());
                for (r, u) in compiled.iter().zip(&scale) {
                    let size = u.eval(&x)?.abs().max(1.0);
                    if r.eval(&x)?.abs() > tol * size {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}

/// Level-0 detection: when xρ − yϖ = 0 the flow is x/(1−J) • y/(1−J) with J = ϖ/x.
pub fn level0_detect(v: &VectorField) -> Result<Option<(RatFunc, FlowMap)>> {
    let (p, r) = v.pair()?;
    let (x, y) = (RatFunc::var(Var::X), RatFunc::var(Var::Y));
    if !(&(&x * r) - &(&y * p)).is_zero() {
        return Ok(None);
    }
    let j = p.checked_div(&x)?;
    let d = (&RatFunc::one() - &j).recip()?;
    Ok(Some((j, FlowMap::planar(&x * &d, &y * &d))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_ratfunc;

    fn flow(s: &str) -> FlowMap {
        FlowMap::parse(s).unwrap()
    }

    fn field(s: &str) -> VectorField {
        VectorField::parse(s).unwrap()
    }

    #[test]
    fn time_shift_examples() {
        let t = Var::Z;
        let s = time_shift(&flow("x*(y+1)^2, y/(y+1)"), t).unwrap();
        assert_eq!(s[0], ClosedForm::Rational(parse_ratfunc("x*(z*y+1)^2").unwrap()));
        assert_eq!(s[1], ClosedForm::Rational(parse_ratfunc("y/(z*y+1)").unwrap()));
        let s = time_shift(&flow("x/(1-x), y/(1-y)"), t).unwrap();
        assert_eq!(s[0], ClosedForm::Rational(parse_ratfunc("x/(1-z*x)").unwrap()));
        let id = time_shift(&flow("x, y"), t).unwrap();
        assert_eq!(id[1], ClosedForm::var(Var::Y));
    }

    #[test]
    fn vector_field_examples() {
        assert_eq!(vector_field(&flow("x/(1-x), y/(1-y)")).unwrap(), field("x^2, y^2"));
        assert_eq!(vector_field(&flow("x*(y+1)^2, y/(y+1)")).unwrap(), field("2*x*y, -y^2"));
        assert_eq!(vector_field(&flow("x, y")).unwrap(), field("0, 0"));
        assert_eq!(vector_field(&flow("(x-y)^2+x, (x-y)^2+y")).unwrap(), field("(x-y)^2, (x-y)^2"));
        assert!(vector_field(&flow("1, y")).is_err());
    }

    #[test]
    fn translation_modes() {
        for s in ["x*(y+1)^2, y/(y+1)", "x+y^2, y"] {
            let f = flow(s);
            assert!(verify_translation(&f, VerifyMode::Exact).unwrap().pass, "{s}");
            assert!(verify_translation(&f, VerifyMode::Series(6)).unwrap().pass, "{s}");
            assert!(verify_translation(&f, VerifyMode::numeric_default()).unwrap().pass, "{s}");
        }
        let bad = flow("x^2, y");
        let r = verify_translation(&bad, VerifyMode::Exact).unwrap();
        assert!(!r.pass && r.first_discrepancy.is_some());
        assert!(!verify_translation(&bad, VerifyMode::Series(4)).unwrap().pass);
        assert!(!verify_translation(&bad, VerifyMode::numeric_default()).unwrap().pass);
    }

    #[test]
    fn algebraic_flow_boundary_and_field() {
        let u = flow("(x^3+y^4)^(1/3)/(y+1)^(4/3), y/(y+1)");
        assert!(verify_boundary(&u));
        let v = vector_field(&u).unwrap();
        assert_eq!(v, field("-4/3*x*y+1/3*y^4/x^2, -y^2"));
        assert!(verify_translation(&u, VerifyMode::Series(5)).unwrap().pass);
        assert!(verify_translation(&u, VerifyMode::numeric_default()).unwrap().pass);
        assert!(verify_pde(&u, &v).unwrap());
        assert!(!verify_boundary(&flow("1, y")));
    }

    #[test]
    fn pde_examples() {
        let phi3 = flow("x*(y+1)^2, y/(y+1)");
        assert!(verify_pde(&phi3, &field("2*x*y, -y^2")).unwrap());
        assert!(verify_pde(&flow("x, y"), &field("0, 0")).unwrap());
        assert!(!verify_pde(&phi3, &field("x^2, y^2")).unwrap());
    }

    #[test]
    fn series_examples() {
        let s = series_flow(&field("x^2, y^2"), 3).unwrap();
        let want: Vec<RatFunc> = ["x", "x^2", "x^3"].iter().map(|e| parse_ratfunc(e).unwrap()).collect();
        assert_eq!(s.coeffs[0], want);
        let s = series_flow(&field("2*x*y, -y^2"), 2).unwrap();
        assert_eq!(s.coeffs[0][1], parse_ratfunc("2*x*y").unwrap());
        assert_eq!(s.coeffs[1][1], parse_ratfunc("-y^2").unwrap());
        let z = series_flow(&field("0, 0"), 4).unwrap();
        assert!(z.coeffs[0][1..].iter().all(RatFunc::is_zero));
        assert!(series_flow(&field("0, 0"), 0).is_err());
    }

    #[test]
    fn level0_examples() {
        let (j, f) = level0_detect(&field("x^2*y/(x+y), x*y^2/(x+y)")).unwrap().unwrap();
        assert_eq!(j, parse_ratfunc("x*y/(x+y)").unwrap());
        assert!(verify_translation(&f, VerifyMode::Exact).unwrap().pass);
        assert!(level0_detect(&field("2*x*y, -y^2")).unwrap().is_none());
        let (j, f) = level0_detect(&field("0, 0")).unwrap().unwrap();
        assert!(j.is_zero());
        assert_eq!(f, flow("x, y"));
    }
}
