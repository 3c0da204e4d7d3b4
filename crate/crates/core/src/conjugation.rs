//! 1-homogeneous birational maps, linear maps, and conjugation of flows and fields.

use crate::algebra::linsolve::{det, inverse, solve_square};
use crate::algebra::{parse_any, split_tuple, ClosedForm, MPoly, Rat, RatFunc, Var};
use crate::error::{domain, Error, Result};
use crate::flowcore::{FlowMap, VectorField};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// ℓ_{P,Q}: x_i ↦ x_i·P/Q, stored through the 0-homogeneous ratio A = P/Q.
#[derive(Clone, Debug, PartialEq)]
pub struct BirMap1H {
    a: RatFunc,
}

impl BirMap1H {
    pub fn new(p: &MPoly, q: &MPoly) -> Result<Self> {
        if p.is_zero() || q.is_zero() {
            return Err(domain("P and Q must be nonzero"));
        }
        match (p.homogeneous_degree(), q.homogeneous_degree()) {
            (Some(dp), Some(dq)) if dp == dq => BirMap1H::from_ratio(RatFunc::new(p.clone(), q.clone())?),
            _ => Err(domain(format!("P = {p} and Q = {q} must be homogeneous of one degree"))),
        }
    }

    pub fn from_ratio(a: RatFunc) -> Result<Self> {
        if a.is_zero() || a.homogeneity_degree() != Some(0) {
            return Err(domain(format!("A = {a} is not a nonzero 0-homogeneous function")));
        }
        Ok(BirMap1H { a })
    }

    pub fn parse(p: &str, q: &str) -> Result<Self> {
        let p = parse_any(p)?.to_ratfunc()?;
        let q = parse_any(q)?.to_ratfunc()?;
        if !p.is_poly() || !q.is_poly() {
            return Err(domain("P and Q must be polynomials"));
        }
        BirMap1H::new(p.num(), q.num())
    }

    pub fn identity() -> Self {
        BirMap1H { a: RatFunc::one() }
    }

    pub fn ratio(&self) -> &RatFunc {
        &self.a
    }

    pub fn p(&self) -> &MPoly {
        self.a.num()
    }

    pub fn q(&self) -> &MPoly {
        self.a.den()
    }

    /// ℓ_{P,Q}⁻¹ = ℓ_{Q,P}.
    pub fn inverse(&self) -> BirMap1H {
        BirMap1H { a: self.a.recip().expect("nonzero ratio") }
    }

    /// `self ∘ other`; the ratios multiply, so such maps commute.
    pub fn compose(&self, other: &BirMap1H) -> BirMap1H {
        BirMap1H { a: &self.a * &other.a }
    }

    pub fn tuple(&self, vars: &[Var]) -> Vec<RatFunc> {
        vars.iter().map(|&v| &RatFunc::var(v) * &self.a).collect()
    }
}

impl fmt::Display for BirMap1H {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P = {}, Q = {}", self.p(), self.q())
    }
}

/// Non-degenerate linear map x ↦ M x.
#[derive(Clone, Debug, PartialEq)]
pub struct LinMap {
    m: Vec<Vec<Rat>>,
}

impl LinMap {
    pub fn new(m: Vec<Vec<Rat>>) -> Result<Self> {
        let n = m.len();
        if n == 0 || m.iter().any(|r| r.len() != n) {
            return Err(domain("linear map must be a nonempty square matrix"));
        }
        if det(&m).is_zero() {
            return Err(Error::Singular("linear map has zero determinant".into()));
        }
        Ok(LinMap { m })
    }

    pub fn identity(n: usize) -> Self {
        LinMap { m: (0..n).map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect() }
    }

    pub fn swap() -> Self {
        LinMap { m: vec![vec![Rat::zero(), Rat::one()], vec![Rat::one(), Rat::zero()]] }
    }

    pub fn diag(d: Vec<Rat>) -> Result<Self> {
        let n = d.len();
        LinMap::new((0..n).map(|i| (0..n).map(|j| if i == j { d[i].clone() } else { Rat::zero() }).collect()).collect())
    }

    /// Rows separated by `;`, entries by `,`, e.g. `"0,1;1,0"`.
    pub fn parse(text: &str) -> Result<Self> {
        let rows = text
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|s| {
                        let s = s.trim();
                        s.parse::<Rat>().map_err(|_| Error::Syntax { pos: 0, msg: format!("bad matrix entry `{s}`") })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        LinMap::new(rows)
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn matrix(&self) -> &[Vec<Rat>] {
        &self.m
    }

    pub fn det(&self) -> Rat {
        det(&self.m)
    }

    pub fn inverse(&self) -> LinMap {
        LinMap { m: inverse(&self.m).expect("invertible by construction") }
    }

    /// `self ∘ other`, the matrix product.
    pub fn compose(&self, other: &LinMap) -> LinMap {
        let n = self.dim();
        let m = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| &self.m[i][k] * &other.m[k][j]).sum()).collect())
            .collect();
        LinMap { m }
    }

    /// Apply the matrix to a tuple of functions.
    pub fn apply(&self, v: &[RatFunc]) -> Vec<RatFunc> {
        self.m
            .iter()
            .map(|row| RatFunc::sum(&row.iter().zip(v).map(|(c, f)| f.scale(c)).collect::<Vec<_>>()))
            .collect()
    }

    pub fn tuple(&self, vars: &[Var]) -> Vec<RatFunc> {
        self.apply(&vars.iter().map(|&v| RatFunc::var(v)).collect::<Vec<_>>())
    }
}

/// A general 1-homogeneous birational tuple with a stored inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct TupleMap {
    vars: Vec<Var>,
    forward: Vec<RatFunc>,
    inverse: Vec<RatFunc>,
}

impl TupleMap {
    /// Validated by composing both ways to the identity.
    pub fn new(vars: Vec<Var>, forward: Vec<RatFunc>, inverse: Vec<RatFunc>) -> Result<Self> {
        if forward.len() != vars.len() || inverse.len() != vars.len() {
            return Err(domain("tuple map arity mismatch"));
        }
        let map = TupleMap { vars, forward, inverse };
        let id: Vec<RatFunc> = map.vars.iter().map(|&v| RatFunc::var(v)).collect();
        if compose_tuples(&map.vars, &map.forward, &map.inverse)? != id
            || compose_tuples(&map.vars, &map.inverse, &map.forward)? != id
        {
            return Err(domain("stored inverse does not invert the map"));
        }
        Ok(map)
    }

    pub fn parse(vars: Vec<Var>, forward: &str, inverse: &str) -> Result<Self> {
        let parse = |s: &str| -> Result<Vec<RatFunc>> {
            split_tuple(s).into_iter().map(|p| parse_any(p)?.to_ratfunc()).collect()
        };
        TupleMap::new(vars, parse(forward)?, parse(inverse)?)
    }

    /// The involution i(x, y) = (y²/x, y).
    pub fn involution_i() -> Self {
        let f = vec![
            RatFunc::new(MPoly::var(Var::Y).pow(2), MPoly::var(Var::X)).unwrap(),
            RatFunc::var(Var::Y),
        ];
        TupleMap { vars: vec![Var::X, Var::Y], forward: f.clone(), inverse: f }
    }

    pub fn forward(&self) -> &[RatFunc] {
        &self.forward
    }

    pub fn inverse_tuple(&self) -> &[RatFunc] {
        &self.inverse
    }
}

/// `outer ∘ inner` for tuples in the same coordinates.
fn compose_tuples(vars: &[Var], outer: &[RatFunc], inner: &[RatFunc]) -> Result<Vec<RatFunc>> {
    let map: BTreeMap<Var, RatFunc> = vars.iter().copied().zip(inner.iter().cloned()).collect();
    outer.iter().map(|f| f.substitute(&map)).collect()
}

/// Anything a flow can be conjugated by.
#[derive(Clone, Debug, PartialEq)]
pub enum Conjugator {
    Bir(BirMap1H),
    Linear(LinMap),
    Tuple(TupleMap),
}

impl Conjugator {
    pub fn forward(&self, vars: &[Var]) -> Result<Vec<RatFunc>> {
        match self {
            Conjugator::Bir(b) => Ok(b.tuple(vars)),
            Conjugator::Linear(l) => {
                if l.dim() != vars.len() {
                    return Err(domain("linear map dimension differs from the flow"));
                }
                Ok(l.tuple(vars))
            }
            Conjugator::Tuple(t) => {
                if t.vars != vars {
                    return Err(domain("tuple map coordinates differ from the flow"));
                }
                Ok(t.forward.clone())
            }
        }
    }

    pub fn backward(&self, vars: &[Var]) -> Result<Vec<RatFunc>> {
        match self {
            Conjugator::Bir(b) => Ok(b.inverse().tuple(vars)),
            Conjugator::Linear(l) => Conjugator::Linear(l.inverse()).forward(vars),
            Conjugator::Tuple(t) => Conjugator::Tuple(TupleMap {
                vars: t.vars.clone(),
                forward: t.inverse.clone(),
                inverse: t.forward.clone(),
            })
            .forward(vars),
        }
    }
}

/// x_i·A evaluated on a tuple of expressions.
pub fn apply_bir(l: &BirMap1H, vars: &[Var], v: &[ClosedForm]) -> Result<Vec<ClosedForm>> {
    if vars.len() != v.len() {
        return Err(domain("arity mismatch"));
    }
    let map: BTreeMap<Var, ClosedForm> = vars.iter().copied().zip(v.iter().cloned()).collect();
    let a = ClosedForm::Rational(l.ratio().clone())
        .substitute(&map)
        .map_err(|_| domain("Q vanishes identically on the image"))?;
    Ok(v.iter().map(|c| c.mul(&a)).collect())
}

fn degenerate(e: Error) -> Error {
    match e {
        Error::DivisionByZero => domain("degenerate conjugate: a denominator vanishes identically"),
        other => other,
    }
}

/// m⁻¹ ∘ φ ∘ m.
pub fn conjugate_flow(phi: &FlowMap, m: &Conjugator) -> Result<FlowMap> {
    let vars = phi.vars().to_vec();
    let fwd = FlowMap::from_rational(vars.clone(), m.forward(&vars)?)?;
    let back = FlowMap::from_rational(vars.clone(), m.backward(&vars)?)?;
    back.compose(&phi.compose(&fwd).map_err(degenerate)?).map_err(degenerate)
}

/// Field of ℓ⁻¹∘φ∘ℓ from the field of φ:
/// ϖ′ = Aϖ − A_y(xρ−yϖ), ρ′ = Aρ + A_x(xρ−yϖ).
pub fn conjugate_vf(v: &VectorField, l: &BirMap1H) -> Result<VectorField> {
    let (p, r) = v.pair()?;
    let a = l.ratio();
    let (x, y) = (RatFunc::var(Var::X), RatFunc::var(Var::Y));
    let k = &(&x * r) - &(&y * p);
    let p2 = &(a * p) - &(&a.diff(Var::Y) * &k);
    let r2 = &(a * r) + &(&a.diff(Var::X) * &k);
    VectorField::planar(p2, r2)
}

/// L⁻¹ ∘ V ∘ L.
pub fn conjugate_vf_linear(v: &VectorField, l: &LinMap) -> Result<VectorField> {
    if l.dim() != v.dim() {
        return Err(domain("linear map dimension differs from the field"));
    }
    let at = compose_tuples(v.vars(), v.components(), &l.tuple(v.vars()))?;
    VectorField::new(v.vars().to_vec(), l.inverse().apply(&at))
}

/// General conjugation through the Jacobian: V′(x) = Dm(x)⁻¹ V(m(x)).
pub fn conjugate_vf_map(v: &VectorField, m: &Conjugator) -> Result<VectorField> {
    let vars = v.vars();
    let fwd = m.forward(vars)?;
    let at = compose_tuples(vars, v.components(), &fwd).map_err(degenerate)?;
    let jac: Vec<Vec<RatFunc>> = fwd.iter().map(|f| vars.iter().map(|&x| f.diff(x)).collect()).collect();
    VectorField::new(vars.to_vec(), solve_square(jac, at)?)
}
