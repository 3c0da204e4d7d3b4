//! Floating-point cross-checks: RK4 integration of fields, Green and Gauss
//! conservation checks, level-set sampling and CSV output.
//!
//! Every routine reports the smallest fractional-power base it evaluated
//! (`min_base`, infinite when no such power occurs) so branch trouble is visible.

use crate::algebra::{ClosedForm, Compiled, RatFunc, Var};
use crate::error::{domain, Result};
use crate::flowcore::{FlowMap, ShiftEvaluator, VectorField};
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

fn compile_field(v: &VectorField) -> Result<Vec<Compiled>> {
    v.components().iter().map(|c| ClosedForm::Rational(c.clone()).compile(v.vars())).collect()
}

fn eval_all(c: &[Compiled], x: &[f64], min_base: &mut f64) -> Result<Vec<f64>> {
    c.iter().map(|f| f.eval_cert(x, min_base)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RkOutcome {
    pub point: Vec<f64>,
    pub min_base: f64,
}

/// Local error allowed per accepted step, relative to max(1, |x|).
const STEP_TOL: f64 = 1e-13;
const MAX_SPLITS: u32 = 24;

struct Rk4<'a> {
    f: &'a [Compiled],
    min_base: f64,
}

impl Rk4<'_> {
    fn step(&mut self, x: &[f64], h: f64) -> Result<Vec<f64>> {
        let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        let k1 = eval_all(self.f, x, &mut self.min_base)?;
        let k2 = eval_all(self.f, &axpy(x, &k1, h / 2.0), &mut self.min_base)?;
        let k3 = eval_all(self.f, &axpy(x, &k2, h / 2.0), &mut self.min_base)?;
        let k4 = eval_all(self.f, &axpy(x, &k3, h), &mut self.min_base)?;
        Ok(x.iter().enumerate().map(|(i, xi)| xi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
    }

    /// One step of size h, rejected and split in two when a guard trips or the
    /// full step and two half steps disagree.
    fn advance(&mut self, x: &[f64], h: f64, depth: u32) -> Result<Vec<f64>> {
        let attempt = self.step(x, h).and_then(|full| {
            let mid = self.step(x, h / 2.0)?;
            Ok((full, self.step(&mid, h / 2.0)?))
        });
        let accepted = match attempt {
            Ok((full, half)) => {
                let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                let err = full.iter().zip(&half).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / 15.0;
                (err <= STEP_TOL * scale && half.iter().all(|v| v.is_finite())).then_some(half)
            }
            Err(e) if depth >= MAX_SPLITS => return Err(e),
            Err(_) => None,
        };
        match accepted {
            Some(x) => Ok(x),
            None if depth >= MAX_SPLITS => Err(crate::Error::Singular(format!("step rejected {MAX_SPLITS} times near {x:?}"))),
            None => {
                let mid = self.advance(x, h / 2.0, depth + 1)?;
                self.advance(&mid, h / 2.0, depth + 1)
            }
        }
    }
}

/// Classical fourth-order integration of x′ = V(x) from 0 to `z` in `steps` nominal
/// steps. A step is rejected and halved when a denominator falls below 1e−12 or
/// step doubling shows a local error above 1e−13.
pub fn rk4_flow(v: &VectorField, x0: &[f64], z: f64, steps: usize) -> Result<RkOutcome> {
    if x0.len() != v.dim() {
        return Err(domain(format!("start point has {} coordinates, field has {}", x0.len(), v.dim())));
    }
    if steps == 0 {
        return Err(domain("at least one step is required"));
    }
    let f = compile_field(v)?;
    let h = z / steps as f64;
    let mut rk = Rk4 { f: &f, min_base: f64::INFINITY };
    let mut x = x0.to_vec();
    for _ in 0..steps {
        x = rk.advance(&x, h, 0)?;
    }
    Ok(RkOutcome { point: x, min_base: rk.min_base })
}

/// φ^z together with its Jacobian, Dφ^z(p) = Dφ(z·p).
struct FlowJet {
    shift: ShiftEvaluator,
    jac: Vec<Vec<Compiled>>,
}

impl FlowJet {
    fn new(phi: &FlowMap) -> Result<Self> {
        let jac = phi
            .components()
            .iter()
            .map(|c| phi.vars().iter().map(|&v| c.diff(v).compile(phi.vars())).collect())
            .collect::<Result<_>>()?;
        Ok(FlowJet { shift: ShiftEvaluator::new(phi)?, jac })
    }

    fn map(&self, p: &[f64], z: f64, min_base: &mut f64) -> Result<Vec<f64>> {
        self.shift.eval_cert(p, z, min_base)
    }

    /// Dφ^z(p)·d
    fn push(&self, p: &[f64], d: &[f64], z: f64, min_base: &mut f64) -> Result<Vec<f64>> {
        let scaled: Vec<f64> = p.iter().map(|v| v * z).collect();
        self.jac
            .iter()
            .map(|row| row.iter().zip(d).map(|(c, di)| Ok(c.eval_cert(&scaled, min_base)? * di)).sum())
            .collect()
    }
}

/// Closed planar curve θ ↦ (x, y) on [0, 2π] with its tangent.
pub struct Curve2 {
    point: Box<dyn Fn(f64) -> [f64; 2] + Send + Sync>,
    tangent: Box<dyn Fn(f64) -> [f64; 2] + Send + Sync>,
}

impl Curve2 {
    pub fn new(
        point: impl Fn(f64) -> [f64; 2] + Send + Sync + 'static,
        tangent: impl Fn(f64) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Curve2 { point: Box::new(point), tangent: Box::new(tangent) }
    }

    pub fn circle(center: [f64; 2], radius: f64) -> Self {
        Curve2::new(
            move |t| [center[0] + radius * t.cos(), center[1] + radius * t.sin()],
            move |t| [-radius * t.sin(), radius * t.cos()],
        )
    }

    pub fn unit_circle() -> Self {
        Curve2::circle([0.0, 0.0], 1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AreaReport {
    pub area0: f64,
    pub area_z: f64,
    pub min_base: f64,
}

/// Net turning of the polygon through `pts`, in full turns.
fn turning_number(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    let edge = |i: usize| {
        let (a, b) = (pts[i % n], pts[(i + 1) % n]);
        (b[1] - a[1]).atan2(b[0] - a[0])
    };
    let mut total = 0.0;
    for i in 0..n {
        let mut d = edge(i + 1) - edge(i);
        while d > PI {
            d -= TAU;
        }
        while d < -PI {
            d += TAU;
        }
        total += d;
    }
    total / TAU
}

/// Green's formula ∮ x dy before and after φ^z, by the periodic trapezoid rule.
pub fn area_check(phi: &FlowMap, curve: &Curve2, z: f64, samples: usize) -> Result<AreaReport> {
    if phi.dim() != 2 {
        return Err(domain("area check needs a planar flow"));
    }
    if samples < 8 {
        return Err(domain("too few samples"));
    }
    let jet = FlowJet::new(phi)?;
    let h = TAU / samples as f64;
    let mut min_base = f64::INFINITY;
    let (mut a0, mut az) = (0.0, 0.0);
    let mut moved = Vec::with_capacity(samples);
    for k in 0..samples {
        let t = k as f64 * h;
        let (p, d) = ((curve.point)(t), (curve.tangent)(t));
        a0 += p[0] * d[1];
        let q = jet.map(&p, z, &mut min_base)?;
        let dq = jet.push(&p, &d, z, &mut min_base)?;
        az += q[0] * dq[1];
        moved.push([q[0], q[1]]);
    }
    if (turning_number(&moved).abs() - 1.0).abs() > 0.25 {
        return Err(domain("deformed curve is not simple at this resolution"));
    }
    Ok(AreaReport { area0: a0 * h, area_z: az * h, min_base })
}

type SurfaceFn = Box<dyn Fn(f64, f64) -> [f64; 3] + Send + Sync>;

/// Closed oriented surface over (θ, ϕ) ∈ [0, π] × [0, 2π] with both partials.
pub struct Surface3 {
    point: SurfaceFn,
    d_theta: SurfaceFn,
    d_phi: SurfaceFn,
}

impl Surface3 {
    pub fn new(
        point: impl Fn(f64, f64) -> [f64; 3] + Send + Sync + 'static,
        d_theta: impl Fn(f64, f64) -> [f64; 3] + Send + Sync + 'static,
        d_phi: impl Fn(f64, f64) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        Surface3 { point: Box::new(point), d_theta: Box::new(d_theta), d_phi: Box::new(d_phi) }
    }

    /// Outward-oriented sphere.
    pub fn sphere(center: [f64; 3], r: f64) -> Self {
        Surface3::new(
            move |t, p| [center[0] + r * t.sin() * p.cos(), center[1] + r * t.sin() * p.sin(), center[2] + r * t.cos()],
            move |t, p| [r * t.cos() * p.cos(), r * t.cos() * p.sin(), -r * t.sin()],
            move |t, p| [-r * t.sin() * p.sin(), r * t.sin() * p.cos(), 0.0],
        )
    }

    pub fn unit_sphere() -> Self {
        Surface3::sphere([0.0, 0.0, 0.0], 1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeReport {
    pub vol0: f64,
    pub vol_z: f64,
    pub min_base: f64,
}

/// Gauss's formula ∬ x dy∧dw before and after φ^z on a (θ, ϕ) grid: trapezoid in θ,
/// periodic trapezoid in ϕ.
pub fn volume_check(phi: &FlowMap, surface: &Surface3, z: f64, grid: (usize, usize)) -> Result<VolumeReport> {
    if phi.dim() != 3 {
        return Err(domain("volume check needs a 3-dimensional flow"));
    }
    let (nt, np) = grid;
    if nt < 4 || np < 4 {
        return Err(domain("grid too coarse"));
    }
    let jet = FlowJet::new(phi)?;
    let (ht, hp) = (PI / nt as f64, TAU / np as f64);
    let mut min_base = f64::INFINITY;
    let flux = |p: &[f64], a: &[f64], b: &[f64]| p[0] * (a[1] * b[2] - a[2] * b[1]);
    let (mut v0, mut vz) = (0.0, 0.0);
    for i in 0..=nt {
        let t = i as f64 * ht;
        let wt = if i == 0 || i == nt { 0.5 } else { 1.0 };
        for j in 0..np {
            let p = j as f64 * hp;
            let (s, st, sp) = ((surface.point)(t, p), (surface.d_theta)(t, p), (surface.d_phi)(t, p));
            v0 += wt * flux(&s, &st, &sp);
            let q = jet.map(&s, z, &mut min_base)?;
            let qt = jet.push(&s, &st, z, &mut min_base)?;
            let qp = jet.push(&s, &sp, z, &mut min_base)?;
            vz += wt * flux(&q, &qt, &qp);
        }
    }
    Ok(VolumeReport { vol0: v0 * ht * hp, vol_z: vz * ht * hp, min_base })
}

/// Axis-aligned sampling window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

const SCAN_CELLS: usize = 512;

/// Points on {W = c} found by bracketing along `count` horizontal scan lines.
/// Only roots whose residual |W − c| is below 1e−10·max(1, |c|) are kept.
pub fn orbit_samples(w: &RatFunc, c: f64, window: Window, count: usize) -> Result<Vec<[f64; 2]>> {
    if w.vars().iter().any(|&v| v != Var::X && v != Var::Y) {
        return Err(domain("orbit integral must be in x, y"));
    }
    let f = ClosedForm::Rational(w.clone()).compile(&[Var::X, Var::Y])?;
    let g = |x: f64, y: f64| f.eval(&[x, y]).map(|v| v - c).ok().filter(|v| v.is_finite());
    let tol = 1e-10 * c.abs().max(1.0);
    let mut out = Vec::new();
    for j in 0..count.max(1) {
        let y = window.y.0 + (window.y.1 - window.y.0) * (j as f64 + 0.5) / count.max(1) as f64;
        let xs = |k: usize| window.x.0 + (window.x.1 - window.x.0) * k as f64 / SCAN_CELLS as f64;
        for k in 0..SCAN_CELLS {
            let (mut a, mut b) = (xs(k), xs(k + 1));
            let (Some(mut ga), Some(gb)) = (g(a, y), g(b, y)) else { continue };
            if ga == 0.0 {
                out.push([a, y]);
                continue;
            }
            if ga * gb > 0.0 {
                continue;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                let Some(gm) = g(m, y) else { break };
                if ga * gm <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    ga = gm;
                }
            }
            let root = if g(a, y).is_some_and(|v| v.abs() <= g(b, y).map_or(f64::INFINITY, f64::abs)) { a } else { b };
            if g(root, y).is_some_and(|v| v.abs() < tol) {
                out.push([root, y]);
            }
        }
    }
    if out.is_empty() {
        return Err(domain(format!("level set W = {c} is empty in the window")));
    }
    Ok(out)
}

/// Header then one point per row, 17 significant digits.
pub fn to_csv(points: &[Vec<f64>]) -> String {
    let dim = points.first().map_or(2, Vec::len);
    let names = ["x", "y", "w"];
    let mut s = names[..dim.min(3)].join(",");
    s.push('\n');
    for p in points {
        let row: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

/// Largest |rk4 − closed form| over `starts` random points in [0.05, 0.3]^n.
pub fn rk_cross_check(phi: &FlowMap, v: &VectorField, z: f64, step: f64, starts: usize, seed: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let ev = ShiftEvaluator::new(phi)?;
    let steps = (z / step).round().max(1.0) as usize;
    let mut worst: f64 = 0.0;
    for _ in 0..starts {
        let p: Vec<f64> = (0..phi.dim()).map(|_| rng.gen_range(0.05..0.3)).collect();
        let closed = ev.eval(&p, z)?;
        let rk = rk4_flow(v, &p, z, steps)?;
        for (a, b) in rk.point.iter().zip(&closed) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// max |(φ^z(p) − p)/z − V(p)| for each z; first order in z for a consistent pair.
pub fn difference_quotient_errors(phi: &FlowMap, v: &VectorField, p: &[f64], zs: &[f64]) -> Result<Vec<f64>> {
    let ev = ShiftEvaluator::new(phi)?;
    let target = v.eval_f64(p);
    zs.iter()
        .map(|&z| {
            let q = ev.eval(p, z)?;
            Ok(q.iter().zip(p).zip(&target).map(|((qi, pi), ti)| ((qi - pi) / z - ti).abs()).fold(0.0, f64::max))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_ratfunc;
    use crate::flowcore::{catalog, rational_catalog, vector_field, Catalog};

    fn field(s: &str) -> VectorField {
        VectorField::parse(s).unwrap()
    }

    #[test]
    fn rk_against_closed_forms() {
        let r = rk4_flow(&field("x^2, y^2"), &[0.2, 0.1], 0.5, 500).unwrap();
        assert!((r.point[0] - 0.2 / 0.9).abs() < 1e-8 && (r.point[1] - 0.1 / 0.95).abs() < 1e-8);
        assert_eq!(r.min_base, f64::INFINITY);
        assert_eq!(rk4_flow(&field("0, 0"), &[0.3, 0.4], 1.0, 10).unwrap().point, vec![0.3, 0.4]);
        let phi3 = catalog(&Catalog::PhiN(3)).unwrap();
        let r = rk4_flow(&field("2*x*y, -y^2"), &[0.3, 0.2], 1.0, 1000).unwrap();
        let exact = ShiftEvaluator::new(&phi3).unwrap().eval(&[0.3, 0.2], 1.0).unwrap();
        assert!((r.point[0] - exact[0]).abs() < 1e-8 && (r.point[1] - exact[1]).abs() < 1e-8);
        assert!(rk4_flow(&field("x^3/(x-y), 0"), &[0.2, 0.2], 0.1, 10).is_err());
    }

    #[test]
    fn rk_over_sample_of_catalog() {
        for (name, f) in rational_catalog().into_iter().step_by(7).chain(rational_catalog().into_iter().filter(|(n, _)| n.starts_with("quad"))) {
            let v = vector_field(&f).unwrap();
            let dev = rk_cross_check(&f, &v, 0.25, 1e-3, 5, 0).unwrap();
            assert!(dev < 1e-8, "{name}: {dev}");
        }
    }

    #[test]
    fn area_conserved_by_solenoidal_flow() {
        let phi3 = catalog(&Catalog::PhiN(3)).unwrap();
        let r = area_check(&phi3, &Curve2::unit_circle(), 0.3, 4096).unwrap();
        assert!((r.area0 - PI).abs() < 1e-12);
        assert!((r.area_z - PI).abs() < 1e-6, "{r:?}");
        let id = FlowMap::parse("x, y").unwrap();
        let r = area_check(&id, &Curve2::unit_circle(), 0.3, 256).unwrap();
        assert_eq!(r.area0, r.area_z);
        let ctrl = FlowMap::parse("x/(1-x), y/(1-y)").unwrap();
        let r = area_check(&ctrl, &Curve2::circle([0.0, 0.0], 0.2), 0.5, 4096).unwrap();
        assert!((r.area_z - r.area0).abs() > 1e-3, "{r:?}");
    }

    #[test]
    fn deformed_curve_must_stay_simple() {
        let eight = Curve2::new(|t| [t.sin(), (2.0 * t).sin() / 2.0], |t| [t.cos(), (2.0 * t).cos()]);
        assert!(area_check(&FlowMap::parse("x, y").unwrap(), &eight, 0.1, 512).is_err());
    }

    #[test]
    fn volume_conserved_by_solenoidal_flow() {
        let psi = catalog(&Catalog::PsiNm(2, 2)).unwrap();
        let r = volume_check(&psi, &Surface3::unit_sphere(), 0.25, (256, 256)).unwrap();
        assert!((r.vol0 - 4.0 * PI / 3.0).abs() < 1e-3);
        assert!((r.vol_z - r.vol0).abs() < 1e-4, "{r:?}");
        let id = FlowMap::parse("x, y, w").unwrap();
        let r = volume_check(&id, &Surface3::unit_sphere(), 0.25, (32, 32)).unwrap();
        assert_eq!(r.vol0, r.vol_z);
        let ctrl = catalog(&Catalog::PsiNm(3, 3)).unwrap();
        let r = volume_check(&ctrl, &Surface3::sphere([0.0, 0.0, 0.5], 0.3), 0.25, (128, 128)).unwrap();
        assert!((r.vol_z - r.vol0).abs() > 1e-4, "{r:?}");
    }

    #[test]
    fn level_sets() {
        let win = Window { x: (0.1, 3.0), y: (0.1, 3.0) };
        let pts = orbit_samples(&parse_ratfunc("x/y").unwrap(), 2.0, win, 20).unwrap();
        assert!(pts.iter().all(|p| (p[0] - 2.0 * p[1]).abs() < 1e-9));
        let pts = orbit_samples(&parse_ratfunc("x*y^2").unwrap(), 1.0, win, 40).unwrap();
        assert!(pts.len() >= 30);
        assert!(pts.iter().all(|p| (p[0] * p[1] * p[1] - 1.0).abs() < 1e-10));
        let win = Window { x: (-1.0, 3.0), y: (-3.0, 1.0) };
        let pts = orbit_samples(&parse_ratfunc("(x^2+y^2)/(x-y)").unwrap(), 2.0, win, 50).unwrap();
        assert!(pts.len() >= 50);
        assert!(pts.iter().all(|p| ((p[0] - 1.0).powi(2) + (p[1] + 1.0).powi(2) - 2.0).abs() < 1e-9));
        assert!(orbit_samples(&parse_ratfunc("x*y").unwrap(), -1.0, Window { x: (0.1, 1.0), y: (0.1, 1.0) }, 10).is_err());
    }

    #[test]
    fn csv_format() {
        let s = to_csv(&[vec![0.1, 2.0]]);
        assert_eq!(s, "x,y\n1.0000000000000001e-1,2.0000000000000000e0\n");
        let back: Vec<f64> = s.lines().nth(1).unwrap().split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(back, vec![0.1, 2.0]);
        assert!(to_csv(&[vec![1.0, 2.0, 3.0]]).starts_with("x,y,w\n"));
    }

    #[test]
    fn difference_quotient_is_first_order() {
        let phi3 = catalog(&Catalog::PhiN(3)).unwrap();
        let v = vector_field(&phi3).unwrap();
        let e = difference_quotient_errors(&phi3, &v, &[0.3, 0.2], &[1e-2, 1e-3, 1e-4]).unwrap();
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            assert!((8.0..12.0).contains(&ratio), "{e:?}");
        }
    }

    #[test]
    fn algebraic_flow_records_branch_certificate() {
        let f = FlowMap::parse("(x^3+y^4)^(1/3)/(y+1)^(4/3), y/(y+1)").unwrap();
        let r = area_check(&f, &Curve2::circle([0.3, 0.3], 0.1), 0.1, 256).unwrap();
        assert!(r.min_base.is_finite() && r.min_base > 0.0);
    }
}
