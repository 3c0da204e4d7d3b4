//! Acceptance run: one line per criterion, non-zero exit if any fails.

use projflow::algebra::{parse_ratfunc, Rat, RatFunc, Var};
use projflow::classify::{
    i_symmetric, orthogonal_orbits, shared_orbits, solenoidal_search, symmetric_level0, target_field, transport_symmetry, ell0,
};
use projflow::conjugation::{conjugate_flow, conjugate_vf, conjugate_vf_linear, BirMap1H, Conjugator, TupleMap};
use projflow::extrude::{extrude_flow, level0_ndim, Integral3};
use projflow::flowcore::{catalog, rational_catalog, vector_field, verify_translation, Catalog, FlowMap, QuadMember, VectorField, VerifyMode};
use projflow::numeric::{area_check, rk_cross_check, volume_check, Curve2, Surface3};
use projflow::odeorbit::{
    default_max_deg, flow_from_integral_univariate, fundamental_ode, solve_ode_radical, verify_implicit_at, IntegralFlow, OrbitIntegral, Rhs,
    SecondSlot,
};
use projflow::random;
use rand::Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn rf(s: &str) -> RatFunc {
    parse_ratfunc(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn field(s: &str) -> VectorField {
    VectorField::parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn xyw() -> Vec<Var> {
    vec![Var::X, Var::Y, Var::W]
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn quad_members() -> [QuadMember; 4] {
    [QuadMember::Phi1, QuadMember::Psi1, QuadMember::Psi1Prime, QuadMember::Phi1Prime]
}

fn exact_flows() -> Vec<(String, FlowMap)> {
    let mut out = Vec::new();
    let mut push = |name: String, e: Catalog| out.push((name, catalog(&e).unwrap()));
    for n in 0..=6 {
        push(format!("phi_{n}"), Catalog::PhiN(n));
    }
    for n in 1..=5 {
        push(format!("psi_{n}"), Catalog::PsiN(n));
        push(format!("psi'_{n}"), Catalog::PsiPrimeN(n));
    }
    push("phi_sph_inf".into(), Catalog::PhiSphInf);
    for q in quad_members() {
        push(format!("{q:?}"), Catalog::Quad(q));
    }
    for n in -1..=4 {
        for m in -1..=4 {
            push(format!("psi_{{{n},{m}}}"), Catalog::PsiNm(n, m));
        }
    }
    for a in -2..=3 {
        for b in -2..=3 {
            push(format!("Phi_{{{a},{b}}}"), Catalog::PhiAB(a, b));
        }
    }
    let mut rng = random::rng(0);
    for k in 0..5 {
        let j = random::one_homogeneous(&mut rng, &[Var::X, Var::Y], 3);
        out.push((format!("level0 #{k} J={j}"), level0_ndim(&j, 2).unwrap()));
    }
    out
}

fn c1_exact_verification() -> Check {
    let flows = exact_flows();
    let mut slowest = Duration::ZERO;
    for (name, phi) in &flows {
        let t = Instant::now();
        let r = verify_translation(phi, VerifyMode::Exact).map_err(|e| format!("{name}: {e}"))?;
        let dt = t.elapsed();
        slowest = slowest.max(dt);
        ensure(r.pass, || format!("{name}: {:?}", r.first_discrepancy))?;
        ensure(dt < Duration::from_secs(2), || format!("{name} took {dt:?}"))?;
    }
    Ok(format!("{} flows, slowest {slowest:.2?}", flows.len()))
}

fn c2_vector_fields() -> Check {
    let cases = [
        (catalog(&Catalog::PhiN(3)).unwrap(), field("2*x*y, -y^2")),
        (FlowMap::parse("x/(1-x), y/(1-y)").unwrap(), field("x^2, y^2")),
        (catalog(&Catalog::PhiSphInf).unwrap(), field("(x-y)^2, (x-y)^2")),
    ];
    let mut count = 0;
    for (phi, want) in cases {
        let got = vector_field(&phi).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("{phi}: got {got}, want {want}"))?;
        count += 1;
    }
    for n in -1..=4 {
        for m in -1..=4 {
            let got = vector_field(&catalog(&Catalog::PsiNm(n, m)).unwrap()).map_err(|e| e.to_string())?;
            let want = VectorField::parse_with(&format!("({})*x*w, ({})*y*w, -w^2", n - 1, m - 1), &xyw()).unwrap();
            ensure(got == want, || format!("psi_{{{n},{m}}}: got {got}, want {want}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} fields equal"))
}

fn c3_cross_product() -> Check {
    let mut rng = random::rng(0);
    let (x, y) = (RatFunc::var(Var::X), RatFunc::var(Var::Y));
    let cross = |v: &VectorField| {
        let (p, r) = v.pair().unwrap();
        &(&x * r) - &(&y * p)
    };
    for k in 0..30 {
        let v = random::field(&mut rng, 3);
        let l = random::bir(&mut rng, 3);
        let w = conjugate_vf(&v, &l).map_err(|e| format!("pair {k}: {e}"))?;
        let lhs = cross(&w);
        let rhs = l.ratio() * &cross(&v);
        ensure(lhs == rhs, || format!("pair {k}: V = {v}, A = {}: {lhs} vs {rhs}", l.ratio()))?;
    }
    Ok("30 pairs".into())
}

fn c4_quintic_ode() -> Check {
    let v = field("-x*(3*x^5+x^3*y^2+2*y^5)/(3*(x^2+y^2)^2), -y*(3*y^5+y^3*x^2+2*x^5)/(3*(x^2+y^2)^2)");
    let ode = fundamental_ode(&v, Rhs::Plus).map_err(|e| e.to_string())?;
    let out = solve_ode_radical(&ode, default_max_deg(&ode)).map_err(|e| e.to_string())?;
    let s = out.solution().ok_or_else(|| format!("verdict {}", out.verdict()))?;
    ensure(s.r == rf("-(x^2+1)/x^3"), || format!("r = {}", s.r))?;
    ensure(s.q == rf("(x^5+x^3-x^2-1)/x^3"), || format!("q = {}", s.q))?;
    ensure(s.n == 1, || format!("N = {}", s.n))?;
    // Residuals recomputed here rather than trusting OdeSolution::check.
    let one = RatFunc::constant(Rat::from_integer(1.into()));
    let r_res = &(&(&s.r * &ode.a) + &(&s.r.diff(Var::X) * &ode.b)) - &one;
    let n = RatFunc::int(i64::from(s.n));
    let q_res = &(&(&n * &s.q) * &ode.a) + &(&s.q.diff(Var::X) * &ode.b);
    ensure(r_res.is_zero() && q_res.is_zero(), || format!("residuals {r_res}, {q_res}"))?;
    Ok(format!("r = {}, q = {}, N = 1", s.r, s.q))
}

fn paren(r: &Rat) -> String {
    format!("({r})")
}

fn c5_univariate_closed_forms() -> Check {
    let mut rng = random::rng(0);
    for _ in 0..5 {
        let sigma = random::small_rat(&mut rng);
        let w = OrbitIntegral::new(rf(&format!("x+{}*y", paren(&sigma)))).map_err(|e| e.to_string())?;
        let (flow, _) = flow_from_integral_univariate(&w, SecondSlot::NegSquare).map_err(|e| e.to_string())?;
        let want = FlowMap::planar(rf(&format!("({s}*y^2+x*y+x)/(y+1)", s = paren(&sigma))), rf("y/(y+1)"));
        match flow {
            IntegralFlow::Rational(phi) => ensure(phi == want, || format!("sigma = {sigma}: {phi}"))?,
            IntegralFlow::Algebraic(eq) => return Err(format!("sigma = {sigma}: not rational, {eq}")),
        }
    }
    let mut done = 0;
    while done < 5 {
        let (a, b) = (random::small_rat(&mut rng), random::small_rat(&mut rng));
        if a == b {
            continue;
        }
        let n: u32 = rng.gen_range(1..=4);
        let (pa, pb) = (paren(&a), paren(&b));
        let w = OrbitIntegral::new(rf(&format!("(x*y^{n}+{pa}*y^{})/(x+{pb}*y)", n + 1))).map_err(|e| e.to_string())?;
        let (flow, _) = flow_from_integral_univariate(&w, SecondSlot::NegSquare).map_err(|e| format!("a={a}, b={b}, N={n}: {e}"))?;
        let u = rf(&format!(
            "({pb}*(x+{pa}*y)*(y+1)^{n}-{pa}*(x+{pb}*y))/(-(x+{pa}*y)*(y+1)^{n}+(x+{pb}*y))*y/(y+1)"
        ));
        let want = FlowMap::planar(u, rf("y/(y+1)"));
        match flow {
            IntegralFlow::Rational(phi) => ensure(phi == want, || format!("a={a}, b={b}, N={n}: {phi} vs {want}"))?,
            IntegralFlow::Algebraic(eq) => return Err(format!("a={a}, b={b}, N={n}: not rational, {eq}")),
        }
        done += 1;
    }
    Ok("5 sigma + 5 (a, b, N)".into())
}

fn c6_extrusion() -> Check {
    let w = Integral3::parse("z*(x^2+x*y)").map_err(|e| e.to_string())?;
    let xyz = vec![Var::X, Var::Y, Var::Z];
    let ell = Conjugator::Tuple(TupleMap::parse(xyz.clone(), "x, y, y*z/(x+y)", "x, y, (x+y)*z/y").map_err(|e| e.to_string())?);
    for n in 1..=5 {
        let base = catalog(&Catalog::PhiHatN(n)).unwrap();
        let big = extrude_flow(&base, &w).map_err(|e| e.to_string())?.rational().ok_or("extrusion not rational")?;
        let t = rf(&format!("z*(x+y)*(x+1)^2/(x+(x+1)^{n}*y)"));
        let got = big.rational().map_err(|e| e.to_string())?[2].clone();
        ensure(got == t, || format!("N = {n}: T = {got}"))?;
        let r = verify_translation(&big, VerifyMode::Exact).map_err(|e| e.to_string())?;
        ensure(r.pass, || format!("N = {n}: {:?}", r.first_discrepancy))?;
        let conj = conjugate_flow(&big, &ell).map_err(|e| e.to_string())?;
        let want = FlowMap::parse_with(&format!("x/(x+1), y*(x+1)^({}), z*(x+1)^({})", n - 1, 2 - n), &xyz).unwrap();
        ensure(conj == want, || format!("N = {n}: conjugate {conj}"))?;
    }
    Ok("N = 1..5".into())
}

fn c7_solenoidal_search() -> Check {
    let hits = solenoidal_search(10).map_err(|e| e.to_string())?;
    let mut levels: Vec<u32> = hits.iter().map(|h| h.level).collect();
    levels.dedup();
    ensure(levels == [1, 3], || format!("levels {levels:?}"))?;
    for h in &hits {
        let (_, target) = target_field(h.level).ok_or("no target")?;
        let wit = h.witness.as_ref().ok_or_else(|| format!("N = {}, {}: no witness", h.level, h.branch))?;
        let c = conjugate_vf_linear(&h.field, wit).map_err(|e| e.to_string())?;
        ensure(c == target, || format!("N = {}: witness maps {} to {c}", h.level, h.field))?;
        let m: Vec<Vec<String>> = wit.matrix().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
        println!("    N = {} {:<14} {} -> {} via {m:?}", h.level, h.branch, h.field, h.target);
    }
    Ok(format!("{} hits, levels {levels:?}", hits.len()))
}

fn c8_area() -> Check {
    let phi3 = catalog(&Catalog::PhiN(3)).unwrap();
    let mut worst = 0.0f64;
    for z in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let t = Instant::now();
        let r = area_check(&phi3, &Curve2::unit_circle(), z, 4096).map_err(|e| e.to_string())?;
        let dt = t.elapsed();
        let dev = (r.area_z - PI).abs().max((r.area0 - PI).abs());
        worst = worst.max(dev);
        ensure(dev < 1e-6, || format!("z = {z}: area {}", r.area_z))?;
        ensure(dt < Duration::from_secs(1), || format!("z = {z} took {dt:?}"))?;
    }
    let control = FlowMap::parse("x/(1-x), y/(1-y)").unwrap();
    let r = area_check(&control, &Curve2::circle([0.0, 0.0], 0.2), 0.5, 4096).map_err(|e| e.to_string())?;
    let drift = (r.area_z - r.area0).abs();
    ensure(drift > 1e-3, || format!("control drift only {drift:e}"))?;
    Ok(format!("max |area - pi| = {worst:.1e}, control drift {drift:.3e}"))
}

fn c9_volume() -> Check {
    let psi22 = catalog(&Catalog::PsiNm(2, 2)).unwrap();
    let r = volume_check(&psi22, &Surface3::unit_sphere(), 0.25, (256, 256)).map_err(|e| e.to_string())?;
    let (d, d0) = ((r.vol_z - r.vol0).abs(), (r.vol0 - 4.0 * PI / 3.0).abs());
    ensure(d < 1e-4 && d0 < 1e-3, || format!("V0 = {}, Vz = {}", r.vol0, r.vol_z))?;
    Ok(format!("|Vz - V0| = {d:.1e}, |V0 - 4pi/3| = {d0:.1e}"))
}

fn c10_rk() -> Check {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let flows = rational_catalog();
    for (name, phi) in &flows {
        let v = vector_field(phi).map_err(|e| e.to_string())?;
        match rk_cross_check(phi, &v, 0.25, 1e-3, 50, 0) {
            Ok(d) if d < 1e-8 => worst = worst.max(d),
            Ok(d) => failures.push(format!("{name}: deviation {d:e}")),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    if failures.is_empty() {
        Ok(format!("{} flows, max deviation {worst:.1e}", flows.len()))
    } else {
        Err(format!("{} of {} flows: {}", failures.len(), flows.len(), failures.join("; ")))
    }
}

fn c11_symmetry() -> Check {
    for q in quad_members() {
        let s = i_symmetric(&catalog(&Catalog::Quad(q)).unwrap()).map_err(|e| e.to_string())?;
        ensure(s.pass && s.mode == "exact", || format!("{q:?}: {s:?}"))?;
    }
    for n in 1..=5 {
        let s = i_symmetric(&catalog(&Catalog::PhiN(n)).unwrap()).map_err(|e| e.to_string())?;
        ensure(!s.pass, || format!("phi_{n} reported i-symmetric"))?;
    }
    // r(t) = g(t + 1/t) is invariant under t -> 1/t.
    let mut rng = random::rng(0);
    let mut rs = vec![rf("x+1/x"), rf("1")];
    for _ in 0..4 {
        let g = random::univariate_ratfunc(&mut rng, 2);
        let sub: BTreeMap<Var, RatFunc> = [(Var::X, rf("x+1/x"))].into_iter().collect();
        if let Ok(r) = g.substitute(&sub) {
            rs.push(r);
        }
    }
    for r in &rs {
        let phi = symmetric_level0(r).map_err(|e| format!("r = {r}: {e}"))?;
        let s = i_symmetric(&phi).map_err(|e| e.to_string())?;
        ensure(s.pass && s.mode == "exact", || format!("r = {r}: {s:?}"))?;
    }
    let l0inv = Conjugator::Bir(ell0().inverse());
    let s_nontrivial = BirMap1H::parse("x^2+y^2", "x*y").unwrap();
    let mut transported = 0;
    for n in 1..=5 {
        let big = conjugate_flow(&catalog(&Catalog::PsiN(n)).unwrap(), &l0inv).map_err(|e| e.to_string())?;
        let mut ss = vec![BirMap1H::identity()];
        if n <= 2 {
            ss.push(s_nontrivial.clone());
        }
        for s in &ss {
            let chi = transport_symmetry(&big, s).map_err(|e| format!("N = {n}: {e}"))?;
            let sym = i_symmetric(&chi).map_err(|e| e.to_string())?;
            ensure(sym.pass && sym.mode == "exact", || format!("N = {n}, A = {}: {sym:?}", s.ratio()))?;
            transported += 1;
        }
    }
    Ok(format!("quadruple, phi_1..5, {} level-0 flows, {transported} transports", rs.len()))
}

/// Independent of the cross-product test: divide, then compare.
fn proportional_fields(v1: &VectorField, v2: &VectorField) -> bool {
    let (p1, r1) = v1.pair().unwrap();
    let (p2, r2) = v2.pair().unwrap();
    if p1.is_zero() {
        return p2.is_zero();
    }
    let g = p2.checked_div(p1).unwrap();
    &g * r1 == *r2
}

fn c12_orbits() -> Check {
    let a = field("-4*x*y+3*y^2, (-2*x*y^2+y^3)/x");
    let b = field("-4*x^2+3*x*y, -2*x*y+y^2");
    ensure(shared_orbits(&a, &b).map_err(|e| e.to_string())?, || "the pair does not share orbits".into())?;
    let mut rng = random::rng(0);
    let (mut agree, mut positives) = (0, 0);
    for k in 0..20 {
        let v1 = random::field(&mut rng, 3);
        let v2 = if k % 2 == 0 {
            v1.scale(&random::ratio0(&mut rng, &[Var::X, Var::Y], 2))
        } else {
            random::field(&mut rng, 3)
        };
        if v1.is_zero() || v2.is_zero() {
            continue;
        }
        let shared = shared_orbits(&v1, &v2).map_err(|e| e.to_string())?;
        ensure(shared == proportional_fields(&v1, &v2), || format!("#{k}: {v1} vs {v2}"))?;
        agree += 1;
        positives += usize::from(shared);
    }
    ensure(agree == 20, || format!("only {agree} nonzero constructions"))?;
    let ortho = [
        (field("y^2, 0"), field("0, -y^2")),
        (field("-1/2*x^2+1/2*y^2-x*y, 1/2*x^2-1/2*y^2-x*y"), field("1/2*x^2-1/2*y^2-x*y, 1/2*x^2-1/2*y^2+x*y")),
    ];
    for (u, v) in &ortho {
        ensure(orthogonal_orbits(u, v).map_err(|e| e.to_string())?, || format!("{u} vs {v}"))?;
    }
    Ok(format!("pair true, {agree} random agree ({positives} sharing), {} orthogonal", ortho.len()))
}

fn c13_implicit() -> Check {
    let u = |a: &str, b: &str| format!("{a}^3/({a}^3+{a}^2+{b}^2)+{a}*{b}^2*({a}^3+{a}^2+{b}^2)^(-1/3)*({b}^3+{a}^2+{b}^2)^(-2/3)");
    let phi = FlowMap::parse(&format!("{}, {}", u("x", "y"), u("y", "x"))).map_err(|e| e.to_string())?;
    let f = rf("-(x^2+1)/x^3");
    let w = OrbitIntegral::new(rf("x^3*y^3/(x^5+x^3*y^2-x^2*y^3-y^5)")).map_err(|e| e.to_string())?;
    let mut rng = random::rng(0);
    let pts: Vec<Vec<f64>> = (0..20).map(|_| vec![rng.gen_range(0.1..0.5), rng.gen_range(0.1..0.5)]).collect();
    let r = verify_implicit_at(&phi, &f, Rhs::Plus, &w, &pts, 1e-9).map_err(|e| e.to_string())?;
    ensure(r.pass, || format!("{:?}", r.first_discrepancy))?;
    Ok("20 points in [0.1, 0.5]^2".into())
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("exact translation equation over the catalog", c1_exact_verification),
        ("vector fields of named flows", c2_vector_fields),
        ("conjugation cross-product identity", c3_cross_product),
        ("quintic fundamental ODE", c4_quintic_ode),
        ("univariate-form closed forms", c5_univariate_closed_forms),
        ("extrusion of phi_hat_N", c6_extrusion),
        ("solenoidal normal forms", c7_solenoidal_search),
        ("area conservation", c8_area),
        ("volume conservation", c9_volume),
        ("RK4 against closed forms", c10_rk),
        ("i-symmetry suite", c11_symmetry),
        ("shared and orthogonal orbits", c12_orbits),
        ("implicit system of the algebraic quintic flow", c13_implicit),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let dt = t.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({detail}) [{dt:.1?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{dt:.1?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
