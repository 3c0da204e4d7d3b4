//! Command-line front end: parses flows, fields and integrals, dispatches to the
//! library and renders JSON reports (and CSV point data with `--out`).
//!
//! Exit codes: 0 success, 1 a verification ran and failed, 2 parse or domain error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use projflow::algebra::{parse_ratfunc, split_tuple, RatFunc, Var};
use projflow::classify::{classify_field, classify_flow, linear_witness, solenoidal_search, target_field};
use projflow::conjugation::{conjugate_flow, conjugate_vf, conjugate_vf_linear, BirMap1H, Conjugator, LinMap};
use projflow::extrude::{extrude_flow, Extruded, Integral3};
use projflow::flowcore::{catalog, catalog_list, vector_field, verify_translation, Catalog, FlowMap, VectorField, VerifyMode};
use projflow::numeric::{area_check, orbit_samples, rk4_flow, rk_cross_check, to_csv, Curve2, Surface3, Window};
use projflow::odeorbit::{
    flow_from_integral_univariate, fundamental_ode, orbit_integral_from_q, solve_ode_radical, verify_orbit, vf_from_ode_data,
    IntegralFlow, OrbitIntegral, Rhs, SecondSlot,
};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] projflow::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Config(#[from] serde_json::Error),
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "projflow", version, about = "Construct, verify and classify projective plane flows")]
struct Cli {
    /// JSON file with named expressions: {"defs": {"name": "expr", ...}}; refer to them as @name
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized check
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Exact,
    Series,
    Numeric,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Check the translation equation
    Verify {
        #[arg(long, allow_hyphen_values = true)]
        flow: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Vector field of a flow
    Vf {
        #[arg(long, allow_hyphen_values = true)]
        flow: String,
    },
    /// Conjugate a flow or field by a 1-BIR (P,Q) or a linear map
    Conj {
        #[arg(long, allow_hyphen_values = true, conflicts_with = "vf", required_unless_present = "vf")]
        flow: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        vf: Option<String>,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "linear", required_unless_present = "linear")]
        bir: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        linear: Option<String>,
    },
    /// Solve the fundamental ODE for a radical solution
    Ode {
        #[arg(long, allow_hyphen_values = true)]
        vf: String,
        #[arg(long, default_value = "+1", allow_hyphen_values = true)]
        rhs: String,
        #[arg(long)]
        max_deg: Option<i64>,
    },
    /// Orbit integral of a field, or W = y^N/q(x/y)
    Orbit {
        #[arg(long, allow_hyphen_values = true, conflicts_with = "q", required_unless_present = "q")]
        vf: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "n")]
        q: Option<String>,
        #[arg(long = "N")]
        n: Option<u32>,
    },
    /// Build a field (and flow) from a homogeneous integral
    Construct {
        #[arg(long, allow_hyphen_values = true)]
        integral: String,
        /// Second slot y/(y+1); solve W(U, y/(y+1)) = W(x, y) for U
        #[arg(long)]
        univariate: bool,
        /// Use +y² instead of −y² as second component
        #[arg(long, requires = "univariate")]
        pos_square: bool,
        /// Particular solution r of the fundamental ODE, for the non-univariate route
        #[arg(long, allow_hyphen_values = true, conflicts_with = "univariate")]
        r: Option<String>,
    },
    /// Add a coordinate to a flow using a homogeneous integral
    Extrude {
        #[arg(long, allow_hyphen_values = true)]
        flow: String,
        #[arg(long, allow_hyphen_values = true)]
        integral: String,
    },
    /// Level, solenoidality and symmetry report
    Classify {
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["flow", "search"], required_unless_present_any = ["flow", "search"])]
        vf: Option<String>,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "search")]
        flow: Option<String>,
        /// Run the solenoidal normal-form search up to this level
        #[arg(long)]
        search: Option<u32>,
    },
    /// Floating-point checks
    Numcheck {
        #[command(subcommand)]
        check: NumCheck,
    },
    /// List catalog families, or build one: catalog NAME --params k=v ...
    Catalog {
        name: Option<String>,
        #[arg(long, num_args = 1..)]
        params: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
enum NumCheck {
    /// Green's-formula area before and after the time-z map
    Area {
        #[arg(long, allow_hyphen_values = true)]
        flow: String,
        #[arg(long, default_value_t = 0.3)]
        z: f64,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        center: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Gauss-formula volume before and after the time-z map
    Volume {
        #[arg(long, allow_hyphen_values = true)]
        flow: String,
        #[arg(long, default_value_t = 0.25)]
        z: f64,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value = "0,0,0", allow_hyphen_values = true)]
        center: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// RK4 integration of a field, or a cross-check of a flow against RK4
    Rk(RkArgs),
    /// Points on a level set W = c, as CSV
    Samples {
        #[arg(long, allow_hyphen_values = true)]
        integral: String,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, default_value = "0.1,3,0.1,3", allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RkArgs {
    #[arg(long, allow_hyphen_values = true, conflicts_with = "flow", required_unless_present = "flow")]
    vf: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    flow: Option<String>,
    #[arg(long, default_value_t = 0.25)]
    z: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 50)]
    starts: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

/// Exit code and stdout payload of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

struct Report {
    body: Value,
    pass: bool,
}

impl Report {
    fn ok(body: Value) -> Self {
        Report { body, pass: true }
    }
}

struct Ctx {
    defs: BTreeMap<String, String>,
    seed: u64,
}

impl Ctx {
    fn expr<'a>(&'a self, raw: &'a str) -> Result<&'a str> {
        match raw.strip_prefix('@') {
            Some(name) => self.defs.get(name).map(String::as_str).ok_or_else(|| usage(format!("@{name} is not defined in the config"))),
            None => Ok(raw),
        }
    }

    fn flow(&self, raw: &str) -> Result<FlowMap> {
        Ok(FlowMap::parse(self.expr(raw)?)?)
    }

    fn field(&self, raw: &str) -> Result<VectorField> {
        Ok(VectorField::parse(self.expr(raw)?)?)
    }

    fn ratfunc(&self, raw: &str) -> Result<RatFunc> {
        Ok(parse_ratfunc(self.expr(raw)?)?)
    }
}

fn load_defs(path: &Option<PathBuf>) -> Result<BTreeMap<String, String>> {
    let Some(path) = path else { return Ok(BTreeMap::new()) };
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let defs = v.get("defs").and_then(Value::as_object).ok_or_else(|| usage("config needs a \"defs\" object"))?;
    defs.iter()
        .map(|(k, v)| v.as_str().map(|s| (k.clone(), s.to_string())).ok_or_else(|| usage(format!("def `{k}` must be a string"))))
        .collect()
}

fn strings<T: ToString>(items: &[T]) -> Value {
    Value::from(items.iter().map(ToString::to_string).collect::<Vec<_>>())
}

fn floats(text: &str, n: usize, what: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("{what}: `{s}` is not a number"))))
        .collect::<Result<_>>()?;
    if v.len() != n {
        return Err(usage(format!("{what} needs {n} comma-separated numbers")));
    }
    Ok(v)
}

fn verify(ctx: &Ctx, flow: &str, mode: Mode, order: usize, tol: f64, samples: usize) -> Result<Report> {
    let phi = ctx.flow(flow)?;
    let mode = match mode {
        Mode::Exact => VerifyMode::Exact,
        Mode::Series => VerifyMode::Series(order),
        Mode::Numeric => VerifyMode::Numeric { tol, samples, seed: ctx.seed },
    };
    let report = verify_translation(&phi, mode)?;
    let pass = report.pass;
    Ok(Report { body: serde_json::to_value(report)?, pass })
}

fn conj(ctx: &Ctx, flow: Option<&str>, vf: Option<&str>, bir: Option<&str>, linear: Option<&str>) -> Result<Report> {
    let bir = bir
        .map(|b| match split_tuple(ctx.expr(b)?)[..] {
            [p, q] => Ok(BirMap1H::parse(p, q)?),
            _ => Err(usage("--bir takes P,Q")),
        })
        .transpose()?;
    let lin = linear.map(|l| -> Result<LinMap> { Ok(LinMap::parse(ctx.expr(l)?)?) }).transpose()?;
    if let Some(f) = flow {
        let phi = ctx.flow(f)?;
        let m = match (bir, lin) {
            (Some(b), _) => Conjugator::Bir(b),
            (_, Some(l)) => Conjugator::Linear(l),
            _ => return Err(usage("give --bir or --linear")),
        };
        let out = conjugate_flow(&phi, &m)?;
        return Ok(Report::ok(json!({ "flow": strings(out.components()) })));
    }
    let v = ctx.field(vf.ok_or_else(|| usage("give --flow or --vf"))?)?;
    let out = match (bir, lin) {
        (Some(b), _) => conjugate_vf(&v, &b)?,
        (_, Some(l)) => conjugate_vf_linear(&v, &l)?,
        _ => return Err(usage("give --bir or --linear")),
    };
    Ok(Report::ok(json!({ "vf": strings(out.components()) })))
}

fn parse_rhs(raw: &str) -> Result<Rhs> {
    let s: i64 = raw.trim().trim_start_matches('+').parse().map_err(|_| usage("--rhs takes +1 or -1"))?;
    Ok(Rhs::from_sign(s)?)
}

fn ode(ctx: &Ctx, vf: &str, rhs: &str, max_deg: Option<i64>) -> Result<Report> {
    let v = ctx.field(vf)?;
    let ode = fundamental_ode(&v, parse_rhs(rhs)?)?;
    let bound = max_deg.unwrap_or_else(|| projflow::odeorbit::default_max_deg(&ode));
    let outcome = solve_ode_radical(&ode, bound)?;
    let mut body = json!({
        "A": ode.a.to_string(),
        "B": ode.b.to_string(),
        "rhs": ode.rhs.sign(),
        "max_deg": bound,
        "verdict": outcome.verdict(),
    });
    if let Some(s) = outcome.solution() {
        body["r"] = s.r.to_string().into();
        body["q"] = s.q.to_string().into();
        body["N"] = s.n.into();
        body["residuals_hold"] = s.check(&ode).into();
    }
    Ok(Report::ok(body))
}

fn orbit(ctx: &Ctx, vf: Option<&str>, q: Option<&str>, n: Option<u32>) -> Result<Report> {
    if let Some(q) = q {
        let n = n.ok_or_else(|| usage("--q needs --N"))?;
        let w = orbit_integral_from_q(&ctx.ratfunc(q)?, n)?;
        return Ok(Report::ok(json!({ "W": w.to_string(), "degree": w.degree })));
    }
    let v = ctx.field(vf.ok_or_else(|| usage("give --vf or --q"))?)?;
    let ode = fundamental_ode(&v, Rhs::Plus)?;
    let outcome = solve_ode_radical(&ode, projflow::odeorbit::default_max_deg(&ode))?;
    let Some(s) = outcome.solution() else {
        return Ok(Report::ok(json!({ "verdict": outcome.verdict(), "W": Value::Null })));
    };
    let w = orbit_integral_from_q(&s.q, s.n)?;
    let verified = verify_orbit(&w, &v);
    Ok(Report { body: json!({ "verdict": outcome.verdict(), "W": w.to_string(), "degree": w.degree, "verified": verified }), pass: verified })
}

fn construct(ctx: &Ctx, integral: &str, univariate: bool, pos_square: bool, r: Option<&str>) -> Result<Report> {
    let w = OrbitIntegral::new(ctx.ratfunc(integral)?)?;
    if univariate {
        let slot = if pos_square { SecondSlot::PosSquare } else { SecondSlot::NegSquare };
        let (flow, field) = flow_from_integral_univariate(&w, slot)?;
        let mut body = json!({ "vf": strings(field.components()), "W": w.to_string(), "degree": w.degree });
        match flow {
            IntegralFlow::Rational(f) => body["flow"] = strings(f.components()),
            IntegralFlow::Algebraic(eq) => {
                body["equation"] = eq.to_string().into();
                body["equation_degree"] = eq.degree().into();
            }
        }
        return Ok(Report::ok(body));
    }
    let r = ctx.ratfunc(r.ok_or_else(|| usage("give --univariate, or --r with the particular solution"))?)?;
    let n = u32::try_from(w.degree).map_err(|_| usage("the ODE route needs a positive integer degree"))?;
    let at_one: BTreeMap<Var, RatFunc> = [(Var::Y, RatFunc::one())].into_iter().collect();
    let q = w.w.substitute(&at_one)?.recip()?;
    let field = vf_from_ode_data(&r, &q, n)?;
    let verified = verify_orbit(&w, &field);
    Ok(Report { body: json!({ "vf": strings(field.components()), "q": q.to_string(), "N": n, "orbit_verified": verified }), pass: verified })
}

fn extrude(ctx: &Ctx, flow: &str, integral: &str) -> Result<Report> {
    let phi = ctx.flow(flow)?;
    let w = Integral3::new(ctx.ratfunc(integral)?)?;
    match extrude_flow(&phi, &w)? {
        Extruded::Rational(f) => {
            let report = verify_translation(&f, VerifyMode::Exact)?;
            let pass = report.pass;
            Ok(Report { body: json!({ "flow": strings(f.components()), "integral": { "W": w.to_string(), "N": w.degree }, "verification": report }), pass })
        }
        Extruded::Algebraic(eq) => Ok(Report::ok(json!({
            "equation": eq.to_string(),
            "equation_degree": eq.degree(),
            "integral": { "W": w.to_string(), "N": w.degree },
        }))),
    }
}

fn classify(ctx: &Ctx, vf: Option<&str>, flow: Option<&str>, search: Option<u32>) -> Result<Report> {
    if let Some(n_max) = search {
        let hits = solenoidal_search(n_max)?;
        let mut pass = true;
        let rows: Vec<Value> = hits
            .iter()
            .map(|h| {
                let checked = h.witness.as_ref().zip(target_field(h.level)).is_some_and(|(w, (_, t))| {
                    conjugate_vf_linear(&h.field, w).is_ok_and(|c| c == t) && linear_witness(&h.field, &t).is_some()
                });
                pass &= checked && h.solenoidal;
                json!({
                    "N": h.level,
                    "branch": h.branch,
                    "quad": { "U": h.quad.u.to_string(), "V": h.quad.v.to_string(), "W0": h.quad.w0.to_string() },
                    "A": h.conjugator.ratio().to_string(),
                    "vf": strings(h.field.components()),
                    "solenoidal": h.solenoidal,
                    "target": h.target,
                    "witness": h.witness.as_ref().map(|w| w.matrix().iter().map(|r| strings(r)).collect::<Vec<_>>()),
                    "witness_checked": checked,
                })
            })
            .collect();
        return Ok(Report { body: json!({ "hits": rows }), pass });
    }
    let report = match (vf, flow) {
        (Some(v), _) => classify_field(&ctx.field(v)?)?,
        (_, Some(f)) => classify_flow(&ctx.flow(f)?)?,
        _ => return Err(usage("give --vf, --flow or --search")),
    };
    Ok(Report::ok(serde_json::to_value(report)?))
}

fn numcheck(ctx: &Ctx, check: &NumCheck) -> Result<Report> {
    match check {
        NumCheck::Area { flow, z, samples, center, radius, tol } => {
            let c = floats(center, 2, "--center")?;
            let r = area_check(&ctx.flow(flow)?, &Curve2::circle([c[0], c[1]], *radius), *z, *samples)?;
            let diff = r.area_z - r.area0;
            let pass = diff.abs() < *tol;
            Ok(Report { body: json!({ "area0": r.area0, "area_z": r.area_z, "difference": diff, "min_base": finite(r.min_base), "conserved": pass }), pass })
        }
        NumCheck::Volume { flow, z, grid, center, radius, tol } => {
            let c = floats(center, 3, "--center")?;
            let r = projflow::numeric::volume_check(&ctx.flow(flow)?, &Surface3::sphere([c[0], c[1], c[2]], *radius), *z, (*grid, *grid))?;
            let diff = r.vol_z - r.vol0;
            let pass = diff.abs() < *tol;
            Ok(Report { body: json!({ "vol0": r.vol0, "vol_z": r.vol_z, "difference": diff, "min_base": finite(r.min_base), "conserved": pass }), pass })
        }
        NumCheck::Rk(a) => {
            if let Some(f) = &a.flow {
                let phi = ctx.flow(f)?;
                let v = vector_field(&phi)?;
                let dev = rk_cross_check(&phi, &v, a.z, a.step, a.starts, ctx.seed)?;
                let pass = dev < a.tol;
                return Ok(Report { body: json!({ "max_deviation": dev, "starts": a.starts, "seed": ctx.seed, "pass": pass }), pass });
            }
            let v = ctx.field(a.vf.as_deref().ok_or_else(|| usage("give --vf or --flow"))?)?;
            let x0 = floats(a.x0.as_deref().ok_or_else(|| usage("--vf needs --x0"))?, v.dim(), "--x0")?;
            let steps = (a.z / a.step).abs().round().max(1.0) as usize;
            let r = rk4_flow(&v, &x0, a.z, steps)?;
            Ok(Report::ok(json!({ "point": r.point, "steps": steps, "min_base": finite(r.min_base) })))
        }
        NumCheck::Samples { integral, c, window, count, out } => {
            let b = floats(window, 4, "--window")?;
            let pts = orbit_samples(&ctx.ratfunc(integral)?, *c, Window { x: (b[0], b[1]), y: (b[2], b[3]) }, *count)?;
            let rows: Vec<Vec<f64>> = pts.iter().map(|p| p.to_vec()).collect();
            match out {
                Some(path) => {
                    std::fs::write(path, to_csv(&rows))?;
                    Ok(Report::ok(json!({ "count": rows.len(), "out": path.display().to_string() })))
                }
                None => Ok(Report::ok(json!({ "count": rows.len(), "points": rows }))),
            }
        }
    }
}

fn finite(v: f64) -> Value {
    if v.is_finite() {
        v.into()
    } else {
        Value::Null
    }
}

fn catalog_verb(name: Option<&str>, params: &[String]) -> Result<Report> {
    let Some(name) = name else {
        return Ok(Report::ok(json!({ "catalog": catalog_list() })));
    };
    let params: BTreeMap<String, String> = params
        .iter()
        .map(|kv| kv.split_once('=').map(|(k, v)| (k.trim().to_string(), v.trim().to_string())).ok_or_else(|| usage(format!("parameter `{kv}` is not k=v"))))
        .collect::<Result<_>>()?;
    let f = catalog(&Catalog::from_name(name, &params)?)?;
    Ok(Report::ok(json!({ "name": name, "vars": strings(f.vars()), "flow": strings(f.components()) })))
}

fn dispatch(cli: Cli) -> Result<Report> {
    let ctx = Ctx { defs: load_defs(&cli.config)?, seed: cli.seed };
    match &cli.verb {
        Verb::Verify { flow, mode, order, tol, samples } => verify(&ctx, flow, *mode, *order, *tol, *samples),
        Verb::Vf { flow } => {
            let v = vector_field(&ctx.flow(flow)?)?;
            Ok(Report::ok(json!({ "vf": strings(v.components()) })))
        }
        Verb::Conj { flow, vf, bir, linear } => conj(&ctx, flow.as_deref(), vf.as_deref(), bir.as_deref(), linear.as_deref()),
        Verb::Ode { vf, rhs, max_deg } => ode(&ctx, vf, rhs, *max_deg),
        Verb::Orbit { vf, q, n } => orbit(&ctx, vf.as_deref(), q.as_deref(), *n),
        Verb::Construct { integral, univariate, pos_square, r } => construct(&ctx, integral, *univariate, *pos_square, r.as_deref()),
        Verb::Extrude { flow, integral } => extrude(&ctx, flow, integral),
        Verb::Classify { vf, flow, search } => classify(&ctx, vf.as_deref(), flow.as_deref(), *search),
        Verb::Numcheck { check } => numcheck(&ctx, check),
        Verb::Catalog { name, params } => catalog_verb(name.as_deref(), params),
    }
}

/// Runs one command line (program name first) and returns its exit code and stdout.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            return Outcome { code: 0, stdout: e.to_string() };
        }
        Err(e) => return error_outcome(e.render().to_string().trim()),
    };
    match dispatch(cli) {
        Ok(r) => Outcome { code: if r.pass { 0 } else { 1 }, stdout: format!("{}\n", r.body) },
        Err(e) => error_outcome(&e.to_string()),
    }
}

fn error_outcome(msg: &str) -> Outcome {
    Outcome { code: 2, stdout: format!("{}\n", json!({ "error": msg })) }
}
