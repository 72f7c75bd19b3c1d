use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use vtd::analysis::{run_convergence_study, StudyConfig};
use vtd::collocation::{march_collocation, CollocationConfig};
use vtd::postprocess::{cascade_interpolant, multi_postprocess, PostprocessMode, PostprocessVariant};
use vtd::problem::{builtin, OdeProblem, ProblemConfig};
use vtd::quadrature::{build_rule, default_exactness_tolerance, verify_exactness};
use vtd::solution::{uniform_mesh, MeshSolution};
use vtd::solver::{Integrator, VtdConfig, VtdMethod};
use vtd::{Error, NewtonSettings, Real, Result};

use crate::args::{Cli, Command, ConvergenceArgs, Format, MethodArgs, Precision, ProblemArgs, QuadratureArgs, SolveArgs, SolveMethod};

pub fn run(cli: &Cli) -> Result<String> {
    match cli.precision {
        Precision::Double => run_with::<f64>(cli, false),
        Precision::Extended => run_extended(cli),
    }
}

#[cfg(feature = "extended")]
fn run_extended(cli: &Cli) -> Result<String> {
    use vtd::numkernel::extended::{set_precision, Ext};
    set_precision(cli.bits)?;
    run_with::<Ext>(cli, true)
}

#[cfg(not(feature = "extended"))]
fn run_extended(_: &Cli) -> Result<String> {
    Err(Error::Config(
        "extended precision is not compiled in; rebuild with --features extended".into(),
    ))
}

fn run_with<R: Real>(cli: &Cli, extended: bool) -> Result<String> {
    match &cli.command {
        Command::Quadrature(a) => quadrature::<R>(a, extended),
        Command::Solve(a) => solve::<R>(a, extended),
        Command::Convergence(a) => convergence::<R>(a),
    }
}

/// Scalars as JSON numbers in double precision, as decimal strings otherwise.
fn num<R: Real>(x: &R, extended: bool) -> Value {
    if extended {
        Value::String(x.to_string())
    } else {
        json!(x.to_f64())
    }
}

fn nums<R: Real>(xs: &[R], extended: bool) -> Value {
    Value::Array(xs.iter().map(|x| num(x, extended)).collect())
}

fn order_pair(r: i64, k: i64) -> Result<(usize, usize)> {
    if r < 0 || k < 0 {
        return Err(Error::Config(format!("r and k must be non-negative, got r={r}, k={k}")));
    }
    Ok((r as usize, k as usize))
}

fn quadrature<R: Real>(a: &QuadratureArgs, extended: bool) -> Result<String> {
    let (r, k) = order_pair(a.r, a.k)?;
    if k > r {
        return Err(Error::Config(format!("Q^{{r,k}} needs k <= r, got r={r}, k={k}")));
    }
    let q = build_rule::<R>(r, k)?;
    let report = verify_exactness(&q, default_exactness_tolerance::<R>());
    let rule = &q.rule;
    let (minus, plus) = (-R::one(), R::one());
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    if let Some(w) = rule.left_weights.first() {
        nodes.push(minus.clone());
        weights.push(w.clone());
    }
    nodes.extend(rule.interior_nodes.iter().cloned());
    weights.extend(rule.interior_weights.iter().cloned());
    if let Some(w) = rule.right_weights.first() {
        nodes.push(plus.clone());
        weights.push(w.clone());
    }
    if a.json {
        let out = json!({
            "r": r,
            "k": k,
            "exactness_degree": q.exactness_degree(),
            "nodes": nums(&nodes, extended),
            "weights": nums(&weights, extended),
            "left_derivative_weights": nums(&rule.left_weights, extended),
            "interior_nodes": nums(&rule.interior_nodes, extended),
            "interior_weights": nums(&rule.interior_weights, extended),
            "right_derivative_weights": nums(&rule.right_weights, extended),
            "report": report,
        });
        return Ok(format!("{}\n", serde_json::to_string_pretty(&out).expect("plain JSON")));
    }
    let mut out = String::new();
    if a.csv {
        out.push_str("kind,order,node,weight\n");
        for (i, w) in rule.left_weights.iter().enumerate() {
            let _ = writeln!(out, "left,{i},{minus},{w}");
        }
        for (x, w) in rule.interior_nodes.iter().zip(&rule.interior_weights) {
            let _ = writeln!(out, "interior,0,{x},{w}");
        }
        for (i, w) in rule.right_weights.iter().enumerate() {
            let _ = writeln!(out, "right,{i},{plus},{w}");
        }
        return Ok(out);
    }
    let _ = writeln!(out, "Q^{{{r},{k}}} on [-1, 1], exact for degree <= {}", q.exactness_degree());
    let _ = writeln!(out, "derivative weights multiply (tau/2)^i f^(i) at the endpoint");
    for (i, w) in rule.left_weights.iter().enumerate() {
        let _ = writeln!(out, "  left   d^{i}  x = -1  w = {w}");
    }
    for (x, w) in rule.interior_nodes.iter().zip(&rule.interior_weights) {
        let _ = writeln!(out, "  inner        x = {x}  w = {w}");
    }
    for (i, w) in rule.right_weights.iter().enumerate() {
        let _ = writeln!(out, "  right  d^{i}  x = 1  w = {w}");
    }
    let _ = writeln!(
        out,
        "max moment error {:.3e} (tolerance {:.1e}), error at degree {}: {:.3e}, sign pattern {}",
        report.max_error,
        report.tolerance,
        report.exactness_degree + 1,
        report.first_excess_error,
        if report.sign_violations.is_empty() { "ok" } else { "violated" }
    );
    Ok(out)
}

fn load_problem<R: Real>(a: &ProblemArgs) -> Result<OdeProblem<R>> {
    let problem = match (&a.problem, &a.config) {
        (Some(name), None) => builtin::<R>(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let cfg: ProblemConfig = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.build::<R>()?
        }
        _ => return Err(Error::Config("give either --problem or --config".into())),
    };
    match a.t_end {
        Some(t) => problem.with_end_time(R::from_f64(t)),
        None => Ok(problem),
    }
}

/// Checked method parameters.
struct Method {
    r: usize,
    k: usize,
    integrator: Integrator,
    postprocess: Option<PostprocessMode>,
    cascade: Option<usize>,
    settings: NewtonSettings,
}

fn method(a: &MethodArgs) -> Result<Method> {
    let (r, k) = order_pair(a.r, a.k)?;
    if k > r + 1 {
        return Err(Error::Config(format!("VTD(r,k) needs k <= r+1, got r={r}, k={k}")));
    }
    let integrator: Integrator = a.integrator.parse()?;
    let postprocess = match &a.postprocess {
        None => None,
        Some(v) => {
            let variant: PostprocessVariant = v.parse()?;
            let steps = a.pp_steps.unwrap_or(1);
            if k > r || steps == 0 || steps > r + 1 - k {
                return Err(Error::Config(format!(
                    "postprocessing allows 1..={} steps for r={r}, k={k}, got {steps}",
                    (r + 1).saturating_sub(k)
                )));
            }
            Some(PostprocessMode::new(variant, steps))
        }
    };
    if let Some(l) = a.cascade {
        if k > r || l == 0 || l > r - k {
            return Err(Error::Config(format!(
                "the cascade depth must satisfy 1 <= l <= r-k = {}, got {l}",
                r.saturating_sub(k)
            )));
        }
    }
    if matches!(a.tol, Some(t) if !(t > 0.0)) {
        return Err(Error::Config("--tol must be positive".into()));
    }
    Ok(Method {
        r,
        k,
        integrator,
        postprocess,
        cascade: a.cascade,
        settings: NewtonSettings {
            abs_tol: a.tol,
            max_iter: a.max_iter,
            ..NewtonSettings::default()
        },
    })
}

fn emit(out: Option<&Path>, text: String) -> Result<String> {
    match out {
        None => Ok(text),
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
            Ok(String::new())
        }
    }
}

fn solve<R: Real>(a: &SolveArgs, extended: bool) -> Result<String> {
    let m = method(&a.method_args)?;
    if a.samples < 2 {
        return Err(Error::Config("--samples must be at least 2".into()));
    }
    let problem = load_problem::<R>(&a.problem)?;
    let mesh: Vec<R> = match (&a.mesh, a.steps) {
        (Some(points), _) => points.iter().map(|t| R::from_f64(*t)).collect(),
        (None, Some(n)) => uniform_mesh(problem.t0(), problem.t_end(), n)?,
        (None, None) => return Err(Error::Config("give --steps or --mesh".into())),
    };
    if m.cascade.is_some() && !problem.is_affine() {
        return Err(Error::Config("the interpolation cascade needs an affine-linear problem".into()));
    }
    let sol = match a.method {
        SolveMethod::Collocation => {
            if m.postprocess.is_some() || m.cascade.is_some() || m.integrator != Integrator::Associated {
                return Err(Error::Config(
                    "--method collocation takes no --integrator, --postprocess or --cascade".into(),
                ));
            }
            if m.k > m.r {
                return Err(Error::Config(format!("collocation needs k <= r, got r={}, k={}", m.r, m.k)));
            }
            march_collocation(CollocationConfig::new(m.r, m.k), &problem, &mesh, &m.settings)?
        }
        SolveMethod::Vtd => {
            let mut cfg = VtdConfig::new(m.r, m.k).with_integrator(m.integrator);
            if let (Some(depth), Some(aff)) = (m.cascade, problem.affine_part()) {
                cfg = cfg.with_forcing(cascade_interpolant(aff.f.as_ref(), m.r, m.k, depth, &mesh)?);
            }
            let sol = VtdMethod::new(&cfg)?.march(&problem, &mesh, &m.settings)?;
            match m.postprocess {
                None => sol,
                Some(mode) => multi_postprocess(&sol, &problem, m.r, m.k, mode)?
                    .pop()
                    .expect("at least one step"),
            }
        }
    };
    let text = match a.format {
        Format::Csv => trajectory_csv(&sol, a.samples, a.derivative)?,
        Format::Json => trajectory_json(&problem, &sol, a, extended)?,
    };
    emit(a.out.as_deref(), text)
}

fn derivative_of<R: Real>(sol: &MeshSolution<R>) -> Result<MeshSolution<R>> {
    sol.derivative(sol.right_limit(0, 1))
}

fn trajectory_csv<R: Real>(sol: &MeshSolution<R>, samples: usize, with_derivative: bool) -> Result<String> {
    let d = sol.dim();
    let mut out = String::from("t");
    for c in 1..=d {
        let _ = write!(out, ",u{c}");
    }
    if with_derivative {
        for c in 1..=d {
            let _ = write!(out, ",du{c}");
        }
    }
    out.push('\n');
    let values = sol.sample(samples);
    let derivs = if with_derivative { Some(derivative_of(sol)?.sample(samples)) } else { None };
    for (i, (t, u)) in values.iter().enumerate() {
        let _ = write!(out, "{t}");
        for v in u {
            let _ = write!(out, ",{v}");
        }
        if let Some(ds) = &derivs {
            for v in &ds[i].1 {
                let _ = write!(out, ",{v}");
            }
        }
        out.push('\n');
    }
    Ok(out)
}

fn trajectory_json<R: Real>(
    problem: &OdeProblem<R>,
    sol: &MeshSolution<R>,
    a: &SolveArgs,
    extended: bool,
) -> Result<String> {
    let values = sol.sample(a.samples);
    let derivs = if a.derivative { Some(derivative_of(sol)?.sample(a.samples)) } else { None };
    let samples: Vec<Value> = values
        .iter()
        .enumerate()
        .map(|(i, (t, u))| {
            let mut entry = json!({ "t": num(t, extended), "u": nums(u, extended) });
            if let Some(ds) = &derivs {
                entry["du"] = nums(&ds[i].1, extended);
            }
            entry
        })
        .collect();
    let out = json!({
        "problem": problem.name(),
        "method": match a.method { SolveMethod::Vtd => "vtd", SolveMethod::Collocation => "collocation" },
        "r": a.method_args.r,
        "k": a.method_args.k,
        "degree": sol.degree(),
        "intervals": sol.n_intervals(),
        "endpoint": nums(&sol.endpoint_value(), extended),
        "max_jump": sol.max_jump(0).to_f64(),
        "samples": samples,
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&out).expect("plain JSON")))
}

fn convergence<R: Real>(a: &ConvergenceArgs) -> Result<String> {
    let m = method(&a.method_args)?;
    let ns = a
        .n
        .clone()
        .ok_or_else(|| Error::Config("--n is required (comma-separated numbers of intervals)".into()))?;
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::Config("--n needs positive numbers of intervals".into()));
    }
    if a.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let problem = load_problem::<R>(&a.problem)?;
    if problem.exact().is_none() {
        return Err(Error::Config(format!(
            "'{}' has no closed-form solution to measure errors against",
            problem.name()
        )));
    }
    if m.cascade.is_some() && !problem.is_affine() {
        return Err(Error::Config("the interpolation cascade needs an affine-linear problem".into()));
    }
    let cfg = StudyConfig {
        r: m.r,
        k: m.k,
        integrator: m.integrator,
        ns,
        postprocess: m.postprocess,
        cascade: m.cascade,
        settings: m.settings,
        jobs: a.jobs,
    };
    let report = run_convergence_study(&problem, &cfg)?;
    let text = match a.format {
        Format::Csv => report.to_csv(),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&report).expect("plain JSON")),
    };
    emit(a.out.as_deref(), text)
}
