//! Error norms, experimental orders of convergence and convergence studies.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{NewtonSettings, Real};
use crate::polynomial::TimeFunction;
use crate::postprocess::{cascade_interpolant, multi_postprocess, PostprocessMode};
use crate::problem::OdeProblem;
use crate::quadrature::QuadratureRule;
use crate::solution::{uniform_mesh, MeshSolution};
use crate::solver::{Integrator, VtdConfig, VtdMethod};

/// Norms of `u - U` and `u' - U'`: `L^2` over the whole interval and the
/// maximum over the mesh points `t_n^-`, `n >= 1`, of the Euclidean norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l2: f64,
    pub linf_mesh: f64,
    pub l2_deriv: f64,
    pub linf_mesh_deriv: f64,
}

/// Gauss-Legendre points per interval used by [`error_norms`].
pub fn norm_points(degree: usize) -> usize {
    (2 * degree + 4).max(12)
}

pub fn error_norms<R: Real>(sol: &MeshSolution<R>, exact: &dyn TimeFunction<R>) -> Result<ErrorNorms> {
    error_norms_with_points(sol, exact, norm_points(sol.degree()))
}

pub fn error_norms_with_points<R: Real>(
    sol: &MeshSolution<R>,
    exact: &dyn TimeFunction<R>,
    points: usize,
) -> Result<ErrorNorms> {
    let gl = QuadratureRule::<R>::gauss_legendre(points)?;
    let sq = |u: &[R], v: &[R]| {
        u.iter()
            .zip(v)
            .fold(R::zero(), |acc, (x, y)| {
                let d = x.clone() - y.clone();
                acc + d.clone() * d
            })
    };
    let (mut l2, mut l2d) = (R::zero(), R::zero());
    for piece in sol.pieces() {
        let h = piece.half_tau();
        for ((x, w), t) in gl
            .interior_nodes
            .iter()
            .zip(&gl.interior_weights)
            .zip(gl.mapped_nodes(piece.a(), piece.b()))
        {
            let jets = exact.taylor(&t, 1)?;
            let u: Vec<R> = jets.iter().map(|j| j.value()).collect();
            let du: Vec<R> = jets.iter().map(|j| j.derivative(1)).collect();
            let wh = w.clone() * h.clone();
            l2 += wh.clone() * sq(&u, &piece.eval_reference(x, 0));
            l2d += wh * sq(&du, &piece.eval_reference(x, 1));
        }
    }
    let (mut inf, mut infd) = (R::zero(), R::zero());
    for n in 1..=sol.n_intervals() {
        let jets = exact.taylor(&sol.mesh()[n], 1)?;
        let u: Vec<R> = jets.iter().map(|j| j.value()).collect();
        let du: Vec<R> = jets.iter().map(|j| j.derivative(1)).collect();
        inf = R::max_of(inf, sq(&u, &sol.left_limit(n, 0)).sqrt());
        infd = R::max_of(infd, sq(&du, &sol.left_limit(n, 1)).sqrt());
    }
    Ok(ErrorNorms {
        l2: l2.sqrt().to_f64(),
        linf_mesh: inf.to_f64(),
        l2_deriv: l2d.sqrt().to_f64(),
        linf_mesh_deriv: infd.to_f64(),
    })
}

/// `log2(e_coarse / e_fine)`.
pub fn eoc(e_coarse: f64, e_fine: f64) -> Result<f64> {
    if !(e_coarse > 0.0) || !(e_fine > 0.0) {
        return Err(Error::NonPositiveError(e_coarse, e_fine));
    }
    Ok((e_coarse / e_fine).log2())
}

/// The seven columns of a convergence table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct TableColumns {
    pub e_l2: Option<f64>,
    pub e_linf: Option<f64>,
    pub et_l2: Option<f64>,
    pub de_l2: Option<f64>,
    pub de_linf: Option<f64>,
    pub det_l2: Option<f64>,
    pub det_linf: Option<f64>,
}

pub const COLUMN_NAMES: [&str; 7] = [
    "e_L2", "e_linf", "et_L2", "de_L2", "de_linf", "det_L2", "det_linf",
];

impl TableColumns {
    pub fn values(&self) -> [Option<f64>; 7] {
        [
            self.e_l2,
            self.e_linf,
            self.et_l2,
            self.de_l2,
            self.de_linf,
            self.det_l2,
            self.det_linf,
        ]
    }

    fn from_values(v: [Option<f64>; 7]) -> Self {
        Self {
            e_l2: v[0],
            e_linf: v[1],
            et_l2: v[2],
            de_l2: v[3],
            de_linf: v[4],
            det_l2: v[5],
            det_linf: v[6],
        }
    }

    fn from_stages(stages: &[ErrorNorms]) -> Self {
        let e = stages[0];
        let et = stages.get(1..).and_then(|s| s.last());
        Self {
            e_l2: Some(e.l2),
            e_linf: Some(e.linf_mesh),
            et_l2: et.map(|n| n.l2),
            de_l2: Some(e.l2_deriv),
            de_linf: Some(e.linf_mesh_deriv),
            det_l2: et.map(|n| n.l2_deriv),
            det_linf: et.map(|n| n.linf_mesh_deriv),
        }
    }
}

/// Parameters of a convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub r: usize,
    pub k: usize,
    pub integrator: Integrator,
    pub ns: Vec<usize>,
    pub postprocess: Option<PostprocessMode>,
    /// Depth `l` of the interpolation cascade applied to `f`.
    pub cascade: Option<usize>,
    pub settings: NewtonSettings,
    /// Worker threads for independent resolutions.
    pub jobs: usize,
}

impl StudyConfig {
    pub fn new(r: usize, k: usize, ns: Vec<usize>) -> Self {
        Self {
            r,
            k,
            integrator: Integrator::Associated,
            ns,
            postprocess: None,
            cascade: None,
            settings: NewtonSettings::default(),
            jobs: 1,
        }
    }

    pub fn steps(&self) -> usize {
        self.postprocess.map(|p| p.steps).unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Norms after `s = 0, 1, ...` postprocessing steps.
    pub stages: Vec<ErrorNorms>,
    pub columns: TableColumns,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EocRow {
    pub n_coarse: usize,
    pub n_fine: usize,
    /// `None` where an error reached the precision floor.
    pub columns: TableColumns,
    /// Orders of `|(PP_s e)'|_{L^2}` for every stage `s`.
    pub stage_deriv_l2: Vec<Option<f64>>,
    pub stage_l2: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub problem: String,
    pub config: StudyConfig,
    pub rows: Vec<ConvergenceRow>,
    pub eoc: Vec<EocRow>,
    pub theory: TableColumns,
}

/// Predicted orders for the table columns.
pub fn theoretical_orders(r: usize, k: usize, steps: usize) -> TableColumns {
    let r_f = r as f64;
    let mesh = (2 * r + 1).saturating_sub(k) as f64;
    let lifted = steps > 0 && k <= r;
    TableColumns {
        e_l2: Some(r_f + 1.0),
        e_linf: Some(mesh),
        et_l2: lifted.then(|| mesh.min(r_f + 1.0 + steps as f64)),
        de_l2: Some(r_f),
        de_linf: Some(if k >= 2 { mesh } else { r_f }),
        det_l2: lifted.then_some(r_f + steps as f64),
        det_linf: lifted.then_some(mesh),
    }
}

struct Scales {
    value: f64,
    deriv: f64,
}

impl ConvergenceReport {
    /// Last computed order per column.
    pub fn final_eoc(&self) -> Option<&EocRow> {
        self.eoc.last()
    }

    /// Orders of `|(PP_s e)'|_{L^2}` from the finest doubling at which none of
    /// the stages has reached the precision floor.
    pub fn last_unfloored_stage_orders(&self) -> Option<&EocRow> {
        self.eoc
            .iter()
            .rev()
            .find(|row| row.stage_deriv_l2.iter().all(|o| matches!(o, Some(v) if v.is_finite())))
    }

    /// CSV in table layout: one line per `N`, then the final `eoc` and the
    /// `theo` line. With several postprocessing steps, per-stage columns
    /// `pp<s>_e_L2` and `pp<s>_de_L2` follow.
    pub fn to_csv(&self) -> String {
        let stages = self.rows.first().map(|r| r.stages.len()).unwrap_or(1);
        let per_stage = stages > 2;
        let mut out = String::new();
        out.push('N');
        for name in COLUMN_NAMES {
            let _ = write!(out, ",{name}");
        }
        if per_stage {
            for s in 0..stages {
                let _ = write!(out, ",pp{s}_e_L2,pp{s}_de_L2");
            }
        }
        out.push('\n');
        let err = |v: Option<f64>| v.map(|x| format!("{x:.5e}")).unwrap_or_else(|| "-".into());
        let ord = |v: Option<f64>| match v {
            Some(x) if x.is_nan() => "NaN".to_string(),
            Some(x) => format!("{x:.2}"),
            None => "-".into(),
        };
        for row in &self.rows {
            let _ = write!(out, "{}", row.n);
            for v in row.columns.values() {
                let _ = write!(out, ",{}", err(v));
            }
            if per_stage {
                for s in &row.stages {
                    let _ = write!(out, ",{},{}", err(Some(s.l2)), err(Some(s.l2_deriv)));
                }
            }
            out.push('\n');
        }
        if let Some(last) = self.final_eoc() {
            out.push_str("eoc");
            for v in last.columns.values() {
                let _ = write!(out, ",{}", ord(v));
            }
            if per_stage {
                for (a, b) in last.stage_l2.iter().zip(&last.stage_deriv_l2) {
                    let _ = write!(out, ",{},{}", ord(*a), ord(*b));
                }
            }
            out.push('\n');
        }
        out.push_str("theo");
        for v in self.theory.values() {
            let _ = write!(out, ",{}", v.map(|x| format!("{x}")).unwrap_or_else(|| "-".into()));
        }
        if per_stage {
            for s in 0..stages {
                let r = self.config.r as f64;
                let _ = write!(out, ",-,{}", r + s as f64);
            }
        }
        out.push('\n');
        out
    }
}

fn floored(coarse: f64, fine: f64, scale: f64, floor_eps: f64) -> Option<f64> {
    if fine < 100.0 * floor_eps * scale.max(f64::MIN_POSITIVE) {
        return Some(f64::NAN);
    }
    eoc(coarse, fine).ok()
}

fn order_pair(
    a: Option<f64>,
    b: Option<f64>,
    scale: f64,
    floor_eps: f64,
) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => floored(x, y, scale, floor_eps).map(|v| if v.is_nan() { f64::NAN } else { v }),
        _ => None,
    }
}

/// Solves (and postprocesses) at every `N`, measures errors against the exact
/// solution, and forms orders between consecutive doublings.
pub fn run_convergence_study<R: Real>(
    problem: &OdeProblem<R>,
    cfg: &StudyConfig,
) -> Result<ConvergenceReport> {
    if cfg.ns.is_empty() {
        return Err(Error::Config("no resolutions given".into()));
    }
    if cfg.ns.contains(&0) {
        return Err(Error::InvalidMesh("N = 0 gives no intervals".into()));
    }
    let exact = problem
        .exact()
        .cloned()
        .ok_or_else(|| Error::UnknownProblem(format!("'{}' has no exact solution", problem.name())))?;
    if cfg.cascade.is_some() && !problem.is_affine() {
        return Err(Error::InvalidParameters(
            "the interpolation cascade needs an affine-linear problem".into(),
        ));
    }
    // validates (r, k) and the integrator once
    VtdMethod::new(&VtdConfig::<R>::new(cfg.r, cfg.k).with_integrator(cfg.integrator))?;

    let run_one = |n: usize| -> Result<ConvergenceRow> {
        let mesh = uniform_mesh(problem.t0(), problem.t_end(), n)?;
        let mut vcfg = VtdConfig::new(cfg.r, cfg.k).with_integrator(cfg.integrator);
        if let (Some(depth), Some(aff)) = (cfg.cascade, problem.affine_part()) {
            vcfg = vcfg.with_forcing(cascade_interpolant(aff.f.as_ref(), cfg.r, cfg.k, depth, &mesh)?);
        }
        let sol = VtdMethod::new(&vcfg)?.march(problem, &mesh, &cfg.settings)?;
        let mut stages = vec![error_norms(&sol, exact.as_ref())?];
        if let Some(mode) = cfg.postprocess {
            for s in multi_postprocess(&sol, problem, cfg.r, cfg.k, mode)? {
                stages.push(error_norms(&s, exact.as_ref())?);
            }
        }
        let columns = TableColumns::from_stages(&stages);
        Ok(ConvergenceRow { n, stages, columns })
    };

    let rows = if cfg.jobs <= 1 {
        cfg.ns
            .iter()
            .map(|&n| run_one(n).map_err(|e| e.at_resolution(n)))
            .collect::<Result<Vec<_>>>()?
    } else {
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<Result<ConvergenceRow>>>> =
            Mutex::new((0..cfg.ns.len()).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..cfg.jobs.min(cfg.ns.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&n) = cfg.ns.get(i) else { break };
                    let row = run_one(n).map_err(|e| e.at_resolution(n));
                    results.lock().expect("no poisoned workers")[i] = Some(row);
                });
            }
        });
        results
            .into_inner()
            .expect("no poisoned workers")
            .into_iter()
            .map(|r| r.expect("every resolution ran"))
            .collect::<Result<Vec<_>>>()?
    };

    let scales = {
        let n = *cfg.ns.iter().max().expect("non-empty");
        let mesh = uniform_mesh(problem.t0(), problem.t_end(), n)?;
        let mut s = Scales { value: 0.0, deriv: 0.0 };
        for t in &mesh {
            for jet in exact.taylor(t, 1)? {
                s.value = s.value.max(jet.value().to_f64().abs());
                s.deriv = s.deriv.max(jet.derivative(1).to_f64().abs());
            }
        }
        s
    };
    let floor_eps = R::epsilon().to_f64();
    let span = (problem.t_end().clone() - problem.t0().clone()).to_f64();
    let eoc_rows = rows
        .windows(2)
        .filter(|w| w[1].n == 2 * w[0].n)
        .map(|w| {
            let (c, f) = (&w[0], &w[1]);
            // rounding in the values of U reaches U' amplified by 1/h; the
            // observed L^2 noise is a few eps |u| / h, hence a tenth of the
            // value margin on that scale
            let deriv = scales.deriv.max(0.1 * scales.value * f.n as f64 / span);
            let scale = [
                scales.value,
                scales.value,
                scales.value,
                deriv,
                deriv,
                deriv,
                deriv,
            ];
            let (cv, fv) = (c.columns.values(), f.columns.values());
            let mut vals = [None; 7];
            for i in 0..7 {
                vals[i] = order_pair(cv[i], fv[i], scale[i], floor_eps);
            }
            let stage = |get: fn(&ErrorNorms) -> f64, scale: f64| -> Vec<Option<f64>> {
                c.stages
                    .iter()
                    .zip(&f.stages)
                    .map(|(x, y)| order_pair(Some(get(x)), Some(get(y)), scale, floor_eps))
                    .collect()
            };
            EocRow {
                n_coarse: c.n,
                n_fine: f.n,
                columns: TableColumns::from_values(vals),
                stage_deriv_l2: stage(|e| e.l2_deriv, deriv),
                stage_l2: stage(|e| e.l2, scales.value),
            }
        })
        .collect();

    Ok(ConvergenceReport {
        problem: problem.name().to_string(),
        config: cfg.clone(),
        rows,
        eoc: eoc_rows,
        theory: theoretical_orders(cfg.r, cfg.k, cfg.steps()),
    })
}
