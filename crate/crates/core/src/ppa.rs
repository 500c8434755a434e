//! The vector proximal point driver and its convergence diagnostics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convexset::ConvexSet;
use crate::criticality::{self, CriticalityCertificate, FritzJohnCertificate, HullStationarity, Verdict};
use crate::funcspace::{self, FuncError, VectorFunction};
use crate::linalg;
use crate::subsolver::{self, SubproblemSpec, SubsolverConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PpaError {
    #[error("starting point is infeasible (distance {0:e})")]
    InfeasibleStart(f64),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error(transparent)]
    Func(#[from] FuncError),
}

/// Proximal parameters `λ_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LambdaSchedule {
    Constant { value: f64 },
    /// `values[k]`, with the last entry repeated.
    Sequence { values: Vec<f64> },
    /// Piecewise constant: `(from_iteration, value)` pairs, sorted.
    Table { entries: Vec<(usize, f64)> },
}

impl LambdaSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            LambdaSchedule::Constant { value } => *value,
            LambdaSchedule::Sequence { values } => values[k.min(values.len() - 1)],
            LambdaSchedule::Table { entries } => {
                entries.iter().take_while(|(from, _)| *from <= k).last().unwrap_or(&entries[0]).1
            }
        }
    }

    fn all_values(&self) -> Vec<f64> {
        match self {
            LambdaSchedule::Constant { value } => vec![*value],
            LambdaSchedule::Sequence { values } => values.clone(),
            LambdaSchedule::Table { entries } => entries.iter().map(|e| e.1).collect(),
        }
    }
}

/// Scaling vectors `ε^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EpsSchedule {
    /// `(1/√m, ..., 1/√m)`.
    Uniform,
    Constant { value: Vec<f64> },
    Sequence { values: Vec<Vec<f64>> },
}

impl EpsSchedule {
    pub fn at(&self, k: usize, m: usize) -> Vec<f64> {
        match self {
            EpsSchedule::Uniform => vec![1.0 / (m as f64).sqrt(); m],
            EpsSchedule::Constant { value } => value.clone(),
            EpsSchedule::Sequence { values } => values[k.min(values.len() - 1)].clone(),
        }
    }

    fn all_values(&self, m: usize) -> Vec<Vec<f64>> {
        match self {
            EpsSchedule::Uniform => vec![self.at(0, m)],
            EpsSchedule::Constant { value } => vec![value.clone()],
            EpsSchedule::Sequence { values } => values.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpaConfig {
    pub lambda: LambdaSchedule,
    pub eps: EpsSchedule,
    pub max_iters: usize,
    /// Stop once `||x^{k+1} - x^k|| <= step_tol`; zero switches the rule off.
    pub step_tol: f64,
    pub criticality_tol: f64,
    /// Residual at which final certificates are accepted.
    pub certificate_tol: f64,
    /// Run the criticality stopping test every this many iterations;
    /// `None` means every iteration for `n <= 4` and every 10 otherwise.
    pub criticality_every: Option<usize>,
    /// Overrides the Lipschitz bound that seeds the subsolver penalty.
    pub lipschitz: Option<f64>,
    pub subsolver: SubsolverConfig,
}

impl Default for PpaConfig {
    fn default() -> Self {
        PpaConfig {
            lambda: LambdaSchedule::Constant { value: 1.0 },
            eps: EpsSchedule::Uniform,
            max_iters: 10_000,
            step_tol: 1e-6,
            criticality_tol: criticality::DEFAULT_CRITICALITY_TOL,
            certificate_tol: criticality::CERTIFICATE_TOL,
            criticality_every: None,
            lipschitz: None,
            subsolver: SubsolverConfig::default(),
        }
    }
}

/// The constants `a <= λ_k <= b` and `min_i ε_i^k >= c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleBounds {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PpaConfig {
    pub fn validate(&self, m: usize) -> Result<ScheduleBounds, PpaError> {
        let bad = |s: &str| Err(PpaError::InvalidSchedule(s.to_string()));
        let lams = self.lambda.all_values();
        if lams.is_empty() || lams.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return bad("every lambda must be positive and finite");
        }
        if let LambdaSchedule::Table { entries } = &self.lambda {
            if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
                return bad("lambda table must be sorted by iteration");
            }
        }
        let epss = self.eps.all_values(m);
        if epss.is_empty() {
            return bad("eps sequence is empty");
        }
        for e in &epss {
            if e.len() != m {
                return bad("eps length differs from the number of objectives");
            }
            if e.iter().any(|v| *v <= 0.0) || (linalg::norm(e) - 1.0).abs() > 1e-12 {
                return bad("every eps must be a strictly positive unit vector");
            }
        }
        if self.step_tol < 0.0 || self.criticality_tol < 0.0 || self.certificate_tol < 0.0 {
            return bad("tolerances must be nonnegative");
        }
        if self.subsolver.starts == 0 {
            return bad("the subsolver needs at least one start");
        }
        if self.criticality_every == Some(0) {
            return bad("criticality_every must be positive");
        }
        Ok(ScheduleBounds {
            a: lams.iter().cloned().fold(f64::INFINITY, f64::min),
            b: lams.iter().cloned().fold(0.0, f64::max),
            c: epss.iter().flatten().cloned().fold(f64::INFINITY, f64::min),
        })
    }
}

/// Per-step data from the subsolver and the certificate at the new iterate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMeta {
    pub lambda: f64,
    pub eps: Vec<f64>,
    pub scalarization_weights: Vec<f64>,
    pub start_index: usize,
    pub penalty: f64,
    pub anchor_fallback: bool,
    /// Multipliers of the proximal system's Fritz–John certificate.
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub tau: f64,
    /// `λ_k <ε^k, α^{k+1}>`
    pub gamma: f64,
    /// `λ_{k+1} Σ α_i^{k+1} ε_i^k`, logged beside `gamma`.
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub f_values: Vec<f64>,
    pub step_norm: f64,
    pub dominance_defect: f64,
    pub fj_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<StepMeta>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    CriticalPoint,
    StepTol,
    MaxIters,
    SubsolverFailure { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub iterates: Vec<IterateRecord>,
    pub termination: Termination,
    pub config_echo: PpaConfig,
    pub bounds: ScheduleBounds,
    pub lipschitz: f64,
    /// Criticality test at the final iterate with `certificate_tol`.
    pub final_criticality: Option<CriticalityCertificate>,
    /// Fritz–John certificate of the last proximal system, or of the plain
    /// problem when no step was taken.
    pub final_fritz_john: Option<FritzJohnCertificate>,
    pub final_hull_stationarity: Option<HullStationarity>,
}

impl Trajectory {
    pub fn last(&self) -> &IterateRecord {
        self.iterates.last().expect("a trajectory holds its starting point")
    }
}

/// Largest Lipschitz bound over the components on the set's bounding box.
pub fn lipschitz_for(f: &VectorFunction, s: &ConvexSet, x0: &[f64]) -> f64 {
    let (lo, hi) = s.bounding_box(x0);
    f.components()
        .iter()
        .map(|c| funcspace::lipschitz_bound(c, &lo, &hi, 256))
        .fold(0.0, f64::max)
}

fn plain_fritz_john(f: &VectorFunction, s: &ConvexSet, x: &[f64]) -> (f64, Option<FritzJohnCertificate>, Option<String>) {
    match criticality::fritz_john_residual(f, &[], s, x) {
        Ok(c) => (c.residual, Some(c), None),
        Err(e) => (f64::NAN, None, Some(e.to_string())),
    }
}

/// Runs the proximal point method from `x0`.
///
/// Each iteration first tests `x^k` for criticality (the stopping rule), then
/// solves the proximal subproblem and records the step together with the
/// Fritz–John certificate of the proximal system at `x^{k+1}`.
pub fn run(f: &VectorFunction, s: &ConvexSet, x0: &[f64], cfg: &PpaConfig) -> Result<Trajectory, PpaError> {
    let bounds = cfg.validate(f.m())?;
    let d0 = if x0.len() == s.dim() { s.distance(x0) } else { f64::INFINITY };
    if d0 > 1e-8 {
        return Err(PpaError::InfeasibleStart(d0));
    }
    let n = x0.len();
    let lipschitz = cfg.lipschitz.unwrap_or_else(|| lipschitz_for(f, s, x0));
    let every = cfg.criticality_every.unwrap_or(if n <= 4 { 1 } else { 10 });

    let (fj0, cert0, note0) = plain_fritz_john(f, s, x0);
    let mut iterates = vec![IterateRecord {
        k: 0,
        x: x0.to_vec(),
        f_values: f.eval(x0)?,
        step_norm: 0.0,
        dominance_defect: 0.0,
        fj_residual: fj0,
        meta: note0.map(|note| StepMeta {
            lambda: f64::NAN,
            eps: vec![],
            scalarization_weights: vec![],
            start_index: 0,
            penalty: f64::NAN,
            anchor_fallback: false,
            alphas: vec![],
            betas: vec![],
            tau: f64::NAN,
            gamma: f64::NAN,
            theta: f64::NAN,
            note: Some(note),
        }),
    }];
    let mut last_fj = cert0;
    let mut x = x0.to_vec();
    let mut k = 0;
    let termination = loop {
        if k % every == 0 {
            if let Ok(c) = criticality::is_pareto_critical(f, s, &x, cfg.criticality_tol) {
                if c.verdict == Verdict::Critical {
                    break Termination::CriticalPoint;
                }
            }
        }
        if k >= cfg.max_iters {
            break Termination::MaxIters;
        }
        let lambda = cfg.lambda.at(k);
        let eps = cfg.eps.at(k, f.m());
        let spec = match SubproblemSpec::new(f, s, x.clone(), lambda, eps.clone(), lipschitz) {
            Ok(spec) => spec,
            Err(e) => break Termination::SubsolverFailure { message: e.to_string() },
        };
        let res = match subsolver::solve(&spec, &cfg.subsolver) {
            Ok(r) => r,
            Err(e) => break Termination::SubsolverFailure { message: e.to_string() },
        };
        let step = linalg::dist(&res.point, &x);
        let (fj_residual, cert, note) = match criticality::proximal_system(f, &x, lambda, &eps)
            .map_err(criticality::CritError::from)
            .and_then(|(obj, cons)| criticality::fritz_john_residual(&obj, &cons, s, &res.point))
        {
            Ok(c) => (c.residual, Some(c), None),
            Err(e) => (f64::NAN, None, Some(e.to_string())),
        };
        let (alphas, betas, tau) = cert
            .as_ref()
            .map_or((vec![], vec![], f64::NAN), |c| (c.alphas.clone(), c.betas.clone(), c.tau));
        let weighted_eps: f64 = alphas.iter().zip(&eps).map(|(a, e)| a * e).sum();
        let meta = StepMeta {
            gamma: lambda * weighted_eps,
            theta: cfg.lambda.at(k + 1) * weighted_eps,
            lambda,
            eps,
            scalarization_weights: res.scalarization_weights.clone(),
            start_index: res.start_index,
            penalty: res.penalty,
            anchor_fallback: res.anchor_fallback,
            alphas,
            betas,
            tau,
            note,
        };
        iterates.push(IterateRecord {
            k: k + 1,
            f_values: f.eval(&res.point)?,
            x: res.point.clone(),
            step_norm: step,
            dominance_defect: res.weak_pareto_defect,
            fj_residual,
            meta: Some(meta),
        });
        last_fj = cert;
        x = res.point;
        k += 1;
        if cfg.step_tol > 0.0 && step <= cfg.step_tol {
            break Termination::StepTol;
        }
    };

    let final_criticality = criticality::is_pareto_critical(f, s, &x, cfg.certificate_tol).ok();
    let final_hull_stationarity = criticality::hull_stationarity(f, s, &x, cfg.certificate_tol).ok();
    Ok(Trajectory {
        iterates,
        termination,
        config_echo: cfg.clone(),
        bounds,
        lipschitz,
        final_criticality,
        final_fritz_john: last_fj,
        final_hull_stationarity,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FejerEntry {
    pub reference: Vec<f64>,
    pub distances: Vec<f64>,
    /// `max_k (||x^{k+1} - x*|| - ||x^k - x*||)`
    pub max_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FejerReport {
    pub entries: Vec<FejerEntry>,
    /// References outside `E = {x : F(x) ⪯ F(x^k) for all k}`, with the reason.
    pub excluded: Vec<(Vec<f64>, String)>,
}

impl FejerReport {
    pub fn max_violation(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.max_violation)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Distances from the iterates to each reference point of `E`.
pub fn fejer_diagnostics(f: &VectorFunction, traj: &Trajectory, references: &[Vec<f64>]) -> FejerReport {
    let mut entries = Vec::new();
    let mut excluded = Vec::new();
    for r in references {
        let fr = match f.eval(r) {
            Ok(v) => v,
            Err(e) => {
                excluded.push((r.clone(), e.to_string()));
                continue;
            }
        };
        let outside = traj.iterates.iter().find(|it| fr.iter().zip(&it.f_values).any(|(a, b)| *a > b + 1e-9));
        if let Some(it) = outside {
            excluded.push((r.clone(), format!("F(x*) is not below F(x^{})", it.k)));
            continue;
        }
        let distances: Vec<f64> = traj.iterates.iter().map(|it| linalg::dist(&it.x, r)).collect();
        let max_violation = distances
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        entries.push(FejerEntry {
            reference: r.clone(),
            distances,
            max_violation,
        });
    }
    FejerReport { entries, excluded }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepNormReport {
    /// `(a c / 2)||Δ_k||² <= ||F(x^{k-1}) - F(x^k)|| + 1e-9` for every k.
    pub squared_form_holds: bool,
    /// Smallest `||F(x^{k-1}) - F(x^k)|| - (a c / 2)||Δ_k||²`.
    pub squared_margin: f64,
    /// The same with the unsquared step, recorded for comparison only.
    pub unsquared_margin: f64,
    pub last_quartile_mean_step: f64,
    /// Last-quartile mean step below `10 · step_tol`.
    pub steps_vanish: bool,
}

pub fn step_norm_identity_check(traj: &Trajectory) -> StepNormReport {
    let ScheduleBounds { a, c, .. } = traj.bounds;
    let mut sq = f64::INFINITY;
    let mut unsq = f64::INFINITY;
    for w in traj.iterates.windows(2) {
        let df = linalg::dist(&w[0].f_values, &w[1].f_values);
        let step = linalg::dist(&w[0].x, &w[1].x);
        sq = sq.min(df - 0.5 * a * c * step * step);
        unsq = unsq.min(df - 0.5 * a * c * step);
    }
    let steps: Vec<f64> = traj.iterates.iter().skip(1).map(|it| it.step_norm).collect();
    let tail = &steps[steps.len() - steps.len().div_ceil(4).min(steps.len())..];
    let mean = if tail.is_empty() {
        0.0
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    };
    StepNormReport {
        squared_form_holds: sq >= -1e-9,
        squared_margin: sq,
        unsquared_margin: unsq,
        last_quartile_mean_step: mean,
        steps_vanish: mean < 10.0 * traj.config_echo.step_tol,
    }
}
