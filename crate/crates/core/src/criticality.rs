//! Pareto criticality decisions and Fritz–John certificates.
//!
//! Criticality is decided exactly as stated: some component `i` must own a
//! limiting subgradient `ω` with `-ω` in the normal cone. Each (component,
//! piece) pair reduces to a min-norm problem over the piece's generators plus
//! the cone rays; the point is critical iff some residual falls below `tol`.
//!
//! That notion is strictly stronger than the usual multiobjective one, where
//! zero only has to lie in the convex hull of all components' subgradients.
//! [`hull_stationarity`] reports the weaker notion for comparison.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convexset::{ConvexSet, NormalConeRep, SetError, DEFAULT_ACTIVE_TOL};
use crate::funcspace::{FuncError, ScalarFunction, SmoothAtom, VectorFunction, DEFAULT_ACTIVITY_TOL};
use crate::linalg;
use crate::minnorm;
use crate::qp::{self, Qp};

pub const DEFAULT_CRITICALITY_TOL: f64 = 1e-8;
/// Residual accepted for certificates at inexact iterates.
pub const CERTIFICATE_TOL: f64 = 1e-6;
/// Largest number of piece combinations the Fritz–John search enumerates.
pub const SELECTION_BUDGET: usize = 4096;
/// Distance to the set tolerated for a point to count as feasible.
const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CritError {
    #[error("point is infeasible (distance {0:e})")]
    Infeasible(f64),
    #[error("constraint {index} is violated at the point (value {value:e})")]
    ConstraintViolated { index: usize, value: f64 },
    #[error("empty generator piece in component {0}")]
    EmptyPiece(usize),
    #[error("{0} piece combinations exceed the enumeration budget")]
    SelectionBudget(usize),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Set(#[from] SetError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Critical,
    NotCritical,
    Inconclusive,
}

/// Outcome of the criticality test, with the data needed to recheck it.
///
/// The piece fields describe the best (component, piece) attempt, which is
/// the witness when the verdict is critical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalityCertificate {
    pub verdict: Verdict,
    /// One-based component number of the witness, when critical.
    pub witness_index: Option<usize>,
    pub witness_subgradient: Option<Vec<f64>>,
    pub piece_index: Option<usize>,
    pub piece_generators: Vec<Vec<f64>>,
    pub hull_coefficients: Vec<f64>,
    pub cone_rays: Vec<Vec<f64>>,
    pub cone_multipliers: Vec<f64>,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CriticalityCertificate {
    /// `||Σ λ_p g_p + Σ μ_r n_r||` from the stored fields.
    pub fn recompute_residual(&self) -> f64 {
        let n = self
            .piece_generators
            .first()
            .or(self.cone_rays.first())
            .map_or(0, Vec::len);
        let mut v = linalg::combine(&self.hull_coefficients, &self.piece_generators, n);
        linalg::axpy(&mut v, 1.0, &linalg::combine(&self.cone_multipliers, &self.cone_rays, n));
        linalg::norm(&v)
    }

    fn inconclusive(note: String) -> Self {
        CriticalityCertificate {
            verdict: Verdict::Inconclusive,
            witness_index: None,
            witness_subgradient: None,
            piece_index: None,
            piece_generators: vec![],
            hull_coefficients: vec![],
            cone_rays: vec![],
            cone_multipliers: vec![],
            residual: f64::NAN,
            note: Some(note),
        }
    }
}

fn check_feasible(s: &ConvexSet, x: &[f64]) -> Result<NormalConeRep, CritError> {
    if x.len() != s.dim() {
        return Err(SetError::DimensionMismatch {
            expected: s.dim(),
            got: x.len(),
        }
        .into());
    }
    let d = s.distance(x);
    if d > FEASIBILITY_TOL {
        return Err(CritError::Infeasible(d));
    }
    Ok(s.normal_cone(x, DEFAULT_ACTIVE_TOL)?)
}

/// Is `x` Pareto critical: does some `f_i` have `ω ∈ ∂f_i(x)` with `-ω ∈ N(x;S)`?
///
/// Pieces are tried in order of component then piece index; the first with
/// residual `<= tol` is the witness. A tangential or degenerate min-crossing
/// makes the verdict inconclusive instead of guessing.
pub fn is_pareto_critical(
    f: &VectorFunction,
    s: &ConvexSet,
    x: &[f64],
    tol: f64,
) -> Result<CriticalityCertificate, CritError> {
    let cone = check_feasible(s, x)?;
    let mut best: Option<CriticalityCertificate> = None;
    for (i, fi) in f.components().iter().enumerate() {
        let sub = match fi.limiting_subdiff(x, DEFAULT_ACTIVITY_TOL) {
            Ok(sub) => sub,
            Err(e @ (FuncError::TangentialCrossing | FuncError::DegenerateCrossing)) => {
                return Ok(CriticalityCertificate::inconclusive(format!("component {}: {e}", i + 1)));
            }
            Err(e) => return Err(e.into()),
        };
        if sub.is_empty() {
            return Err(CritError::EmptyPiece(i + 1));
        }
        for (k, gens) in sub.convex_pieces().into_iter().enumerate() {
            let mn = minnorm::min_norm_point(&gens, &cone.rays);
            let critical = mn.norm <= tol;
            if critical || best.as_ref().is_none_or(|b| mn.norm < b.residual) {
                let omega = linalg::combine(&mn.weights, &gens, x.len());
                best = Some(CriticalityCertificate {
                    verdict: if critical { Verdict::Critical } else { Verdict::NotCritical },
                    witness_index: critical.then_some(i + 1),
                    witness_subgradient: critical.then_some(omega),
                    piece_index: Some(k),
                    piece_generators: gens,
                    hull_coefficients: mn.weights,
                    cone_rays: cone.rays.clone(),
                    cone_multipliers: mn.multipliers,
                    residual: mn.norm,
                    note: None,
                });
            }
            if critical {
                return Ok(best.expect("set above"));
            }
        }
    }
    Ok(best.expect("at least one component with a nonempty piece"))
}

/// Second route to the same verdict: for each piece, the squared distance
/// between `-conv(piece)` and `N(x;S)` as a strictly convex QP solved by the
/// dual active-set method, with the simplex constraint eliminated.
pub fn criticality_via_qp(f: &VectorFunction, s: &ConvexSet, x: &[f64], tol: f64) -> Result<Verdict, CritError> {
    let cone = check_feasible(s, x)?;
    for fi in f.components() {
        let sub = match fi.limiting_subdiff(x, DEFAULT_ACTIVITY_TOL) {
            Ok(sub) => sub,
            Err(FuncError::TangentialCrossing | FuncError::DegenerateCrossing) => return Ok(Verdict::Inconclusive),
            Err(e) => return Err(e.into()),
        };
        for gens in sub.convex_pieces() {
            if piece_distance_qp(&gens, &cone.rays) <= tol {
                return Ok(Verdict::Critical);
            }
        }
    }
    Ok(Verdict::NotCritical)
}

/// `min || g_last + Σ_{p<last} λ_p (g_p - g_last) + Σ μ_r n_r ||` over
/// `λ >= 0, Σλ <= 1, μ >= 0`, lightly regularized to make the Hessian definite.
pub fn piece_distance_qp(gens: &[Vec<f64>], rays: &[Vec<f64>]) -> f64 {
    let n = gens[0].len();
    let base = gens.last().expect("nonempty piece");
    let mut cols: Vec<Vec<f64>> = gens[..gens.len() - 1].iter().map(|g| linalg::sub(g, base)).collect();
    let k = cols.len();
    cols.extend(rays.iter().cloned());
    let q = cols.len();
    if q == 0 {
        return linalg::norm(base);
    }
    let delta = 1e-14 * cols.iter().map(|c| linalg::dot(c, c)).fold(1.0, f64::max);
    let hessian: Vec<Vec<f64>> = (0..q)
        .map(|a| {
            (0..q)
                .map(|b| linalg::dot(&cols[a], &cols[b]) + if a == b { delta } else { 0.0 })
                .collect()
        })
        .collect();
    let linear: Vec<f64> = cols.iter().map(|c| linalg::dot(c, base)).collect();
    let mut rows = Vec::with_capacity(q + 1);
    let mut rhs = Vec::with_capacity(q + 1);
    for j in 0..q {
        let mut e = vec![0.0; q];
        e[j] = 1.0;
        rows.push(e);
        rhs.push(0.0);
    }
    if k > 0 {
        let mut e = vec![0.0; q];
        for v in e.iter_mut().take(k) {
            *v = -1.0;
        }
        rows.push(e);
        rhs.push(-1.0);
    }
    let sol = match qp::solve(&Qp {
        hessian,
        linear,
        rows,
        rhs,
    }) {
        Ok(sol) => sol,
        Err(_) => return f64::INFINITY,
    };
    let mut v = base.clone();
    for (c, w) in cols.iter().zip(&sol.x) {
        linalg::axpy(&mut v, *w, c);
    }
    debug_assert_eq!(v.len(), n);
    linalg::norm(&v)
}

/// The common multiobjective notion: `0 ∈ conv(∪_i ∂^C f_i(x)) + N(x;S)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullStationarity {
    pub stationary: bool,
    pub residual: f64,
    /// Total weight carried by each component's generators.
    pub component_weights: Vec<f64>,
}

pub fn hull_stationarity(f: &VectorFunction, s: &ConvexSet, x: &[f64], tol: f64) -> Result<HullStationarity, CritError> {
    let cone = check_feasible(s, x)?;
    let mut gens = Vec::new();
    let mut owner = Vec::new();
    for (i, fi) in f.components().iter().enumerate() {
        for g in fi.clarke_subdiff(x, DEFAULT_ACTIVITY_TOL)?.all_generators() {
            gens.push(g);
            owner.push(i);
        }
    }
    let mn = minnorm::min_norm_point(&gens, &cone.rays);
    let mut component_weights = vec![0.0; f.m()];
    for (w, &i) in mn.weights.iter().zip(&owner) {
        component_weights[i] += w;
    }
    Ok(HullStationarity {
        stationary: mn.norm <= tol,
        residual: mn.norm,
        component_weights,
    })
}

/// Multipliers witnessing `0 ∈ Σα_i ∂f_i + Σβ_j ∂g_j + τ ∂d_C` at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FritzJohnCertificate {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub tau: f64,
    /// Piece chosen from each objective's subdifferential.
    pub objective_selections: Vec<usize>,
    /// Piece chosen from each constraint's subdifferential; `None` for
    /// inactive constraints, whose multiplier is zero.
    pub constraint_selections: Vec<Option<usize>>,
    pub objective_subgradients: Vec<Vec<f64>>,
    pub constraint_subgradients: Vec<Vec<f64>>,
    pub cone_element: Vec<f64>,
    pub residual: f64,
    /// Constraint values at the point, kept for the slackness check.
    pub constraint_values: Vec<f64>,
}

impl FritzJohnCertificate {
    /// `||Σα_i u_i + Σβ_j v_j + τ·cone_element||` from the stored fields.
    pub fn recompute_residual(&self) -> f64 {
        let n = self.cone_element.len();
        let mut v = linalg::combine(&self.alphas, &self.objective_subgradients, n);
        linalg::axpy(&mut v, 1.0, &linalg::combine(&self.betas, &self.constraint_subgradients, n));
        linalg::axpy(&mut v, self.tau, &self.cone_element);
        linalg::norm(&v)
    }

    pub fn multiplier_sum(&self) -> f64 {
        self.alphas.iter().chain(&self.betas).sum()
    }

    pub fn max_slackness_violation(&self) -> f64 {
        self.betas
            .iter()
            .zip(&self.constraint_values)
            .map(|(b, g)| (b * g).abs())
            .fold(0.0, f64::max)
    }
}

/// Best Fritz–John certificate over all piece selections.
///
/// Each selection is one min-norm problem over the union of the selected
/// generators plus the normal-cone rays of `C`; the simplex weights grouped
/// by owner give `α` and `β`, and the cone part `w` gives `τ = ||w||`.
pub fn fritz_john_residual(
    f: &VectorFunction,
    g: &[ScalarFunction],
    c: &ConvexSet,
    x: &[f64],
) -> Result<FritzJohnCertificate, CritError> {
    let cone = check_feasible(c, x)?;
    let n = x.len();
    let mut owners: Vec<Vec<Vec<Vec<f64>>>> = Vec::new();
    for fi in f.components() {
        owners.push(fi.limiting_subdiff(x, DEFAULT_ACTIVITY_TOL)?.convex_pieces());
    }
    let constraint_values: Vec<f64> = g.iter().map(|gj| gj.eval(x)).collect();
    let mut active = Vec::new();
    for (j, (gj, &v)) in g.iter().zip(&constraint_values).enumerate() {
        if v > CERTIFICATE_TOL {
            return Err(CritError::ConstraintViolated { index: j, value: v });
        }
        if v >= -DEFAULT_ACTIVE_TOL {
            active.push(j);
            owners.push(gj.limiting_subdiff(x, DEFAULT_ACTIVITY_TOL)?.convex_pieces());
        }
    }
    for (k, pieces) in owners.iter().enumerate() {
        if pieces.is_empty() {
            return Err(CritError::EmptyPiece(k + 1));
        }
    }
    let total = owners
        .iter()
        .try_fold(1usize, |acc, p| acc.checked_mul(p.len()))
        .unwrap_or(usize::MAX);
    if total > SELECTION_BUDGET {
        return Err(CritError::SelectionBudget(total));
    }

    let mut best: Option<(f64, Vec<usize>, minnorm::MinNorm, Vec<usize>)> = None;
    let mut sel = vec![0usize; owners.len()];
    for _ in 0..total {
        let mut points = Vec::new();
        let mut owner_of = Vec::new();
        for (k, &s) in sel.iter().enumerate() {
            for gen in &owners[k][s] {
                points.push(gen.clone());
                owner_of.push(k);
            }
        }
        let mn = minnorm::min_norm_point(&points, &cone.rays);
        if best.as_ref().is_none_or(|b| mn.norm < b.0) {
            best = Some((mn.norm, sel.clone(), mn, owner_of));
        }
        // odometer over selections, last owner fastest
        for k in (0..sel.len()).rev() {
            sel[k] += 1;
            if sel[k] < owners[k].len() {
                break;
            }
            sel[k] = 0;
        }
    }
    let (_, sel, mn, owner_of) = best.expect("at least one selection");

    let m = f.m();
    let mut weight = vec![0.0; owners.len()];
    let mut acc = vec![vec![0.0; n]; owners.len()];
    let mut idx = 0;
    for (k, &s) in sel.iter().enumerate() {
        for gen in &owners[k][s] {
            let w = mn.weights[idx];
            debug_assert_eq!(owner_of[idx], k);
            weight[k] += w;
            linalg::axpy(&mut acc[k], w, gen);
            idx += 1;
        }
    }
    let subgrad = |k: usize| -> Vec<f64> {
        if weight[k] > 0.0 {
            linalg::scale(&acc[k], 1.0 / weight[k])
        } else {
            owners[k][sel[k]][0].clone()
        }
    };
    let w = linalg::combine(&mn.multipliers, &cone.rays, n);
    let wn = linalg::norm(&w);
    let (tau, cone_element) = if wn > 0.0 {
        (wn, linalg::scale(&w, 1.0 / wn))
    } else {
        (1.0, vec![0.0; n])
    };
    let mut betas = vec![0.0; g.len()];
    let mut constraint_selections = vec![None; g.len()];
    let mut constraint_subgradients = vec![vec![0.0; n]; g.len()];
    for (a, &j) in active.iter().enumerate() {
        betas[j] = weight[m + a];
        constraint_selections[j] = Some(sel[m + a]);
        constraint_subgradients[j] = subgrad(m + a);
    }
    let mut cert = FritzJohnCertificate {
        alphas: weight[..m].to_vec(),
        betas,
        tau,
        objective_selections: sel[..m].to_vec(),
        constraint_selections,
        objective_subgradients: (0..m).map(subgrad).collect(),
        constraint_subgradients,
        cone_element,
        residual: 0.0,
        constraint_values,
    };
    cert.residual = cert.recompute_residual();
    Ok(cert)
}

/// The system whose Fritz–John conditions hold at a proximal iterate
/// `x^{k+1}` with anchor `x^k`: objectives `f_i + (λ/2)ε_i||· - x^k||²` and
/// constraints `f_i - f_i(x^k) <= 0`.
pub fn proximal_system(
    f: &VectorFunction,
    anchor: &[f64],
    lambda: f64,
    eps: &[f64],
) -> Result<(VectorFunction, Vec<ScalarFunction>), FuncError> {
    let objectives = f
        .components()
        .iter()
        .zip(eps)
        .map(|(fi, e)| fi.add_smooth(&SmoothAtom::norm_sq_shift(anchor.to_vec(), 0.5 * lambda * e, 0.0)))
        .collect();
    let constraints = f
        .components()
        .iter()
        .map(|fi| fi.add_smooth(&SmoothAtom::constant(anchor.len(), -fi.eval(anchor))))
        .collect();
    Ok((VectorFunction::new(objectives)?, constraints))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub passed: bool,
    pub samples: usize,
    pub min_value: f64,
    /// The sample attaining `min_value`.
    pub witness: Vec<f64>,
}

/// Evaluates `F_ε(x) = max{f_i(x) - f_i(x*) + ε, g_j(x)}` over a grid of `C`
/// plus random feasible points; any nonpositive value refutes weak Pareto
/// optimality of `x*`.
pub fn positivity_check(
    f: &VectorFunction,
    g: &[ScalarFunction],
    c: &ConvexSet,
    x_star: &[f64],
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<PositivityReport, CritError> {
    use rand::SeedableRng;
    let fstar = f.eval(x_star)?;
    let value = |x: &[f64]| -> Result<f64, CritError> {
        let fx = f.eval(x)?;
        let mut v = f64::NEG_INFINITY;
        for (a, b) in fx.iter().zip(&fstar) {
            v = v.max(a - b + eps);
        }
        for gj in g {
            v = v.max(gj.eval(x));
        }
        Ok(v)
    };
    let n = x_star.len();
    let (lo, hi) = c.bounding_box(x_star);
    let per_axis = ((samples / 2) as f64).powf(1.0 / n as f64).floor().max(2.0) as usize;
    let mut points = Vec::with_capacity(samples);
    let mut idx = vec![0usize; n];
    'grid: loop {
        let p: Vec<f64> = (0..n)
            .map(|d| lo[d] + (hi[d] - lo[d]) * idx[d] as f64 / (per_axis - 1) as f64)
            .collect();
        if c.contains(&p, 0.0) {
            points.push(p);
        }
        for d in 0..n {
            idx[d] += 1;
            if idx[d] < per_axis {
                continue 'grid;
            }
            idx[d] = 0;
        }
        break;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    while points.len() < samples {
        points.push(c.sample(&lo, &hi, &mut rng));
    }
    let mut min_value = f64::INFINITY;
    let mut witness = x_star.to_vec();
    for p in &points {
        let v = value(p)?;
        if v < min_value {
            min_value = v;
            witness = p.clone();
        }
    }
    Ok(PositivityReport {
        passed: min_value > 0.0,
        samples: points.len(),
        min_value,
        witness,
    })
}
