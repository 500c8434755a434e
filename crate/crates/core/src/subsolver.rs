//! The proximal subproblem: a weak Pareto point of
//! `F_k(x) = F(x) + (λ/2)||x - x^k||² ε` over `Ω_k = {x ∈ Ω : F(x) ⪯ F(x^k)}`.
//!
//! Each start draws strictly positive weights `z` and minimizes the exact
//! penalty function
//!
//! ```text
//! Φ(x) = <z, F(x)> + (κ/2)||x - x^k||² + ρ Σ_i max(f_i(x) - f_i(x^k), 0),   κ = λ<z, ε>
//! ```
//!
//! over `Ω`, first by projected subgradient steps and then by a sequential QP
//! polish on the max-type structure of `Φ`. A minimizer of a strictly positive
//! scalarization over `Ω_k` is weakly Pareto for the subproblem; the anchor is
//! always a valid fallback because it lies in `Ω_k`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convexset::{ConvexSet, SetKind};
use crate::funcspace::{Combine, Normalized, VectorFunction, DEFAULT_ACTIVITY_TOL};
use crate::linalg::{self, Matrix};
use crate::qp::{self, Qp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubsolverError {
    #[error("invalid subproblem: {0}")]
    InvalidSpec(String),
    #[error("no start produced a point of the descent set")]
    NoFeasiblePoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsolverConfig {
    pub starts: usize,
    pub seed: u64,
    /// Projected subgradient steps per start.
    pub budget: usize,
    /// Sequential QP iterations per start.
    pub polish_iters: usize,
}

impl Default for SubsolverConfig {
    fn default() -> Self {
        SubsolverConfig {
            starts: 4,
            seed: 0,
            budget: 5000,
            polish_iters: 200,
        }
    }
}

/// One proximal subproblem.
#[derive(Clone, Debug)]
pub struct SubproblemSpec<'a> {
    pub f: &'a VectorFunction,
    pub set: &'a ConvexSet,
    pub anchor: Vec<f64>,
    pub lambda: f64,
    pub eps_vec: Vec<f64>,
    pub anchor_values: Vec<f64>,
    /// Largest Lipschitz bound among the components; seeds the penalty.
    pub lipschitz: f64,
    normalized: Vec<Normalized>,
}

impl<'a> SubproblemSpec<'a> {
    pub fn new(
        f: &'a VectorFunction,
        set: &'a ConvexSet,
        anchor: Vec<f64>,
        lambda: f64,
        eps_vec: Vec<f64>,
        lipschitz: f64,
    ) -> Result<Self, SubsolverError> {
        let bad = |m: &str| Err(SubsolverError::InvalidSpec(m.to_string()));
        if !(lambda > 0.0 && lambda.is_finite()) {
            return bad("lambda must be positive");
        }
        if eps_vec.len() != f.m() {
            return bad("eps has the wrong length");
        }
        if (linalg::norm(&eps_vec) - 1.0).abs() > 1e-12 || eps_vec.iter().any(|&e| e <= 0.0) {
            return bad("eps must be a positive unit vector");
        }
        if !set.contains(&anchor, 1e-8) {
            return bad("anchor lies outside the feasible set");
        }
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return bad("lipschitz bound must be positive");
        }
        let anchor_values = f.eval(&anchor).map_err(|e| SubsolverError::InvalidSpec(e.to_string()))?;
        let normalized = f.components().iter().map(|c| c.normalize()).collect();
        Ok(SubproblemSpec {
            f,
            set,
            anchor,
            lambda,
            eps_vec,
            anchor_values,
            lipschitz,
            normalized,
        })
    }

    /// `F_k(x)`.
    pub fn prox_values(&self, x: &[f64]) -> Vec<f64> {
        let d2 = linalg::dist(x, &self.anchor).powi(2);
        self.normalized
            .iter()
            .zip(&self.eps_vec)
            .map(|(f, e)| f.eval(x) + 0.5 * self.lambda * d2 * e)
            .collect()
    }

    fn values(&self, x: &[f64]) -> Vec<f64> {
        self.normalized.iter().map(|f| f.eval(x)).collect()
    }

    fn in_descent_set(&self, x: &[f64]) -> bool {
        self.values(x).iter().zip(&self.anchor_values).all(|(v, c)| v <= c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubproblemResult {
    pub point: Vec<f64>,
    pub scalarization_weights: Vec<f64>,
    pub accepted: bool,
    /// Dominance defect of the returned point; nonnegative for a genuine
    /// weak Pareto point of the subproblem.
    pub weak_pareto_defect: f64,
    /// `<z, F_k(point)>`.
    pub objective: f64,
    pub start_index: usize,
    pub penalty: f64,
    /// True when no start improved on the anchor.
    pub anchor_fallback: bool,
}

/// `max_j [f_j(anchor) - f_j(x) - (λ/2)||x - anchor||² ε_j]`
pub fn dominance_defect(spec: &SubproblemSpec, candidate: &[f64]) -> f64 {
    let d2 = linalg::dist(candidate, &spec.anchor).powi(2);
    spec.anchor_values
        .iter()
        .zip(spec.values(candidate))
        .zip(&spec.eps_vec)
        .map(|((a, v), e)| a - v - 0.5 * spec.lambda * d2 * e)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Strictly positive simplex weights, Dirichlet(1, ..., 1).
fn draw_weights(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if m == 1 {
        return vec![1.0];
    }
    let e: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1).max(1e-12)).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

struct Penalized<'s, 'a> {
    spec: &'s SubproblemSpec<'a>,
    z: Vec<f64>,
    kappa: f64,
    rho: f64,
}

/// A group of affine models whose max is one nonsmooth term of `Φ`.
struct Group {
    values: Vec<f64>,
    grads: Vec<Vec<f64>>,
    hessians: Vec<Option<Matrix>>,
}

impl Penalized<'_, '_> {
    fn phi(&self, x: &[f64]) -> f64 {
        let s = self.spec;
        let mut v = 0.5 * self.kappa * linalg::dist(x, &s.anchor).powi(2);
        for ((f, z), c) in s.normalized.iter().zip(&self.z).zip(&s.anchor_values) {
            let fx = f.eval(x);
            v += z * fx + self.rho * (fx - c).max(0.0);
        }
        v
    }

    fn violation(&self, x: &[f64]) -> f64 {
        self.spec
            .values(x)
            .iter()
            .zip(&self.spec.anchor_values)
            .map(|(v, c)| v - c)
            .fold(0.0, f64::max)
    }

    fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let s = self.spec;
        let mut g = linalg::scale(&linalg::sub(x, &s.anchor), self.kappa);
        for ((f, z), c) in s.normalized.iter().zip(&self.z).zip(&s.anchor_values) {
            let sel = f.selected_grad(x, DEFAULT_ACTIVITY_TOL);
            let w = if f.eval(x) > *c { z + self.rho } else { *z };
            linalg::axpy(&mut g, w, &sel);
        }
        g
    }

    /// Projected subgradient descent with normalized diminishing steps;
    /// returns the best point seen.
    fn descend(&self, start: Vec<f64>, budget: usize) -> Vec<f64> {
        let s0 = 1.0 / self.spec.lambda;
        let mut x = start;
        let mut best = x.clone();
        let mut best_val = self.phi(&x);
        for t in 0..budget {
            let g = self.subgradient(&x);
            let gn = linalg::norm(&g);
            if gn == 0.0 {
                break;
            }
            let step = s0 / ((t + 1) as f64).sqrt() / gn;
            let mut y = x.clone();
            linalg::axpy(&mut y, -step, &g);
            x = self.spec.set.project(&y);
            let v = self.phi(&x);
            if v < best_val {
                best_val = v;
                best = x.clone();
            }
        }
        best
    }

    /// Smooth part and max-groups of `Φ` linearized at `x`.
    fn linearize(&self, x: &[f64]) -> (f64, Vec<f64>, Matrix, Vec<Group>) {
        let s = self.spec;
        let n = x.len();
        let diff = linalg::sub(x, &s.anchor);
        let mut val = 0.5 * self.kappa * linalg::dot(&diff, &diff);
        let mut grad = linalg::scale(&diff, self.kappa);
        let mut hess = linalg::zeros(n);
        for (i, row) in hess.iter_mut().enumerate() {
            row[i] = self.kappa;
        }
        let mut groups = Vec::new();
        for ((f, &z), &c) in s.normalized.iter().zip(&self.z).zip(&s.anchor_values) {
            let live: Vec<usize> = match f.combine {
                Combine::Max => (0..f.atoms.len()).collect(),
                Combine::Smooth | Combine::Min => vec![f.selected(x, DEFAULT_ACTIVITY_TOL)],
            };
            let vals: Vec<f64> = live.iter().map(|&j| f.atoms[j].eval(x)).collect();
            let grads: Vec<Vec<f64>> = live.iter().map(|&j| f.atoms[j].grad(x)).collect();
            let hs: Vec<Matrix> = live.iter().map(|&j| f.atoms[j].hessian(x)).collect();
            if live.len() == 1 {
                val += z * vals[0];
                linalg::axpy(&mut grad, z, &grads[0]);
                linalg::mat_axpy(&mut hess, z, &hs[0]);
            } else {
                groups.push(Group {
                    values: vals.iter().map(|v| z * v).collect(),
                    grads: grads.iter().map(|g| linalg::scale(g, z)).collect(),
                    hessians: hs.iter().map(|h| Some(scaled(h, z))).collect(),
                });
            }
            let mut pen = Group {
                values: vec![0.0],
                grads: vec![vec![0.0; n]],
                hessians: vec![None],
            };
            for ((v, g), h) in vals.iter().zip(&grads).zip(&hs) {
                pen.values.push(self.rho * (v - c));
                pen.grads.push(linalg::scale(g, self.rho));
                pen.hessians.push(Some(scaled(h, self.rho)));
            }
            groups.push(pen);
        }
        (val, grad, hess, groups)
    }

    /// Sequential QP on the max-structure of `Φ` with an Armijo line search
    /// on the true penalty function.
    fn polish(&self, mut x: Vec<f64>, iters: usize) -> Vec<f64> {
        let n = x.len();
        let mut weights: Option<Vec<Vec<f64>>> = None;
        for _ in 0..iters {
            let (_, sgrad, mut hess, groups) = self.linearize(&x);
            let maxes: Vec<f64> = groups
                .iter()
                .map(|g| g.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                .collect();
            // curvature from the previous multipliers, or the argmax entry
            let w: Vec<Vec<f64>> = match &weights {
                Some(w) if w.len() == groups.len() && w.iter().zip(&groups).all(|(a, g)| a.len() == g.values.len()) => {
                    w.clone()
                }
                _ => groups
                    .iter()
                    .zip(&maxes)
                    .map(|(g, m)| {
                        let k = g.values.iter().position(|v| v == m).unwrap_or(0);
                        (0..g.values.len()).map(|j| if j == k { 1.0 } else { 0.0 }).collect()
                    })
                    .collect(),
            };
            for (g, wg) in groups.iter().zip(&w) {
                for (h, &wj) in g.hessians.iter().zip(wg) {
                    if let (Some(h), true) = (h, wj > 0.0) {
                        linalg::mat_axpy(&mut hess, wj, h);
                    }
                }
            }
            let b = clamp_pd(&hess, (1e-3 * self.kappa).max(1e-12));

            let k = groups.len();
            let nv = n + k;
            let delta = 1e-10;
            let mut qh = linalg::zeros(nv);
            for i in 0..n {
                qh[i][..n].copy_from_slice(&b[i]);
            }
            for j in n..nv {
                qh[j][j] = delta;
            }
            let mut lin = sgrad.clone();
            lin.extend(std::iter::repeat_n(1.0, k));
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            let mut owner = Vec::new();
            for (gi, (g, m)) in groups.iter().zip(&maxes).enumerate() {
                for (j, (v, gr)) in g.values.iter().zip(&g.grads).enumerate() {
                    let mut row = vec![0.0; nv];
                    for (r, gv) in row.iter_mut().zip(gr) {
                        *r = -gv;
                    }
                    row[n + gi] = 1.0;
                    rows.push(row);
                    rhs.push(v - m);
                    owner.push(Some((gi, j)));
                }
            }
            for (row, r) in set_rows(self.spec.set, &x) {
                let mut full = row;
                full.resize(nv, 0.0);
                rows.push(full);
                rhs.push(r);
                owner.push(None);
            }
            let sol = match qp::solve(&Qp {
                hessian: qh,
                linear: lin,
                rows,
                rhs,
            }) {
                Ok(s) => s,
                Err(_) => break,
            };
            let d = &sol.x[..n];
            let svals = &sol.x[n..];
            let quad = 0.5 * linalg::dot(d, &linalg::mat_vec(&b, d));
            let pred = -(linalg::dot(&sgrad, d) + quad + svals.iter().sum::<f64>());
            let mut nw: Vec<Vec<f64>> = groups.iter().map(|g| vec![0.0; g.values.len()]).collect();
            for (mult, o) in sol.multipliers.iter().zip(&owner) {
                if let Some((gi, j)) = o {
                    nw[*gi][*j] = *mult;
                }
            }
            weights = Some(nw);

            let dn = linalg::norm(d);
            if dn <= 1e-15 * (1.0 + linalg::norm(&x)) || pred <= 0.0 {
                break;
            }
            let phi0 = self.phi(&x);
            if pred <= 1e-12 * (1.0 + phi0.abs()) {
                // below the resolution of Φ values: take the local step as is
                let mut y = x.clone();
                linalg::axpy(&mut y, 1.0, d);
                let y = self.spec.set.project(&y);
                if y == x || self.phi(&y) > phi0 + 1e-12 * (1.0 + phi0.abs()) {
                    break;
                }
                x = y;
                continue;
            }
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let mut y = x.clone();
                linalg::axpy(&mut y, t, d);
                let y = self.spec.set.project(&y);
                if self.phi(&y) <= phi0 - 1e-4 * t * pred {
                    moved = y != x;
                    x = y;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        x
    }
}

fn scaled(h: &Matrix, s: f64) -> Matrix {
    h.iter().map(|r| linalg::scale(r, s)).collect()
}

/// Symmetrizes and lifts every eigenvalue to at least `floor`.
fn clamp_pd(h: &Matrix, floor: f64) -> Matrix {
    let n = h.len();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (h[i][j] + h[j][i]));
    let eig = SymmetricEigen::new(m);
    let vals = eig.eigenvalues.map(|v| v.max(floor));
    let r = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
    (0..n).map(|i| (0..n).map(|j| r[(i, j)]).collect()).collect()
}

/// Linear constraints on the step `d` that keep `x + d` in the set
/// (linearized for the ball), in `row . d >= rhs` form.
fn set_rows(set: &ConvexSet, x: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let n = x.len();
    let unit = |i: usize, s: f64| {
        let mut e = vec![0.0; n];
        e[i] = s;
        e
    };
    match set.kind() {
        SetKind::Box { lower, upper } => {
            let mut out = Vec::with_capacity(2 * n);
            for i in 0..n {
                out.push((unit(i, 1.0), lower[i] - x[i]));
                out.push((unit(i, -1.0), x[i] - upper[i]));
            }
            out
        }
        SetKind::Polyhedron { a, b } => a
            .iter()
            .zip(b)
            .map(|(row, bi)| (linalg::scale(row, -1.0), linalg::dot(row, x) - bi))
            .collect(),
        SetKind::Ball { center, radius } => {
            let r = linalg::sub(x, center);
            let rr = linalg::dot(&r, &r);
            if rr.sqrt() >= 0.5 * radius {
                vec![(linalg::scale(&r, -1.0), 0.5 * (rr - radius * radius))]
            } else {
                vec![]
            }
        }
        SetKind::WholeSpace { .. } => vec![],
    }
}

struct Candidate {
    point: Vec<f64>,
    z: Vec<f64>,
    objective: f64,
    feasible: bool,
    rho: f64,
    fallback: bool,
}

fn run_start(spec: &SubproblemSpec, cfg: &SubsolverConfig, start: usize) -> Candidate {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(start as u64));
    let z = draw_weights(spec.f.m(), &mut rng);
    let kappa = spec.lambda * linalg::dot(&z, &spec.eps_vec);
    let mut model = Penalized {
        spec,
        z,
        kappa,
        rho: 10.0 * spec.lipschitz,
    };
    let x0 = if start == 0 {
        spec.anchor.clone()
    } else {
        let (lo, hi) = spec.set.bounding_box(&spec.anchor);
        spec.set.sample(&lo, &hi, &mut rng)
    };
    let mut x = model.descend(x0, cfg.budget);
    x = model.polish(x, cfg.polish_iters);
    for _ in 0..8 {
        if model.violation(&x) <= 0.0 {
            break;
        }
        model.rho *= 2.0;
        x = model.polish(x, cfg.polish_iters);
    }
    // pull back along the segment from the anchor into Ω_k
    if !spec.in_descent_set(&x) {
        let dir = linalg::sub(&x, &spec.anchor);
        let at = |t: f64| {
            let mut y = spec.anchor.clone();
            linalg::axpy(&mut y, t, &dir);
            y
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if spec.in_descent_set(&at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        x = at(lo);
    }
    let scal = |p: &[f64]| linalg::dot(&model.z, &spec.prox_values(p));
    let mut objective = scal(&x);
    let mut fallback = false;
    let anchor_obj = linalg::dot(&model.z, &spec.anchor_values);
    if !spec.in_descent_set(&x) || objective > anchor_obj {
        x = spec.anchor.clone();
        objective = anchor_obj;
        fallback = true;
    }
    Candidate {
        feasible: spec.in_descent_set(&x),
        point: x,
        z: model.z,
        objective,
        rho: model.rho,
        fallback,
    }
}

/// Solves the subproblem from `cfg.starts` starts and keeps a feasible
/// candidate that no other candidate dominates.
pub fn solve(spec: &SubproblemSpec, cfg: &SubsolverConfig) -> Result<SubproblemResult, SubsolverError> {
    if cfg.starts == 0 {
        return Err(SubsolverError::InvalidSpec("starts must be at least 1".into()));
    }
    let cands: Vec<Candidate> = (0..cfg.starts).into_par_iter().map(|s| run_start(spec, cfg, s)).collect();
    // start weights differ, so candidates are ranked on common ground: first
    // those no other candidate dominates in proximal values, then by the
    // unweighted sum of those values
    let vals: Vec<Vec<f64>> = cands.iter().map(|c| spec.prox_values(&c.point)).collect();
    let dominated = |i: usize| {
        cands.iter().zip(&vals).enumerate().any(|(j, (c, v))| {
            j != i && c.feasible && v.iter().zip(&vals[i]).all(|(a, b)| *a < *b - 1e-12)
        })
    };
    let key = |i: usize| (dominated(i), vals[i].iter().sum::<f64>());
    let (idx, best) = cands
        .iter()
        .enumerate()
        .filter(|(_, c)| c.feasible)
        .min_by(|(i, _), (j, _)| {
            let (a, b) = (key(*i), key(*j));
            a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(i.cmp(j))
        })
        .ok_or(SubsolverError::NoFeasiblePoint)?;
    Ok(SubproblemResult {
        weak_pareto_defect: dominance_defect(spec, &best.point),
        point: best.point.clone(),
        scalarization_weights: best.z.clone(),
        accepted: true,
        objective: best.objective,
        start_index: idx,
        penalty: best.rho,
        anchor_fallback: best.fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{ScalarFunction, SmoothAtom};

    fn sq(c: f64) -> ScalarFunction {
        ScalarFunction::smooth(SmoothAtom::norm_sq_shift(vec![c], 1.0, 0.0))
    }

    #[test]
    fn scalar_prox_point() {
        let f = VectorFunction::new(vec![sq(0.0)]).unwrap();
        let s = ConvexSet::boxed(vec![-10.0], vec![10.0]).unwrap();
        let spec = SubproblemSpec::new(&f, &s, vec![1.0], 2.0, vec![1.0], 30.0).unwrap();
        let r = solve(&spec, &SubsolverConfig::default()).unwrap();
        assert!((r.point[0] - 0.5).abs() < 1e-12, "{:?}", r.point);
        assert!((dominance_defect(&spec, &[0.5]) - 0.5).abs() < 1e-15);
        assert!(dominance_defect(&spec, &[1.5]) < 0.0);
        assert_eq!(dominance_defect(&spec, &[1.0]), 0.0);
    }

    #[test]
    fn critical_anchor_stays() {
        let f = VectorFunction::new(vec![sq(0.0)]).unwrap();
        let s = ConvexSet::boxed(vec![-10.0], vec![10.0]).unwrap();
        let spec = SubproblemSpec::new(&f, &s, vec![0.0], 1.0, vec![1.0], 30.0).unwrap();
        let r = solve(&spec, &SubsolverConfig::default()).unwrap();
        assert!(r.point[0].abs() < 1e-12);
    }

    #[test]
    fn two_objective_descent_set() {
        let f = VectorFunction::new(vec![sq(1.0), sq(-1.0)]).unwrap();
        let s = ConvexSet::boxed(vec![-2.0], vec![2.0]).unwrap();
        let e = std::f64::consts::FRAC_1_SQRT_2;
        let spec = SubproblemSpec::new(&f, &s, vec![0.0], 1.0, vec![e, e], 9.0).unwrap();
        let r = solve(&spec, &SubsolverConfig::default()).unwrap();
        assert!(r.point[0].abs() <= 1.0);
        let v = f.eval(&r.point).unwrap();
        assert!(v[0] <= 1.0 + 1e-9 && v[1] <= 1.0 + 1e-9);
        assert!(r.weak_pareto_defect >= -1e-9);
    }

    #[test]
    fn invalid_specs_rejected() {
        let f = VectorFunction::new(vec![sq(0.0)]).unwrap();
        let s = ConvexSet::boxed(vec![-1.0], vec![1.0]).unwrap();
        assert!(SubproblemSpec::new(&f, &s, vec![2.0], 1.0, vec![1.0], 1.0).is_err());
        assert!(SubproblemSpec::new(&f, &s, vec![0.0], 1.0, vec![0.5], 1.0).is_err());
        assert!(SubproblemSpec::new(&f, &s, vec![0.0], 0.0, vec![1.0], 1.0).is_err());
    }

    #[test]
    fn deterministic() {
        let f = VectorFunction::new(vec![
            ScalarFunction::min_of(vec![
                SmoothAtom::norm_sq_shift(vec![1.0], 1.0, 0.0),
                SmoothAtom::norm_sq_shift(vec![-1.0], 1.0, 0.0),
            ]),
            ScalarFunction::smooth(SmoothAtom::polynomial(1, vec![(1.0, vec![2]), (0.1, vec![1])])),
        ])
        .unwrap();
        let s = ConvexSet::boxed(vec![-2.0], vec![2.0]).unwrap();
        let e = std::f64::consts::FRAC_1_SQRT_2;
        let spec = SubproblemSpec::new(&f, &s, vec![-2.0], 1.0, vec![e, e], 10.0).unwrap();
        let cfg = SubsolverConfig { seed: 9, ..Default::default() };
        let a = solve(&spec, &cfg).unwrap();
        let b = solve(&spec, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.weak_pareto_defect >= -1e-9);
    }
}
