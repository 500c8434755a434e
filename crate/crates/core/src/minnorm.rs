//! Minimum-norm element of `conv(points) + cone(rays)`.
//!
//! A Wolfe-type active-set method. Each inner step solves the affinely
//! constrained least-squares problem on the current support through the
//! pseudo-inverse of its KKT system, then either accepts the minimizer or
//! walks toward it until a weight hits zero.

use nalgebra::{DMatrix, DVector};

use crate::linalg;

#[derive(Clone, Debug, PartialEq)]
pub struct MinNorm {
    /// The minimizing vector `sum w_i p_i + sum mu_j r_j`.
    pub point: Vec<f64>,
    pub norm: f64,
    /// Simplex weights on the points.
    pub weights: Vec<f64>,
    /// Nonnegative multipliers on the rays.
    pub multipliers: Vec<f64>,
}

/// Minimizes `||P w + R mu||` over `w` in the unit simplex and `mu >= 0`.
///
/// With no points the feasible set is the cone itself and the answer is the
/// origin.
pub fn min_norm_point(points: &[Vec<f64>], rays: &[Vec<f64>]) -> MinNorm {
    let np = points.len();
    let nr = rays.len();
    let dim = points.first().or(rays.first()).map_or(0, Vec::len);
    if np == 0 {
        return MinNorm {
            point: vec![0.0; dim],
            norm: 0.0,
            weights: vec![],
            multipliers: vec![0.0; nr],
        };
    }
    let cols: Vec<&Vec<f64>> = points.iter().chain(rays).collect();
    let ncols = cols.len();
    let is_point = |j: usize| j < np;
    let scale = cols.iter().map(|c| linalg::norm(c)).fold(0.0, f64::max);
    let mut seen: Vec<Vec<usize>> = Vec::new();

    let start = (0..np)
        .min_by(|&a, &b| linalg::norm(&points[a]).total_cmp(&linalg::norm(&points[b])).then(a.cmp(&b)))
        .expect("at least one point");
    let mut v = vec![0.0; ncols];
    v[start] = 1.0;
    let mut support = vec![start];
    let budget = 100 * (ncols + 1);

    for _ in 0..budget {
        let u = affine_ls(&cols, &support, &is_point, dim);
        let inside = support.iter().zip(&u).all(|(_, &ui)| ui > 1e-14);
        if inside {
            for (k, &j) in support.iter().enumerate() {
                v[j] = u[k];
            }
            let y = assemble(&cols, &v, dim);
            let yy = linalg::dot(&y, &y);
            let ny = yy.sqrt();
            let mut key = support.clone();
            key.sort_unstable();
            // a revisited support means we are cycling on round-off
            if ny <= 1e-15 * scale.max(1e-300) || seen.contains(&key) {
                return finish(&cols, v, np, dim);
            }
            seen.push(key);
            let mut worst: Option<(usize, f64)> = None;
            for j in 0..ncols {
                if support.contains(&j) {
                    continue;
                }
                let gap = linalg::dot(&y, cols[j]) - if is_point(j) { yy } else { 0.0 };
                let tol = 1e-11 * ny * (linalg::norm(cols[j]) + ny);
                if gap < -tol && worst.is_none_or(|(_, g)| gap < g) {
                    worst = Some((j, gap));
                }
            }
            match worst {
                None => return finish(&cols, v, np, dim),
                Some((j, _)) => support.push(j),
            }
        } else {
            // step from v toward u until the first weight reaches zero
            let mut theta: f64 = 1.0;
            for (k, &j) in support.iter().enumerate() {
                if u[k] <= 1e-14 {
                    let denom = v[j] - u[k];
                    if denom > 0.0 {
                        theta = theta.min(v[j] / denom);
                    }
                }
            }
            for (k, &j) in support.iter().enumerate() {
                v[j] += theta * (u[k] - v[j]);
            }
            let mut kept = Vec::with_capacity(support.len());
            for &j in &support {
                if v[j] > 1e-14 {
                    kept.push(j);
                } else {
                    v[j] = 0.0;
                }
            }
            if !kept.iter().any(|&j| is_point(j)) {
                // keep the simplex nonempty: restore the heaviest point
                let best = support
                    .iter()
                    .copied()
                    .filter(|&j| is_point(j))
                    .max_by(|&a, &b| v[a].total_cmp(&v[b]))
                    .expect("support holds a point");
                kept.push(best);
            }
            support = kept;
            renormalize(&mut v, np);
        }
    }
    finish(&cols, v, np, dim)
}

fn renormalize(v: &mut [f64], np: usize) {
    let s: f64 = v[..np].iter().sum();
    if s > 0.0 {
        for w in &mut v[..np] {
            *w /= s;
        }
    }
}

fn assemble(cols: &[&Vec<f64>], v: &[f64], dim: usize) -> Vec<f64> {
    let mut y = vec![0.0; dim];
    for (c, &w) in cols.iter().zip(v) {
        if w != 0.0 {
            linalg::axpy(&mut y, w, c);
        }
    }
    y
}

fn finish(cols: &[&Vec<f64>], mut v: Vec<f64>, np: usize, dim: usize) -> MinNorm {
    for w in v.iter_mut() {
        *w = w.max(0.0);
    }
    renormalize(&mut v, np);
    let point = assemble(cols, &v, dim);
    let norm = linalg::norm(&point);
    let multipliers = v.split_off(np);
    MinNorm {
        point,
        norm,
        weights: v,
        multipliers,
    }
}

/// Minimizes `||A_S u||` subject to the point weights in `S` summing to one.
fn affine_ls(cols: &[&Vec<f64>], support: &[usize], is_point: &dyn Fn(usize) -> bool, dim: usize) -> Vec<f64> {
    let k = support.len();
    let a = DMatrix::from_fn(dim, k, |r, c| cols[support[c]][r]);
    let gram = a.transpose() * &a;
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    kkt.view_mut((0, 0), (k, k)).copy_from(&gram);
    for (c, &j) in support.iter().enumerate() {
        if is_point(j) {
            kkt[(c, k)] = 1.0;
            kkt[(k, c)] = 1.0;
        }
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let lu = kkt.clone().full_piv_lu();
    let mut sol = match lu.solve(&rhs) {
        Some(s) if s.iter().all(|v| v.is_finite()) => s,
        _ => {
            // affinely dependent support: least-squares solution
            let eps = 1e-13 * kkt.norm().max(1.0);
            kkt.clone()
                .svd(true, true)
                .solve(&rhs, eps)
                .expect("SVD with both factors computed")
        }
    };
    // one round of iterative refinement
    let resid = &rhs - &kkt * &sol;
    if let Some(corr) = lu.solve(&resid) {
        if corr.iter().all(|v| v.is_finite()) {
            sol += corr;
        }
    }
    sol.iter().take(k).copied().collect()
}
