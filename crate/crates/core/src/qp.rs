//! Dense strictly convex QP by the Goldfarb–Idnani dual active-set method.
//!
//! Solves `min 0.5 x^T G x + a^T x` subject to `n_i^T x >= b_i`, with `G`
//! positive definite. The active-set factorization is rebuilt from scratch
//! whenever the set changes; the problems here have a handful of variables,
//! so clarity wins over Givens updates.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("QP Hessian is not positive definite")]
    NotPositiveDefinite,
    #[error("QP constraints are infeasible")]
    Infeasible,
    #[error("QP did not converge within {0} iterations")]
    IterationLimit(usize),
    #[error("QP data has inconsistent dimensions")]
    Dimension,
}

/// `min 0.5 x^T G x + a^T x  s.t.  rows[i] . x >= rhs[i]`
#[derive(Clone, Debug)]
pub struct Qp {
    pub hessian: Matrix,
    pub linear: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct QpSolution {
    pub x: Vec<f64>,
    /// One multiplier per constraint, zero when inactive.
    pub multipliers: Vec<f64>,
    pub active: Vec<usize>,
}

pub fn solve(qp: &Qp) -> Result<QpSolution, QpError> {
    let n = qp.linear.len();
    let m = qp.rows.len();
    if qp.hessian.len() != n
        || qp.hessian.iter().any(|r| r.len() != n)
        || qp.rhs.len() != m
        || qp.rows.iter().any(|r| r.len() != n)
    {
        return Err(QpError::Dimension);
    }
    let g = DMatrix::from_fn(n, n, |i, j| qp.hessian[i][j]);
    let chol = g.cholesky().ok_or(QpError::NotPositiveDefinite)?;
    let linv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or(QpError::NotPositiveDefinite)?;
    let a = DVector::from_column_slice(&qp.linear);
    let normals: Vec<DVector<f64>> = qp.rows.iter().map(|r| DVector::from_column_slice(r)).collect();

    let mut x = -chol.solve(&a);
    let mut active: Vec<usize> = Vec::new();
    let mut u: Vec<f64> = Vec::new();
    let budget = 50 * (m + n) + 100;
    let mut iters = 0;

    loop {
        // most violated inactive constraint
        let xnorm = x.norm();
        let mut pick: Option<(usize, f64)> = None;
        for i in 0..m {
            if active.contains(&i) {
                continue;
            }
            let s = normals[i].dot(&x) - qp.rhs[i];
            let thr = 1e-12 * (1.0 + qp.rhs[i].abs() + normals[i].norm() * xnorm);
            if s < -thr && pick.is_none_or(|(_, w)| s < w) {
                pick = Some((i, s));
            }
        }
        let Some((p, _)) = pick else {
            let mut multipliers = vec![0.0; m];
            for (k, &j) in active.iter().enumerate() {
                multipliers[j] = u[k];
            }
            return Ok(QpSolution {
                x: x.iter().copied().collect(),
                multipliers,
                active,
            });
        };

        let np = &normals[p];
        let mut up = 0.0;
        loop {
            iters += 1;
            if iters > budget {
                return Err(QpError::IterationLimit(budget));
            }
            let w = &linv * np;
            let (d1, r) = if active.is_empty() {
                (DVector::zeros(0), DVector::zeros(0))
            } else {
                let cols: Vec<DVector<f64>> = active.iter().map(|&j| &linv * &normals[j]).collect();
                let qr = DMatrix::from_columns(&cols).qr();
                let q1 = qr.q();
                let rr = qr.r();
                let d1 = q1.transpose() * &w;
                let r = rr.solve_upper_triangular(&d1).ok_or(QpError::Infeasible)?;
                (q1 * &d1, r)
            };
            let resid = if d1.is_empty() { w.clone() } else { &w - &d1 };
            let z = linv.transpose() * &resid;

            let mut t1 = f64::INFINITY;
            let mut drop = None;
            for (k, &rk) in r.iter().enumerate() {
                if rk > 1e-14 {
                    let t = u[k] / rk;
                    if t < t1 {
                        t1 = t;
                        drop = Some(k);
                    }
                }
            }
            let t2 = if resid.norm() > 1e-11 * w.norm().max(1e-300) {
                -(np.dot(&x) - qp.rhs[p]) / z.dot(np)
            } else {
                f64::INFINITY
            };
            let t = t1.min(t2);
            if !t.is_finite() {
                return Err(QpError::Infeasible);
            }
            if t2.is_finite() {
                x += &z * t;
            }
            for (uk, rk) in u.iter_mut().zip(r.iter()) {
                *uk -= t * rk;
            }
            up += t;
            if t2 <= t1 {
                active.push(p);
                u.push(up);
                break;
            }
            let k = drop.expect("partial step drops a constraint");
            active.remove(k);
            u.remove(k);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn projection_qp(x: &[f64], a: &[Vec<f64>], b: &[f64]) -> Qp {
        Qp {
            hessian: linalg::identity(x.len()),
            linear: x.iter().map(|v| -v).collect(),
            rows: a.iter().map(|r| r.iter().map(|v| -v).collect()).collect(),
            rhs: b.iter().map(|v| -v).collect(),
        }
    }

    #[test]
    fn unconstrained_optimum() {
        let qp = Qp {
            hessian: vec![vec![2.0, 0.0], vec![0.0, 4.0]],
            linear: vec![-2.0, -4.0],
            rows: vec![],
            rhs: vec![],
        };
        let s = solve(&qp).unwrap();
        assert!(linalg::max_abs_diff(&s.x, &[1.0, 1.0]) < 1e-14);
    }

    #[test]
    fn simplex_corner_projection() {
        let a = vec![vec![1.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]];
        let b = vec![1.0, 0.0, 0.0];
        let s = solve(&projection_qp(&[1.0, 1.0], &a, &b)).unwrap();
        assert!(linalg::max_abs_diff(&s.x, &[0.5, 0.5]) < 1e-14);
        assert_eq!(s.active, vec![0]);
        assert!((s.multipliers[0] - 0.5).abs() < 1e-14);
        let s = solve(&projection_qp(&[3.0, -1.0], &a, &b)).unwrap();
        assert!(linalg::max_abs_diff(&s.x, &[1.0, 0.0]) < 1e-14);
    }

    #[test]
    fn detects_infeasibility() {
        let a = vec![vec![1.0], vec![-1.0]];
        let b = vec![0.0, -1.0]; // x <= 0 and x >= 1
        assert_eq!(solve(&projection_qp(&[0.5], &a, &b)).unwrap_err(), QpError::Infeasible);
    }

    #[test]
    fn rejects_indefinite() {
        let qp = Qp {
            hessian: vec![vec![-1.0]],
            linear: vec![0.0],
            rows: vec![],
            rhs: vec![],
        };
        assert_eq!(solve(&qp).unwrap_err(), QpError::NotPositiveDefinite);
    }
}
