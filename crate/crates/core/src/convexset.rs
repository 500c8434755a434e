//! Closed convex feasible regions with projection, distance and normal cones.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::minnorm;
use crate::qp::{self, Qp};

pub const DEFAULT_ACTIVE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetError {
    #[error("box bounds must satisfy lower <= upper componentwise")]
    InvalidBounds,
    #[error("ball radius must be positive")]
    NonPositiveRadius,
    #[error("polyhedron is empty")]
    EmptyPolyhedron,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is not in the set (distance {0:e})")]
    NotInSet(f64),
    #[error("non-finite set data")]
    NonFinite,
}

/// Serialized form of a set, before validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetKind {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `{ y : a y <= b }`
    Polyhedron { a: Matrix, b: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    WholeSpace { dim: usize },
}

/// A validated nonempty closed convex set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetKind", into = "SetKind")]
pub struct ConvexSet {
    kind: SetKind,
}

impl TryFrom<SetKind> for ConvexSet {
    type Error = SetError;

    fn try_from(kind: SetKind) -> Result<Self, SetError> {
        ConvexSet::new(kind)
    }
}

impl From<ConvexSet> for SetKind {
    fn from(s: ConvexSet) -> Self {
        s.kind
    }
}

/// Finitely generated normal cone: nonnegative combinations of `rays`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalConeRep {
    pub rays: Vec<Vec<f64>>,
}

impl NormalConeRep {
    /// Euclidean distance from `v` to the cone.
    pub fn distance_to(&self, v: &[f64]) -> f64 {
        let neg: Vec<Vec<f64>> = self.rays.iter().map(|r| linalg::scale(r, -1.0)).collect();
        minnorm::min_norm_point(&[v.to_vec()], &neg).norm
    }
}

impl ConvexSet {
    pub fn new(kind: SetKind) -> Result<Self, SetError> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match &kind {
            SetKind::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return Err(SetError::DimensionMismatch {
                        expected: lower.len(),
                        got: upper.len(),
                    });
                }
                if !finite(lower) || !finite(upper) {
                    return Err(SetError::NonFinite);
                }
                if lower.iter().zip(upper).any(|(l, u)| l > u) {
                    return Err(SetError::InvalidBounds);
                }
            }
            SetKind::Polyhedron { a, b } => {
                if a.len() != b.len() {
                    return Err(SetError::DimensionMismatch {
                        expected: a.len(),
                        got: b.len(),
                    });
                }
                let n = a.first().map_or(0, Vec::len);
                if let Some(row) = a.iter().find(|r| r.len() != n) {
                    return Err(SetError::DimensionMismatch {
                        expected: n,
                        got: row.len(),
                    });
                }
                if !finite(b) || a.iter().any(|r| !finite(r)) {
                    return Err(SetError::NonFinite);
                }
                // nonemptiness: projecting the origin succeeds iff the set is nonempty
                polyhedron_projection(a, b, &vec![0.0; n]).map_err(|_| SetError::EmptyPolyhedron)?;
            }
            SetKind::Ball { center, radius } => {
                if !finite(center) || !radius.is_finite() {
                    return Err(SetError::NonFinite);
                }
                if *radius <= 0.0 {
                    return Err(SetError::NonPositiveRadius);
                }
            }
            SetKind::WholeSpace { .. } => {}
        }
        Ok(ConvexSet { kind })
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, SetError> {
        Self::new(SetKind::Box { lower, upper })
    }

    pub fn polyhedron(a: Matrix, b: Vec<f64>) -> Result<Self, SetError> {
        Self::new(SetKind::Polyhedron { a, b })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self, SetError> {
        Self::new(SetKind::Ball { center, radius })
    }

    pub fn whole_space(dim: usize) -> Self {
        ConvexSet {
            kind: SetKind::WholeSpace { dim },
        }
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SetKind::Box { lower, .. } => lower.len(),
            SetKind::Polyhedron { a, .. } => a.first().map_or(0, Vec::len),
            SetKind::Ball { center, .. } => center.len(),
            SetKind::WholeSpace { dim } => *dim,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), SetError> {
        if x.len() != self.dim() {
            return Err(SetError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            SetKind::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect(),
            SetKind::Polyhedron { a, b } => {
                polyhedron_projection(a, b, x).expect("projection onto a validated nonempty polyhedron")
            }
            SetKind::Ball { center, radius } => {
                let d = linalg::dist(x, center);
                if d <= *radius {
                    x.to_vec()
                } else {
                    let mut y = center.clone();
                    linalg::axpy(&mut y, radius / d, &linalg::sub(x, center));
                    y
                }
            }
            SetKind::WholeSpace { .. } => x.to_vec(),
        }
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        match &self.kind {
            SetKind::Ball { center, radius } => (linalg::dist(x, center) - radius).max(0.0),
            _ => linalg::dist(x, &self.project(x)),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim() && self.distance(x) <= tol
    }

    /// Generators of `N(x; S)`: outward normals of the constraints active
    /// within `active_tol`.
    pub fn normal_cone(&self, x: &[f64], active_tol: f64) -> Result<NormalConeRep, SetError> {
        self.check_dim(x)?;
        let d = self.distance(x);
        if d > active_tol {
            return Err(SetError::NotInSet(d));
        }
        let n = x.len();
        let unit = |i: usize, s: f64| {
            let mut e = vec![0.0; n];
            e[i] = s;
            e
        };
        let rays = match &self.kind {
            SetKind::Box { lower, upper } => {
                let mut rays = Vec::new();
                for i in 0..n {
                    if x[i] <= lower[i] + active_tol {
                        rays.push(unit(i, -1.0));
                    }
                    if x[i] >= upper[i] - active_tol {
                        rays.push(unit(i, 1.0));
                    }
                }
                rays
            }
            SetKind::Polyhedron { a, b } => a
                .iter()
                .zip(b)
                .filter(|(row, bi)| {
                    let nr = linalg::norm(row);
                    nr > 0.0 && (*bi - linalg::dot(row, x)) / nr <= active_tol
                })
                .map(|(row, _)| row.clone())
                .collect(),
            SetKind::Ball { center, radius } => {
                let r = linalg::sub(x, center);
                if linalg::norm(&r) >= radius - active_tol {
                    vec![r]
                } else {
                    vec![]
                }
            }
            SetKind::WholeSpace { .. } => vec![],
        };
        Ok(NormalConeRep { rays })
    }

    /// A box enclosing the set, or `anchor ± 10` when the set is unbounded
    /// or its extent is not known in closed form.
    pub fn bounding_box(&self, anchor: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            SetKind::Box { lower, upper } => (lower.clone(), upper.clone()),
            SetKind::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            SetKind::Polyhedron { a, b } => polyhedron_box(a, b, anchor),
            SetKind::WholeSpace { .. } => (
                anchor.iter().map(|c| c - 10.0).collect(),
                anchor.iter().map(|c| c + 10.0).collect(),
            ),
        }
    }

    /// A random point of the set: uniform for boxes and balls, rejection
    /// from `[lo, hi]` otherwise (projected after 1000 misses).
    pub fn sample<R: Rng>(&self, lo: &[f64], hi: &[f64], rng: &mut R) -> Vec<f64> {
        let n = self.dim();
        match &self.kind {
            SetKind::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                .collect(),
            SetKind::Ball { center, radius } => {
                let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let gn = linalg::norm(&g).max(1e-300);
                let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
                let mut y = center.clone();
                linalg::axpy(&mut y, r / gn, &g);
                y
            }
            _ => {
                let mut draw = || -> Vec<f64> { lo.iter().zip(hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect() };
                for _ in 0..1000 {
                    let y = draw();
                    if self.contains(&y, 0.0) {
                        return y;
                    }
                }
                self.project(&draw())
            }
        }
    }
}

/// Extent of a polyhedron per coordinate. Projecting far points along `±e_j`
/// detects unbounded directions (which get `anchor ± 10`); a bounded
/// polyhedron in at most three dimensions gets its exact vertex extents.
fn polyhedron_box(a: &Matrix, b: &[f64], anchor: &[f64]) -> (Vec<f64>, Vec<f64>) {
    const FAR: f64 = 1e6;
    let n = anchor.len();
    let mut lo: Vec<f64> = anchor.iter().map(|c| c - 10.0).collect();
    let mut hi: Vec<f64> = anchor.iter().map(|c| c + 10.0).collect();
    let mut bounded = true;
    for j in 0..n {
        for (dir, slot) in [(-1.0, &mut lo), (1.0, &mut hi)] {
            let mut p = anchor.to_vec();
            p[j] += dir * FAR;
            match polyhedron_projection(a, b, &p) {
                Ok(q) if (q[j] - anchor[j]).abs() < 1e-3 * FAR => slot[j] = q[j],
                _ => bounded = false,
            }
        }
    }
    if bounded && n <= 3 && a.len() >= n {
        let mut vlo = vec![f64::INFINITY; n];
        let mut vhi = vec![f64::NEG_INFINITY; n];
        let rows = a.len();
        let mut pick: Vec<usize> = (0..n).collect();
        loop {
            let m = nalgebra::DMatrix::from_fn(n, n, |r, c| a[pick[r]][c]);
            let rhs = nalgebra::DVector::from_iterator(n, pick.iter().map(|&r| b[r]));
            if let Some(v) = m.full_piv_lu().solve(&rhs) {
                let v: Vec<f64> = v.iter().cloned().collect();
                let scale = 1.0 + linalg::norm(&v);
                if a.iter().zip(b).all(|(row, bi)| linalg::dot(row, &v) <= bi + 1e-10 * scale) {
                    for j in 0..n {
                        vlo[j] = vlo[j].min(v[j]);
                        vhi[j] = vhi[j].max(v[j]);
                    }
                }
            }
            // next n-subset of the rows in lexicographic order
            let Some(i) = (0..n).rev().find(|&i| pick[i] < rows - n + i) else {
                break;
            };
            pick[i] += 1;
            for t in i + 1..n {
                pick[t] = pick[t - 1] + 1;
            }
        }
        if vlo.iter().all(|v| v.is_finite()) {
            return (vlo, vhi);
        }
    }
    (lo, hi)
}

fn polyhedron_projection(a: &Matrix, b: &[f64], x: &[f64]) -> Result<Vec<f64>, qp::QpError> {
    let problem = Qp {
        hessian: linalg::identity(x.len()),
        linear: x.iter().map(|v| -v).collect(),
        rows: a.iter().map(|r| r.iter().map(|v| -v).collect()).collect(),
        rhs: b.iter().map(|v| -v).collect(),
    };
    qp::solve(&problem).map(|s| s.x)
}

pub fn project(s: &ConvexSet, x: &[f64]) -> Vec<f64> {
    s.project(x)
}

pub fn distance(s: &ConvexSet, x: &[f64]) -> f64 {
    s.distance(x)
}

pub fn normal_cone(s: &ConvexSet, x: &[f64], active_tol: f64) -> Result<NormalConeRep, SetError> {
    s.normal_cone(x, active_tol)
}

/// Relative probe offset for the distance-gradient estimates.
const PROBE_RADIUS: f64 = 1e-5;

/// Limits of gradients of `d_S` approaching `x` from random directions.
///
/// Along each direction `g` the unit vector `(y - P(y)) / d(y)` is taken at
/// `y = x + t g` for `t`, `2t`, `4t` and extrapolated to `t -> 0`, which
/// removes the curvature error of round sets without pushing `t` into the
/// range where rounding dominates. Directions entering the set give zero;
/// directions grazing the boundary are redrawn.
pub fn estimate_distance_subgradients(s: &ConvexSet, x: &[f64], samples: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd157);
    let n = x.len();
    let r = PROBE_RADIUS * (1.0 + linalg::norm(x));
    let unit_off = |g: &[f64], t: f64| {
        let mut y = x.to_vec();
        linalg::axpy(&mut y, t, g);
        let p = s.project(&y);
        let d = linalg::dist(&y, &p);
        (linalg::scale(&linalg::sub(&y, &p), 1.0 / d.max(1e-300)), d)
    };
    (0..samples)
        .map(|_| {
            for _ in 0..100 {
                let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let g = linalg::scale(&g, 1.0 / linalg::norm(&g).max(1e-300));
                let t = r * (0.5 + 0.5 * rng.random::<f64>());
                let (u1, d1) = unit_off(&g, t);
                if d1 == 0.0 {
                    return vec![0.0; n];
                }
                if d1 < 0.1 * t {
                    continue;
                }
                let (u2, _) = unit_off(&g, 2.0 * t);
                let (u4, _) = unit_off(&g, 4.0 * t);
                let u: Vec<f64> = (0..n).map(|i| (8.0 * u1[i] - 6.0 * u2[i] + u4[i]) / 3.0).collect();
                return linalg::scale(&u, 1.0 / linalg::norm(&u));
            }
            vec![0.0; n]
        })
        .collect()
}

/// Confirms every sampled element of `∂d_S(x)` lies in `B[0,1] ∩ N(x;S)`
/// within 1e-6.
pub fn distance_subdiff_estimate_check(s: &ConvexSet, x: &[f64], samples: usize) -> bool {
    let Ok(cone) = s.normal_cone(x, DEFAULT_ACTIVE_TOL) else {
        return false;
    };
    estimate_distance_subgradients(s, x, samples)
        .iter()
        .all(|u| linalg::norm(u) <= 1.0 + 1e-6 && cone.distance_to(u) <= 1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simplex2() -> ConvexSet {
        ConvexSet::polyhedron(vec![vec![1.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]], vec![1.0, 0.0, 0.0]).unwrap()
    }

    /// Projection onto a 2-D polygon by enumerating faces: the unconstrained
    /// point, each edge's foot point and each vertex; keep the nearest feasible.
    fn face_enumeration(a: &Matrix, b: &[f64], x: &[f64]) -> Vec<f64> {
        let feasible = |y: &[f64]| a.iter().zip(b).all(|(r, bi)| linalg::dot(r, y) <= bi + 1e-12);
        let mut cands = vec![x.to_vec()];
        for (r, bi) in a.iter().zip(b) {
            let t = (linalg::dot(r, x) - bi) / linalg::dot(r, r);
            cands.push(linalg::sub(x, &linalg::scale(r, t)));
        }
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                let det = a[i][0] * a[j][1] - a[i][1] * a[j][0];
                if det.abs() > 1e-12 {
                    cands.push(vec![(b[i] * a[j][1] - a[i][1] * b[j]) / det, (a[i][0] * b[j] - b[i] * a[j][0]) / det]);
                }
            }
        }
        cands
            .into_iter()
            .filter(|c| feasible(c))
            .min_by(|p, q| linalg::dist(p, x).total_cmp(&linalg::dist(q, x)))
            .unwrap()
    }

    #[test]
    fn projection_examples() {
        let bx = ConvexSet::boxed(vec![-1.0; 2], vec![1.0; 2]).unwrap();
        assert_eq!(bx.project(&[2.0, 0.0]), vec![1.0, 0.0]);
        let ball = ConvexSet::ball(vec![0.0; 2], 1.0).unwrap();
        assert!(linalg::max_abs_diff(&ball.project(&[3.0, 4.0]), &[0.6, 0.8]) < 1e-15);
        let p = simplex2().project(&[1.0, 1.0]);
        assert!(linalg::max_abs_diff(&p, &[0.5, 0.5]) < 1e-14);
    }

    #[test]
    fn polyhedron_projection_matches_face_enumeration() {
        let s = simplex2();
        let SetKind::Polyhedron { a, b } = s.kind().clone() else { unreachable!() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let x = vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let got = s.project(&x);
            let want = face_enumeration(&a, &b, &x);
            assert!(linalg::max_abs_diff(&got, &want) < 1e-12, "{x:?}: {got:?} vs {want:?}");
        }
    }

    #[test]
    fn bounding_boxes() {
        let (lo, hi) = simplex2().bounding_box(&[0.2, 0.2]);
        assert_eq!((lo, hi), (vec![0.0, 0.0], vec![1.0, 1.0]));
        let half = ConvexSet::polyhedron(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        let (lo, hi) = half.bounding_box(&[0.0, 0.0]);
        assert_eq!(lo, vec![-10.0, -10.0]);
        assert!((hi[0] - 1.0).abs() < 1e-9 && hi[1] == 10.0);
    }

    #[test]
    fn distance_examples() {
        let unit = ConvexSet::boxed(vec![0.0], vec![1.0]).unwrap();
        assert_eq!(unit.distance(&[2.0]), 1.0);
        assert_eq!(unit.distance(&[0.5]), 0.0);
        let ball = ConvexSet::ball(vec![0.0; 2], 1.0).unwrap();
        assert_eq!(ball.distance(&[3.0, 4.0]), 4.0);
    }

    #[test]
    fn normal_cone_examples() {
        let bx = ConvexSet::boxed(vec![-1.0; 2], vec![1.0; 2]).unwrap();
        let c = bx.normal_cone(&[1.0, 1.0], DEFAULT_ACTIVE_TOL).unwrap();
        assert_eq!(c.rays, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(bx.normal_cone(&[0.0, 0.0], DEFAULT_ACTIVE_TOL).unwrap().rays.is_empty());
        let ball = ConvexSet::ball(vec![0.0; 2], 1.0).unwrap();
        assert_eq!(ball.normal_cone(&[1.0, 0.0], DEFAULT_ACTIVE_TOL).unwrap().rays, vec![vec![1.0, 0.0]]);
        assert!(matches!(bx.normal_cone(&[2.0, 0.0], DEFAULT_ACTIVE_TOL), Err(SetError::NotInSet(_))));
    }

    #[test]
    fn distance_subdiff_examples() {
        let ball = ConvexSet::ball(vec![0.0; 2], 1.0).unwrap();
        assert!(distance_subdiff_estimate_check(&ball, &[1.0, 0.0], 200));
        for u in estimate_distance_subgradients(&ball, &[1.0, 0.0], 200) {
            assert!(u[1].abs() < 1e-6 && u[0] >= -1e-12 && u[0] <= 1.0 + 1e-12);
        }
        let bx = ConvexSet::boxed(vec![0.0], vec![1.0]).unwrap();
        assert!(distance_subdiff_estimate_check(&bx, &[0.5], 50));
        assert!(estimate_distance_subgradients(&bx, &[0.5], 50).iter().all(|u| u[0] == 0.0));
        assert!(distance_subdiff_estimate_check(&bx, &[1.0], 200));
        let us = estimate_distance_subgradients(&bx, &[1.0], 200);
        assert!(us.iter().all(|u| u[0] == 0.0 || (u[0] - 1.0).abs() < 1e-12));
        assert!(us.iter().any(|u| u[0] == 1.0) && us.iter().any(|u| u[0] == 0.0));
    }

    #[test]
    fn validation() {
        assert_eq!(ConvexSet::boxed(vec![1.0], vec![0.0]), Err(SetError::InvalidBounds));
        assert_eq!(ConvexSet::ball(vec![0.0], 0.0), Err(SetError::NonPositiveRadius));
        assert_eq!(
            ConvexSet::polyhedron(vec![vec![1.0], vec![-1.0]], vec![0.0, -1.0]),
            Err(SetError::EmptyPolyhedron)
        );
        let s: Result<ConvexSet, _> = serde_json::from_str(r#"{"kind":"box","lower":[1],"upper":[0]}"#);
        assert!(s.is_err());
        let s: ConvexSet = serde_json::from_str(r#"{"kind":"ball","center":[0,0],"radius":1.5}"#).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"kind":"ball","center":[0.0,0.0],"radius":1.5}"#);
    }
}
