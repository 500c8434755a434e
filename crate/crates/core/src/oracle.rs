//! Brute-force ground truth for small instances.
//!
//! Nothing here uses the analytic gradients of the function grammar except
//! [`sampled_criticality`], which needs candidate subgradients to test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convexset::ConvexSet;
use crate::criticality::Verdict;
use crate::funcspace::{FuncError, ScalarFunction, SubdiffSet, VectorFunction, DEFAULT_ACTIVITY_TOL};
use crate::linalg;

pub const MAX_POINTS_PER_AXIS: usize = 201;
pub const MAX_GRID_POINTS: usize = 1_000_000;
pub const MAX_DIM: usize = 3;
pub const MAX_OBJECTIVES: usize = 4;
/// Strict-dominance margin.
pub const DOMINANCE_MARGIN: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid of {0} points exceeds the cap")]
    TooManyPoints(usize),
    #[error("dimension {0} exceeds the oracle limit")]
    DimensionTooLarge(usize),
    #[error("{0} objectives exceed the oracle limit")]
    TooManyObjectives(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("resolution too coarse to isolate kinks: {0}")]
    TooCoarse(String),
    #[error("the 1-D oracle needs a function of one variable")]
    NotOneDimensional,
    #[error(transparent)]
    Func(#[from] FuncError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points_per_axis: usize) -> Result<Self, OracleError> {
        let g = GridSpec {
            lower,
            upper,
            points_per_axis,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<usize, OracleError> {
        let n = self.lower.len();
        if n != self.upper.len() || n == 0 {
            return Err(OracleError::InvalidGrid("bounds have different lengths".into()));
        }
        if n > MAX_DIM {
            return Err(OracleError::DimensionTooLarge(n));
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(l <= u)) {
            return Err(OracleError::InvalidGrid("lower exceeds upper".into()));
        }
        if self.points_per_axis < 2 || self.points_per_axis > MAX_POINTS_PER_AXIS {
            return Err(OracleError::InvalidGrid(format!(
                "points per axis must lie in 2..={MAX_POINTS_PER_AXIS}"
            )));
        }
        let total = self.points_per_axis.checked_pow(n as u32).unwrap_or(usize::MAX);
        if total > MAX_GRID_POINTS {
            return Err(OracleError::TooManyPoints(total));
        }
        Ok(total)
    }

    pub fn point(&self, index: &[usize]) -> Vec<f64> {
        let k = (self.points_per_axis - 1) as f64;
        index
            .iter()
            .enumerate()
            .map(|(d, &i)| self.lower[d] + (self.upper[d] - self.lower[d]) * i as f64 / k)
            .collect()
    }

    /// Multi-indices in lexicographic order, last axis fastest.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        let n = self.lower.len();
        let p = self.points_per_axis;
        let total = p.pow(n as u32);
        (0..total)
            .map(|mut lin| {
                let mut idx = vec![0; n];
                for d in (0..n).rev() {
                    idx[d] = lin % p;
                    lin /= p;
                }
                idx
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: Vec<usize>,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

fn strictly_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x < *y - DOMINANCE_MARGIN)
}

/// Grid points that no other (feasible) grid point strictly dominates,
/// sorted by grid index.
pub fn grid_weak_pareto(f: &VectorFunction, grid: &GridSpec, set: Option<&ConvexSet>) -> Result<Vec<GridPoint>, OracleError> {
    grid.validate()?;
    if f.dim() != grid.lower.len() {
        return Err(FuncError::DimensionMismatch {
            expected: f.dim(),
            got: grid.lower.len(),
        }
        .into());
    }
    if f.m() > MAX_OBJECTIVES {
        return Err(OracleError::TooManyObjectives(f.m()));
    }
    let pts: Vec<GridPoint> = grid
        .indices()
        .into_par_iter()
        .filter_map(|index| {
            let x = grid.point(&index);
            if set.is_some_and(|s| !s.contains(&x, 1e-12)) {
                return None;
            }
            let values = f.eval(&x).expect("dimension checked");
            Some(GridPoint { index, x, values })
        })
        .collect();
    let keep: Vec<bool> = match f.m() {
        1 => {
            let best = pts.iter().map(|p| p.values[0]).fold(f64::INFINITY, f64::min);
            pts.iter().map(|p| !(best < p.values[0] - DOMINANCE_MARGIN)).collect()
        }
        2 => {
            // sweep in increasing f1, tracking the smallest f2 among points
            // whose f1 is below the current one by more than the margin
            let mut order: Vec<usize> = (0..pts.len()).collect();
            order.sort_by(|&a, &b| pts[a].values[0].total_cmp(&pts[b].values[0]));
            let mut keep = vec![true; pts.len()];
            let mut lead = 0;
            let mut min_f2 = f64::INFINITY;
            for &i in &order {
                let f1 = pts[i].values[0];
                while lead < order.len() && pts[order[lead]].values[0] < f1 - DOMINANCE_MARGIN {
                    min_f2 = min_f2.min(pts[order[lead]].values[1]);
                    lead += 1;
                }
                if min_f2 < pts[i].values[1] - DOMINANCE_MARGIN {
                    keep[i] = false;
                }
            }
            keep
        }
        _ => pts
            .par_iter()
            .map(|p| !pts.iter().any(|q| strictly_dominates(&q.values, &p.values)))
            .collect(),
    };
    Ok(pts.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect())
}

/// Front as CSV: `x_1..x_n, f_1..f_m`, one row per grid point.
pub fn front_csv(points: &[GridPoint], n: usize, m: usize) -> String {
    let mut header: Vec<String> = (1..=n).map(|i| format!("x_{i}")).collect();
    header.extend((1..=m).map(|i| format!("f_{i}")));
    let mut out = header.join(",");
    out.push('\n');
    for p in points {
        let row: Vec<String> = p.x.iter().chain(&p.values).map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Candidate subgradients of one piece: generators, their barycenter,
/// pairwise midpoints and random convex combinations.
fn piece_candidates(gens: &[Vec<f64>], hull: bool, rng: &mut ChaCha8Rng, draws: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = gens.to_vec();
    if !hull || gens.len() < 2 {
        return out;
    }
    let n = gens[0].len();
    let k = gens.len();
    out.push(linalg::combine(&vec![1.0 / k as f64; k], gens, n));
    for a in 0..k {
        for b in a + 1..k {
            out.push(linalg::scale(&linalg::add(&gens[a], &gens[b]), 0.5));
        }
    }
    for _ in 0..draws {
        let w: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let s: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|v| v / s).collect();
        out.push(linalg::combine(&w, gens, n));
    }
    out
}

/// Monte-Carlo reading of the criticality definition: some candidate `ω`
/// from some component must satisfy `<ω, y - x> >= -1e-8` for every sampled
/// feasible `y`.
pub fn sampled_criticality(f: &VectorFunction, s: &ConvexSet, x: &[f64], directions: usize, seed: u64) -> Result<Verdict, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    let (lo, hi) = s.bounding_box(x);
    let mut ys = Vec::with_capacity(directions);
    for j in 0..directions {
        if j % 2 == 0 {
            ys.push(s.sample(&lo, &hi, &mut rng));
        } else {
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let t = 10f64.powf(rng.random_range(-4.0..0.0)) / linalg::norm(&g).max(1e-300);
            let mut y = x.to_vec();
            linalg::axpy(&mut y, t, &g);
            ys.push(s.project(&y));
        }
    }
    let diffs: Vec<Vec<f64>> = ys.iter().map(|y| linalg::sub(y, x)).collect();
    for fi in f.components() {
        let sub = match fi.limiting_subdiff(x, DEFAULT_ACTIVITY_TOL) {
            Ok(sub) => sub,
            Err(FuncError::TangentialCrossing | FuncError::DegenerateCrossing) => return Ok(Verdict::Inconclusive),
            Err(e) => return Err(e.into()),
        };
        for piece in &sub.pieces {
            for omega in piece_candidates(&piece.generators, piece.hull, &mut rng, 1000) {
                if diffs.iter().all(|d| linalg::dot(&omega, d) >= -1e-8) {
                    return Ok(Verdict::Critical);
                }
            }
        }
    }
    Ok(Verdict::NotCritical)
}

/// A finite union of closed intervals on the real line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Set1d {
    pub intervals: Vec<(f64, f64)>,
}

impl Set1d {
    pub fn points(ps: &[f64]) -> Self {
        Set1d {
            intervals: ps.iter().map(|&p| (p, p)).collect(),
        }
    }

    pub fn from_subdiff(s: &SubdiffSet) -> Self {
        let mut intervals = Vec::new();
        for p in &s.pieces {
            let vals: Vec<f64> = p.generators.iter().map(|g| g[0]).collect();
            if vals.is_empty() {
                continue;
            }
            if p.hull {
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                intervals.push((lo, hi));
            } else {
                intervals.extend(vals.iter().map(|&v| (v, v)));
            }
        }
        Set1d { intervals }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    fn dist(&self, t: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| if t < a { a - t } else if t > b { t - b } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    }

    /// `sup_{t ∈ self} dist(t, other)`; the sup over an interval is attained
    /// at an endpoint or at the midpoint of a gap of `other`.
    fn excess(&self, other: &Set1d) -> f64 {
        let mut probes = Vec::new();
        let mut ends: Vec<f64> = other.intervals.iter().flat_map(|&(a, b)| [a, b]).collect();
        ends.sort_by(f64::total_cmp);
        for &(a, b) in &self.intervals {
            probes.push(a);
            probes.push(b);
            for w in ends.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                if mid > a && mid < b {
                    probes.push(mid);
                }
            }
        }
        probes.iter().map(|&t| other.dist(t)).fold(0.0, f64::max)
    }

    pub fn hausdorff(&self, other: &Set1d) -> f64 {
        match (self.is_empty(), other.is_empty()) {
            (true, true) => 0.0,
            (false, false) => self.excess(other).max(other.excess(self)),
            _ => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limit1d {
    /// Limiting subdifferential as points plus, when `hull`, everything
    /// between them.
    pub points: Vec<f64>,
    pub hull: bool,
    /// Regular subdifferential at `x` as an interval, `None` when empty.
    pub frechet_at_x: Option<(f64, f64)>,
}

impl Limit1d {
    pub fn as_set(&self) -> Set1d {
        if self.hull {
            let lo = self.points.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = self.points.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Set1d { intervals: vec![(lo, hi)] }
        } else {
            Set1d::points(&self.points)
        }
    }
}

/// One-sided slopes of `f` at `t` by second-order differences with step `h`.
fn one_sided(f: &ScalarFunction, t: f64, h: f64) -> (f64, f64) {
    let e = |s: f64| f.eval(&[s]);
    let f0 = e(t);
    let right = (-3.0 * f0 + 4.0 * e(t + h) - e(t + 2.0 * h)) / (2.0 * h);
    let left = (3.0 * f0 - 4.0 * e(t - h) + e(t - 2.0 * h)) / (2.0 * h);
    (left, right)
}

/// Reconstructs the limiting subdifferential of a function of one variable
/// from function values alone.
///
/// The regular subdifferential at a point is `[D^-, D^+]` when the one-sided
/// slopes satisfy `D^- <= D^+` and empty otherwise. Limits of regular
/// subgradients from either side are extrapolated from the sample points
/// nearest to `x`; together with the regular subdifferential at `x` itself
/// they make up the limiting set.
pub fn frechet_limit_subdiff_1d(f: &ScalarFunction, x: f64, radius: f64, resolution: usize) -> Result<Limit1d, OracleError> {
    if f.validate()? != 1 {
        return Err(OracleError::NotOneDimensional);
    }
    if resolution < 16 {
        return Err(OracleError::TooCoarse(format!("resolution {resolution} is below 16")));
    }
    let spacing = radius / resolution as f64;
    // the stencil [t - 2h, t + 2h] stays inside one sampling cell
    let h = spacing / 4.0;
    let noise = |t: f64| 1e-12 * (1.0 + f.eval(&[t]).abs()) / h;
    let regular = |t: f64| -> Option<(f64, f64)> {
        let (l, r) = one_sided(f, t, h);
        let tol = 1e-6 * (1.0 + l.abs().max(r.abs())) + noise(t);
        (l <= r + tol).then_some((l.min(r), l.max(r)))
    };
    let side_limit = |dir: f64| -> Result<f64, OracleError> {
        let mut slopes = Vec::with_capacity(3);
        for j in 1..=3 {
            let t = x + dir * spacing * j as f64;
            let (lo, hi) = regular(t).ok_or_else(|| OracleError::TooCoarse(format!("kink near {t}")))?;
            if hi - lo > 1e-6 * (1.0 + hi.abs().max(lo.abs())) + noise(t) {
                return Err(OracleError::TooCoarse(format!("kink near {t}")));
            }
            slopes.push(0.5 * (lo + hi));
        }
        let curvature = slopes[0] - 2.0 * slopes[1] + slopes[2];
        if curvature.abs() > 1e-3 * (1.0 + slopes[0].abs()) {
            return Err(OracleError::TooCoarse(format!("slopes jump near {x}")));
        }
        // linear extrapolation to the offset zero
        Ok(2.0 * slopes[0] - slopes[1])
    };
    let left = side_limit(-1.0)?;
    let right = side_limit(1.0)?;
    let at_x = regular(x);
    let mut pts = vec![left, right];
    if let Some((a, b)) = at_x {
        pts.push(a);
        pts.push(b);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-6);
    let hull = at_x.is_some_and(|(a, b)| b - a > 1e-6 * (1.0 + a.abs().max(b.abs())) + noise(x));
    Ok(Limit1d {
        points: pts,
        hull,
        frechet_at_x: at_x,
    })
}
