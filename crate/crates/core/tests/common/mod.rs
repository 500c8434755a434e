#![allow(dead_code)]

use std::path::PathBuf;

use vecprox::funcspace::{Combine, ScalarFunction};
use vecprox::problem::{self, ProblemFile};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus() -> Vec<ProblemFile> {
    problem::load_corpus(&corpus_dir())
        .expect("corpus loads")
        .into_iter()
        .map(|(_, p)| p)
        .collect()
}

pub fn named(name: &str) -> ProblemFile {
    ProblemFile::load(&corpus_dir().join(format!("{name}.json"))).expect("corpus problem loads")
}

/// Points where two atoms of a max/min function tie, found by scanning
/// horizontal lines of the box and bisecting sign changes of atom
/// differences.
pub fn kink_points(f: &ScalarFunction, lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let nf = f.normalize();
    if nf.combine == Combine::Smooth || nf.atoms.len() < 2 {
        return vec![];
    }
    let lines: Vec<Option<f64>> = if lo.len() == 1 {
        vec![None]
    } else {
        (0..11).map(|j| Some(lo[1] + (hi[1] - lo[1]) * j as f64 / 10.0)).collect()
    };
    let at = |t: f64, y: Option<f64>| match y {
        None => vec![t],
        Some(y) => vec![t, y],
    };
    let mut out = Vec::new();
    let steps = 2000;
    for y in lines {
        for a in 0..nf.atoms.len() {
            for b in a + 1..nf.atoms.len() {
                let diff = |t: f64| {
                    let x = at(t, y);
                    nf.atoms[a].eval(&x) - nf.atoms[b].eval(&x)
                };
                for s in 0..steps {
                    let (mut l, mut r) = (
                        lo[0] + (hi[0] - lo[0]) * s as f64 / steps as f64,
                        lo[0] + (hi[0] - lo[0]) * (s + 1) as f64 / steps as f64,
                    );
                    let (dl, dr) = (diff(l), diff(r));
                    if dl == 0.0 {
                        out.push(at(l, y));
                        continue;
                    }
                    if dl.signum() == dr.signum() {
                        continue;
                    }
                    for _ in 0..100 {
                        let m = 0.5 * (l + r);
                        if diff(m).signum() == dl.signum() {
                            l = m;
                        } else {
                            r = m;
                        }
                    }
                    let t = if diff(l).abs() <= diff(r).abs() { l } else { r };
                    out.push(at(t, y));
                }
            }
        }
    }
    out
}

/// `count` points spread over the box: a regular grid in 1-D, an
/// `k x k` grid in 2-D with `k = ceil(sqrt(count))`.
pub fn spread_points(lo: &[f64], hi: &[f64], count: usize) -> Vec<Vec<f64>> {
    if lo.len() == 1 {
        return (0..count)
            .map(|j| vec![lo[0] + (hi[0] - lo[0]) * (j as f64 + 0.5) / count as f64])
            .collect();
    }
    let k = (count as f64).sqrt().ceil() as usize;
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            out.push(vec![
                lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / k as f64,
                lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / k as f64,
            ]);
        }
    }
    out.truncate(count);
    out
}

/// Extreme points of a finite planar or linear point set (monotone chain,
/// collinear points dropped).
pub fn hull_vertices(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut p: Vec<Vec<f64>> = points.to_vec();
    p.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    p.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= 1e-12));
    if p.len() <= 1 {
        return p;
    }
    if p[0].len() == 1 {
        return vec![p[0].clone(), p[p.len() - 1].clone()];
    }
    let cross = |o: &[f64], a: &[f64], b: &[f64]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for q in &p {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], q) <= 1e-12 {
            lower.pop();
        }
        lower.push(q.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for q in p.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], q) <= 1e-12 {
            upper.pop();
        }
        upper.push(q.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Do two finite point sets coincide up to `tol` in every coordinate?
pub fn same_point_sets(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    let close = |x: &Vec<f64>, y: &Vec<f64>| x.iter().zip(y).all(|(u, v)| (u - v).abs() <= tol);
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| close(x, y))) && b.iter().all(|y| a.iter().any(|x| close(x, y)))
}
