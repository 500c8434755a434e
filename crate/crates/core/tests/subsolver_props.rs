mod common;

use common::named;
use proptest::prelude::*;
use vecprox::linalg;
use vecprox::ppa::lipschitz_for;
use vecprox::problem::ProblemFile;
use vecprox::subsolver::{self, SubproblemSpec, SubsolverConfig};

fn unit_positive(raw: &[f64]) -> Vec<f64> {
    let n = linalg::norm(raw);
    raw.iter().map(|v| v / n).collect()
}

fn anchor_in(p: &ProblemFile, t: &[f64]) -> Vec<f64> {
    let (lo, hi) = p.feasible_set.bounding_box(&p.x0);
    let x: Vec<f64> = (0..p.dimension).map(|j| lo[j] + t[j] * (hi[j] - lo[j])).collect();
    p.feasible_set.project(&x)
}

fn cfg(seed: u64) -> SubsolverConfig {
    SubsolverConfig {
        seed,
        ..SubsolverConfig::default()
    }
}

/// Minimizes a convex function on `[lo, hi]`.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > 1e-12 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    f(0.5 * (lo + hi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn returned_points_are_weak_pareto_members_of_the_descent_set(
        which in prop::sample::select(vec!["P1", "P2", "P3", "P4", "P5", "P7", "P8"]),
        t in prop::collection::vec(0.0..1.0f64, 2),
        lambda in 0.1..10.0f64,
        eps in prop::collection::vec(0.1..1.0f64, 2),
        seed in any::<u64>(),
    ) {
        let p = named(which);
        let anchor = anchor_in(&p, &t);
        let lip = lipschitz_for(&p.objectives, &p.feasible_set, &p.x0);
        let spec = SubproblemSpec::new(&p.objectives, &p.feasible_set, anchor.clone(), lambda, unit_positive(&eps[..p.objectives.m()]), lip).unwrap();
        let r = subsolver::solve(&spec, &cfg(seed)).unwrap();
        prop_assert!(r.weak_pareto_defect >= -1e-9, "{} defect {}", which, r.weak_pareto_defect);
        prop_assert!(p.feasible_set.contains(&r.point, 1e-9));
        let at_anchor = p.objectives.eval(&anchor).unwrap();
        let at_point = p.objectives.eval(&r.point).unwrap();
        for (v, c) in at_point.iter().zip(&at_anchor) {
            prop_assert!(*v <= c + 1e-9, "{} leaves the descent set", which);
        }
        prop_assert_eq!(subsolver::solve(&spec, &cfg(seed)).unwrap(), r);
    }

    #[test]
    fn convex_subproblems_reach_the_weighted_minimum(
        which in prop::sample::select(vec!["P1", "P2"]),
        t in 0.0..1.0f64,
        lambda in 0.1..10.0f64,
        eps in prop::collection::vec(0.1..1.0f64, 2),
    ) {
        let p = named(which);
        let anchor = anchor_in(&p, &[t]);
        let lip = lipschitz_for(&p.objectives, &p.feasible_set, &p.x0);
        let spec = SubproblemSpec::new(&p.objectives, &p.feasible_set, anchor, lambda, unit_positive(&eps[..p.objectives.m()]), lip).unwrap();
        let r = subsolver::solve(&spec, &cfg(0)).unwrap();
        let (lo, hi) = p.feasible_set.bounding_box(&p.x0);
        // exact penalty for the descent constraints keeps the function convex
        let phi = |x: f64| {
            let v = spec.prox_values(&[x]);
            let f = p.objectives.eval(&[x]).unwrap();
            let weighted: f64 = v.iter().zip(&r.scalarization_weights).map(|(a, z)| a * z).sum();
            let excess: f64 = f.iter().zip(&spec.anchor_values).map(|(a, c)| (a - c).max(0.0)).sum();
            weighted + 1e6 * excess
        };
        let best = golden_section(phi, lo[0], hi[0]);
        prop_assert!((r.objective - best).abs() <= 1e-5, "{} {} vs {}", which, r.objective, best);
    }
}
