mod common;

use common::{hull_vertices, same_point_sets};
use proptest::prelude::*;
use vecprox::funcspace::{FuncError, ScalarFunction, SmoothAtom, SubdiffSet, DEFAULT_ACTIVITY_TOL};
use vecprox::linalg;
use vecprox::minnorm::min_norm_point;
use vecprox::oracle;

const N: usize = 2;

fn coef() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, N)
}

fn leaf_atom() -> impl Strategy<Value = SmoothAtom> {
    prop_oneof![
        (prop::collection::vec(coef(), N), coef()).prop_map(|(c, k)| SmoothAtom::affine(c, k)),
        (prop::collection::vec(coef(), N), 0.1..2.0f64, coef()).prop_map(|(c, s, o)| SmoothAtom::norm_sq_shift(c, s, o)),
        (prop::collection::vec(coef(), 3), prop::collection::vec(coef(), N), coef()).prop_map(|(q, l, k)| {
            SmoothAtom::quadratic(vec![vec![q[0], q[1]], vec![q[1], q[2]]], l, k)
        }),
        prop::collection::vec((coef(), 0u32..4, 0u32..4), 1..5).prop_map(|terms| {
            SmoothAtom::polynomial(N, terms.into_iter().map(|(c, a, b)| (c, vec![a, b])).collect())
        }),
    ]
}

fn atom() -> impl Strategy<Value = SmoothAtom> {
    let exp_leaf = leaf_atom().prop_map(|a| SmoothAtom::exp(scale_down(a)));
    let base = prop_oneof![leaf_atom(), exp_leaf];
    base.prop_recursive(2, 6, 3, |inner| prop::collection::vec(inner, 2..3).prop_map(|atoms| SmoothAtom::Sum { atoms }))
}

/// Keeps exponentials of random atoms in a moderate range.
fn scale_down(a: SmoothAtom) -> SmoothAtom {
    SmoothAtom::Sum {
        atoms: vec![a, SmoothAtom::constant(N, -1.0)],
    }
}

fn nonsmooth() -> impl Strategy<Value = ScalarFunction> {
    (prop::collection::vec(leaf_atom(), 2..4), any::<bool>())
        .prop_map(|(atoms, max)| if max { ScalarFunction::max_of(atoms) } else { ScalarFunction::min_of(atoms) })
}

/// Shifts constants so every atom of `f` takes the same value at `p`.
fn tie_at(atoms: &[SmoothAtom], p: &[f64]) -> Vec<SmoothAtom> {
    atoms
        .iter()
        .map(|a| SmoothAtom::Sum {
            atoms: vec![a.clone(), SmoothAtom::constant(N, -a.eval(p))],
        })
        .collect()
}

fn distance_to_minkowski(v: &[f64], a: &SubdiffSet, b: &SubdiffSet) -> f64 {
    let mut best = f64::INFINITY;
    for pa in a.convex_pieces() {
        for pb in b.convex_pieces() {
            let sums: Vec<Vec<f64>> = pa
                .iter()
                .flat_map(|x| pb.iter().map(move |y| linalg::sub(&linalg::add(x, y), v)))
                .collect();
            best = best.min(min_norm_point(&sums, &[]).norm);
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradients_match_central_differences(a in atom(), pts in prop::collection::vec(point(), 100)) {
        let h = 1e-5;
        for x in &pts {
            let g = a.grad(x);
            for j in 0..N {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (a.eval(&xp) - a.eval(&xm)) / (2.0 * h);
                prop_assert!((fd - g[j]).abs() <= 1e-6 * g[j].abs().max(1.0), "{fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn clarke_is_hull_of_limiting(f in nonsmooth(), x in point(), tie in any::<bool>()) {
        let f = if tie {
            let atoms = f.normalize().atoms;
            let tied = tie_at(&atoms, &x);
            if matches!(f.kind, vecprox::funcspace::FunctionKind::MaxOf { .. }) {
                ScalarFunction::max_of(tied)
            } else {
                ScalarFunction::min_of(tied)
            }
        } else {
            f
        };
        let lim = match f.limiting_subdiff(&x, DEFAULT_ACTIVITY_TOL) {
            Err(FuncError::DegenerateCrossing | FuncError::TangentialCrossing) => return Ok(()),
            other => other.unwrap(),
        };
        let clarke = f.clarke_subdiff(&x, DEFAULT_ACTIVITY_TOL).unwrap();
        let expected = hull_vertices(&lim.all_generators());
        prop_assert!(same_point_sets(&expected, &clarke.hull_vertices(), 1e-12));
    }

    #[test]
    fn limiting_graph_is_closed_across_kinks(
        atoms in prop::collection::vec(leaf_atom(), 2..3),
        p in point(),
        dir in prop::collection::vec(-1.0..1.0f64, N),
    ) {
        let f = ScalarFunction::min_of(tie_at(&atoms, &p));
        let at_p = match f.limiting_subdiff(&p, DEFAULT_ACTIVITY_TOL) {
            Err(FuncError::DegenerateCrossing | FuncError::TangentialCrossing) => return Ok(()),
            other => other.unwrap(),
        };
        prop_assume!(linalg::norm(&dir) > 1e-3);
        let nf = f.normalize();
        for side in [1.0, -1.0] {
            // selections along x_j = p + t_j dir, t_j -> 0, extrapolated to
            // the limit from two members of the sequence
            let along = |t: f64| {
                let mut x = p.clone();
                linalg::axpy(&mut x, side * t, &dir);
                x
            };
            let (x1, x2) = (along(1e-6), along(2e-6));
            let j = nf.selected(&x1, DEFAULT_ACTIVITY_TOL);
            prop_assume!(nf.selected(&x2, DEFAULT_ACTIVITY_TOL) == j);
            let (g1, g2) = (nf.atoms[j].grad(&x1), nf.atoms[j].grad(&x2));
            let limit: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| 2.0 * a - b).collect();
            prop_assert!(at_p.distance_to(&limit) <= 1e-8, "{:?} vs {:?}", limit, at_p);
        }
    }

    #[test]
    fn sum_rule_inclusion(f in nonsmooth(), g in prop_oneof![nonsmooth(), leaf_atom().prop_map(ScalarFunction::smooth)], x in point(), tie in any::<bool>()) {
        let f = if tie { ScalarFunction::max_of(tie_at(&f.normalize().atoms, &x)) } else { f };
        let Ok(sum) = f.try_add(&g) else { return Ok(()) };
        let parts = (f.limiting_subdiff(&x, DEFAULT_ACTIVITY_TOL), g.limiting_subdiff(&x, DEFAULT_ACTIVITY_TOL), sum.limiting_subdiff(&x, DEFAULT_ACTIVITY_TOL));
        let (Ok(a), Ok(b), Ok(s)) = parts else { return Ok(()) };
        for v in s.all_generators() {
            prop_assert!(distance_to_minkowski(&v, &a, &b) <= 1e-8);
        }
    }

    #[test]
    fn regular_subdifferential_empty_at_strict_min_kinks(slope in 0.1..3.0f64, shift in -1.0..1.0f64, kink in -1.0..1.0f64) {
        // min of two lines with slopes of opposite sign crossing at `kink`
        let f = ScalarFunction::min_of(vec![
            SmoothAtom::affine(vec![slope], -slope * kink + shift),
            SmoothAtom::affine(vec![-slope * 0.5], slope * 0.5 * kink + shift),
        ]);
        prop_assert!(f.frechet_subdiff(&[kink], DEFAULT_ACTIVITY_TOL).is_empty());
        let brute = oracle::frechet_limit_subdiff_1d(&f, kink, 1e-3, 64).unwrap();
        prop_assert!(brute.frechet_at_x.is_none());
    }
}
