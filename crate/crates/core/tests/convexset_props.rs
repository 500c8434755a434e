use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vecprox::convexset::{self, ConvexSet, DEFAULT_ACTIVE_TOL};
use vecprox::linalg;

/// Random nonempty sets in dimension 1 to 4; polyhedra contain the origin.
fn set() -> impl Strategy<Value = ConvexSet> {
    (1usize..5).prop_flat_map(|n| {
        prop_oneof![
            (prop::collection::vec(-2.0..0.0f64, n), prop::collection::vec(0.0..2.0f64, n))
                .prop_map(|(l, u)| ConvexSet::boxed(l, u).unwrap()),
            (prop::collection::vec(prop::collection::vec(-1.0..1.0f64, n), n + 1..n + 6), prop::collection::vec(0.1..2.0f64, n + 6))
                .prop_map(|(a, b)| {
                    let b = b[..a.len()].to_vec();
                    ConvexSet::polyhedron(a, b).unwrap()
                }),
            (prop::collection::vec(-1.0..1.0f64, n), 0.2..2.0f64).prop_map(|(c, r)| ConvexSet::ball(c, r).unwrap()),
            Just(ConvexSet::whole_space(n)),
        ]
    })
}

fn far_point(n: usize, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-5.0..5.0)).collect()
}

fn members(s: &ConvexSet, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchor = vec![0.0; s.dim()];
    let (lo, hi) = s.bounding_box(&anchor);
    (0..count).map(|_| s.sample(&lo, &hi, &mut rng)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_optimal(s in set(), seed in any::<u64>()) {
        let x = far_point(s.dim(), seed);
        let p = s.project(&x);
        prop_assert!(s.contains(&p, 1e-9));
        let r = linalg::sub(&x, &p);
        for y in members(&s, 100, seed ^ 1) {
            prop_assert!(linalg::dot(&r, &linalg::sub(&y, &p)) <= 1e-10 * (1.0 + linalg::norm(&r)));
        }
    }

    #[test]
    fn projection_is_nonexpansive(s in set(), seed in any::<u64>()) {
        let x = far_point(s.dim(), seed);
        let z = far_point(s.dim(), seed.wrapping_add(17));
        prop_assert!(linalg::dist(&s.project(&x), &s.project(&z)) <= linalg::dist(&x, &z) + 1e-12);
    }

    #[test]
    fn normal_cone_rays_are_fixed_by_projection(s in set(), seed in any::<u64>()) {
        let x = s.project(&far_point(s.dim(), seed));
        let cone = s.normal_cone(&x, DEFAULT_ACTIVE_TOL).unwrap();
        for v in &cone.rays {
            let mut y = x.clone();
            linalg::axpy(&mut y, 1e-3 / linalg::norm(v), v);
            prop_assert!(linalg::dist(&s.project(&y), &x) <= 1e-9);
        }
    }

    #[test]
    fn distance_subgradients_scale_into_normal_cone(s in set(), seed in any::<u64>(), lambdas in prop::collection::vec(0.01..10.0f64, 5)) {
        let x = s.project(&far_point(s.dim(), seed));
        let cone = s.normal_cone(&x, DEFAULT_ACTIVE_TOL).unwrap();
        for u in convexset::estimate_distance_subgradients(&s, &x, 50) {
            for l in &lambdas {
                let v = linalg::scale(&u, *l);
                prop_assert!(cone.distance_to(&v) <= 1e-8, "{:?} at {:?}", v, x);
            }
        }
    }
}
