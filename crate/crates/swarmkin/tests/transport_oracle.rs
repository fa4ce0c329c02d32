//! Cross-checks of the exact solver against independent computations.

mod common;

use common::{nw_upper_bound, oracle_w1, random_measure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarmkin::measures::{DiscreteMeasure, PhasePoint};
use swarmkin::transport::{self, GroundMetric};

#[test]
fn solver_matches_augmenting_path_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..10 {
        let dim = 1 + trial % 2;
        let f = random_measure(&mut rng, 5, dim);
        let g = random_measure(&mut rng, 5, dim);
        let (d, _) = transport::w1_exact(&f, &g).unwrap();
        let oracle = oracle_w1(&f, &g, GroundMetric::Phase);
        assert!(
            (d - oracle).abs() <= 1e-9,
            "trial {trial}: solver {d} vs oracle {oracle}"
        );
        let upper = nw_upper_bound(&f, &g, GroundMetric::Phase);
        assert!(
            d <= upper + 1e-9,
            "trial {trial}: solver {d} above feasible bound {upper}"
        );
    }
}

#[test]
fn position_only_metric_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..10 {
        let f = random_measure(&mut rng, 5, 2);
        let g = random_measure(&mut rng, 5, 2);
        let (d, _) = transport::w1_exact_with(&f, &g, GroundMetric::PositionOnly).unwrap();
        let oracle = oracle_w1(&f, &g, GroundMetric::PositionOnly);
        assert!(
            (d - oracle).abs() <= 1e-9,
            "trial {trial}: solver {d} vs oracle {oracle}"
        );
    }
}

#[test]
fn one_dimensional_fast_path_agrees_with_simplex() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..100 {
        // all atoms share one velocity so only the position coordinate
        // varies, which is what the quantile path requires
        let v = rng.gen_range(-1.0..1.0);
        let make = |rng: &mut ChaCha8Rng| {
            let n = rng.gen_range(1..=8);
            let atoms = (0..n)
                .map(|_| {
                    (
                        PhasePoint::new(vec![rng.gen_range(-3.0..3.0)], vec![v]),
                        rng.gen_range(0.1..1.0),
                    )
                })
                .collect();
            DiscreteMeasure::normalize(atoms).unwrap()
        };
        let f = make(&mut rng);
        let g = make(&mut rng);
        let fast = transport::w1_1d(&f, &g).unwrap();
        let (exact, _) = transport::w1_exact(&f, &g).unwrap();
        assert!(
            (fast - exact).abs() <= 1e-9,
            "trial {trial}: fast {fast} vs exact {exact}"
        );
    }
}

#[test]
fn optimal_plans_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let f = random_measure(&mut rng, 8, 2);
        let g = random_measure(&mut rng, 8, 2);
        let (_, plan) = transport::w1_exact(&f, &g).unwrap();
        assert!(transport::verify_plan(&plan, &f, &g));
    }
}
