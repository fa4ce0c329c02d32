//! Property-based invariants of the metric, push-forwards, and the
//! integrator.

use proptest::prelude::*;
use swarmkin::dynamics::{simulate, SimConfig};
use swarmkin::measures::{DiscreteMeasure, PhasePoint};
use swarmkin::models::ModelSpec;
use swarmkin::transport;

const TOL: f64 = 1e-9;

fn arb_measure(max_atoms: usize, dim: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec(
        (
            prop::collection::vec(-2.0f64..2.0, dim),
            prop::collection::vec(-2.0f64..2.0, dim),
            0.1f64..1.0,
        ),
        1..=max_atoms,
    )
    .prop_map(|raw| {
        let atoms = raw
            .into_iter()
            .map(|(x, v, m)| (PhasePoint::new(x, v), m))
            .collect();
        DiscreteMeasure::normalize(atoms).expect("generated atoms are valid")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_symmetry(f in arb_measure(6, 2), g in arb_measure(6, 2)) {
        let (fg, _) = transport::w1_exact(&f, &g).unwrap();
        let (gf, _) = transport::w1_exact(&g, &f).unwrap();
        prop_assert!((fg - gf).abs() <= TOL);
    }

    #[test]
    fn metric_identity(f in arb_measure(8, 2)) {
        let (d, _) = transport::w1_exact(&f, &f).unwrap();
        prop_assert!(d.abs() <= TOL);
    }

    #[test]
    fn metric_triangle(
        f in arb_measure(5, 1),
        g in arb_measure(5, 1),
        h in arb_measure(5, 1),
    ) {
        let (fh, _) = transport::w1_exact(&f, &h).unwrap();
        let (fg, _) = transport::w1_exact(&f, &g).unwrap();
        let (gh, _) = transport::w1_exact(&g, &h).unwrap();
        prop_assert!(fh <= fg + gh + TOL);
    }

    #[test]
    fn push_forward_composes(
        f in arb_measure(6, 1),
        a in -1.5f64..1.5,
        b in -1.5f64..1.5,
    ) {
        let t1 = |p: &PhasePoint| PhasePoint::new(
            p.x.iter().map(|c| c + a).collect(),
            p.v.clone(),
        );
        let t2 = |p: &PhasePoint| PhasePoint::new(
            p.x.iter().map(|c| c * b).collect(),
            p.v.iter().map(|c| c + a).collect(),
        );
        let chained = f.push_forward(&t1).push_forward(&t2);
        let composed = f.push_forward(|p| t2(&t1(p)));
        prop_assert_eq!(chained, composed);
    }

    #[test]
    fn translation_leaves_distance_unchanged(
        f in arb_measure(5, 1),
        g in arb_measure(5, 1),
        shift in -2.0f64..2.0,
    ) {
        let translate = |p: &PhasePoint| PhasePoint::new(
            p.x.iter().map(|c| c + shift).collect(),
            p.v.iter().map(|c| c + shift).collect(),
        );
        let (d, _) = transport::w1_exact(&f, &g).unwrap();
        let (dt, _) = transport::w1_exact(
            &f.push_forward(translate),
            &g.push_forward(translate),
        ).unwrap();
        prop_assert!((d - dt).abs() <= TOL);
    }

    #[test]
    fn lipschitz_maps_contract_distance(
        f in arb_measure(5, 1),
        g in arb_measure(5, 1),
        scale in -1.5f64..1.5,
        shift in -1.0f64..1.0,
    ) {
        // affine map with Lipschitz constant |scale|
        let map = |p: &PhasePoint| PhasePoint::new(
            p.x.iter().map(|c| scale * c + shift).collect(),
            p.v.iter().map(|c| scale * c).collect(),
        );
        let (d, _) = transport::w1_exact(&f, &g).unwrap();
        let (dm, _) = transport::w1_exact(
            &f.push_forward(map),
            &g.push_forward(map),
        ).unwrap();
        prop_assert!(dm <= scale.abs() * d + TOL);
    }

    #[test]
    fn map_difference_bounds_distance(
        f in arb_measure(6, 1),
        a in -0.5f64..0.5,
        b in -0.5f64..0.5,
    ) {
        // two maps differing by a constant (a, b): their push-forwards
        // of the same measure are at most |(a, b)| apart
        let t1 = |p: &PhasePoint| p.clone();
        let t2 = |p: &PhasePoint| PhasePoint::new(
            p.x.iter().map(|c| c + a).collect(),
            p.v.iter().map(|c| c + b).collect(),
        );
        let (d, _) = transport::w1_exact(
            &f.push_forward(t1),
            &f.push_forward(t2),
        ).unwrap();
        let gap = (a * a + b * b).sqrt();
        prop_assert!(d <= gap + TOL);
        prop_assert!(d >= gap - TOL); // equality for a rigid shift
    }

    #[test]
    fn simulation_preserves_masses_exactly(f in arb_measure(6, 1)) {
        let config = SimConfig {
            model: ModelSpec::cucker_smale(1, 0.5),
            dt: 5e-2,
            t_end: 0.25,
            record_every: 1,
            seed: 0,
        };
        let traj = simulate(&f, &config).unwrap();
        for state in &traj.states {
            prop_assert_eq!(state.masses(), f.masses());
        }
        for w in traj.times.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn marginal_of_spatial_translation_is_translated_marginal(
        f in arb_measure(6, 2),
        a in -2.0f64..2.0,
    ) {
        let shifted = f.push_forward(|p| PhasePoint::new(
            p.x.iter().map(|c| c + a).collect(),
            p.v.clone(),
        ));
        let lhs = shifted.first_marginal();
        let rhs = f.first_marginal();
        for i in 0..rhs.len() {
            for c in 0..rhs.dim() {
                prop_assert!((lhs.position(i)[c] - (rhs.position(i)[c] + a)).abs() <= 1e-12);
            }
            prop_assert_eq!(lhs.mass(i), rhs.mass(i));
        }
    }

    #[test]
    fn support_radius_invariant_under_rotation(
        f in arb_measure(6, 2),
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let (s, c) = angle.sin_cos();
        let rotate = |p: &PhasePoint| PhasePoint::new(
            vec![c * p.x[0] - s * p.x[1], s * p.x[0] + c * p.x[1]],
            vec![c * p.v[0] - s * p.v[1], s * p.v[0] + c * p.v[1]],
        );
        let g = f.push_forward(rotate);
        prop_assert!((g.support_radius() - f.support_radius()).abs() <= 1e-12);
    }

    #[test]
    fn velocity_diameter_invariant_under_velocity_shift(
        f in arb_measure(8, 1),
        shift in -3.0f64..3.0,
    ) {
        let g = f.push_forward(|p| PhasePoint::new(
            p.x.clone(),
            p.v.iter().map(|c| c + shift).collect(),
        ));
        prop_assert!((g.velocity_diameter() - f.velocity_diameter()).abs() <= 1e-12);
    }

    #[test]
    fn shrinking_perturbations_converge_monotonically(
        f in arb_measure(5, 1),
        u in 0.1f64..2.0,
    ) {
        // f_k displaces every atom by u/k: W1(f_k, f) = u/k decreases
        // to 0, a desk-scale view of weak convergence in W1
        let mut prev = f64::INFINITY;
        for k in 1..=6 {
            let step = u / k as f64;
            let fk = f.push_forward(|p| PhasePoint::new(
                p.x.iter().map(|c| c + step).collect(),
                p.v.clone(),
            ));
            let (d, _) = transport::w1_exact(&fk, &f).unwrap();
            prop_assert!((d - step).abs() <= TOL);
            prop_assert!(d <= prev + TOL);
            prev = d;
        }
    }

    #[test]
    fn measure_json_round_trip(f in arb_measure(6, 2)) {
        let text = f.to_json();
        let back = DiscreteMeasure::from_json(&text).unwrap();
        prop_assert_eq!(back.dim(), f.dim());
        prop_assert_eq!(back.len(), f.len());
        for i in 0..f.len() {
            for c in 0..f.dim() {
                prop_assert!((back.position(i)[c] - f.position(i)[c]).abs() <= 1e-12);
                prop_assert!((back.velocity(i)[c] - f.velocity(i)[c]).abs() <= 1e-12);
            }
            prop_assert!((back.mass(i) - f.mass(i)).abs() <= 1e-12);
        }
    }
}
