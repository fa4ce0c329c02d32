//! End-to-end acceptance suite. Each test prints one pass/fail line;
//! run with `cargo test --test acceptance -- --nocapture` to see them.

mod common;

use common::{oracle_w1, random_measure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;
use swarmkin::dynamics::{self, simulate, SimConfig};
use swarmkin::harness::{self, Scenario};
use swarmkin::measures::{DiscreteMeasure, PhasePoint};
use swarmkin::models::{ModelSpec, PotentialSpec, SelfPropulsionSpec};
use swarmkin::transport::{self, GroundMetric};

fn report(name: &str, ok: bool) {
    println!("acceptance {name}: {}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "acceptance criterion failed: {name}");
}

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn load_scenario(name: &str) -> Scenario {
    let text = std::fs::read_to_string(scenario_path(name)).expect("scenario file exists");
    serde_json::from_str(&text).expect("scenario parses")
}

/// The 100 instances shared by the oracle-equivalence and duality
/// criteria.
fn oracle_instances() -> Vec<(DiscreteMeasure, DiscreteMeasure)> {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    (0..100)
        .map(|k| {
            let dim = 1 + k % 2;
            (
                random_measure(&mut rng, 6, dim),
                random_measure(&mut rng, 6, dim),
            )
        })
        .collect()
}

#[test]
fn criterion_01_w1_oracle_equivalence() {
    let start = Instant::now();
    let mut ok = true;
    for (f, g) in oracle_instances() {
        let (d, _) = transport::w1_exact(&f, &g).unwrap();
        let oracle = oracle_w1(&f, &g, GroundMetric::Phase);
        if (d - oracle).abs() > 1e-9 {
            ok = false;
        }
    }
    let fast_enough = start.elapsed().as_secs_f64() < 10.0;
    report("01 w1-oracle-equivalence", ok && fast_enough);
}

#[test]
fn criterion_02_metric_axioms() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut ok = true;
    for k in 0..200 {
        let dim = 1 + k % 2;
        let f = random_measure(&mut rng, 20, dim);
        let g = random_measure(&mut rng, 20, dim);
        let h = random_measure(&mut rng, 20, dim);
        let (fg, _) = transport::w1_exact(&f, &g).unwrap();
        let (gf, _) = transport::w1_exact(&g, &f).unwrap();
        let (ff, _) = transport::w1_exact(&f, &f).unwrap();
        let (fh, _) = transport::w1_exact(&f, &h).unwrap();
        let (gh, _) = transport::w1_exact(&g, &h).unwrap();
        if (fg - gf).abs() > 1e-9 || ff > 1e-9 || fh > fg + gh + 1e-9 {
            ok = false;
        }
    }
    let fast_enough = start.elapsed().as_secs_f64() < 30.0;
    report("02 metric-axioms", ok && fast_enough);
}

#[test]
fn criterion_03_strong_duality() {
    let mut ok = true;
    for (f, g) in oracle_instances() {
        let sol = transport::solve(&f, &g, GroundMetric::Phase, 4000).unwrap();
        let dual = transport::dual_value(&f, &g, &sol.potential, GroundMetric::Phase).unwrap();
        if (dual - sol.distance).abs() > 1e-6 {
            ok = false;
        }
    }
    report("03 strong-duality", ok);
}

#[test]
fn criterion_04_map_and_field_inequalities() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut ok = true;

    // two maps applied to the same measure: W1 bounded by the largest
    // displacement between the maps over the atoms
    for _ in 0..100 {
        let f = random_measure(&mut rng, 8, 1);
        let a = rng.gen_range(-0.5..0.5);
        let b = rng.gen_range(-0.5..0.5);
        let t2 = |p: &PhasePoint| {
            PhasePoint::new(
                p.x.iter().map(|c| c + a * (c.sin() + 1.0)).collect(),
                p.v.iter().map(|c| c + b * c.cos()).collect(),
            )
        };
        let pushed = f.push_forward(t2);
        let sup_gap = (0..f.len())
            .map(|i| {
                let p = f.atom(i);
                let q = pushed.atom(i);
                ((p.x[0] - q.x[0]).powi(2) + (p.v[0] - q.v[0]).powi(2)).sqrt()
            })
            .fold(0.0f64, f64::max);
        let (d, _) = transport::w1_exact(&f, &pushed).unwrap();
        if d > sup_gap + 1e-9 {
            ok = false;
        }
    }

    // a shared Lipschitz map contracts W1 by at most its constant
    for _ in 0..100 {
        let f = random_measure(&mut rng, 6, 1);
        let g = random_measure(&mut rng, 6, 1);
        let scale = rng.gen_range(-2.0..2.0);
        let shift = rng.gen_range(-1.0..1.0);
        let map = |p: &PhasePoint| {
            PhasePoint::new(
                p.x.iter().map(|c| scale * c + shift).collect(),
                p.v.iter().map(|c| scale * c).collect(),
            )
        };
        let (d, _) = transport::w1_exact(&f, &g).unwrap();
        let (dm, _) = transport::w1_exact(&f.push_forward(map), &g.push_forward(map)).unwrap();
        if dm > scale.abs() * d + 1e-9 {
            ok = false;
        }
    }

    // interaction fields of nearby measures differ by at most
    // Lip(grad U) * W1, with the analytic Hessian bound
    for _ in 0..100 {
        let spec = PotentialSpec::GaussianMorse {
            c_a: rng.gen_range(0.1..1.0),
            c_r: rng.gen_range(0.1..1.0),
            l_a: rng.gen_range(0.5..2.0),
            l_r: rng.gen_range(0.2..1.0),
        };
        let f = random_measure(&mut rng, 6, 1);
        let g = random_measure(&mut rng, 6, 1);
        if !swarmkin::models::field_w1_bound_check(&f, &g, &spec, 4.0).unwrap() {
            ok = false;
        }
    }

    // the analytic gradient-Lipschitz bound dominates the sampled one
    for _ in 0..100 {
        let spec = PotentialSpec::GaussianMorse {
            c_a: rng.gen_range(0.1..2.0),
            c_r: rng.gen_range(0.1..2.0),
            l_a: rng.gen_range(0.3..2.0),
            l_r: rng.gen_range(0.1..1.0),
        };
        let analytic = spec.grad_lipschitz_bound().unwrap();
        let sampled = spec.grad_lipschitz_sampled(2, 5.0);
        if sampled > analytic + 1e-9 {
            ok = false;
        }
    }

    report("04 map-and-field-inequalities", ok);
}

#[test]
fn criterion_05_asymptotic_speed() {
    let model = ModelSpec {
        dim: 2,
        self_propulsion: Some(SelfPropulsionSpec {
            alpha: 1.0,
            beta: 1.0,
        }),
        potential: None,
        alignment: None,
        lle: None,
    };
    let f0 = DiscreteMeasure::new(vec![(
        PhasePoint::new(vec![0.0, 0.0], vec![0.1, 0.0]),
        1.0,
    )])
    .unwrap();
    let config = SimConfig {
        model,
        dt: 1e-3,
        t_end: 10.0,
        record_every: usize::MAX,
        seed: 0,
    };
    let traj = simulate(&f0, &config).unwrap();
    let v = traj.final_state().velocity(0);
    let speed = (v[0] * v[0] + v[1] * v[1]).sqrt();
    report("05 asymptotic-speed", (speed - 1.0).abs() < 1e-6);
}

#[test]
fn criterion_06_momentum_conservation() {
    let scenario = load_scenario("cs_flocking_50.json");
    let f0 = scenario.initial.build_measure().unwrap();
    let config = SimConfig {
        model: scenario.model.clone(),
        dt: scenario.dt,
        t_end: scenario.t_end,
        record_every: 100,
        seed: 0,
    };
    let traj = simulate(&f0, &config).unwrap();
    let m0 = traj.mean_velocity[0].clone();
    let drift = traj
        .mean_velocity
        .iter()
        .map(|m| {
            m.iter()
                .zip(&m0)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0f64, f64::max);
    report("06 momentum-conservation", drift < 1e-9);
}

#[test]
fn criterion_07_flocking_bound() {
    let scenario = load_scenario("cs_flocking_50.json");
    let out = harness::run_scenario(&scenario).unwrap();
    let ok = out.invariants_ok && out.report["decay_ok"].as_bool().unwrap();
    report("07 flocking-bound", ok);
}

#[test]
fn criterion_08_stability_envelope() {
    let mut ok = true;
    for name in ["cs_stability.json", "dorsogna_stability.json"] {
        let start = Instant::now();
        let scenario = load_scenario(name);
        let out = harness::run_scenario(&scenario).unwrap();
        let ratio0 = out.report["ratio_series"][0].as_f64().unwrap();
        let violations = out.report["violation_count"].as_u64().unwrap();
        if !out.invariants_ok
            || (ratio0 - 1.0).abs() > 1e-9
            || violations != 0
            || start.elapsed().as_secs_f64() > 120.0
        {
            ok = false;
        }
    }
    report("08 stability-envelope", ok);
}

#[test]
fn criterion_09_meanfield_decrease() {
    let scenario = load_scenario("dorsogna_meanfield_1d.json");
    let out = harness::run_scenario(&scenario).unwrap();
    let series: Vec<f64> = out.report["w1_to_reference"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let monotone = series.windows(2).all(|w| w[1] <= 1.2 * w[0]);
    let decreased = series.last().unwrap() < series.first().unwrap();
    report(
        "09 meanfield-decrease",
        out.invariants_ok && monotone && decreased,
    );
}

#[test]
fn criterion_10_rk4_order() {
    // synthetic oscillator dX = V, dV = -9X with exact solution
    // (cos 3t, -3 sin 3t); frequency 3 keeps the smallest-dt error
    // well above roundoff for a clean slope fit
    let f0 = DiscreteMeasure::new(vec![(PhasePoint::new(vec![1.0], vec![0.0]), 1.0)]).unwrap();
    let oscillator = |s: &DiscreteMeasure, _t: f64| -> Result<(Vec<f64>, Vec<f64>), dynamics::DynError> {
        Ok((vec![s.velocity(0)[0]], vec![-9.0 * s.position(0)[0]]))
    };
    let mut log_dt = Vec::new();
    let mut log_err = Vec::new();
    for k in 0..5 {
        let dt = 10f64.powf(-1.0 - 0.5 * k as f64);
        let steps = (1.0 / dt).round() as usize;
        let mut state = f0.clone();
        let mut t = 0.0;
        for _ in 0..steps {
            state = dynamics::step_rk4_with(&state, oscillator, t, dt).unwrap();
            t += dt;
        }
        // dt does not always divide 1 exactly, so compare at the time
        // actually reached
        let t_final = steps as f64 * dt;
        let x = state.position(0)[0];
        let v = state.velocity(0)[0];
        let err = ((x - (3.0 * t_final).cos()).powi(2)
            + (v + 3.0 * (3.0 * t_final).sin()).powi(2))
        .sqrt();
        log_dt.push(dt.ln());
        log_err.push(err.ln());
    }
    let n = log_dt.len() as f64;
    let mx = log_dt.iter().sum::<f64>() / n;
    let my = log_err.iter().sum::<f64>() / n;
    let slope = log_dt
        .iter()
        .zip(&log_err)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / log_dt.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    println!("rk4 fitted order: {slope}");
    report("10 rk4-order", (slope - 4.0).abs() <= 0.2);
}

#[test]
fn criterion_11_hydro_bridge() {
    let scenario = load_scenario("hydro_compare_1d.json");
    let out = harness::run_scenario(&scenario).unwrap();
    let w1: Vec<f64> = out.report["w1_errors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let rho_sup: Vec<f64> = out.report["field_errors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["rho_sup"].as_f64().unwrap())
        .collect();
    let mass_ok = out.report["mass_drift"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v.as_f64().unwrap() <= 1e-9);
    let ok = out.invariants_ok && w1[1] < w1[0] && rho_sup[1] < rho_sup[0] && mass_ok;
    report("11 hydro-bridge", ok);
}

#[test]
fn criterion_12_determinism() {
    let bin = env!("CARGO_BIN_EXE_swarmkin");
    let tmp = tempfile::tempdir().unwrap();
    let scenario = scenario_path("cs_stability.json");
    let run = |out: &str| {
        let status = std::process::Command::new(bin)
            .args([
                "stability",
                "--scenario",
                scenario.to_str().unwrap(),
                "--out",
                tmp.path().join(out).to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(tmp.path().join(out).join("stability_report.json")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    report("12 determinism", a == b);
}
