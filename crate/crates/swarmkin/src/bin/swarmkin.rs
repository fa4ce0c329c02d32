//! Command-line front end: runs scenarios, computes W1 between measure
//! files, and exercises the quick self-checks.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use swarmkin::harness::{self, ExperimentSpec, Scenario, ScenarioOutput};
use swarmkin::measures::DiscreteMeasure;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_VIOLATION: u8 = 2;

const SCHEMA_HINT: &str = "scenario schema: {\"model\": {...}, \"initial\": {...}, \
                           \"dt\": ..., \"t_end\": ..., \"experiment\": {...}} \
                           (see scenarios/ for worked examples)";

#[derive(Parser)]
#[command(
    name = "swarmkin",
    about = "Kinetic swarming simulations, exact W1 distances, and experiment drivers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a measure and write trajectory diagnostics
    Simulate(ScenarioArgs),
    /// Exact W1 distance between two measure JSON files
    W1 {
        /// First measure file
        #[arg(long)]
        a: PathBuf,
        /// Second measure file
        #[arg(long)]
        b: PathBuf,
        /// Also print the optimal plan as JSON
        #[arg(long)]
        plan: bool,
    },
    /// Paired-perturbation stability experiment
    Stability(ScenarioArgs),
    /// Particle-count refinement experiment
    Meanfield(ScenarioArgs),
    /// Velocity-diameter decay experiment
    Flocking(ScenarioArgs),
    /// Particle-vs-grid comparison experiment
    HydroCompare(ScenarioArgs),
    /// Run the built-in quick checks
    Selftest,
}

#[derive(clap::Args)]
struct ScenarioArgs {
    /// Scenario JSON file
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for reports and series
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    harness::init_thread_pool();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            eprintln!("{SCHEMA_HINT}");
            EXIT_USAGE
        }
    };
    ExitCode::from(code)
}

fn load_scenario(path: &Path) -> Result<Scenario, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn expect_kind(scenario: &Scenario, wanted: &str) -> Result<(), String> {
    let actual = match &scenario.experiment {
        ExperimentSpec::Simulate { .. } => "simulate",
        ExperimentSpec::Stability { .. } => "stability",
        ExperimentSpec::Meanfield { .. } => "meanfield",
        ExperimentSpec::Flocking { .. } => "flocking",
        ExperimentSpec::HydroCompare { .. } => "hydro-compare",
    };
    if actual == wanted {
        Ok(())
    } else {
        Err(format!(
            "scenario declares a {actual} experiment but the {wanted} subcommand was used"
        ))
    }
}

fn write_output(
    out_dir: &Path,
    report_name: &str,
    output: &ScenarioOutput,
) -> Result<(), String> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;
    let report_path = out_dir.join(report_name);
    let pretty = serde_json::to_string_pretty(&output.report).expect("report serializes");
    std::fs::write(&report_path, pretty + "\n")
        .map_err(|e| format!("cannot write {}: {e}", report_path.display()))?;
    println!("wrote {}", report_path.display());
    for (name, text) in &output.csv {
        let path = out_dir.join(name);
        std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        println!("wrote {}", path.display());
    }
    if let Some(jsonl) = &output.trajectory_jsonl {
        let path = out_dir.join("trajectory.jsonl");
        std::fs::write(&path, jsonl)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_scenario_command(args: &ScenarioArgs, kind: &str, report_name: &str) -> Result<u8, String> {
    let scenario = load_scenario(&args.scenario)?;
    expect_kind(&scenario, kind)?;
    let output = harness::run_scenario(&scenario).map_err(|e| e.to_string())?;
    write_output(&args.out, report_name, &output)?;
    if output.invariants_ok {
        Ok(EXIT_OK)
    } else {
        eprintln!("invariant violation: see {report_name} for details");
        Ok(EXIT_VIOLATION)
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match &cli.command {
        Command::Simulate(args) => run_scenario_command(args, "simulate", "simulate_report.json"),
        Command::W1 { a, b, plan } => {
            let load = |p: &Path| -> Result<DiscreteMeasure, String> {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| format!("cannot read {}: {e}", p.display()))?;
                serde_json::from_str(&text)
                    .map_err(|e| format!("cannot parse {}: {e}", p.display()))
            };
            let fa = load(a)?;
            let fb = load(b)?;
            let (d, opt_plan) =
                swarmkin::transport::w1_exact(&fa, &fb).map_err(|e| e.to_string())?;
            println!("{d}");
            if *plan {
                println!("{}", opt_plan.to_json());
            }
            Ok(EXIT_OK)
        }
        Command::Stability(args) => {
            run_scenario_command(args, "stability", "stability_report.json")
        }
        Command::Meanfield(args) => {
            run_scenario_command(args, "meanfield", "meanfield_report.json")
        }
        Command::Flocking(args) => run_scenario_command(args, "flocking", "flocking_report.json"),
        Command::HydroCompare(args) => {
            run_scenario_command(args, "hydro-compare", "hydro_report.json")
        }
        Command::Selftest => selftest(),
    }
}

fn selftest() -> Result<u8, String> {
    use swarmkin::measures::PhasePoint;

    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("{}  {name}", if ok { "pass" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    let f = DiscreteMeasure::new(vec![(PhasePoint::new(vec![0.0], vec![0.0]), 1.0)])
        .expect("valid");
    let (d_self, _) = swarmkin::transport::w1_exact(&f, &f).map_err(|e| e.to_string())?;
    check("w1 of a measure with itself is 0", d_self == 0.0);

    let g = DiscreteMeasure::new(vec![(PhasePoint::new(vec![3.0], vec![4.0]), 1.0)])
        .expect("valid");
    let (d_fg, _) = swarmkin::transport::w1_exact(&f, &g).map_err(|e| e.to_string())?;
    check("w1 of diracs is the phase-space distance", (d_fg - 5.0).abs() < 1e-12);

    let model = swarmkin::models::ModelSpec {
        dim: 1,
        self_propulsion: Some(swarmkin::models::SelfPropulsionSpec {
            alpha: 0.5,
            beta: 1.0,
        }),
        potential: None,
        alignment: None,
        lle: None,
    };
    let (dx, dv) = swarmkin::dynamics::rhs(&f, &model, 0.0).map_err(|e| e.to_string())?;
    check("atom at rest stays at rest", dx == vec![0.0] && dv == vec![0.0]);

    let state = swarmkin::hydro::HydroState::new(1.0, vec![1.0; 8], vec![0.25; 8], 0.0)
        .map_err(|e| e.to_string())?;
    let atoms = swarmkin::hydro::monokinetic_init(&state, 4);
    let quantiles_ok = (0..4).all(|k| {
        (atoms.position(k)[0] - (0.125 + 0.25 * k as f64)).abs() < 1e-12
            && (atoms.velocity(k)[0] - 0.25).abs() < 1e-12
    });
    check("uniform density quantile atoms", quantiles_ok);
    check(
        "monokinetic atoms have zero deviation",
        swarmkin::hydro::monokineticity_deviation(&atoms, &state) == 0.0,
    );

    let consensus = DiscreteMeasure::new(vec![
        (PhasePoint::new(vec![0.0], vec![0.5]), 0.5),
        (PhasePoint::new(vec![1.0], vec![0.5]), 0.5),
    ])
    .expect("valid");
    let report = swarmkin::harness::run_flocking(&consensus, 0.5, 0.5, 1e-2, 10)
        .map_err(|e| e.to_string())?;
    check("consensus data satisfies the decay bound", report.decay_ok);

    if failures == 0 {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_VIOLATION)
    }
}
