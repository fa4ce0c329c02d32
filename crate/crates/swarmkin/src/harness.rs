//! Experiment drivers and report emission: stability of paired runs,
//! mean-field refinement, flocking decay, and the particle-vs-grid
//! hydrodynamic comparison, each emitting a self-describing JSON
//! report with the resolved configuration and a content hash of its
//! inputs.

use crate::dynamics::{self, DynError, SimConfig};
use crate::hydro::{self, HydroConfig, HydroError, HydroState};
use crate::lowdisc;
use crate::measures::{DiscreteMeasure, MeasureError, PhasePoint};
use crate::models::{self, ModelError, ModelSpec};
use crate::transport::{self, TransportError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Atom budget per side for W1 evaluations inside experiments; larger
/// measures are thinned deterministically and the thinning error bound
/// is reported.
pub const W1_ATOM_CAP: usize = 2000;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Dynamics(#[from] DynError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Hydro(#[from] HydroError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("initial measures coincide: W1(f0, g0) <= 1e-12")]
    DegenerateInitialDistance,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// Installs the global thread pool from `SWARMKIN_THREADS` (no-op if
/// unset, unparsable, or already installed).
pub fn init_thread_pool() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| {
        if let Some(n) = std::env::var("SWARMKIN_THREADS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
        {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    });
}

/// SHA-256 hex digest of a JSON value (keys are emitted sorted, so the
/// digest is content-addressed).
pub fn content_hash(value: &serde_json::Value) -> String {
    let mut hasher = Sha256::new();
    hasher.update(value.to_string().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Least-squares line fit through `(x, y)` pairs.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    let slope = if den > 0.0 { num / den } else { 0.0 };
    (slope, my - slope * mx)
}

/// Deterministic stratified thinning: consecutive atoms are merged
/// into mass-weighted barycenters until at most `cap` atoms remain.
/// `bound` is a W1 upper bound on the distance to the original.
pub struct ThinnedMeasure {
    pub measure: DiscreteMeasure,
    pub bound: f64,
}

pub fn thin_to_cap(f: &DiscreteMeasure, cap: usize) -> ThinnedMeasure {
    if f.len() <= cap {
        return ThinnedMeasure {
            measure: f.clone(),
            bound: 0.0,
        };
    }
    let dim = f.dim();
    let block = f.len().div_ceil(cap);
    let mut atoms = Vec::new();
    let mut bound = 0.0;
    let mut k = 0;
    while k < f.len() {
        let end = (k + block).min(f.len());
        let mut mass = 0.0;
        let mut x = vec![0.0; dim];
        let mut v = vec![0.0; dim];
        for i in k..end {
            mass += f.mass(i);
            for c in 0..dim {
                x[c] += f.mass(i) * f.position(i)[c];
                v[c] += f.mass(i) * f.velocity(i)[c];
            }
        }
        for c in 0..dim {
            x[c] /= mass;
            v[c] /= mass;
        }
        for i in k..end {
            let dx: f64 = (0..dim)
                .map(|c| (f.position(i)[c] - x[c]).powi(2) + (f.velocity(i)[c] - v[c]).powi(2))
                .sum::<f64>()
                .sqrt();
            bound += f.mass(i) * dx;
        }
        atoms.push((PhasePoint::new(x, v), mass));
        k = end;
    }
    ThinnedMeasure {
        measure: DiscreteMeasure::new(atoms).expect("barycenters of valid atoms are valid"),
        bound,
    }
}

/// W1 with the experiment-side atom cap; returns the distance and the
/// thinning error bound (0 when no thinning happened).
pub fn w1_capped(f: &DiscreteMeasure, g: &DiscreteMeasure) -> Result<(f64, f64), TransportError> {
    let tf = thin_to_cap(f, W1_ATOM_CAP);
    let tg = thin_to_cap(g, W1_ATOM_CAP);
    let (d, _) = transport::w1_exact(&tf.measure, &tg.measure)?;
    Ok((d, tf.bound + tg.bound))
}

// ---------------------------------------------------------------------------
// Deterministic sampling of continuous initial data
// ---------------------------------------------------------------------------

/// One-dimensional marginal profile, sampled through its quantile
/// function so that low-discrepancy points map to low-noise atoms.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile1D {
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, std: f64 },
}

impl Profile1D {
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(1e-12, 1.0 - 1e-12);
        match self {
            Profile1D::Uniform { lo, hi } => lo + u * (hi - lo),
            Profile1D::Normal { mean, std } => mean + std * normal_quantile(u),
        }
    }
}

/// Acklam's rational approximation of the standard normal quantile
/// (absolute error below 1.2e-9, ample for sampling).
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    let tail = |q: f64| -> f64 {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - P_LOW {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Product measure on phase space: one marginal profile per position
/// and per velocity coordinate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub position: Vec<Profile1D>,
    pub velocity: Vec<Profile1D>,
}

impl SamplerSpec {
    pub fn dim(&self) -> usize {
        self.position.len()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.position.is_empty() || self.position.len() != self.velocity.len() {
            return Err(HarnessError::InvalidScenario(
                "position and velocity profile lists must be nonempty and equal length".into(),
            ));
        }
        if 2 * self.position.len() > 8 {
            return Err(HarnessError::InvalidScenario(
                "sampled initial data supports dim <= 4".into(),
            ));
        }
        Ok(())
    }

    /// The first `n` atoms of the Halton stream mapped through the
    /// quantile functions; prefixes are nested, so samples at different
    /// `n` share their leading atoms.
    pub fn sample(&self, n: usize) -> Result<DiscreteMeasure, HarnessError> {
        self.validate()?;
        let d = self.dim();
        let atoms = (0..n)
            .map(|k| {
                let u = lowdisc::halton_point(k as u64, 2 * d);
                let x: Vec<f64> = (0..d).map(|c| self.position[c].quantile(u[c])).collect();
                let v: Vec<f64> = (0..d).map(|c| self.velocity[c].quantile(u[d + c])).collect();
                (PhasePoint::new(x, v), 1.0 / n as f64)
            })
            .collect();
        Ok(DiscreteMeasure::new(atoms)?)
    }
}

/// Deterministic phase-space perturbation of size about `eps` per
/// coordinate, built from the Halton stream.
pub fn perturb_measure(f: &DiscreteMeasure, eps: f64) -> DiscreteMeasure {
    let d = f.dim();
    let atoms = (0..f.len())
        .map(|k| {
            let u = lowdisc::halton_point(k as u64, (2 * d).min(8));
            let mut p = f.atom(k);
            for c in 0..d {
                p.x[c] += eps * (2.0 * u[c % u.len()] - 1.0);
                p.v[c] += eps * (2.0 * u[(d + c) % u.len()] - 1.0);
            }
            (p, f.mass(k))
        })
        .collect();
    DiscreteMeasure::new(atoms).expect("perturbation of a valid measure is valid")
}

// ---------------------------------------------------------------------------
// Stability
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub config: serde_json::Value,
    pub input_hash: String,
    pub times: Vec<f64>,
    pub w1_series: Vec<f64>,
    pub initial_w1: f64,
    pub ratio_series: Vec<f64>,
    /// Least-squares slope of log(ratio) against t.
    pub fitted_log_rate: f64,
    /// Smallest amplitude `A >= 1` such that `A e^{rate t}` covers
    /// every recorded ratio.
    pub envelope_amplitude: f64,
    /// Recorded times where the ratio exceeds the envelope by > 5%.
    pub violation_count: usize,
    /// Largest W1 thinning error bound seen across evaluations.
    pub max_thinning_bound: f64,
}

pub fn run_stability(
    model: &ModelSpec,
    f0: &DiscreteMeasure,
    g0: &DiscreteMeasure,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<StabilityReport, HarnessError> {
    init_thread_pool();
    let (initial_w1, _) = w1_capped(f0, g0)?;
    if initial_w1 <= 1e-12 {
        return Err(HarnessError::DegenerateInitialDistance);
    }
    let sim = SimConfig {
        model: model.clone(),
        dt,
        t_end,
        record_every: stride,
        seed: 0,
    };
    let tf = dynamics::simulate(f0, &sim)?;
    let tg = dynamics::simulate(g0, &sim)?;
    let mut w1_series = Vec::with_capacity(tf.len());
    let mut max_thinning_bound: f64 = 0.0;
    for k in 0..tf.len() {
        let (w1, bound) = w1_capped(&tf.states[k], &tg.states[k])?;
        w1_series.push(w1);
        max_thinning_bound = max_thinning_bound.max(bound);
    }
    let ratio_series: Vec<f64> = w1_series.iter().map(|w| w / initial_w1).collect();
    let log_ratios: Vec<f64> = ratio_series.iter().map(|r| r.max(1e-300).ln()).collect();
    let (slope, intercept) = fit_line(&tf.times, &log_ratios);
    let a0 = intercept.max(0.0).exp();
    let envelope_amplitude = tf
        .times
        .iter()
        .zip(&ratio_series)
        .map(|(&t, &r)| r / (slope * t).exp())
        .fold(a0, f64::max);
    let violation_count = tf
        .times
        .iter()
        .zip(&ratio_series)
        .filter(|&(&t, &r)| r > 1.05 * envelope_amplitude * (slope * t).exp())
        .count();
    let config = serde_json::json!({
        "experiment": "stability",
        "model": model,
        "dt": dt,
        "t_end": t_end,
        "stride": stride,
        "w1_atom_cap": W1_ATOM_CAP,
    });
    let input_hash = content_hash(&serde_json::json!({
        "config": config,
        "f0": f0,
        "g0": g0,
    }));
    Ok(StabilityReport {
        config,
        input_hash,
        times: tf.times,
        w1_series,
        initial_w1,
        ratio_series,
        fitted_log_rate: slope,
        envelope_amplitude,
        violation_count,
        max_thinning_bound,
    })
}

// ---------------------------------------------------------------------------
// Mean-field refinement
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldReport {
    pub config: serde_json::Value,
    pub input_hash: String,
    /// Particle counts compared against the reference (the largest
    /// requested count, excluded from this list).
    pub n_values: Vec<usize>,
    pub reference_n: usize,
    pub w1_to_reference: Vec<f64>,
    /// Slope of log W1 against log N (negative for convergence).
    pub fitted_order: f64,
    /// W1 to reference nonincreasing in N within 20% slack.
    pub monotone_ok: bool,
    pub max_thinning_bound: f64,
}

pub fn run_meanfield(
    model: &ModelSpec,
    sampler: &SamplerSpec,
    n_values: &[usize],
    t_end: f64,
    dt: f64,
) -> Result<MeanFieldReport, HarnessError> {
    init_thread_pool();
    if n_values.len() < 2 || n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::InvalidScenario(
            "n_values must be strictly increasing with at least two entries".into(),
        ));
    }
    if sampler.dim() != model.dim {
        return Err(HarnessError::Model(ModelError::DimensionMismatch(
            sampler.dim(),
            model.dim,
        )));
    }
    let reference_n = *n_values.last().unwrap();
    let sim = |n: usize| -> Result<DiscreteMeasure, HarnessError> {
        let f0 = sampler.sample(n)?;
        let config = SimConfig {
            model: model.clone(),
            dt,
            t_end,
            record_every: usize::MAX,
            seed: 0,
        };
        Ok(dynamics::simulate(&f0, &config)?.final_state().clone())
    };
    let reference = sim(reference_n)?;
    let compare: Vec<usize> = n_values[..n_values.len() - 1].to_vec();
    let mut w1_to_reference = Vec::with_capacity(compare.len());
    let mut max_thinning_bound: f64 = 0.0;
    for &n in &compare {
        let end = sim(n)?;
        let (w1, bound) = w1_capped(&end, &reference)?;
        w1_to_reference.push(w1);
        max_thinning_bound = max_thinning_bound.max(bound);
    }
    let xs: Vec<f64> = compare.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = w1_to_reference.iter().map(|w| w.max(1e-300).ln()).collect();
    let (fitted_order, _) = fit_line(&xs, &ys);
    let monotone_ok = w1_to_reference
        .windows(2)
        .all(|w| w[1] <= 1.2 * w[0]);
    let config = serde_json::json!({
        "experiment": "meanfield",
        "model": model,
        "sampler": sampler,
        "n_values": n_values,
        "dt": dt,
        "t_end": t_end,
        "w1_atom_cap": W1_ATOM_CAP,
    });
    let input_hash = content_hash(&config);
    Ok(MeanFieldReport {
        config,
        input_hash,
        n_values: compare,
        reference_n,
        w1_to_reference,
        fitted_order,
        monotone_ok,
        max_thinning_bound,
    })
}

// ---------------------------------------------------------------------------
// Flocking decay
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct FlockingReport {
    pub config: serde_json::Value,
    pub input_hash: String,
    pub times: Vec<f64>,
    pub velocity_diameter_series: Vec<f64>,
    /// Maximal spatial radius about the mass center travelling at the
    /// conserved mean velocity, over the whole run.
    pub r_bar: f64,
    /// Guaranteed decay rate `w(2 r_bar)`.
    pub lambda_bound: f64,
    /// Whether the diameter stayed below its guaranteed envelope at
    /// every recorded time.
    pub decay_ok: bool,
}

pub fn run_flocking(
    f0: &DiscreteMeasure,
    gamma: f64,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<FlockingReport, HarnessError> {
    init_thread_pool();
    let model = ModelSpec::cucker_smale(f0.dim(), gamma);
    let sim = SimConfig {
        model: model.clone(),
        dt,
        t_end,
        record_every: stride,
        seed: 0,
    };
    let traj = dynamics::simulate(f0, &sim)?;
    // center of mass at t = 0 and the conserved mean velocity define
    // the co-moving frame in which the support stays bounded
    let d = f0.dim();
    let mut xc0 = vec![0.0; d];
    for k in 0..f0.len() {
        for c in 0..d {
            xc0[c] += f0.mass(k) * f0.position(k)[c];
        }
    }
    let m = f0.mean_velocity();
    let mut r_bar: f64 = 0.0;
    for (idx, state) in traj.states.iter().enumerate() {
        let t = traj.times[idx];
        for k in 0..state.len() {
            let r: f64 = (0..d)
                .map(|c| (state.position(k)[c] - xc0[c] - m[c] * t).powi(2))
                .sum::<f64>()
                .sqrt();
            r_bar = r_bar.max(r);
        }
    }
    let lambda_bound = models::communication_rate(2.0 * r_bar, gamma);
    let d0 = traj.velocity_diameter[0];
    let decay_ok = traj
        .times
        .iter()
        .zip(&traj.velocity_diameter)
        .all(|(&t, &dv)| dv <= d0 * (-lambda_bound * t).exp() * (1.0 + 1e-6));
    let config = serde_json::json!({
        "experiment": "flocking",
        "model": model,
        "dt": dt,
        "t_end": t_end,
        "stride": stride,
    });
    let input_hash = content_hash(&serde_json::json!({"config": config, "f0": f0}));
    Ok(FlockingReport {
        config,
        input_hash,
        times: traj.times,
        velocity_diameter_series: traj.velocity_diameter,
        r_bar,
        lambda_bound,
        decay_ok,
    })
}

// ---------------------------------------------------------------------------
// Hydrodynamic comparison
// ---------------------------------------------------------------------------

/// Analytic 1-D field on a periodic domain, evaluated at cell centers
/// when building grid states at any resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldProfile {
    Constant {
        value: f64,
    },
    /// `base + amplitude * exp(-(x - center)^2 / width^2)`
    GaussianBump {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `mean + amplitude * sin(2 pi mode x / L)`
    SineWave {
        mean: f64,
        amplitude: f64,
        mode: f64,
    },
}

impl FieldProfile {
    pub fn eval(&self, x: f64, domain_length: f64) -> f64 {
        match self {
            FieldProfile::Constant { value } => *value,
            FieldProfile::GaussianBump {
                base,
                amplitude,
                center,
                width,
            } => {
                let d = x - center;
                base + amplitude * (-d * d / (width * width)).exp()
            }
            FieldProfile::SineWave {
                mean,
                amplitude,
                mode,
            } => mean + amplitude * (2.0 * std::f64::consts::PI * mode * x / domain_length).sin(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridInitial {
    pub domain_length: f64,
    pub rho: FieldProfile,
    pub u: FieldProfile,
}

impl GridInitial {
    /// Discretize onto `n_cells` cells; the density is normalized to
    /// unit total mass after discretization.
    pub fn build_state(&self, n_cells: usize) -> Result<HydroState, HarnessError> {
        let dx = self.domain_length / n_cells as f64;
        let rho: Vec<f64> = (0..n_cells)
            .map(|i| self.rho.eval((i as f64 + 0.5) * dx, self.domain_length))
            .collect();
        if rho.iter().any(|&r| r <= 0.0) {
            return Err(HarnessError::InvalidScenario(
                "density profile must be strictly positive".into(),
            ));
        }
        let mass: f64 = rho.iter().sum::<f64>() * dx;
        let rho: Vec<f64> = rho.iter().map(|r| r / mass).collect();
        let u: Vec<f64> = (0..n_cells)
            .map(|i| self.u.eval((i as f64 + 0.5) * dx, self.domain_length))
            .collect();
        Ok(HydroState::new(self.domain_length, rho, u, 0.0)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldErrors {
    pub rho_sup: f64,
    pub u_sup: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HydroComparisonReport {
    pub config: serde_json::Value,
    pub input_hash: String,
    pub resolutions: Vec<(usize, usize)>,
    pub field_errors: Vec<FieldErrors>,
    pub w1_errors: Vec<f64>,
    pub monokineticity_series: Vec<f64>,
    /// Largest deviation of the grid solver's total mass from 1 over
    /// each run.
    pub mass_drift: Vec<f64>,
}

pub fn run_hydro_comparison(
    hydro_config: &HydroConfig,
    initial: &GridInitial,
    resolutions: &[(usize, usize)],
    particle_dt: f64,
) -> Result<HydroComparisonReport, HarnessError> {
    init_thread_pool();
    hydro_config.validate()?;
    if resolutions.is_empty() {
        return Err(HarnessError::InvalidScenario(
            "at least one (n_atoms, n_cells) resolution is required".into(),
        ));
    }
    let mut field_errors = Vec::new();
    let mut w1_errors = Vec::new();
    let mut monokineticity_series = Vec::new();
    let mut mass_drift = Vec::new();
    for &(n_atoms, n_cells) in resolutions {
        let grid0 = initial.build_state(n_cells)?;
        let snaps = hydro::hydro_run(&grid0, hydro_config, usize::MAX)?;
        let drift = snaps
            .iter()
            .map(|s| (s.total_mass() - 1.0).abs())
            .fold(0.0f64, f64::max);
        let grid_end = snaps.last().unwrap().clone();

        let f0 = hydro::monokinetic_init(&grid0, n_atoms);
        let sim = SimConfig {
            model: hydro_config.model.clone(),
            dt: particle_dt,
            t_end: hydro_config.t_end,
            record_every: usize::MAX,
            seed: 0,
        };
        let particle_end = dynamics::simulate(&f0, &sim)?.final_state().clone();

        let rec = hydro::reconstruct_fields(&particle_end, n_cells, initial.domain_length)?;
        let rho_max = grid_end.rho.iter().fold(0.0f64, |a, &b| a.max(b));
        let mut rho_sup: f64 = 0.0;
        let mut u_sup: f64 = 0.0;
        for i in 0..n_cells {
            rho_sup = rho_sup.max((rec.state.rho[i] - grid_end.rho[i]).abs());
            // velocity comparison only where both sides carry mass:
            // empty or near-vacuum cells have no meaningful velocity
            if !rec.empty_cells.contains(&i) && grid_end.rho[i] > 0.01 * rho_max {
                u_sup = u_sup.max((rec.state.u[i] - grid_end.u[i]).abs());
            }
        }

        let reference = hydro::monokinetic_init(&grid_end, n_atoms);
        let (w1, _) = w1_capped(&particle_end, &reference)?;
        field_errors.push(FieldErrors { rho_sup, u_sup });
        w1_errors.push(w1);
        monokineticity_series.push(hydro::monokineticity_deviation(&particle_end, &grid_end));
        mass_drift.push(drift);
    }
    let config = serde_json::json!({
        "experiment": "hydro_compare",
        "model": hydro_config.model,
        "cfl": hydro_config.cfl,
        "t_end": hydro_config.t_end,
        "initial": initial,
        "resolutions": resolutions,
        "particle_dt": particle_dt,
    });
    let input_hash = content_hash(&config);
    Ok(HydroComparisonReport {
        config,
        input_hash,
        resolutions: resolutions.to_vec(),
        field_errors,
        w1_errors,
        monokineticity_series,
        mass_drift,
    })
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

/// On-disk experiment description:
/// `{"model": ..., "initial": ..., "dt": ..., "t_end": ..., "experiment": ...}`.
#[derive(Debug, Clone, Deserialize)]
pub struct Scenario {
    pub model: ModelSpec,
    pub initial: InitialSpec,
    pub dt: f64,
    pub t_end: f64,
    pub experiment: ExperimentSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    /// Explicit atom list.
    Atoms { measure: DiscreteMeasure },
    /// Low-discrepancy sample from a product of 1-D profiles.
    Sampled {
        n: usize,
        position: Vec<Profile1D>,
        velocity: Vec<Profile1D>,
    },
    /// Analytic periodic fields (hydro experiments).
    Grid {
        domain_length: f64,
        rho: FieldProfile,
        u: FieldProfile,
    },
}

impl InitialSpec {
    pub fn build_measure(&self) -> Result<DiscreteMeasure, HarnessError> {
        match self {
            InitialSpec::Atoms { measure } => Ok(measure.clone()),
            InitialSpec::Sampled {
                n,
                position,
                velocity,
            } => SamplerSpec {
                position: position.clone(),
                velocity: velocity.clone(),
            }
            .sample(*n),
            InitialSpec::Grid { .. } => Err(HarnessError::InvalidScenario(
                "grid initial data requires a hydro experiment".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentSpec {
    Simulate {
        #[serde(default = "default_stride")]
        record_every: usize,
        #[serde(default)]
        dump_atoms: bool,
    },
    Stability {
        perturbation: f64,
        #[serde(default = "default_stride")]
        stride: usize,
    },
    Meanfield {
        /// Strictly increasing; the largest entry is the reference.
        n_values: Vec<usize>,
    },
    Flocking {
        #[serde(default = "default_stride")]
        stride: usize,
    },
    HydroCompare {
        resolutions: Vec<(usize, usize)>,
        #[serde(default = "default_cfl")]
        cfl: f64,
    },
}

fn default_stride() -> usize {
    1
}

fn default_cfl() -> f64 {
    0.4
}

/// Everything a scenario run produces: the JSON report, CSV series for
/// plotting, whether theorem-backed assertions held, and the optional
/// trajectory JSONL dump.
pub struct ScenarioOutput {
    pub report: serde_json::Value,
    pub csv: Vec<(String, String)>,
    pub invariants_ok: bool,
    pub trajectory_jsonl: Option<String>,
}

pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioOutput, HarnessError> {
    init_thread_pool();
    scenario.model.validate()?;
    match &scenario.experiment {
        ExperimentSpec::Simulate {
            record_every,
            dump_atoms,
        } => {
            let f0 = scenario.initial.build_measure()?;
            let sim = SimConfig {
                model: scenario.model.clone(),
                dt: scenario.dt,
                t_end: scenario.t_end,
                record_every: *record_every,
                seed: 0,
            };
            let traj = dynamics::simulate(&f0, &sim)?;
            let mut jsonl = Vec::new();
            traj.write_jsonl(&mut jsonl, *dump_atoms)
                .expect("writing to a Vec cannot fail");
            let mut csv = String::from("t,support_radius,velocity_diameter\n");
            for k in 0..traj.len() {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    traj.times[k], traj.support_radius[k], traj.velocity_diameter[k]
                ));
            }
            let config = serde_json::json!({
                "experiment": "simulate",
                "model": scenario.model,
                "dt": scenario.dt,
                "t_end": scenario.t_end,
                "record_every": record_every,
            });
            let input_hash =
                content_hash(&serde_json::json!({"config": config, "f0": f0}));
            let report = serde_json::json!({
                "config": config,
                "input_hash": input_hash,
                "times": traj.times,
                "support_radius": traj.support_radius,
                "velocity_diameter": traj.velocity_diameter,
                "support_growth_rate": traj.support_growth_rate(),
            });
            Ok(ScenarioOutput {
                report,
                csv: vec![("series.csv".into(), csv)],
                invariants_ok: true,
                trajectory_jsonl: Some(String::from_utf8(jsonl).expect("jsonl is utf-8")),
            })
        }
        ExperimentSpec::Stability {
            perturbation,
            stride,
        } => {
            let f0 = scenario.initial.build_measure()?;
            let g0 = perturb_measure(&f0, *perturbation);
            let report = run_stability(
                &scenario.model,
                &f0,
                &g0,
                scenario.t_end,
                scenario.dt,
                *stride,
            )?;
            let mut csv = String::from("t,w1,ratio\n");
            for k in 0..report.times.len() {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    report.times[k], report.w1_series[k], report.ratio_series[k]
                ));
            }
            let ok = report.violation_count == 0
                && (report.ratio_series[0] - 1.0).abs() <= 1e-9;
            Ok(ScenarioOutput {
                report: serde_json::to_value(&report).expect("report serializes"),
                csv: vec![("stability_series.csv".into(), csv)],
                invariants_ok: ok,
                trajectory_jsonl: None,
            })
        }
        ExperimentSpec::Meanfield { n_values } => {
            let sampler = match &scenario.initial {
                InitialSpec::Sampled {
                    position, velocity, ..
                } => SamplerSpec {
                    position: position.clone(),
                    velocity: velocity.clone(),
                },
                _ => {
                    return Err(HarnessError::InvalidScenario(
                        "meanfield experiments need sampled initial data".into(),
                    ))
                }
            };
            let report = run_meanfield(
                &scenario.model,
                &sampler,
                n_values,
                scenario.t_end,
                scenario.dt,
            )?;
            let mut csv = String::from("n,w1_to_reference\n");
            for (n, w1) in report.n_values.iter().zip(&report.w1_to_reference) {
                csv.push_str(&format!("{n},{w1}\n"));
            }
            let ok = report.monotone_ok
                && report.w1_to_reference.last() < report.w1_to_reference.first();
            Ok(ScenarioOutput {
                report: serde_json::to_value(&report).expect("report serializes"),
                csv: vec![("meanfield_series.csv".into(), csv)],
                invariants_ok: ok,
                trajectory_jsonl: None,
            })
        }
        ExperimentSpec::Flocking { stride } => {
            let gamma = match &scenario.model.alignment {
                Some(a) => a.gamma,
                None => {
                    return Err(HarnessError::InvalidScenario(
                        "flocking experiments need an alignment term".into(),
                    ))
                }
            };
            if !scenario.model.is_alignment_only() {
                return Err(HarnessError::InvalidScenario(
                    "flocking experiments are alignment-only".into(),
                ));
            }
            let f0 = scenario.initial.build_measure()?;
            let report = run_flocking(&f0, gamma, scenario.t_end, scenario.dt, *stride)?;
            let mut csv = String::from("t,velocity_diameter,envelope\n");
            let d0 = report.velocity_diameter_series[0];
            for (t, dv) in report.times.iter().zip(&report.velocity_diameter_series) {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    t,
                    dv,
                    d0 * (-report.lambda_bound * t).exp()
                ));
            }
            let ok = report.decay_ok;
            Ok(ScenarioOutput {
                report: serde_json::to_value(&report).expect("report serializes"),
                csv: vec![("flocking_series.csv".into(), csv)],
                invariants_ok: ok,
                trajectory_jsonl: None,
            })
        }
        ExperimentSpec::HydroCompare { resolutions, cfl } => {
            let initial = match &scenario.initial {
                InitialSpec::Grid {
                    domain_length,
                    rho,
                    u,
                } => GridInitial {
                    domain_length: *domain_length,
                    rho: rho.clone(),
                    u: u.clone(),
                },
                _ => {
                    return Err(HarnessError::InvalidScenario(
                        "hydro experiments need grid initial data".into(),
                    ))
                }
            };
            let config = HydroConfig {
                model: scenario.model.clone(),
                cfl: *cfl,
                t_end: scenario.t_end,
                shock_threshold: hydro::DEFAULT_SHOCK_THRESHOLD,
            };
            let report = run_hydro_comparison(&config, &initial, resolutions, scenario.dt)?;
            let mut csv = String::from("n_atoms,n_cells,rho_sup,u_sup,w1,monokineticity\n");
            for (k, &(na, nc)) in report.resolutions.iter().enumerate() {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    na,
                    nc,
                    report.field_errors[k].rho_sup,
                    report.field_errors[k].u_sup,
                    report.w1_errors[k],
                    report.monokineticity_series[k]
                ));
            }
            // refinement must not increase the errors (20% slack)
            let ok = report.w1_errors.windows(2).all(|w| w[1] <= 1.2 * w[0])
                && report
                    .field_errors
                    .windows(2)
                    .all(|w| w[1].rho_sup <= 1.2 * w[0].rho_sup)
                && report.mass_drift.iter().all(|&d| d <= 1e-9);
            Ok(ScenarioOutput {
                report: serde_json::to_value(&report).expect("report serializes"),
                csv: vec![("hydro_series.csv".into(), csv)],
                invariants_ok: ok,
                trajectory_jsonl: None,
            })
        }
    }
}
