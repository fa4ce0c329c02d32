//! Characteristic-flow integrator.
//!
//! Atomic measures are exact solutions of the kinetic equations: each
//! atom follows the characteristic system `dX/dt = V`,
//! `dV/dt = H[f](X, V)` with the self-consistent field re-evaluated at
//! every Runge-Kutta stage. Masses are never written after
//! construction, so mass conservation is exact.

use crate::measures::DiscreteMeasure;
use crate::models::{self, ModelError, ModelSpec};
use crate::transport::{self, TransportError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Simulation parameters. The seed is for harness-level sampling only;
/// the dynamics themselves are deterministic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: ModelSpec,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_record_every() -> usize {
    1
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), DynError> {
        self.model.validate()?;
        if !(self.dt > 0.0) {
            return Err(DynError::InvalidConfig("dt must be positive".into()));
        }
        if self.t_end < self.dt {
            return Err(DynError::InvalidConfig("t_end must be at least dt".into()));
        }
        if self.record_every == 0 {
            return Err(DynError::InvalidConfig(
                "record_every must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Time-indexed sequence of measures with per-time diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DiscreteMeasure>,
    pub support_radius: Vec<f64>,
    pub mean_velocity: Vec<Vec<f64>>,
    pub velocity_diameter: Vec<f64>,
}

impl Trajectory {
    fn record(&mut self, t: f64, state: &DiscreteMeasure) {
        self.times.push(t);
        self.support_radius.push(state.support_radius());
        self.mean_velocity.push(state.mean_velocity());
        self.velocity_diameter.push(state.velocity_diameter());
        self.states.push(state.clone());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DiscreteMeasure {
        self.states.last().expect("trajectory is never empty")
    }

    /// Smallest `C` with `support_radius(t) <= support_radius(0) e^{Ct}`
    /// over the recorded times (0 if the support never grows).
    pub fn support_growth_rate(&self) -> f64 {
        let r0 = self.support_radius[0];
        if r0 == 0.0 {
            return 0.0;
        }
        self.times
            .iter()
            .zip(&self.support_radius)
            .skip(1)
            .map(|(&t, &r)| if r > r0 { (r / r0).ln() / t } else { 0.0 })
            .fold(0.0, f64::max)
    }

    /// One JSON-lines record per recorded time; atom dumps optional.
    pub fn write_jsonl<W: std::io::Write>(
        &self,
        mut w: W,
        dump_atoms: bool,
    ) -> std::io::Result<()> {
        for k in 0..self.len() {
            let mut rec = serde_json::json!({
                "t": self.times[k],
                "support_radius": self.support_radius[k],
                "mean_velocity": self.mean_velocity[k],
                "velocity_diameter": self.velocity_diameter[k],
            });
            if dump_atoms {
                rec["atoms"] = serde_json::to_value(&self.states[k]).unwrap();
            }
            writeln!(w, "{rec}")?;
        }
        Ok(())
    }
}

/// Per-atom derivatives `(dx/dt, dv/dt)` as flat arrays.
pub fn rhs(
    state: &DiscreteMeasure,
    model: &ModelSpec,
    _t: f64,
) -> Result<(Vec<f64>, Vec<f64>), DynError> {
    let dv = models::eval_all(state, model)?;
    Ok((state.velocities_flat().to_vec(), dv))
}

/// One classical 4-stage Runge-Kutta step of an arbitrary phase-space
/// vector field; masses and atom order are preserved exactly.
pub fn step_rk4_with<F>(
    state: &DiscreteMeasure,
    rhs_fn: F,
    t: f64,
    dt: f64,
) -> Result<DiscreteMeasure, DynError>
where
    F: Fn(&DiscreteMeasure, f64) -> Result<(Vec<f64>, Vec<f64>), DynError>,
{
    let dim = state.dim();
    let masses = state.masses().to_vec();
    let x0 = state.positions_flat();
    let v0 = state.velocities_flat();

    let stage = |kx: &[f64], kv: &[f64], h: f64| -> DiscreteMeasure {
        let xs: Vec<f64> = x0.iter().zip(kx).map(|(a, k)| a + h * k).collect();
        let vs: Vec<f64> = v0.iter().zip(kv).map(|(a, k)| a + h * k).collect();
        DiscreteMeasure::from_flat_unchecked(dim, xs, vs, masses.clone())
    };

    let (k1x, k1v) = rhs_fn(state, t)?;
    let s2 = stage(&k1x, &k1v, dt / 2.0);
    let (k2x, k2v) = rhs_fn(&s2, t + dt / 2.0)?;
    let s3 = stage(&k2x, &k2v, dt / 2.0);
    let (k3x, k3v) = rhs_fn(&s3, t + dt / 2.0)?;
    let s4 = stage(&k3x, &k3v, dt);
    let (k4x, k4v) = rhs_fn(&s4, t + dt)?;

    let combine = |y: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
        y.iter()
            .enumerate()
            .map(|(i, a)| a + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    };
    let xs = combine(x0, &k1x, &k2x, &k3x, &k4x);
    let vs = combine(v0, &k1v, &k2v, &k3v, &k4v);
    if !xs.iter().chain(vs.iter()).all(|c| c.is_finite()) {
        return Err(DynError::NonFiniteState { t: t + dt });
    }
    Ok(DiscreteMeasure::from_flat_unchecked(dim, xs, vs, masses))
}

/// One RK4 step of the swarming characteristic system.
pub fn step_rk4(
    state: &DiscreteMeasure,
    model: &ModelSpec,
    t: f64,
    dt: f64,
) -> Result<DiscreteMeasure, DynError> {
    step_rk4_with(state, |s, tt| rhs(s, model, tt), t, dt)
}

/// Evolve `f0` to `t_end`, recording every `record_every`-th step (the
/// initial and final states are always recorded).
pub fn simulate(f0: &DiscreteMeasure, config: &SimConfig) -> Result<Trajectory, DynError> {
    config.validate()?;
    if f0.dim() != config.model.dim {
        return Err(DynError::Model(ModelError::DimensionMismatch(
            f0.dim(),
            config.model.dim,
        )));
    }
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        support_radius: Vec::new(),
        mean_velocity: Vec::new(),
        velocity_diameter: Vec::new(),
    };
    traj.record(0.0, f0);
    let n_steps = (config.t_end / config.dt - 1e-9).ceil().max(1.0) as usize;
    let mut state = f0.clone();
    let mut t = 0.0;
    for step in 1..=n_steps {
        let dt = config.dt.min(config.t_end - t);
        state = step_rk4(&state, &config.model, t, dt)?;
        t = if step == n_steps { config.t_end } else { t + dt };
        if step % config.record_every == 0 || step == n_steps {
            traj.record(t, &state);
        }
    }
    Ok(traj)
}

/// Result of checking the time-regularity bound
/// `W1(f_s, f_t) <= C |t - s|` on a recorded trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct DisplacementReport {
    /// Best constant fitted from consecutive recorded states.
    pub fitted_c: f64,
    /// Largest ratio `W1(f_s, f_t) / (C |t - s|)` over all pairs.
    pub max_ratio: f64,
    /// True when the bound holds within 5% slack for every pair.
    pub ok: bool,
}

pub fn flow_map_displacement_bound(traj: &Trajectory) -> Result<DisplacementReport, DynError> {
    if traj.len() < 3 {
        return Err(DynError::InvalidConfig(
            "displacement bound needs at least 3 recorded states".into(),
        ));
    }
    let mut fitted_c: f64 = 0.0;
    for k in 1..traj.len() {
        let (w1, _) = transport::w1_exact(&traj.states[k - 1], &traj.states[k])?;
        let dt = traj.times[k] - traj.times[k - 1];
        fitted_c = fitted_c.max(w1 / dt);
    }
    let mut max_ratio: f64 = 0.0;
    if fitted_c > 0.0 {
        for a in 0..traj.len() {
            for b in a + 1..traj.len() {
                let (w1, _) = transport::w1_exact(&traj.states[a], &traj.states[b])?;
                let bound = fitted_c * (traj.times[b] - traj.times[a]);
                max_ratio = max_ratio.max(w1 / bound);
            }
        }
    }
    Ok(DisplacementReport {
        fitted_c,
        max_ratio,
        ok: max_ratio <= 1.05,
    })
}
