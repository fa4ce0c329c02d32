//! 1-D periodic finite-volume solver for the mono-kinetic
//! hydrodynamic system
//!
//! ```text
//! d_t rho + d_x(rho u) = 0
//! d_t u + u d_x u      = u (alpha - beta u^2) - (U' * rho)
//! ```
//!
//! together with the bridging utilities that move between a grid
//! solution `(rho, u)` and a phase-space atomic measure concentrated on
//! the graph `v = u(x)`.

use crate::measures::{DiscreteMeasure, PhasePoint};
use crate::models::{ModelError, ModelSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum slack on the discrete total mass `sum rho_i dx = 1`.
pub const MASS_TOL: f64 = 1e-10;
/// Velocity jump between neighbor cells past which the smooth-solution
/// regime is considered lost.
pub const DEFAULT_SHOCK_THRESHOLD: f64 = 0.5;
const CFL_VELOCITY_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum HydroError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("velocity jump {max_jump} exceeds shock threshold at t = {t}")]
    ShockSuspected { t: f64, max_jump: f64 },
    #[error("field became non-finite at t = {t}")]
    NonFinite { t: f64 },
}

/// Periodic cell-averaged fields on `[0, domain_length)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroState {
    pub n_cells: usize,
    pub domain_length: f64,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
}

impl HydroState {
    pub fn new(
        domain_length: f64,
        rho: Vec<f64>,
        u: Vec<f64>,
        t: f64,
    ) -> Result<Self, HydroError> {
        let state = HydroState {
            n_cells: rho.len(),
            domain_length,
            rho,
            u,
            t,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<(), HydroError> {
        if self.n_cells == 0 || self.rho.len() != self.n_cells || self.u.len() != self.n_cells {
            return Err(HydroError::InvalidConfig(
                "rho and u must be nonempty and the same length".into(),
            ));
        }
        if !(self.domain_length > 0.0) {
            return Err(HydroError::InvalidConfig(
                "domain_length must be positive".into(),
            ));
        }
        if !self
            .rho
            .iter()
            .chain(self.u.iter())
            .all(|c| c.is_finite())
        {
            return Err(HydroError::NonFinite { t: self.t });
        }
        if self.rho.iter().any(|&r| r < 0.0) {
            return Err(HydroError::InvalidConfig("rho must be nonnegative".into()));
        }
        let mass = self.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(HydroError::InvalidConfig(format!(
                "total mass {mass} is not 1"
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.domain_length / self.n_cells as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.dx()
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    /// Velocity field at an arbitrary point, by periodic linear
    /// interpolation between cell centers.
    pub fn interp_u(&self, x: f64) -> f64 {
        let n = self.n_cells as f64;
        let s = (x / self.dx() - 0.5).rem_euclid(n);
        let i0 = s.floor() as usize % self.n_cells;
        let frac = s - s.floor();
        let i1 = (i0 + 1) % self.n_cells;
        (1.0 - frac) * self.u[i0] + frac * self.u[i1]
    }

    /// Long-format CSV rows `t, cell_center, rho, u` for this snapshot.
    pub fn write_csv_rows<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.n_cells {
            writeln!(
                w,
                "{},{},{},{}",
                self.t,
                self.cell_center(i),
                self.rho[i],
                self.u[i]
            )?;
        }
        Ok(())
    }
}

/// Long-format CSV with header for a sequence of snapshots.
pub fn write_csv<W: std::io::Write>(
    snapshots: &[HydroState],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "t,cell_center,rho,u")?;
    for s in snapshots {
        s.write_csv_rows(&mut w)?;
    }
    Ok(())
}

fn default_cfl() -> f64 {
    0.4
}

fn default_shock_threshold() -> f64 {
    DEFAULT_SHOCK_THRESHOLD
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HydroConfig {
    /// Restricted to `dim = 1` with self-propulsion and/or potential
    /// terms only: the hydrodynamic system has no alignment analogue
    /// here.
    pub model: ModelSpec,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    #[serde(default = "default_shock_threshold")]
    pub shock_threshold: f64,
}

impl HydroConfig {
    pub fn validate(&self) -> Result<(), HydroError> {
        if self.model.dim != 1 {
            return Err(HydroError::InvalidConfig(
                "hydro solver is one-dimensional".into(),
            ));
        }
        if self.model.alignment.is_some() || self.model.lle.is_some() {
            return Err(HydroError::InvalidConfig(
                "alignment and front/behind terms have no hydrodynamic form".into(),
            ));
        }
        if self.model.self_propulsion.is_none() && self.model.potential.is_none() {
            return Err(HydroError::Model(ModelError::NoTerms));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(HydroError::InvalidConfig("cfl must lie in (0,1)".into()));
        }
        if !(self.t_end > 0.0) {
            return Err(HydroError::InvalidConfig("t_end must be positive".into()));
        }
        if !(self.shock_threshold > 0.0) {
            return Err(HydroError::InvalidConfig(
                "shock_threshold must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// CFL-limited step size for the current velocity field.
pub fn stable_dt(state: &HydroState, config: &HydroConfig) -> f64 {
    let umax = state.u.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    config.cfl * state.dx() / (umax + CFL_VELOCITY_FLOOR)
}

/// `(U' * rho)(x_i)` per cell: direct quadrature with the kernel
/// evaluated on the minimal-image displacement.
fn potential_force(state: &HydroState, model: &ModelSpec) -> Vec<f64> {
    let Some(pot) = &model.potential else {
        return vec![0.0; state.n_cells];
    };
    let dx = state.dx();
    let l = state.domain_length;
    (0..state.n_cells)
        .map(|i| {
            let xi = state.cell_center(i);
            let mut sum = 0.0;
            for j in 0..state.n_cells {
                let mut d = xi - state.cell_center(j);
                d -= l * (d / l).round(); // minimal image
                if d != 0.0 {
                    sum += pot.derivative_at_radius(d.abs()) * d.signum() * state.rho[j] * dx;
                }
            }
            sum
        })
        .collect()
}

/// One explicit first-order step. `dt` is chosen by [`stable_dt`] but
/// may be clamped by the caller to land exactly on `t_end`.
pub fn hydro_step(
    state: &HydroState,
    config: &HydroConfig,
    dt: f64,
) -> Result<HydroState, HydroError> {
    let n = state.n_cells;
    let dx = state.dx();

    let max_jump = (0..n)
        .map(|i| (state.u[(i + 1) % n] - state.u[i]).abs())
        .fold(0.0f64, f64::max);
    if max_jump > config.shock_threshold {
        return Err(HydroError::ShockSuspected {
            t: state.t,
            max_jump,
        });
    }

    // Conservative upwind mass flux with face velocity averaged from
    // the adjacent cells; the update telescopes, so the total mass is
    // preserved to roundoff.
    let flux: Vec<f64> = (0..n)
        .map(|i| {
            let ip = (i + 1) % n;
            let v_face = 0.5 * (state.u[i] + state.u[ip]);
            if v_face >= 0.0 {
                v_face * state.rho[i]
            } else {
                v_face * state.rho[ip]
            }
        })
        .collect();
    let rho: Vec<f64> = (0..n)
        .map(|i| {
            let im = (i + n - 1) % n;
            state.rho[i] - dt / dx * (flux[i] - flux[im])
        })
        .collect();

    let grad_conv = potential_force(state, &config.model);
    let u: Vec<f64> = (0..n)
        .map(|i| {
            let ui = state.u[i];
            let advect = if ui >= 0.0 {
                ui * (ui - state.u[(i + n - 1) % n]) / dx
            } else {
                ui * (state.u[(i + 1) % n] - ui) / dx
            };
            let mut source = -grad_conv[i];
            if let Some(sp) = &config.model.self_propulsion {
                source += ui * (sp.alpha - sp.beta * ui * ui);
            }
            ui + dt * (source - advect)
        })
        .collect();

    if !rho.iter().chain(u.iter()).all(|c| c.is_finite()) {
        return Err(HydroError::NonFinite { t: state.t + dt });
    }
    Ok(HydroState {
        n_cells: n,
        domain_length: state.domain_length,
        rho,
        u,
        t: state.t + dt,
    })
}

/// Evolve to `config.t_end`, returning snapshots every `record_every`
/// steps (the initial and final states are always included).
pub fn hydro_run(
    initial: &HydroState,
    config: &HydroConfig,
    record_every: usize,
) -> Result<Vec<HydroState>, HydroError> {
    config.validate()?;
    initial.validate()?;
    let stride = record_every.max(1);
    let mut snapshots = vec![initial.clone()];
    let mut state = initial.clone();
    let mut step = 0usize;
    while state.t < config.t_end - 1e-12 {
        let dt = stable_dt(&state, config).min(config.t_end - state.t);
        state = hydro_step(&state, config, dt)?;
        step += 1;
        if step % stride == 0 || state.t >= config.t_end - 1e-12 {
            snapshots.push(state.clone());
        }
    }
    Ok(snapshots)
}

/// Atomic measure concentrated on the graph `v = u(x)`: atom `k` sits
/// at the `(k - 1/2)/n`-quantile of `rho` (linear interpolation within
/// cells) with mass `1/n` and the interpolated velocity.
pub fn monokinetic_init(state: &HydroState, n_atoms: usize) -> DiscreteMeasure {
    assert!(n_atoms > 0, "n_atoms must be positive");
    let dx = state.dx();
    let cell_mass: Vec<f64> = state.rho.iter().map(|&r| r * dx).collect();
    let mut atoms = Vec::with_capacity(n_atoms);
    let mut cell = 0usize;
    let mut cum_before = 0.0;
    for k in 0..n_atoms {
        let target = (k as f64 + 0.5) / n_atoms as f64;
        while cell + 1 < state.n_cells && cum_before + cell_mass[cell] < target {
            cum_before += cell_mass[cell];
            cell += 1;
        }
        let frac = if cell_mass[cell] > 0.0 {
            ((target - cum_before) / cell_mass[cell]).clamp(0.0, 1.0)
        } else {
            0.5
        };
        let x = (cell as f64 + frac) * dx;
        let v = state.interp_u(x);
        atoms.push((PhasePoint::new(vec![x], vec![v]), 1.0 / n_atoms as f64));
    }
    DiscreteMeasure::new(atoms).expect("quantile atoms are valid by construction")
}

/// Grid fields recovered from an atomic measure, with the indices of
/// cells that received no mass (their velocity is reported as 0).
#[derive(Debug, Clone)]
pub struct ReconstructedFields {
    pub state: HydroState,
    pub empty_cells: Vec<usize>,
}

/// Mass histogram for `rho` and mass-weighted mean velocity per cell.
pub fn reconstruct_fields(
    f: &DiscreteMeasure,
    n_cells: usize,
    domain_length: f64,
) -> Result<ReconstructedFields, HydroError> {
    if f.dim() != 1 {
        return Err(HydroError::Model(ModelError::DimensionMismatch(f.dim(), 1)));
    }
    let dx = domain_length / n_cells as f64;
    let mut mass = vec![0.0; n_cells];
    let mut momentum = vec![0.0; n_cells];
    for k in 0..f.len() {
        let x = f.position(k)[0].rem_euclid(domain_length);
        let i = ((x / dx) as usize).min(n_cells - 1);
        mass[i] += f.mass(k);
        momentum[i] += f.mass(k) * f.velocity(k)[0];
    }
    let mut empty_cells = Vec::new();
    let mut u = vec![0.0; n_cells];
    for i in 0..n_cells {
        if mass[i] > 0.0 {
            u[i] = momentum[i] / mass[i];
        } else {
            empty_cells.push(i);
        }
    }
    let rho: Vec<f64> = mass.iter().map(|&m| m / dx).collect();
    Ok(ReconstructedFields {
        state: HydroState {
            n_cells,
            domain_length,
            rho,
            u,
            t: 0.0,
        },
        empty_cells,
    })
}

/// `max_k |v_k - u(x_k)|`: distance of the atomic measure from the
/// graph ansatz `v = u(x)`.
pub fn monokineticity_deviation(f: &DiscreteMeasure, state: &HydroState) -> f64 {
    (0..f.len())
        .map(|k| (f.velocity(k)[0] - state.interp_u(f.position(k)[0])).abs())
        .fold(0.0, f64::max)
}
