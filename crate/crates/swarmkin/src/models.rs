//! Interaction kernels and the acceleration operator.
//!
//! A [`ModelSpec`] combines up to four terms: Rayleigh self-propulsion
//! `(alpha - beta |v|^2) v`, a radial interaction potential convolved
//! with the spatial density, distance-weighted velocity alignment, and
//! smoothed front/behind position-velocity forces. Every evaluator is
//! a pure function of immutable inputs.

use crate::lowdisc::ball_points;
use crate::measures::{DiscreteMeasure, PhasePoint, SpatialMeasure};
use crate::transport::{self, TransportError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("measure support exceeds the stated ball: radius {got} > {bound}")]
    SupportViolation { got: f64, bound: f64 },
    #[error("model must have at least one term")]
    NoTerms,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Self-propulsion and Rayleigh friction, `(alpha - beta |v|^2) v`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct SelfPropulsionSpec {
    pub alpha: f64,
    pub beta: f64,
}

impl SelfPropulsionSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.alpha < 0.0 || self.beta < 0.0 {
            return Err(ModelError::InvalidParameter(
                "alpha and beta must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

pub fn self_propulsion_force(v: &[f64], spec: &SelfPropulsionSpec) -> Vec<f64> {
    let speed2: f64 = v.iter().map(|c| c * c).sum();
    let factor = spec.alpha - spec.beta * speed2;
    v.iter().map(|c| factor * c).collect()
}

/// A custom radial potential profile `k(r)` with its derivative.
pub struct CustomPotential {
    pub profile: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub derivative: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

/// Radial interaction potential `U(x) = k(|x|)`.
#[derive(Clone)]
pub enum PotentialSpec {
    /// `U(x) = -C_A exp(-|x|^2/l_A^2) + C_R exp(-|x|^2/l_R^2)`,
    /// smooth everywhere.
    GaussianMorse { c_a: f64, c_r: f64, l_a: f64, l_r: f64 },
    /// Morse profile with `r` replaced by `sqrt(r^2 + eps^2)` so the
    /// gradient is Lipschitz at the origin.
    SmoothedMorse {
        c_a: f64,
        c_r: f64,
        l_a: f64,
        l_r: f64,
        epsilon: f64,
    },
    Custom(Arc<CustomPotential>),
}

impl std::fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PotentialSpec::GaussianMorse { c_a, c_r, l_a, l_r } => f
                .debug_struct("GaussianMorse")
                .field("c_a", c_a)
                .field("c_r", c_r)
                .field("l_a", l_a)
                .field("l_r", l_r)
                .finish(),
            PotentialSpec::SmoothedMorse {
                c_a,
                c_r,
                l_a,
                l_r,
                epsilon,
            } => f
                .debug_struct("SmoothedMorse")
                .field("c_a", c_a)
                .field("c_r", c_r)
                .field("l_a", l_a)
                .field("l_r", l_r)
                .field("epsilon", epsilon)
                .finish(),
            PotentialSpec::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PotentialSpec {
    /// Smoothed Morse with the default smoothing length
    /// `1e-3 * min(l_a, l_r)`.
    pub fn smoothed_morse(c_a: f64, c_r: f64, l_a: f64, l_r: f64) -> Self {
        PotentialSpec::SmoothedMorse {
            c_a,
            c_r,
            l_a,
            l_r,
            epsilon: 1e-3 * l_a.min(l_r),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |c_a: f64, c_r: f64, l_a: f64, l_r: f64| {
            if c_a < 0.0 || c_r < 0.0 {
                return Err(ModelError::InvalidParameter(
                    "potential strengths must be nonnegative".into(),
                ));
            }
            if l_a <= 0.0 || l_r <= 0.0 {
                return Err(ModelError::InvalidParameter(
                    "potential lengths must be positive".into(),
                ));
            }
            Ok(())
        };
        match *self {
            PotentialSpec::GaussianMorse { c_a, c_r, l_a, l_r } => check(c_a, c_r, l_a, l_r),
            PotentialSpec::SmoothedMorse {
                c_a,
                c_r,
                l_a,
                l_r,
                epsilon,
            } => {
                check(c_a, c_r, l_a, l_r)?;
                if epsilon <= 0.0 {
                    return Err(ModelError::InvalidParameter(
                        "smoothing length must be positive".into(),
                    ));
                }
                Ok(())
            }
            PotentialSpec::Custom(_) => Ok(()),
        }
    }

    /// `U(x)` evaluated at `|x| = r`.
    pub fn value_at_radius(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::GaussianMorse { c_a, c_r, l_a, l_r } => {
                -c_a * (-r * r / (l_a * l_a)).exp() + c_r * (-r * r / (l_r * l_r)).exp()
            }
            PotentialSpec::SmoothedMorse {
                c_a,
                c_r,
                l_a,
                l_r,
                epsilon,
            } => {
                let s = (r * r + epsilon * epsilon).sqrt();
                -c_a * (-s / l_a).exp() + c_r * (-s / l_r).exp()
            }
            PotentialSpec::Custom(c) => (c.profile)(r),
        }
    }

    /// Radial derivative `k'(r)`; `grad U(x) = k'(|x|) x / |x|`.
    pub fn derivative_at_radius(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::GaussianMorse { c_a, c_r, l_a, l_r } => {
                2.0 * r
                    * (c_a / (l_a * l_a) * (-r * r / (l_a * l_a)).exp()
                        - c_r / (l_r * l_r) * (-r * r / (l_r * l_r)).exp())
            }
            PotentialSpec::SmoothedMorse {
                c_a,
                c_r,
                l_a,
                l_r,
                epsilon,
            } => {
                let s = (r * r + epsilon * epsilon).sqrt();
                // dU/ds * ds/dr with ds/dr = r / s
                (c_a / l_a * (-s / l_a).exp() - c_r / l_r * (-s / l_r).exp()) * (r / s)
            }
            PotentialSpec::Custom(c) => (c.derivative)(r),
        }
    }

    /// Analytic bound on the Lipschitz constant of `grad U` where one
    /// is available (GaussianMorse Hessian norm); `None` otherwise.
    pub fn grad_lipschitz_bound(&self) -> Option<f64> {
        match *self {
            // Hessian of each Gaussian term: (2C/l^2) e^{-s} (I - 2 x x^T / l^2)
            // with s = |x|^2/l^2; its operator norm is
            // (2C/l^2) e^{-s} max(1, |2s - 1|) <= 2C/l^2 for all s >= 0.
            PotentialSpec::GaussianMorse { c_a, c_r, l_a, l_r } => {
                Some(2.0 * c_a / (l_a * l_a) + 2.0 * c_r / (l_r * l_r))
            }
            _ => None,
        }
    }

    /// Sampled estimate of the Lipschitz constant of `grad U` on the
    /// ball of radius `r_max`, for kernels without an analytic bound.
    pub fn grad_lipschitz_sampled(&self, dim: usize, r_max: f64) -> f64 {
        let pts = ball_points(60, dim, r_max);
        let mut lip: f64 = 0.0;
        for (a_idx, a) in pts.iter().enumerate() {
            let ga = potential_gradient(a, self);
            for b in pts.iter().skip(a_idx + 1) {
                let gb = potential_gradient(b, self);
                let dist = a
                    .iter()
                    .zip(b)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt();
                if dist > 1e-9 {
                    let diff = ga
                        .iter()
                        .zip(&gb)
                        .map(|(p, q)| (p - q) * (p - q))
                        .sum::<f64>()
                        .sqrt();
                    lip = lip.max(diff / dist);
                }
            }
        }
        lip
    }

    /// Constant `C` with `|grad U(x)| <= C (1 + |x|)` for GaussianMorse:
    /// each term `(2C/l^2) r e^{-r^2/l^2}` peaks at `r = l/sqrt(2)`.
    pub fn grad_growth_bound(&self) -> Option<f64> {
        match *self {
            PotentialSpec::GaussianMorse { c_a, c_r, l_a, l_r } => {
                let peak = |c: f64, l: f64| 2.0_f64.sqrt() * c / l * (-0.5_f64).exp();
                Some(peak(c_a, l_a) + peak(c_r, l_r))
            }
            _ => None,
        }
    }
}

/// `U(x)` as a function on `R^d`.
pub fn potential_value(x: &[f64], spec: &PotentialSpec) -> f64 {
    spec.value_at_radius(norm(x))
}

/// `grad U(x)`; radial symmetry forces `grad U(0) = 0`.
pub fn potential_gradient(x: &[f64], spec: &PotentialSpec) -> Vec<f64> {
    let r = norm(x);
    if r == 0.0 {
        return vec![0.0; x.len()];
    }
    let slope = spec.derivative_at_radius(r) / r;
    x.iter().map(|c| slope * c).collect()
}

/// The field `E(x) = -sum_j m_j grad U(x - x_j)` generated by a
/// spatial measure. The self atom contributes `grad U(0)`.
pub fn interaction_field(
    x: &[f64],
    rho: &SpatialMeasure,
    spec: &PotentialSpec,
) -> Result<Vec<f64>, ModelError> {
    if x.len() != rho.dim() {
        return Err(ModelError::DimensionMismatch(x.len(), rho.dim()));
    }
    let d = x.len();
    let mut field = vec![0.0; d];
    let mut diff = vec![0.0; d];
    for j in 0..rho.len() {
        let xj = rho.position(j);
        for k in 0..d {
            diff[k] = x[k] - xj[k];
        }
        let grad = potential_gradient(&diff, spec);
        let m = rho.mass(j);
        for k in 0..d {
            field[k] -= m * grad[k];
        }
    }
    Ok(field)
}

/// Cucker-Smale style velocity alignment with communication rate
/// `w(r) = (1 + r^2)^{-gamma}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct AlignmentSpec {
    pub gamma: f64,
}

impl AlignmentSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.gamma < 0.0 {
            return Err(ModelError::InvalidParameter(
                "gamma must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// `w(r) = (1 + r^2)^{-gamma}`, in `(0, 1]` and nonincreasing.
pub fn communication_rate(r: f64, gamma: f64) -> f64 {
    (1.0 + r * r).powf(-gamma)
}

/// Consensus-seeking acceleration at `p = (x, v)`:
/// `sum_j m_j w(|x - x_j|) (v_j - v)`.
pub fn alignment_field(
    p: &PhasePoint,
    f: &DiscreteMeasure,
    spec: &AlignmentSpec,
) -> Result<Vec<f64>, ModelError> {
    if p.dim() != f.dim() {
        return Err(ModelError::DimensionMismatch(p.dim(), f.dim()));
    }
    let d = p.dim();
    let mut acc = vec![0.0; d];
    for j in 0..f.len() {
        let xj = f.position(j);
        let vj = f.velocity(j);
        let r = p
            .x
            .iter()
            .zip(xj)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let w = f.mass(j) * communication_rate(r, spec.gamma);
        for k in 0..d {
            acc[k] += w * (vj[k] - p.v[k]);
        }
    }
    Ok(acc)
}

/// A scalar radial profile used by the front/behind forces.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    Zero,
    Constant { value: f64 },
    /// `amp * exp(-r / scale)`
    Exponential { amp: f64, scale: f64 },
    /// `attract * exp(-r / l_attract) - repel * exp(-r / l_repel)`
    AttractRepel {
        attract: f64,
        l_attract: f64,
        repel: f64,
        l_repel: f64,
    },
}

impl RadialProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialProfile::Zero => 0.0,
            RadialProfile::Constant { value } => value,
            RadialProfile::Exponential { amp, scale } => amp * (-r / scale).exp(),
            RadialProfile::AttractRepel {
                attract,
                l_attract,
                repel,
                l_repel,
            } => attract * (-r / l_attract).exp() - repel * (-r / l_repel).exp(),
        }
    }
}

/// Front/behind position and velocity forces with a smoothed switch.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LLESpec {
    pub g_plus: RadialProfile,
    pub g_minus: RadialProfile,
    pub h_plus: RadialProfile,
    pub h_minus: RadialProfile,
    #[serde(default = "default_blend_width")]
    pub blend_width: f64,
    #[serde(default = "default_vel_epsilon")]
    pub vel_epsilon: f64,
}

fn default_blend_width() -> f64 {
    0.1
}

fn default_vel_epsilon() -> f64 {
    1e-6
}

impl LLESpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.blend_width <= 0.0 || self.vel_epsilon <= 0.0 {
            return Err(ModelError::InvalidParameter(
                "blend_width and vel_epsilon must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn sigmoid(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

/// Mass-weighted front/behind force at `p`. The front/behind selector
/// is `S(((x_j - x) . v) / blend_width)` and direction vectors are
/// regularized as `u / sqrt(|u|^2 + vel_epsilon^2)`.
pub fn lle_force(
    p: &PhasePoint,
    f: &DiscreteMeasure,
    spec: &LLESpec,
) -> Result<Vec<f64>, ModelError> {
    if p.dim() != f.dim() {
        return Err(ModelError::DimensionMismatch(p.dim(), f.dim()));
    }
    let d = p.dim();
    let eps2 = spec.vel_epsilon * spec.vel_epsilon;
    let mut acc = vec![0.0; d];
    for j in 0..f.len() {
        let xj = f.position(j);
        let vj = f.velocity(j);
        let m = f.mass(j);
        let mut dx = vec![0.0; d];
        let mut dv = vec![0.0; d];
        let mut along_v = 0.0;
        for k in 0..d {
            dx[k] = xj[k] - p.x[k];
            dv[k] = vj[k] - p.v[k];
            along_v += dx[k] * p.v[k];
        }
        let rx = norm(&dx);
        let rv = norm(&dv);
        let theta = sigmoid(along_v / spec.blend_width);
        let g = theta * spec.g_plus.eval(rx) + (1.0 - theta) * spec.g_minus.eval(rx);
        let h = theta * spec.h_plus.eval(rv) + (1.0 - theta) * spec.h_minus.eval(rv);
        let gx = g / (rx * rx + eps2).sqrt();
        let hv = h / (rv * rv + eps2).sqrt();
        for k in 0..d {
            acc[k] += m * (gx * dx[k] + hv * dv[k]);
        }
    }
    Ok(acc)
}

/// Full parameterization of the acceleration operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_propulsion: Option<SelfPropulsionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alignment: Option<AlignmentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lle: Option<LLESpec>,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.dim == 0 {
            return Err(ModelError::InvalidParameter("dim must be >= 1".into()));
        }
        if self.self_propulsion.is_none()
            && self.potential.is_none()
            && self.alignment.is_none()
            && self.lle.is_none()
        {
            return Err(ModelError::NoTerms);
        }
        if let Some(sp) = &self.self_propulsion {
            sp.validate()?;
        }
        if let Some(p) = &self.potential {
            p.validate()?;
        }
        if let Some(a) = &self.alignment {
            a.validate()?;
        }
        if let Some(l) = &self.lle {
            l.validate()?;
        }
        Ok(())
    }

    /// Classical D'Orsogna configuration: self-propulsion plus a
    /// Gaussian attraction-repulsion potential.
    pub fn dorsogna(
        dim: usize,
        alpha: f64,
        beta: f64,
        potential: PotentialSpec,
    ) -> Self {
        ModelSpec {
            dim,
            self_propulsion: Some(SelfPropulsionSpec { alpha, beta }),
            potential: Some(potential),
            alignment: None,
            lle: None,
        }
    }

    /// Pure Cucker-Smale alignment model.
    pub fn cucker_smale(dim: usize, gamma: f64) -> Self {
        ModelSpec {
            dim,
            self_propulsion: None,
            potential: None,
            alignment: Some(AlignmentSpec { gamma }),
            lle: None,
        }
    }

    pub fn is_alignment_only(&self) -> bool {
        self.alignment.is_some()
            && self.self_propulsion.is_none()
            && self.potential.is_none()
            && self.lle.is_none()
    }
}

/// Evaluate the acceleration operator at a single phase point.
pub fn operator_eval(
    p: &PhasePoint,
    f: &DiscreteMeasure,
    model: &ModelSpec,
) -> Result<Vec<f64>, ModelError> {
    let rho = f.first_marginal();
    operator_eval_with_marginal(p, f, &rho, model)
}

/// Same as [`operator_eval`] but reusing a precomputed first marginal;
/// the per-step driver calls this once per atom.
pub fn operator_eval_with_marginal(
    p: &PhasePoint,
    f: &DiscreteMeasure,
    rho: &SpatialMeasure,
    model: &ModelSpec,
) -> Result<Vec<f64>, ModelError> {
    model.validate()?;
    if p.dim() != model.dim || f.dim() != model.dim {
        return Err(ModelError::DimensionMismatch(p.dim(), model.dim));
    }
    let d = model.dim;
    let mut acc = vec![0.0; d];
    if let Some(sp) = &model.self_propulsion {
        let term = self_propulsion_force(&p.v, sp);
        for k in 0..d {
            acc[k] += term[k];
        }
    }
    if let Some(pot) = &model.potential {
        let term = interaction_field(&p.x, rho, pot)?;
        for k in 0..d {
            acc[k] += term[k];
        }
    }
    if let Some(al) = &model.alignment {
        let term = alignment_field(p, f, al)?;
        for k in 0..d {
            acc[k] += term[k];
        }
    }
    if let Some(lle) = &model.lle {
        let term = lle_force(p, f, lle)?;
        for k in 0..d {
            acc[k] += term[k];
        }
    }
    Ok(acc)
}

/// Accelerations for every atom of `f`, flattened row-major. The
/// computation parallelizes over the target atom; each atom's
/// neighbor sum runs in ascending index order, so results are
/// identical at any thread count.
pub fn eval_all(f: &DiscreteMeasure, model: &ModelSpec) -> Result<Vec<f64>, ModelError> {
    model.validate()?;
    if f.dim() != model.dim {
        return Err(ModelError::DimensionMismatch(f.dim(), model.dim));
    }
    let rho = f.first_marginal();
    let d = model.dim;
    let per_atom: Result<Vec<Vec<f64>>, ModelError> = (0..f.len())
        .into_par_iter()
        .map(|i| operator_eval_with_marginal(&f.atom(i), f, &rho, model))
        .collect();
    let per_atom = per_atom?;
    let mut flat = Vec::with_capacity(f.len() * d);
    for a in per_atom {
        flat.extend_from_slice(&a);
    }
    Ok(flat)
}

/// Numerical check of the field stability inequality
/// `||E[f] - E[g]||_{L^inf(B_R)} <= Lip_{2R}(grad U) W1(f, g)`.
///
/// Samples at least 100 deterministic points in `B_R`. The Lipschitz
/// constant is analytic for GaussianMorse and a sampled estimate for
/// other kernels.
pub fn field_w1_bound_check(
    f: &DiscreteMeasure,
    g: &DiscreteMeasure,
    spec: &PotentialSpec,
    r: f64,
) -> Result<bool, ModelError> {
    for (name, msr) in [("f", f), ("g", g)] {
        let _ = name;
        let sr = msr.support_radius();
        if sr > r + 1e-12 {
            return Err(ModelError::SupportViolation { got: sr, bound: r });
        }
    }
    let lip = spec
        .grad_lipschitz_bound()
        .unwrap_or_else(|| spec.grad_lipschitz_sampled(f.dim(), 2.0 * r));
    let (w1, _) = transport::w1_exact(f, g)?;
    let rho_f = f.first_marginal();
    let rho_g = g.first_marginal();
    let mut max_diff: f64 = 0.0;
    for x in ball_points(100, f.dim(), r) {
        let ef = interaction_field(&x, &rho_f, spec)?;
        let eg = interaction_field(&x, &rho_g, spec)?;
        let diff = ef
            .iter()
            .zip(&eg)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        max_diff = max_diff.max(diff);
    }
    Ok(max_diff <= lip * w1 + 1e-9)
}

impl Serialize for PotentialSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::Error;
        match *self {
            PotentialSpec::GaussianMorse { c_a, c_r, l_a, l_r } => PotentialJson {
                kind: "gaussian_morse".into(),
                c_a,
                c_r,
                l_a,
                l_r,
                epsilon: None,
            }
            .serialize(ser),
            PotentialSpec::SmoothedMorse {
                c_a,
                c_r,
                l_a,
                l_r,
                epsilon,
            } => PotentialJson {
                kind: "smoothed_morse".into(),
                c_a,
                c_r,
                l_a,
                l_r,
                epsilon: Some(epsilon),
            }
            .serialize(ser),
            PotentialSpec::Custom(_) => Err(S::Error::custom(
                "custom potential profiles cannot be serialized",
            )),
        }
    }
}

impl<'de> Deserialize<'de> for PotentialSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = PotentialJson::deserialize(de)?;
        let spec = match raw.kind.as_str() {
            "gaussian_morse" => PotentialSpec::GaussianMorse {
                c_a: raw.c_a,
                c_r: raw.c_r,
                l_a: raw.l_a,
                l_r: raw.l_r,
            },
            "smoothed_morse" => match raw.epsilon {
                Some(epsilon) => PotentialSpec::SmoothedMorse {
                    c_a: raw.c_a,
                    c_r: raw.c_r,
                    l_a: raw.l_a,
                    l_r: raw.l_r,
                    epsilon,
                },
                None => PotentialSpec::smoothed_morse(raw.c_a, raw.c_r, raw.l_a, raw.l_r),
            },
            other => {
                return Err(D::Error::custom(format!(
                    "unknown potential kind {other:?}"
                )))
            }
        };
        spec.validate().map_err(D::Error::custom)?;
        Ok(spec)
    }
}

#[derive(Serialize, Deserialize)]
struct PotentialJson {
    kind: String,
    #[serde(rename = "C_A")]
    c_a: f64,
    #[serde(rename = "C_R")]
    c_r: f64,
    #[serde(rename = "l_A")]
    l_a: f64,
    #[serde(rename = "l_R")]
    l_r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
}
