//! Atomic probability measures on phase space.
//!
//! A [`DiscreteMeasure`] is a finite weighted sum of Dirac deltas at
//! phase-space points `(x, v)`. Atoms are stored as parallel flat
//! arrays addressed by index; atom order is part of the representation
//! and is never sorted or merged.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the total mass of a normalized measure.
pub const MASS_TOL: f64 = 1e-12;
/// Tolerance accepted when loading a measure from JSON.
pub const LOAD_MASS_TOL: f64 = 1e-9;
/// Masses below this are rejected at construction rather than kept as
/// near-degenerate atoms.
pub const MIN_ATOM_MASS: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("measure has no atoms")]
    EmptyMeasure,
    #[error("atom mass must be strictly positive (got {0})")]
    NonpositiveMass(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate or mass")]
    NonFinite,
    #[error("total mass {0} is not 1 within tolerance")]
    MassNotNormalized(f64),
}

/// A point `(x, v)` in phase space `R^d x R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        PhasePoint { x, v }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Euclidean norm of the concatenated `(x, v)` vector in `R^{2d}`.
    pub fn norm(&self) -> f64 {
        self.x
            .iter()
            .chain(self.v.iter())
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Phase-space distance to another point.
    pub fn dist(&self, other: &PhasePoint) -> f64 {
        let dx: f64 = self
            .x
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let dv: f64 = self
            .v
            .iter()
            .zip(&other.v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (dx + dv).sqrt()
    }
}

/// A probability measure made of finitely many weighted atoms in phase
/// space; the computational avatar of `f` in `P_1(R^d x R^d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    positions: Vec<f64>,
    velocities: Vec<f64>,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    /// Build a measure from weighted atoms, checking invariants.
    /// Masses must be strictly positive and sum to 1 within [`MASS_TOL`].
    pub fn new(atoms: Vec<(PhasePoint, f64)>) -> Result<Self, MeasureError> {
        let m = Self::assemble(atoms)?;
        let total: f64 = m.masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(MeasureError::MassNotNormalized(total));
        }
        Ok(m)
    }

    /// Build a measure rescaling the masses to total 1; atom order is
    /// preserved.
    pub fn normalize(atoms: Vec<(PhasePoint, f64)>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::EmptyMeasure);
        }
        for (_, m) in &atoms {
            if !(*m > 0.0) {
                return Err(MeasureError::NonpositiveMass(*m));
            }
        }
        let total: f64 = atoms.iter().map(|(_, m)| m).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(MeasureError::NonpositiveMass(total));
        }
        let rescaled = atoms.into_iter().map(|(p, m)| (p, m / total)).collect();
        Self::assemble(rescaled)
    }

    fn assemble(atoms: Vec<(PhasePoint, f64)>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::EmptyMeasure);
        }
        let dim = atoms[0].0.dim();
        if dim == 0 {
            return Err(MeasureError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        let n = atoms.len();
        let mut positions = Vec::with_capacity(n * dim);
        let mut velocities = Vec::with_capacity(n * dim);
        let mut masses = Vec::with_capacity(n);
        for (p, m) in atoms {
            if p.x.len() != dim || p.v.len() != dim {
                return Err(MeasureError::DimensionMismatch {
                    expected: dim,
                    got: p.x.len().max(p.v.len()),
                });
            }
            if !p.x.iter().chain(p.v.iter()).all(|c| c.is_finite()) || !m.is_finite() {
                return Err(MeasureError::NonFinite);
            }
            if m < MIN_ATOM_MASS {
                return Err(MeasureError::NonpositiveMass(m));
            }
            positions.extend_from_slice(&p.x);
            velocities.extend_from_slice(&p.v);
            masses.push(m);
        }
        Ok(DiscreteMeasure {
            dim,
            positions,
            velocities,
            masses,
        })
    }

    /// Internal constructor from flat arrays; used by the integrator,
    /// which preserves masses exactly.
    pub(crate) fn from_flat_unchecked(
        dim: usize,
        positions: Vec<f64>,
        velocities: Vec<f64>,
        masses: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(positions.len(), masses.len() * dim);
        debug_assert_eq!(velocities.len(), masses.len() * dim);
        DiscreteMeasure {
            dim,
            positions,
            velocities,
            masses,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn positions_flat(&self) -> &[f64] {
        &self.positions
    }

    pub(crate) fn velocities_flat(&self) -> &[f64] {
        &self.velocities
    }

    pub fn atom(&self, i: usize) -> PhasePoint {
        PhasePoint {
            x: self.position(i).to_vec(),
            v: self.velocity(i).to_vec(),
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (PhasePoint, f64)> + '_ {
        (0..self.len()).map(|i| (self.atom(i), self.masses[i]))
    }

    /// Push-forward `T # f`: move every atom by `map` keeping its mass.
    pub fn push_forward<F>(&self, map: F) -> DiscreteMeasure
    where
        F: Fn(&PhasePoint) -> PhasePoint,
    {
        let mut positions = Vec::with_capacity(self.positions.len());
        let mut velocities = Vec::with_capacity(self.velocities.len());
        for i in 0..self.len() {
            let q = map(&self.atom(i));
            assert_eq!(q.dim(), self.dim, "push-forward map must preserve dimension");
            positions.extend_from_slice(&q.x);
            velocities.extend_from_slice(&q.v);
        }
        DiscreteMeasure {
            dim: self.dim,
            positions,
            velocities,
            masses: self.masses.clone(),
        }
    }

    /// First marginal `rho`: project every atom to its position.
    pub fn first_marginal(&self) -> SpatialMeasure {
        SpatialMeasure {
            dim: self.dim,
            positions: self.positions.clone(),
            masses: self.masses.clone(),
        }
    }

    /// Radius of the smallest origin-centered phase-space ball
    /// containing all atoms.
    pub fn support_radius(&self) -> f64 {
        (0..self.len())
            .map(|i| self.atom(i).norm())
            .fold(0.0, f64::max)
    }

    /// Mass-weighted mean velocity, `sum_i m_i v_i`.
    pub fn mean_velocity(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for i in 0..self.len() {
            let v = self.velocity(i);
            let m = self.masses[i];
            for k in 0..self.dim {
                mean[k] += m * v[k];
            }
        }
        mean
    }

    /// Radius of the velocity support around the mean velocity.
    pub fn velocity_diameter(&self) -> f64 {
        let mean = self.mean_velocity();
        (0..self.len())
            .map(|i| {
                self.velocity(i)
                    .iter()
                    .zip(&mean)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self, String> {
        serde_json::from_str(s).map_err(|e| e.to_string())
    }
}

#[derive(Serialize, Deserialize)]
struct AtomJson {
    x: Vec<f64>,
    v: Vec<f64>,
    m: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    dim: usize,
    atoms: Vec<AtomJson>,
}

impl Serialize for DiscreteMeasure {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let atoms = (0..self.len())
            .map(|i| AtomJson {
                x: self.position(i).to_vec(),
                v: self.velocity(i).to_vec(),
                m: self.masses[i],
            })
            .collect();
        MeasureJson {
            dim: self.dim,
            atoms,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = MeasureJson::deserialize(de)?;
        let total: f64 = raw.atoms.iter().map(|a| a.m).sum();
        if (total - 1.0).abs() > LOAD_MASS_TOL {
            return Err(D::Error::custom(format!(
                "atom masses sum to {total}, expected 1 within {LOAD_MASS_TOL:e}"
            )));
        }
        let atoms: Vec<(PhasePoint, f64)> = raw
            .atoms
            .into_iter()
            .map(|a| {
                if a.x.len() != raw.dim || a.v.len() != raw.dim {
                    Err(D::Error::custom("atom dimension does not match dim"))
                } else {
                    Ok((PhasePoint::new(a.x, a.v), a.m))
                }
            })
            .collect::<Result<_, _>>()?;
        DiscreteMeasure::normalize(atoms).map_err(D::Error::custom)
    }
}

/// A spatial (position-only) measure, the first marginal of a
/// [`DiscreteMeasure`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMeasure {
    dim: usize,
    positions: Vec<f64>,
    masses: Vec<f64>,
}

impl SpatialMeasure {
    pub fn new(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self, MeasureError> {
        if atoms.is_empty() {
            return Err(MeasureError::EmptyMeasure);
        }
        let mut positions = Vec::with_capacity(atoms.len() * dim);
        let mut masses = Vec::with_capacity(atoms.len());
        for (x, m) in atoms {
            if x.len() != dim {
                return Err(MeasureError::DimensionMismatch {
                    expected: dim,
                    got: x.len(),
                });
            }
            if !(m > 0.0) {
                return Err(MeasureError::NonpositiveMass(m));
            }
            positions.extend_from_slice(&x);
            masses.push(m);
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(MeasureError::MassNotNormalized(total));
        }
        Ok(SpatialMeasure {
            dim,
            positions,
            masses,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}
