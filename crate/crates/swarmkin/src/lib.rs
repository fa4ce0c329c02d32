//! Particle-measure simulation of kinetic swarming models.
//!
//! The crate evolves atomic probability measures on phase space
//! `R^d x R^d` along the characteristic flow of a configurable
//! acceleration operator (self-propulsion, potential interaction,
//! Cucker-Smale alignment, front/behind forces), computes exact
//! Wasserstein-1 distances between such measures, and provides
//! experiment drivers that turn stability, flocking, mean-field and
//! hydrodynamic-limit statements into reproducible numerical checks.

pub mod dynamics;
pub mod harness;
mod lowdisc;
pub mod hydro;
pub mod measures;
pub mod models;
pub mod transport;

pub use measures::{DiscreteMeasure, PhasePoint, SpatialMeasure};
pub use models::ModelSpec;
pub use transport::{w1_exact, TransportPlan};
