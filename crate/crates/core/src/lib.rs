//! Boundary measurements of the cubic wave equation and reconstruction of
//! the potential from them, either through its Radon transform or
//! pointwise.

pub mod cache;
pub mod error;
pub mod field;
pub mod grid;
pub mod metrics;
pub mod phantoms;
pub mod recon_pointwise;
pub mod recon_radon;
pub mod seed;
pub mod solver;
pub mod sources;
pub mod specdiff;
pub mod tomo;

pub use error::{Error, Result};
pub use field::PotentialField;
pub use grid::{AdmissibleWindow, SpaceTimeGrid, SpatialGrid};
pub use phantoms::{PhantomSpec, PhantomTerm};
pub use recon_pointwise::PointwiseConfig;
pub use recon_radon::RadonReconConfig;
pub use solver::DNTrace;
pub use sources::BoundaryTrace;
pub use specdiff::{FilterSpec, SampledSignal};
pub use tomo::Sinogram;
