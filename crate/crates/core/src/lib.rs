//! Deformations of diamond-type periodic bar-and-joint frameworks.
//!
//! The crate builds d-dimensional diamantine frameworks from their edge
//! vectors, locates and classifies the critical points of the unit-cell
//! volume, decides auxetic capability through the hypersurface normal in
//! lattice Gram coordinates, and traces auxetic deformation paths. The
//! [`cayley`] module holds the closed forms available in the plane.

pub mod auxetic;
pub mod cayley;
pub mod critical;
pub mod error;
pub mod framework;
pub mod gram;
pub mod io;
mod linalg;
pub mod presets;

pub use nalgebra;

pub use auxetic::{Capability, CapabilityVerdict, Steering, TangentVector, Trajectory};
pub use critical::{CriticalAlpha, CriticalityReport, RootKind};
pub use error::{Error, Result};
pub use framework::{FrameworkSpec, Patch, PeriodicityLattice};
pub use gram::{GramMatrix, OmegaMatrix};
