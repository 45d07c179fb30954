//! Motion of a single unit-strength point vortex on a genus-1 surface,
//! coupled to the harmonic part of the flow.
//!
//! The surface is a torus with metric `lambda^2 (dx^2 + dy^2)` over a
//! unit-covolume flat lattice. The state is the vortex position together
//! with the coefficients `(A, B)` of the harmonic velocity form.

pub mod annulus;
pub mod dynamics;
pub mod field;
pub mod geometry;
mod spectral;

pub use dynamics::{
    DynamicsConfig, DynamicsError, DynamicsFields, EnergyReport, Integrator, Mode, Trajectory, VortexState,
};
pub use field::{ConformalMode, ConformalSpec, CovectorField, FieldError, PeriodicGrid, ScalarField};
pub use geometry::{ConstantOneForm, GeometryError, HarmonicCoeffs, LatticeBasis, PeriodMatrices, TorusPoint};
