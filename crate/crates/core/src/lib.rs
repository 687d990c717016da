//! Sound field reproduction over loudspeaker arrays.
//!
//! Pressure matching fits the synthesized field to the desired one at a set
//! of control points. Weighted pressure matching instead minimizes the error
//! integrated over the whole target region, using kernel ridge interpolation
//! of the control-point pressures; for a shared kernel this reduces to a
//! weighted least-squares problem at the control points.

pub mod error;
pub mod evaluation;
pub mod field;
pub mod geometry;
pub mod harness;
pub mod kernel;
pub mod linalg;
pub mod quadrature;
pub mod solvers;
pub mod special;

pub use error::{Error, Result};
