//! Irregular Birkhoff averages on symbolic systems.
//!
//! Builds points with prescribed historic behavior by gluing generic orbit
//! segments, certifies their irregularity at finite horizon, and computes
//! topological pressure, entropy and BS-dimension on full shifts, matrix
//! shifts of finite type and β-shifts.

pub mod beta;
pub mod circle;
pub mod error;
pub mod measures;
pub mod observables;
pub mod pressure;
pub mod schema;
pub mod symbolic;
pub mod synthesis;
pub mod verify;

pub use error::{LabError, Result};
