//! Performance scaling laws for photodetector-array receivers that combine
//! the detector outputs in the electrical domain under square-law detection.

pub mod allocation;
pub mod beam;
pub mod error;
pub mod hexgeom;
pub mod quadrature;
pub mod scaling;
pub mod specfun;

pub use error::{Error, Result};
