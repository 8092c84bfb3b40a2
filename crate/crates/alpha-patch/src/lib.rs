pub mod bending;
pub mod biot_savart;
pub mod curve_geometry;
pub mod error;
pub mod evolution;
pub mod field;
pub mod illposedness;
pub mod quad;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
