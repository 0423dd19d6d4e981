//! Truncated-jet engine for almost complex geometry.

pub mod chern;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod forms;
pub mod geodesic;
pub mod jet;
pub mod normal_coords;
pub mod structure;

pub use error::{GeomError, Result};
