//! Open quantum spin chains with engineered bi-local dissipation.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod observables;
pub mod operator;

pub use error::{Error, Result};
