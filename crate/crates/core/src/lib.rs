//! Constellation design against a sun-fixed demand model.

pub mod astro;
pub mod constants;
pub mod coverage;
pub mod demand;
pub mod design;
pub mod error;
pub mod fixtures;
#[cfg(feature = "oracles")]
pub mod oracle;
pub mod radiation;
pub mod sphere;

pub use error::{Error, Result};
