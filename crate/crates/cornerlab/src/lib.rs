pub mod classification;
pub mod cli;
pub mod compressions;
pub mod error;
pub mod invariants;
pub mod json;
pub mod linalg;
pub mod model;
pub mod models;
pub mod spectra;

pub use error::{Error, Result};
