pub mod baseline;
pub mod cli;
pub mod error;
pub mod formula;
pub mod hamiltonian;
mod linalg;
pub mod report;
pub mod spectral;
pub mod szegedy;
pub mod walksim;

pub use error::{Error, Result};
