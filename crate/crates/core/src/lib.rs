//! Consensus dynamics on weighted networks: the DeGroot model, accelerated
//! averaging, and memory of local averages (MLA), with closed-form spectral
//! analysis of their convergence and a seeded simulation harness.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod matrix;
pub mod net;
pub mod optimize;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
