//! Coupled deformed-oscillator models of polyatomic vibrational spectra.

pub mod algebra;
pub mod analysis;
pub mod deformation;
pub mod error;
pub mod fit;
pub mod fock;
pub mod models;
pub mod report;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
