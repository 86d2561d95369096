//! Roundel ensembles, circular two-body states in the M-space chart and
//! their dual-lattice rendition on biquaternions.

pub mod algebra;
pub mod bohr;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod mspace;

pub use error::{Error, Result};
