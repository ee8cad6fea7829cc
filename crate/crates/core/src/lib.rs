//! Density patches for the inhomogeneous incompressible Navier-Stokes
//! equations on the periodic square, with Littlewood-Paley analysis tools.

// parameter checks are written `!(x < bound)` on purpose so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analysis;
pub mod biot_savart;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod lp;
pub mod paradiff;
pub mod patch;
pub mod random;
pub mod solver;
pub mod spectral;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
