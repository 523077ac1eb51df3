//! Pseudo-spectral solvers for the hyperbolic Prandtl system and the scaled
//! anisotropic hyperbolic Navier-Stokes system on the strip `0 < y < 1`,
//! periodic in `x`, with anisotropic Littlewood-Paley and Gevrey diagnostics.

pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod gevrey;
pub mod harness;
pub mod hns;
pub mod integrator;
pub mod paley;
pub mod prandtl;

pub use error::{Error, Result};
pub use fields::{Field, Grid, C64};
