//! Pseudo-spectral toolkit for weakly stratified low-Mach flows on the
//! periodic box: the compressible system, its soundproof and intermediate
//! approximations, the exact eigenmode algebra of the fast operators, and
//! stiff-aware time integration.

pub mod error;
pub mod spectral_core;
pub mod wave_modes;
pub mod dynamics;
pub mod integrate;
pub mod expcli;

pub use error::{Error, Result};
