// SPDX-License-Identifier: MIT OR Apache-2.0

//! Point-interaction (Foldy-Lax) modelling of electromagnetic scattering by
//! clusters of small, high-contrast dielectric particles excited near a
//! dielectric resonance, together with a dense volume-integral solver that
//! serves as ground truth.

extern crate blas_src;

pub mod cli;
pub mod cluster;
pub mod error;
pub mod foldylax;
pub mod greens;
pub mod linalg;
pub mod oracle;
pub mod spectral;
pub mod tuning;

pub use error::{Error, Result};
