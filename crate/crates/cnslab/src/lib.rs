//! Pseudo-spectral laboratory for the linearized Green kernels and the
//! long-time asymptotics of 2D compressible Navier–Stokes near a constant
//! equilibrium on a periodic box.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectral`]: grids, FFT transforms, derivatives, Leray projection and norms.
//! - [`profiles`]: fluid parameters, Oseen and dipole profiles, Biot–Savart.
//! - [`kernels`]: Fourier symbols of the linear kernels and their norms.
//! - [`solver`]: ETD integration of the full nonlinear system.
//! - [`vorticity`]: constant-density vorticity equation used as a control.
//! - [`harness`]: decay-rate fitting and the registered experiments.
//! - [`config`]: `key = value` run manifests.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod phi;
pub mod profiles;
pub mod snapshot;
pub mod solver;
pub mod spectral;
pub mod vorticity;

pub use error::{Error, Result};
