//! Design and simulation of tunable up-conversion single-photon detectors.
//!
//! A telecom signal is mixed with a strong pump in a periodically poled
//! lithium niobate waveguide and the sum-frequency photon is counted with a
//! silicon APD. The modules cover:
//!
//! * [`dispersion`]: temperature-dependent refractive index.
//! * [`qpm`] and [`spectrum`]: the quasi-phase-matching condition, its
//!   solutions in each free variable, acceptance spectra and tuning.
//! * [`response`]: pump-power dependent efficiency and noise.
//! * [`counting`]: Monte Carlo photon counting.
//! * [`planner`]: multi-pump channel layouts over a band.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod counting;
pub mod dispersion;
pub mod error;
pub mod planner;
pub mod qpm;
pub mod response;
pub mod roots;
pub mod spectrum;

pub use error::{Error, Result};
