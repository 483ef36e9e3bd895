//! Behavioral simulator and analysis toolkit for an SRAM analog
//! compute-in-memory macro with a reconfigurable nonlinear in-memory
//! ramp ADC.
//!
//! The converter's single-slope ramp is built from the inverse of a target
//! activation function, so the ADC applies the nonlinearity for free while it
//! digitizes the analog MAC voltage. The crate models the whole path at the
//! behavioral level:
//!
//! - [`activation`]: monotone activation curves, their inverses, and presets.
//! - [`ramp`]: inverse sampling, step quantization, PWM/MCL scheduling,
//!   ramp latency, and reconstruction-error metrology.
//! - [`analog`]: bitcell array physics (ternary multiply, bitline discharge,
//!   dynamic range, dual-supply bit-weight ratio, mismatch, temperature).
//! - [`codec`]: ternarization and multi-bit signed weight encoding onto
//!   groups of ternary cells.
//! - [`adc`]: the full conversion pipeline per column, zero-cross
//!   calibration, INL measurement, and Monte Carlo error analyses.
//! - [`lstm`]: an LSTM layer mapped onto the macro with a fixed-point
//!   element-wise pipeline, operation accounting, and latency reports.
//! - [`hwat`]: toy-scale quantization- and noise-aware training that
//!   produces weights deployable on the simulated macro.
//! - [`config`] and [`report`]: structured config files, CSV emission,
//!   and reproducible artifact manifests for the CLI.

pub mod activation;
pub mod adc;
pub mod analog;
pub mod cli;
pub mod codec;
pub mod config;
pub mod error;
pub mod hwat;
pub mod lstm;
pub mod ramp;
pub mod report;

pub use error::{Error, Result};
