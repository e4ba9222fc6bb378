//! SynTone: a synthetic-tone benchmark for disentangled audio
//! representation learning.
//!
//! The crate covers the full pipeline:
//!
//! * [`synth`] — deterministic generation of the 32,000-clip tone dataset
//!   (timbre x amplitude x frequency factor grid) as WAV files plus a
//!   factor manifest.
//! * [`frontend`] — mel-spectrogram extraction (STFT window 2024, hop
//!   512, 64 mel bands), producing the 64x32 model inputs.
//! * [`models`] — a convolutional VAE with four training objectives
//!   (vanilla, beta-VAE, Factor-VAE, beta-TCVAE) on a finite-difference
//!   checked reverse-mode tape.
//! * [`metrics`] — histogram mutual-information estimation and five
//!   supervised disentanglement scores (MIG, SAP, DCIMIG, JEMMIG,
//!   Modularity), plus oracle probe representations for validating them.
//! * [`harness`] — seeded end-to-end pipeline commands, tensor/checkpoint
//!   file formats, and report generation.
//!
//! Every stage is a pure function of its inputs and a seed; rerunning a
//! command reproduces its artifacts byte for byte.
//!
//! See the `examples/` directory for one runnable program per capability,
//! and the `syntone` binary for the equivalent subcommand interface.

pub mod error;
pub mod frontend;
pub mod harness;
pub mod mat;
pub mod metrics;
pub mod models;
pub mod synth;

pub use error::{Error, Result};
pub use synth::{AudioClip, FactorTuple, Subset, Timbre};
