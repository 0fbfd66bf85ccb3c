//! Security model of BB84 quantum key distribution when the intensity
//! modulators that select the encoded pulse have a finite extinction ratio.
//!
//! * [`qmath`]: binary entropy and 2×2 polarization density matrices.
//! * [`state_model`]: extinction ratio, the leaked-noise mixture and the QBER map.
//! * [`coupler_oracle`]: brute-force linear-optics check of that mixture.
//! * [`keyrate`]: GLLP and decoy-state key rates, baseline and modified.
//! * [`analysis`]: sweeps, thresholds, distance limits and CSV output.
//! * [`cli`]: the `imqkd` command-line tool.

pub mod analysis;
pub mod cli;
pub mod coupler_oracle;
pub mod error;
pub mod keyrate;
pub mod qmath;
pub mod state_model;

pub use error::{Error, Result};
