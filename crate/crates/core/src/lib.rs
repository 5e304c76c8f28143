//! Respiration waveforms from Wi-Fi CSI magnitudes, with per-epoch breathing
//! cycle counts and evaluation against a chest-belt reference.
//!
//! Each capability has a runnable example:
//!
//! ```bash
//! cargo run --example csi_io                 # record formats
//! cargo run --example preprocess             # Hampel, resampling, smoothing, band-pass
//! cargo run --example correlation_selection  # best subcarrier per window
//! cargo run --example pca_extraction         # windowed PCA fusion
//! cargo run --example cycle_counting         # turning points and epoch counts
//! cargo run --example evaluation_report      # lag, correlation, MAD tables
//! cargo run --example synth_suite            # synthetic dataset with ground truth
//! cargo run --example end_to_end             # whole chain on one record
//! cargo run --example spectrogram            # STFT heat maps
//! cargo run --example command_line           # the wifi-resp CLI in-process
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod csi_data;
pub mod dsp;
pub mod error;
pub mod evaluation;
pub mod manifest;
pub mod pipeline;
pub mod respiration;
pub mod selection;
pub mod synth;

pub use error::{Error, Result};
