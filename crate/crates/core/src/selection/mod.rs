//! Reduce the preprocessed subcarriers to a single respiratory waveform.
//!
//! Two extractors share one window layout: consecutive, non-overlapping
//! windows with a short tail merged into its predecessor.
//!
//! * [`select_by_correlation`] needs a reference and keeps, per window, the
//!   subcarrier with the largest absolute correlation to it.
//! * [`extract_pca`] is reference-free and projects each window onto its
//!   first principal axis.

mod correlation;
mod eigen;
mod pca;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::csi_data::UniformSeries;
use crate::error::{Error, Result};

pub use correlation::{select_by_correlation, DEFAULT_CORRELATION_WINDOW};
pub use eigen::symmetric_eigen;
pub use pca::{extract_pca, principal_components, PcaDecomposition, DEFAULT_PCA_WINDOW, SIGN_TAIL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Correlation,
    Pca,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Correlation => "correlation",
            Method::Pca => "pca",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WindowDetail {
    Correlation {
        channel: usize,
        r: f64,
        degenerate: bool,
    },
    Pca {
        loading: Vec<f64>,
        explained_variance: f64,
        degenerate: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowDescriptor {
    /// First sample of the window on the channel grid.
    pub start: usize,
    pub len: usize,
    pub start_time: f64,
    #[serde(flatten)]
    pub detail: WindowDetail,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionResult {
    pub signal: UniformSeries,
    pub method: Method,
    /// Nominal window length, seconds.
    pub window: f64,
    pub per_window: Vec<WindowDescriptor>,
}

/// Serializable view of an [`ExtractionResult`] that refers to the waveform
/// by file name instead of embedding it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSummary {
    pub method: Method,
    pub window: f64,
    pub rate: f64,
    pub start_time: f64,
    pub samples: usize,
    pub waveform: String,
    pub per_window: Vec<WindowDescriptor>,
}

impl ExtractionResult {
    pub fn summary(&self, waveform: impl Into<String>) -> ExtractionSummary {
        ExtractionSummary {
            method: self.method,
            window: self.window,
            rate: self.signal.rate(),
            start_time: self.signal.start_time(),
            samples: self.signal.len(),
            waveform: waveform.into(),
            per_window: self.per_window.clone(),
        }
    }

    /// Subcarrier chosen in each window (correlation method only).
    pub fn chosen_channels(&self) -> Vec<usize> {
        self.per_window
            .iter()
            .filter_map(|w| match w.detail {
                WindowDetail::Correlation { channel, .. } => Some(channel),
                WindowDetail::Pca { .. } => None,
            })
            .collect()
    }
}

/// Splits `0..len` into consecutive windows of `window_len` samples. A tail
/// shorter than half a window joins the previous window; a longer one stands
/// alone.
pub fn partition_windows(len: usize, window_len: usize) -> Vec<Range<usize>> {
    assert!(window_len > 0, "window length must be positive");
    let mut out: Vec<Range<usize>> = Vec::new();
    let mut start = 0;
    while start < len {
        let end = (start + window_len).min(len);
        let short = end - start < window_len;
        if short && 2 * (end - start) < window_len {
            if let Some(last) = out.last_mut() {
                last.end = end;
                break;
            }
        }
        out.push(start..end);
        start = end;
    }
    out
}

pub(crate) fn window_samples(window: f64, rate: f64, min: usize) -> Result<usize> {
    let n = (window * rate).round();
    if !(n.is_finite() && n >= min as f64) {
        return Err(Error::InvalidInput(format!(
            "window of {window} s spans fewer than {min} samples at {rate} Hz"
        )));
    }
    Ok(n as usize)
}
