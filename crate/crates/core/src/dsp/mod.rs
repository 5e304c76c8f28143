//! Per-subcarrier preprocessing and general signal utilities.
//!
//! The chain applied to every subcarrier is: magnitude, Hampel outlier
//! replacement, linear resampling to a uniform grid, centered moving
//! average, Butterworth band-pass. Each stage is a standalone function and
//! [`preprocess_subcarriers`] is exactly their composition.

mod butterworth;
mod hampel;
mod normalize;
mod resample;
mod smoothing;
mod spectrogram;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csi_data::{magnitudes, CsiRecord, UniformSeries};
use crate::error::{Error, Result};

pub use butterworth::{butterworth_bandpass, Biquad, SosFilter};
pub use hampel::{hampel, hampel_half_width, hampel_samples, MAD_SCALE};
pub use normalize::{mean, population_std, znormalize, zscore, Normalized, DEGENERATE_STD};
pub use resample::{resample_linear, sample_at_grid};
pub use smoothing::{moving_average, moving_average_len, moving_average_samples};
pub use spectrogram::{hann, render_png, spectrogram, Spectrogram};

/// Seconds discarded at each end before steady-state assertions.
pub const TRANSIENT_TRIM: f64 = 10.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    #[default]
    ZeroPhase,
    Causal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// Seconds.
    pub hampel_window: f64,
    /// Multiple of the scaled MAD.
    pub hampel_threshold: f64,
    /// Hz.
    pub target_rate: f64,
    /// Seconds.
    pub ma_window: f64,
    pub bp_low: f64,
    pub bp_high: f64,
    /// Order of the analog prototype.
    pub bp_order: usize,
    pub phase_mode: PhaseMode,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            hampel_window: 1.0,
            hampel_threshold: 1.7,
            target_rate: 60.0,
            ma_window: 1.5,
            bp_low: 0.2,
            bp_high: 0.4,
            bp_order: 4,
            phase_mode: PhaseMode::ZeroPhase,
        }
    }
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.target_rate.is_finite() && self.target_rate > 0.0) {
            return bad(format!("target rate must be positive, got {}", self.target_rate));
        }
        if !(self.bp_low > 0.0 && self.bp_low < self.bp_high) {
            return bad(format!(
                "band edges must satisfy 0 < low < high, got {} and {}",
                self.bp_low, self.bp_high
            ));
        }
        if self.bp_high >= self.target_rate / 2.0 {
            return bad(format!(
                "cutoff {} Hz is not below Nyquist ({} Hz)",
                self.bp_high,
                self.target_rate / 2.0
            ));
        }
        if !(self.hampel_window > 0.0) || !(self.hampel_threshold >= 0.0) {
            return bad("Hampel window must be positive and threshold non-negative".into());
        }
        if !(self.ma_window > 0.0) {
            return bad(format!("moving-average window must be positive, got {}", self.ma_window));
        }
        if self.bp_order < 1 {
            return bad("band-pass order must be >= 1".into());
        }
        Ok(())
    }

    pub fn bandpass_filter(&self) -> Result<SosFilter> {
        SosFilter::butterworth_bandpass(self.bp_order, self.bp_low, self.bp_high, self.target_rate)
    }
}

/// Preprocessed subcarrier signals on one shared uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Channels {
    data: Vec<Vec<f64>>,
    rate: f64,
    start_time: f64,
}

impl Channels {
    pub fn new(data: Vec<Vec<f64>>, rate: f64, start_time: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidInput("no channels".into()));
        }
        let len = data[0].len();
        if let Some(c) = data.iter().find(|c| c.len() != len) {
            return Err(Error::LengthMismatch {
                left: len,
                right: c.len(),
            });
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidInput(format!("rate must be positive, got {rate}")));
        }
        Ok(Channels {
            data,
            rate,
            start_time,
        })
    }

    pub fn from_series(series: Vec<UniformSeries>) -> Result<Self> {
        let first = series
            .first()
            .ok_or_else(|| Error::InvalidInput("no channels".into()))?;
        let (rate, start) = (first.rate(), first.start_time());
        if series
            .iter()
            .any(|s| s.rate() != rate || (s.start_time() - start).abs() > 1e-9)
        {
            return Err(Error::GridMismatch("channels do not share a grid".into()));
        }
        Channels::new(series.into_iter().map(UniformSeries::into_samples).collect(), rate, start)
    }

    pub fn n_channels(&self) -> usize {
        self.data.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.data[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.start_time + index as f64 / self.rate
    }

    pub fn data(&self) -> &[Vec<f64>] {
        &self.data
    }

    pub fn channel(&self, k: usize) -> UniformSeries {
        UniformSeries::new(self.data[k].clone(), self.rate, self.start_time).expect("validated")
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Channels {
        Channels {
            data: self.data.iter().map(|c| c[range.clone()].to_vec()).collect(),
            rate: self.rate,
            start_time: self.time_at(range.start),
        }
    }
}

/// Hampel, resampling, moving average and band-pass for one subcarrier's raw
/// magnitudes. The Hampel window is measured in samples at `nominal_rate`,
/// since it runs before resampling.
pub fn preprocess_channel(
    timestamps: &[f64],
    raw: &[f64],
    nominal_rate: f64,
    spec: &FilterSpec,
) -> Result<UniformSeries> {
    let raw = UniformSeries::new(raw.to_vec(), nominal_rate, timestamps[0])?;
    let cleaned = hampel(&raw, spec.hampel_window, spec.hampel_threshold)?;
    let resampled = resample_linear(timestamps, cleaned.samples(), spec.target_rate)?;
    let smoothed = moving_average(&resampled, spec.ma_window)?;
    butterworth_bandpass(&smoothed, spec)
}

/// Runs the preprocessing chain on every subcarrier of `record`.
pub fn preprocess_subcarriers(record: &CsiRecord, spec: &FilterSpec) -> Result<Channels> {
    spec.validate()?;
    let mags = magnitudes(record);
    let timestamps = record.timestamps();
    let series = (0..record.n_subcarriers())
        .into_par_iter()
        .map(|k| preprocess_channel(&timestamps, &mags.column(k), record.nominal_rate(), spec))
        .collect::<Result<Vec<_>>>()?;
    Channels::from_series(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csi_data::{CsiFrame, RecordMeta, SubcarrierValues};

    #[test]
    fn default_spec_is_valid() {
        FilterSpec::default().validate().unwrap();
        let bad = FilterSpec {
            bp_high: 30.0,
            ..FilterSpec::default()
        };
        assert!(bad.validate().is_err());
        let bad = FilterSpec {
            bp_low: 0.5,
            ..FilterSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn constant_record_is_flat() {
        let frames = (0..3000)
            .map(|i| CsiFrame {
                timestamp: i as f64 * 0.016,
                values: SubcarrierValues::Magnitude(vec![10.0, 3.0, 0.5]),
            })
            .collect();
        let rec = CsiRecord::new(frames, 62.5, RecordMeta::default()).unwrap();
        let ch = preprocess_subcarriers(&rec, &FilterSpec::default()).unwrap();
        assert_eq!(ch.n_channels(), 3);
        let trim = (TRANSIENT_TRIM * 60.0) as usize;
        for c in ch.data() {
            assert!(c[trim..c.len() - trim].iter().all(|v| v.abs() < 1e-6));
        }
    }
}
