//! CSI record and reference trace types, plus their on-disk formats.
//!
//! A [`CsiRecord`] holds the per-packet channel estimates as received: one
//! timestamp per frame and a fixed number of subcarrier values, either
//! complex (re, im) or already reduced to magnitudes. Timestamps need not be
//! uniform; the preprocessing chain resamples them.

mod io;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    load_csi, load_reference, load_series, read_csi_csv, read_csi_ndjson, read_series_csv,
    save_csi, save_reference, save_series, write_atomic, write_csi_csv, write_csi_ndjson,
    write_series_csv,
    CsiFormat, SeriesHeader,
};

pub const DEFAULT_SUBCARRIERS: usize = 50;
pub const DEFAULT_NOMINAL_RATE: f64 = 62.5;
pub const DEFAULT_REFERENCE_RATE: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiKind {
    Complex,
    Magnitude,
}

impl fmt::Display for CsiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CsiKind::Complex => "complex",
            CsiKind::Magnitude => "magnitude",
        })
    }
}

impl FromStr for CsiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(CsiKind::Complex),
            "magnitude" => Ok(CsiKind::Magnitude),
            other => Err(Error::InvalidInput(format!("unknown CSI kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SubcarrierValues {
    Complex(Vec<Complex64>),
    Magnitude(Vec<f64>),
}

impl SubcarrierValues {
    pub fn len(&self) -> usize {
        match self {
            SubcarrierValues::Complex(v) => v.len(),
            SubcarrierValues::Magnitude(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> CsiKind {
        match self {
            SubcarrierValues::Complex(_) => CsiKind::Complex,
            SubcarrierValues::Magnitude(_) => CsiKind::Magnitude,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsiFrame {
    /// Seconds.
    pub timestamp: f64,
    pub values: SubcarrierValues,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Posture {
    Supine,
    Side,
    Prone,
    #[default]
    Unknown,
}

impl Posture {
    /// The three postures of the recording protocol, in table order.
    pub const PROTOCOL: [Posture; 3] = [Posture::Supine, Posture::Side, Posture::Prone];

    pub fn as_str(self) -> &'static str {
        match self {
            Posture::Supine => "supine",
            Posture::Side => "side",
            Posture::Prone => "prone",
            Posture::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Posture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Posture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "supine" => Ok(Posture::Supine),
            "side" => Ok(Posture::Side),
            "prone" => Ok(Posture::Prone),
            "unknown" => Ok(Posture::Unknown),
            other => Err(Error::InvalidInput(format!("unknown posture `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub subject: Option<String>,
    pub posture: Posture,
    pub tags: Vec<String>,
}

/// A validated sequence of CSI frames.
///
/// Invariants: at least two frames, strictly increasing timestamps, every
/// frame has the same kind and `n_subcarriers` values, all values finite and
/// magnitudes non-negative.
#[derive(Clone, Debug, PartialEq)]
pub struct CsiRecord {
    frames: Vec<CsiFrame>,
    kind: CsiKind,
    n_subcarriers: usize,
    nominal_rate: f64,
    meta: RecordMeta,
}

impl CsiRecord {
    /// Validates `frames`. Errors name the offending frame as a 1-based row.
    pub fn new(frames: Vec<CsiFrame>, nominal_rate: f64, meta: RecordMeta) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidRecord("empty record".into()));
        }
        if !(nominal_rate.is_finite() && nominal_rate > 0.0) {
            return Err(Error::InvalidRecord(format!(
                "nominal rate must be positive, got {nominal_rate}"
            )));
        }
        let kind = frames[0].values.kind();
        let n_subcarriers = frames[0].values.len();
        if n_subcarriers == 0 {
            return Err(Error::parse(1, "frame has no subcarrier values"));
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, frame) in frames.iter().enumerate() {
            let row = i + 1;
            validate_frame(frame, kind, n_subcarriers).map_err(|m| Error::parse(row, m))?;
            if frame.timestamp <= prev {
                return Err(Error::parse(row, "non-increasing timestamp"));
            }
            prev = frame.timestamp;
        }
        if frames.len() < 2 {
            return Err(Error::InvalidRecord(
                "a record needs at least 2 frames".into(),
            ));
        }
        Ok(CsiRecord {
            frames,
            kind,
            n_subcarriers,
            nominal_rate,
            meta,
        })
    }

    pub fn frames(&self) -> &[CsiFrame] {
        &self.frames
    }

    pub fn kind(&self) -> CsiKind {
        self.kind
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn nominal_rate(&self) -> f64 {
        self.nominal_rate
    }

    pub fn meta(&self) -> &RecordMeta {
        &self.meta
    }

    pub fn with_meta(mut self, meta: RecordMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn timestamps(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.timestamp).collect()
    }

    pub fn start_time(&self) -> f64 {
        self.frames[0].timestamp
    }

    pub fn duration(&self) -> f64 {
        self.frames[self.frames.len() - 1].timestamp - self.frames[0].timestamp
    }
}

fn validate_frame(frame: &CsiFrame, kind: CsiKind, n: usize) -> std::result::Result<(), String> {
    if !frame.timestamp.is_finite() {
        return Err("non-finite timestamp".into());
    }
    if frame.values.kind() != kind {
        return Err(format!("expected {kind} values, found {}", frame.values.kind()));
    }
    if frame.values.len() != n {
        return Err(format!(
            "expected {n} subcarriers, found {}",
            frame.values.len()
        ));
    }
    match &frame.values {
        SubcarrierValues::Magnitude(v) => {
            if let Some(k) = v.iter().position(|x| !x.is_finite() || *x < 0.0) {
                return Err(format!("subcarrier {k}: magnitude must be finite and >= 0"));
            }
        }
        SubcarrierValues::Complex(v) => {
            if let Some(k) = v.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(format!("subcarrier {k}: non-finite complex value"));
            }
        }
    }
    Ok(())
}

/// Row-major `frames x subcarriers` magnitude matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Magnitudes {
    n_frames: usize,
    n_subcarriers: usize,
    data: Vec<f64>,
}

impl Magnitudes {
    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn get(&self, frame: usize, subcarrier: usize) -> f64 {
        self.data[frame * self.n_subcarriers + subcarrier]
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.data[frame * self.n_subcarriers..(frame + 1) * self.n_subcarriers]
    }

    pub fn column(&self, subcarrier: usize) -> Vec<f64> {
        (0..self.n_frames).map(|i| self.get(i, subcarrier)).collect()
    }
}

/// Element-wise magnitude of every subcarrier value. Magnitude records pass
/// through unchanged.
pub fn magnitudes(record: &CsiRecord) -> Magnitudes {
    let mut data = Vec::with_capacity(record.len() * record.n_subcarriers());
    for frame in record.frames() {
        match &frame.values {
            SubcarrierValues::Magnitude(v) => data.extend_from_slice(v),
            SubcarrierValues::Complex(v) => data.extend(v.iter().map(|c| c.norm())),
        }
    }
    Magnitudes {
        n_frames: record.len(),
        n_subcarriers: record.n_subcarriers(),
        data,
    }
}

/// Converts a record to magnitude form, keeping timestamps and metadata.
pub fn to_magnitude_record(record: &CsiRecord) -> CsiRecord {
    if record.kind() == CsiKind::Magnitude {
        return record.clone();
    }
    let mags = magnitudes(record);
    let frames = record
        .frames()
        .iter()
        .enumerate()
        .map(|(i, f)| CsiFrame {
            timestamp: f.timestamp,
            values: SubcarrierValues::Magnitude(mags.row(i).to_vec()),
        })
        .collect();
    CsiRecord {
        frames,
        kind: CsiKind::Magnitude,
        n_subcarriers: record.n_subcarriers,
        nominal_rate: record.nominal_rate,
        meta: record.meta.clone(),
    }
}

/// Scalar samples on a uniform time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformSeries {
    samples: Vec<f64>,
    rate: f64,
    start_time: f64,
}

impl UniformSeries {
    pub fn new(samples: Vec<f64>, rate: f64, start_time: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidInput(format!("rate must be positive, got {rate}")));
        }
        if !start_time.is_finite() {
            return Err(Error::InvalidInput("non-finite start time".into()));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample at index {i}")));
        }
        Ok(UniformSeries {
            samples,
            rate,
            start_time,
        })
    }

    /// Same grid, new samples. The length must match.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != self.samples.len() {
            return Err(Error::LengthMismatch {
                left: self.samples.len(),
                right: samples.len(),
            });
        }
        UniformSeries::new(samples, self.rate, self.start_time)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.start_time + index as f64 / self.rate
    }

    /// Time span covered by the samples, `(len - 1) / rate`.
    pub fn duration(&self) -> f64 {
        self.samples.len().saturating_sub(1) as f64 / self.rate
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration()
    }

    /// Samples `range`, with the start time moved accordingly.
    pub fn slice(&self, range: std::ops::Range<usize>) -> UniformSeries {
        UniformSeries {
            start_time: self.time_at(range.start),
            samples: self.samples[range].to_vec(),
            rate: self.rate,
        }
    }

    pub fn shifted(&self, offset: f64) -> UniformSeries {
        UniformSeries {
            start_time: self.start_time + offset,
            ..self.clone()
        }
    }
}

/// Belt-equivalent respiration reference.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceTrace {
    series: UniformSeries,
}

impl ReferenceTrace {
    pub fn new(samples: Vec<f64>, rate: f64, start_time: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidRecord(
                "a reference trace needs at least 2 samples".into(),
            ));
        }
        Ok(ReferenceTrace {
            series: UniformSeries::new(samples, rate, start_time)?,
        })
    }

    pub fn series(&self) -> &UniformSeries {
        &self.series
    }

    pub fn into_series(self) -> UniformSeries {
        self.series
    }

    pub fn samples(&self) -> &[f64] {
        self.series.samples()
    }

    pub fn rate(&self) -> f64 {
        self.series.rate()
    }

    pub fn start_time(&self) -> f64 {
        self.series.start_time()
    }

    pub fn duration(&self) -> f64 {
        self.series.duration()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mag_frame(t: f64, v: Vec<f64>) -> CsiFrame {
        CsiFrame {
            timestamp: t,
            values: SubcarrierValues::Magnitude(v),
        }
    }

    #[test]
    fn complex_magnitude_is_pythagorean() {
        let frames = vec![
            CsiFrame {
                timestamp: 0.0,
                values: SubcarrierValues::Complex(vec![Complex64::new(3.0, 4.0)]),
            },
            CsiFrame {
                timestamp: 0.016,
                values: SubcarrierValues::Complex(vec![Complex64::new(-6.0, 8.0)]),
            },
        ];
        let rec = CsiRecord::new(frames, 62.5, RecordMeta::default()).unwrap();
        let m = magnitudes(&rec);
        assert_eq!(m.get(0, 0), 5.0);
        assert_eq!(m.get(1, 0), 10.0);
    }

    #[test]
    fn magnitude_record_passes_through() {
        let frames = vec![mag_frame(0.0, vec![1.0, 2.0]), mag_frame(0.1, vec![3.0, 0.0])];
        let rec = CsiRecord::new(frames, 10.0, RecordMeta::default()).unwrap();
        let m = magnitudes(&rec);
        assert_eq!(m.row(0), &[1.0, 2.0]);
        assert_eq!(m.row(1), &[3.0, 0.0]);
        assert_eq!(to_magnitude_record(&rec), rec);
    }

    #[test]
    fn rejects_bad_records() {
        let dup = vec![mag_frame(0.0, vec![1.0]), mag_frame(0.0, vec![1.0])];
        let err = CsiRecord::new(dup, 62.5, RecordMeta::default()).unwrap_err();
        assert_eq!(err.to_string(), "non-increasing timestamp at row 2");

        let single = vec![mag_frame(0.0, vec![1.0])];
        assert!(CsiRecord::new(single, 62.5, RecordMeta::default()).is_err());

        let negative = vec![mag_frame(0.0, vec![1.0]), mag_frame(1.0, vec![-1.0])];
        assert!(matches!(
            CsiRecord::new(negative, 62.5, RecordMeta::default()),
            Err(Error::Parse { row: 2, .. })
        ));

        let ragged = vec![mag_frame(0.0, vec![1.0, 2.0]), mag_frame(1.0, vec![1.0])];
        assert!(CsiRecord::new(ragged, 62.5, RecordMeta::default()).is_err());
    }

    #[test]
    fn series_grid_helpers() {
        let s = UniformSeries::new(vec![0.0; 100], 100.0, 2.0).unwrap();
        assert!((s.duration() - 0.99).abs() < 1e-12);
        assert!((s.end_time() - 2.99).abs() < 1e-12);
        let tail = s.slice(50..100);
        assert!((tail.start_time() - 2.5).abs() < 1e-12);
        assert!(UniformSeries::new(vec![f64::NAN], 1.0, 0.0).is_err());
        assert!(UniformSeries::new(vec![], 0.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn magnitudes_match_brute_force(values in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..20)) {
            let n = values.len();
            let frames: Vec<CsiFrame> = (0..3)
                .map(|i| CsiFrame {
                    timestamp: i as f64 * 0.016,
                    values: SubcarrierValues::Complex(
                        values.iter().map(|&(re, im)| Complex64::new(re + i as f64, im)).collect(),
                    ),
                })
                .collect();
            let rec = CsiRecord::new(frames, 62.5, RecordMeta::default()).unwrap();
            let m = magnitudes(&rec);
            for i in 0..3 {
                for (k, &(re, im)) in values.iter().enumerate() {
                    let re = re + i as f64;
                    let oracle = (re * re + im * im).sqrt();
                    prop_assert!((m.get(i, k) - oracle).abs() < 1e-12);
                }
            }
            prop_assert_eq!(m.n_subcarriers(), n);
            let twice = magnitudes(&to_magnitude_record(&rec));
            prop_assert_eq!(twice, m);
        }
    }
}
