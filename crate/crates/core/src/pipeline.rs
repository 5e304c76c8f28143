//! End-to-end processing of one record: preprocessing, reference alignment,
//! waveform extraction, cycle counting and evaluation.

use serde::{Deserialize, Serialize};

use crate::csi_data::{CsiRecord, ReferenceTrace, UniformSeries};
use crate::dsp::{
    butterworth_bandpass, moving_average, preprocess_subcarriers, resample_linear, sample_at_grid,
    Channels, FilterSpec,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    align, pearson, windowed_mean_correlation, Alignment, EvaluationReport, DEFAULT_EVAL_WINDOW,
    DEFAULT_MAX_LAG, MIN_ALIGN_OVERLAP,
};
use crate::respiration::{
    count_cycles, detect_turning_points, integer_counts, DetectionParams, EpochGrid, EpochSummary,
    TurningPoints, DEFAULT_EPOCH,
};
use crate::selection::{
    extract_pca, select_by_correlation, ExtractionResult, Method, DEFAULT_CORRELATION_WINDOW,
    DEFAULT_PCA_WINDOW,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub filter: FilterSpec,
    pub method: Method,
    pub correlation_window: f64,
    pub pca_window: f64,
    pub detection: DetectionParams,
    pub epoch: f64,
    pub max_lag: f64,
    pub eval_window: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            filter: FilterSpec::default(),
            method: Method::Pca,
            correlation_window: DEFAULT_CORRELATION_WINDOW,
            pca_window: DEFAULT_PCA_WINDOW,
            detection: DetectionParams::default(),
            epoch: DEFAULT_EPOCH,
            max_lag: DEFAULT_MAX_LAG,
            eval_window: DEFAULT_EVAL_WINDOW,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        if !(self.epoch.is_finite() && self.epoch > 0.0) {
            return Err(Error::InvalidInput(format!("epoch length must be positive, got {}", self.epoch)));
        }
        if !(self.max_lag >= 0.0) {
            return Err(Error::InvalidInput(format!("max lag must be >= 0, got {}", self.max_lag)));
        }
        Ok(())
    }
}

pub struct RecordInput {
    pub id: String,
    pub record: CsiRecord,
    pub reference: Option<ReferenceTrace>,
}

pub struct RecordOutput {
    pub id: String,
    pub extraction: ExtractionResult,
    pub turning_points: TurningPoints,
    pub epochs: Vec<EpochSummary>,
    /// Processed reference on the signal's grid, after the lag is applied.
    pub reference: Option<UniformSeries>,
    pub reference_epochs: Option<Vec<EpochSummary>>,
    pub alignment: Option<Alignment>,
    pub report: Option<EvaluationReport>,
}

/// Resampling, moving average and band-pass for a belt trace, so it passes
/// through the same smoothing and band limits as the CSI channels.
pub fn process_reference(reference: &ReferenceTrace, spec: &FilterSpec) -> Result<UniformSeries> {
    let s = reference.series();
    let times: Vec<f64> = (0..s.len()).map(|i| s.time_at(i)).collect();
    let resampled = resample_linear(&times, s.samples(), spec.target_rate)?;
    let smoothed = moving_average(&resampled, spec.ma_window)?;
    butterworth_bandpass(&smoothed, spec)
}

/// Finds the lag between the first principal component of `channels` and
/// the processed reference. Both polarities of the component are tried,
/// since its sign is arbitrary.
pub fn align_reference(
    channels: &Channels,
    reference: &UniformSeries,
    pca_window: f64,
    max_lag: f64,
) -> Result<Alignment> {
    let probe = extract_pca(channels, pca_window)?.signal;
    let negated = probe.with_samples(probe.samples().iter().map(|v| -v).collect())?;
    let pos = align(&probe, reference, max_lag)?;
    let neg = align(&negated, reference, max_lag)?;
    Ok(if neg.correlation > pos.correlation { neg } else { pos })
}

/// Keeps the part of `channels` whose lagged times fall inside `reference`
/// and samples the reference there.
fn overlap(channels: &Channels, reference: &UniformSeries, lag: f64) -> Result<(Channels, UniformSeries)> {
    let rate = channels.rate();
    let eps = 1e-6;
    let lo = ((reference.start_time() - lag - channels.start_time()) * rate - eps)
        .ceil()
        .max(0.0) as usize;
    let hi = (((reference.end_time() - lag - channels.start_time()) * rate + eps).floor() + 1.0)
        .min(channels.len() as f64)
        .max(0.0) as usize;
    if hi <= lo || ((hi - lo) as f64) < MIN_ALIGN_OVERLAP * rate {
        return Err(Error::InsufficientOverlap {
            available: hi.saturating_sub(lo) as f64 / rate,
            required: MIN_ALIGN_OVERLAP,
        });
    }
    let trimmed = channels.slice(lo..hi);
    let samples = sample_at_grid(reference, trimmed.start_time() + lag, rate, trimmed.len())?;
    let aligned = UniformSeries::new(samples, rate, trimmed.start_time())?;
    Ok((trimmed, aligned))
}

fn negate(series: &UniformSeries) -> Result<UniformSeries> {
    series.with_samples(series.samples().iter().map(|v| -v).collect())
}

/// Runs the whole chain on one record. The correlation method needs a
/// reference; without one only the waveform and its epochs are produced.
pub fn process_record(input: &RecordInput, config: &PipelineConfig) -> Result<RecordOutput> {
    config.validate()?;
    let channels = preprocess_subcarriers(&input.record, &config.filter)?;

    let (channels, reference, alignment) = match &input.reference {
        Some(r) => {
            let processed = process_reference(r, &config.filter)?;
            let al = align_reference(&channels, &processed, config.pca_window, config.max_lag)?;
            let (ch, aligned) = overlap(&channels, &processed, al.lag)?;
            (ch, Some(aligned), Some(al))
        }
        None => (channels, None, None),
    };

    let mut extraction = match (config.method, &reference) {
        (Method::Correlation, Some(r)) => select_by_correlation(&channels, r, config.correlation_window)?,
        (Method::Correlation, None) => {
            return Err(Error::InvalidInput("the correlation method needs a reference trace".into()))
        }
        (Method::Pca, _) => extract_pca(&channels, config.pca_window)?,
    };
    if let (Method::Pca, Some(r)) = (config.method, &reference) {
        if pearson(extraction.signal.samples(), r.samples()).is_ok_and(|c| c < 0.0) {
            extraction.signal = negate(&extraction.signal)?;
        }
    }

    let grid = EpochGrid::for_series(&extraction.signal, config.epoch)?;
    if grid.count == 0 {
        return Err(Error::InvalidInput(format!(
            "{:.3} s of signal is shorter than one {} s epoch",
            extraction.signal.len() as f64 / extraction.signal.rate(),
            config.epoch
        )));
    }
    let turning_points = detect_turning_points(&extraction.signal, config.detection);
    let epochs = count_cycles(&turning_points, &grid);

    let mut out = RecordOutput {
        id: input.id.clone(),
        extraction,
        turning_points,
        epochs,
        reference: None,
        reference_epochs: None,
        alignment,
        report: None,
    };
    if let (Some(r), Some(al)) = (reference, alignment) {
        let ref_points = detect_turning_points(&r, config.detection);
        let ref_epochs = count_cycles(&ref_points, &grid);
        let wc = windowed_mean_correlation(&out.extraction.signal, &r, config.eval_window);
        let (mean, per_window) = match wc {
            Ok(w) => (Some(w.mean), w.per_window),
            Err(Error::NoValidWindows) => (None, Vec::new()),
            Err(e) => return Err(e),
        };
        let meta = input.record.meta();
        out.report = Some(EvaluationReport::from_counts(
            input.id.clone(),
            meta.subject.clone(),
            meta.posture,
            config.method,
            al.lag,
            mean,
            per_window,
            integer_counts(&ref_epochs),
            integer_counts(&out.epochs),
        )?);
        out.reference = Some(r);
        out.reference_epochs = Some(ref_epochs);
    }
    Ok(out)
}
