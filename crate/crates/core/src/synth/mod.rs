//! Synthetic CSI records with planted breathing.
//!
//! Each subcarrier magnitude is `baseline_k + weight_k * b(t)` plus Gaussian
//! noise and sparse spikes, sampled at jittered packet times. `b(t)` is a
//! piecewise-constant-rate sinusoid with continuous phase. The clean `b(t)`
//! is also emitted as a 100 Hz reference, and cycle boundaries (the peaks of
//! `b`) are known in closed form.

mod suite;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::csi_data::{
    CsiFrame, CsiRecord, RecordMeta, ReferenceTrace, SubcarrierValues, UniformSeries,
    DEFAULT_NOMINAL_RATE, DEFAULT_REFERENCE_RATE, DEFAULT_SUBCARRIERS,
};
use crate::error::{Error, Result};
use crate::respiration::{count_cycles_from_times, integer_counts, EpochGrid, DEFAULT_EPOCH};

pub use suite::{
    default_profiles, subject_suite, write_suite, PostureAttenuation, SubjectProfile, SuiteRecord,
    SuiteSpec,
};

/// Breathing rates the 0.2-0.4 Hz band passes, breaths per minute.
pub const IN_BAND_BPM: (f64, f64) = (12.0, 24.0);
const VALUE_STEPS: f64 = 1e4;
const TIME_STEPS: f64 = 1e9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreathingSegment {
    /// Seconds.
    pub start: f64,
    pub rate_bpm: f64,
    pub amplitude: f64,
}

/// Replaces the coupling weights from `time` onwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingChange {
    pub time: f64,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Seconds.
    pub duration: f64,
    pub n_subcarriers: usize,
    pub nominal_rate: f64,
    /// Seconds.
    pub jitter_std: f64,
    pub breathing: Vec<BreathingSegment>,
    /// Phase of `b` at `t = 0`, radians.
    pub initial_phase: f64,
    pub weights: Vec<f64>,
    pub coupling_changes: Vec<CouplingChange>,
    pub baselines: Vec<f64>,
    /// `None` disables noise.
    pub noise_snr_db: Option<f64>,
    /// Breathing amplitude the SNR is quoted against; defaults to the first
    /// segment's amplitude.
    pub noise_reference_amplitude: Option<f64>,
    /// Per-value probability.
    pub outlier_rate: f64,
    /// Multiple of the channel's breathing signal std.
    pub outlier_scale: f64,
    pub seed: u64,
    pub reference_rate: f64,
    /// Seconds of reference recorded before and after the CSI.
    pub reference_margin: f64,
    /// Emit complex values with a fixed random phase per subcarrier.
    pub complex: bool,
    /// Permit breathing rates outside [`IN_BAND_BPM`].
    pub allow_out_of_band: bool,
    pub meta: RecordMeta,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let n = DEFAULT_SUBCARRIERS;
        SynthSpec {
            duration: 300.0,
            n_subcarriers: n,
            nominal_rate: DEFAULT_NOMINAL_RATE,
            jitter_std: 0.002,
            breathing: vec![BreathingSegment {
                start: 0.0,
                rate_bpm: 15.0,
                amplitude: 1.0,
            }],
            initial_phase: 0.0,
            weights: vec![1.0; n],
            coupling_changes: Vec::new(),
            baselines: vec![30.0; n],
            noise_snr_db: Some(20.0),
            noise_reference_amplitude: None,
            outlier_rate: 0.01,
            outlier_scale: 20.0,
            seed: 0,
            reference_rate: DEFAULT_REFERENCE_RATE,
            reference_margin: 1.0,
            complex: false,
            allow_out_of_band: false,
            meta: RecordMeta::default(),
        }
    }
}

impl SynthSpec {
    /// Noise-, jitter- and outlier-free variant of `self`.
    pub fn noiseless(mut self) -> Self {
        self.noise_snr_db = None;
        self.jitter_std = 0.0;
        self.outlier_rate = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if self.n_subcarriers == 0 {
            return bad("need at least one subcarrier".into());
        }
        if !(self.nominal_rate.is_finite() && self.nominal_rate > 0.0) {
            return bad(format!("nominal rate must be positive, got {}", self.nominal_rate));
        }
        if !(self.reference_rate.is_finite() && self.reference_rate > 0.0) {
            return bad(format!("reference rate must be positive, got {}", self.reference_rate));
        }
        if !(self.jitter_std >= 0.0) || !(self.reference_margin >= 0.0) {
            return bad("jitter and reference margin must be non-negative".into());
        }
        if !(0.0..1.0).contains(&self.outlier_rate) || !(self.outlier_scale >= 0.0) {
            return bad(format!("outlier rate must lie in [0, 1), got {}", self.outlier_rate));
        }
        if self.breathing.is_empty() || self.breathing[0].start > 0.0 {
            return bad("breathing schedule must start at or before t = 0".into());
        }
        for w in self.breathing.windows(2) {
            if !(w[1].start > w[0].start) {
                return bad("breathing segments must have increasing start times".into());
            }
        }
        for s in &self.breathing {
            if !(s.rate_bpm.is_finite() && s.rate_bpm > 0.0) || !(s.amplitude.is_finite() && s.amplitude >= 0.0) {
                return bad(format!("invalid breathing segment {s:?}"));
            }
            let (lo, hi) = IN_BAND_BPM;
            if !self.allow_out_of_band && !(lo..=hi).contains(&s.rate_bpm) {
                return bad(format!(
                    "breathing rate {} bpm is outside {lo}-{hi} bpm; set allow_out_of_band to permit it",
                    s.rate_bpm
                ));
            }
        }
        let n = self.n_subcarriers;
        let vectors = std::iter::once(("weights", &self.weights))
            .chain(std::iter::once(("baselines", &self.baselines)))
            .chain(self.coupling_changes.iter().map(|c| ("coupling change weights", &c.weights)));
        for (name, v) in vectors {
            if v.len() != n || v.iter().any(|x| !x.is_finite()) {
                return bad(format!("{name} must be {n} finite values"));
            }
        }
        if self.noise_snr_db.is_some_and(|s| !s.is_finite()) {
            return bad("SNR must be finite".into());
        }
        Ok(())
    }
}

/// Continuous-phase breathing model.
#[derive(Clone, Debug)]
pub struct Breathing {
    segments: Vec<BreathingSegment>,
    /// Phase at each segment start.
    phases: Vec<f64>,
}

impl Breathing {
    pub fn new(segments: &[BreathingSegment], initial_phase: f64) -> Self {
        let mut phases = Vec::with_capacity(segments.len());
        let mut phase = initial_phase + TAU * segments[0].rate_bpm / 60.0 * segments[0].start;
        for (i, s) in segments.iter().enumerate() {
            if i > 0 {
                let prev = &segments[i - 1];
                phase += TAU * prev.rate_bpm / 60.0 * (s.start - prev.start);
            }
            phases.push(phase);
        }
        Breathing {
            segments: segments.to_vec(),
            phases,
        }
    }

    fn segment(&self, t: f64) -> usize {
        self.segments.partition_point(|s| s.start <= t).saturating_sub(1)
    }

    pub fn phase(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let s = &self.segments[k];
        self.phases[k] + TAU * s.rate_bpm / 60.0 * (t - s.start)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.segments[self.segment(t)].amplitude * self.phase(t).sin()
    }

    /// Times in `[from, to]` where the phase is a quarter turn past a whole
    /// number of turns, i.e. the peaks of `value`.
    pub fn peak_times(&self, from: f64, to: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for (k, s) in self.segments.iter().enumerate() {
            let seg_lo = if k == 0 { f64::NEG_INFINITY } else { s.start };
            let seg_hi = self.segments.get(k + 1).map_or(f64::INFINITY, |n| n.start);
            let (lo, hi) = (from.max(seg_lo), to.min(seg_hi));
            if lo > hi {
                continue;
            }
            let omega = TAU * s.rate_bpm / 60.0;
            let at = |phase: f64| s.start + (phase - self.phases[k]) / omega;
            let first = ((self.phases[k] + omega * (lo - s.start) - PI / 2.0) / TAU).ceil();
            let mut m = first;
            loop {
                let t = at(PI / 2.0 + TAU * m);
                if t > hi || (t == hi && hi == seg_hi && hi < to) {
                    break;
                }
                if t >= lo {
                    out.push(t);
                }
                m += 1.0;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Clean breathing waveform on a 60 Hz grid starting at 0.
    #[serde(skip)]
    pub waveform: Option<UniformSeries>,
    pub schedule: Vec<BreathingSegment>,
    /// Peak times of the breathing waveform within the record, seconds.
    pub cycle_boundaries: Vec<f64>,
    pub epoch: EpochGrid,
    pub epoch_counts: Vec<i64>,
    /// Values replaced by spikes.
    pub outliers: usize,
    pub values: usize,
}

impl GroundTruth {
    /// Epoch counts recomputed from the stored cycle boundaries.
    pub fn recount(&self) -> Vec<i64> {
        integer_counts(&count_cycles_from_times(&self.cycle_boundaries, &self.epoch))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub struct Synthesized {
    pub record: CsiRecord,
    pub reference: ReferenceTrace,
    pub truth: GroundTruth,
}

fn quantize(x: f64, steps: f64) -> f64 {
    (x * steps).round() / steps
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Generates one record. Output depends only on `spec`.
pub fn generate(spec: &SynthSpec) -> Result<Synthesized> {
    spec.validate()?;
    let n = spec.n_subcarriers;
    let breathing = Breathing::new(&spec.breathing, spec.initial_phase);

    let mut timing = stream(spec.seed, 0);
    let period = 1.0 / spec.nominal_rate;
    let jitter = Normal::new(0.0, spec.jitter_std).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut times = vec![0.0];
    let mut t = 0.0f64;
    while t < spec.duration {
        let step = (period + jitter.sample(&mut timing)).max(0.1 * period);
        t += step;
        times.push(quantize(t, TIME_STEPS));
    }

    let a_ref = spec
        .noise_reference_amplitude
        .unwrap_or(spec.breathing[0].amplitude);
    let noise_scale = spec
        .noise_snr_db
        .map(|snr| a_ref / (2.0 * 10f64.powf(snr / 10.0)).sqrt());
    let mut noise = stream(spec.seed, 1);
    let mut spikes = stream(spec.seed, 2);
    let mut phases = stream(spec.seed, 3);
    let carrier_phase: Vec<f64> = (0..n).map(|_| phases.random_range(-PI..PI)).collect();

    let mut changes = spec.coupling_changes.clone();
    changes.sort_by(|a, b| a.time.total_cmp(&b.time));
    let weights_at = |t: f64| -> &[f64] {
        changes
            .iter()
            .rev()
            .find(|c| c.time <= t)
            .map_or(&spec.weights[..], |c| &c.weights[..])
    };

    let mut outliers = 0;
    let mut frames = Vec::with_capacity(times.len());
    for &t in &times {
        let b = breathing.value(t);
        let w = weights_at(t);
        let mags: Vec<f64> = (0..n)
            .map(|k| {
                let mut m = spec.baselines[k] + w[k] * b;
                if let Some(s) = noise_scale {
                    let z: f64 = StandardNormal.sample(&mut noise);
                    m += w[k].abs() * s * z;
                }
                if spec.outlier_rate > 0.0 && spikes.random_bool(spec.outlier_rate) {
                    outliers += 1;
                    let sign = if spikes.random_bool(0.5) { 1.0 } else { -1.0 };
                    m += sign * spec.outlier_scale * w[k].abs() * a_ref / 2f64.sqrt();
                }
                m.max(0.0)
            })
            .collect();
        let values = if spec.complex {
            SubcarrierValues::Complex(
                mags.iter()
                    .zip(&carrier_phase)
                    .map(|(m, p)| {
                        let c = Complex64::from_polar(*m, *p);
                        Complex64::new(quantize(c.re, VALUE_STEPS), quantize(c.im, VALUE_STEPS))
                    })
                    .collect(),
            )
        } else {
            SubcarrierValues::Magnitude(mags.iter().map(|m| quantize(*m, VALUE_STEPS)).collect())
        };
        frames.push(CsiFrame { timestamp: t, values });
    }
    let values = frames.len() * n;
    let record = CsiRecord::new(frames, spec.nominal_rate, spec.meta.clone())?;

    let ref_start = -spec.reference_margin;
    let ref_len = ((spec.duration + 2.0 * spec.reference_margin) * spec.reference_rate).ceil() as usize + 1;
    let reference = ReferenceTrace::new(
        (0..ref_len)
            .map(|i| quantize(breathing.value(ref_start + i as f64 / spec.reference_rate), VALUE_STEPS))
            .collect(),
        spec.reference_rate,
        ref_start,
    )?;

    let wave_rate = 60.0;
    let wave_len = (spec.duration * wave_rate).floor() as usize + 1;
    let waveform = UniformSeries::new(
        (0..wave_len).map(|i| breathing.value(i as f64 / wave_rate)).collect(),
        wave_rate,
        0.0,
    )?;
    let cycle_boundaries = breathing.peak_times(0.0, spec.duration);
    let epoch = EpochGrid::new(0.0, DEFAULT_EPOCH, (spec.duration / DEFAULT_EPOCH + 1e-9).floor() as usize)?;
    let epoch_counts = integer_counts(&count_cycles_from_times(&cycle_boundaries, &epoch));

    Ok(Synthesized {
        record,
        reference,
        truth: GroundTruth {
            waveform: Some(waveform),
            schedule: spec.breathing.clone(),
            cycle_boundaries,
            epoch,
            epoch_counts,
            outliers,
            values,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csi_data::magnitudes;

    fn quiet(duration: f64, bpm: f64) -> SynthSpec {
        SynthSpec {
            duration,
            breathing: vec![BreathingSegment {
                start: 0.0,
                rate_bpm: bpm,
                amplitude: 1.0,
            }],
            ..SynthSpec::default()
        }
        .noiseless()
    }

    #[test]
    fn deterministic() {
        let spec = SynthSpec {
            duration: 40.0,
            seed: 9,
            ..SynthSpec::default()
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.record, b.record);
        assert_eq!(a.reference, b.reference);
        assert_eq!(a.truth, b.truth);
    }

    #[test]
    fn timestamps_strictly_increase() {
        for seed in 0..20 {
            let spec = SynthSpec {
                duration: 20.0,
                jitter_std: 0.02,
                seed,
                ..SynthSpec::default()
            };
            let r = generate(&spec).unwrap();
            assert!(r.record.timestamps().windows(2).all(|w| w[1] > w[0]));
            assert!(r.record.duration() >= 20.0);
        }
    }

    #[test]
    fn fifteen_bpm_minute() {
        let s = generate(&quiet(60.0, 15.0)).unwrap();
        // Peaks at 1, 5, ..., 57 s.
        assert_eq!(s.truth.cycle_boundaries.len(), 15);
        assert!((s.truth.cycle_boundaries[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.truth.epoch_counts, vec![7, 7]);
        assert_eq!(s.truth.recount(), s.truth.epoch_counts);
    }

    #[test]
    fn phase_continuity() {
        let segs = vec![
            BreathingSegment { start: 0.0, rate_bpm: 14.0, amplitude: 1.0 },
            BreathingSegment { start: 60.0, rate_bpm: 18.0, amplitude: 1.0 },
        ];
        let b = Breathing::new(&segs, 0.3);
        assert!((b.value(60.0 - 1e-9) - b.value(60.0)).abs() < 1e-6);
        for t in b.peak_times(0.0, 120.0) {
            assert!((b.value(t) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn outlier_count_is_binomial() {
        let spec = SynthSpec {
            duration: 10_000.0 / 62.5 / 10.0,
            n_subcarriers: 10,
            weights: vec![1.0; 10],
            baselines: vec![30.0; 10],
            outlier_rate: 0.02,
            seed: 3,
            ..SynthSpec::default()
        };
        let s = generate(&spec).unwrap();
        let n = s.truth.values as f64;
        let expect = 0.02 * n;
        let sd = (n * 0.02 * 0.98).sqrt();
        assert!((s.truth.outliers as f64 - expect).abs() <= 3.0 * sd);
    }

    #[test]
    fn out_of_band_needs_override() {
        let mut spec = quiet(60.0, 8.0);
        assert!(generate(&spec).is_err());
        spec.allow_out_of_band = true;
        assert!(generate(&spec).is_ok());
    }

    #[test]
    fn complex_magnitudes_follow_model() {
        let spec = SynthSpec {
            duration: 10.0,
            complex: true,
            ..quiet(10.0, 15.0)
        };
        let s = generate(&spec).unwrap();
        let m = magnitudes(&s.record);
        let t = s.record.timestamps()[7];
        let b = Breathing::new(&spec.breathing, 0.0).value(t);
        assert!((m.get(7, 0) - (30.0 + b)).abs() < 2e-4);
    }
}
