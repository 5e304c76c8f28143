use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate, BreathingSegment, SynthSpec, Synthesized};
use crate::csi_data::{save_csi, save_reference, write_atomic, CsiFormat, Posture, RecordMeta};
use crate::error::{Error, Result};
use crate::manifest::{Manifest, ManifestFile};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostureAttenuation {
    pub supine: f64,
    pub side: f64,
    pub prone: f64,
}

impl Default for PostureAttenuation {
    fn default() -> Self {
        PostureAttenuation {
            supine: 1.0,
            side: 0.8,
            prone: 0.5,
        }
    }
}

impl PostureAttenuation {
    pub fn get(&self, posture: Posture) -> f64 {
        match posture {
            Posture::Supine => self.supine,
            Posture::Side => self.side,
            Posture::Prone => self.prone,
            Posture::Unknown => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubjectProfile {
    pub id: String,
    /// Scales the breathing amplitude of every record of this subject.
    pub amplitude_factor: f64,
    pub attenuation: PostureAttenuation,
}

/// Five subjects with differing build.
pub fn default_profiles() -> Vec<SubjectProfile> {
    [1.0, 1.25, 0.9, 1.1, 0.8]
        .iter()
        .enumerate()
        .map(|(i, f)| SubjectProfile {
            id: (i + 1).to_string(),
            amplitude_factor: *f,
            attenuation: PostureAttenuation::default(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub profiles: Vec<SubjectProfile>,
    pub postures: Vec<Posture>,
    /// Seconds per record.
    pub duration: f64,
    pub noise_snr_db: Option<f64>,
    pub seed: u64,
    pub n_subcarriers: usize,
    /// Seconds between breathing-rate changes.
    pub segment_length: f64,
    /// Breathing rates are drawn uniformly from this range, bpm.
    pub rate_range: (f64, f64),
    pub base_amplitude: f64,
    pub jitter_std: f64,
    pub outlier_rate: f64,
    pub complex: bool,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        let base = SynthSpec::default();
        SuiteSpec {
            profiles: default_profiles(),
            postures: Posture::PROTOCOL.to_vec(),
            duration: 300.0,
            noise_snr_db: Some(20.0),
            seed: 0,
            n_subcarriers: base.n_subcarriers,
            segment_length: 60.0,
            rate_range: (13.0, 19.0),
            base_amplitude: 1.0,
            jitter_std: base.jitter_std,
            outlier_rate: base.outlier_rate,
            complex: false,
        }
    }
}

pub struct SuiteRecord {
    /// `s<subject>_<posture>`.
    pub id: String,
    pub spec: SynthSpec,
    pub data: Synthesized,
}

fn record_spec(suite: &SuiteSpec, subject: usize, posture: Posture) -> SynthSpec {
    let profile = &suite.profiles[subject];
    let posture_index = Posture::PROTOCOL.iter().position(|p| *p == posture).unwrap_or(3);
    let mut rng = ChaCha8Rng::seed_from_u64(suite.seed);
    rng.set_stream((subject * 4 + posture_index) as u64 + 1);

    let n = suite.n_subcarriers;
    let weights: Vec<f64> = (0..n)
        .map(|_| {
            let w = rng.random_range(0.05..1.0);
            if rng.random_bool(0.5) {
                w
            } else {
                -w
            }
        })
        .collect();
    let baselines: Vec<f64> = (0..n).map(|_| rng.random_range(20.0..40.0)).collect();
    let unattenuated = suite.base_amplitude * profile.amplitude_factor;
    let amplitude = unattenuated * profile.attenuation.get(posture);
    let (lo, hi) = suite.rate_range;
    let segments = (suite.duration / suite.segment_length).ceil().max(1.0) as usize;
    let breathing = (0..segments)
        .map(|k| BreathingSegment {
            start: k as f64 * suite.segment_length,
            rate_bpm: if hi > lo { rng.random_range(lo..hi) } else { lo },
            amplitude,
        })
        .collect();
    SynthSpec {
        duration: suite.duration,
        n_subcarriers: n,
        jitter_std: suite.jitter_std,
        breathing,
        initial_phase: rng.random_range(0.0..std::f64::consts::TAU),
        weights,
        baselines,
        noise_snr_db: suite.noise_snr_db,
        noise_reference_amplitude: Some(unattenuated),
        outlier_rate: suite.outlier_rate,
        seed: rng.random(),
        complex: suite.complex,
        meta: RecordMeta {
            subject: Some(profile.id.clone()),
            posture,
            tags: vec!["synthetic".into()],
        },
        ..SynthSpec::default()
    }
}

/// One record per subject and posture, in subject-major order. Each record's
/// parameters depend only on the suite seed and its (subject, posture) slot.
pub fn subject_suite(suite: &SuiteSpec) -> Result<Vec<SuiteRecord>> {
    if suite.profiles.is_empty() || suite.postures.is_empty() {
        return Err(Error::InvalidInput("suite needs at least one subject and posture".into()));
    }
    let slots: Vec<(usize, Posture)> = (0..suite.profiles.len())
        .flat_map(|s| suite.postures.iter().map(move |p| (s, *p)))
        .collect();
    slots
        .into_par_iter()
        .map(|(s, p)| {
            let spec = record_spec(suite, s, p);
            let data = generate(&spec)?;
            Ok(SuiteRecord {
                id: format!("s{}_{}", suite.profiles[s].id, p),
                spec,
                data,
            })
        })
        .collect()
}

/// Writes `<id>.csi.csv`, `<id>.ref.csv` and `<id>.truth.json` per record and
/// a `manifest.json` listing their digests.
pub fn write_suite(records: &[SuiteRecord], suite: &SuiteSpec, dir: impl AsRef<Path>) -> Result<Manifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir))?;
    records.par_iter().try_for_each(|r| -> Result<()> {
        save_csi(&r.data.record, dir.join(format!("{}.csi.csv", r.id)), CsiFormat::Csv)?;
        save_reference(&r.data.reference, dir.join(format!("{}.ref.csv", r.id)))?;
        write_atomic(dir.join(format!("{}.truth.json", r.id)), |w| {
            w.write_all(r.data.truth.to_json()?.as_bytes())?;
            writeln!(w)?;
            Ok(())
        })
    })?;
    let mut manifest = Manifest::new("synth", serde_json::to_value(suite)?);
    for r in records {
        for suffix in ["csi.csv", "ref.csv", "truth.json"] {
            let name = format!("{}.{suffix}", r.id);
            manifest.outputs.push(ManifestFile::hash(dir.join(&name), name)?);
        }
    }
    manifest.save(dir.join("manifest.json"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_shape() {
        let suite = SuiteSpec {
            duration: 60.0,
            ..SuiteSpec::default()
        };
        let recs = subject_suite(&suite).unwrap();
        assert_eq!(recs.len(), 15);
        assert_eq!(recs[0].id, "s1_supine");
        assert_eq!(recs[14].id, "s5_prone");
        for r in &recs {
            assert_eq!(r.data.truth.epoch_counts.len(), 2);
            assert_eq!(r.data.truth.recount(), r.data.truth.epoch_counts);
        }
    }

    #[test]
    fn records_independent_of_suite_size() {
        let full = SuiteSpec {
            duration: 30.0,
            ..SuiteSpec::default()
        };
        let small = SuiteSpec {
            profiles: full.profiles[..2].to_vec(),
            postures: vec![Posture::Supine],
            ..full.clone()
        };
        let a = subject_suite(&full).unwrap();
        let b = subject_suite(&small).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(a[3].id, b[1].id);
        assert_eq!(a[3].data.record, b[1].data.record);
    }

    #[test]
    fn prone_is_attenuated() {
        let suite = SuiteSpec {
            duration: 30.0,
            ..SuiteSpec::default()
        };
        let recs = subject_suite(&suite).unwrap();
        assert_eq!(recs[2].spec.breathing[0].amplitude, 0.5 * recs[0].spec.breathing[0].amplitude);
        assert_eq!(recs[2].spec.noise_reference_amplitude, Some(1.0));
    }
}
