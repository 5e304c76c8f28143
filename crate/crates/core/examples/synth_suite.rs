// Generate a labelled synthetic dataset: subjects x postures, with a belt
// reference and ground-truth cycle counts for every record, and write it to
// disk with a manifest.

use std::error::Error;

use wifi_respiration::csi_data::Posture;
use wifi_respiration::synth::{default_profiles, subject_suite, write_suite, GroundTruth, SuiteSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let suite = SuiteSpec {
        profiles: default_profiles()[..2].to_vec(),
        postures: vec![Posture::Supine, Posture::Prone],
        duration: 90.0,
        seed: 42,
        ..SuiteSpec::default()
    };
    let records = subject_suite(&suite)?;
    for r in &records {
        let rates: Vec<String> = r.spec.breathing.iter().map(|b| format!("{:.1}", b.rate_bpm)).collect();
        println!(
            "{:<10} amplitude {:.2}, rates {} bpm, true counts {:?}",
            r.id,
            r.spec.breathing[0].amplitude,
            rates.join("/"),
            r.data.truth.epoch_counts
        );
    }

    let dir = tempfile::tempdir()?;
    let manifest = write_suite(&records, &suite, dir.path())?;
    println!("{} files written", manifest.outputs.len());
    let truth = GroundTruth::from_json(&std::fs::read_to_string(dir.path().join("s1_supine.truth.json"))?)?;
    assert_eq!(truth.epoch_counts, records[0].data.truth.epoch_counts);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
