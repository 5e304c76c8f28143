// Pick, in every 10 s window, the subcarrier that tracks the belt trace best.
// The coupling of the subcarriers swaps halfway through the record, so the
// chosen subcarrier changes with it.

use std::error::Error;

use wifi_respiration::dsp::{preprocess_subcarriers, FilterSpec};
use wifi_respiration::pipeline::process_reference;
use wifi_respiration::selection::select_by_correlation;
use wifi_respiration::synth::{generate, CouplingChange, SynthSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = SynthSpec {
        duration: 60.0,
        n_subcarriers: 3,
        weights: vec![1.0, 0.0, 0.0],
        coupling_changes: vec![CouplingChange {
            time: 30.0,
            weights: vec![0.0, 0.0, -1.0],
        }],
        baselines: vec![30.0; 3],
        ..SynthSpec::default()
    }
    .noiseless();
    let synth = generate(&spec)?;
    let filter = FilterSpec::default();
    let channels = preprocess_subcarriers(&synth.record, &filter)?;
    let reference = process_reference(&synth.reference, &filter)?;

    // noiseless synthetic data needs no lag search
    let start = ((channels.start_time() - reference.start_time()) * reference.rate()).round() as usize;
    let reference = reference.slice(start..start + channels.len());

    let result = select_by_correlation(&channels, &reference, 10.0)?;
    println!("chosen subcarrier per window: {:?}", result.chosen_channels());
    assert_eq!(result.chosen_channels()[0], 0);
    assert_eq!(*result.chosen_channels().last().unwrap(), 2);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
