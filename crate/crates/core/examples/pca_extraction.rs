// Fuse all subcarriers into one waveform with windowed PCA. Subcarriers whose
// magnitude falls when the chest rises get negative loadings.

use std::error::Error;

use wifi_respiration::dsp::{preprocess_subcarriers, FilterSpec};
use wifi_respiration::selection::{extract_pca, principal_components, WindowDetail};
use wifi_respiration::synth::{generate, SynthSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let weights: Vec<f64> = (0..8).map(|k| if k % 2 == 0 { 1.0 } else { -0.5 }).collect();
    let spec = SynthSpec {
        duration: 120.0,
        n_subcarriers: 8,
        weights,
        baselines: vec![30.0; 8],
        noise_snr_db: Some(15.0),
        seed: 11,
        ..SynthSpec::default()
    };
    let synth = generate(&spec)?;
    let channels = preprocess_subcarriers(&synth.record, &FilterSpec::default())?;

    let columns: Vec<&[f64]> = channels.data().iter().map(|c| c.as_slice()).collect();
    let pca = principal_components(&columns);
    println!("first component explains {:.1}% of the variance", 100.0 * pca.explained_fraction(0));

    let result = extract_pca(&channels, 30.0)?;
    for w in &result.per_window {
        if let WindowDetail::Pca { loading, .. } = &w.detail {
            let signs: String = loading.iter().map(|l| if *l >= 0.0 { '+' } else { '-' }).collect();
            println!("window at {:5.1} s: loading signs {signs}", w.start_time);
        }
    }
    println!("{} samples of fused waveform", result.signal.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
