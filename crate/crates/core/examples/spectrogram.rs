// Short-time spectra of a breathing waveform whose rate steps from 12 to
// 20 bpm, written as CSV and as a PNG heat map.

use std::error::Error;

use wifi_respiration::csi_data::UniformSeries;
use wifi_respiration::dsp::{render_png, spectrogram};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rate = 10.0;
    let mut phase = 0.0;
    let samples: Vec<f64> = (0..(rate * 240.0) as usize)
        .map(|i| {
            let hz = if i as f64 / rate < 120.0 { 0.2 } else { 1.0 / 3.0 };
            phase += std::f64::consts::TAU * hz / rate;
            phase.sin()
        })
        .collect();
    let wave = UniformSeries::new(samples, rate, 0.0)?;

    let s = spectrogram(&wave, 30.0, 0.5)?;
    let peaks: Vec<String> = s.peak_bins().iter().map(|b| format!("{:.3}", s.freqs[*b])).collect();
    println!("peak frequency per frame, Hz: {}", peaks.join(" "));

    let dir = tempfile::tempdir()?;
    let mut csv = Vec::new();
    s.write_csv(&mut csv)?;
    std::fs::write(dir.path().join("wave.spectrogram.csv"), csv)?;
    render_png(&[&s], Some(1.0), 4, &dir.path().join("wave.png"))?;
    println!("png is {} bytes", std::fs::metadata(dir.path().join("wave.png"))?.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
