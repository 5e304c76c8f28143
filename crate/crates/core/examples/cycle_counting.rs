// Detect breathing turning points on a clean waveform and count cycles per
// 30 s epoch, peak to peak, with fractional cycles at the epoch edges.

use std::error::Error;

use wifi_respiration::csi_data::UniformSeries;
use wifi_respiration::respiration::{
    count_cycles, detect_turning_points, integer_counts, write_epochs_csv, DetectionParams, EpochGrid,
};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rate = 60.0;
    let bpm = 14.0;
    let samples: Vec<f64> = (0..(rate * 90.0) as usize)
        .map(|i| {
            let t = i as f64 / rate;
            (std::f64::consts::TAU * bpm / 60.0 * t).sin() + 0.05 * (std::f64::consts::TAU * 1.3 * t).sin()
        })
        .collect();
    let wave = UniformSeries::new(samples, rate, 0.0)?;

    let points = detect_turning_points(&wave, DetectionParams::default());
    println!("{} peaks, {} troughs", points.peaks.len(), points.troughs.len());

    let grid = EpochGrid::for_series(&wave, 30.0)?;
    let epochs = count_cycles(&points, &grid);
    for e in &epochs {
        println!(
            "epoch {} at {:>4.0} s: {:.2} cycles -> {} ({:.1} bpm)",
            e.epoch_index, e.start, e.cycle_count, e.integer_count, e.rr_bpm
        );
    }
    assert_eq!(integer_counts(&epochs), vec![7, 7, 6]);

    let mut csv = Vec::new();
    write_epochs_csv(&epochs, &mut csv)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
