// Compare a waveform with a delayed reference: estimate the lag, correlate
// in 10 s windows, score per-epoch cycle counts and build the summary
// tables.

use std::error::Error;

use wifi_respiration::csi_data::{Posture, UniformSeries};
use wifi_respiration::evaluation::{
    align, build_report, epoch_error_stats, mad_rr, windowed_mean_correlation, EvaluationReport, TableMetric,
};
use wifi_respiration::selection::Method;

fn breath(rate: f64, seconds: f64, delay: f64) -> UniformSeries {
    let n = (rate * seconds) as usize;
    let x = (0..n)
        .map(|i| {
            let t = i as f64 / rate - delay;
            (1.0 + 0.5 * (std::f64::consts::TAU * t / 47.0).sin()) * (std::f64::consts::TAU * 0.25 * t).sin()
        })
        .collect();
    UniformSeries::new(x, rate, 0.0).unwrap()
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let signal = breath(60.0, 120.0, 0.0);
    let reference = breath(60.0, 120.0, 2.0);

    let al = align(&signal, &reference, 10.0)?;
    println!("lag {:.3} s, correlation {:.3}", al.lag, al.correlation);
    assert!((al.lag - 2.0).abs() < 0.02);

    let start = (al.lag * 60.0).round() as usize;
    let aligned = reference.slice(start..reference.len()).shifted(-al.lag);
    let trimmed = signal.slice(0..aligned.len());
    let wc = windowed_mean_correlation(&trimmed, &aligned, 10.0)?;
    println!("mean windowed correlation {:.3}", wc.mean);

    let counts_ref = [7, 8, 7, 8];
    let counts_sig = [7, 7, 7, 10];
    println!("MAD {:.2}", mad_rr(&counts_ref, &counts_sig)?);
    let stats = epoch_error_stats(&counts_ref, &counts_sig)?;
    println!("{}% of epochs off by one or more", stats.pct_ge1);

    let reports = vec![
        EvaluationReport::from_counts(
            "s1_supine",
            Some("1".into()),
            Posture::Supine,
            Method::Pca,
            al.lag,
            Some(wc.mean),
            wc.per_window.clone(),
            counts_ref.to_vec(),
            counts_sig.to_vec(),
        )?,
        EvaluationReport::from_counts(
            "s1_prone",
            Some("1".into()),
            Posture::Prone,
            Method::Pca,
            al.lag,
            None,
            Vec::new(),
            vec![8, 8],
            vec![8, 9],
        )?,
    ];
    let set = build_report(reports)?;
    print!("{}", set.table(TableMetric::Mad).unwrap().render());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
