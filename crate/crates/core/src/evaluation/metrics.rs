use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::csi_data::UniformSeries;
use crate::dsp::DEGENERATE_STD;
use crate::error::{Error, Result};
use crate::selection::partition_windows;

/// Product-moment correlation. Zero-variance input is reported as
/// [`Error::Degenerate`].
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidInput("correlation needs at least 2 samples".into()));
    }
    let ma = a.iter().sum::<f64>() / n as f64;
    let mb = b.iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (da, db) = (x - ma, y - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    let floor = DEGENERATE_STD * DEGENERATE_STD * n as f64;
    if saa < floor || sbb < floor {
        return Err(Error::Degenerate("zero-variance series".into()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowedCorrelation {
    /// Mean over non-degenerate windows.
    pub mean: f64,
    /// `None` marks a degenerate window.
    pub per_window: Vec<Option<f64>>,
}

/// Per-window Pearson correlation between two series on the same grid,
/// averaged over the windows where both sides have variance.
pub fn windowed_mean_correlation(
    signal: &UniformSeries,
    reference: &UniformSeries,
    window: f64,
) -> Result<WindowedCorrelation> {
    if signal.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: signal.len(),
            right: reference.len(),
        });
    }
    if (signal.rate() - reference.rate()).abs() > 1e-9 * signal.rate() {
        return Err(Error::GridMismatch("series rates differ".into()));
    }
    let wlen = (window * signal.rate()).round() as usize;
    if wlen < 2 {
        return Err(Error::InvalidInput(format!("window of {window} s is too short")));
    }
    let per_window: Vec<Option<f64>> = partition_windows(signal.len(), wlen)
        .into_iter()
        .map(|r| pearson(&signal.samples()[r.clone()], &reference.samples()[r]).ok())
        .collect();
    let valid: Vec<f64> = per_window.iter().flatten().copied().collect();
    if valid.is_empty() {
        return Err(Error::NoValidWindows);
    }
    Ok(WindowedCorrelation {
        mean: valid.iter().sum::<f64>() / valid.len() as f64,
        per_window,
    })
}

fn check_counts(reference: &[i64], signal: &[i64]) -> Result<()> {
    if reference.len() != signal.len() {
        return Err(Error::LengthMismatch {
            left: reference.len(),
            right: signal.len(),
        });
    }
    if reference.is_empty() {
        return Err(Error::InvalidInput("no epochs".into()));
    }
    Ok(())
}

/// Mean absolute difference between per-epoch cycle counts.
pub fn mad_rr(counts_ref: &[i64], counts_sig: &[i64]) -> Result<f64> {
    check_counts(counts_ref, counts_sig)?;
    let total: i64 = counts_ref
        .iter()
        .zip(counts_sig)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(total as f64 / counts_ref.len() as f64)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpochErrorStats {
    /// Percent of epochs with `|dN| >= 1`.
    pub pct_ge1: f64,
    /// Percent of epochs with `|dN| >= 2`.
    pub pct_ge2: f64,
    /// Epochs per signed difference `dN = N_sig - N_ref`.
    pub histogram: BTreeMap<i64, usize>,
}

pub fn epoch_error_stats(counts_ref: &[i64], counts_sig: &[i64]) -> Result<EpochErrorStats> {
    check_counts(counts_ref, counts_sig)?;
    let n = counts_ref.len() as f64;
    let mut histogram = BTreeMap::new();
    let (mut ge1, mut ge2) = (0usize, 0usize);
    for (r, s) in counts_ref.iter().zip(counts_sig) {
        let d = s - r;
        *histogram.entry(d).or_insert(0) += 1;
        if d.abs() >= 1 {
            ge1 += 1;
        }
        if d.abs() >= 2 {
            ge2 += 1;
        }
    }
    Ok(EpochErrorStats {
        pct_ge1: 100.0 * ge1 as f64 / n,
        pct_ge2: 100.0 * ge2 as f64 / n,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pearson_basics() {
        let a: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin() + 0.01 * i as f64).collect();
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert!((pearson(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&a, &neg).unwrap() + 1.0).abs() < 1e-15);
        let n = 600;
        let s: Vec<f64> = (0..n).map(|i| (2.0 * PI * 3.0 * i as f64 / n as f64).sin()).collect();
        let c: Vec<f64> = (0..n).map(|i| (2.0 * PI * 3.0 * i as f64 / n as f64).cos()).collect();
        assert!(pearson(&s, &c).unwrap().abs() < 1e-9);
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::Degenerate(_))));
        assert!(pearson(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mad_arithmetic() {
        assert_eq!(mad_rr(&[12, 11, 10], &[12, 10, 12]).unwrap(), 1.0);
        assert_eq!(mad_rr(&[7, 8, 9], &[7, 8, 9]).unwrap(), 0.0);
        assert!(mad_rr(&[], &[]).is_err());
        assert!(mad_rr(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn error_stats_enumeration() {
        let reference = [10i64; 10];
        let deltas = [0, 0, 1, 0, -1, 0, 0, 2, 0, 0];
        let sig: Vec<i64> = reference.iter().zip(deltas).map(|(r, d)| r + d).collect();
        let st = epoch_error_stats(&reference, &sig).unwrap();
        assert_eq!(st.pct_ge1, 30.0);
        assert_eq!(st.pct_ge2, 10.0);
        assert_eq!(st.histogram, BTreeMap::from([(-1, 1), (0, 7), (1, 1), (2, 1)]));
        let zero = epoch_error_stats(&reference, &reference).unwrap();
        assert_eq!((zero.pct_ge1, zero.pct_ge2), (0.0, 0.0));
    }

    #[test]
    fn windowed_half_orthogonal() {
        let rate = 60.0;
        let n = 2400;
        let wl = 600;
        let reference: Vec<f64> = (0..n).map(|i| (2.0 * PI * 10.0 * (i % wl) as f64 / wl as f64).sin()).collect();
        let sig: Vec<f64> = (0..n)
            .map(|i| {
                if (i / wl) % 2 == 0 {
                    reference[i]
                } else {
                    (2.0 * PI * 10.0 * (i % wl) as f64 / wl as f64).cos()
                }
            })
            .collect();
        let a = UniformSeries::new(sig, rate, 0.0).unwrap();
        let b = UniformSeries::new(reference, rate, 0.0).unwrap();
        let wc = windowed_mean_correlation(&a, &b, 10.0).unwrap();
        assert_eq!(wc.per_window.len(), 4);
        assert!((wc.mean - 0.5).abs() < 1e-9);
        let same = windowed_mean_correlation(&b, &b, 10.0).unwrap();
        assert!((same.mean - 1.0).abs() < 1e-12);
        let flat = UniformSeries::new(vec![0.0; n], rate, 0.0).unwrap();
        assert!(matches!(windowed_mean_correlation(&flat, &b, 10.0), Err(Error::NoValidWindows)));
    }
}
