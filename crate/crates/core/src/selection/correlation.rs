use super::{partition_windows, window_samples, ExtractionResult, Method, WindowDescriptor, WindowDetail};
use crate::csi_data::UniformSeries;
use crate::dsp::{zscore, Channels};
use crate::error::{Error, Result};

/// Seconds.
pub const DEFAULT_CORRELATION_WINDOW: f64 = 10.0;

/// Reference-guided subcarrier selection.
///
/// In each window every channel segment and the reference segment are
/// Z-normalized; the channel with the largest `|r|` wins (ties go to the
/// lower index) and its normalized segment, multiplied by `sign(r)`, becomes
/// that stretch of the output.
pub fn select_by_correlation(
    channels: &Channels,
    reference: &UniformSeries,
    window: f64,
) -> Result<ExtractionResult> {
    check_grid(channels, reference)?;
    let wlen = window_samples(window, channels.rate(), 2)?;
    let windows = partition_windows(channels.len(), wlen);
    if windows.is_empty() {
        return Err(Error::InvalidInput("empty window".into()));
    }
    let mut signal = Vec::with_capacity(channels.len());
    let mut per_window = Vec::with_capacity(windows.len());
    for range in windows {
        let (zref, ref_degenerate) = zscore(&reference.samples()[range.clone()]);
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for (k, channel) in channels.data().iter().enumerate() {
            let (z, degenerate) = zscore(&channel[range.clone()]);
            let r = if degenerate || ref_degenerate {
                0.0
            } else {
                (z.iter().zip(&zref).map(|(a, b)| a * b).sum::<f64>() / z.len() as f64).clamp(-1.0, 1.0)
            };
            if best.as_ref().is_none_or(|(_, br, _)| r.abs() > br.abs()) {
                best = Some((k, r, z));
            }
        }
        let (channel, r, z) = best.expect("at least one channel");
        let sign = if r < 0.0 { -1.0 } else { 1.0 };
        signal.extend(z.iter().map(|v| v * sign));
        per_window.push(WindowDescriptor {
            start: range.start,
            len: range.len(),
            start_time: channels.time_at(range.start),
            detail: WindowDetail::Correlation {
                channel,
                r,
                degenerate: ref_degenerate,
            },
        });
    }
    Ok(ExtractionResult {
        signal: UniformSeries::new(signal, channels.rate(), channels.start_time())?,
        method: Method::Correlation,
        window,
        per_window,
    })
}

fn check_grid(channels: &Channels, reference: &UniformSeries) -> Result<()> {
    if (channels.rate() - reference.rate()).abs() > 1e-9 * channels.rate() {
        return Err(Error::GridMismatch(format!(
            "reference rate {} Hz differs from channel rate {} Hz",
            reference.rate(),
            channels.rate()
        )));
    }
    if reference.len() != channels.len() {
        return Err(Error::GridMismatch(format!(
            "reference has {} samples, channels have {}",
            reference.len(),
            channels.len()
        )));
    }
    if (reference.start_time() - channels.start_time()).abs() > 0.5 / channels.rate() {
        return Err(Error::GridMismatch(format!(
            "reference starts at {} s, channels at {} s",
            reference.start_time(),
            channels.start_time()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::pearson;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn breathing(n: usize, rate: f64) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = i as f64 / rate;
                (2.0 * std::f64::consts::PI * 0.27 * t).sin() + 0.3 * (2.0 * std::f64::consts::PI * 0.11 * t).cos()
            })
            .collect()
    }

    fn noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn exact_copy_is_chosen() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 3600;
        let r = breathing(n, 60.0);
        let mut data: Vec<Vec<f64>> = (0..6).map(|_| noise(&mut rng, n)).collect();
        data[4] = r.clone();
        let ch = Channels::new(data, 60.0, 0.0).unwrap();
        let reference = UniformSeries::new(r, 60.0, 0.0).unwrap();
        let out = select_by_correlation(&ch, &reference, 10.0).unwrap();
        assert_eq!(out.chosen_channels(), vec![4; 6]);
        for w in &out.per_window {
            let WindowDetail::Correlation { r, .. } = w.detail else { panic!() };
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn negated_copy_is_sign_restored() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 1800;
        let r = breathing(n, 60.0);
        let mut data: Vec<Vec<f64>> = (0..3).map(|_| noise(&mut rng, n)).collect();
        data[1] = r.iter().map(|v| -2.0 * v + 5.0).collect();
        let ch = Channels::new(data, 60.0, 0.0).unwrap();
        let reference = UniformSeries::new(r.clone(), 60.0, 0.0).unwrap();
        let out = select_by_correlation(&ch, &reference, 10.0).unwrap();
        assert_eq!(out.chosen_channels(), vec![1; 3]);
        for w in &out.per_window {
            let seg = &out.signal.samples()[w.start..w.start + w.len];
            let rr = pearson(seg, &r[w.start..w.start + w.len]).unwrap();
            assert!((rr - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_mismatched_grid() {
        let ch = Channels::new(vec![vec![0.0; 100]], 60.0, 0.0).unwrap();
        let short = UniformSeries::new(vec![0.0; 99], 60.0, 0.0).unwrap();
        assert!(matches!(
            select_by_correlation(&ch, &short, 10.0),
            Err(Error::GridMismatch(_))
        ));
        let other_rate = UniformSeries::new(vec![0.0; 100], 50.0, 0.0).unwrap();
        assert!(select_by_correlation(&ch, &other_rate, 10.0).is_err());
    }
}
