use serde::{Deserialize, Serialize};

use crate::csi_data::UniformSeries;
use crate::error::{Error, Result};

/// Seconds of overlap required at every candidate lag.
pub const MIN_ALIGN_OVERLAP: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// Seconds. `b(t + lag)` lines up with `a(t)`.
    pub lag: f64,
    /// Normalized cross-correlation at the best integer lag.
    pub correlation: f64,
}

/// Finds the lag in `[-max_lag, max_lag]` maximizing the normalized
/// cross-correlation of `a(t)` and `b(t + lag)`, refined to sub-sample
/// precision by a parabola through the peak and its neighbours. Among equal
/// peaks the smaller `|lag|` wins.
pub fn align(a: &UniformSeries, b: &UniformSeries, max_lag: f64) -> Result<Alignment> {
    let rate = a.rate();
    if (b.rate() - rate).abs() > 1e-9 * rate {
        return Err(Error::GridMismatch(format!(
            "alignment needs equal rates, got {} and {} Hz",
            rate,
            b.rate()
        )));
    }
    if !(max_lag >= 0.0) {
        return Err(Error::InvalidInput(format!("max lag must be >= 0, got {max_lag}")));
    }
    let max_samples = (max_lag * rate).round() as i64;
    let offset = ((a.start_time() - b.start_time()) * rate).round() as i64;
    let (na, nb) = (a.len() as i64, b.len() as i64);
    let overlap = |l: i64| {
        let d = offset + l;
        let lo = 0.max(-d);
        let hi = na.min(nb - d);
        (lo, hi)
    };
    let worst = [-max_samples, max_samples]
        .iter()
        .map(|&l| {
            let (lo, hi) = overlap(l);
            (hi - lo).max(0)
        })
        .min()
        .unwrap_or(0);
    let required = (MIN_ALIGN_OVERLAP * rate).round() as i64;
    if worst < required {
        return Err(Error::InsufficientOverlap {
            available: worst as f64 / rate,
            required: MIN_ALIGN_OVERLAP,
        });
    }

    let ncc = |l: i64| -> f64 {
        let (lo, hi) = overlap(l);
        let d = offset + l;
        let xs = &a.samples()[lo as usize..hi as usize];
        let ys = &b.samples()[(lo + d) as usize..(hi + d) as usize];
        normalized_correlation(xs, ys)
    };
    let scores: Vec<f64> = (-max_samples..=max_samples).map(ncc).collect();
    let at = |l: i64| scores[(l + max_samples) as usize];

    let mut best = 0i64;
    for k in 1..=max_samples {
        for l in [k, -k] {
            if at(l) > at(best) {
                best = l;
            }
        }
    }
    let mut delta = 0.0;
    if best > -max_samples && best < max_samples {
        let (ym, y0, yp) = (at(best - 1), at(best), at(best + 1));
        let denom = ym - 2.0 * y0 + yp;
        if denom < 0.0 {
            delta = (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5);
        }
    }
    let lag = (b.start_time() - a.start_time()) + (offset + best) as f64 / rate + delta / rate;
    Ok(Alignment {
        lag,
        correlation: at(best),
    })
}

fn normalized_correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}
