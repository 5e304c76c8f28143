use crate::csi_data::UniformSeries;
use crate::error::{Error, Result};

/// Number of samples in a moving-average window of `window` seconds.
pub fn moving_average_len(window: f64, rate: f64) -> Result<usize> {
    let n = (window * rate).round();
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "moving-average window of {window} s spans no samples at {rate} Hz"
        )));
    }
    Ok(n as usize)
}

/// Centered boxcar average. Windows are truncated at the edges and divided by
/// the number of samples actually covered.
pub fn moving_average(x: &UniformSeries, window: f64) -> Result<UniformSeries> {
    let n = moving_average_len(window, x.rate())?;
    x.with_samples(moving_average_samples(x.samples(), n))
}

/// For even `n` the window covers offsets `-(n/2 - 1)..=n/2`.
pub fn moving_average_samples(x: &[f64], n: usize) -> Vec<f64> {
    let len = x.len();
    let before = (n - 1) / 2;
    let after = n - 1 - before;
    let mut prefix = Vec::with_capacity(len + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in x {
        acc += v;
        prefix.push(acc);
    }
    (0..len)
        .map(|i| {
            let lo = i.saturating_sub(before);
            let hi = (i + after).min(len - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_unchanged() {
        let x = vec![3.25; 50];
        assert_eq!(moving_average_samples(&x, 9), x);
        assert_eq!(moving_average_samples(&x, 90), x);
    }

    #[test]
    fn impulse_response() {
        let mut x = vec![0.0; 40];
        x[20] = 1.0;
        let y = moving_average_samples(&x, 6);
        let nonzero: Vec<usize> = (0..40).filter(|&i| y[i] != 0.0).collect();
        assert_eq!(nonzero.len(), 6);
        assert!(nonzero.windows(2).all(|w| w[1] == w[0] + 1));
        for &i in &nonzero {
            assert!((y[i] - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_divisor() {
        let y = moving_average_samples(&[1.0, 2.0, 3.0, 4.0], 3);
        assert_eq!(y, vec![1.5, 2.0, 3.0, 3.5]);
    }

    #[test]
    fn window_len() {
        assert_eq!(moving_average_len(1.5, 60.0).unwrap(), 90);
        assert!(moving_average_len(0.001, 60.0).is_err());
    }
}
