use crate::csi_data::UniformSeries;
use crate::error::{Error, Result};

/// Scale that turns a median absolute deviation into a standard-deviation
/// estimate for Gaussian data.
pub const MAD_SCALE: f64 = 1.4826;

/// Half-width in samples of a centered window of `window` seconds.
///
/// The full window spans `2 * half + 1` samples; `window * rate` must be at
/// least 3.
pub fn hampel_half_width(window: f64, rate: f64) -> Result<usize> {
    let span = window * rate;
    if !(span.is_finite() && span + 1e-9 >= 3.0) {
        return Err(Error::InvalidInput(format!(
            "Hampel window of {window} s spans fewer than 3 samples at {rate} Hz"
        )));
    }
    Ok(((span + 1e-9) / 2.0).floor() as usize)
}

/// Hampel identifier over a centered window truncated at the series edges.
pub fn hampel(x: &UniformSeries, window: f64, threshold: f64) -> Result<UniformSeries> {
    let half = hampel_half_width(window, x.rate())?;
    x.with_samples(hampel_samples(x.samples(), half, threshold))
}

/// Replaces `x[i]` with its window median `m` when
/// `|x[i] - m| > threshold * 1.4826 * MAD`.
pub fn hampel_samples(x: &[f64], half: usize, threshold: f64) -> Vec<f64> {
    let n = x.len();
    let mut out = x.to_vec();
    if n == 0 {
        return out;
    }
    let mut sorted: Vec<f64> = Vec::with_capacity(2 * half + 1);
    for &v in &x[..(half + 1).min(n)] {
        insert_sorted(&mut sorted, v);
    }
    let mut deviations = Vec::with_capacity(2 * half + 1);
    for i in 0..n {
        if i > 0 {
            if i + half < n {
                insert_sorted(&mut sorted, x[i + half]);
            }
            if i > half {
                remove_sorted(&mut sorted, x[i - half - 1]);
            }
        }
        let m = median_of_sorted(&sorted);
        let mad = median_abs_deviation(&sorted, m, &mut deviations);
        let s = MAD_SCALE * mad;
        if (x[i] - m).abs() > threshold * s {
            out[i] = m;
        }
    }
    out
}

fn insert_sorted(v: &mut Vec<f64>, x: f64) {
    let pos = v.partition_point(|&y| y < x);
    v.insert(pos, x);
}

fn remove_sorted(v: &mut Vec<f64>, x: f64) {
    let pos = v.partition_point(|&y| y < x);
    debug_assert!(v[pos] == x);
    v.remove(pos);
}

pub(crate) fn median_of_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Median of `|v[j] - m|` for sorted `v`, by merging the two monotone runs of
/// deviations on either side of `m`.
fn median_abs_deviation(v: &[f64], m: f64, buf: &mut Vec<f64>) -> f64 {
    let n = v.len();
    let split = v.partition_point(|&y| y < m);
    let need = n / 2 + 1;
    buf.clear();
    let (mut left, mut right) = (split, split);
    while buf.len() < need {
        let l = if left > 0 { Some(m - v[left - 1]) } else { None };
        let r = if right < n { Some(v[right] - m) } else { None };
        match (l, r) {
            (Some(a), Some(b)) if a <= b => {
                buf.push(a);
                left -= 1;
            }
            (Some(a), None) => {
                buf.push(a);
                left -= 1;
            }
            (_, Some(b)) => {
                buf.push(b);
                right += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    // buf holds the n/2 + 1 smallest deviations in order.
    if n % 2 == 1 {
        buf[n / 2]
    } else {
        (buf[n / 2 - 1] + buf[n / 2]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_unchanged() {
        let x = vec![5.0; 5];
        assert_eq!(hampel_samples(&x, 1, 1.7), x);
    }

    #[test]
    fn spike_is_replaced() {
        let s = UniformSeries::new(vec![1.0, 1.0, 1.0, 100.0, 1.0, 1.0, 1.0], 1.0, 0.0).unwrap();
        let out = hampel(&s, 7.0, 1.7).unwrap();
        assert_eq!(out.samples(), &[1.0; 7]);
    }

    #[test]
    fn window_too_short() {
        assert!(hampel_half_width(0.02, 60.0).is_err());
        assert_eq!(hampel_half_width(1.0, 60.0).unwrap(), 30);
        assert_eq!(hampel_half_width(1.0, 62.5).unwrap(), 31);
        assert_eq!(hampel_half_width(0.05, 60.0).unwrap(), 1);
    }

    #[test]
    fn truncated_edges() {
        // At index 0 the window is [10, 1, 1]: median 1, MAD 0.
        let x = [10.0, 1.0, 1.0, 1.0, 1.0];
        let out = hampel_samples(&x, 2, 1.7);
        assert_eq!(out[0], 1.0);
    }
}
