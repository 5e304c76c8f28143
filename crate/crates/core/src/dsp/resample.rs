use crate::csi_data::UniformSeries;
use crate::error::{Error, Result};

/// Linear interpolation of `(timestamps, values)` onto a uniform grid that
/// starts at the first timestamp and never extends past the last one.
pub fn resample_linear(timestamps: &[f64], values: &[f64], target_rate: f64) -> Result<UniformSeries> {
    if timestamps.len() != values.len() {
        return Err(Error::LengthMismatch {
            left: timestamps.len(),
            right: values.len(),
        });
    }
    if timestamps.len() < 2 {
        return Err(Error::InvalidInput(
            "resampling needs at least 2 points".into(),
        ));
    }
    if !(target_rate.is_finite() && target_rate > 0.0) {
        return Err(Error::InvalidInput(format!(
            "target rate must be positive, got {target_rate}"
        )));
    }
    if let Some(i) = timestamps.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::parse(i + 2, "non-increasing timestamp"));
    }
    let t0 = timestamps[0];
    let t_last = timestamps[timestamps.len() - 1];
    let n = ((t_last - t0) * target_rate + 1e-9).floor() as usize + 1;
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let t = (t0 + k as f64 / target_rate).min(t_last);
        while j + 2 < timestamps.len() && timestamps[j + 1] <= t {
            j += 1;
        }
        out.push(interpolate(timestamps, values, j, t));
    }
    UniformSeries::new(out, target_rate, t0)
}

fn interpolate(ts: &[f64], vs: &[f64], j: usize, t: f64) -> f64 {
    let (ta, tb) = (ts[j], ts[j + 1]);
    if t == ta {
        return vs[j];
    }
    if t == tb {
        return vs[j + 1];
    }
    vs[j] + (vs[j + 1] - vs[j]) * (t - ta) / (tb - ta)
}

/// Samples `series` (linearly interpolated) at `start + k / rate` for
/// `k in 0..len`. Grid points outside the series' span are an error.
pub fn sample_at_grid(series: &UniformSeries, start: f64, rate: f64, len: usize) -> Result<Vec<f64>> {
    let s = series.samples();
    if s.len() < 2 {
        return Err(Error::InvalidInput("series too short to interpolate".into()));
    }
    let tol = 1e-6 / series.rate();
    let mut out = Vec::with_capacity(len);
    for k in 0..len {
        let t = start + k as f64 / rate;
        let pos = (t - series.start_time()) * series.rate();
        if pos < -tol * series.rate() || pos > (s.len() - 1) as f64 + tol * series.rate() {
            return Err(Error::GridMismatch(format!(
                "grid time {t:.6} s lies outside [{:.6}, {:.6}]",
                series.start_time(),
                series.end_time()
            )));
        }
        let pos = pos.clamp(0.0, (s.len() - 1) as f64);
        let i = (pos.floor() as usize).min(s.len() - 2);
        let frac = pos - i as f64;
        out.push(if frac == 0.0 {
            s[i]
        } else {
            s[i] + (s[i + 1] - s[i]) * frac
        });
    }
    Ok(out)
}
