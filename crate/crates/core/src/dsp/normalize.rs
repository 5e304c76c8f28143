use crate::csi_data::UniformSeries;

/// Population standard deviations below this are treated as zero.
pub const DEGENERATE_STD: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub series: UniformSeries,
    /// Set when the input had (numerically) zero variance; the output is then
    /// all zeros.
    pub degenerate: bool,
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn population_std(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Zero mean, unit population standard deviation.
pub fn zscore(x: &[f64]) -> (Vec<f64>, bool) {
    if x.is_empty() {
        return (Vec::new(), true);
    }
    let m = mean(x);
    let sd = population_std(x);
    if sd < DEGENERATE_STD {
        return (vec![0.0; x.len()], true);
    }
    let mut out: Vec<f64> = x.iter().map(|v| (v - m) / sd).collect();
    // One more centering pass removes the rounding left by the first.
    let residual = mean(&out);
    out.iter_mut().for_each(|v| *v -= residual);
    (out, false)
}

pub fn znormalize(x: &UniformSeries) -> Normalized {
    let (samples, degenerate) = zscore(x.samples());
    Normalized {
        series: x.with_samples(samples).expect("same length"),
        degenerate,
    }
}
