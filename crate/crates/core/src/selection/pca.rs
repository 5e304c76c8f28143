use super::{
    partition_windows, symmetric_eigen, window_samples, ExtractionResult, Method, WindowDescriptor,
    WindowDetail,
};
use crate::csi_data::UniformSeries;
use crate::dsp::Channels;
use crate::error::Result;
use crate::evaluation::pearson;

/// Seconds; one sleep-scoring epoch.
pub const DEFAULT_PCA_WINDOW: f64 = 30.0;
/// Seconds of the previous window's output used to fix the sign of the next.
pub const SIGN_TAIL: f64 = 5.0;

/// Principal axes of a `samples x channels` block.
#[derive(Clone, Debug, PartialEq)]
pub struct PcaDecomposition {
    /// Per-channel means removed before decomposition.
    pub means: Vec<f64>,
    /// Component variances (sample covariance, `n - 1` denominator), non-increasing.
    pub variances: Vec<f64>,
    /// Unit-norm loading vector per component.
    pub loadings: Vec<Vec<f64>>,
}

impl PcaDecomposition {
    /// Fraction of total variance carried by `component`; 0 for a
    /// zero-variance block.
    pub fn explained_fraction(&self, component: usize) -> f64 {
        let total: f64 = self.variances.iter().map(|v| v.max(0.0)).sum();
        if total <= 0.0 {
            0.0
        } else {
            (self.variances[component].max(0.0) / total).clamp(0.0, 1.0)
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.variances.iter().all(|v| *v <= 0.0)
    }

    /// Scores of the centered block on `component`.
    pub fn project(&self, columns: &[&[f64]], component: usize) -> Vec<f64> {
        project(columns, &self.means, &self.loadings[component])
    }
}

fn project(columns: &[&[f64]], means: &[f64], loading: &[f64]) -> Vec<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    (0..n)
        .map(|i| {
            columns
                .iter()
                .zip(means)
                .zip(loading)
                .map(|((c, m), w)| (c[i] - m) * w)
                .sum()
        })
        .collect()
}

/// PCA of the block whose columns are `columns` (one slice per channel, all
/// the same length, at least 2 samples).
pub fn principal_components(columns: &[&[f64]]) -> PcaDecomposition {
    let p = columns.len();
    let n = columns[0].len();
    let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let centered: Vec<Vec<f64>> = columns
        .iter()
        .zip(&means)
        .map(|(c, m)| c.iter().map(|v| v - m).collect())
        .collect();
    let mut cov = vec![0.0; p * p];
    let denom = (n.max(2) - 1) as f64;
    for a in 0..p {
        for b in a..p {
            let s: f64 = centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y).sum::<f64>() / denom;
            cov[a * p + b] = s;
            cov[b * p + a] = s;
        }
    }
    let (variances, loadings) = symmetric_eigen(&cov, p);
    PcaDecomposition {
        means,
        variances,
        loadings,
    }
}

/// Windowed first-principal-component extraction.
///
/// Signs are made continuous across windows: the current window's loading is
/// applied to the previous window's last [`SIGN_TAIL`] seconds of data, and
/// the sign is flipped if that projection anti-correlates with the output
/// already emitted there. The first window is oriented so its maximum comes
/// before its minimum.
pub fn extract_pca(channels: &Channels, window: f64) -> Result<ExtractionResult> {
    let wlen = window_samples(window, channels.rate(), 2)?;
    let tail_len = ((SIGN_TAIL * channels.rate()).round() as usize).max(2);
    let windows = partition_windows(channels.len(), wlen);
    let mut signal: Vec<f64> = Vec::with_capacity(channels.len());
    let mut per_window = Vec::with_capacity(windows.len());
    let mut prev_loading: Option<Vec<f64>> = None;

    for range in windows {
        let columns: Vec<&[f64]> = channels.data().iter().map(|c| &c[range.clone()]).collect();
        let pca = principal_components(&columns);
        let degenerate = pca.is_degenerate() || range.len() < 2;
        let mut loading = pca.loadings[0].clone();
        let mut scores = if degenerate {
            vec![0.0; range.len()]
        } else {
            pca.project(&columns, 0)
        };

        if !degenerate {
            let flip = match &prev_loading {
                None => first_window_flip(&scores),
                Some(prev) => {
                    let tail_start = range.start.saturating_sub(tail_len);
                    let tail: Vec<&[f64]> = channels
                        .data()
                        .iter()
                        .map(|c| &c[tail_start..range.start])
                        .collect();
                    let projected = project(&tail, &pca.means, &loading);
                    match pearson(&projected, &signal[tail_start..range.start]) {
                        Ok(r) if r != 0.0 => r < 0.0,
                        _ => dot(&loading, prev) < 0.0,
                    }
                }
            };
            if flip {
                loading.iter_mut().for_each(|v| *v = -*v);
                scores.iter_mut().for_each(|v| *v = -*v);
            }
            prev_loading = Some(loading.clone());
        }

        signal.extend_from_slice(&scores);
        per_window.push(WindowDescriptor {
            start: range.start,
            len: range.len(),
            start_time: channels.time_at(range.start),
            detail: WindowDetail::Pca {
                loading,
                explained_variance: if degenerate { 0.0 } else { pca.explained_fraction(0) },
                degenerate,
            },
        });
    }
    Ok(ExtractionResult {
        signal: UniformSeries::new(signal, channels.rate(), channels.start_time())?,
        method: Method::Pca,
        window,
        per_window,
    })
}

fn first_window_flip(scores: &[f64]) -> bool {
    let argmax = scores
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
        .0;
    let argmin = scores
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b })
        .0;
    argmax > argmin
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
