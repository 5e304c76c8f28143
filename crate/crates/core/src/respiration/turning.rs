use serde::{Deserialize, Serialize};

use crate::csi_data::UniformSeries;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    /// Seconds between consecutive points of the same kind.
    pub min_separation: f64,
    /// Fraction of the waveform's P90 - P10 spread.
    pub min_prominence: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            min_separation: 1.2,
            min_prominence: 0.2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Peak,
    Trough,
}

/// Peaks and troughs of a waveform, strictly alternating in time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurningPoints {
    pub peaks: Vec<usize>,
    pub troughs: Vec<usize>,
    /// Sub-sample peak times, seconds.
    pub peak_times: Vec<f64>,
    pub trough_times: Vec<f64>,
    pub params: DetectionParams,
}

impl TurningPoints {
    /// All points in time order.
    pub fn merged(&self) -> Vec<(usize, PointKind)> {
        let mut all: Vec<(usize, PointKind)> = self
            .peaks
            .iter()
            .map(|&i| (i, PointKind::Peak))
            .chain(self.troughs.iter().map(|&i| (i, PointKind::Trough)))
            .collect();
        all.sort_by_key(|p| p.0);
        all
    }

    pub fn cycles(&self) -> usize {
        self.peaks.len().saturating_sub(1)
    }
}

#[derive(Clone, Copy, Debug)]
struct Point {
    /// Sample position; plateau midpoints may fall between samples.
    pos: f64,
    index: usize,
    value: f64,
    kind: PointKind,
}

impl Point {
    /// Strictly more extreme than `other` (same kind).
    fn beats(&self, other: &Point) -> bool {
        match self.kind {
            PointKind::Peak => self.value > other.value,
            PointKind::Trough => self.value < other.value,
        }
    }
}

/// Linear-interpolation percentile of unsorted data, `q` in `[0, 1]`.
pub fn percentile(x: &[f64], q: f64) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let h = q * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Local maxima of `x` by neighbour comparison. A flat top counts once, at
/// its middle; plateaus touching either end are ignored. Returns
/// `(left, right)` sample bounds of each maximum.
fn local_maxima(x: &[f64]) -> Vec<(usize, usize)> {
    let n = x.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i - 1] < x[i] {
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                out.push((i, j));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Height of the maximum at `p` above the higher of the lowest points
/// reached on each side before the signal climbs above it.
fn prominence(x: &[f64], p: usize) -> f64 {
    let h = x[p];
    let mut left_min = h;
    let mut i = p;
    while i > 0 {
        i -= 1;
        if x[i] > h {
            break;
        }
        left_min = left_min.min(x[i]);
    }
    let mut right_min = h;
    for &v in &x[p + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

fn candidates(x: &[f64], kind: PointKind, threshold: f64) -> Vec<Point> {
    let signed: Vec<f64> = match kind {
        PointKind::Peak => x.to_vec(),
        PointKind::Trough => x.iter().map(|v| -v).collect(),
    };
    local_maxima(&signed)
        .into_iter()
        .filter_map(|(l, r)| {
            let index = (l + r) / 2;
            let prom = prominence(&signed, index);
            (prom > 0.0 && prom >= threshold).then_some(Point {
                pos: (l + r) as f64 / 2.0,
                index,
                value: x[index],
                kind,
            })
        })
        .collect()
}

/// Collapses runs of same-kind points to their most extreme member (the
/// earliest on ties).
fn alternate(points: Vec<Point>) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        match out.last_mut() {
            Some(last) if last.kind == p.kind => {
                if p.beats(last) {
                    *last = p;
                }
            }
            _ => out.push(p),
        }
    }
    out
}

/// Drops, among same-kind points closer than `min_gap` samples, the less
/// extreme one. Returns whether anything was removed.
fn separate(points: &mut Vec<Point>, min_gap: f64) -> bool {
    let mut removed = vec![false; points.len()];
    for kind in [PointKind::Peak, PointKind::Trough] {
        let mut last: Option<usize> = None;
        for i in 0..points.len() {
            if points[i].kind != kind {
                continue;
            }
            match last {
                Some(k) if points[i].pos - points[k].pos < min_gap => {
                    if points[i].beats(&points[k]) {
                        removed[k] = true;
                        last = Some(i);
                    } else {
                        removed[i] = true;
                    }
                }
                _ => last = Some(i),
            }
        }
    }
    let any = removed.iter().any(|r| *r);
    let mut it = removed.into_iter();
    points.retain(|_| !it.next().unwrap_or(false));
    any
}

/// Parabolic vertex offset, in samples, around interior sample `i`.
fn vertex_offset(x: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= x.len() {
        return 0.0;
    }
    let (a, b, c) = (x[i - 1], x[i], x[i + 1]);
    let d = a - 2.0 * b + c;
    if d == 0.0 {
        0.0
    } else {
        (0.5 * (a - c) / d).clamp(-0.5, 0.5)
    }
}

/// Detects alternating peaks and troughs.
///
/// Candidates are neighbour-comparison extrema whose prominence reaches
/// `min_prominence` times the P90 - P10 spread of `x`. Consecutive points of
/// one kind are reduced to the most extreme, and same-kind points closer than
/// `min_separation` keep only the more extreme; both rules are reapplied until
/// neither changes the set.
pub fn detect_turning_points(x: &UniformSeries, params: DetectionParams) -> TurningPoints {
    let s = x.samples();
    let empty = TurningPoints {
        peaks: Vec::new(),
        troughs: Vec::new(),
        peak_times: Vec::new(),
        trough_times: Vec::new(),
        params,
    };
    if s.len() < 3 {
        return empty;
    }
    let spread = percentile(s, 0.9) - percentile(s, 0.1);
    let threshold = params.min_prominence * spread;
    let mut points = candidates(s, PointKind::Peak, threshold);
    points.extend(candidates(s, PointKind::Trough, threshold));
    points.sort_by(|a, b| a.pos.total_cmp(&b.pos));

    let min_gap = params.min_separation * x.rate();
    let mut points = alternate(points);
    while separate(&mut points, min_gap) {
        points = alternate(points);
    }

    let mut out = empty;
    for p in points {
        let pos = if p.pos.fract() == 0.0 && p.pos as usize == p.index {
            p.index as f64 + vertex_offset(s, p.index)
        } else {
            p.pos
        };
        let t = x.start_time() + pos / x.rate();
        match p.kind {
            PointKind::Peak => {
                out.peaks.push(p.index);
                out.peak_times.push(t);
            }
            PointKind::Trough => {
                out.troughs.push(p.index);
                out.trough_times.push(t);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn series(f: impl Fn(f64) -> f64, secs: f64, rate: f64) -> UniformSeries {
        let n = (secs * rate).round() as usize;
        UniformSeries::new((0..n).map(|i| f(i as f64 / rate)).collect(), rate, 0.0).unwrap()
    }

    #[test]
    fn sinusoid_peaks() {
        let x = series(|t| (2.0 * PI * 0.25 * t).sin(), 60.0, 60.0);
        let tp = detect_turning_points(&x, DetectionParams::default());
        assert_eq!(tp.peaks.len(), 15);
        assert_eq!(tp.troughs.len(), 15);
        for w in tp.peaks.windows(2) {
            assert!((w[1] as i64 - w[0] as i64 - 240).abs() <= 1);
        }
        for (k, t) in tp.peak_times.iter().enumerate() {
            assert!((t - (1.0 + 4.0 * k as f64)).abs() < 1e-3);
        }
    }

    #[test]
    fn constant_has_no_points() {
        let x = series(|_| 3.0, 30.0, 60.0);
        let tp = detect_turning_points(&x, DetectionParams::default());
        assert!(tp.peaks.is_empty() && tp.troughs.is_empty());
    }

    #[test]
    fn plateau_counts_once() {
        let x = UniformSeries::new(vec![0.0, 1.0, 2.0, 2.0, 2.0, 1.0, 0.0, -1.0, 0.0], 1.0, 0.0).unwrap();
        let p = DetectionParams {
            min_separation: 0.0,
            min_prominence: 0.0,
        };
        let tp = detect_turning_points(&x, p);
        assert_eq!(tp.peaks, vec![3]);
        assert_eq!(tp.troughs, vec![7]);
    }

    #[test]
    fn small_wiggles_rejected() {
        let x = series(
            |t| (2.0 * PI * 0.25 * t).sin() + 0.02 * (2.0 * PI * 3.0 * t).sin(),
            60.0,
            60.0,
        );
        let tp = detect_turning_points(&x, DetectionParams::default());
        assert_eq!(tp.peaks.len(), 15);
    }

    #[test]
    fn percentile_matches_linear_rule() {
        let v = [4.0, 1.0, 3.0, 2.0, 5.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert!((percentile(&v, 0.9) - 4.6).abs() < 1e-12);
    }
}
