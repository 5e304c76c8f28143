use std::io::Write;

use serde::{Deserialize, Serialize};

use super::turning::TurningPoints;
use crate::csi_data::UniformSeries;
use crate::error::{Error, Result};

/// Seconds.
pub const DEFAULT_EPOCH: f64 = 30.0;

/// Slack added before rounding so that halves reconstructed from sub-sample
/// peak times still round up.
pub const ROUND_TOLERANCE: f64 = 1e-3;

/// Consecutive, non-overlapping epochs of equal length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochGrid {
    pub start: f64,
    pub length: f64,
    pub count: usize,
}

impl EpochGrid {
    pub fn new(start: f64, length: f64, count: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidInput(format!("epoch length must be positive, got {length}")));
        }
        Ok(EpochGrid { start, length, count })
    }

    /// Whole epochs covered by `series`, starting at its first sample. Each
    /// sample stands for one sampling period, so `n` samples span `n / rate`.
    pub fn for_series(series: &UniformSeries, length: f64) -> Result<Self> {
        let span = series.len() as f64 / series.rate();
        let grid = EpochGrid::new(series.start_time(), length, 0)?;
        Ok(EpochGrid {
            count: (span / length + 1e-9).floor() as usize,
            ..grid
        })
    }

    pub fn epoch_start(&self, index: usize) -> f64 {
        self.start + index as f64 * self.length
    }

    pub fn end(&self) -> f64 {
        self.epoch_start(self.count)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub epoch_index: usize,
    pub start: f64,
    pub length: f64,
    /// Peak-to-peak cycles, split across epochs by time overlap.
    pub cycle_count: f64,
    pub integer_count: i64,
    /// Breaths per minute.
    pub rr_bpm: f64,
}

pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5 + ROUND_TOLERANCE).floor() as i64
}

/// Per-epoch cycle counts from peak times. Each peak-to-peak interval adds
/// to every epoch the fraction of itself lying inside that epoch.
pub fn count_cycles_from_times(peak_times: &[f64], grid: &EpochGrid) -> Vec<EpochSummary> {
    let mut counts = vec![0.0; grid.count];
    for w in peak_times.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        if !(len > 0.0) {
            continue;
        }
        let first = (((a - grid.start) / grid.length).floor().max(0.0)) as usize;
        for (e, count) in counts.iter_mut().enumerate().skip(first) {
            let lo = grid.epoch_start(e);
            let hi = grid.epoch_start(e + 1);
            if lo >= b {
                break;
            }
            let overlap = b.min(hi) - a.max(lo);
            if overlap > 0.0 {
                *count += overlap / len;
            }
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| EpochSummary {
            epoch_index: i,
            start: grid.epoch_start(i),
            length: grid.length,
            cycle_count: c,
            integer_count: round_half_up(c),
            rr_bpm: c * 60.0 / grid.length,
        })
        .collect()
}

pub fn count_cycles(points: &TurningPoints, grid: &EpochGrid) -> Vec<EpochSummary> {
    count_cycles_from_times(&points.peak_times, grid)
}

pub fn integer_counts(epochs: &[EpochSummary]) -> Vec<i64> {
    epochs.iter().map(|e| e.integer_count).collect()
}

pub fn write_epochs_csv<W: Write>(epochs: &[EpochSummary], w: &mut W) -> Result<()> {
    writeln!(w, "epoch_index,start,cycle_count,integer_count,rr_bpm")?;
    for e in epochs {
        writeln!(
            w,
            "{},{:.6},{:.6},{},{:.6}",
            e.epoch_index, e.start, e.cycle_count, e.integer_count, e.rr_bpm
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::respiration::{detect_turning_points, DetectionParams};
    use std::f64::consts::PI;

    #[test]
    fn uniform_peaks_on_boundaries() {
        let times: Vec<f64> = (0..=20).map(|k| 3.0 * k as f64).collect();
        let grid = EpochGrid::new(0.0, 30.0, 2).unwrap();
        let e = count_cycles_from_times(&times, &grid);
        assert_eq!(integer_counts(&e), vec![10, 10]);
        assert!((e[0].cycle_count - 10.0).abs() < 1e-12);
        assert!((e[0].rr_bpm - 20.0).abs() < 1e-12);
    }

    #[test]
    fn half_cycle_rounds_up() {
        // Peaks of cos at 0, 4, ..., 28, 32: 7 whole cycles plus half of [28, 32].
        let rate = 60.0;
        let x = UniformSeries::new(
            (0..3600).map(|i| (2.0 * PI * 0.25 * (i as f64 / rate - 10.0)).cos()).collect(),
            rate,
            -10.0,
        )
        .unwrap();
        let tp = detect_turning_points(&x, DetectionParams::default());
        let grid = EpochGrid::new(0.0, 30.0, 1).unwrap();
        let e = count_cycles(&tp, &grid);
        assert!((e[0].cycle_count - 7.5).abs() < 1e-4, "{}", e[0].cycle_count);
        assert_eq!(e[0].integer_count, 8);
    }

    #[test]
    fn overlap_partition_is_exact() {
        let times = [0.7, 4.1, 9.3, 30.2, 33.9, 61.0, 64.4, 88.8];
        let grid = EpochGrid::new(0.0, 30.0, 3).unwrap();
        let total: f64 = count_cycles_from_times(&times, &grid).iter().map(|e| e.cycle_count).sum();
        assert!((total - 7.0).abs() < 1e-9);
    }

    #[test]
    fn grid_for_series() {
        let s = UniformSeries::new(vec![0.0; 18000], 60.0, 2.0).unwrap();
        let g = EpochGrid::for_series(&s, 30.0).unwrap();
        assert_eq!((g.start, g.count), (2.0, 10));
        let s = UniformSeries::new(vec![0.0; 17999], 60.0, 0.0).unwrap();
        assert_eq!(EpochGrid::for_series(&s, 30.0).unwrap().count, 9);
    }

    #[test]
    fn csv_layout() {
        let grid = EpochGrid::new(0.0, 30.0, 1).unwrap();
        let e = count_cycles_from_times(&[0.0, 4.0, 8.0], &grid);
        let mut buf = Vec::new();
        write_epochs_csv(&e, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epoch_index,start,cycle_count,integer_count,rr_bpm\n0,0.000000,2.000000,2,4.000000\n"
        );
    }
}
