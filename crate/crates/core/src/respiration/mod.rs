//! Respiratory cycle detection on a single waveform and per-epoch rates.
//!
//! A cycle runs from one peak to the next. Epoch counts are fractional
//! (a cycle straddling a boundary is split by time) and rounded half up for
//! integer comparisons.

mod epochs;
mod turning;

pub use epochs::{
    count_cycles, count_cycles_from_times, integer_counts, round_half_up, write_epochs_csv,
    EpochGrid, EpochSummary, DEFAULT_EPOCH, ROUND_TOLERANCE,
};
pub use turning::{detect_turning_points, percentile, DetectionParams, PointKind, TurningPoints};
