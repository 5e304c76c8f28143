//! Alignment of recovered and reference signals, agreement metrics and
//! table-style reports.

mod align;
mod metrics;
mod report;

pub use align::{align, Alignment, MIN_ALIGN_OVERLAP};
pub use metrics::{
    epoch_error_stats, mad_rr, pearson, windowed_mean_correlation, EpochErrorStats,
    WindowedCorrelation,
};
pub use report::{
    build_report, EvaluationReport, Overall, ReportSet, Table, TableMetric, TableRow,
    REPORT_VERSION,
};

/// Seconds.
pub const DEFAULT_MAX_LAG: f64 = 10.0;
/// Seconds.
pub const DEFAULT_EVAL_WINDOW: f64 = 10.0;
