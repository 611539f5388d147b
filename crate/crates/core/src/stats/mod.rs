//! Numeric summaries behind every chart.

pub mod bins;
pub mod charts;
pub mod summary;

pub use bins::{bin_counts, Bin, BinCounts, BinSpec};
pub use charts::{
    context_summary, dotplot, dumbbell, heatmap, ContextColumn, ContextSummary, DotPlotRow, DotPoint,
    DumbbellCase, DumbbellRow, DumbbellSort, HeatmapCell, HeatmapParams, HeatmapRow,
};
pub use summary::{
    confidence_interval, distribution_summary, kde_curve, ConfidenceInterval, DistributionSummary, KdeCurve,
};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StatsError {
    #[error("value {0} is not a finite non-negative amount")]
    InvalidValue(f64),
    #[error("invalid bin layout: {0}")]
    InvalidBins(String),
    #[error("confidence level {0} must lie strictly between 0 and 1")]
    InvalidLevel(f64),
    #[error("no values to summarize")]
    Empty,
    #[error("a density curve needs at least 2 grid points, got {0}")]
    InvalidGrid(usize),
}
