use serde::Serialize;

use crate::error::{Error, Result};

/// Number of best and worst scores averaged into the bounds.
pub const BOUND_WIDTH: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SensitivityReport {
    /// Mean of the best three scores.
    pub mean_upper: f64,
    /// Mean of the worst three scores.
    pub mean_lower: f64,
    pub mean_segment_count: f64,
    /// Number of series averaged into this report.
    pub series: usize,
}

/// Bounds for the scores of one series. With fewer than three scores,
/// whatever exists is averaged. The segment count defaults to the number
/// of scores; see [`SensitivityReport::with_segment_count`].
pub fn sensitivity_bounds(scores: &[f64]) -> Result<SensitivityReport> {
    if scores.is_empty() {
        return Err(Error::data("sensitivity bounds need at least one score"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::data("scores must be finite"));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let w = BOUND_WIDTH.min(sorted.len());
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    Ok(SensitivityReport {
        mean_upper: mean(&sorted[sorted.len() - w..]),
        mean_lower: mean(&sorted[..w]),
        mean_segment_count: scores.len() as f64,
        series: 1,
    })
}

impl SensitivityReport {
    pub fn with_segment_count(mut self, count: usize) -> Self {
        self.mean_segment_count = count as f64;
        self
    }

    /// Average per-series reports, weighting each series equally.
    pub fn combine(reports: &[SensitivityReport]) -> Result<SensitivityReport> {
        let total: usize = reports.iter().map(|r| r.series).sum();
        if total == 0 {
            return Err(Error::data("no reports to combine"));
        }
        let avg = |f: fn(&SensitivityReport) -> f64| {
            reports.iter().map(|r| f(r) * r.series as f64).sum::<f64>() / total as f64
        };
        Ok(SensitivityReport {
            mean_upper: avg(|r| r.mean_upper),
            mean_lower: avg(|r| r.mean_lower),
            mean_segment_count: avg(|r| r.mean_segment_count),
            series: total,
        })
    }
}
