//! Shape-space representation of a window of equidistant samples.
//!
//! A window `y_0..y_N` is projected onto the monic discrete Chebyshev
//! polynomials `p_0..p_K` (orthogonal over the sample indices `0..=N`).
//! The projection coefficients `alpha_k` estimate the average, slope,
//! curvature, ... of the window. [`WindowState`] maintains the same
//! coefficients incrementally as samples are appended.

mod basis;
mod fit;
mod window;

pub use basis::{build_basis, squared_norm, OrthoBasis};
pub use fit::{evaluate, fit, ShapeVector};
pub use window::{SlopeSignMode, WindowState};

use crate::error::{Error, Result};

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 10;

/// Longest window (in samples) the incremental updater accepts.
pub const MAX_WINDOW_LEN: usize = 100_000;

/// Equidistant real observations indexed by sample number.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::data("time series is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!(
                "value at index {i} is not finite ({})",
                values[i]
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

impl TryFrom<Vec<f64>> for TimeSeries {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        TimeSeries::new(values)
    }
}

pub(crate) fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        return Err(Error::config(format!(
            "degree {degree} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(
            TimeSeries::new(vec![]),
            Err(Error::InvalidData(_))
        ));
        assert!(matches!(
            TimeSeries::new(vec![1.0, f64::NAN]),
            Err(Error::InvalidData(_))
        ));
        assert!(matches!(
            TimeSeries::new(vec![f64::INFINITY]),
            Err(Error::InvalidData(_))
        ));
        assert_eq!(TimeSeries::new(vec![1.0]).unwrap().len(), 1);
    }
}
