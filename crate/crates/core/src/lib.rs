//! Streaming change-point detection on orthogonal-polynomial shape vectors,
//! with fuzzy-rule scoring of the resulting segments.
//!
//! ```
//! use fcpd_core::segmentation::{segment_series, SegmentationConfig};
//! use fcpd_core::shape_space::TimeSeries;
//!
//! let mut y = vec![0.0; 20];
//! y.extend(vec![5.0; 20]);
//! let series = TimeSeries::new(y).unwrap();
//! let config = SegmentationConfig::new(1).with_dpu(1.0);
//! let seg = segment_series(&series, &config).unwrap();
//! assert!(seg.len() >= 2);
//! ```

mod dd;

pub mod analysis;
pub mod dsl;
pub mod error;
pub mod features;
pub mod fuzzy;
pub mod io;
pub mod segmentation;
pub mod shape_space;

pub use error::{Error, Result};
