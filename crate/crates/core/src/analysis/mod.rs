//! Auxiliary analyses: clustering of segment shapes, score bounds, offsets
//! between change-point sets, and a synthetic cycle generator.

pub mod generator;
pub mod kmeans;
pub mod offsets;
pub mod sensitivity;

pub use generator::{generate_cycle, Anomaly, CycleConfig};
pub use kmeans::{kmeans, kmeans_segments, kmeans_with_restarts, ClusterResult};
pub use offsets::{change_point_offsets, mean_abs_offset};
pub use sensitivity::{sensitivity_bounds, SensitivityReport};
