//! Ingestion, normalization, the end-to-end query pipeline and exporters.

mod export;
mod ingest;
mod normalize;
mod pipeline;

pub use export::{ranked_rows, segment_rows, write_plot_data, write_table, Format, TableRow};
pub use ingest::{ingest, ingest_path};
pub use normalize::normalize;
pub use pipeline::{
    run_query, run_segmentation, QueryReport, RunConfig, ScoredSegment, SkippedSegment,
};
