use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{extract, Feature, DEFAULT_DELAY, DEFAULT_EPSILON};
use crate::fuzzy::FisConfig;
use crate::segmentation::{segment_series, Segment, Segmentation, SegmentationConfig};
use crate::shape_space::TimeSeries;

use super::normalize;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub segmentation: SegmentationConfig,
    pub normalize: bool,
    /// Delay used by the `var_*` feature aliases.
    pub delay: usize,
    pub epsilon: f64,
}

impl RunConfig {
    pub fn new(segmentation: SegmentationConfig) -> Self {
        Self {
            segmentation,
            normalize: false,
            delay: DEFAULT_DELAY,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn with_normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn with_delay(mut self, delay: usize) -> Self {
        self.delay = delay;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScoredSegment {
    pub segment: Segment,
    pub score: f64,
    /// No rule fired for this segment.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedSegment {
    pub index: usize,
    pub missing: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryReport {
    pub segmentation: Segmentation,
    /// Scored segments, best first; ties in score keep index order.
    pub ranked: Vec<ScoredSegment>,
    pub skipped: Vec<SkippedSegment>,
}

/// Optionally normalize, then segment.
pub fn run_segmentation(series: &TimeSeries, config: &RunConfig) -> Result<Segmentation> {
    if config.normalize {
        segment_series(&normalize(series)?, &config.segmentation)
    } else {
        segment_series(series, &config.segmentation)
    }
}

/// Segment a series and score every segment with `fis`.
///
/// Segments lacking a feature the rules need are reported in `skipped`.
/// A rule input that is not a feature name fails with
/// [`Error::MissingFeature`] before any work is done.
pub fn run_query(series: &TimeSeries, config: &RunConfig, fis: &FisConfig) -> Result<QueryReport> {
    let names: Vec<&str> = fis.referenced_inputs().collect();
    for name in &names {
        match Feature::parse(name, config.delay) {
            Some(Feature::Alpha(k) | Feature::VarAlpha { k, .. })
                if k > config.segmentation.degree =>
            {
                return Err(Error::MissingFeature(format!(
                    "{name} (coefficient {k} exceeds degree {})",
                    config.segmentation.degree
                )));
            }
            Some(_) => {}
            None => return Err(Error::MissingFeature(name.to_string())),
        }
    }
    config.segmentation.validate()?;
    let segmentation = run_segmentation(series, config)?;
    score_segmentation(segmentation, &names, config, fis)
}

fn score_segmentation(
    segmentation: Segmentation,
    names: &[&str],
    config: &RunConfig,
    fis: &FisConfig,
) -> Result<QueryReport> {
    let mut ranked = Vec::new();
    let mut skipped = Vec::new();
    let records = extract(&segmentation.segments, names, config.delay, config.epsilon)?;
    for (seg, rec) in segmentation.segments.iter().zip(records) {
        let missing: Vec<String> = rec.missing().into_iter().map(String::from).collect();
        if !missing.is_empty() {
            skipped.push(SkippedSegment {
                index: seg.index,
                missing,
            });
            continue;
        }
        let inf = fis.infer(&rec)?;
        ranked.push(ScoredSegment {
            segment: seg.clone(),
            score: inf.score,
            degenerate: inf.degenerate,
        });
    }
    ranked.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.segment.index.cmp(&b.segment.index))
    });
    Ok(QueryReport {
        segmentation,
        ranked,
        skipped,
    })
}
