//! Per-segment features fed to the fuzzy system.
//!
//! Canonical names are `alpha_k`, `var_alpha_k_d`, `size` and `var_size_d`.
//! Rule files may also use the aliases `average`, `slope` and `curvature`
//! (for `alpha_0..2`) and `var_average`, `var_slope`, `var_curvature`
//! (variations at the configured delay).
//!
//! A variation `(x[t] - x[t-d]) / x[t-d]` is attached to segment `t`, so a
//! record never looks ahead. It is missing for the first `d` segments and
//! wherever `|x[t-d]| < epsilon`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fuzzy::InputSource;
use crate::segmentation::Segment;

pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const DEFAULT_DELAY: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Alpha(usize),
    VarAlpha { k: usize, delay: usize },
    Size,
    VarSize { delay: usize },
}

impl Feature {
    /// Resolve a canonical name or alias. `delay` applies to the `var_*`
    /// aliases only.
    pub fn parse(name: &str, delay: usize) -> Option<Feature> {
        let f = match name {
            "average" => Feature::Alpha(0),
            "slope" => Feature::Alpha(1),
            "curvature" => Feature::Alpha(2),
            "var_average" => Feature::VarAlpha { k: 0, delay },
            "var_slope" => Feature::VarAlpha { k: 1, delay },
            "var_curvature" => Feature::VarAlpha { k: 2, delay },
            "size" => Feature::Size,
            _ => {
                if let Some(rest) = name.strip_prefix("var_alpha_") {
                    let (k, d) = rest.split_once('_')?;
                    Feature::VarAlpha {
                        k: parse_index(k)?,
                        delay: parse_index(d)?,
                    }
                } else if let Some(k) = name.strip_prefix("alpha_") {
                    Feature::Alpha(parse_index(k)?)
                } else {
                    Feature::VarSize {
                        delay: parse_index(name.strip_prefix("var_size_")?)?,
                    }
                }
            }
        };
        match f {
            Feature::VarAlpha { delay: 0, .. } | Feature::VarSize { delay: 0 } => None,
            f => Some(f),
        }
    }
}

fn parse_index(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0'))
    {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Alpha(k) => write!(f, "alpha_{k}"),
            Feature::VarAlpha { k, delay } => write!(f, "var_alpha_{k}_{delay}"),
            Feature::Size => f.write_str("size"),
            Feature::VarSize { delay } => write!(f, "var_size_{delay}"),
        }
    }
}

/// Feature values for one segment, keyed by the name they were requested
/// under. `None` marks a missing value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureRecord {
    pub segment_index: usize,
    pub values: BTreeMap<String, Option<f64>>,
}

impl FeatureRecord {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied().flatten()
    }

    /// Names whose value is missing.
    pub fn missing(&self) -> Vec<&str> {
        self.values
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.values.values().all(Option::is_some)
    }
}

impl InputSource for FeatureRecord {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name)
    }
}

fn check_delay(delay: usize) -> Result<()> {
    if delay == 0 {
        return Err(Error::config("variation delay must be at least 1"));
    }
    Ok(())
}

fn variation(seq: &[Option<f64>], delay: usize, epsilon: f64) -> Vec<Option<f64>> {
    (0..seq.len())
        .map(|t| {
            let prev = seq[t.checked_sub(delay)?]?;
            if prev.abs() < epsilon {
                None
            } else {
                Some((seq[t]? - prev) / prev)
            }
        })
        .collect()
}

/// Coefficient `k` per segment, `None` where the segment was fitted at a
/// lower degree.
fn coefficient_column(segments: &[Segment], k: usize) -> Vec<Option<f64>> {
    segments.iter().map(|s| s.alpha.coefficient(k)).collect()
}

/// `alpha[k]` of every segment.
pub fn coefficient_feature(segments: &[Segment], k: usize) -> Result<Vec<f64>> {
    segments
        .iter()
        .map(|s| {
            s.alpha.coefficient(k).ok_or_else(|| {
                Error::config(format!(
                    "coefficient {k} requested but segment {} has degree {}",
                    s.index,
                    s.alpha.degree()
                ))
            })
        })
        .collect()
}

pub fn variation_feature(
    segments: &[Segment],
    k: usize,
    delay: usize,
    epsilon: f64,
) -> Result<Vec<Option<f64>>> {
    check_delay(delay)?;
    let col: Vec<Option<f64>> = coefficient_feature(segments, k)?
        .into_iter()
        .map(Some)
        .collect();
    Ok(variation(&col, delay, epsilon))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeFeatures {
    pub size: Vec<f64>,
    pub var_size: Vec<Option<f64>>,
}

pub fn size_features(segments: &[Segment], delay: usize) -> Result<SizeFeatures> {
    check_delay(delay)?;
    let size: Vec<f64> = segments.iter().map(|s| s.length as f64).collect();
    // sizes are at least 1, so the guard never fires
    let wrapped: Vec<Option<f64>> = size.iter().copied().map(Some).collect();
    let var_size = variation(&wrapped, delay, 0.5);
    Ok(SizeFeatures { size, var_size })
}

/// Build one record per segment holding the requested features.
///
/// Unknown names give [`Error::MissingFeature`]. Coefficients above a
/// segment's degree are recorded as missing.
pub fn extract(
    segments: &[Segment],
    names: &[&str],
    delay: usize,
    epsilon: f64,
) -> Result<Vec<FeatureRecord>> {
    check_delay(delay)?;
    let mut columns: Vec<(String, Vec<Option<f64>>)> = Vec::with_capacity(names.len());
    for &name in names {
        let feature =
            Feature::parse(name, delay).ok_or_else(|| Error::MissingFeature(name.to_string()))?;
        let col = match feature {
            Feature::Alpha(k) => coefficient_column(segments, k),
            Feature::VarAlpha { k, delay } => {
                variation(&coefficient_column(segments, k), delay, epsilon)
            }
            Feature::Size => size_features(segments, 1)?
                .size
                .into_iter()
                .map(Some)
                .collect(),
            Feature::VarSize { delay } => size_features(segments, delay)?.var_size,
        };
        columns.push((name.to_string(), col));
    }
    Ok(segments
        .iter()
        .enumerate()
        .map(|(i, s)| FeatureRecord {
            segment_index: s.index,
            values: columns.iter().map(|(n, c)| (n.clone(), c[i])).collect(),
        })
        .collect())
}
