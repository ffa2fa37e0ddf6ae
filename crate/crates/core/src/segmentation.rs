//! On-line segmentation by a growing window.
//!
//! Each sample is absorbed into the current window and the boundary
//! criteria are consulted. When a criterion fires, the triggering sample
//! becomes the last sample of the closed segment and the next window starts
//! at the following sample.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::shape_space::{check_degree, ShapeVector, SlopeSignMode, TimeSeries, WindowState};

/// Default sign-switch deadband, in slope units of normalised data.
pub const DEFAULT_SSS_DEADBAND: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClosedBy {
    Dpu,
    Sss,
    EndOfStream,
}

impl ClosedBy {
    pub fn as_str(self) -> &'static str {
        match self {
            ClosedBy::Dpu => "DPU",
            ClosedBy::Sss => "SSS",
            ClosedBy::EndOfStream => "END_OF_STREAM",
        }
    }
}

/// What to do with the unfinished window when the stream ends.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailPolicy {
    #[default]
    EmitFlagged,
    Drop,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    pub degree: usize,
    /// Deviation-of-predicted-value threshold, in value units.
    pub th_dpu: Option<f64>,
    /// Slope sign-switch threshold.
    pub th_sss: Option<u32>,
    pub sss_mode: SlopeSignMode,
    pub sss_deadband: f64,
    pub min_segment_len: usize,
    pub tail_policy: TailPolicy,
}

impl SegmentationConfig {
    /// Defaults for `degree` with no thresholds set yet.
    pub fn new(degree: usize) -> Self {
        Self {
            degree,
            th_dpu: None,
            th_sss: None,
            sss_mode: SlopeSignMode::default(),
            sss_deadband: DEFAULT_SSS_DEADBAND,
            min_segment_len: default_min_len(degree),
            tail_policy: TailPolicy::default(),
        }
    }

    pub fn with_dpu(mut self, threshold: f64) -> Self {
        self.th_dpu = Some(threshold);
        self
    }

    pub fn with_sss(mut self, threshold: u32) -> Self {
        self.th_sss = Some(threshold);
        self
    }

    pub fn with_sss_mode(mut self, mode: SlopeSignMode) -> Self {
        self.sss_mode = mode;
        self
    }

    pub fn with_sss_deadband(mut self, deadband: f64) -> Self {
        self.sss_deadband = deadband;
        self
    }

    pub fn with_min_segment_len(mut self, len: usize) -> Self {
        self.min_segment_len = len;
        self
    }

    pub fn with_tail_policy(mut self, policy: TailPolicy) -> Self {
        self.tail_policy = policy;
        self
    }

    /// Checks everything except the presence of a threshold.
    fn validate_window(&self) -> Result<()> {
        check_degree(self.degree)?;
        let floor = default_min_len(self.degree);
        if self.min_segment_len < floor {
            return Err(Error::config(format!(
                "min_segment_len {} is below max(2, degree + 1) = {floor}",
                self.min_segment_len
            )));
        }
        if !(self.sss_deadband >= 0.0 && self.sss_deadband.is_finite()) {
            return Err(Error::config(format!(
                "sss_deadband must be finite and non-negative, got {}",
                self.sss_deadband
            )));
        }
        if self.sss_mode == SlopeSignMode::Alpha1Sign && self.degree == 0 && self.th_sss.is_some() {
            return Err(Error::config(
                "alpha_1 sign switches need degree >= 1".to_string(),
            ));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_window()?;
        if self.th_dpu.is_none() && self.th_sss.is_none() {
            return Err(Error::config(
                "at least one of th_dpu, th_sss must be set".to_string(),
            ));
        }
        if let Some(th) = self.th_dpu {
            if !(th > 0.0 && th.is_finite()) {
                return Err(Error::config(format!(
                    "th_dpu must be positive and finite, got {th}"
                )));
            }
        }
        Ok(())
    }

    fn new_window(&self, start: usize) -> Result<WindowState> {
        let w = WindowState::new(start, self.degree)?;
        // Alpha-1 tracking is meaningless at degree 0; only enable it when
        // the counter is actually consulted or the degree supports it.
        if self.sss_mode == SlopeSignMode::Alpha1Sign && self.degree == 0 {
            return Ok(w);
        }
        w.with_slope_tracking(self.sss_mode, self.sss_deadband)
    }
}

fn default_min_len(degree: usize) -> usize {
    (degree + 1).max(2)
}

/// `|predicted - observed| > threshold`, strictly.
pub fn dpu_triggered(predicted: f64, observed: f64, th_dpu: f64) -> Result<bool> {
    ensure_finite(predicted, "predicted value")?;
    ensure_finite(observed, "observed value")?;
    ensure_finite(th_dpu, "th_dpu")?;
    Ok((predicted - observed).abs() > th_dpu)
}

/// Sign-switch count of the window strictly above `th_sss`. The counting
/// mode and deadband are those the window was configured with.
pub fn sss_triggered(window: &WindowState, th_sss: u32) -> bool {
    window.sign_switches() > th_sss
}

/// What a boundary rule sees after a sample has been absorbed.
pub struct StepContext<'a> {
    /// Global index of the sample just absorbed.
    pub index: usize,
    pub observed: f64,
    pub window: &'a WindowState,
}

/// Decides whether the current window closes at this step.
pub trait BoundaryCriteria {
    fn evaluate(&mut self, step: &StepContext<'_>) -> Result<Option<ClosedBy>>;
}

/// The deviation and sign-switch criteria, combined disjunctively.
#[derive(Clone, Debug)]
pub struct ThresholdCriteria {
    th_dpu: Option<f64>,
    th_sss: Option<u32>,
}

impl ThresholdCriteria {
    pub fn from_config(config: &SegmentationConfig) -> Self {
        Self {
            th_dpu: config.th_dpu,
            th_sss: config.th_sss,
        }
    }
}

impl BoundaryCriteria for ThresholdCriteria {
    fn evaluate(&mut self, step: &StepContext<'_>) -> Result<Option<ClosedBy>> {
        if let (Some(th), Some(predicted)) = (self.th_dpu, step.window.fitted_last()) {
            if dpu_triggered(predicted, step.observed, th)? {
                return Ok(Some(ClosedBy::Dpu));
            }
        }
        if let Some(th) = self.th_sss {
            if sss_triggered(step.window, th) {
                return Ok(Some(ClosedBy::Sss));
            }
        }
        Ok(None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub index: usize,
    /// Inclusive global sample indices.
    pub start: usize,
    pub end: usize,
    pub length: usize,
    pub alpha: ShapeVector,
    pub closed_by: ClosedBy,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segmentation {
    pub segments: Vec<Segment>,
    pub change_points: Vec<usize>,
    /// Number of samples consumed from the stream.
    pub consumed: usize,
}

impl Segmentation {
    /// Change points are the ends of triggered segments that are followed
    /// by at least one more consumed sample.
    pub fn from_segments(segments: Vec<Segment>, consumed: usize) -> Self {
        let change_points = segments
            .iter()
            .filter(|s| s.closed_by != ClosedBy::EndOfStream && s.end + 1 < consumed)
            .map(|s| s.end)
            .collect();
        Self {
            segments,
            change_points,
            consumed,
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Largest degree among the segments' shape vectors.
    pub fn degree(&self) -> Option<usize> {
        self.segments.iter().map(|s| s.alpha.degree()).max()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PushEvent {
    Absorbed,
    SegmentClosed(Segment),
}

/// Streaming segmenter.
#[derive(Debug)]
pub struct Segmenter<C = ThresholdCriteria> {
    config: SegmentationConfig,
    criteria: C,
    window: WindowState,
    consumed: usize,
    emitted: usize,
}

impl Segmenter<ThresholdCriteria> {
    pub fn new(config: SegmentationConfig) -> Result<Self> {
        config.validate()?;
        let criteria = ThresholdCriteria::from_config(&config);
        Self::with_criteria(config, criteria)
    }
}

impl<C: BoundaryCriteria> Segmenter<C> {
    /// Segmenter driven by a custom boundary rule. Thresholds in `config`
    /// are ignored; the remaining settings still apply.
    pub fn with_criteria(config: SegmentationConfig, criteria: C) -> Result<Self> {
        config.validate_window()?;
        let window = config.new_window(0)?;
        Ok(Self {
            config,
            criteria,
            window,
            consumed: 0,
            emitted: 0,
        })
    }

    pub fn config(&self) -> &SegmentationConfig {
        &self.config
    }

    pub fn window(&self) -> &WindowState {
        &self.window
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn push(&mut self, y: f64) -> Result<PushEvent> {
        self.window.grow(y)?;
        let index = self.consumed;
        self.consumed += 1;
        if self.window.count() < self.config.min_segment_len || self.window.alpha().is_none() {
            return Ok(PushEvent::Absorbed);
        }
        let step = StepContext {
            index,
            observed: y,
            window: &self.window,
        };
        match self.criteria.evaluate(&step)? {
            None => Ok(PushEvent::Absorbed),
            Some(reason) => {
                let next = self.config.new_window(self.consumed)?;
                let closed = std::mem::replace(&mut self.window, next);
                Ok(PushEvent::SegmentClosed(self.close(&closed, reason)))
            }
        }
    }

    fn close(&mut self, window: &WindowState, reason: ClosedBy) -> Segment {
        let alpha = window
            .best_effort_alpha()
            .expect("closing window holds at least one sample");
        let start = window.start_index();
        let end = window.end_index().expect("non-empty window");
        let segment = Segment {
            index: self.emitted,
            start,
            end,
            length: end - start + 1,
            alpha,
            closed_by: reason,
        };
        self.emitted += 1;
        segment
    }

    /// End the stream, returning the unfinished window as a flagged tail
    /// segment when the tail policy asks for it.
    pub fn finish(mut self) -> Option<Segment> {
        if self.window.count() == 0 || self.config.tail_policy == TailPolicy::Drop {
            return None;
        }
        let window = self.window.clone();
        Some(self.close(&window, ClosedBy::EndOfStream))
    }

    /// Feed every value and collect the resulting partition.
    pub fn run<I: IntoIterator<Item = f64>>(mut self, values: I) -> Result<Segmentation> {
        let mut segments = Vec::new();
        for y in values {
            if let PushEvent::SegmentClosed(s) = self.push(y)? {
                segments.push(s);
            }
        }
        let consumed = self.consumed;
        segments.extend(self.finish());
        Ok(Segmentation::from_segments(segments, consumed))
    }
}

/// Segment a whole series with the threshold criteria.
pub fn segment_series(series: &TimeSeries, config: &SegmentationConfig) -> Result<Segmentation> {
    config.validate()?;
    segment_series_with(series, config, ThresholdCriteria::from_config(config))
}

/// Segment a whole series with a custom boundary rule.
pub fn segment_series_with<C: BoundaryCriteria>(
    series: &TimeSeries,
    config: &SegmentationConfig,
    criteria: C,
) -> Result<Segmentation> {
    if series.len() < config.degree + 1 {
        return Err(Error::InsufficientData {
            needed: config.degree + 1,
            got: series.len(),
        });
    }
    Segmenter::with_criteria(config.clone(), criteria)?.run(series.values().iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closes the window at fixed global indices.
    struct FixedCuts(Vec<usize>);

    impl BoundaryCriteria for FixedCuts {
        fn evaluate(&mut self, step: &StepContext<'_>) -> Result<Option<ClosedBy>> {
            Ok(self.0.contains(&step.index).then_some(ClosedBy::Dpu))
        }
    }

    fn series(v: Vec<f64>) -> TimeSeries {
        TimeSeries::new(v).unwrap()
    }

    #[test]
    fn dpu_is_strict() {
        assert!(dpu_triggered(1.0, 1.2, 0.05).unwrap());
        assert!(!dpu_triggered(0.7, 0.7, 0.05).unwrap());
        assert!(!dpu_triggered(1.0, 1.5, 0.5).unwrap());
        assert!(dpu_triggered(f64::NAN, 1.0, 0.1).is_err());
    }

    #[test]
    fn stubbed_cuts_give_three_segments() {
        let s = series((0..11).map(|i| i as f64).collect());
        let cfg = SegmentationConfig::new(1);
        let seg = segment_series_with(&s, &cfg, FixedCuts(vec![3, 7])).unwrap();
        let ranges: Vec<_> = seg.segments.iter().map(|s| (s.start, s.end)).collect();
        assert_eq!(ranges, vec![(0, 3), (4, 7), (8, 10)]);
        assert_eq!(seg.change_points, vec![3, 7]);
        assert_eq!(seg.segments[2].closed_by, ClosedBy::EndOfStream);
        let lengths: Vec<_> = seg.segments.iter().map(|s| s.length).collect();
        assert_eq!(lengths, vec![4, 4, 3]);
    }

    #[test]
    fn constant_series_is_one_tail() {
        let s = series(vec![3.0; 40]);
        let cfg = SegmentationConfig::new(2).with_dpu(0.05).with_sss(1);
        let seg = segment_series(&s, &cfg).unwrap();
        assert_eq!(seg.len(), 1);
        assert!(seg.change_points.is_empty());
        assert_eq!(seg.segments[0].closed_by, ClosedBy::EndOfStream);
        assert_eq!((seg.segments[0].start, seg.segments[0].end), (0, 39));
    }

    #[test]
    fn step_is_detected_near_the_jump() {
        let mut v = vec![0.0; 20];
        v.extend(std::iter::repeat_n(10.0, 20));
        let cfg = SegmentationConfig::new(2).with_dpu(0.05);
        let seg = segment_series(&series(v), &cfg).unwrap();
        let first = seg.change_points[0];
        assert!((19..=22).contains(&first), "first change point {first}");
    }

    #[test]
    fn first_difference_switches_close_at_fifth_point() {
        let cfg = SegmentationConfig::new(1)
            .with_sss(2)
            .with_sss_mode(SlopeSignMode::FirstDiffSign)
            .with_sss_deadband(0.0);
        let mut seg = Segmenter::new(cfg).unwrap();
        let events: Vec<_> = [0.0, 1.0, 0.0, 1.0, 0.0]
            .into_iter()
            .map(|y| seg.push(y).unwrap())
            .collect();
        assert!(events[..4].iter().all(|e| *e == PushEvent::Absorbed));
        match &events[4] {
            PushEvent::SegmentClosed(s) => {
                assert_eq!((s.start, s.end), (0, 4));
                assert_eq!(s.closed_by, ClosedBy::Sss);
            }
            other => panic!("expected a closed segment, got {other:?}"),
        }
    }

    #[test]
    fn sinusoid_boundaries_sit_near_extrema() {
        // extrema of sin(2*pi*t/8) fall on t = 2 mod 4
        let v: Vec<f64> = (0..96)
            .map(|t| (std::f64::consts::TAU * t as f64 / 8.0).sin())
            .collect();
        for k in 1..=5 {
            let cfg = SegmentationConfig::new(k).with_sss(1).with_sss_deadband(0.0);
            let seg = segment_series(&series(v.clone()), &cfg).unwrap();
            assert!(seg.change_points.len() >= 5, "K={k}: {:?}", seg.change_points);
            for &cp in &seg.change_points {
                let r = (cp as i64 - 2).rem_euclid(4);
                assert!(r.min(4 - r) <= 1, "K={k}: {cp}");
            }
        }
    }

    #[test]
    fn monotone_never_switches() {
        let v: Vec<f64> = (0..200).map(|i| (i as f64).powf(1.3)).collect();
        for mode in [SlopeSignMode::Alpha1Sign, SlopeSignMode::FirstDiffSign] {
            let cfg = SegmentationConfig::new(3).with_sss(1).with_sss_mode(mode);
            let seg = segment_series(&series(v.clone()), &cfg).unwrap();
            assert_eq!(seg.len(), 1, "{mode:?}");
        }
    }

    #[test]
    fn first_points_are_absorbed() {
        let cfg = SegmentationConfig::new(3).with_dpu(1e-9);
        let mut seg = Segmenter::new(cfg).unwrap();
        for y in [5.0, -3.0, 8.0] {
            assert_eq!(seg.push(y).unwrap(), PushEvent::Absorbed);
        }
    }

    #[test]
    fn single_point_tail_follows_policy() {
        let cfg = SegmentationConfig::new(2).with_dpu(0.1);
        let mut seg = Segmenter::new(cfg.clone()).unwrap();
        seg.push(1.0).unwrap();
        let tail = seg.finish().unwrap();
        assert_eq!(tail.closed_by, ClosedBy::EndOfStream);
        assert_eq!(tail.length, 1);
        assert_eq!(tail.alpha.alpha(), &[1.0]);

        let mut seg = Segmenter::new(cfg.with_tail_policy(TailPolicy::Drop)).unwrap();
        seg.push(1.0).unwrap();
        assert!(seg.finish().is_none());
    }

    #[test]
    fn config_errors() {
        assert!(SegmentationConfig::new(2).validate().is_err());
        assert!(SegmentationConfig::new(2).with_dpu(0.0).validate().is_err());
        assert!(SegmentationConfig::new(2)
            .with_dpu(0.1)
            .with_min_segment_len(2)
            .validate()
            .is_err());
        assert!(SegmentationConfig::new(0).with_sss(1).validate().is_err());
        assert!(SegmentationConfig::new(0)
            .with_sss(1)
            .with_sss_mode(SlopeSignMode::FirstDiffSign)
            .validate()
            .is_ok());
        let short = series(vec![1.0, 2.0]);
        assert!(matches!(
            segment_series(&short, &SegmentationConfig::new(2).with_dpu(0.1)),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn non_finite_push_leaves_state() {
        let mut seg = Segmenter::new(SegmentationConfig::new(1).with_dpu(0.1)).unwrap();
        seg.push(1.0).unwrap();
        assert!(seg.push(f64::INFINITY).is_err());
        assert_eq!(seg.consumed(), 1);
    }

    #[test]
    fn segment_alpha_is_the_trigger_step_fit() {
        let mut v = vec![0.0; 10];
        v.extend([5.0, 5.0, 5.0]);
        let cfg = SegmentationConfig::new(1).with_dpu(0.5);
        let seg = segment_series(&series(v.clone()), &cfg).unwrap();
        let first = &seg.segments[0];
        assert_eq!(first.end, 10);
        let batch = crate::shape_space::fit(&v[..=10], 1).unwrap();
        for (a, b) in first.alpha.alpha().iter().zip(batch.alpha()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
