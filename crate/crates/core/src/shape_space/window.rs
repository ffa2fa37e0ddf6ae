//! Growing window with per-sample cost independent of its length.
//!
//! The window keeps the power moments `M_j = sum_n y_n n^j` (local index
//! `n`, `j = 0..=K`) in double-double precision. After each new sample it
//! regenerates the monic power coefficients `c[k][j]` for the new `N` and
//! recombines `alpha_k = (sum_j c[k][j] M_j) / ||p_k||^2`. Both steps cost
//! `O(K^2)` regardless of how many samples have been absorbed.

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{ensure_finite, Error, Result};

use super::basis::{fill_power_coeffs, recurrence_b, recurrence_values};
use super::fit::ShapeVector;
use super::{check_degree, MAX_WINDOW_LEN};

/// Which slope the sign-switch counter follows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeSignMode {
    /// Sign of the fitted slope coefficient `alpha_1` at each step.
    #[default]
    Alpha1Sign,
    /// Sign of the raw first difference `y_t - y_{t-1}`.
    FirstDiffSign,
}

#[derive(Clone, Debug)]
struct SlopeSignTracker {
    mode: SlopeSignMode,
    deadband: f64,
    last_sign: i8,
    switches: u32,
}

impl SlopeSignTracker {
    fn observe(&mut self, slope: f64) {
        let sign = if slope > self.deadband {
            1
        } else if slope < -self.deadband {
            -1
        } else {
            // inside the deadband: neither confirms nor breaks the sign
            return;
        };
        if self.last_sign != 0 && sign != self.last_sign {
            self.switches += 1;
        }
        self.last_sign = sign;
    }
}

/// State of a growing window (single owner, not shared across threads).
#[derive(Clone, Debug)]
pub struct WindowState {
    start_index: usize,
    degree: usize,
    count: usize,
    moments: Vec<Dd>,
    coeffs: Vec<Dd>,
    alpha: Vec<f64>,
    last_value: Option<f64>,
    tracker: SlopeSignTracker,
    #[cfg(test)]
    raw: Vec<f64>,
}

impl WindowState {
    /// Empty window whose first sample will have global index `start_index`.
    pub fn new(start_index: usize, degree: usize) -> Result<Self> {
        check_degree(degree)?;
        let stride = degree + 1;
        Ok(Self {
            start_index,
            degree,
            count: 0,
            moments: vec![Dd::ZERO; stride],
            coeffs: vec![Dd::ZERO; stride * stride],
            alpha: Vec::with_capacity(stride),
            last_value: None,
            tracker: SlopeSignTracker {
                mode: SlopeSignMode::default(),
                deadband: 0.0,
                last_sign: 0,
                switches: 0,
            },
            #[cfg(test)]
            raw: Vec::new(),
        })
    }

    /// Configure the slope sign-switch counter. `deadband` is the magnitude
    /// below which a slope counts as neither positive nor negative.
    pub fn with_slope_tracking(mut self, mode: SlopeSignMode, deadband: f64) -> Result<Self> {
        if !(deadband >= 0.0 && deadband.is_finite()) {
            return Err(Error::config(format!(
                "sign-switch deadband must be finite and non-negative, got {deadband}"
            )));
        }
        if mode == SlopeSignMode::Alpha1Sign && self.degree == 0 {
            return Err(Error::config(
                "alpha_1 sign tracking needs degree >= 1".to_string(),
            ));
        }
        self.tracker.mode = mode;
        self.tracker.deadband = deadband;
        Ok(self)
    }

    /// Absorb the next sample.
    pub fn grow(&mut self, y: f64) -> Result<()> {
        ensure_finite(y, "observation")?;
        if self.count >= MAX_WINDOW_LEN {
            return Err(Error::data(format!(
                "window exceeds the supported length of {MAX_WINDOW_LEN} samples"
            )));
        }
        let n = self.count as f64;
        let yd = Dd::from_f64(y);
        let nd = Dd::from_f64(n);
        let mut power = Dd::ONE;
        for (j, m) in self.moments.iter_mut().enumerate() {
            if j > 0 {
                power = power * nd;
            }
            *m = *m + yd * power;
        }
        self.count += 1;
        #[cfg(test)]
        self.raw.push(y);

        if self.tracker.mode == SlopeSignMode::FirstDiffSign {
            if let Some(prev) = self.last_value {
                self.tracker.observe(y - prev);
            }
        }
        self.last_value = Some(y);

        if self.count > self.degree {
            self.refresh_alpha();
            if self.tracker.mode == SlopeSignMode::Alpha1Sign && self.degree >= 1 {
                self.tracker.observe(self.alpha[1]);
            }
        }
        Ok(())
    }

    fn refresh_alpha(&mut self) {
        let last_index = self.count - 1;
        let stride = self.degree + 1;
        fill_power_coeffs(last_index, self.degree, &mut self.coeffs);
        self.alpha.clear();
        let mut norm = Dd::from_f64(self.count as f64);
        for k in 0..=self.degree {
            if k > 0 {
                norm = norm * recurrence_b::<Dd>(k, last_index);
            }
            let row = &self.coeffs[k * stride..=k * stride + k];
            let inner = row
                .iter()
                .zip(&self.moments)
                .fold(Dd::ZERO, |acc, (&c, &m)| acc + c * m);
            self.alpha.push((inner / norm).to_f64());
        }
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Samples absorbed so far.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Global index of the most recently absorbed sample.
    pub fn end_index(&self) -> Option<usize> {
        (self.count > 0).then(|| self.start_index + self.count - 1)
    }

    pub fn last_value(&self) -> Option<f64> {
        self.last_value
    }

    /// Current coefficients, available once `count >= degree + 1`.
    pub fn alpha(&self) -> Option<&[f64]> {
        (self.count > self.degree).then_some(self.alpha.as_slice())
    }

    pub fn current_alpha(&self) -> Option<ShapeVector> {
        self.alpha()
            .map(|a| ShapeVector::from_parts(a.to_vec(), self.count - 1))
    }

    /// Fitted polynomial evaluated at the newest sample's local index.
    pub fn fitted_last(&self) -> Option<f64> {
        let alpha = self.alpha()?;
        let last_index = self.count - 1;
        let mut p = [0.0; super::MAX_DEGREE + 1];
        let p = &mut p[..alpha.len()];
        recurrence_values(last_index, last_index as f64, p);
        Some(alpha.iter().zip(p.iter()).map(|(a, p)| a * p).sum())
    }

    /// Best fit available for the absorbed samples, lowering the degree when
    /// fewer than `degree + 1` samples are present.
    pub fn best_effort_alpha(&self) -> Option<ShapeVector> {
        if self.count == 0 {
            return None;
        }
        if let Some(sv) = self.current_alpha() {
            return Some(sv);
        }
        let mut reduced = WindowState::new(self.start_index, self.count - 1).ok()?;
        // Rebuild from moments: the lower moments are shared with this window.
        reduced.moments.copy_from_slice(&self.moments[..self.count]);
        reduced.count = self.count;
        reduced.refresh_alpha();
        reduced.current_alpha()
    }

    pub fn sign_switches(&self) -> u32 {
        self.tracker.switches
    }

    /// Last non-zero slope sign observed (`-1`, `0` before any, `+1`).
    pub fn slope_sign(&self) -> i8 {
        self.tracker.last_sign
    }

    pub fn slope_mode(&self) -> SlopeSignMode {
        self.tracker.mode
    }

    #[cfg(test)]
    pub(crate) fn moments_f64(&self) -> Vec<f64> {
        self.moments.iter().map(|m| m.to_f64()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape_space::fit;

    fn grown(values: &[f64], degree: usize) -> WindowState {
        let mut w = WindowState::new(0, degree).unwrap();
        for &v in values {
            w.grow(v).unwrap();
        }
        w
    }

    #[test]
    fn reference_window_incremental() {
        let w = grown(&[3.0, 5.0, 8.0, 6.0, 8.0, 9.0, 10.4, 12.0, 12.2], 2);
        let a = w.alpha().unwrap();
        assert!((a[0] - 8.18).abs() <= 0.01);
        assert!((a[1] - 1.09).abs() <= 0.01);
        assert!((a[2] + 0.02).abs() <= 0.01);
    }

    #[test]
    fn constant_stream_keeps_only_average() {
        let mut w = WindowState::new(5, 3).unwrap();
        for i in 0..50 {
            w.grow(-1.75).unwrap();
            if i >= 3 {
                let a = w.alpha().unwrap();
                assert!((a[0] + 1.75).abs() < 1e-14);
                assert!(a[1..].iter().all(|x| x.abs() < 1e-12), "{a:?}");
            } else {
                assert!(w.alpha().is_none());
            }
        }
        assert_eq!(w.end_index(), Some(54));
    }

    #[test]
    fn moments_match_raw_values() {
        let vals: Vec<f64> = (0..300).map(|i| ((i * 37) % 23) as f64 - 11.5).collect();
        let w = grown(&vals, 4);
        let m = w.moments_f64();
        for (j, mj) in m.iter().enumerate() {
            let direct: f64 = w
                .raw
                .iter()
                .enumerate()
                .map(|(n, y)| y * (n as f64).powi(j as i32))
                .sum();
            assert!(
                (mj - direct).abs() <= 1e-12 * direct.abs().max(1.0),
                "j={j}"
            );
        }
    }

    #[test]
    fn matches_batch_fit_at_each_step() {
        let vals: Vec<f64> = (0..200)
            .map(|i| (i as f64 * 0.37).sin() * 3.0 + 0.01 * i as f64)
            .collect();
        let mut w = WindowState::new(0, 5).unwrap();
        for (i, &v) in vals.iter().enumerate() {
            w.grow(v).unwrap();
            if i >= 5 {
                let batch = fit(&vals[..=i], 5).unwrap();
                for (a, b) in w.alpha().unwrap().iter().zip(batch.alpha()) {
                    assert!(
                        (a - b).abs() <= 1e-9 * b.abs().max(1e-6),
                        "{a} vs {b} at {i}"
                    );
                }
            }
        }
    }

    #[test]
    fn first_difference_switches() {
        let mut w = WindowState::new(0, 1)
            .unwrap()
            .with_slope_tracking(SlopeSignMode::FirstDiffSign, 0.0)
            .unwrap();
        let mut counts = vec![];
        for v in [0.0, 1.0, 0.0, 1.0, 0.0] {
            w.grow(v).unwrap();
            counts.push(w.sign_switches());
        }
        assert_eq!(counts, vec![0, 0, 1, 2, 3]);
    }

    #[test]
    fn deadband_neither_matches_nor_breaks() {
        let mut w = WindowState::new(0, 1)
            .unwrap()
            .with_slope_tracking(SlopeSignMode::FirstDiffSign, 0.5)
            .unwrap();
        // diffs: +1, +0.1 (dead), -0.1 (dead), +1 → no switch
        for v in [0.0, 1.0, 1.1, 1.0, 2.0] {
            w.grow(v).unwrap();
        }
        assert_eq!(w.sign_switches(), 0);
        assert_eq!(w.slope_sign(), 1);
    }

    #[test]
    fn alpha1_tracking_requires_slope() {
        let w = WindowState::new(0, 0).unwrap();
        assert!(w
            .with_slope_tracking(SlopeSignMode::Alpha1Sign, 0.01)
            .is_err());
        let w = WindowState::new(0, 2).unwrap();
        assert!(w
            .with_slope_tracking(SlopeSignMode::Alpha1Sign, -1.0)
            .is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let mut w = WindowState::new(0, 1).unwrap();
        assert!(matches!(w.grow(f64::NAN), Err(Error::InvalidData(_))));
        assert_eq!(w.count(), 0);
    }

    #[test]
    fn best_effort_reduces_degree() {
        let w = grown(&[4.0, 6.0], 3);
        assert!(w.current_alpha().is_none());
        let sv = w.best_effort_alpha().unwrap();
        assert_eq!(sv.degree(), 1);
        assert!((sv.average() - 5.0).abs() < 1e-15);
        assert!((sv.slope().unwrap() - 2.0).abs() < 1e-15);
        let single = grown(&[4.0], 3).best_effort_alpha().unwrap();
        assert_eq!(single.alpha(), &[4.0]);
    }
}
