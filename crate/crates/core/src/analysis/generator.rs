use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape_space::TimeSeries;

pub const DEFAULT_LENGTH: usize = 2000;
pub const DEFAULT_PERIOD: f64 = 200.0;

/// A disturbance over the inclusive sample range `start..=end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Anomaly {
    /// `y += sigma * u`
    AdditiveNoise {
        start: usize,
        end: usize,
        sigma: f64,
    },
    /// `y = level + scale * u`
    Replace {
        start: usize,
        end: usize,
        level: f64,
        scale: f64,
    },
}

impl Anomaly {
    pub fn range(&self) -> (usize, usize) {
        match *self {
            Anomaly::AdditiveNoise { start, end, .. } | Anomaly::Replace { start, end, .. } => {
                (start, end)
            }
        }
    }

    /// Noise on `[500, 600]` and a replaced level on `[1400, 1600]`.
    pub fn default_pair() -> Vec<Anomaly> {
        vec![
            Anomaly::AdditiveNoise {
                start: 500,
                end: 600,
                sigma: 1.0,
            },
            Anomaly::Replace {
                start: 1400,
                end: 1600,
                level: 0.5,
                scale: 0.5,
            },
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleConfig {
    pub length: usize,
    /// Samples per cycle.
    pub period: f64,
    pub seed: u64,
    pub anomalies: Vec<Anomaly>,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            length: DEFAULT_LENGTH,
            period: DEFAULT_PERIOD,
            seed: 0,
            anomalies: Anomaly::default_pair(),
        }
    }
}

/// Zero-mean, unit-variance sinusoid `sqrt(2) sin(2 pi t / period)` with
/// the configured anomalies applied in order.
pub fn generate_cycle(config: &CycleConfig) -> Result<TimeSeries> {
    if config.length == 0 {
        return Err(Error::config("series length must be positive"));
    }
    if !(config.period.is_finite() && config.period > 0.0) {
        return Err(Error::config(format!(
            "period must be positive, got {}",
            config.period
        )));
    }
    for a in &config.anomalies {
        let (start, end) = a.range();
        if start > end || end >= config.length {
            return Err(Error::config(format!(
                "anomaly interval [{start}, {end}] is outside [0, {})",
                config.length
            )));
        }
        let finite = match *a {
            Anomaly::AdditiveNoise { sigma, .. } => sigma.is_finite(),
            Anomaly::Replace { level, scale, .. } => level.is_finite() && scale.is_finite(),
        };
        if !finite {
            return Err(Error::config("anomaly parameters must be finite"));
        }
    }
    let w = std::f64::consts::TAU / config.period;
    let mut y: Vec<f64> = (0..config.length)
        .map(|t| std::f64::consts::SQRT_2 * (w * t as f64).sin())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for a in &config.anomalies {
        let (start, end) = a.range();
        for v in &mut y[start..=end] {
            let u: f64 = StandardNormal.sample(&mut rng);
            match *a {
                Anomaly::AdditiveNoise { sigma, .. } => *v += sigma * u,
                Anomaly::Replace { level, scale, .. } => *v = level + scale * u,
            }
        }
    }
    TimeSeries::new(y)
}
