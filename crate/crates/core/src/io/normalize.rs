use crate::error::{Error, Result};
use crate::shape_space::TimeSeries;

/// Shift to mean 0 and scale to unit population variance (divisor `N`).
pub fn normalize(series: &TimeSeries) -> Result<TimeSeries> {
    let y = series.values();
    if y.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: y.len(),
        });
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let scale = var.sqrt();
    if scale.is_nan() || scale <= mean.abs() * 1e-13 {
        return Err(Error::data("cannot normalize a series with zero variance"));
    }
    TimeSeries::new(y.iter().map(|v| (v - mean) / scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn two_points() {
        assert_eq!(normalize(&ts(&[0.0, 2.0])).unwrap().values(), &[-1.0, 1.0]);
    }

    #[test]
    fn moments() {
        let z = normalize(&ts(&[1.0, 2.0, 3.0])).unwrap();
        let mean = z.values().iter().sum::<f64>() / 3.0;
        let var = z.values().iter().map(|v| v * v).sum::<f64>() / 3.0 - mean * mean;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
        assert!((z.values()[2] - 1.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn idempotent() {
        let z = normalize(&ts(&[3.0, -1.0, 4.0, 1.0, -5.0])).unwrap();
        let zz = normalize(&z).unwrap();
        for (a, b) in z.values().iter().zip(zz.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn degenerate() {
        assert!(
            matches!(normalize(&ts(&[2.0, 2.0, 2.0])), Err(Error::InvalidData(m)) if m.contains("zero variance"))
        );
        assert!(matches!(
            normalize(&ts(&[2.0])),
            Err(Error::InsufficientData { .. })
        ));
    }
}
