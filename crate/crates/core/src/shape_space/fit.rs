use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};

use super::basis::{recurrence_values, squared_norm, OrthoBasis};
use super::check_degree;

/// Projection coefficients of a window onto the monic Chebyshev basis.
///
/// `alpha[0]` is the window mean, `alpha[1]` the least-squares slope (value
/// units per sample), `alpha[2]` the curvature estimator, and so on.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShapeVector {
    alpha: Vec<f64>,
    last_index: usize,
}

impl ShapeVector {
    /// Wrap precomputed coefficients of a window `0..=last_index`.
    pub fn from_parts(alpha: Vec<f64>, last_index: usize) -> Self {
        debug_assert!(alpha.len() <= last_index + 1);
        Self { alpha, last_index }
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn coefficient(&self, k: usize) -> Option<f64> {
        self.alpha.get(k).copied()
    }

    pub fn degree(&self) -> usize {
        self.alpha.len() - 1
    }

    /// `N`, the index of the last sample of the fitted window.
    pub fn last_index(&self) -> usize {
        self.last_index
    }

    /// Number of samples in the fitted window.
    pub fn len(&self) -> usize {
        self.last_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn average(&self) -> f64 {
        self.alpha[0]
    }

    pub fn slope(&self) -> Option<f64> {
        self.coefficient(1)
    }

    pub fn curvature(&self) -> Option<f64> {
        self.coefficient(2)
    }

    /// Value of the fitted polynomial at window-local index `x`.
    pub fn value_at(&self, x: f64) -> f64 {
        let mut p = [0.0; super::MAX_DEGREE + 1];
        let p = &mut p[..self.alpha.len()];
        recurrence_values(self.last_index, x, p);
        self.alpha.iter().zip(p.iter()).map(|(a, p)| a * p).sum()
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.c
    }
}

/// Batch least-squares fit: `alpha_k = <y, p_k> / ||p_k||^2`.
pub fn fit(window: &[f64], degree: usize) -> Result<ShapeVector> {
    check_degree(degree)?;
    if window.len() < degree + 1 {
        return Err(Error::InsufficientData {
            needed: degree + 1,
            got: window.len(),
        });
    }
    for (i, &y) in window.iter().enumerate() {
        ensure_finite(y, &format!("window value {i}"))?;
    }
    let last_index = window.len() - 1;
    let mut sums = vec![CompensatedSum::default(); degree + 1];
    let mut p = vec![0.0; degree + 1];
    for (n, &y) in window.iter().enumerate() {
        recurrence_values(last_index, n as f64, &mut p);
        for (s, pk) in sums.iter_mut().zip(&p) {
            s.add(y * pk);
        }
    }
    let alpha = sums
        .into_iter()
        .enumerate()
        .map(|(k, s)| Ok(s.value() / squared_norm(k, last_index)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShapeVector::from_parts(alpha, last_index))
}

/// `sum_k alpha_k p_k(x)` for a shape vector and a basis of the same shape.
pub fn evaluate(alpha: &ShapeVector, basis: &OrthoBasis, x: f64) -> Result<f64> {
    if alpha.last_index() != basis.last_index() || alpha.degree() != basis.degree() {
        return Err(Error::config(format!(
            "shape vector (N={}, K={}) does not match basis (N={}, K={})",
            alpha.last_index(),
            alpha.degree(),
            basis.last_index(),
            basis.degree()
        )));
    }
    let p = basis.values_at(x);
    Ok(alpha.alpha().iter().zip(&p).map(|(a, p)| a * p).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape_space::build_basis;

    const FIG1: [f64; 9] = [3.0, 5.0, 8.0, 6.0, 8.0, 9.0, 10.4, 12.0, 12.2];

    #[test]
    fn reference_window_coefficients() {
        let sv = fit(&FIG1, 2).unwrap();
        let a = sv.alpha();
        assert!((a[0] - 8.18).abs() <= 0.01);
        assert!((a[1] - 1.09).abs() <= 0.01);
        assert!((a[2] + 0.02).abs() <= 0.01);
        let basis = build_basis(8, 2).unwrap();
        let p8 = evaluate(&sv, &basis, 8.0).unwrap();
        assert!((p8 - 12.37).abs() <= 0.01);
    }

    #[test]
    fn constant_window_has_only_average() {
        for k in 0..=4 {
            let sv = fit(&[2.5; 7], k).unwrap();
            assert!((sv.average() - 2.5).abs() < 1e-15);
            for &a in &sv.alpha()[1..] {
                assert!(a.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn line_is_fitted_exactly() {
        let sv = fit(&[0.0, 1.0, 2.0, 3.0, 4.0], 1).unwrap();
        assert_eq!(sv.alpha(), &[2.0, 1.0]);
        let basis = build_basis(4, 1).unwrap();
        assert_eq!(evaluate(&sv, &basis, 3.0).unwrap(), 3.0);
        assert_eq!(sv.value_at(3.0), 3.0);
    }

    #[test]
    fn too_short_window() {
        assert!(matches!(
            fit(&[1.0, 2.0], 2),
            Err(Error::InsufficientData { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn non_finite_window() {
        assert!(matches!(
            fit(&[1.0, f64::NAN, 2.0], 1),
            Err(Error::InvalidData(_))
        ));
    }

    #[test]
    fn evaluate_rejects_mismatched_basis() {
        let sv = fit(&FIG1, 2).unwrap();
        let basis = build_basis(8, 1).unwrap();
        assert!(matches!(
            evaluate(&sv, &basis, 0.0),
            Err(Error::InvalidConfig(_))
        ));
        let basis = build_basis(9, 2).unwrap();
        assert!(matches!(
            evaluate(&sv, &basis, 0.0),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn fit_is_least_squares_optimal() {
        // Perturbing any coefficient can only increase the residual sum.
        let sv = fit(&FIG1, 2).unwrap();
        let sse = |alpha: &[f64]| -> f64 {
            let v = ShapeVector::from_parts(alpha.to_vec(), 8);
            FIG1.iter()
                .enumerate()
                .map(|(n, y)| (y - v.value_at(n as f64)).powi(2))
                .sum()
        };
        let best = sse(sv.alpha());
        for k in 0..3 {
            for d in [-1e-3, 1e-3] {
                let mut a = sv.alpha().to_vec();
                a[k] += d;
                assert!(sse(&a) > best);
            }
        }
    }
}
