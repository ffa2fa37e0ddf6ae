use std::ops::{Add, Div, Mul, Sub};

use crate::dd::Dd;
use crate::error::{Error, Result};

use super::check_degree;

/// Arithmetic needed by the basis recursion; implemented for `f64` and the
/// internal double-double type.
pub(crate) trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_f64(x: f64) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
}

impl Scalar for Dd {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

/// Centre term `a_k = N/2` of the three-term recurrence (independent of `k`).
#[inline]
pub(crate) fn centre(last_index: usize) -> f64 {
    last_index as f64 / 2.0
}

/// `b_k = k^2 ((N+1)^2 - k^2) / (4 (4k^2 - 1))`, for `k >= 1`.
#[inline]
pub(crate) fn recurrence_b<T: Scalar>(k: usize, last_index: usize) -> T {
    let k = k as f64;
    let m = last_index as f64 + 1.0;
    // Both factors are integers well inside f64's exact range for the
    // supported window lengths; keep them separate so the product is
    // formed in `T`.
    let num = T::from_f64(k * k) * T::from_f64(m * m - k * k);
    num / T::from_f64(4.0 * (4.0 * k * k - 1.0))
}

/// Fill `out` (row-major, stride `degree + 1`) with the power-form
/// coefficients of the monic discrete Chebyshev polynomials for a window
/// whose last index is `last_index`. Row `k` holds `c[k][0..=k]`; entries
/// above the diagonal are zero.
pub(crate) fn fill_power_coeffs<T: Scalar>(last_index: usize, degree: usize, out: &mut [T]) {
    let stride = degree + 1;
    debug_assert!(out.len() >= stride * stride);
    let zero = T::from_f64(0.0);
    for v in out.iter_mut().take(stride * stride) {
        *v = zero;
    }
    out[0] = T::from_f64(1.0);
    if degree == 0 {
        return;
    }
    let a = T::from_f64(centre(last_index));
    // p_1 = x - a
    out[stride] = zero - a;
    out[stride + 1] = T::from_f64(1.0);
    for k in 1..degree {
        let b: T = recurrence_b(k, last_index);
        let (cur, next) = (k * stride, (k + 1) * stride);
        let prev = (k - 1) * stride;
        for j in 0..=k + 1 {
            let shifted = if j > 0 { out[cur + j - 1] } else { zero };
            let here = if j <= k { out[cur + j] } else { zero };
            let back = if j < k { out[prev + j] } else { zero };
            out[next + j] = shifted - a * here - b * back;
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Closed-form squared norm `||p_k||^2` over the sample indices `0..=N`:
/// `(k!)^4 / ((2k)! (2k+1)!) * prod_{i=-k..k} (N + 1 + i)`.
pub fn squared_norm(k: usize, last_index: usize) -> Result<f64> {
    if k > last_index {
        return Err(Error::config(format!(
            "degree index {k} exceeds window last index {last_index}"
        )));
    }
    let lead = factorial(k).powi(4) / (factorial(2 * k) * factorial(2 * k + 1));
    let m = last_index as f64 + 1.0;
    let prod = (0..=2 * k).fold(1.0, |acc, i| acc * (m + i as f64 - k as f64));
    Ok(lead * prod)
}

/// Monic discrete Chebyshev basis for a window of `N + 1` points.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthoBasis {
    last_index: usize,
    degree: usize,
    power_coeffs: Vec<Vec<f64>>,
    sq_norms: Vec<f64>,
}

impl OrthoBasis {
    /// `last_index` is `N`: the window spans sample indices `0..=N`.
    pub fn new(last_index: usize, degree: usize) -> Result<Self> {
        check_degree(degree)?;
        if degree > last_index {
            return Err(Error::config(format!(
                "degree {degree} needs at least {} points, window has {}",
                degree + 1,
                last_index + 1
            )));
        }
        let stride = degree + 1;
        let mut flat = vec![Dd::ZERO; stride * stride];
        fill_power_coeffs(last_index, degree, &mut flat);
        let power_coeffs = (0..=degree)
            .map(|k| {
                flat[k * stride..=k * stride + k]
                    .iter()
                    .map(|c| c.to_f64())
                    .collect()
            })
            .collect();
        let sq_norms = (0..=degree)
            .map(|k| squared_norm(k, last_index))
            .collect::<Result<_>>()?;
        Ok(Self {
            last_index,
            degree,
            power_coeffs,
            sq_norms,
        })
    }

    pub fn last_index(&self) -> usize {
        self.last_index
    }

    /// Number of sample points the basis is orthogonal over.
    pub fn len(&self) -> usize {
        self.last_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficients `c[k][0..=k]` with `p_k(x) = sum_j c[k][j] x^j`.
    pub fn power_coeffs(&self, k: usize) -> &[f64] {
        &self.power_coeffs[k]
    }

    pub fn sq_norm(&self, k: usize) -> f64 {
        self.sq_norms[k]
    }

    pub fn sq_norms(&self) -> &[f64] {
        &self.sq_norms
    }

    /// `p_0(x)..p_K(x)` via the three-term recurrence.
    pub fn values_at(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.degree + 1];
        recurrence_values(self.last_index, x, &mut out);
        out
    }

    /// `p_k(x)` via the three-term recurrence.
    pub fn value(&self, k: usize, x: f64) -> f64 {
        assert!(k <= self.degree, "degree index {k} out of range");
        let mut out = vec![0.0; k + 1];
        recurrence_values(self.last_index, x, &mut out);
        out[k]
    }

    /// `p_k(x)` from the stored power-form coefficients (Horner).
    pub fn value_power_form(&self, k: usize, x: f64) -> f64 {
        self.power_coeffs[k]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Evaluate `p_0..p_{out.len()-1}` at `x` by the recurrence, in f64.
pub(crate) fn recurrence_values(last_index: usize, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    let t = x - centre(last_index);
    out[1] = t;
    for k in 1..out.len() - 1 {
        let b: f64 = recurrence_b(k, last_index);
        out[k + 1] = t * out[k] - b * out[k - 1];
    }
}

/// Build the basis for a window with last index `N` and degree `K`.
pub fn build_basis(last_index: usize, degree: usize) -> Result<OrthoBasis> {
    OrthoBasis::new(last_index, degree)
}
