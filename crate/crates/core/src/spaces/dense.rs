use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Histograms must sum to one within this tolerance.
pub const HISTOGRAM_SUM_TOLERANCE: f64 = 1e-6;

/// Euclidean distance. Fails when the dimensionalities differ.
pub fn l2(x: &[f64], y: &[f64]) -> Result<f64> {
    ensure!(
        x.len() == y.len(),
        "dimension mismatch: {} vs {}",
        x.len(),
        y.len()
    );
    Ok(l2_unchecked(x, y))
}

#[inline]
pub(crate) fn l2_unchecked(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    // Four independent lanes so the loop vectorizes; (a-b)^2 == (b-a)^2
    // bitwise, so the result stays exactly symmetric.
    let mut acc = [0.0f64; 4];
    let xs = x.chunks_exact(4);
    let ys = y.chunks_exact(4);
    let (xr, yr) = (xs.remainder(), ys.remainder());
    for (a, b) in xs.zip(ys) {
        for lane in 0..4 {
            let d = a[lane] - b[lane];
            acc[lane] += d * d;
        }
    }
    let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (a, b) in xr.iter().zip(yr) {
        let d = a - b;
        sum += d * d;
    }
    sum.sqrt()
}

pub(crate) fn check_finite(x: &[f64]) -> Result<()> {
    if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite value at position {pos}")));
    }
    Ok(())
}

fn check_positive(x: &[f64]) -> Result<()> {
    if let Some(pos) = x.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::invalid(format!(
            "histogram component {pos} is not strictly positive ({})",
            x[pos]
        )));
    }
    Ok(())
}

#[inline]
fn kl_kernel(x: &[f64], log_x: &[f64], log_y: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    for ((xi, lxi), lyi) in x.iter().zip(log_x).zip(log_y) {
        sum += xi * (lxi - lyi);
    }
    sum.max(0.0)
}

/// `Σ x_i ln(x_i / y_i)`, natural logarithm.
///
/// When `precomputed_log_x` is supplied it must hold `ln x_i`; the result is
/// then bitwise identical to the uncached evaluation.
pub fn kl_divergence(x: &[f64], y: &[f64], precomputed_log_x: Option<&[f64]>) -> Result<f64> {
    ensure!(
        x.len() == y.len(),
        "dimension mismatch: {} vs {}",
        x.len(),
        y.len()
    );
    check_positive(x)?;
    check_positive(y)?;
    let log_y = y.iter().map(|v| v.ln());
    Ok(match precomputed_log_x {
        Some(cache) => {
            ensure!(cache.len() == x.len(), "log cache has wrong length");
            kl_kernel(x, cache, log_y)
        }
        None => {
            let log_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
            kl_kernel(x, &log_x, log_y)
        }
    })
}

#[inline]
fn js_kernel(x: &[f64], x_log_x: &[f64], y: &[f64], y_log_y: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..x.len() {
        let s = x[i] + y[i];
        sum += (x_log_x[i] + y_log_y[i]) - s * (0.5 * s).ln();
    }
    (0.5 * sum).max(0.0)
}

/// Jensen-Shannon divergence, natural logarithm.
pub fn js_divergence(x: &[f64], y: &[f64]) -> Result<f64> {
    ensure!(
        x.len() == y.len(),
        "dimension mismatch: {} vs {}",
        x.len(),
        y.len()
    );
    check_positive(x)?;
    check_positive(y)?;
    let xlx: Vec<f64> = x.iter().map(|v| v * v.ln()).collect();
    let yly: Vec<f64> = y.iter().map(|v| v * v.ln()).collect();
    Ok(js_kernel(x, &xlx, y, &yly))
}

/// Probability histogram with logarithms computed once, at construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    values: Vec<f64>,
    logs: Vec<f64>,
}

impl Histogram {
    /// Requires strictly positive finite components. Use
    /// [`Histogram::check_distribution`] to additionally test the sum.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_positive(&values)?;
        let logs = values.iter().map(|v| v.ln()).collect();
        Ok(Histogram { values, logs })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn logs(&self) -> &[f64] {
        &self.logs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_distribution(&self) -> Result<()> {
        check_positive(&self.values)?;
        let sum: f64 = self.values.iter().sum();
        ensure!(
            (sum - 1.0).abs() <= HISTOGRAM_SUM_TOLERANCE,
            "histogram sums to {sum}, expected 1"
        );
        Ok(())
    }

    /// `KL(self || other)` using both cached logarithm vectors.
    #[inline]
    pub fn kl(&self, other: &Histogram) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        kl_kernel(&self.values, &self.logs, other.logs.iter().copied())
    }

    #[inline]
    pub fn js(&self, other: &Histogram) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        let mut sum = 0.0;
        for i in 0..self.values.len() {
            let (x, y) = (self.values[i], other.values[i]);
            let s = x + y;
            sum += (x * self.logs[i] + y * other.logs[i]) - s * (0.5 * s).ln();
        }
        (0.5 * sum).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn l2_examples() {
        assert_eq!(l2(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(l2(&[1.0, 2.0, 3.0], &[4.0, 6.0, 3.0]).unwrap(), 5.0);
        let x = [0.3, -1.5, 2.25, 7.0, 1e-3];
        assert_eq!(l2(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn l2_dimension_mismatch() {
        assert!(matches!(
            l2(&[1.0], &[1.0, 2.0]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn kl_examples() {
        let x = [0.5, 0.5];
        assert_eq!(kl_divergence(&x, &x, None).unwrap(), 0.0);
        let expected = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        let got = kl_divergence(&x, &[0.25, 0.75], None).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
        assert_relative_eq!(got, 0.14384103622589042, max_relative = 1e-9);
    }

    #[test]
    fn kl_is_asymmetric() {
        let a = [0.9, 0.1];
        let b = [0.5, 0.5];
        let ab = kl_divergence(&a, &b, None).unwrap();
        let ba = kl_divergence(&b, &a, None).unwrap();
        assert!((ab - ba).abs() > 1e-3, "{ab} vs {ba}");
    }

    #[test]
    fn kl_rejects_non_positive() {
        assert!(kl_divergence(&[0.0, 1.0], &[0.5, 0.5], None).is_err());
        assert!(kl_divergence(&[0.5, 0.5], &[1.0, -0.0], None).is_err());
        assert!(Histogram::new(vec![0.5, 0.0, 0.5]).is_err());
    }

    #[test]
    fn kl_cached_matches_uncached_bitwise() {
        let x = [0.2, 0.3, 0.5];
        let y = [0.6, 0.1, 0.3];
        let logs: Vec<f64> = x.iter().map(|v: &f64| v.ln()).collect();
        let a = kl_divergence(&x, &y, None).unwrap();
        let b = kl_divergence(&x, &y, Some(&logs)).unwrap();
        let hx = Histogram::new(x.to_vec()).unwrap();
        let hy = Histogram::new(y.to_vec()).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(a.to_bits(), hx.kl(&hy).to_bits());
    }

    #[test]
    fn js_examples() {
        let x = [0.5, 0.5];
        let y = [0.25, 0.75];
        assert_eq!(js_divergence(&x, &x).unwrap(), 0.0);
        let got = js_divergence(&x, &y).unwrap();
        // Direct evaluation through the mixture m = (x + y) / 2.
        let m = [0.375, 0.625];
        let direct: f64 = 0.5
            * (0..2)
                .map(|i| x[i] * (x[i] / m[i]).ln() + y[i] * (y[i] / m[i]).ln())
                .sum::<f64>();
        assert_relative_eq!(got, direct, max_relative = 1e-12);
        assert_relative_eq!(got, 0.033822075568605, max_relative = 1e-9);
        assert_eq!(got, js_divergence(&y, &x).unwrap());
        let hx = Histogram::new(x.to_vec()).unwrap();
        let hy = Histogram::new(y.to_vec()).unwrap();
        assert_relative_eq!(hx.js(&hy), got, max_relative = 1e-12);
    }

    #[test]
    fn histogram_sum_check() {
        assert!(Histogram::new(vec![0.5, 0.6]).unwrap().check_distribution().is_err());
        assert!(Histogram::new(vec![0.4, 0.6]).unwrap().check_distribution().is_ok());
    }
}
