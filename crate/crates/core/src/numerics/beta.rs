use crate::error::{QkdError, Result};

use super::erf_inv;

/// Closed-form approximation to the `p`-quantile of a Beta(a, b) variable.
///
/// Requires `a > 1/2` and `b > 1/2`; accuracy improves as both grow.
pub fn inv_beta_approx(a: f64, b: f64, p: f64) -> Result<f64> {
    if !(a > 0.5) {
        return Err(QkdError::domain("inv_beta_approx", a, "a > 1/2"));
    }
    if !(b > 0.5) {
        return Err(QkdError::domain("inv_beta_approx", b, "b > 1/2"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(QkdError::domain("inv_beta_approx", p, "(0, 1)"));
    }
    let y = std::f64::consts::SQRT_2 * erf_inv(1.0 - 2.0 * p)?;
    let l = y * y / 6.0 - 0.5;
    let a1 = 1.0 / (2.0 * a - 1.0);
    let b1 = 1.0 / (2.0 * b - 1.0);
    let h = 2.0 / (a1 + b1);
    let w = y * (h + l).sqrt() / h - (b1 - a1) * (l + 5.0 / 6.0 - 2.0 / (3.0 * h));
    Ok(a / (a + b * (2.0 * w).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_median_is_half() {
        for a in [1.0, 3.5, 41.0, 4096.0] {
            let v = inv_beta_approx(a, a, 0.5).unwrap();
            assert!((v - 0.5).abs() <= 1e-12, "{a} {v}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(inv_beta_approx(0.5, 3.0, 0.1).is_err());
        assert!(inv_beta_approx(3.0, 0.0, 0.1).is_err());
        assert!(inv_beta_approx(3.0, 3.0, 0.0).is_err());
        assert!(inv_beta_approx(3.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn continuous_through_median() {
        let (a, b) = (4055.0, 41.0);
        let mut prev = inv_beta_approx(a, b, 0.5 - 1e-3).unwrap();
        let mut p = 0.5 - 1e-3;
        while p < 0.5 + 1e-3 {
            p += 1e-5;
            let v = inv_beta_approx(a, b, p).unwrap();
            assert!((v - prev).abs() < 1e-5, "jump at {p}: {prev} -> {v}");
            prev = v;
        }
    }
}
