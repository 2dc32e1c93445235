use std::f64::consts::PI;

use crate::error::{QkdError, Result};

const MAX_NEWTON_STEPS: usize = 12;

/// Inverse error function: returns `y` with `erf(y) = x` for `|x| < 1`.
///
/// A closed-form logarithmic approximation (relative error about 2e-3)
/// seeds Newton iterations. For `x > 1/2` the iteration runs on
/// `erfc(y) = 1 - x`, which keeps full relative accuracy in the tail.
pub fn erf_inv(x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() >= 1.0 {
        return Err(QkdError::domain("erf_inv", x, "(-1, 1)"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < 0.0 {
        return erf_inv(-x).map(|y| -y);
    }

    let half_sqrt_pi = PI.sqrt() / 2.0;
    // 1 - x is exact for x in [1/2, 1).
    let q = 1.0 - x;
    let mut y = initial_guess(x, q);
    for _ in 0..MAX_NEWTON_STEPS {
        let residual = if x > 0.5 {
            q - libm::erfc(y)
        } else {
            libm::erf(y) - x
        };
        let step = residual * half_sqrt_pi * (y * y).exp();
        let next = y - step;
        if (next - y).abs() <= 4.0 * f64::EPSILON * next.abs() {
            return Ok(next);
        }
        y = next;
    }
    Ok(y)
}

fn initial_guess(x: f64, one_minus_x: f64) -> f64 {
    const A: f64 = 0.147;
    // ln(1 - x^2) without cancellation as x -> 1.
    let ln = (one_minus_x * (1.0 + x)).ln();
    let b = 2.0 / (PI * A) + ln / 2.0;
    ((b * b - ln / A).sqrt() - b).sqrt()
}
