use std::f64::consts::PI;

use crate::error::{QkdError, Result};

/// Below this value of `min(k, n-k) * ln(n)` the binomial coefficient is
/// formed as a direct product; above it the Stirling series is used.
const DIRECT_PRODUCT_LIMIT: f64 = 200.0;

/// `P[X <= k] - confidence` for `X ~ Binomial(n, p)`.
///
/// The term at `k` is seeded first, then the tail is summed term by term
/// with the ratio recurrence until the partial sum stops changing. When
/// `k` lies above the mean the upper tail is summed instead and the result
/// taken as its complement, so neither side underflows.
pub fn binom_tail_deficit(n: u64, k: u64, p: f64, confidence: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(QkdError::domain("binom_tail_deficit", p, "(0, 1)"));
    }
    if k > n {
        return Err(QkdError::domain("binom_tail_deficit", k as f64, "k <= n"));
    }
    if k == n {
        return Ok(1.0 - confidence);
    }
    let q = 1.0 - p;
    let nf = n as f64;

    if (k as f64) <= nf * p {
        let mut t = binomial_term(n, k, p);
        let mut s = t - confidence;
        for j in (0..k).rev() {
            t *= (j + 1) as f64 * q / (p * (nf - j as f64));
            let s1 = s + t;
            if s1 == s {
                break;
            }
            s = s1;
        }
        Ok(s)
    } else {
        let mut t = binomial_term(n, k + 1, p);
        let mut upper = t;
        for j in (k + 1)..n {
            t *= (nf - j as f64) * p / ((j + 1) as f64 * q);
            let next = upper + t;
            if next == upper {
                break;
            }
            upper = next;
        }
        Ok((1.0 - upper) - confidence)
    }
}

/// `C(n, k) p^k (1-p)^(n-k)`, formed in log space.
fn binomial_term(n: u64, k: u64, p: f64) -> f64 {
    let small = k.min(n - k);
    let ln_choose = if (small as f64) * (n as f64).ln() < DIRECT_PRODUCT_LIMIT {
        ln_choose_direct(n, k)
    } else {
        ln_choose_stirling(n, k)
    };
    (ln_choose + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

pub(crate) fn ln_choose_direct(n: u64, k: u64) -> f64 {
    let small = k.min(n - k);
    let mut l = 1.0;
    for i in 1..=small {
        l = l * (n - i + 1) as f64 / i as f64;
    }
    l.ln()
}

/// `ln C(n, k)` from the Stirling series for `ln Γ` truncated after the
/// `1/1260 z^5` term.
pub(crate) fn ln_choose_stirling(n: u64, k: u64) -> f64 {
    let k1 = (k + 1) as f64;
    let k2 = (n - k + 1) as f64;
    let n1 = (n + 1) as f64;
    let mut l = 1.0 - 0.5 * (2.0 * PI).ln();
    l += (1.0 / n1 - 1.0 / k1 - 1.0 / k2) / 12.0;
    l -= (n1.powi(-3) - k1.powi(-3) - k2.powi(-3)) / 360.0;
    l += (n1.powi(-5) - k1.powi(-5) - k2.powi(-5)) / 1260.0;
    l + (n1 - 0.5) * n1.ln() - (k1 - 0.5) * k1.ln() - (k2 - 0.5) * k2.ln()
}
