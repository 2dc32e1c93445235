//! Entropy estimates (defense functions) for privacy amplification.
//!
//! Each estimator takes a block of `b` sifted bits containing `e` observed
//! errors and a residual confidence `c`, and returns a lower bound on the
//! number of bits unknown to the eavesdropper.

use std::f64::consts::SQRT_2;

use crate::error::{QkdError, Result};
use crate::numerics::{
    binom_tail_deficit, erf_inv, find_root_within, inv_beta_approx, minimize_scalar, Bracket,
};
use crate::params::EntropyEstimator;

/// Lowest and highest Rényi order searched by the Myers estimate.
pub const RENYI_ORDER_RANGE: (f64, f64) = (1.01, 2.0);

const ROOT_TOL: f64 = 1e-15;
const RENYI_TOL: f64 = 1e-10;

/// Entropy estimate for one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    /// Estimate divided by the block size; may be negative.
    pub entropy_per_bit: f64,
    /// Estimate in bits.
    pub raw_bits: f64,
    pub estimator: EntropyEstimator,
}

impl EntropyEstimate {
    /// Per-bit estimate clamped at zero, for display.
    pub fn reported_per_bit(&self) -> f64 {
        self.entropy_per_bit.max(0.0)
    }
}

/// BBBSS92 estimate.
pub fn entropy_bennett(b: f64, e: f64, c: f64) -> Result<f64> {
    let t = 2.828427 * e;
    let dev2 = 6.828427 * e;
    let conf1 = SQRT_2 * erf_inv(1.0 - c)?;
    let est = b - e - t - conf1 * dev2.sqrt();
    Ok(est + 2.0 * c.log2())
}

/// Slutsky defense-frontier estimate.
#[allow(clippy::approx_constant)]
pub fn entropy_slutsky(b: f64, e: f64, c: f64) -> Result<f64> {
    let conf1 = erf_inv(1.0 - c)?;
    let e_prime = (e / b + conf1 / (2.0 * b).sqrt()).min(1.0 / 3.0);
    let t = (1.0 - 3.0 * e_prime) / (1.0 - e_prime);
    let t = (1.0 + 1.442695 * (1.0 - 0.5 * t * t).ln()) * (b - e);
    let dev2 = (b - e) / 2.0;
    let est = b - e - t - conf1 * dev2.sqrt();
    Ok(est + 2.0 * c.log2())
}

/// Intermediate state of the Myers estimate for integer error
/// count `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MyersState {
    pub n: u64,
    pub k: u64,
    pub confidence: f64,
    /// Upper confidence bound on the error probability, before clamping.
    pub p_error: f64,
    /// Bound on the eavesdropper's per-bit guessing probability.
    pub p_e: f64,
    /// Rényi order maximizing the bound.
    pub renyi_order: f64,
    /// Estimated entropy in bits.
    pub entropy: f64,
}

impl MyersState {
    pub fn solve(n: u64, k: u64, c: f64) -> Result<Self> {
        if k >= n {
            return Err(QkdError::domain("entropy_myers", k as f64, "0 <= k < n"));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(QkdError::domain("entropy_myers", c, "(0, 1)"));
        }
        let nf = n as f64;
        // (1-p)^n = c solves the k = 0 case exactly, and the beta seed needs k > 1/2.
        let seed = if k == 0 {
            -(c.ln() / nf).exp_m1()
        } else {
            1.0 - inv_beta_approx((n - k) as f64, k as f64, c)?
        };
        let unit = Bracket { lo: 0.0, hi: 1.0 };
        let seed = seed.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        let mut failure = None;
        let p_error = find_root_within(
            |p| match binom_tail_deficit(n, k, p, c) {
                Ok(v) => v,
                Err(err) => {
                    failure.get_or_insert(err);
                    f64::NAN
                }
            },
            seed,
            unit,
            ROOT_TOL,
        )
        .map_err(|err| failure.unwrap_or(err))?;

        let p = p_error.min(1.0 / 3.0);
        let odds = p / (1.0 - p);
        let p_e = 0.5 + (odds * (1.0 - odds)).max(0.0).sqrt();

        let bound = |r: f64| renyi_bound(nf, k as f64, c, p_e, r);
        let range = Bracket {
            lo: RENYI_ORDER_RANGE.0,
            hi: RENYI_ORDER_RANGE.1,
        };
        let best = minimize_scalar(|r| -bound(r), range, RENYI_TOL);
        Ok(MyersState {
            n,
            k,
            confidence: c,
            p_error,
            p_e,
            renyi_order: best.x,
            entropy: bound(best.x),
        })
    }
}

fn renyi_bound(n: f64, k: f64, c: f64, p_e: f64, r: f64) -> f64 {
    let mut h = (n - k) / (1.0 - r) * (p_e.powf(r) + (1.0 - p_e).powf(r)).log2();
    let t = (r / ((r - 1.0) * c)).log2();
    h -= (n + t + 1.0 + (n + t + 1.0 + (n + t + 1.0).log2()).log2()).log2();
    h - (r / c).log2() / (r - 1.0) - t - 2.0
}

/// Myers estimate.
///
/// The estimate is defined for whole error counts; a fractional `k` is
/// interpolated linearly between its floor and ceiling so the result stays
/// continuous in the error rate.
pub fn entropy_myers(n: u64, k: f64, c: f64) -> Result<f64> {
    if !(k >= 0.0 && k < n as f64) {
        return Err(QkdError::domain("entropy_myers", k, "0 <= k < n"));
    }
    let lo = k.floor();
    let frac = k - lo;
    let lower = MyersState::solve(n, lo as u64, c)?.entropy;
    if frac == 0.0 {
        return Ok(lower);
    }
    let upper = MyersState::solve(n, lo as u64 + 1, c)?.entropy;
    Ok(lower + frac * (upper - lower))
}

/// Runs the selected estimator on a block of `block_size` bits with
/// `qber * block_size` errors.
pub fn estimate(
    estimator: EntropyEstimator,
    block_size: u32,
    qber: f64,
    confidence: f64,
) -> Result<EntropyEstimate> {
    let b = block_size as f64;
    let e = qber * b;
    let raw_bits = match estimator {
        EntropyEstimator::Bennett => entropy_bennett(b, e, confidence)?,
        EntropyEstimator::Slutsky => entropy_slutsky(b, e, confidence)?,
        EntropyEstimator::Myers => entropy_myers(block_size as u64, e, confidence)?,
    };
    Ok(EntropyEstimate {
        entropy_per_bit: raw_bits / b,
        raw_bits,
        estimator,
    })
}
