//! Reference implementations used only by tests. None of these call into
//! the library's numerics.

#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// Sifted rate and QBER at the preset, produced by a high-precision
/// reference evaluation before the library existed.
pub const GOLDEN_SIFTED_RATE: f64 = 1312.8811768305939;
pub const GOLDEN_QBER: f64 = 0.051817267639301265;

/// Plain-number description of a link for [`sifted_oracle`].
#[derive(Debug, Clone, Copy)]
pub struct LinkNumbers {
    pub pulse_rate: f64,
    pub duty_cycle: f64,
    pub mu: f64,
    pub length_km: f64,
    pub loss_db_per_km: f64,
    pub rx_loss_db: f64,
    pub phase_deg: f64,
    pub eff: [f64; 2],
    pub leak: [f64; 2],
    pub dark: [f64; 2],
    pub after: [f64; 2],
}

pub const PRESET: LinkNumbers = LinkNumbers {
    pulse_rate: 5e6,
    duty_cycle: 0.8,
    mu: 0.1,
    length_km: 10.55,
    loss_db_per_km: 0.237,
    rx_loss_db: 10.4,
    phase_deg: 3.0,
    eff: [0.117, 0.117],
    leak: [0.009, 0.009],
    dark: [2.8e-5, 2.8e-5],
    after: [0.001, 0.001],
};

/// Probability that none of the independent events happens.
fn none_of(ps: &[f64]) -> f64 {
    ps.iter().map(|p| 1.0 - p).product()
}

/// Sifted rate (bits/s) and QBER written straight from the model
/// definition with `exp` and products of miss probabilities.
pub fn sifted_oracle(l: &LinkNumbers) -> (f64, f64) {
    let eff_mean = (l.eff[0] + l.eff[1]) / 2.0;
    let leak = (l.eff[0] * l.leak[0] + l.eff[1] * l.leak[1]) / (l.eff[0] + l.eff[1]);
    let transmission = 10f64.powf(-(l.length_km * l.loss_db_per_km + l.rx_loss_db) / 10.0);
    let mean = l.mu * transmission * eff_mean / (1.0 + l.leak[0] + l.leak[1]);
    let dark = (l.dark[0] + l.dark[1]) / 2.0;
    let after_rate = (l.after[0] + l.after[1]) / 2.0;

    let wrong_basis_click = 1.0 - none_of(&[dark, 1.0 - (-mean * (leak + 0.5)).exp()]);
    let after = wrong_basis_click * after_rate;

    let half = l.phase_deg.to_radians() / 2.0;
    let cos2 = half.cos() * half.cos();
    let sin2 = half.sin() * half.sin();
    let correct = 1.0 - none_of(&[dark, after, 1.0 - (-mean * (leak + cos2)).exp()]);
    let incorrect = 1.0 - none_of(&[dark, after, 1.0 - (-mean * (leak + sin2)).exp()]);
    let valid = 1.0 - none_of(&[correct, incorrect]);

    let rate = l.pulse_rate * l.duty_cycle * valid / 2.0;
    // an error needs the wrong detector to fire and the right one to stay dark
    let qber = incorrect * (1.0 - correct) / valid;
    (rate, qber)
}

/// `num / den` for arbitrarily large integers, to full double precision.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let top = |x: &BigUint| -> (f64, i64) {
        let bits = x.bits() as i64;
        let shift = (bits - 64).max(0);
        ((x >> shift as usize).to_f64().unwrap(), shift)
    };
    let (n, sn) = top(num);
    let (d, sd) = top(den);
    let mut value = n / d;
    let mut exp = sn - sd;
    // apply the power of two in bounded steps to stay in range
    while exp > 0 {
        let step = exp.min(1000);
        value *= 2f64.powi(step as i32);
        exp -= step;
    }
    while exp < 0 {
        let step = (-exp).min(1000);
        value /= 2f64.powi(step as i32);
        exp += step;
    }
    value
}

/// Exact `P[X <= k]` for `X ~ Bin(n, a/d)`, for every `k` in `0..=n`.
pub fn exact_binomial_cdf(n: u64, a: u64, d: u64) -> Vec<f64> {
    let a_pow: Vec<BigUint> = std::iter::successors(Some(BigUint::one()), |x| Some(x * a))
        .take(n as usize + 1)
        .collect();
    let b_pow: Vec<BigUint> = std::iter::successors(Some(BigUint::one()), |x| Some(x * (d - a)))
        .take(n as usize + 1)
        .collect();
    let den = BigUint::from(d).pow(n as u32);

    let mut cdf = Vec::with_capacity(n as usize + 1);
    let mut choose = BigUint::one();
    let mut acc = BigUint::zero();
    for k in 0..=n {
        if k > 0 {
            choose = choose * (n - k + 1) / k;
        }
        acc += &choose * &a_pow[k as usize] * &b_pow[(n - k) as usize];
        cdf.push(ratio_to_f64(&acc, &den));
    }
    cdf
}

/// erf by its Maclaurin series; accurate to ~1e-14 for |x| <= 2.5.
fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= -x2 / n;
        let add = term / (2.0 * n + 1.0);
        sum += add;
        if add.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

/// erfc by its continued fraction (modified Lentz), for x >= 2.
fn erfc_cf(x: f64) -> f64 {
    let tiny = 1e-300;
    // erfc(x) = exp(-x²)/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for i in 1..500 {
        let a = i as f64 / 2.0;
        d = x + a * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + a / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / f
}

/// Complementary error function for x >= 0.
pub fn erfc_oracle(x: f64) -> f64 {
    assert!(x >= 0.0);
    if x < 2.5 {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Inverse of erf near 1, solved by bisection on `erfc(y) = 1 - x`.
pub fn erf_inv_oracle(x: f64) -> f64 {
    assert!(x > 0.0 && x < 1.0);
    let target = 1.0 - x;
    let (mut lo, mut hi) = (0.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if erfc_oracle(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// ln of `P[Bin(n, x) >= m]`, summed in log space.
fn ln_binomial_upper(n: u64, m: u64, x: f64) -> f64 {
    let mut ln_fact = vec![0.0f64; n as usize + 1];
    for i in 1..=n as usize {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let ln_n = ln_fact[n as usize];
    let terms: Vec<f64> = (m..=n)
        .map(|j| {
            ln_n - ln_fact[j as usize] - ln_fact[(n - j) as usize]
                + j as f64 * x.ln()
                + (n - j) as f64 * (-x).ln_1p()
        })
        .collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// Exact inverse of the regularized incomplete beta for integer `a`, `b`,
/// via `I_x(a, b) = P[Bin(a + b - 1, x) >= a]` and bisection.
pub fn inv_beta_oracle(a: u64, b: u64, p: f64) -> f64 {
    let n = a + b - 1;
    let (mut lo, mut hi) = (1e-12f64, 1.0 - 1e-12);
    let target = p.ln();
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ln_binomial_upper(n, a, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
