//! Multi-photon (photon-number-splitting) discounts.

use std::f64::consts::SQRT_2;

use crate::error::{QkdError, Result};
use crate::params::{source_rate, EavesdropperModel, LinkParameters, PnsEstimator, SiftedResult};

/// Terms of the even-photon-number series kept by the Gilbert-Hamrick bound.
const GH_SERIES_TERMS: u32 = 20;

/// Rate of sifted bits assumed known to the eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnsDiscount {
    pub bits_per_second: f64,
    pub estimator: PnsEstimator,
    /// Whether the statistical fluctuation margin has been added.
    pub includes_confidence_term: bool,
}

/// Fraction of non-empty Poisson pulses carrying two or more photons,
/// `1 - μe^{-μ} / (1 - e^{-μ})`.
pub fn multiphoton_fraction(mu: f64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(QkdError::domain("multiphoton_fraction", mu, "[0, inf)"));
    }
    if mu < 1e-4 {
        // series of 1 - μ/(e^μ - 1)
        return Ok(mu / 2.0 - mu * mu / 12.0 + mu.powi(4) / 720.0);
    }
    Ok(1.0 - mu / mu.exp_m1())
}

/// Multi-photon fraction of the sifted rate (Poisson statistics).
pub fn pns_revised_bennett(sifted: &SiftedResult, mu: f64) -> Result<PnsDiscount> {
    Ok(PnsDiscount {
        bits_per_second: multiphoton_fraction(mu)? * sifted.rate,
        estimator: PnsEstimator::RevisedBennett,
        includes_confidence_term: false,
    })
}

/// The original BBBSS92 discount, taking μ itself as the leaked fraction.
pub fn pns_original_bennett(sifted: &SiftedResult, mu: f64) -> PnsDiscount {
    PnsDiscount {
        bits_per_second: mu * sifted.rate,
        estimator: PnsEstimator::OriginalBennett,
        includes_confidence_term: false,
    }
}

/// Gilbert-Hamrick bound: the eavesdropper may unambiguously discriminate
/// states and, for `eve_chan < 1`, replace part of the fiber with a
/// lossless channel.
///
/// The result is normalized to half the source rate rather than to the
/// sifted rate.
pub fn pns_gilbert_hamrick(link: &LinkParameters, eve: &EavesdropperModel) -> PnsDiscount {
    let m = gilbert_hamrick_fraction(link, eve);
    PnsDiscount {
        bits_per_second: m * source_rate(link) / 2.0,
        estimator: PnsEstimator::GilbertHamrick,
        includes_confidence_term: false,
    }
}

/// `max(m1, m2, m3)` from the Gilbert-Hamrick analysis.
pub(crate) fn gilbert_hamrick_fraction(link: &LinkParameters, eve: &EavesdropperModel) -> f64 {
    let mu = link.mean_photon_number();
    if mu == 0.0 {
        return 0.0;
    }
    let eff = link.det_eff();
    let p0 = (-mu).exp();
    let p1 = p0 * mu;
    let p2 = p1 * mu / 2.0;
    // 1 - p0 - p1 without cancellation at small μ
    let p2x = -(-mu).exp_m1() - p1;
    let y = 10f64
        .powf(-0.1 * (link.fiber_length() * link.fiber_loss() * eve.eve_chan() + link.rx_loss()))
        * (eff[0] + eff[1])
        / 2.0;

    // (e^{-μy} - e^{-μ}(1 + μ(1-y))) / (1-y) rewritten with d = 1-y, which
    // tends to 0 as y -> 1.
    let d = 1.0 - y;
    let m1 = if d == 0.0 {
        p2x
    } else {
        let x = mu * d;
        let excess = if x < 1e-5 {
            x * x / 2.0 + x * x * x / 6.0
        } else {
            x.exp_m1() - x
        };
        p2x - p0 * excess / d
    };

    let s = mu / SQRT_2;
    let m2 = p2 * y + 1.0 - p0 * (SQRT_2 * s.sinh() + 2.0 * s.cosh() - 1.0);
    let mut m3 = p2 * y + p0 * (mu.sinh() - SQRT_2 * s.sinh());
    let mut p2k = p2;
    for k in 2..=GH_SERIES_TERMS {
        let kf = k as f64;
        p2k *= mu * mu / (kf * (4.0 * kf - 2.0));
        let exposed = (1.0 - (1.0 - y).powi(2 * k as i32 - 1)).max(1.0 - 2f64.powi(1 - k as i32));
        m3 += p2k * exposed;
    }
    m1.max(m2).max(m3)
}

/// Dispatches on the eavesdropper model's estimator.
pub fn pns_discount(
    link: &LinkParameters,
    sifted: &SiftedResult,
    eve: &EavesdropperModel,
) -> Result<PnsDiscount> {
    let mu = link.mean_photon_number();
    match eve.pns_estimator() {
        PnsEstimator::OriginalBennett => Ok(pns_original_bennett(sifted, mu)),
        PnsEstimator::RevisedBennett => pns_revised_bennett(sifted, mu),
        PnsEstimator::GilbertHamrick => Ok(pns_gilbert_hamrick(link, eve)),
    }
}
