//! From sifted rate and QBER to distilled key rate: error-correction
//! overhead, entropy estimation, multi-photon discount and the final
//! subtraction.

pub mod entropy;
pub mod pns;

use std::f64::consts::SQRT_2;

pub use entropy::{
    entropy_bennett, entropy_myers, entropy_slutsky, EntropyEstimate, MyersState, RENYI_ORDER_RANGE,
};
pub use pns::{
    multiphoton_fraction, pns_discount, pns_gilbert_hamrick, pns_original_bennett,
    pns_revised_bennett, PnsDiscount,
};

use crate::error::{QkdError, Result};
use crate::link::sifted_rate;
use crate::numerics::erf_inv;
use crate::params::{EavesdropperModel, LinkParameters, ProtocolParameters, SiftedResult};

/// Fraction of sifted bits disclosed by Cascade-style error correction.
pub fn edac_overhead(qber: f64, proto: &ProtocolParameters) -> Result<f64> {
    if !(0.0..1.0).contains(&qber) {
        return Err(QkdError::domain("edac_overhead", qber, "[0, 1)"));
    }
    let sets = proto.n_edac_sets() as f64 / proto.block_size() as f64;
    if qber == 0.0 {
        return Ok(sets);
    }
    Ok(qber * (1.0 - qber.log2()) + sets)
}

/// Every intermediate quantity of one distilled-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBreakdown {
    pub sifted: SiftedResult,
    /// Disclosed fraction from error correction.
    pub overhead: f64,
    pub entropy: EntropyEstimate,
    /// Multi-photon discount including the fluctuation margin.
    pub pns: PnsDiscount,
    /// Distilled key rate in bits/s.
    pub distilled: f64,
}

/// Full pipeline with intermediate values.
pub fn distill(
    link: &LinkParameters,
    proto: &ProtocolParameters,
    eve: &EavesdropperModel,
) -> Result<RateBreakdown> {
    let sifted = sifted_rate(link);
    let overhead = edac_overhead(sifted.qber, proto)?;
    let entropy = entropy::estimate(
        proto.entropy_estimator(),
        proto.block_size(),
        sifted.qber,
        proto.confidence(),
    )?;
    let raw = pns_discount(link, &sifted, eve)?;

    if sifted.rate == 0.0 {
        return Ok(RateBreakdown {
            sifted,
            overhead,
            entropy,
            pns: PnsDiscount {
                includes_confidence_term: true,
                ..raw
            },
            distilled: 0.0,
        });
    }

    let mpd = raw.bits_per_second;
    let share = (mpd / sifted.rate).clamp(0.0, 1.0);
    let margin = SQRT_2 * erf_inv(1.0 - eve.confidence())? * (mpd * (1.0 - share)).sqrt();
    let pns = PnsDiscount {
        bits_per_second: mpd + margin,
        includes_confidence_term: true,
        ..raw
    };
    let distilled =
        (sifted.rate * (entropy.entropy_per_bit - overhead) - pns.bits_per_second).max(0.0);
    Ok(RateBreakdown {
        sifted,
        overhead,
        entropy,
        pns,
        distilled,
    })
}

/// Distilled key rate in bits/s.
pub fn distilled_rate(
    link: &LinkParameters,
    proto: &ProtocolParameters,
    eve: &EavesdropperModel,
) -> Result<f64> {
    distill(link, proto, eve).map(|b| b.distilled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{EntropyEstimator, PnsEstimator};

    fn defaults() -> (LinkParameters, ProtocolParameters, EavesdropperModel) {
        (
            LinkParameters::default(),
            ProtocolParameters::default(),
            EavesdropperModel::default(),
        )
    }

    #[test]
    fn overhead_values() {
        let proto = ProtocolParameters::default();
        let want = 0.01 * (1.0 + 100f64.log2()) + 0.015625;
        assert!((edac_overhead(0.01, &proto).unwrap() - want).abs() < 1e-15);
        assert!((edac_overhead(0.01, &proto).unwrap() - 0.09206).abs() < 1e-5);
        assert_eq!(edac_overhead(0.0, &proto).unwrap(), 0.015625);
        assert_eq!(edac_overhead(0.5, &proto).unwrap(), 1.015625);
        assert!(edac_overhead(1.0, &proto).is_err());
        assert!(edac_overhead(-0.1, &proto).is_err());
    }

    #[test]
    fn original_bennett_forces_zero_at_mu_one() {
        let (link, proto, eve) = defaults();
        let eve = eve.with_pns_estimator(PnsEstimator::OriginalBennett);
        for mu in [1.0, 1.1, 2.0, 3.0] {
            let link = link.with_mean_photon_number(mu).unwrap();
            let b = distill(&link, &proto, &eve).unwrap();
            assert_eq!(b.distilled, 0.0);
            assert!(b.pns.bits_per_second.is_finite());
        }
    }

    #[test]
    fn zero_photons_zero_rate() {
        let (link, proto, eve) = defaults();
        let link = link.with_mean_photon_number(0.0).unwrap();
        for pns in PnsEstimator::ALL {
            let r = distilled_rate(&link, &proto, &eve.with_pns_estimator(*pns)).unwrap();
            assert_eq!(r, 0.0);
        }
        let dead = link.to_builder().p_dark([0.0, 0.0]).build().unwrap();
        assert_eq!(distilled_rate(&dead, &proto, &eve).unwrap(), 0.0);
    }

    #[test]
    fn tighter_confidence_costs_rate() {
        let (link, proto, eve) = defaults();
        for est in EntropyEstimator::ALL {
            let proto = proto.with_entropy_estimator(*est);
            let loose = distilled_rate(&link, &proto, &eve).unwrap();
            let tight = distilled_rate(
                &link,
                &proto.with_confidence(1e-9).unwrap(),
                &eve.with_confidence(1e-9).unwrap(),
            )
            .unwrap();
            assert!(tight < loose, "{est}: {tight} vs {loose}");
        }
    }

    #[test]
    fn breakdown_is_consistent() {
        let (link, proto, eve) = defaults();
        let b = distill(&link, &proto, &eve).unwrap();
        assert!(b.pns.includes_confidence_term);
        let raw = pns_revised_bennett(&b.sifted, 0.1).unwrap().bits_per_second;
        assert!(b.pns.bits_per_second > raw);
        let want = b.sifted.rate * (b.entropy.entropy_per_bit - b.overhead) - b.pns.bits_per_second;
        assert_eq!(b.distilled, want.max(0.0));
    }

    #[test]
    fn continuous_in_mu() {
        let (link, proto, eve) = defaults();
        for est in EntropyEstimator::ALL {
            let proto = proto.with_entropy_estimator(*est);
            let mut prev: Option<f64> = None;
            let mut mu: f64 = 0.2;
            while mu < 2.0 {
                let r = distilled_rate(&link.with_mean_photon_number(mu).unwrap(), &proto, &eve)
                    .unwrap();
                if let Some(p) = prev {
                    // step 1e-3 in μ; the curve's slope is a few thousand bits/s per unit μ
                    assert!((r - p).abs() < 50.0, "{est} jump at {mu}: {p} -> {r}");
                }
                prev = Some(r);
                mu += 1e-3;
            }
        }
    }
}
