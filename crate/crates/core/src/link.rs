//! Physics half of the model: detection probabilities, sifted key rate and
//! QBER for a phase-encoded BB84 link with gated APDs.

use crate::params::{prob_or_unchecked, source_rate, LinkParameters, SiftedResult};

/// Per-gate click probabilities behind the sifted rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionProbabilities {
    /// Correct detector clicks (matched basis).
    pub p_correct: f64,
    /// Wrong detector clicks (matched basis).
    pub p_incorrect: f64,
    /// At least one detector clicks.
    pub p_valid: f64,
    /// A detector clicks on a mismatched-basis pulse, including afterpulses.
    pub p_wrong_basis: f64,
    /// Afterpulse probability per gate.
    pub p_afterpulse: f64,
}

/// Mean number of detected photons per pulse in the unit-weight arm, and
/// the detector-averaged leak fraction.
pub(crate) fn detected_mean(link: &LinkParameters) -> (f64, f64) {
    let eff = link.det_eff();
    let leak_frac = link.det_leak();
    let eff_sum = eff[0] + eff[1];
    let leak = if eff_sum > 0.0 {
        (eff[0] * leak_frac[0] + eff[1] * leak_frac[1]) / eff_sum
    } else {
        0.0
    };
    let atten = 10f64.powf(-0.1 * (link.fiber_length() * link.fiber_loss() + link.rx_loss()));
    let c = eff_sum / 2.0 * link.mean_photon_number() * atten / (1.0 + leak_frac[0] + leak_frac[1]);
    (c, leak)
}

pub fn detection_probabilities(link: &LinkParameters) -> DetectionProbabilities {
    let dark = link.p_dark();
    let after = link.p_after();
    let p_dark = (dark[0] + dark[1]) / 2.0;
    let (c, leak) = detected_mean(link);

    let p_wrong_basis = prob_or_unchecked([p_dark, -(-c * (leak + 0.5)).exp_m1()]);
    let p_afterpulse = p_wrong_basis * (after[0] + after[1]) / 2.0;
    let p_wrong_basis = prob_or_unchecked([p_wrong_basis, p_afterpulse]);

    let half = link.resid_phase() / 2.0;
    let p_correct = prob_or_unchecked([
        p_dark,
        p_afterpulse,
        -(-c * (leak + half.cos().powi(2))).exp_m1(),
    ]);
    let p_incorrect = prob_or_unchecked([
        p_dark,
        p_afterpulse,
        -(-c * (leak + half.sin().powi(2))).exp_m1(),
    ]);
    let p_valid = prob_or_unchecked([p_correct, p_incorrect]);

    DetectionProbabilities {
        p_correct,
        p_incorrect,
        p_valid,
        p_wrong_basis,
        p_afterpulse,
    }
}

/// Sifted key rate (bits/s) and QBER.
///
/// A link that never clicks reports rate 0 and QBER 0.
pub fn sifted_rate(link: &LinkParameters) -> SiftedResult {
    let d = detection_probabilities(link);
    if d.p_valid == 0.0 {
        return SiftedResult {
            rate: 0.0,
            qber: 0.0,
        };
    }
    SiftedResult {
        rate: d.p_valid / 2.0 * source_rate(link),
        qber: (d.p_incorrect - d.p_correct * d.p_incorrect) / d.p_valid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet_link() -> LinkParameters {
        LinkParameters::builder()
            .p_dark([0.0, 0.0])
            .p_after([0.0, 0.0])
            .det_leak([0.0, 0.0])
            .resid_phase(0.0)
            .build()
            .unwrap()
    }

    #[test]
    fn no_photons_gives_half_error_rate() {
        let link = LinkParameters::builder()
            .mean_photon_number(0.0)
            .build()
            .unwrap();
        let s = sifted_rate(&link);
        assert!(s.rate > 0.0);
        // p_correct == p_incorrect == p, so qber = (1 - p) / (2 - p)
        assert!((s.qber - 0.5).abs() < 1e-4, "{}", s.qber);
    }

    #[test]
    fn noiseless_link_has_zero_errors() {
        let link = quiet_link();
        let s = sifted_rate(&link);
        assert_eq!(s.qber, 0.0);
        let atten = 10f64.powf(-0.1 * (10.55 * 0.237 + 10.4));
        let c = 0.117 * 0.1 * atten;
        let want = (1.0 - (-c).exp()) / 2.0 * 4e6;
        assert!((s.rate / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dead_link_is_zero_not_nan() {
        let link = quiet_link().with_mean_photon_number(0.0).unwrap();
        assert_eq!(
            sifted_rate(&link),
            SiftedResult {
                rate: 0.0,
                qber: 0.0
            }
        );
    }

    #[test]
    fn rate_scales_with_source_rate() {
        let base = LinkParameters::default();
        let faster = base
            .to_builder()
            .pulse_rate(1e7)
            .duty_cycle(0.5)
            .build()
            .unwrap();
        let a = sifted_rate(&base);
        let b = sifted_rate(&faster);
        assert!((b.rate / a.rate - 5e6 / 4e6).abs() < 1e-12);
        assert_eq!(a.qber, b.qber);
    }

    #[test]
    fn extra_rx_loss_halves_mean() {
        let base = LinkParameters::default();
        let lossier = base
            .to_builder()
            .rx_loss(base.rx_loss() + 10.0 * 2f64.log10())
            .build()
            .unwrap();
        let (c0, _) = detected_mean(&base);
        let (c1, _) = detected_mean(&lossier);
        assert!((c1 / c0 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn valid_is_union_of_detectors() {
        let d = detection_probabilities(&LinkParameters::default());
        let want = crate::params::prob_or(&[d.p_correct, d.p_incorrect]).unwrap();
        assert_eq!(d.p_valid, want);
    }

    #[test]
    fn monotone_in_mu_and_length() {
        let base = LinkParameters::default();
        let mut prev = sifted_rate(&base.with_mean_photon_number(0.01).unwrap());
        for i in 2..=300 {
            let s = sifted_rate(&base.with_mean_photon_number(i as f64 * 0.01).unwrap());
            assert!(s.rate > prev.rate);
            assert!(s.qber <= prev.qber);
            assert!(s.qber > 0.0 && s.qber <= 0.5);
            prev = s;
        }
        let mut prev = f64::INFINITY;
        for km in 0..=100 {
            let s = sifted_rate(&base.with_fiber_length(km as f64).unwrap());
            assert!(s.rate < prev);
            prev = s.rate;
        }
    }
}
