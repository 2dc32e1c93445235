//! Parameter sets for the link, the distillation protocol and the
//! eavesdropper, plus the two probability helpers everything else builds on.
//!
//! All parameter types are validated when they are built and immutable
//! afterwards. The numeric pipeline never re-checks them.

use std::fmt;
use std::str::FromStr;

use crate::error::{QkdError, Result};

/// Name of the bundled default configuration (January 2004 Mark 2 link).
pub const PRESET_NAME: &str = "mark2-jan2004";

/// A closed, half-open or open interval of legal values for one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub min_exclusive: bool,
    pub max_exclusive: bool,
    pub label: &'static str,
}

impl Range {
    pub const PROBABILITY: Range = Range {
        min: 0.0,
        max: 1.0,
        min_exclusive: false,
        max_exclusive: false,
        label: "[0, 1]",
    };
    pub const OPEN_UNIT: Range = Range {
        min: 0.0,
        max: 1.0,
        min_exclusive: true,
        max_exclusive: true,
        label: "(0, 1)",
    };
    pub const NON_NEGATIVE: Range = Range {
        min: 0.0,
        max: f64::INFINITY,
        min_exclusive: false,
        max_exclusive: true,
        label: "[0, inf)",
    };
    pub const POSITIVE: Range = Range {
        min: 0.0,
        max: f64::INFINITY,
        min_exclusive: true,
        max_exclusive: true,
        label: "(0, inf)",
    };
    pub const AT_LEAST_ONE: Range = Range {
        min: 1.0,
        max: f64::INFINITY,
        min_exclusive: false,
        max_exclusive: true,
        label: "[1, inf)",
    };

    pub fn contains(&self, x: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        let above = if self.min_exclusive {
            x > self.min
        } else {
            x >= self.min
        };
        let below = if self.max_exclusive {
            x < self.max
        } else {
            x <= self.max
        };
        above && below
    }

    pub fn check(&self, name: &'static str, value: f64) -> Result<f64> {
        if self.contains(value) {
            Ok(value)
        } else {
            Err(QkdError::InvalidParameter {
                name,
                value,
                range: self.label,
            })
        }
    }
}

/// Physical description of the source, fiber and receiver.
///
/// Detector quantities are stored per detector (index 0 and 1) because the
/// model averages them explicitly. The residual interferometer phase error
/// is held in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParameters {
    pulse_rate: f64,
    duty_cycle: f64,
    mean_photon_number: f64,
    fiber_length: f64,
    fiber_loss: f64,
    rx_loss: f64,
    resid_phase: f64,
    det_eff: [f64; 2],
    det_leak: [f64; 2],
    p_dark: [f64; 2],
    p_after: [f64; 2],
}

impl LinkParameters {
    /// The bundled Mark 2 configuration: 5 MHz pulses through 10.55 km of
    /// fiber at 0.237 dB/km into a 10.4 dB receiver.
    pub fn mark2_jan2004() -> Self {
        LinkParameters {
            pulse_rate: 5e6,
            duty_cycle: 0.8,
            mean_photon_number: 0.1,
            fiber_length: 10.55,
            fiber_loss: 0.237,
            rx_loss: 10.4,
            resid_phase: 3f64.to_radians(),
            det_eff: [0.117, 0.117],
            det_leak: [0.009, 0.009],
            p_dark: [2.8e-5, 2.8e-5],
            p_after: [0.001, 0.001],
        }
    }

    pub fn builder() -> LinkParametersBuilder {
        LinkParametersBuilder {
            params: Self::mark2_jan2004(),
        }
    }

    pub fn to_builder(&self) -> LinkParametersBuilder {
        LinkParametersBuilder { params: *self }
    }

    pub fn with_mean_photon_number(&self, mu: f64) -> Result<Self> {
        self.to_builder().mean_photon_number(mu).build()
    }

    pub fn with_fiber_length(&self, km: f64) -> Result<Self> {
        self.to_builder().fiber_length(km).build()
    }

    /// Pulses per second.
    pub fn pulse_rate(&self) -> f64 {
        self.pulse_rate
    }
    pub fn duty_cycle(&self) -> f64 {
        self.duty_cycle
    }
    /// Mean photon number per pulse (μ).
    pub fn mean_photon_number(&self) -> f64 {
        self.mean_photon_number
    }
    /// Fiber length in km.
    pub fn fiber_length(&self) -> f64 {
        self.fiber_length
    }
    /// Fiber attenuation in dB/km.
    pub fn fiber_loss(&self) -> f64 {
        self.fiber_loss
    }
    /// Receiver loss in dB.
    pub fn rx_loss(&self) -> f64 {
        self.rx_loss
    }
    /// Residual phase error in radians.
    pub fn resid_phase(&self) -> f64 {
        self.resid_phase
    }
    pub fn det_eff(&self) -> [f64; 2] {
        self.det_eff
    }
    pub fn det_leak(&self) -> [f64; 2] {
        self.det_leak
    }
    pub fn p_dark(&self) -> [f64; 2] {
        self.p_dark
    }
    pub fn p_after(&self) -> [f64; 2] {
        self.p_after
    }

    fn validate(&self) -> Result<()> {
        Range::POSITIVE.check("pulse_rate", self.pulse_rate)?;
        Range::PROBABILITY.check("duty_cycle", self.duty_cycle)?;
        Range::NON_NEGATIVE.check("mean_photon_number", self.mean_photon_number)?;
        Range::NON_NEGATIVE.check("fiber_length", self.fiber_length)?;
        Range::NON_NEGATIVE.check("fiber_loss", self.fiber_loss)?;
        Range::NON_NEGATIVE.check("rx_loss", self.rx_loss)?;
        if !self.resid_phase.is_finite() {
            return Err(QkdError::InvalidParameter {
                name: "resid_phase",
                value: self.resid_phase,
                range: "finite",
            });
        }
        const EFF: [&str; 2] = ["det_eff0", "det_eff1"];
        const LEAK: [&str; 2] = ["det_leak0", "det_leak1"];
        const DARK: [&str; 2] = ["p_dark0", "p_dark1"];
        const AFTER: [&str; 2] = ["p_after0", "p_after1"];
        for i in 0..2 {
            Range::PROBABILITY.check(EFF[i], self.det_eff[i])?;
            Range::PROBABILITY.check(LEAK[i], self.det_leak[i])?;
            Range::PROBABILITY.check(DARK[i], self.p_dark[i])?;
            Range::PROBABILITY.check(AFTER[i], self.p_after[i])?;
        }
        Ok(())
    }
}

impl Default for LinkParameters {
    fn default() -> Self {
        Self::mark2_jan2004()
    }
}

/// Builder for [`LinkParameters`]; starts from the preset.
#[derive(Debug, Clone)]
pub struct LinkParametersBuilder {
    params: LinkParameters,
}

impl LinkParametersBuilder {
    pub fn pulse_rate(mut self, v: f64) -> Self {
        self.params.pulse_rate = v;
        self
    }
    pub fn duty_cycle(mut self, v: f64) -> Self {
        self.params.duty_cycle = v;
        self
    }
    pub fn mean_photon_number(mut self, v: f64) -> Self {
        self.params.mean_photon_number = v;
        self
    }
    pub fn fiber_length(mut self, v: f64) -> Self {
        self.params.fiber_length = v;
        self
    }
    pub fn fiber_loss(mut self, v: f64) -> Self {
        self.params.fiber_loss = v;
        self
    }
    pub fn rx_loss(mut self, v: f64) -> Self {
        self.params.rx_loss = v;
        self
    }
    pub fn resid_phase(mut self, radians: f64) -> Self {
        self.params.resid_phase = radians;
        self
    }
    pub fn resid_phase_deg(self, degrees: f64) -> Self {
        self.resid_phase(degrees.to_radians())
    }
    pub fn det_eff(mut self, v: [f64; 2]) -> Self {
        self.params.det_eff = v;
        self
    }
    pub fn det_leak(mut self, v: [f64; 2]) -> Self {
        self.params.det_leak = v;
        self
    }
    pub fn p_dark(mut self, v: [f64; 2]) -> Self {
        self.params.p_dark = v;
        self
    }
    pub fn p_after(mut self, v: [f64; 2]) -> Self {
        self.params.p_after = v;
        self
    }

    pub fn build(self) -> Result<LinkParameters> {
        self.params.validate()?;
        Ok(self.params)
    }
}

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $canon:literal $(| $alias:literal)*),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            /// Canonical name, as used in config files.
            pub fn name(&self) -> &'static str {
                match self {
                    $($name::$variant => $canon),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                let lower = s.trim().to_ascii_lowercase();
                $(
                    if lower == $canon.to_ascii_lowercase() $(|| lower == $alias)* {
                        return Ok($name::$variant);
                    }
                )+
                let legal: Vec<&str> = vec![$($canon),+];
                Err(format!("expected one of {}", legal.join(", ")))
            }
        }
    };
}

named_enum! {
    /// Privacy-amplification entropy estimate (defense function).
    EntropyEstimator {
        Bennett => "Bennett" | "bbbss92",
        Slutsky => "Slutsky",
        Myers => "Myers",
    }
}

named_enum! {
    /// Sifting protocol. Only BB84 sifting is modeled.
    SiftType {
        Bb84 => "BB84",
    }
}

named_enum! {
    /// Multi-photon (photon-number-splitting) discount.
    PnsEstimator {
        OriginalBennett => "OriginalBennett" | "original" | "original-bennett" | "bennett",
        RevisedBennett => "RevisedBennett" | "revised" | "revised-bennett",
        GilbertHamrick => "GilbertHamrick" | "gh" | "gilbert-hamrick",
    }
}

/// Distillation-layer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParameters {
    block_size: u32,
    n_edac_sets: u32,
    entropy_estimator: EntropyEstimator,
    sift_type: SiftType,
    confidence: f64,
}

impl ProtocolParameters {
    pub fn new(
        block_size: u32,
        n_edac_sets: u32,
        entropy_estimator: EntropyEstimator,
        sift_type: SiftType,
        confidence: f64,
    ) -> Result<Self> {
        if block_size == 0 {
            return Err(QkdError::InvalidParameter {
                name: "block_size",
                value: 0.0,
                range: "[1, 2^32)",
            });
        }
        Range::OPEN_UNIT.check("confidence", confidence)?;
        Ok(ProtocolParameters {
            block_size,
            n_edac_sets,
            entropy_estimator,
            sift_type,
            confidence,
        })
    }

    /// Cascade with 4096-bit blocks and 64 sets, BBBSS92 entropy, c = 1e-6.
    pub fn mark2_jan2004() -> Self {
        ProtocolParameters {
            block_size: 4096,
            n_edac_sets: 64,
            entropy_estimator: EntropyEstimator::Bennett,
            sift_type: SiftType::Bb84,
            confidence: 1e-6,
        }
    }

    pub fn with_entropy_estimator(&self, estimator: EntropyEstimator) -> Self {
        ProtocolParameters {
            entropy_estimator: estimator,
            ..*self
        }
    }

    pub fn with_confidence(&self, confidence: f64) -> Result<Self> {
        Self::new(
            self.block_size,
            self.n_edac_sets,
            self.entropy_estimator,
            self.sift_type,
            confidence,
        )
    }

    pub fn block_size(&self) -> u32 {
        self.block_size
    }
    pub fn n_edac_sets(&self) -> u32 {
        self.n_edac_sets
    }
    pub fn entropy_estimator(&self) -> EntropyEstimator {
        self.entropy_estimator
    }
    pub fn sift_type(&self) -> SiftType {
        self.sift_type
    }
    pub fn confidence(&self) -> f64 {
        self.confidence
    }
}

impl Default for ProtocolParameters {
    fn default() -> Self {
        Self::mark2_jan2004()
    }
}

/// What the eavesdropper is assumed to be able to do with multi-photon pulses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EavesdropperModel {
    pns_estimator: PnsEstimator,
    eve_chan: f64,
    confidence: f64,
}

impl EavesdropperModel {
    /// `eve_chan` scales the fiber loss Eve leaves in place: 0 means she can
    /// substitute a lossless channel, 1 means she cannot touch the fiber.
    pub fn new(pns_estimator: PnsEstimator, eve_chan: f64, confidence: f64) -> Result<Self> {
        Range::PROBABILITY.check("eve_chan", eve_chan)?;
        Range::OPEN_UNIT.check("confidence", confidence)?;
        Ok(EavesdropperModel {
            pns_estimator,
            eve_chan,
            confidence,
        })
    }

    pub fn mark2_jan2004() -> Self {
        EavesdropperModel {
            pns_estimator: PnsEstimator::RevisedBennett,
            eve_chan: 0.0,
            confidence: 1e-6,
        }
    }

    pub fn with_pns_estimator(&self, estimator: PnsEstimator) -> Self {
        EavesdropperModel {
            pns_estimator: estimator,
            ..*self
        }
    }

    pub fn with_confidence(&self, confidence: f64) -> Result<Self> {
        Self::new(self.pns_estimator, self.eve_chan, confidence)
    }

    pub fn pns_estimator(&self) -> PnsEstimator {
        self.pns_estimator
    }
    pub fn eve_chan(&self) -> f64 {
        self.eve_chan
    }
    pub fn confidence(&self) -> f64 {
        self.confidence
    }
}

impl Default for EavesdropperModel {
    fn default() -> Self {
        Self::mark2_jan2004()
    }
}

/// Sifted key rate (bits/s) and quantum bit error rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftedResult {
    pub rate: f64,
    pub qber: f64,
}

/// Pulses per second available for key bits.
pub fn source_rate(link: &LinkParameters) -> f64 {
    link.pulse_rate * link.duty_cycle
}

/// Probability that at least one of several independent events occurs.
pub fn prob_or(ps: &[f64]) -> Result<f64> {
    let mut none = 1.0;
    for &p in ps {
        if !Range::PROBABILITY.contains(p) {
            return Err(QkdError::domain("prob_or", p, "[0, 1]"));
        }
        none *= 1.0 - p;
    }
    Ok(1.0 - none)
}

/// [`prob_or`] for arguments already known to be probabilities.
pub(crate) fn prob_or_unchecked<const N: usize>(ps: [f64; N]) -> f64 {
    1.0 - ps.iter().fold(1.0, |acc, p| acc * (1.0 - p))
}
