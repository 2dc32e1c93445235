//! Distilled secret-key rate model for a fiber BB84 link with a
//! weak-coherent source, and the search for the mean photon number that
//! maximizes it.
//!
//! The pipeline runs physics ([`link`]) → error correction and privacy
//! amplification ([`distill`]) → sweeps and optimization ([`optimize`]).
//! [`montecarlo`] simulates the link pulse by pulse as a cross-check of the
//! analytic physics, and [`cli`] wires everything to config files and CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distill;
pub mod error;
pub mod link;
pub mod montecarlo;
pub mod numerics;
pub mod optimize;
pub mod params;

pub use distill::{distill, distilled_rate, RateBreakdown};
pub use error::{QkdError, Result};
pub use link::{detection_probabilities, sifted_rate, DetectionProbabilities};
pub use optimize::{OptimalMuPoint, OptimumKind, RateCurve, RateSurface};
pub use params::{
    prob_or, source_rate, EavesdropperModel, EntropyEstimator, LinkParameters, PnsEstimator,
    ProtocolParameters, SiftType, SiftedResult, PRESET_NAME,
};
