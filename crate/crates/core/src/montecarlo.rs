//! Pulse-by-pulse simulation of the link, used to check the analytic
//! sifted rate and QBER.
//!
//! Pulses are split into fixed chunks of [`CHUNK_PULSES`]. Chunk `i` draws
//! from a ChaCha8 generator seeded with the run seed and switched to stream
//! `i`, so totals depend only on the seed and the pulse count, not on how
//! many threads ran the chunks. Afterpulse memory does not cross chunk
//! boundaries. A pulse that fires both detectors is sifted with a random
//! bit value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{QkdError, Result};
use crate::link::detection_probabilities;
use crate::params::{source_rate, LinkParameters, SiftedResult};

pub const CHUNK_PULSES: u64 = 1 << 20;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationResult {
    pub n_pulses: u64,
    pub sifted_count: u64,
    pub error_count: u64,
    /// Sifted bits/s.
    pub estimated_rate: f64,
    pub estimated_qber: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    sifted: u64,
    errors: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            sifted: self.sifted + o.sifted,
            errors: self.errors + o.errors,
        }
    }
}

/// Per-photon and per-gate probabilities derived from the link.
struct PulseModel {
    photons: Option<Poisson<f64>>,
    /// A photon reaches Bob and is detected.
    p_detect: f64,
    /// A detected photon in the matched basis lands on the correct detector.
    p_correct_arm: f64,
    p_dark: [f64; 2],
    p_after: [f64; 2],
}

impl PulseModel {
    fn new(link: &LinkParameters) -> Result<Self> {
        let mu = link.mean_photon_number();
        let photons =
            if mu > 0.0 {
                Some(Poisson::new(mu).map_err(|e| {
                    QkdError::Convergence(format!("photon number distribution: {e}"))
                })?)
            } else {
                None
            };
        let eff = link.det_eff();
        let leak_frac = link.det_leak();
        let eff_mean = (eff[0] + eff[1]) / 2.0;
        let leak = if eff_mean > 0.0 {
            (eff[0] * leak_frac[0] + eff[1] * leak_frac[1]) / (2.0 * eff_mean)
        } else {
            0.0
        };
        let loss_db = link.fiber_length() * link.fiber_loss() + link.rx_loss();
        let transmission = 10f64.powf(-loss_db / 10.0);
        let p_detect = (eff_mean * transmission * (1.0 + 2.0 * leak)
            / (1.0 + leak_frac[0] + leak_frac[1]))
            .min(1.0);
        let half = link.resid_phase() / 2.0;
        Ok(PulseModel {
            photons,
            p_detect,
            p_correct_arm: (leak + half.cos().powi(2)) / (1.0 + 2.0 * leak),
            p_dark: link.p_dark(),
            p_after: link.p_after(),
        })
    }

    fn run_chunk(&self, seed: u64, chunk: u64, pulses: u64) -> Counts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let mut counts = Counts::default();
        let mut last_click = [false; 2];

        for _ in 0..pulses {
            let n_photons = match &self.photons {
                Some(dist) => dist.sample(&mut rng) as u64,
                None => 0,
            };
            let bit = usize::from(rng.random::<bool>());
            let matched = rng.random::<bool>();

            let mut click = [false; 2];
            for _ in 0..n_photons {
                if rng.random::<f64>() >= self.p_detect {
                    continue;
                }
                let target = if matched {
                    if rng.random::<f64>() < self.p_correct_arm {
                        bit
                    } else {
                        1 - bit
                    }
                } else {
                    usize::from(rng.random::<bool>())
                };
                click[target] = true;
            }
            for det in 0..2 {
                if rng.random::<f64>() < self.p_dark[det] {
                    click[det] = true;
                }
                if last_click[det] && rng.random::<f64>() < self.p_after[det] {
                    click[det] = true;
                }
            }

            if matched && (click[0] || click[1]) {
                counts.sifted += 1;
                let wrong = match (click[bit], click[1 - bit]) {
                    (true, true) => rng.random::<bool>(),
                    (correct, _) => !correct,
                };
                if wrong {
                    counts.errors += 1;
                }
            }
            last_click = click;
        }
        counts
    }
}

/// Simulates `n_pulses` pulses in parallel.
pub fn simulate_link(link: &LinkParameters, n_pulses: u64, seed: u64) -> Result<SimulationResult> {
    simulate_link_with(link, n_pulses, seed, Execution::Parallel)
}

pub fn simulate_link_with(
    link: &LinkParameters,
    n_pulses: u64,
    seed: u64,
    execution: Execution,
) -> Result<SimulationResult> {
    if n_pulses == 0 {
        return Err(QkdError::domain("simulate_link", 0.0, "n_pulses >= 1"));
    }
    let model = PulseModel::new(link)?;
    let n_chunks = n_pulses.div_ceil(CHUNK_PULSES);
    let chunk_len = |i: u64| CHUNK_PULSES.min(n_pulses - i * CHUNK_PULSES);

    let counts = match execution {
        Execution::Parallel => (0..n_chunks)
            .into_par_iter()
            .map(|i| model.run_chunk(seed, i, chunk_len(i)))
            .reduce(Counts::default, |a, b| a + b),
        Execution::Sequential => (0..n_chunks)
            .map(|i| model.run_chunk(seed, i, chunk_len(i)))
            .fold(Counts::default(), |a, b| a + b),
    };

    Ok(SimulationResult {
        n_pulses,
        sifted_count: counts.sifted,
        error_count: counts.errors,
        estimated_rate: counts.sifted as f64 * source_rate(link) / n_pulses as f64,
        estimated_qber: if counts.sifted == 0 {
            0.0
        } else {
            counts.errors as f64 / counts.sifted as f64
        },
        seed,
    })
}

/// Distance between a simulation and the analytic model, in standard
/// deviations, plus 95% interval coverage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub analytic: SiftedResult,
    /// (simulated − analytic) sifted count over its binomial σ.
    pub rate_sigmas: f64,
    /// (simulated − analytic) QBER over its binomial σ.
    pub qber_sigmas: f64,
    /// Analytic sifting probability inside the empirical 95% interval.
    pub rate_in_95: bool,
    /// Analytic QBER inside the empirical 95% interval.
    pub qber_in_95: bool,
}

pub fn compare_with_analytic(sim: &SimulationResult, link: &LinkParameters) -> Agreement {
    let analytic = crate::link::sifted_rate(link);
    let n = sim.n_pulses as f64;
    let p = detection_probabilities(link).p_valid / 2.0;
    let p_hat = sim.sifted_count as f64 / n;
    let rate_sd = (n * p * (1.0 - p)).sqrt();
    let rate_sigmas = z_score(sim.sifted_count as f64 - n * p, rate_sd);
    let rate_half = Z95 * (p_hat * (1.0 - p_hat) / n).sqrt();

    let m = sim.sifted_count as f64;
    let (qber_sigmas, qber_in_95) = if sim.sifted_count == 0 {
        (0.0, analytic.qber == 0.0)
    } else {
        let q = analytic.qber;
        let q_hat = sim.estimated_qber;
        let sd = (q * (1.0 - q) / m).sqrt();
        let half = Z95 * (q_hat * (1.0 - q_hat) / m).sqrt();
        (z_score(q_hat - q, sd), (q - q_hat).abs() <= half)
    };
    Agreement {
        analytic,
        rate_sigmas,
        qber_sigmas,
        rate_in_95: (p - p_hat).abs() <= rate_half,
        qber_in_95,
    }
}

fn z_score(diff: f64, sd: f64) -> f64 {
    if sd > 0.0 {
        diff / sd
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}
