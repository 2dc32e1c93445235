//! Sweeps of the distilled rate over μ and fiber length, and the search for
//! the rate-maximizing mean photon number.
//!
//! Grid points are evaluated in parallel; results are assembled in grid
//! order so the output does not depend on the thread count.

use rayon::prelude::*;

use crate::distill::distilled_rate;
use crate::error::{QkdError, Result};
use crate::numerics::{minimize_scalar, Bracket};
use crate::params::{EavesdropperModel, LinkParameters, PnsEstimator, ProtocolParameters};

/// Points in the coarse scan that localizes the mode before refinement.
pub const DEFAULT_SCAN_POINTS: usize = 32;
pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MU_BRACKET: (f64, f64) = (0.01, 5.0);
pub const DEFAULT_MU_GRID: (f64, f64, usize) = (0.01, 3.0, 150);
pub const DEFAULT_DISTANCE_GRID: (f64, f64, usize) = (0.0, 50.0, 51);

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| {
                if i == steps - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

/// Which quantity a sweep runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    MeanPhotonNumber,
    FiberLength,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::MeanPhotonNumber => "mu",
            Axis::FiberLength => "distance_km",
        }
    }
}

/// A grid point whose rate could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub at: f64,
    pub error: QkdError,
}

/// Distilled rate sampled along one axis. Failed points are `None` in
/// `rates` and listed in `failures`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub axis: Vec<f64>,
    pub rates: Vec<Option<f64>>,
    pub label: String,
    pub failures: Vec<PointFailure>,
}

impl RateCurve {
    fn from_results(axis: Vec<f64>, results: Vec<Result<f64>>, label: String) -> Self {
        let mut failures = Vec::new();
        let rates = results
            .into_iter()
            .zip(&axis)
            .map(|(r, &at)| match r {
                Ok(v) => Some(v),
                Err(error) => {
                    failures.push(PointFailure { at, error });
                    None
                }
            })
            .collect();
        RateCurve {
            axis,
            rates,
            label,
            failures,
        }
    }

    /// The first failed point as an error naming its location.
    pub fn first_failure(&self, axis: Axis) -> Option<QkdError> {
        self.failures
            .first()
            .map(|f| f.error.clone().at(axis.name(), f.at))
    }
}

/// Rate over a distance × μ grid; `rates[i][j]` is at `distances[i]`, `mus[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSurface {
    pub distances: Vec<f64>,
    pub mus: Vec<f64>,
    pub rates: Vec<Vec<Option<f64>>>,
    pub failures: Vec<(f64, f64, QkdError)>,
}

/// How the optimum was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimumKind {
    /// Interior maximum of the rate curve.
    Interior,
    /// The maximizer sits on an end of the search bracket.
    Boundary,
    /// The rate is zero everywhere in the bracket; μ_opt is undefined.
    Degenerate,
}

impl OptimumKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimumKind::Interior => "interior",
            OptimumKind::Boundary => "boundary",
            OptimumKind::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalMuPoint {
    /// Fiber length in km.
    pub distance: f64,
    pub mu_opt: Option<f64>,
    pub rate_opt: f64,
    pub kind: OptimumKind,
}

fn check_grid(name: &'static str, grid: &[f64], min: f64) -> Result<()> {
    for (i, &v) in grid.iter().enumerate() {
        if !(v >= min) || (i > 0 && !(v > grid[i - 1])) {
            return Err(QkdError::domain(
                name,
                v,
                "strictly increasing, non-negative",
            ));
        }
    }
    Ok(())
}

fn rate_at_mu(
    link: &LinkParameters,
    proto: &ProtocolParameters,
    eve: &EavesdropperModel,
    mu: f64,
) -> Result<f64> {
    distilled_rate(&link.with_mean_photon_number(mu)?, proto, eve)
}

/// Distilled rate at each μ of `mu_grid`.
pub fn sweep_mu(
    link: &LinkParameters,
    proto: &ProtocolParameters,
    eve: &EavesdropperModel,
    mu_grid: &[f64],
) -> Result<RateCurve> {
    check_grid("sweep_mu", mu_grid, 0.0)?;
    let results: Vec<Result<f64>> = mu_grid
        .par_iter()
        .map(|&mu| rate_at_mu(link, proto, eve, mu))
        .collect();
    Ok(RateCurve::from_results(
        mu_grid.to_vec(),
        results,
        eve.pns_estimator().name().to_string(),
    ))
}

/// Rate-maximizing μ within `bracket`, to within `tol`.
pub fn optimal_mu(
    link: &LinkParameters,
    proto: &ProtocolParameters,
    eve: &EavesdropperModel,
    bracket: Bracket,
    tol: f64,
) -> Result<OptimalMuPoint> {
    optimal_mu_with_scan(link, proto, eve, bracket, tol, DEFAULT_SCAN_POINTS)
}

/// [`optimal_mu`] with an explicit number of coarse-scan points.
pub fn optimal_mu_with_scan(
    link: &LinkParameters,
    proto: &ProtocolParameters,
    eve: &EavesdropperModel,
    bracket: Bracket,
    tol: f64,
    scan_points: usize,
) -> Result<OptimalMuPoint> {
    if !(bracket.lo >= 0.0) {
        return Err(QkdError::domain(
            "optimal_mu",
            bracket.lo,
            "bracket within [0, inf)",
        ));
    }
    if !(tol > 0.0) {
        return Err(QkdError::domain("optimal_mu", tol, "tol > 0"));
    }
    let scan_points = scan_points.max(3);
    let distance = link.fiber_length();
    let grid = linspace(bracket.lo, bracket.hi, scan_points);
    let rates = grid
        .iter()
        .map(|&mu| rate_at_mu(link, proto, eve, mu).map_err(|e| e.at("mu", mu)))
        .collect::<Result<Vec<f64>>>()?;

    // first index of the largest value keeps ties deterministic
    let (best, &best_rate) =
        rates.iter().enumerate().fold(
            (0, &rates[0]),
            |acc, (i, r)| if *r > *acc.1 { (i, r) } else { acc },
        );
    if best_rate <= 0.0 {
        return Ok(OptimalMuPoint {
            distance,
            mu_opt: None,
            rate_opt: 0.0,
            kind: OptimumKind::Degenerate,
        });
    }

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let mut failure = None;
    let found = minimize_scalar(
        |mu| match rate_at_mu(link, proto, eve, mu) {
            Ok(r) => -r,
            Err(e) => {
                failure.get_or_insert(e.at("mu", mu));
                f64::INFINITY
            }
        },
        Bracket { lo, hi },
        tol,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    let (mu_opt, rate_opt) = if -found.value >= best_rate {
        (found.x, -found.value)
    } else {
        (grid[best], best_rate)
    };
    let kind = if mu_opt - bracket.lo <= tol || bracket.hi - mu_opt <= tol {
        OptimumKind::Boundary
    } else {
        OptimumKind::Interior
    };
    Ok(OptimalMuPoint {
        distance,
        mu_opt: Some(mu_opt),
        rate_opt,
        kind,
    })
}

/// [`optimal_mu`] at each fiber length of `distance_grid`.
pub fn optimal_mu_vs_distance(
    link: &LinkParameters,
    proto: &ProtocolParameters,
    eve: &EavesdropperModel,
    distance_grid: &[f64],
    bracket: Bracket,
    tol: f64,
) -> Result<Vec<OptimalMuPoint>> {
    check_grid("optimal_mu_vs_distance", distance_grid, 0.0)?;
    distance_grid
        .par_iter()
        .map(|&km| {
            let at = link.with_fiber_length(km)?;
            optimal_mu(&at, proto, eve, bracket, tol).map_err(|e| e.at("distance_km", km))
        })
        .collect()
}

/// Rate over every (distance, μ) pair.
pub fn sweep_surface(
    link: &LinkParameters,
    proto: &ProtocolParameters,
    eve: &EavesdropperModel,
    distance_grid: &[f64],
    mu_grid: &[f64],
) -> Result<RateSurface> {
    check_grid("sweep_surface", distance_grid, 0.0)?;
    check_grid("sweep_surface", mu_grid, 0.0)?;
    let rows: Vec<Vec<Result<f64>>> = distance_grid
        .par_iter()
        .map(|&km| {
            mu_grid
                .par_iter()
                .map(|&mu| {
                    let at = link.with_fiber_length(km)?;
                    rate_at_mu(&at, proto, eve, mu)
                })
                .collect()
        })
        .collect();

    let mut failures = Vec::new();
    let rates = rows
        .into_iter()
        .zip(distance_grid)
        .map(|(row, &km)| {
            row.into_iter()
                .zip(mu_grid)
                .map(|(r, &mu)| match r {
                    Ok(v) => Some(v),
                    Err(e) => {
                        failures.push((km, mu, e));
                        None
                    }
                })
                .collect()
        })
        .collect();
    Ok(RateSurface {
        distances: distance_grid.to_vec(),
        mus: mu_grid.to_vec(),
        rates,
        failures,
    })
}

/// One curve per multi-photon estimator on a shared μ grid, in the order
/// original Bennett, revised Bennett, Gilbert-Hamrick.
pub fn compare_estimates(
    link: &LinkParameters,
    proto: &ProtocolParameters,
    eve: &EavesdropperModel,
    mu_grid: &[f64],
) -> Result<Vec<RateCurve>> {
    [
        PnsEstimator::OriginalBennett,
        PnsEstimator::RevisedBennett,
        PnsEstimator::GilbertHamrick,
    ]
    .iter()
    .map(|&pns| sweep_mu(link, proto, &eve.with_pns_estimator(pns), mu_grid))
    .collect()
}
