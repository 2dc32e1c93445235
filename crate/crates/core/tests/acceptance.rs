//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::time::{Duration, Instant};

use qkdrate_core::distill::{entropy::estimate, entropy_bennett, MyersState};
use qkdrate_core::montecarlo::{compare_with_analytic, simulate_link};
use qkdrate_core::numerics::{binom_tail_deficit, erf_inv, inv_beta_approx, Bracket};
use qkdrate_core::optimize::{
    compare_estimates, linspace, optimal_mu, optimal_mu_vs_distance, DEFAULT_MU_BRACKET,
    DEFAULT_MU_GRID, DEFAULT_TOL,
};
use qkdrate_core::{
    distilled_rate, sifted_rate, EavesdropperModel, EntropyEstimator, LinkParameters,
    ProtocolParameters,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn defaults() -> (LinkParameters, ProtocolParameters, EavesdropperModel) {
    (
        LinkParameters::default(),
        ProtocolParameters::default(),
        EavesdropperModel::default(),
    )
}

fn bracket() -> Bracket {
    Bracket::new(DEFAULT_MU_BRACKET.0, DEFAULT_MU_BRACKET.1).unwrap()
}

fn optimal_mu_at_defaults() -> Outcome {
    let (link, proto, eve) = defaults();
    match optimal_mu(&link, &proto, &eve, bracket(), DEFAULT_TOL) {
        Ok(p) => {
            let mu = p.mu_opt.unwrap_or(f64::NAN);
            outcome(
                (mu - 1.15).abs() <= 0.05,
                format!("mu_opt = {mu:.4} at {} km (want 1.15 ± 0.05)", p.distance),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn throughput_ratio() -> Outcome {
    let (link, proto, eve) = defaults();
    let rate = |mu: f64| distilled_rate(&link.with_mean_photon_number(mu).unwrap(), &proto, &eve);
    match (rate(1.1), rate(0.1)) {
        (Ok(hi), Ok(lo)) => {
            let ratio = hi / lo;
            outcome(
                (8.0..=12.0).contains(&ratio),
                format!("rate(1.1)/rate(0.1) = {hi:.2}/{lo:.2} = {ratio:.3} (want [8, 12])"),
            )
        }
        (Err(e), _) | (_, Err(e)) => outcome(false, format!("error: {e}")),
    }
}

fn optimal_mu_vs_distance_band() -> Outcome {
    let (link, proto, eve) = defaults();
    let grid = linspace(0.0, 50.0, 51);
    match optimal_mu_vs_distance(&link, &proto, &eve, &grid, bracket(), DEFAULT_TOL) {
        Ok(points) => {
            let mus: Vec<f64> = points
                .iter()
                .map(|p| p.mu_opt.unwrap_or(f64::NAN))
                .collect();
            let lo = mus.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = mus.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let in_band = mus.iter().all(|m| (0.95..=1.25).contains(m));
            let spread = (hi - lo) / lo;
            outcome(
                in_band && spread <= 0.25,
                format!(
                    "mu_opt over 0-50 km in [{lo:.4}, {hi:.4}] (want within [0.95, 1.25]), \
                     spread {spread:.3} (want <= 0.25)"
                ),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn estimator_ordering() -> Outcome {
    let (link, proto, eve) = defaults();
    let grid = linspace(DEFAULT_MU_GRID.0, DEFAULT_MU_GRID.1, DEFAULT_MU_GRID.2);
    let curves = match compare_estimates(&link, &proto, &eve, &grid) {
        Ok(c) => c,
        Err(e) => return outcome(false, format!("error: {e}")),
    };
    let get = |c: usize, i: usize| curves[c].rates[i].unwrap_or(f64::NAN);
    let mut orig_nonzero_above_one = 0;
    let mut rev_below_orig = 0;
    let mut gh_above_rev = 0;
    let mut gh_not_strictly_below = 0;
    let mut positive_rev = 0;
    for (i, &mu) in grid.iter().enumerate() {
        let (orig, rev, gh) = (get(0, i), get(1, i), get(2, i));
        if mu >= 1.0 && orig != 0.0 {
            orig_nonzero_above_one += 1;
        }
        if !(rev >= orig) {
            rev_below_orig += 1;
        }
        if !(gh <= rev) {
            gh_above_rev += 1;
        }
        if rev > 0.0 {
            positive_rev += 1;
            if !(gh < rev) {
                gh_not_strictly_below += 1;
            }
        }
    }
    let pass = orig_nonzero_above_one == 0
        && rev_below_orig == 0
        && gh_above_rev == 0
        && gh_not_strictly_below == 0;
    outcome(
        pass,
        format!(
            "{} points: original nonzero at mu>=1: {orig_nonzero_above_one}, \
             revised<original: {rev_below_orig}, GH>revised: {gh_above_rev}, \
             GH not strictly below revised where revised>0 ({positive_rev} pts): \
             {gh_not_strictly_below}",
            grid.len()
        ),
    )
}

fn monte_carlo_agreement() -> Outcome {
    let link = LinkParameters::default();
    let mut worst_sigma: f64 = 0.0;
    let mut rate_in = 0;
    let mut qber_in = 0;
    let mut beyond_4_sigma = 0;
    for seed in 1..=20u64 {
        let sim = match simulate_link(&link, 10_000_000, seed) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        let a = compare_with_analytic(&sim, &link);
        let sigma = a.rate_sigmas.abs().max(a.qber_sigmas.abs());
        worst_sigma = worst_sigma.max(sigma);
        if sigma > 4.0 {
            beyond_4_sigma += 1;
        }
        rate_in += usize::from(a.rate_in_95);
        qber_in += usize::from(a.qber_in_95);
    }
    outcome(
        beyond_4_sigma == 0 && rate_in >= 18 && qber_in >= 18,
        format!(
            "20 seeds x 1e7 pulses: worst |z| = {worst_sigma:.2} (want <= 4), \
             rate in 95% CI {rate_in}/20, QBER in 95% CI {qber_in}/20 (want >= 18)"
        ),
    )
}

fn numerics_suite() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    // erf_inv round trip
    let mut worst_erf: f64 = 0.0;
    let edge = 1.0 - 1e-9;
    let n = 200_000;
    for i in 0..=n {
        let x = -edge + 2.0 * edge * i as f64 / n as f64;
        let y = erf_inv(x).unwrap();
        worst_erf = worst_erf.max((libm::erf(y) - x).abs());
    }
    for x in [edge, -edge, 1e-300, -1e-300, 0.0] {
        let y = erf_inv(x).unwrap();
        worst_erf = worst_erf.max((libm::erf(y) - x).abs());
    }
    pass &= worst_erf <= 1e-10;
    notes.push(format!(
        "erf_inv round trip max err {worst_erf:.2e} (want <= 1e-10)"
    ));

    // binomial tails against exact arithmetic
    let mut worst_rel: f64 = 0.0;
    let mut where_worst = (0, 0, 0.0);
    for (a, d) in [(1u64, 100u64), (1, 10), (1, 3)] {
        let p = a as f64 / d as f64;
        for n in 1..=1000u64 {
            let exact = common::exact_binomial_cdf(n, a, d);
            for k in 0..=n {
                let got = binom_tail_deficit(n, k, p, 0.0).unwrap();
                let want = exact[k as usize];
                let rel = ((got - want) / want).abs();
                if !(rel <= worst_rel) {
                    worst_rel = rel;
                    where_worst = (n, k, p);
                }
            }
        }
    }
    pass &= worst_rel <= 1e-6;
    notes.push(format!(
        "binomial tails max rel err {worst_rel:.2e} at n={} k={} p={:.4} (want <= 1e-6)",
        where_worst.0, where_worst.1, where_worst.2
    ));

    // symmetric inverse beta
    let mut worst_beta: f64 = 0.0;
    for i in 1..=400 {
        let a = 0.5 + i as f64 * 0.25;
        worst_beta = worst_beta.max((inv_beta_approx(a, a, 0.5).unwrap() - 0.5).abs());
    }
    pass &= worst_beta <= 1e-12;
    notes.push(format!(
        "inv_beta_approx(a,a,0.5) max dev {worst_beta:.2e} (want <= 1e-12)"
    ));

    outcome(pass, notes.join("; "))
}

fn entropy_properties() -> Outcome {
    let b = 4096u32;
    let c = 1e-6;
    let mut pass = true;
    let mut notes = Vec::new();

    for est in EntropyEstimator::ALL {
        let mut prev = f64::INFINITY;
        let mut violations = 0;
        let mut error = None;
        for i in 0..=819 {
            let qber = i as f64 / b as f64;
            match estimate(*est, b, qber, c) {
                Ok(v) => {
                    if v.raw_bits > prev {
                        violations += 1;
                    }
                    prev = v.raw_bits;
                }
                Err(e) => error = Some(e),
            }
        }
        pass &= violations == 0 && error.is_none();
        notes.push(match error {
            Some(e) => format!("{est}: error {e}"),
            None => format!("{est} increases {violations} times on e/b in [0, 0.2]"),
        });
    }

    let zero = entropy_bennett(b as f64, 0.0, c).unwrap();
    let want = b as f64 + 2.0 * c.log2();
    pass &= zero == want;
    notes.push(format!("Bennett(e=0) = {zero} vs b + 2 log2 c = {want}"));

    let mut worst: f64 = 0.0;
    for n in [16u64, 100, 1000, 4096, 65536] {
        for conf in [1e-3, 1e-6, 1e-9] {
            let got = MyersState::solve(n, 0, conf).unwrap().p_error;
            let want = 1.0 - conf.powf(1.0 / n as f64);
            worst = worst.max(((got - want) / want).abs());
        }
    }
    pass &= worst <= 1e-9;
    notes.push(format!("Myers k=0 max rel err {worst:.2e} (want <= 1e-9)"));
    outcome(pass, notes.join("; "))
}

fn golden_sifted_rate() -> Outcome {
    let s = sifted_rate(&LinkParameters::default());
    let (oracle_rate, oracle_qber) = common::sifted_oracle(&common::PRESET);
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let worst = rel(s.rate, common::GOLDEN_SIFTED_RATE)
        .max(rel(s.qber, common::GOLDEN_QBER))
        .max(rel(oracle_rate, common::GOLDEN_SIFTED_RATE))
        .max(rel(oracle_qber, common::GOLDEN_QBER));
    outcome(
        worst <= 1e-9,
        format!(
            "rate {} (golden {}), qber {} (golden {}), max rel dev incl. oracle {worst:.2e} \
             (want <= 1e-9)",
            s.rate,
            common::GOLDEN_SIFTED_RATE,
            s.qber,
            common::GOLDEN_QBER
        ),
    )
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(u32, &str, Option<Duration>, Check); 8] = [
        (
            1,
            "optimal mu at defaults",
            Some(Duration::from_secs(1)),
            optimal_mu_at_defaults,
        ),
        (
            2,
            "throughput gain mu=1.1 vs mu=0.1",
            None,
            throughput_ratio,
        ),
        (
            3,
            "optimal mu vs distance",
            Some(Duration::from_secs(30)),
            optimal_mu_vs_distance_band,
        ),
        (
            4,
            "multi-photon estimator ordering",
            None,
            estimator_ordering,
        ),
        (
            5,
            "Monte-Carlo vs analytic physics",
            Some(Duration::from_secs(60)),
            monte_carlo_agreement,
        ),
        (6, "numerics suite", None, numerics_suite),
        (7, "entropy estimator properties", None, entropy_properties),
        (8, "sifted-rate golden values", None, golden_sifted_rate),
    ];

    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let mut result = check();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                result.pass = false;
            }
            result.detail.push_str(&format!(
                "; runtime {:.3} s (limit {} s)",
                elapsed.as_secs_f64(),
                limit.as_secs()
            ));
        } else {
            result
                .detail
                .push_str(&format!("; runtime {:.3} s", elapsed.as_secs_f64()));
        }
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {id}: {name}: {}", result.detail);
        if !result.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
