//! `key = value` scenario files.
//!
//! Keys are camelCase model variable names (`mpn`, `fiberLength`,
//! `pDark0`, ...). Anything not given keeps the `mark2-jan2004` preset
//! value. `#` starts a comment; a trailing `;` and
//! quotes around enumerated values are accepted.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use crate::optimize::{DEFAULT_DISTANCE_GRID, DEFAULT_MU_BRACKET, DEFAULT_MU_GRID, DEFAULT_TOL};
use crate::params::{
    EavesdropperModel, EntropyEstimator, LinkParameters, PnsEstimator, ProtocolParameters, Range,
    SiftType, PRESET_NAME,
};

pub const DEFAULT_PULSES: u64 = 10_000_000;
pub const DEFAULT_SEED: u64 = 1;

/// A rejected config entry. `line` is 0 for values that came from command
/// line flags or from cross-field checks on defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "`{}`: {}", self.key, self.message)
        } else {
            write!(f, "line {}: `{}`: {}", self.line, self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Grid, bracket and Monte-Carlo settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_steps: usize,
    pub dist_min: f64,
    pub dist_max: f64,
    pub dist_steps: usize,
    /// Search bracket for the optimal μ.
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub tol: f64,
    pub n_pulses: u64,
    pub seed: u64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            mu_min: DEFAULT_MU_GRID.0,
            mu_max: DEFAULT_MU_GRID.1,
            mu_steps: DEFAULT_MU_GRID.2,
            dist_min: DEFAULT_DISTANCE_GRID.0,
            dist_max: DEFAULT_DISTANCE_GRID.1,
            dist_steps: DEFAULT_DISTANCE_GRID.2,
            mu_lo: DEFAULT_MU_BRACKET.0,
            mu_hi: DEFAULT_MU_BRACKET.1,
            tol: DEFAULT_TOL,
            n_pulses: DEFAULT_PULSES,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputSettings {
    pub path: Option<PathBuf>,
    pub plot: bool,
}

/// Everything one CLI invocation needs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioConfig {
    pub link: LinkParameters,
    pub proto: ProtocolParameters,
    pub eve: EavesdropperModel,
    pub sweep: SweepSettings,
    pub output: OutputSettings,
}

/// Flat, not yet cross-checked view of every key.
#[derive(Debug, Clone)]
struct Raw {
    pulse_rate: f64,
    duty_cycle: f64,
    mpn: f64,
    fiber_length: f64,
    fiber_loss: f64,
    rx_loss: f64,
    resid_phase: f64,
    det_eff: [f64; 2],
    det_leak: [f64; 2],
    p_dark: [f64; 2],
    p_after: [f64; 2],
    block_size: u32,
    n_edac_sets: u32,
    est_type: EntropyEstimator,
    sift_type: SiftType,
    confidence: f64,
    pns_type: PnsEstimator,
    eve_chan: f64,
    sweep: SweepSettings,
    output: OutputSettings,
}

impl Raw {
    fn from_config(c: &ScenarioConfig) -> Self {
        Raw {
            pulse_rate: c.link.pulse_rate(),
            duty_cycle: c.link.duty_cycle(),
            mpn: c.link.mean_photon_number(),
            fiber_length: c.link.fiber_length(),
            fiber_loss: c.link.fiber_loss(),
            rx_loss: c.link.rx_loss(),
            resid_phase: c.link.resid_phase(),
            det_eff: c.link.det_eff(),
            det_leak: c.link.det_leak(),
            p_dark: c.link.p_dark(),
            p_after: c.link.p_after(),
            block_size: c.proto.block_size(),
            n_edac_sets: c.proto.n_edac_sets(),
            est_type: c.proto.entropy_estimator(),
            sift_type: c.proto.sift_type(),
            confidence: c.proto.confidence(),
            pns_type: c.eve.pns_estimator(),
            eve_chan: c.eve.eve_chan(),
            sweep: c.sweep.clone(),
            output: c.output.clone(),
        }
    }
}

/// Every recognized key, in emission order.
pub const KEYS: &[&str] = &[
    "pulseRate",
    "dutyCycle",
    "mpn",
    "fiberLength",
    "fiberLoss",
    "rxLoss",
    "residPhaseDeg",
    "detEff0",
    "detEff1",
    "detLeak0",
    "detLeak1",
    "pDark0",
    "pDark1",
    "pAfter0",
    "pAfter1",
    "blockSize",
    "nEdacSets",
    "estType",
    "siftType",
    "confidence",
    "pnsType",
    "eveChan",
    "muMin",
    "muMax",
    "muSteps",
    "distMin",
    "distMax",
    "distSteps",
    "muLo",
    "muHi",
    "tol",
    "nPulses",
    "seed",
    "out",
    "plot",
];

fn real(key: &str, line: usize, value: &str, range: Range) -> Result<f64, ConfigError> {
    let v: f64 = value.parse().map_err(|_| ConfigError {
        line,
        key: key.to_string(),
        message: format!(
            "cannot parse `{value}` as a number (legal range {})",
            range.label
        ),
    })?;
    if range.contains(v) {
        Ok(v)
    } else {
        Err(ConfigError {
            line,
            key: key.to_string(),
            message: format!("{v} outside legal range {}", range.label),
        })
    }
}

fn integer<T: std::str::FromStr>(
    key: &str,
    line: usize,
    value: &str,
    min: u64,
    range: &str,
) -> Result<T, ConfigError> {
    let err = || ConfigError {
        line,
        key: key.to_string(),
        message: format!("`{value}` is not an integer in {range}"),
    };
    let v: u64 = value.parse().map_err(|_| err())?;
    if v < min {
        return Err(err());
    }
    value.parse().map_err(|_| err())
}

fn named<T: std::str::FromStr<Err = String>>(
    key: &str,
    line: usize,
    value: &str,
) -> Result<T, ConfigError> {
    value.parse().map_err(|legal: String| ConfigError {
        line,
        key: key.to_string(),
        message: format!("`{value}`: {legal}"),
    })
}

fn boolean(key: &str, line: usize, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(ConfigError {
            line,
            key: key.to_string(),
            message: format!("`{value}` is not a boolean (true/false)"),
        }),
    }
}

fn set(raw: &mut Raw, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
    let p = Range::PROBABILITY;
    match key {
        "pulseRate" => raw.pulse_rate = real(key, line, value, Range::POSITIVE)?,
        "dutyCycle" => raw.duty_cycle = real(key, line, value, p)?,
        "mpn" => raw.mpn = real(key, line, value, Range::NON_NEGATIVE)?,
        "fiberLength" => raw.fiber_length = real(key, line, value, Range::NON_NEGATIVE)?,
        "fiberLoss" => raw.fiber_loss = real(key, line, value, Range::NON_NEGATIVE)?,
        "rxLoss" => raw.rx_loss = real(key, line, value, Range::NON_NEGATIVE)?,
        "residPhaseDeg" => {
            let deg = real(
                key,
                line,
                value,
                Range {
                    min: -360.0,
                    max: 360.0,
                    min_exclusive: false,
                    max_exclusive: false,
                    label: "[-360, 360]",
                },
            )?;
            raw.resid_phase = deg.to_radians();
        }
        "detEff0" => raw.det_eff[0] = real(key, line, value, p)?,
        "detEff1" => raw.det_eff[1] = real(key, line, value, p)?,
        "detLeak0" => raw.det_leak[0] = real(key, line, value, p)?,
        "detLeak1" => raw.det_leak[1] = real(key, line, value, p)?,
        "pDark0" => raw.p_dark[0] = real(key, line, value, p)?,
        "pDark1" => raw.p_dark[1] = real(key, line, value, p)?,
        "pAfter0" => raw.p_after[0] = real(key, line, value, p)?,
        "pAfter1" => raw.p_after[1] = real(key, line, value, p)?,
        "blockSize" => raw.block_size = integer(key, line, value, 1, "[1, 4294967295]")?,
        "nEdacSets" => raw.n_edac_sets = integer(key, line, value, 0, "[0, 4294967295]")?,
        "estType" => raw.est_type = named(key, line, value)?,
        "siftType" => raw.sift_type = named(key, line, value)?,
        "confidence" => raw.confidence = real(key, line, value, Range::OPEN_UNIT)?,
        "pnsType" => raw.pns_type = named(key, line, value)?,
        "eveChan" => raw.eve_chan = real(key, line, value, p)?,
        "muMin" => raw.sweep.mu_min = real(key, line, value, Range::NON_NEGATIVE)?,
        "muMax" => raw.sweep.mu_max = real(key, line, value, Range::NON_NEGATIVE)?,
        "muSteps" => raw.sweep.mu_steps = integer(key, line, value, 1, "[1, inf)")?,
        "distMin" => raw.sweep.dist_min = real(key, line, value, Range::NON_NEGATIVE)?,
        "distMax" => raw.sweep.dist_max = real(key, line, value, Range::NON_NEGATIVE)?,
        "distSteps" => raw.sweep.dist_steps = integer(key, line, value, 1, "[1, inf)")?,
        "muLo" => raw.sweep.mu_lo = real(key, line, value, Range::NON_NEGATIVE)?,
        "muHi" => raw.sweep.mu_hi = real(key, line, value, Range::POSITIVE)?,
        "tol" => raw.sweep.tol = real(key, line, value, Range::POSITIVE)?,
        "nPulses" => raw.sweep.n_pulses = integer(key, line, value, 1, "[1, inf)")?,
        "seed" => raw.sweep.seed = integer(key, line, value, 0, "[0, 2^64)")?,
        "out" => {
            raw.output.path = if value.is_empty() {
                None
            } else {
                Some(PathBuf::from(value))
            }
        }
        "plot" => raw.output.plot = boolean(key, line, value)?,
        _ => {
            return Err(ConfigError {
                line,
                key: key.to_string(),
                message: "unknown key".to_string(),
            })
        }
    }
    Ok(())
}

fn finish(raw: Raw, lines: &HashMap<String, usize>) -> Result<ScenarioConfig, ConfigError> {
    let line_of = |key: &str| lines.get(key).copied().unwrap_or(0);
    let cross = |key: &str, message: String| ConfigError {
        line: line_of(key),
        key: key.to_string(),
        message,
    };
    let s = &raw.sweep;
    if s.mu_steps > 1 && !(s.mu_min < s.mu_max) {
        return Err(cross("muMax", format!("must exceed muMin = {}", s.mu_min)));
    }
    if s.dist_steps > 1 && !(s.dist_min < s.dist_max) {
        return Err(cross(
            "distMax",
            format!("must exceed distMin = {}", s.dist_min),
        ));
    }
    if !(s.mu_lo < s.mu_hi) {
        return Err(cross("muHi", format!("must exceed muLo = {}", s.mu_lo)));
    }

    let link = LinkParameters::builder()
        .pulse_rate(raw.pulse_rate)
        .duty_cycle(raw.duty_cycle)
        .mean_photon_number(raw.mpn)
        .fiber_length(raw.fiber_length)
        .fiber_loss(raw.fiber_loss)
        .rx_loss(raw.rx_loss)
        .resid_phase(raw.resid_phase)
        .det_eff(raw.det_eff)
        .det_leak(raw.det_leak)
        .p_dark(raw.p_dark)
        .p_after(raw.p_after)
        .build()
        .map_err(|e| cross("link", e.to_string()))?;
    let proto = ProtocolParameters::new(
        raw.block_size,
        raw.n_edac_sets,
        raw.est_type,
        raw.sift_type,
        raw.confidence,
    )
    .map_err(|e| cross("confidence", e.to_string()))?;
    let eve = EavesdropperModel::new(raw.pns_type, raw.eve_chan, raw.confidence)
        .map_err(|e| cross("eveChan", e.to_string()))?;
    Ok(ScenarioConfig {
        link,
        proto,
        eve,
        sweep: raw.sweep,
        output: raw.output,
    })
}

fn unquote(value: &str) -> &str {
    let v = value.trim().trim_end_matches(';').trim_end();
    for q in ['"', '\''] {
        if v.len() >= 2 && v.starts_with(q) && v.ends_with(q) {
            return &v[1..v.len() - 1];
        }
    }
    v
}

/// Parses a scenario file; missing keys take preset values.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config_with_overrides(text, &[])
}

/// Parses `text`, then applies `overrides` (key, value) pairs as if they
/// were extra lines without a line number.
pub fn parse_config_with_overrides(
    text: &str,
    overrides: &[(&str, String)],
) -> Result<ScenarioConfig, ConfigError> {
    let mut raw = Raw::from_config(&ScenarioConfig::default());
    let mut lines: HashMap<String, usize> = HashMap::new();

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError {
                line,
                key: content.to_string(),
                message: "expected `key = value`".to_string(),
            });
        };
        let key = key.trim();
        if let Some(first) = lines.get(key) {
            return Err(ConfigError {
                line,
                key: key.to_string(),
                message: format!("duplicate key (first set on line {first})"),
            });
        }
        set(&mut raw, key, unquote(value), line)?;
        lines.insert(key.to_string(), line);
    }
    for (key, value) in overrides {
        set(&mut raw, key, unquote(value), 0)?;
        lines.insert(key.to_string(), 0);
    }
    finish(raw, &lines)
}

/// Degrees value whose conversion back to radians is exactly `radians`.
fn degrees_for(radians: f64) -> f64 {
    let mut d = radians.to_degrees();
    if d.to_radians() == radians {
        return d;
    }
    for candidate in [d.next_up(), d.next_down()] {
        if candidate.to_radians() == radians {
            return candidate;
        }
    }
    // walk a few ulps in the direction of the error
    for _ in 0..16 {
        d = if d.to_radians() < radians {
            d.next_up()
        } else {
            d.next_down()
        };
        if d.to_radians() == radians {
            break;
        }
    }
    d
}

impl ScenarioConfig {
    /// Renders every key so that [`parse_config`] reproduces this config.
    pub fn to_config_string(&self) -> String {
        let raw = Raw::from_config(self);
        let s = &raw.sweep;
        let mut out = format!("# qkdrate scenario; unlisted keys default to {PRESET_NAME}\n");
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("pulseRate", raw.pulse_rate.to_string());
        push("dutyCycle", raw.duty_cycle.to_string());
        push("mpn", raw.mpn.to_string());
        push("fiberLength", raw.fiber_length.to_string());
        push("fiberLoss", raw.fiber_loss.to_string());
        push("rxLoss", raw.rx_loss.to_string());
        push("residPhaseDeg", degrees_for(raw.resid_phase).to_string());
        push("detEff0", raw.det_eff[0].to_string());
        push("detEff1", raw.det_eff[1].to_string());
        push("detLeak0", raw.det_leak[0].to_string());
        push("detLeak1", raw.det_leak[1].to_string());
        push("pDark0", raw.p_dark[0].to_string());
        push("pDark1", raw.p_dark[1].to_string());
        push("pAfter0", raw.p_after[0].to_string());
        push("pAfter1", raw.p_after[1].to_string());
        push("blockSize", raw.block_size.to_string());
        push("nEdacSets", raw.n_edac_sets.to_string());
        push("estType", raw.est_type.name().to_string());
        push("siftType", raw.sift_type.name().to_string());
        push("confidence", raw.confidence.to_string());
        push("pnsType", raw.pns_type.name().to_string());
        push("eveChan", raw.eve_chan.to_string());
        push("muMin", s.mu_min.to_string());
        push("muMax", s.mu_max.to_string());
        push("muSteps", s.mu_steps.to_string());
        push("distMin", s.dist_min.to_string());
        push("distMax", s.dist_max.to_string());
        push("distSteps", s.dist_steps.to_string());
        push("muLo", s.mu_lo.to_string());
        push("muHi", s.mu_hi.to_string());
        push("tol", s.tol.to_string());
        push("nPulses", s.n_pulses.to_string());
        push("seed", s.seed.to_string());
        if let Some(path) = &raw.output.path {
            push("out", path.display().to_string());
        }
        push("plot", raw.output.plot.to_string());
        out
    }
}
