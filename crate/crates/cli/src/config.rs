//! Experiment configuration: a TOML document with a `version`, shared knobs
//! and one `[experiment]` table tagged by `kind`.
//!
//! ```toml
//! version = 1
//! seed = 0          # optional
//! grid = 4096       # optional quadrature resolution M
//! require_pass = true
//!
//! [experiment]
//! kind = "counterexample"
//! l = 16
//! ```

use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;
use recur_core::averages::IteratePattern;
use recur_core::{Observable, PhasePoint, SetSpec, SystemSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_GRID: u64 = 4096;
pub const DEFAULT_N_CHECKED: u64 = 64;

/// Work guards applied before dispatch.
pub const MAX_HORIZON: u64 = 1 << 30;
pub const MAX_GRID: u64 = 1 << 24;
pub const MAX_GOWERS_WORK: u128 = 1 << 32;
pub const MAX_CUBE_WORK: u128 = 1 << 40;
pub const MAX_WINDOW: u64 = 1 << 28;

fn default_grid() -> u64 {
    DEFAULT_GRID
}

fn default_n_checked() -> u64 {
    DEFAULT_N_CHECKED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub grid: u64,
    #[serde(default)]
    pub require_pass: bool,
    pub experiment: Experiment,
}

/// Where a `Z/N` signal comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalSource {
    /// `[re, im]` pairs.
    Values(Vec<Complex64>),
    /// CSV with columns `index, re, im`.
    File(PathBuf),
    /// Uniform in the unit disc, drawn from the config seed.
    Random(usize),
}

/// Where a finite set `E ⊆ [0, N)` comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum WindowSource {
    Members { window: u64, members: Vec<u64> },
    /// Members or run-length text form.
    File(PathBuf),
    Behrend(u64),
    /// Each element present independently, drawn from the config seed.
    Random { window: u64, density: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    #[default]
    Recursive,
    Spectral,
    CubeSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectralMode {
    Exact,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Multiple ergodic average; pointwise when `point` is set, else its
    /// `L^2` norm by quadrature.
    Average {
        system: SystemSpec,
        observables: Vec<Observable>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pattern: Option<IteratePattern>,
        horizon: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        point: Option<PhasePoint>,
    },
    Gowers {
        signal: SignalSource,
        k: usize,
        #[serde(default)]
        method: NormMethod,
    },
    Scan {
        system: SystemSpec,
        set: SetSpec,
        k: usize,
        eps: f64,
        horizon: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_gap: Option<u64>,
    },
    Behrend {
        l: u64,
    },
    Apcount {
        set: WindowSource,
        k: usize,
    },
    Qc5 {
        set: WindowSource,
    },
    Counterexample {
        l: u64,
        #[serde(default = "default_n_checked")]
        n_checked: u64,
    },
    /// Cube average; integrated over the grid against `base` (default 1)
    /// unless `point` is set.
    Cube {
        system: SystemSpec,
        observables: Vec<Observable>,
        k: usize,
        horizon: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        point: Option<PhasePoint>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<Observable>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower_bound: Option<f64>,
    },
    /// Weyl average of a character along one orbit, compared with its Haar
    /// integral when `tolerance` is set.
    Weyl {
        system: SystemSpec,
        freq: Vec<i64>,
        horizon: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        point: Option<PhasePoint>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance: Option<f64>,
    },
    Multicorrelation {
        system: SystemSpec,
        observable: Observable,
        k: usize,
        n_max: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spectral: Option<SpectralMode>,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Average { .. } => "average",
            Experiment::Gowers { .. } => "gowers",
            Experiment::Scan { .. } => "scan",
            Experiment::Behrend { .. } => "behrend",
            Experiment::Apcount { .. } => "apcount",
            Experiment::Qc5 { .. } => "qc5",
            Experiment::Counterexample { .. } => "counterexample",
            Experiment::Cube { .. } => "cube",
            Experiment::Weyl { .. } => "weyl",
            Experiment::Multicorrelation { .. } => "multicorrelation",
        }
    }
}

/// One problem in a config document; `line` and `column` are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<Issue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Line of the first `key = ...` assignment, if any.
fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        l.trim_start()
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

/// Parse and validate; every guard violation is reported, not just the first.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unzip();
        ConfigError { issues: vec![Issue { line, column, message: e.message().trim().to_string() }] }
    })?;
    let issues: Vec<Issue> = validate(&config)
        .into_iter()
        .map(|(key, message)| Issue { line: key_line(text, key), column: None, message })
        .collect();
    if issues.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError { issues })
    }
}

/// Guard violations as `(key, message)`.
pub fn validate(config: &ExperimentConfig) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    let mut check = |ok: bool, key: &'static str, msg: String| {
        if !ok {
            out.push((key, msg));
        }
    };
    check(
        config.version == CONFIG_VERSION,
        "version",
        format!("unsupported config version {} (expected {CONFIG_VERSION})", config.version),
    );
    check(
        (1..=MAX_GRID).contains(&config.grid),
        "grid",
        format!("grid guard: M = {} outside 1..={MAX_GRID}", config.grid),
    );
    let horizon_ok = |n: u64| (1..=MAX_HORIZON).contains(&n);
    match &config.experiment {
        Experiment::Average { observables, pattern, horizon, .. } => {
            let k = pattern.as_ref().map_or(observables.len(), IteratePattern::k);
            check(!observables.is_empty(), "observables", "average needs at least one observable".into());
            check(
                observables.len() == k,
                "pattern",
                format!("{} observables for a {k}-term pattern", observables.len()),
            );
            check(horizon_ok(*horizon), "horizon", format!("horizon guard: N = {horizon} outside 1..={MAX_HORIZON}"));
        }
        Experiment::Gowers { signal, k, .. } => {
            check((1..=5).contains(k), "k", format!("gowers k = {k} outside 1..=5"));
            let n = match signal {
                SignalSource::Values(v) => Some(v.len()),
                SignalSource::Random(n) => Some(*n),
                SignalSource::File(_) => None,
            };
            if let Some(n) = n {
                check(n >= 1, "signal", "empty signal".into());
                let work = (n as u128).checked_pow(*k as u32);
                check(
                    work.is_some_and(|w| w <= MAX_GOWERS_WORK),
                    "k",
                    format!("gowers guard: N^k = {n}^{k} exceeds 2^32"),
                );
            }
        }
        Experiment::Scan { k, eps, horizon, .. } => {
            check((1..=3).contains(k), "k", format!("scan depth k = {k} outside 1..=3"));
            check(eps.is_finite() && *eps > 0.0, "eps", format!("eps = {eps} must be positive"));
            check(horizon_ok(*horizon), "horizon", format!("horizon guard: N = {horizon} outside 1..={MAX_HORIZON}"));
        }
        Experiment::Behrend { l } => {
            check((1..=MAX_WINDOW).contains(l), "l", format!("window guard: L = {l} outside 1..={MAX_WINDOW}"));
        }
        Experiment::Apcount { set, k } => {
            check(*k >= 3, "k", format!("progression length k = {k} must be >= 3"));
            check_window(set, &mut check);
        }
        Experiment::Qc5 { set } => check_window(set, &mut check),
        Experiment::Counterexample { l, n_checked } => {
            check(*l >= 1 && *l <= 1 << 12, "l", format!("counterexample guard: L = {l} outside 1..=4096"));
            check(*n_checked >= 1, "n_checked", "n_checked must be >= 1".into());
        }
        Experiment::Cube { observables, k, horizon, point, base, .. } => {
            check(point.is_none() || base.is_none(), "base", "base applies to integrated cube averages only".into());
            check((1..=4).contains(k), "k", format!("cube dimension k = {k} outside 1..=4"));
            let want = (1usize << (*k).min(4)) - 1;
            check(
                observables.len() == want,
                "observables",
                format!("{} observables for a {k}-cube (need {want})", observables.len()),
            );
            let work = (*horizon as u128).checked_pow(*k as u32);
            check(
                *horizon >= 1 && work.is_some_and(|w| w <= MAX_CUBE_WORK),
                "horizon",
                format!("cube guard: N^k = {horizon}^{k} outside 1..=2^40"),
            );
        }
        Experiment::Weyl { horizon, tolerance, .. } => {
            check(horizon_ok(*horizon), "horizon", format!("horizon guard: N = {horizon} outside 1..={MAX_HORIZON}"));
            check(
                tolerance.is_none_or(|t| t.is_finite() && t >= 0.0),
                "tolerance",
                "tolerance must be a finite nonnegative number".into(),
            );
        }
        Experiment::Multicorrelation { k, n_max, .. } => {
            check(*k >= 1, "k", "multicorrelation needs k >= 1".into());
            check(*n_max <= 1 << 20, "n_max", format!("series guard: n_max = {n_max} exceeds 2^20"));
        }
    }
    out
}

fn check_window(set: &WindowSource, check: &mut impl FnMut(bool, &'static str, String)) {
    match set {
        WindowSource::Members { window, members } => {
            check((1..=MAX_WINDOW).contains(window), "window", format!("window guard: N = {window}"));
            check(
                members.iter().all(|m| m < window),
                "members",
                format!("members must lie in [0, {window})"),
            );
        }
        WindowSource::Behrend(l) => check((1..=MAX_WINDOW).contains(l), "behrend", format!("window guard: L = {l}")),
        WindowSource::Random { window, density } => {
            check((1..=MAX_WINDOW).contains(window), "window", format!("window guard: N = {window}"));
            check((0.0..=1.0).contains(density), "density", format!("density {density} outside [0, 1]"));
        }
        WindowSource::File(_) => {}
    }
}

/// Canonical TOML form; `parse_config(&emit_config(c)) == c` for valid `c`
/// whose seed fits in an `i64`.
pub fn emit_config(config: &ExperimentConfig) -> Result<String, toml::ser::Error> {
    toml::to_string(config)
}

/// SHA-256 of the canonical JSON form, as lowercase hex.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
version = 1

[experiment]
kind = "average"
horizon = 100
system = { type = "torus-rotation", alpha = ["golden"] }
observables = [{ type = "character", freq = [1] }]
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.grid, 4096);
        assert_eq!(c.seed, 0);
        assert!(!c.require_pass);
        assert_eq!(c.experiment.kind(), "average");
    }

    #[test]
    fn guard_violation_names_the_guard_and_line() {
        let text = "version = 1\n[experiment]\nkind = \"gowers\"\nk = 5\nsignal = { random = 128 }\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.issues.len(), 1);
        assert_eq!(err.issues[0].line, Some(4));
        assert!(err.issues[0].message.contains("gowers guard"), "{err}");
    }

    #[test]
    fn all_guard_violations_are_listed() {
        let text = "version = 2\ngrid = 0\n[experiment]\nkind = \"scan\"\nk = 4\neps = -1.0\nhorizon = 10\n\
                    system = { type = \"torus-rotation\", alpha = [0.5] }\nset = { type = \"full-space\" }\n";
        let err = parse_config(text).unwrap_err();
        let lines: Vec<_> = err.issues.iter().map(|i| i.line).collect();
        assert_eq!(lines, vec![Some(1), Some(2), Some(5), Some(6)]);
    }

    #[test]
    fn unknown_keys_rejected_with_position() {
        let text = "version = 1\nsed = 3\n[experiment]\nkind = \"behrend\"\nl = 10\n";
        let err = parse_config(text).unwrap_err();
        assert!(err.issues[0].message.contains("unknown field"), "{err}");
        assert_eq!(err.issues[0].line, Some(2));
        let text = "version = 1\n[experiment]\nkind = \"behrend\"\nl = 10\nsize = 3\n";
        assert!(parse_config(text).unwrap_err().to_string().contains("size"));
    }

    #[test]
    fn unknown_kind_and_malformed_numbers() {
        let err = parse_config("version = 1\n[experiment]\nkind = \"fourier\"\n").unwrap_err();
        assert!(err.to_string().contains("fourier"), "{err}");
        let err = parse_config("version = 1\n[experiment]\nkind = \"behrend\"\nl = 1x0\n").unwrap_err();
        assert_eq!(err.issues[0].line, Some(4));
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = parse_config(MINIMAL).unwrap();
        let again = parse_config(&emit_config(&c).unwrap()).unwrap();
        assert_eq!(again, c);
        assert_eq!(config_hash(&again), config_hash(&c));
        assert_eq!(config_hash(&c).len(), 64);
    }
}
