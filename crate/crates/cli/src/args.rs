//! Command-line surface. Each subcommand builds the same `ExperimentConfig`
//! that `run <config>` would read, so both paths share validation and output.
//!
//! Compact text forms (anything starting with `{` is read as JSON instead):
//!
//! | value | forms |
//! |---|---|
//! | system | `cyclic:N:a`, `rotation:a[,a..]`, `skew:a`, `skew-nil:a`, `skew3:a`, `heisenberg:a1,a2,a3` |
//! | observable | `char:xi[,xi..]`, `arc:lo:hi`, `const:re[,im]` |
//! | set | `arc:lo:hi`, `residues:N:r[,r..]`, `full` |
//! | point | comma list, one entry per axis (residue or coordinate) |
//! | pattern | `linear`, or polynomials `c0,c1,..;c0,c1,..` |
//!
//! Coordinates accept `golden`, `sqrt2-1`, `sqrt3-1`, `0x<raw>`, `p/q` or a decimal.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use recur_core::averages::IteratePattern;
use recur_core::sets::{BitSet, IntervalUnion};
use recur_core::systems::{Axis, NilTranslation};
use recur_core::{Observable, PhasePoint, SetSpec, SkewForm, SystemSpec, TorusCoord};
use serde::de::DeserializeOwned;

use crate::config::{Experiment, ExperimentConfig, NormMethod, SignalSource, SpectralMode, WindowSource, CONFIG_VERSION, DEFAULT_GRID};
use crate::emit::Format;

#[derive(Debug, Parser)]
#[command(name = "recur", version, about = "Deterministic multiple-recurrence experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for random inputs (overrides the config's).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Quadrature resolution M (overrides the config's).
    #[arg(long, global = true)]
    pub grid: Option<u64>,
    /// Exit with status 2 when the experiment's check fails.
    #[arg(long, global = true)]
    pub require_pass: bool,
    /// Print the canonical config instead of running it.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// Comma-separated members (with --window).
    #[arg(long, requires = "window", conflicts_with_all = ["set_file", "behrend", "random"])]
    pub members: Option<String>,
    #[arg(long)]
    pub window: Option<u64>,
    /// Set in members or run-length text form.
    #[arg(long, conflicts_with_all = ["behrend", "random"])]
    pub set_file: Option<PathBuf>,
    /// Behrend set in [0, L).
    #[arg(long, conflicts_with = "random")]
    pub behrend: Option<u64>,
    /// Random set of this density (with --window), drawn from --seed.
    #[arg(long, requires = "window")]
    pub random: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Multiple ergodic average (pointwise with --point, else L^2 norm).
    Average {
        #[arg(long, value_parser = parse_system)]
        system: SystemSpec,
        #[arg(long = "observable", required = true, value_parser = parse_observable)]
        observables: Vec<Observable>,
        #[arg(long, value_parser = parse_pattern)]
        pattern: Option<IteratePattern>,
        #[arg(long)]
        horizon: u64,
        #[arg(long)]
        point: Option<String>,
    },
    /// Gowers uniformity norm of a signal on Z/N.
    Gowers {
        /// CSV with columns index, re, im.
        #[arg(long, required_unless_present = "random", conflicts_with = "random")]
        signal: Option<PathBuf>,
        /// Random signal of this length, drawn from --seed.
        #[arg(long)]
        random: Option<usize>,
        #[arg(short, long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Recursive)]
        method: MethodArg,
    },
    /// Khintchine-type scan of multiple return measures.
    Scan {
        #[arg(long, value_parser = parse_system)]
        system: SystemSpec,
        #[arg(long, value_parser = parse_set)]
        set: SetSpec,
        #[arg(short, long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        horizon: u64,
        /// Fail the check when the good set has a larger gap.
        #[arg(long)]
        max_gap: Option<u64>,
    },
    /// Large 3-AP-free subset of [0, L).
    Behrend {
        #[arg(short, long)]
        l: u64,
    },
    /// Count k-term progressions by common difference.
    Apcount {
        #[command(flatten)]
        set: WindowArgs,
        #[arg(short, long, default_value_t = 3)]
        k: usize,
    },
    /// Search for a quadratic configuration of five terms.
    Qc5 {
        #[command(flatten)]
        set: WindowArgs,
    },
    /// Exact triple-recurrence counterexample at scale L.
    Counterexample {
        #[arg(short, long)]
        l: u64,
        #[arg(long, default_value_t = crate::config::DEFAULT_N_CHECKED)]
        n_checked: u64,
    },
    /// Cube average (integrated unless --point is given).
    Cube {
        #[arg(long, value_parser = parse_system)]
        system: SystemSpec,
        /// 2^k - 1 observables, vertex order by bit pattern.
        #[arg(long = "observable", required = true, value_parser = parse_observable)]
        observables: Vec<Observable>,
        #[arg(short, long)]
        k: usize,
        #[arg(long)]
        horizon: u64,
        #[arg(long)]
        point: Option<String>,
        /// Weight at the zero vertex for integrated averages.
        #[arg(long, value_parser = parse_observable, conflicts_with = "point")]
        base: Option<Observable>,
        #[arg(long)]
        lower_bound: Option<f64>,
    },
    /// Weyl average of a character along an orbit.
    Weyl {
        #[arg(long, value_parser = parse_system)]
        system: SystemSpec,
        /// Comma-separated frequency vector.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        freq: Vec<i64>,
        #[arg(long)]
        horizon: u64,
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Multicorrelation sequence and its spectral decomposition.
    Multicorrelation {
        #[arg(long, value_parser = parse_system)]
        system: SystemSpec,
        #[arg(long, value_parser = parse_observable)]
        observable: Observable,
        #[arg(short, long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        n_max: u64,
        #[arg(long, value_enum)]
        spectral: Option<SpectralArg>,
    },
    /// Run an experiment described by a TOML config file.
    Run { config: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodArg {
    Recursive,
    Spectral,
    CubeSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SpectralArg {
    Exact,
    Empirical,
}

fn json<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_str(s).map_err(|e| e.to_string())
}

fn coord(s: &str) -> Result<TorusCoord, String> {
    s.parse()
}

fn coords(s: &str) -> Result<Vec<TorusCoord>, String> {
    s.split(',').map(coord).collect()
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e| format!("bad number {s:?}: {e}"))
}

fn arc(rest: &str) -> Result<IntervalUnion, String> {
    let (lo, hi) = rest.split_once(':').ok_or_else(|| format!("expected lo:hi, got {rest:?}"))?;
    IntervalUnion::from_f64(num(lo)?, num(hi)?).map_err(|e| e.to_string())
}

pub fn parse_system(s: &str) -> Result<SystemSpec, String> {
    if s.trim_start().starts_with('{') {
        return json(s);
    }
    let (head, rest) = s.split_once(':').ok_or_else(|| format!("expected <kind>:<params>, got {s:?}"))?;
    let sys = match head {
        "cyclic" => {
            let (n, a) = rest.split_once(':').ok_or("expected cyclic:N:a")?;
            SystemSpec::CyclicRotation { modulus: num(n)?, step: num(a)? }
        }
        "rotation" => SystemSpec::TorusRotation { alpha: coords(rest)? },
        "skew" => SystemSpec::SkewTorus { alpha: coord(rest)?, form: SkewForm::Plain },
        "skew-nil" => SystemSpec::SkewTorus { alpha: coord(rest)?, form: SkewForm::Nil },
        "skew3" => SystemSpec::Skew3Torus { alpha: coord(rest)? },
        "heisenberg" => match coords(rest)?.as_slice() {
            &[a1, a2, a3] => SystemSpec::heisenberg(NilTranslation { a1, a2, a3: a3.widen() }),
            _ => return Err("expected heisenberg:a1,a2,a3".into()),
        },
        _ => return Err(format!("unknown system kind {head:?}")),
    };
    sys.validate().map_err(|e| e.to_string())?;
    Ok(sys)
}

pub fn parse_observable(s: &str) -> Result<Observable, String> {
    if s.trim_start().starts_with('{') {
        return json(s);
    }
    let (head, rest) = s.split_once(':').ok_or_else(|| format!("expected <kind>:<params>, got {s:?}"))?;
    match head {
        "char" => Ok(Observable::character(rest.split(',').map(num).collect::<Result<_, _>>()?)),
        "arc" => Ok(Observable::arc_indicator(arc(rest)?)),
        "const" => {
            let (re, im) = rest.split_once(',').unwrap_or((rest, "0"));
            Ok(Observable::constant(Complex64::new(num(re)?, num(im)?)))
        }
        _ => Err(format!("unknown observable kind {head:?}")),
    }
}

pub fn parse_set(s: &str) -> Result<SetSpec, String> {
    if s.trim_start().starts_with('{') {
        return json(s);
    }
    if s == "full" {
        return Ok(SetSpec::FullSpace);
    }
    let (head, rest) = s.split_once(':').ok_or_else(|| format!("expected <kind>:<params>, got {s:?}"))?;
    match head {
        "arc" => Ok(SetSpec::TorusIntervals { coord: 0, set: arc(rest)? }),
        "residues" => {
            let (n, members) = rest.split_once(':').ok_or("expected residues:N:r,r,..")?;
            let members: Vec<u64> = members.split(',').filter(|m| !m.is_empty()).map(num).collect::<Result<_, _>>()?;
            Ok(SetSpec::BitVectorSet { set: BitSet::from_members(num(n)?, &members).map_err(|e| e.to_string())? })
        }
        _ => Err(format!("unknown set kind {head:?}")),
    }
}

pub fn parse_pattern(s: &str) -> Result<IteratePattern, String> {
    if s == "linear" {
        return Err("`linear` is the default; omit --pattern".into());
    }
    let polys = s
        .split(';')
        .map(|p| p.split(',').map(num).collect::<Result<Vec<i64>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    IteratePattern::new(polys).map_err(|e| e.to_string())
}

/// One comma-separated entry per axis: a residue for cyclic axes, a
/// coordinate otherwise.
pub fn parse_point(sys: &SystemSpec, s: &str) -> Result<PhasePoint, String> {
    if s.trim_start().starts_with('{') || s.trim_start().starts_with('"') {
        return json(s);
    }
    let axes = sys.axes();
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != axes.len() {
        return Err(format!("point has {} entries, system has {} axes", parts.len(), axes.len()));
    }
    let raw = parts
        .iter()
        .zip(&axes)
        .map(|(p, axis)| match axis {
            Axis::Cyclic(n) => num::<u64>(p).and_then(|r| {
                if r < *n {
                    Ok(r)
                } else {
                    Err(format!("residue {r} outside Z/{n}"))
                }
            }),
            Axis::Circle => coord(p).map(TorusCoord::raw),
        })
        .collect::<Result<Vec<u64>, _>>()?;
    sys.assemble(&raw).map_err(|e| e.to_string())
}

impl WindowArgs {
    fn source(&self) -> Result<WindowSource, String> {
        if let Some(m) = &self.members {
            let members = m.split(',').filter(|x| !x.trim().is_empty()).map(num).collect::<Result<_, _>>()?;
            return Ok(WindowSource::Members { window: self.window.expect("clap requires window"), members });
        }
        if let Some(path) = &self.set_file {
            return Ok(WindowSource::File(path.clone()));
        }
        if let Some(l) = self.behrend {
            return Ok(WindowSource::Behrend(l));
        }
        if let (Some(density), Some(window)) = (self.random, self.window) {
            return Ok(WindowSource::Random { window, density });
        }
        Err("give one of --members, --set-file, --behrend or --random".into())
    }
}

impl Command {
    /// The experiment this subcommand describes; `None` for `run`.
    pub fn experiment(&self) -> Result<Option<Experiment>, String> {
        let point = |sys: &SystemSpec, p: &Option<String>| p.as_deref().map(|s| parse_point(sys, s)).transpose();
        Ok(Some(match self {
            Command::Average { system, observables, pattern, horizon, point: p } => Experiment::Average {
                point: point(system, p)?,
                system: system.clone(),
                observables: observables.clone(),
                pattern: pattern.clone(),
                horizon: *horizon,
            },
            Command::Gowers { signal, random, k, method } => Experiment::Gowers {
                signal: match (signal, random) {
                    (Some(path), _) => SignalSource::File(path.clone()),
                    (None, Some(n)) => SignalSource::Random(*n),
                    (None, None) => return Err("give --signal or --random".into()),
                },
                k: *k,
                method: match method {
                    MethodArg::Recursive => NormMethod::Recursive,
                    MethodArg::Spectral => NormMethod::Spectral,
                    MethodArg::CubeSum => NormMethod::CubeSum,
                },
            },
            Command::Scan { system, set, k, eps, horizon, max_gap } => Experiment::Scan {
                system: system.clone(),
                set: set.clone(),
                k: *k,
                eps: *eps,
                horizon: *horizon,
                max_gap: *max_gap,
            },
            Command::Behrend { l } => Experiment::Behrend { l: *l },
            Command::Apcount { set, k } => Experiment::Apcount { set: set.source()?, k: *k },
            Command::Qc5 { set } => Experiment::Qc5 { set: set.source()? },
            Command::Counterexample { l, n_checked } => Experiment::Counterexample { l: *l, n_checked: *n_checked },
            Command::Cube { system, observables, k, horizon, point: p, base, lower_bound } => Experiment::Cube {
                point: point(system, p)?,
                base: base.clone(),
                system: system.clone(),
                observables: observables.clone(),
                k: *k,
                horizon: *horizon,
                lower_bound: *lower_bound,
            },
            Command::Weyl { system, freq, horizon, point: p, tolerance } => Experiment::Weyl {
                point: point(system, p)?,
                system: system.clone(),
                freq: freq.clone(),
                horizon: *horizon,
                tolerance: *tolerance,
            },
            Command::Multicorrelation { system, observable, k, n_max, spectral } => Experiment::Multicorrelation {
                system: system.clone(),
                observable: observable.clone(),
                k: *k,
                n_max: *n_max,
                spectral: spectral.map(|s| match s {
                    SpectralArg::Exact => SpectralMode::Exact,
                    SpectralArg::Empirical => SpectralMode::Empirical,
                }),
            },
            Command::Run { .. } => return Ok(None),
        }))
    }
}

impl GlobalOpts {
    /// Config for a subcommand experiment, with global overrides applied.
    pub fn config_for(&self, experiment: Experiment) -> ExperimentConfig {
        ExperimentConfig {
            version: CONFIG_VERSION,
            seed: self.seed.unwrap_or(0),
            grid: self.grid.unwrap_or(DEFAULT_GRID),
            require_pass: self.require_pass,
            experiment,
        }
    }

    /// Applies command-line overrides to a config read from a file.
    pub fn override_config(&self, mut config: ExperimentConfig) -> ExperimentConfig {
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(grid) = self.grid {
            config.grid = grid;
        }
        config.require_pass |= self.require_pass;
        config
    }
}
