//! Dispatch of a validated config to the library.

use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use recur_core::averages::{cube_average, multi_average_l2, multi_average_pointwise, AverageReport, Evaluation, IteratePattern};
use recur_core::combinatorics::{behrend_construction, count_aps_by_difference, find_qc5, has_3ap, ApCountReport, BehrendConstruction, Qc5Witness};
use recur_core::observables::haar_integral;
use recur_core::recurrence::{
    khintchine_scan, multicorrelation, spectral_decompose_empirical, spectral_decompose_exact, triple_counterexample_checked, CounterexampleReport,
};
use recur_core::seminorms::{gowers_norm, gowers_norm_cube_sum, gowers_u2_spectral, ComplexSignal, GowersValue};
use recur_core::{weyl_sum, IntegerWindowSet, MulticorrelationSeries, Observable, ScanReport, SpectralMeasure};
use serde::Serialize;

use crate::config::{config_hash, Experiment, ExperimentConfig, NormMethod, SignalSource, SpectralMode, WindowSource};
use crate::RunError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outputs {
    Average { report: AverageReport },
    AverageL2 { horizon: u64, grid: u64, value: f64 },
    Gowers { window: usize, norm: GowersValue },
    Scan { report: ScanReport, max_gap_limit: Option<u64> },
    Behrend { l: u64, size: u64, has_3ap: bool, construction: BehrendConstruction, members: Vec<u64> },
    Apcount { report: ApCountReport },
    Qc5 { window: u64, size: u64, witness: Option<Qc5Witness> },
    Counterexample { report: CounterexampleReport },
    Cube { report: AverageReport, lower_bound: Option<f64> },
    Weyl { horizon: u64, average: Complex64, haar: Complex64, tolerance: Option<f64> },
    Multicorrelation { series: MulticorrelationSeries, spectrum: Option<SpectralMeasure> },
}

/// Result of one experiment. Equal `config_hash` and `version` imply
/// bit-identical `outputs`; `wall_time` is not serialized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub version: &'static str,
    /// Outcome of the experiment's own check (true when it has none).
    pub pass: bool,
    pub outputs: Outputs,
    #[serde(skip)]
    pub wall_time: Duration,
}

pub fn load_signal(source: &SignalSource, seed: u64) -> Result<ComplexSignal, RunError> {
    match source {
        SignalSource::Values(v) => Ok(ComplexSignal::new(v.clone())?),
        SignalSource::Random(n) => Ok(ComplexSignal::random_disc(*n, &mut ChaCha8Rng::seed_from_u64(seed))?),
        SignalSource::File(path) => read_signal_csv(path),
    }
}

/// Reads `index, re, im` rows; indices must be `0, 1, 2, ...` in order.
pub fn read_signal_csv(path: &Path) -> Result<ComplexSignal, RunError> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_path(path)?;
    let mut values = Vec::new();
    for (i, row) in reader.deserialize::<(usize, f64, f64)>().enumerate() {
        let (index, re, im) = row?;
        if index != i {
            return Err(RunError::Input(format!("{}: row {} has index {index}", path.display(), i + 1)));
        }
        values.push(Complex64::new(re, im));
    }
    Ok(ComplexSignal::new(values)?)
}

pub fn load_window(source: &WindowSource, seed: u64) -> Result<IntegerWindowSet, RunError> {
    match source {
        WindowSource::Members { window, members } => Ok(IntegerWindowSet::from_members(*window, members)?),
        WindowSource::Behrend(l) => Ok(behrend_construction(*l)?.set),
        WindowSource::Random { window, density } => {
            Ok(IntegerWindowSet::random(*window, *density, &mut ChaCha8Rng::seed_from_u64(seed))?)
        }
        WindowSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| RunError::Input(format!("{}: {e}", path.display())))?;
            text.parse().map_err(|e| RunError::Input(format!("{}: {e}", path.display())))
        }
    }
}

pub fn run(config: &ExperimentConfig) -> Result<RunRecord, RunError> {
    let start = Instant::now();
    let outputs = execute(config).map_err(|e| e.context(config.experiment.kind()))?;
    Ok(RunRecord {
        config_hash: config_hash(config),
        version: env!("CARGO_PKG_VERSION"),
        pass: outputs.pass(),
        outputs,
        wall_time: start.elapsed(),
    })
}

fn execute(config: &ExperimentConfig) -> Result<Outputs, RunError> {
    let grid = config.grid;
    Ok(match &config.experiment {
        Experiment::Average { system, observables, pattern, horizon, point } => {
            let pattern = pattern.clone().unwrap_or_else(|| IteratePattern::linear(observables.len()));
            match point {
                Some(x) => Outputs::Average {
                    report: multi_average_pointwise(system, observables, &pattern, x, *horizon)?,
                },
                None => Outputs::AverageL2 {
                    horizon: *horizon,
                    grid,
                    value: multi_average_l2(system, observables, &pattern, *horizon, grid)?,
                },
            }
        }
        Experiment::Gowers { signal, k, method } => {
            let f = load_signal(signal, config.seed)?;
            let norm = match method {
                NormMethod::Recursive => gowers_norm(&f, *k)?,
                NormMethod::CubeSum => gowers_norm_cube_sum(&f, *k)?,
                NormMethod::Spectral if *k == 2 => gowers_u2_spectral(&f),
                NormMethod::Spectral => {
                    return Err(RunError::Input(format!("spectral method is only available for k = 2, not {k}")))
                }
            };
            Outputs::Gowers { window: f.len(), norm }
        }
        Experiment::Scan { system, set, k, eps, horizon, max_gap } => Outputs::Scan {
            report: khintchine_scan(system, set, *k, *eps, *horizon, grid)?,
            max_gap_limit: *max_gap,
        },
        Experiment::Behrend { l } => {
            let b = behrend_construction(*l)?;
            Outputs::Behrend {
                l: *l,
                size: b.set.len(),
                has_3ap: has_3ap(&b.set),
                construction: b.construction,
                members: b.set.members(),
            }
        }
        Experiment::Apcount { set, k } => Outputs::Apcount {
            report: count_aps_by_difference(&load_window(set, config.seed)?, *k)?,
        },
        Experiment::Qc5 { set } => {
            let e = load_window(set, config.seed)?;
            Outputs::Qc5 { window: e.window(), size: e.len(), witness: find_qc5(&e) }
        }
        Experiment::Counterexample { l, n_checked } => Outputs::Counterexample {
            report: triple_counterexample_checked(*l, *n_checked)?,
        },
        Experiment::Cube { system, observables, k, horizon, point, base, lower_bound } => {
            let eval = match point {
                Some(p) => Evaluation::Pointwise { point: p.clone() },
                None => Evaluation::Integrated { grid, base: base.clone() },
            };
            Outputs::Cube { report: cube_average(system, observables, *k, *horizon, &eval)?, lower_bound: *lower_bound }
        }
        Experiment::Weyl { system, freq, horizon, point, tolerance } => {
            let p = point.clone().unwrap_or_else(|| system.origin());
            let average = weyl_sum(system, &p, freq, *horizon)?;
            // midpoint rule is exact for characters of frequency below m / 2
            let m = 2 * freq.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) + 2;
            let haar = haar_integral(&Observable::character(freq.clone()), system, m)?;
            Outputs::Weyl { horizon: *horizon, average, haar, tolerance: *tolerance }
        }
        Experiment::Multicorrelation { system, observable, k, n_max, spectral } => {
            let series = multicorrelation(system, observable, *k, *n_max, grid)?;
            let spectrum = match spectral {
                None => None,
                Some(SpectralMode::Exact) => Some(spectral_decompose_exact(system, observable)?),
                Some(SpectralMode::Empirical) => Some(spectral_decompose_empirical(&series)?),
            };
            Outputs::Multicorrelation { series, spectrum }
        }
    })
}

impl Outputs {
    pub fn pass(&self) -> bool {
        match self {
            Outputs::Scan { report, max_gap_limit } => {
                !report.good_set.is_empty() && max_gap_limit.is_none_or(|g| report.max_gap <= g)
            }
            Outputs::Behrend { has_3ap, .. } => !has_3ap,
            Outputs::Qc5 { witness, .. } => witness.is_none(),
            Outputs::Counterexample { report } => report.within_bound,
            Outputs::Cube { report, lower_bound } => lower_bound.is_none_or(|b| report.value.re >= b),
            Outputs::Weyl { average, haar, tolerance, .. } => tolerance.is_none_or(|t| (average - haar).norm() <= t),
            _ => true,
        }
    }
}
