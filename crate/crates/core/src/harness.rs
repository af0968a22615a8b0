//! Monte-Carlo sweeps over (channel, class, n) and parameter calibration.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{ChannelKind, ChannelSpec, DepolarizingMode};
use crate::error::{Error, Result};
use crate::metrics::{fidelity_fast, summarize, FidelityStats, DEFAULT_BINS};
use crate::oracle::analytic_mean;
use crate::qstate::MAX_QUBITS;
use crate::sampler::{sample_state, SeededRng, StateClass};

pub const DEFAULT_SAMPLES: usize = 100_000;

/// Version string recorded in every result.
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Reference operating point for the four channels.
pub const REFERENCE_GAMMA1_T: f64 = 1.0;
pub const REFERENCE_GAMMA2_T: f64 = 2.48;
pub const REFERENCE_T_OVER_T: f64 = 5.0;
pub const REFERENCE_P: f64 = 0.8348;

/// The four channels at the reference parameters, global depolarizing.
pub fn reference_channels() -> Vec<ChannelSpec> {
    vec![
        ChannelSpec::Bath {
            gamma1_t: REFERENCE_GAMMA1_T,
        },
        ChannelSpec::Dephasing {
            gamma2_t: REFERENCE_GAMMA2_T,
        },
        ChannelSpec::CollectiveDephasing {
            t_over_T: REFERENCE_T_OVER_T,
        },
        ChannelSpec::Depolarizing {
            p: REFERENCE_P,
            mode: DepolarizingMode::Global,
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub channels: Vec<ChannelSpec>,
    pub classes: Vec<StateClass>,
    pub qubit_counts: Vec<usize>,
    pub samples: usize,
    pub master_seed: u64,
    pub bins: usize,
    /// Thread count hint; 0 picks automatically. Never changes the output.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channels: Vec::new(),
            classes: StateClass::ALL.to_vec(),
            qubit_counts: (1..=MAX_QUBITS).collect(),
            samples: DEFAULT_SAMPLES,
            master_seed: 0,
            bins: DEFAULT_BINS,
            workers: 0,
        }
    }
}

impl ExperimentConfig {
    /// All four channels, all classes, `n = 1..=8`.
    pub fn reference_grid(samples: usize, master_seed: u64) -> Self {
        Self {
            channels: reference_channels(),
            samples,
            master_seed,
            ..Self::default()
        }
    }

    /// Splits the cartesian product into runnable and skipped triples.
    pub fn triples(&self) -> (Vec<(ChannelSpec, StateClass, usize)>, Vec<SkippedTriple>) {
        let mut run = Vec::new();
        let mut skipped = Vec::new();
        for spec in &self.channels {
            for &class in &self.classes {
                for &n in &self.qubit_counts {
                    match spec.check(n).and_then(|_| class.check(n)) {
                        Ok(()) => run.push((*spec, class, n)),
                        Err(e) => skipped.push(SkippedTriple {
                            channel: *spec,
                            class,
                            n,
                            reason: e.to_string(),
                        }),
                    }
                }
            }
        }
        (run, skipped)
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        if self.bins == 0 {
            return Err(Error::ZeroBins);
        }
        for spec in &self.channels {
            spec.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTriple {
    pub channel: ChannelSpec,
    pub class: StateClass,
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleResult {
    pub channel: ChannelSpec,
    pub class: StateClass,
    pub n: usize,
    pub stats: FidelityStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub master_seed: u64,
    pub samples: usize,
    pub bins: usize,
    pub code_version: String,
    /// Wall-clock stamp filled in by the caller; `run` leaves it empty so its
    /// output depends on the configuration only.
    pub timestamp_unix: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub entries: Vec<TripleResult>,
    pub skipped: Vec<SkippedTriple>,
    pub metadata: RunMetadata,
}

impl ExperimentResult {
    pub fn get(&self, channel: ChannelKind, class: StateClass, n: usize) -> Option<&TripleResult> {
        self.entries
            .iter()
            .find(|e| e.channel.kind() == channel && e.class == class && e.n == n)
    }
}

/// Fidelities of samples `0..samples`, in sample order.
///
/// Sample `i` draws from stream `(master_seed, i)`.
pub fn sample_fidelities(
    spec: &ChannelSpec,
    class: StateClass,
    n: usize,
    samples: usize,
    master_seed: u64,
) -> Result<Vec<f64>> {
    spec.check(n)?;
    class.check(n)?;
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let psi = sample_state(class, n, &mut SeededRng::new(master_seed, i))?;
            fidelity_fast(&psi, spec)
        })
        .collect()
}

fn run_in_pool(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let (triples, skipped) = config.triples();
    if triples.is_empty() {
        let reasons: BTreeSet<&str> = skipped.iter().map(|s| s.reason.as_str()).collect();
        let reasons: Vec<&str> = reasons.into_iter().collect();
        return Err(Error::NoCompatibleTriples(if reasons.is_empty() {
            "empty configuration".into()
        } else {
            reasons.join("; ")
        }));
    }
    let mut entries = Vec::with_capacity(triples.len());
    for (channel, class, n) in triples {
        let fs = sample_fidelities(&channel, class, n, config.samples, config.master_seed)?;
        entries.push(TripleResult {
            channel,
            class,
            n,
            stats: summarize(&fs, config.bins)?,
        });
    }
    Ok(ExperimentResult {
        entries,
        skipped,
        metadata: RunMetadata {
            master_seed: config.master_seed,
            samples: config.samples,
            bins: config.bins,
            code_version: CODE_VERSION.to_string(),
            timestamp_unix: None,
        },
    })
}

/// Runs every compatible triple of `config`.
///
/// The result is a function of the configuration alone; `workers` only sets
/// the size of the thread pool.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    if config.workers == 0 {
        return run_in_pool(config);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", config.workers)))?;
    pool.install(|| run_in_pool(config))
}

/// How a mean fidelity was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanMethod {
    Analytic,
    MonteCarlo,
}

/// Mean fidelity of `class` under `spec`: the closed-form Haar average where
/// one exists, otherwise a Monte-Carlo estimate with the given seed.
pub fn mean_fidelity(
    spec: &ChannelSpec,
    class: StateClass,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, MeanMethod)> {
    spec.check(n)?;
    class.check(n)?;
    if let Some(m) = analytic_mean(class, spec, n) {
        return Ok((m, MeanMethod::Analytic));
    }
    if samples == 0 {
        return Err(Error::Config("samples must be positive".into()));
    }
    let fs = sample_fidelities(spec, class, n, samples, seed)?;
    Ok((summarize(&fs, 1)?.mean, MeanMethod::MonteCarlo))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRequest {
    pub family: ChannelKind,
    /// Lift used when `family` is depolarizing.
    pub mode: DepolarizingMode,
    pub class: StateClass,
    pub n_ref: usize,
    pub target_mean: f64,
    /// Monte-Carlo sample count when no closed form applies.
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl CalibrationRequest {
    /// General states at `n_ref` with the default tolerance `1e-4`.
    pub fn new(family: ChannelKind, n_ref: usize, target_mean: f64) -> Self {
        Self {
            family,
            mode: DepolarizingMode::Global,
            class: StateClass::General,
            n_ref,
            target_mean,
            samples: 20_000,
            seed: 0,
            tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub parameter: f64,
    pub achieved_mean: f64,
    pub method: MeanMethod,
}

/// Upper end of the search interval for each family.
pub fn parameter_upper_bound(family: ChannelKind) -> f64 {
    match family {
        ChannelKind::Depolarizing => 1.0,
        _ => 50.0,
    }
}

/// Bisects the channel parameter until the mean fidelity at `n_ref` is within
/// `tol` of the target. The mean is assumed non-increasing in the parameter.
pub fn calibrate(req: &CalibrationRequest) -> Result<Calibration> {
    if !(req.target_mean > 0.0 && req.target_mean <= 1.0) {
        return Err(Error::Parameter {
            name: "target_mean",
            value: req.target_mean,
            reason: "must lie in (0, 1]",
        });
    }
    if req.tol.is_nan() || req.tol <= 0.0 {
        return Err(Error::Parameter {
            name: "tol",
            value: req.tol,
            reason: "must be positive",
        });
    }
    let spec_at = |x: f64| req.family.with_parameter(x, req.mode);
    let eval = |x: f64| mean_fidelity(&spec_at(x), req.class, req.n_ref, req.samples, req.seed);

    let (mut lo, mut hi) = (0.0, parameter_upper_bound(req.family));
    let (f_lo, method) = eval(lo)?;
    let (f_hi, _) = eval(hi)?;
    if (f_lo - req.target_mean).abs() <= req.tol {
        return Ok(Calibration {
            parameter: lo,
            achieved_mean: f_lo,
            method,
        });
    }
    if req.target_mean > f_lo + req.tol || req.target_mean < f_hi - req.tol {
        return Err(Error::Unreachable {
            target: req.target_mean,
            low: f_hi,
            high: f_lo,
        });
    }
    let mut best = if (f_hi - req.target_mean).abs() < (f_lo - req.target_mean).abs() {
        (hi, f_hi)
    } else {
        (lo, f_lo)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (f_mid, _) = eval(mid)?;
        if (f_mid - req.target_mean).abs() < (best.1 - req.target_mean).abs() {
            best = (mid, f_mid);
        }
        if f_mid > req.target_mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (best.1 - req.target_mean).abs() > req.tol {
        return Err(Error::Unreachable {
            target: req.target_mean,
            low: f_hi,
            high: f_lo,
        });
    }
    Ok(Calibration {
        parameter: best.0,
        achieved_mean: best.1,
        method,
    })
}
