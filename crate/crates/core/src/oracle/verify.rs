//! Equivalence suite comparing production paths against the oracle.

use num_complex::Complex64;
use serde::Serialize;

use super::{analytic_fidelity, build_superoperator_with, KrausSource, ORACLE_MAX_QUBITS};
use crate::channels::{apply_channel, ChannelSpec, DepolarizingMode, KrausSet, COMPLETENESS_TOL};
use crate::error::{Error, Result};
use crate::metrics::{fidelity, fidelity_fast};
use crate::qstate::{density_from_pure, DensityMatrix, MAX_QUBITS};
use crate::sampler::{sample_state, SeededRng, StateClass};

/// Deviation allowed between any two routes.
pub const EQUIVALENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Largest register for the superoperator checks (at most 3).
    pub max_n: usize,
    /// Random inputs per channel and register size.
    pub states: usize,
    pub seed: u64,
    pub source: KrausSource,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            max_n: ORACLE_MAX_QUBITS,
            states: 100,
            seed: 0,
            source: KrausSource::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, max_deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_deviation,
            tolerance,
            // NaN deviations fail.
            passed: max_deviation < tolerance,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// The channels at the reference parameters, both depolarizing lifts included.
pub fn reference_specs() -> Vec<ChannelSpec> {
    vec![
        ChannelSpec::Bath { gamma1_t: 1.0 },
        ChannelSpec::Dephasing { gamma2_t: 2.48 },
        ChannelSpec::CollectiveDephasing { t_over_T: 5.0 },
        ChannelSpec::Depolarizing {
            p: 0.8348,
            mode: DepolarizingMode::Global,
        },
        ChannelSpec::Depolarizing {
            p: 0.8348,
            mode: DepolarizingMode::PerQubit,
        },
    ]
}

fn spec_label(spec: &ChannelSpec) -> String {
    match spec.mode() {
        Some(mode) => format!("{}-{}", spec.kind(), mode.name()),
        None => spec.kind().to_string(),
    }
}

/// Random input: pure for even `k`, a two-state mixture for odd `k`.
fn random_input(n: usize, seed: u64, k: u64) -> Result<DensityMatrix> {
    let mut rng = SeededRng::new(seed, k);
    let a = density_from_pure(&sample_state(StateClass::General, n, &mut rng)?);
    if k % 2 == 0 {
        return Ok(a);
    }
    let b = density_from_pure(&sample_state(StateClass::General, n, &mut rng)?);
    let data: Vec<Complex64> = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x * 0.6 + y * 0.4)
        .collect();
    DensityMatrix::from_raw(n, data)
}

fn completeness(source: &KrausSource) -> Result<f64> {
    let mut worst = 0.0f64;
    for k in 0..100 {
        let t = k as f64 * 0.1;
        let sets: [KrausSet; 4] = [
            (source.bath)(t)?,
            (source.dephasing)(t)?,
            (source.collective)(t)?,
            (source.depolarizing)(k as f64 / 99.0)?,
        ];
        for set in &sets {
            worst = worst.max(set.completeness_error());
        }
    }
    Ok(worst)
}

/// Runs every check and collects the outcomes.
pub fn run_verification(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.max_n == 0 || opts.max_n > ORACLE_MAX_QUBITS {
        return Err(Error::OracleTooLarge {
            n: opts.max_n,
            max: ORACLE_MAX_QUBITS,
        });
    }
    let mut report = VerifyReport::default();
    report.checks.push(CheckOutcome::new(
        "completeness",
        completeness(&opts.source)?,
        COMPLETENESS_TOL,
    ));

    for spec in reference_specs() {
        let mut trace_err = 0.0f64;
        let mut worst = 0.0f64;
        for n in 1..=opts.max_n {
            if spec.check(n).is_err() {
                continue;
            }
            let sup = build_superoperator_with(&spec, n, &opts.source)?;
            trace_err = trace_err.max(sup.trace_preservation_error());
            for k in 0..opts.states as u64 {
                let rho = random_input(n, opts.seed, k)?;
                let want = sup.apply(&rho)?;
                let got = apply_channel(&rho, &spec)?;
                worst = worst.max(got.max_abs_diff(&want));
            }
        }
        let label = spec_label(&spec);
        report.checks.push(CheckOutcome::new(
            format!("trace-preservation/{label}"),
            trace_err,
            EQUIVALENCE_TOL,
        ));
        report.checks.push(CheckOutcome::new(
            format!("superoperator/{label}"),
            worst,
            EQUIVALENCE_TOL,
        ));
    }

    let mut analytic = 0.0f64;
    let mut fast = 0.0f64;
    let per_size = opts.states.clamp(1, 20) as u64;
    for spec in reference_specs() {
        for n in 1..=MAX_QUBITS {
            if spec.check(n).is_err() {
                continue;
            }
            for class in StateClass::ALL {
                if class.check(n).is_err() {
                    continue;
                }
                for k in 0..per_size {
                    let psi = sample_state(class, n, &mut SeededRng::new(opts.seed ^ 0x5eed, k))?;
                    let quick = fidelity_fast(&psi, &spec)?;
                    if let Some(want) = analytic_fidelity(class, &spec, &psi) {
                        analytic = analytic.max((quick - want).abs());
                    }
                    if n <= opts.max_n + 2 {
                        fast = fast.max((quick - fidelity(&psi, &spec)?).abs());
                    }
                }
            }
        }
    }
    report.checks.push(CheckOutcome::new(
        "analytic-vs-production",
        analytic,
        EQUIVALENCE_TOL,
    ));
    report.checks.push(CheckOutcome::new(
        "fast-vs-density-path",
        fast,
        EQUIVALENCE_TOL,
    ));
    Ok(report)
}

/// Amplitude-damping set with a deliberately wrong `K0` entry.
///
/// Used as a negative control for [`run_verification`].
pub fn corrupted_bath_kraus(gamma1_t: f64) -> Result<KrausSet> {
    let good = crate::channels::bath_kraus(gamma1_t)?;
    let mut ops = good.ops().to_vec();
    ops[0][3] *= 1.01;
    KrausSet::new_unchecked(1, ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let report = run_verification(&VerifyOptions {
            states: 20,
            ..VerifyOptions::default()
        })
        .unwrap();
        for c in &report.checks {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn corrupted_constant_fails_completeness_first() {
        let opts = VerifyOptions {
            states: 4,
            source: KrausSource {
                bath: corrupted_bath_kraus,
                ..KrausSource::default()
            },
            ..VerifyOptions::default()
        };
        let report = run_verification(&opts).unwrap();
        assert!(!report.all_passed());
        assert_eq!(report.first_failure().unwrap().name, "completeness");
    }

    #[test]
    fn rejects_large_oracle_requests() {
        let opts = VerifyOptions {
            max_n: 4,
            ..VerifyOptions::default()
        };
        assert!(run_verification(&opts).is_err());
    }
}
