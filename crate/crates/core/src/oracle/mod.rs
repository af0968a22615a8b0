//! Brute-force reference paths.
//!
//! Nothing here reuses the production appliers: channels are expanded into
//! fully embedded Kraus operators with explicit Kronecker products and then
//! linearized into a superoperator acting on column-stacked density matrices.
//! Only the local Kraus constants are shared with [`crate::channels`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channels::{
    bath_kraus, collective_kraus, dephasing_kraus, depolarizing_kraus, ChannelKind, ChannelSpec,
    DepolarizingMode, KrausSet,
};
use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, StateVector};
use crate::sampler::StateClass;

pub mod verify;

/// Largest register the superoperator oracle will build.
pub const ORACLE_MAX_QUBITS: usize = 3;

type CMat = DMatrix<Complex64>;

fn to_cmat(d: usize, row_major: &[Complex64]) -> CMat {
    CMat::from_row_slice(d, d, row_major)
}

fn pauli(k: usize) -> CMat {
    let (o, l, i) = (Complex64::ZERO, Complex64::ONE, Complex64::I);
    let m = match k {
        0 => [l, o, o, l],
        1 => [o, l, l, o],
        2 => [o, -i, i, o],
        _ => [l, o, o, -l],
    };
    to_cmat(2, &m)
}

/// Where the local Kraus constants come from.
///
/// The verification suite swaps these out to check that a corrupted constant
/// is caught.
#[derive(Clone, Copy)]
pub struct KrausSource {
    pub bath: fn(f64) -> Result<KrausSet>,
    pub dephasing: fn(f64) -> Result<KrausSet>,
    pub collective: fn(f64) -> Result<KrausSet>,
    pub depolarizing: fn(f64) -> Result<KrausSet>,
}

impl Default for KrausSource {
    fn default() -> Self {
        Self {
            bath: bath_kraus,
            dephasing: dephasing_kraus,
            collective: collective_kraus,
            depolarizing: depolarizing_kraus,
        }
    }
}

impl std::fmt::Debug for KrausSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("KrausSource")
    }
}

/// All products `k_1 ⊗ k_2 ⊗ …` with one local operator per block.
fn expand_products(local: &[CMat], blocks: usize) -> Vec<CMat> {
    let mut out = vec![CMat::identity(1, 1)];
    for _ in 0..blocks {
        out = out
            .iter()
            .flat_map(|acc| local.iter().map(move |k| acc.kronecker(k)))
            .collect();
    }
    out
}

/// Fully embedded Kraus operators of `spec` on `n` qubits.
pub fn full_kraus_operators(
    spec: &ChannelSpec,
    n: usize,
    source: &KrausSource,
) -> Result<Vec<CMat>> {
    if n > ORACLE_MAX_QUBITS {
        return Err(Error::OracleTooLarge {
            n,
            max: ORACLE_MAX_QUBITS,
        });
    }
    spec.check(n)?;
    let local =
        |set: KrausSet| -> Vec<CMat> { set.ops().iter().map(|k| to_cmat(set.dim(), k)).collect() };
    Ok(match *spec {
        ChannelSpec::Bath { gamma1_t } => expand_products(&local((source.bath)(gamma1_t)?), n),
        ChannelSpec::Dephasing { gamma2_t } => {
            expand_products(&local((source.dephasing)(gamma2_t)?), n)
        }
        ChannelSpec::CollectiveDephasing { t_over_T } => {
            expand_products(&local((source.collective)(t_over_T)?), n / 2)
        }
        ChannelSpec::Depolarizing {
            p,
            mode: DepolarizingMode::PerQubit,
        } => expand_products(&local((source.depolarizing)(p)?), n),
        ChannelSpec::Depolarizing {
            p,
            mode: DepolarizingMode::Global,
        } => {
            // Uniform Pauli channel: weight 1 − p on I, p/(4^n − 1) on every other string.
            let strings = expand_products(&(0..4).map(pauli).collect::<Vec<_>>(), n);
            let others = (strings.len() - 1) as f64;
            strings
                .into_iter()
                .enumerate()
                .map(|(k, s)| {
                    let w = if k == 0 { 1.0 - p } else { p / others };
                    s * Complex64::new(w.sqrt(), 0.0)
                })
                .collect()
        }
    })
}

/// Linear map on column-stacked `2^n × 2^n` matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    n: usize,
    mat: CMat,
}

impl Superoperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// `max_kl |Σ_i S[(i,i),(k,l)] − δ_kl|`.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = 1usize << self.n;
        let mut worst = 0.0f64;
        for k in 0..d {
            for l in 0..d {
                let col = k + l * d;
                let s: Complex64 = (0..d).map(|i| self.mat[(i + i * d, col)]).sum();
                let target = if k == l { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.n() != self.n {
            return Err(Error::Dimension {
                expected: 1 << self.n,
                actual: rho.dim(),
            });
        }
        let d = rho.dim();
        let vec = nalgebra::DVector::from_fn(d * d, |idx, _| rho.get(idx % d, idx / d));
        let out = &self.mat * vec;
        let mut data = vec![Complex64::ZERO; d * d];
        for (idx, v) in out.iter().enumerate() {
            data[(idx % d) * d + idx / d] = *v;
        }
        DensityMatrix::from_raw(self.n, data)
    }
}

/// `Σ_ν conj(K_ν) ⊗ K_ν` over the fully embedded Kraus operators.
pub fn build_superoperator(spec: &ChannelSpec, n: usize) -> Result<Superoperator> {
    build_superoperator_with(spec, n, &KrausSource::default())
}

pub fn build_superoperator_with(
    spec: &ChannelSpec,
    n: usize,
    source: &KrausSource,
) -> Result<Superoperator> {
    let ops = full_kraus_operators(spec, n, source)?;
    let d = 1usize << n;
    let mut mat = CMat::zeros(d * d, d * d);
    for k in &ops {
        mat += k.conjugate().kronecker(k);
    }
    Ok(Superoperator { n, mat })
}

/// Closed-form fidelity for the (class, channel) pairs that have one.
///
/// * W-type under the bath: `e^{−γ1 t (n−1)}`;
/// * GHZ-type under dephasing: `|α|⁴ + |β|⁴ + 2|α|²|β|² e^{−n γ2 t / 2}`;
/// * any pure state under global depolarizing: `1 − p 2^n / (2^n + 1)`;
/// * two-qubit W-type under collective dephasing: `1`.
pub fn analytic_fidelity(class: StateClass, spec: &ChannelSpec, psi: &StateVector) -> Option<f64> {
    let n = psi.n();
    match (class, *spec) {
        (StateClass::WType, ChannelSpec::Bath { gamma1_t }) => {
            Some((-gamma1_t * (n as f64 - 1.0)).exp())
        }
        (StateClass::GhzType, ChannelSpec::Dephasing { gamma2_t }) => {
            let a = psi.amplitudes()[0].norm_sqr();
            let b = psi.amplitudes()[(1 << n) - 1].norm_sqr();
            Some(a * a + b * b + 2.0 * a * b * (-(n as f64) * gamma2_t / 2.0).exp())
        }
        (
            _,
            ChannelSpec::Depolarizing {
                p,
                mode: DepolarizingMode::Global,
            },
        ) => {
            let d = (1u64 << n) as f64;
            Some(1.0 - p * d / (d + 1.0))
        }
        (StateClass::WType, ChannelSpec::CollectiveDephasing { .. }) if n == 2 => Some(1.0),
        _ => None,
    }
}

/// [`analytic_fidelity`] that reports unsupported pairs as an error.
pub fn analytic_fidelity_strict(
    class: StateClass,
    spec: &ChannelSpec,
    psi: &StateVector,
) -> Result<f64> {
    analytic_fidelity(class, spec, psi).ok_or(Error::NoClosedForm {
        class,
        channel: spec.kind(),
    })
}

/// Haar average of the fidelity over the class, where a closed form exists.
///
/// For general states this uses `(Σ_ν |Tr K_ν|² + d) / (d (d + 1))`; for the
/// product channels `Σ_ν |Tr K_ν|²` factorizes over qubits or pairs.
pub fn analytic_mean(class: StateClass, spec: &ChannelSpec, n: usize) -> Option<f64> {
    spec.check(n).ok()?;
    class.check(n).ok()?;
    match (class, *spec) {
        (StateClass::General, _) => general_mean_fidelity(spec, n).ok(),
        (StateClass::WType, ChannelSpec::Bath { gamma1_t }) => {
            Some((-gamma1_t * (n as f64 - 1.0)).exp())
        }
        (StateClass::GhzType, ChannelSpec::Dephasing { gamma2_t }) => {
            Some(2.0 / 3.0 + (-(n as f64) * gamma2_t / 2.0).exp() / 3.0)
        }
        (
            _,
            ChannelSpec::Depolarizing {
                p,
                mode: DepolarizingMode::Global,
            },
        ) => {
            let d = (1u64 << n) as f64;
            Some(1.0 - p * d / (d + 1.0))
        }
        (StateClass::WType, ChannelSpec::CollectiveDephasing { .. }) if n == 2 => Some(1.0),
        _ => None,
    }
}

/// Haar-average fidelity of general states from Kraus traces.
pub fn general_mean_fidelity(spec: &ChannelSpec, n: usize) -> Result<f64> {
    spec.check(n)?;
    let d = (1u64 << n) as f64;
    let local_trace_sum = |set: &KrausSet| -> f64 {
        let dim = set.dim();
        set.ops()
            .iter()
            .map(|k| {
                (0..dim)
                    .map(|i| k[i * dim + i])
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum()
    };
    let trace_sum = match (spec.kind(), spec.local_kraus()?) {
        (ChannelKind::Collective, Some(set)) => local_trace_sum(&set).powi((n / 2) as i32),
        (_, Some(set)) => local_trace_sum(&set).powi(n as i32),
        // Only the identity term of the global Pauli channel has a trace.
        (_, None) => (1.0 - spec.parameter()) * d * d,
    };
    Ok((trace_sum + d) / (d * (d + 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::apply_channel;
    use crate::metrics::fidelity;
    use crate::qstate::density_from_pure;
    use crate::sampler::{sample_state, SeededRng};

    #[test]
    fn identity_bath_is_identity_superoperator() {
        let s = build_superoperator(&ChannelSpec::Bath { gamma1_t: 0.0 }, 1).unwrap();
        let diff = (s.matrix() - CMat::identity(4, 4))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-15);
    }

    #[test]
    fn dephasing_superoperator_is_diagonal() {
        let g = 0.9f64;
        let s = build_superoperator(&ChannelSpec::Dephasing { gamma2_t: g }, 1).unwrap();
        let e = (-g / 2.0).exp();
        let want = [1.0, e, e, 1.0];
        for (r, &diag) in want.iter().enumerate() {
            for c in 0..4 {
                let w = if r == c { diag } else { 0.0 };
                assert!((s.matrix()[(r, c)] - Complex64::new(w, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn superoperator_matches_production_on_two_qubits() {
        let mut rng = SeededRng::new(21, 0);
        for spec in [
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
        ] {
            let s = build_superoperator(&spec, 2).unwrap();
            assert!(s.trace_preservation_error() < 1e-10);
            for _ in 0..10 {
                let rho =
                    density_from_pure(&sample_state(StateClass::General, 2, &mut rng).unwrap());
                let want = s.apply(&rho).unwrap();
                let got = apply_channel(&rho, &spec).unwrap();
                assert!(got.max_abs_diff(&want) < 1e-10, "{spec:?}");
            }
        }
    }

    #[test]
    fn oracle_refuses_large_registers() {
        assert_eq!(
            build_superoperator(&ChannelSpec::Bath { gamma1_t: 1.0 }, 4).unwrap_err(),
            Error::OracleTooLarge { n: 4, max: 3 }
        );
        assert!(
            build_superoperator(&ChannelSpec::CollectiveDephasing { t_over_T: 1.0 }, 3).is_err()
        );
    }

    #[test]
    fn analytic_examples() {
        let w2 = sample_state(StateClass::WType, 2, &mut SeededRng::new(1, 0)).unwrap();
        let f = analytic_fidelity(StateClass::WType, &ChannelSpec::Bath { gamma1_t: 1.0 }, &w2)
            .unwrap();
        assert!((f - 0.36788).abs() < 1e-5);

        let one = sample_state(StateClass::General, 1, &mut SeededRng::new(1, 0)).unwrap();
        let dep = ChannelSpec::Depolarizing {
            p: 0.8348,
            mode: DepolarizingMode::Global,
        };
        assert!(
            (analytic_fidelity(StateClass::General, &dep, &one).unwrap() - 0.44347).abs() < 1e-5
        );

        let mean8 = analytic_mean(
            StateClass::GhzType,
            &ChannelSpec::Dephasing { gamma2_t: 2.48 },
            8,
        )
        .unwrap();
        assert!((mean8 - 2.0 / 3.0).abs() < 1e-4);
        assert!((mean8 - 0.667).abs() < 1e-3);

        assert_eq!(
            analytic_fidelity_strict(
                StateClass::General,
                &ChannelSpec::Bath { gamma1_t: 1.0 },
                &one
            ),
            Err(Error::NoClosedForm {
                class: StateClass::General,
                channel: ChannelKind::Bath
            })
        );
    }

    #[test]
    fn analytic_matches_density_path() {
        let specs = [
            ChannelSpec::Bath { gamma1_t: 1.0 },
            ChannelSpec::Dephasing { gamma2_t: 2.48 },
            ChannelSpec::CollectiveDephasing { t_over_T: 5.0 },
            ChannelSpec::Depolarizing {
                p: 0.8348,
                mode: DepolarizingMode::Global,
            },
        ];
        let mut rng = SeededRng::new(33, 0);
        for n in 1..=5 {
            for class in StateClass::ALL {
                if class.check(n).is_err() {
                    continue;
                }
                for spec in &specs {
                    if spec.check(n).is_err() {
                        continue;
                    }
                    let psi = sample_state(class, n, &mut rng).unwrap();
                    if let Some(want) = analytic_fidelity(class, spec, &psi) {
                        let got = fidelity(&psi, spec).unwrap();
                        assert!((got - want).abs() < 1e-10, "{class} {spec:?} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn general_means_match_single_qubit_formulas() {
        let q = (-1.0f64).exp();
        let bath = general_mean_fidelity(&ChannelSpec::Bath { gamma1_t: 1.0 }, 1).unwrap();
        let want = q / 3.0 + (2.0 * q.sqrt() + 1.0 - q) / 6.0 + 1.0 / 3.0;
        assert!((bath - want).abs() < 1e-14);
        assert!((bath - 0.76349).abs() < 1e-5);

        let deph = general_mean_fidelity(&ChannelSpec::Dephasing { gamma2_t: 2.48 }, 1).unwrap();
        assert!((deph - (2.0 / 3.0 + (-1.24f64).exp() / 3.0)).abs() < 1e-14);

        for mode in [DepolarizingMode::Global, DepolarizingMode::PerQubit] {
            let dep =
                general_mean_fidelity(&ChannelSpec::Depolarizing { p: 0.3, mode }, 1).unwrap();
            assert!((dep - (1.0 - 0.2)).abs() < 1e-14);
        }
    }

    #[test]
    fn general_means_match_monte_carlo() {
        let samples = 20_000;
        for (spec, n) in [
            (ChannelSpec::Bath { gamma1_t: 1.0 }, 3),
            (ChannelSpec::CollectiveDephasing { t_over_T: 5.0 }, 2),
            (ChannelSpec::CollectiveDephasing { t_over_T: 0.7 }, 4),
            (
                ChannelSpec::Depolarizing {
                    p: 0.5,
                    mode: DepolarizingMode::PerQubit,
                },
                2,
            ),
        ] {
            let fs: Vec<f64> = (0..samples)
                .map(|i| {
                    let psi =
                        sample_state(StateClass::General, n, &mut SeededRng::new(5, i)).unwrap();
                    crate::metrics::fidelity_fast(&psi, &spec).unwrap()
                })
                .collect();
            let stats = crate::metrics::summarize(&fs, 10).unwrap();
            let want = general_mean_fidelity(&spec, n).unwrap();
            assert!(
                (stats.mean - want).abs() < 4.0 * stats.standard_error() + 1e-12,
                "{spec:?} n={n}: {} vs {want}",
                stats.mean
            );
        }
    }
}
