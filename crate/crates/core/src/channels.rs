//! The four decoherence channels.
//!
//! Every channel has a production applier working directly on the density
//! matrix. Where a channel has a local Kraus decomposition it is exposed as a
//! [`KrausSet`], applied as `K ρ K†`.
//!
//! Qubit 0 is taken as the *excited* level for the zero-temperature bath:
//! damping moves population from `|0⟩` to `|1⟩`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{apply_local_in_place, check_qubits, qubit_mask, DensityMatrix, LocalOperator};

/// Completeness tolerance for Kraus sets.
pub const COMPLETENESS_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::ZERO;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// A list of `2^arity × 2^arity` row-major matrices with `Σ K†K = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    arity: usize,
    ops: Vec<Vec<Complex64>>,
}

impl KrausSet {
    /// Builds the set and checks completeness.
    pub fn new(arity: usize, ops: Vec<Vec<Complex64>>) -> Result<Self> {
        let set = Self::new_unchecked(arity, ops)?;
        let err = set.completeness_error();
        if err >= COMPLETENESS_TOL {
            return Err(Error::Completeness(err));
        }
        Ok(set)
    }

    /// Builds the set checking shapes only.
    pub fn new_unchecked(arity: usize, ops: Vec<Vec<Complex64>>) -> Result<Self> {
        if !(1..=2).contains(&arity) {
            return Err(Error::Arity(arity));
        }
        let d = 1 << arity;
        if ops.is_empty() {
            return Err(Error::Empty);
        }
        for op in &ops {
            if op.len() != d * d {
                return Err(Error::Dimension {
                    expected: d * d,
                    actual: op.len(),
                });
            }
        }
        Ok(Self { arity, ops })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn ops(&self) -> &[Vec<Complex64>] {
        &self.ops
    }

    /// Max-norm of `Σ K†K − I`.
    pub fn completeness_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc: Complex64 = self
                    .ops
                    .iter()
                    .map(|k| {
                        (0..d)
                            .map(|m| k[m * d + i].conj() * k[m * d + j])
                            .sum::<Complex64>()
                    })
                    .sum();
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// `Σ_ν K_ν ρ K_ν†` with every `K_ν` placed on `targets`.
    pub fn apply(&self, rho: &DensityMatrix, targets: &[usize]) -> Result<DensityMatrix> {
        if targets.len() != self.arity {
            return Err(Error::Arity(targets.len()));
        }
        let mut sum: Option<Vec<Complex64>> = None;
        for k in &self.ops {
            let op = LocalOperator::new(k.clone(), targets.to_vec())?;
            let mut term = rho.clone();
            apply_local_in_place(&mut term, &op)?;
            match sum.as_mut() {
                None => sum = Some(term.into_raw()),
                Some(acc) => acc
                    .iter_mut()
                    .zip(term.as_slice())
                    .for_each(|(a, t)| *a += t),
            }
        }
        DensityMatrix::from_raw(rho.n(), sum.expect("Kraus set is nonempty"))
    }
}

/// How the single-qubit depolarizing map is lifted to `n` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepolarizingMode {
    /// Independent single-qubit depolarizing on every qubit.
    PerQubit,
    /// Uniform Pauli channel on the whole register.
    #[default]
    Global,
}

impl DepolarizingMode {
    pub fn name(self) -> &'static str {
        match self {
            DepolarizingMode::PerQubit => "per-qubit",
            DepolarizingMode::Global => "global",
        }
    }
}

impl FromStr for DepolarizingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "per-qubit" | "perqubit" | "local" => Ok(DepolarizingMode::PerQubit),
            "global" => Ok(DepolarizingMode::Global),
            other => Err(Error::Config(format!(
                "unknown depolarizing mode {other:?} (expected per-qubit or global)"
            ))),
        }
    }
}

/// Channel family without its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Bath,
    Dephasing,
    Collective,
    Depolarizing,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 4] = [
        ChannelKind::Bath,
        ChannelKind::Dephasing,
        ChannelKind::Collective,
        ChannelKind::Depolarizing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Bath => "bath",
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::Collective => "collective",
            ChannelKind::Depolarizing => "depolarizing",
        }
    }

    /// Name of the single parameter.
    pub fn parameter_name(self) -> &'static str {
        match self {
            ChannelKind::Bath => "gamma1_t",
            ChannelKind::Dephasing => "gamma2_t",
            ChannelKind::Collective => "t_over_T",
            ChannelKind::Depolarizing => "p",
        }
    }

    /// Builds a spec; `mode` is only used for depolarizing.
    pub fn with_parameter(self, value: f64, mode: DepolarizingMode) -> ChannelSpec {
        match self {
            ChannelKind::Bath => ChannelSpec::Bath { gamma1_t: value },
            ChannelKind::Dephasing => ChannelSpec::Dephasing { gamma2_t: value },
            ChannelKind::Collective => ChannelSpec::CollectiveDephasing { t_over_T: value },
            ChannelKind::Depolarizing => ChannelSpec::Depolarizing { p: value, mode },
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bath" | "amplitude-damping" => Ok(ChannelKind::Bath),
            "dephasing" => Ok(ChannelKind::Dephasing),
            "collective" | "collective-dephasing" => Ok(ChannelKind::Collective),
            "depolarizing" | "depolarising" => Ok(ChannelKind::Depolarizing),
            other => Err(Error::Config(format!(
                "unknown channel {other:?} (expected bath, dephasing, collective or depolarizing)"
            ))),
        }
    }
}

/// One of the four channels with its dimensionless parameter.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "channel", rename_all = "lowercase")]
pub enum ChannelSpec {
    /// Zero-temperature bath, parameter `γ1·t`.
    Bath { gamma1_t: f64 },
    /// Independent phase damping, parameter `γ2·t`.
    Dephasing { gamma2_t: f64 },
    /// Pairwise collective dephasing, parameter `t/T = Γ·t`.
    #[serde(rename = "collective")]
    CollectiveDephasing { t_over_T: f64 },
    /// Depolarizing with probability `p`.
    Depolarizing { p: f64, mode: DepolarizingMode },
}

impl ChannelSpec {
    pub fn kind(&self) -> ChannelKind {
        match self {
            ChannelSpec::Bath { .. } => ChannelKind::Bath,
            ChannelSpec::Dephasing { .. } => ChannelKind::Dephasing,
            ChannelSpec::CollectiveDephasing { .. } => ChannelKind::Collective,
            ChannelSpec::Depolarizing { .. } => ChannelKind::Depolarizing,
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            ChannelSpec::Bath { gamma1_t } => gamma1_t,
            ChannelSpec::Dephasing { gamma2_t } => gamma2_t,
            ChannelSpec::CollectiveDephasing { t_over_T } => t_over_T,
            ChannelSpec::Depolarizing { p, .. } => p,
        }
    }

    pub fn mode(&self) -> Option<DepolarizingMode> {
        match *self {
            ChannelSpec::Depolarizing { mode, .. } => Some(mode),
            _ => None,
        }
    }

    /// Same channel family and mode with a different parameter.
    pub fn with_parameter(&self, value: f64) -> ChannelSpec {
        self.kind()
            .with_parameter(value, self.mode().unwrap_or_default())
    }

    /// `name=value[;mode=...]`, used in reports.
    pub fn params_label(&self) -> String {
        let base = format!("{}={}", self.kind().parameter_name(), self.parameter());
        match self.mode() {
            Some(mode) => format!("{base};mode={}", mode.name()),
            None => base,
        }
    }

    /// Checks the parameter range.
    pub fn validate(&self) -> Result<()> {
        let value = self.parameter();
        let name = self.kind().parameter_name();
        if !value.is_finite() {
            return Err(Error::Parameter {
                name,
                value,
                reason: "must be finite",
            });
        }
        match self {
            ChannelSpec::Depolarizing { p, .. } if !(0.0..=1.0).contains(p) => {
                Err(Error::Parameter {
                    name,
                    value,
                    reason: "must lie in [0, 1]",
                })
            }
            _ if value < 0.0 => Err(Error::Parameter {
                name,
                value,
                reason: "must be non-negative",
            }),
            _ => Ok(()),
        }
    }

    /// Checks the parameter range and the qubit count.
    pub fn check(&self, n: usize) -> Result<()> {
        self.validate()?;
        check_qubits(n)?;
        if matches!(self, ChannelSpec::CollectiveDephasing { .. }) && n % 2 != 0 {
            return Err(Error::OddQubitCount(n));
        }
        Ok(())
    }

    /// The local Kraus set the channel is built from, if it has one.
    ///
    /// Global depolarizing acts on the whole register and has none.
    pub fn local_kraus(&self) -> Result<Option<KrausSet>> {
        self.validate()?;
        Ok(match *self {
            ChannelSpec::Bath { gamma1_t } => Some(bath_kraus(gamma1_t)?),
            ChannelSpec::Dephasing { gamma2_t } => Some(dephasing_kraus(gamma2_t)?),
            ChannelSpec::CollectiveDephasing { t_over_T } => Some(collective_kraus(t_over_T)?),
            ChannelSpec::Depolarizing {
                p,
                mode: DepolarizingMode::PerQubit,
            } => Some(depolarizing_kraus(p)?),
            ChannelSpec::Depolarizing {
                mode: DepolarizingMode::Global,
                ..
            } => None,
        })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value,
            reason: "must be finite and non-negative",
        })
    }
}

fn probability(value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Parameter {
            name: "p",
            value,
            reason: "must lie in [0, 1]",
        })
    }
}

/// Amplitude damping with `q = e^{-γ1 t}`:
/// `K0 = [[√q, 0], [0, 1]]`, `K1 = [[0, 0], [√(1−q), 0]]`.
pub fn bath_kraus(gamma1_t: f64) -> Result<KrausSet> {
    non_negative("gamma1_t", gamma1_t)?;
    let q = (-gamma1_t).exp();
    KrausSet::new(
        1,
        vec![
            vec![re(q.sqrt()), ZERO, ZERO, re(1.0)],
            vec![ZERO, ZERO, re((1.0 - q).sqrt()), ZERO],
        ],
    )
}

/// Phase damping with `λ = 1 − e^{-γ2 t}`:
/// `K0 = diag(1, √(1−λ))`, `K1 = diag(0, √λ)`.
pub fn dephasing_kraus(gamma2_t: f64) -> Result<KrausSet> {
    non_negative("gamma2_t", gamma2_t)?;
    let lambda = -(-gamma2_t).exp_m1();
    KrausSet::new(
        1,
        vec![
            vec![re(1.0), ZERO, ZERO, re((1.0 - lambda).sqrt())],
            vec![ZERO, ZERO, ZERO, re(lambda.sqrt())],
        ],
    )
}

/// `{√(1−p) I, √(p/3) X, √(p/3) Y, √(p/3) Z}`.
pub fn depolarizing_kraus(p: f64) -> Result<KrausSet> {
    probability(p)?;
    let a = (1.0 - p).sqrt();
    let b = (p / 3.0).sqrt();
    let i = Complex64::I;
    KrausSet::new(
        1,
        vec![
            vec![re(a), ZERO, ZERO, re(a)],
            vec![ZERO, re(b), re(b), ZERO],
            vec![ZERO, -i * b, i * b, ZERO],
            vec![re(b), ZERO, ZERO, re(-b)],
        ],
    )
}

/// Coefficients of the collective dephasing Kraus operators at `t/T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveCoefficients {
    pub gamma3: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
}

impl CollectiveCoefficients {
    pub fn at(t_over_t: f64) -> Self {
        let e1 = (-t_over_t).exp();
        let one_minus_e1 = -(-t_over_t).exp_m1();
        let one_minus_e2 = -(-2.0 * t_over_t).exp_m1();
        Self {
            gamma3: (-t_over_t / 2.0).exp(),
            omega1: one_minus_e1.sqrt(),
            omega2: -e1 * one_minus_e1.sqrt(),
            omega3: (one_minus_e1 * one_minus_e2).sqrt(),
        }
    }
}

/// Diagonal two-qubit set
/// `D1 = diag(γ3, 1, 1, γ3)`, `D2 = diag(ω1, 0, 0, ω2)`, `D3 = diag(0, 0, 0, ω3)`.
#[allow(non_snake_case)]
pub fn collective_kraus(t_over_T: f64) -> Result<KrausSet> {
    non_negative("t_over_T", t_over_T)?;
    let c = CollectiveCoefficients::at(t_over_T);
    let diag = |d: [f64; 4]| {
        let mut m = vec![ZERO; 16];
        for (k, v) in d.into_iter().enumerate() {
            m[k * 5] = re(v);
        }
        m
    };
    KrausSet::new(
        2,
        vec![
            diag([c.gamma3, 1.0, 1.0, c.gamma3]),
            diag([c.omega1, 0.0, 0.0, c.omega2]),
            diag([0.0, 0.0, 0.0, c.omega3]),
        ],
    )
}

/// Consecutive disjoint pairs `(0,1), (2,3), …`.
pub fn consecutive_pairs(n: usize) -> Result<Vec<(usize, usize)>> {
    if n % 2 != 0 {
        return Err(Error::OddQubitCount(n));
    }
    Ok((0..n / 2).map(|k| (2 * k, 2 * k + 1)).collect())
}

/// Checks that `pairs` partition `0..n` into disjoint pairs.
pub fn check_pairing(n: usize, pairs: &[(usize, usize)]) -> Result<()> {
    if n % 2 != 0 {
        return Err(Error::OddQubitCount(n));
    }
    let mut seen = vec![false; n];
    for &(a, b) in pairs {
        for q in [a, b] {
            if q >= n {
                return Err(Error::Pairing(format!(
                    "qubit {q} out of range for {n} qubits"
                )));
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::Pairing(format!("qubit {q} appears twice")));
            }
        }
    }
    if let Some(q) = seen.iter().position(|s| !s) {
        return Err(Error::Pairing(format!("qubit {q} is not paired")));
    }
    Ok(())
}

/// Zero-temperature bath acting independently on every qubit.
pub fn apply_bath(rho: &DensityMatrix, gamma1_t: f64) -> Result<DensityMatrix> {
    let kraus = bath_kraus(gamma1_t)?;
    let mut out = rho.clone();
    for q in 0..rho.n() {
        out = kraus.apply(&out, &[q])?;
    }
    Ok(out)
}

/// Closed-form per-qubit dephasing:
/// `ρ_ij ← ρ_ij · exp(−γ2 t · hamming(i, j) / 2)`.
pub fn dephasing_apply(rho: &DensityMatrix, gamma2_t: f64) -> Result<DensityMatrix> {
    non_negative("gamma2_t", gamma2_t)?;
    let n = rho.n();
    let dim = rho.dim();
    let factors: Vec<f64> = (0..=n)
        .map(|h| (-gamma2_t * h as f64 / 2.0).exp())
        .collect();
    let mut out = rho.clone();
    let data = out.as_mut_slice();
    for i in 0..dim {
        for j in 0..dim {
            let h = (i ^ j).count_ones() as usize;
            if h != 0 {
                data[i * dim + j] *= factors[h];
            }
        }
    }
    Ok(out)
}

/// Collective dephasing on consecutive pairs.
#[allow(non_snake_case)]
pub fn apply_collective(rho: &DensityMatrix, t_over_T: f64) -> Result<DensityMatrix> {
    let pairs = consecutive_pairs(rho.n())?;
    apply_collective_pairs(rho, t_over_T, &pairs)
}

/// Collective dephasing on an explicit pairing.
///
/// The Kraus operators are diagonal, so the channel multiplies `ρ_ij` by
/// `Π_pairs Σ_ν D_ν[a] D_ν[b]` where `a`, `b` are the pair's local indices in
/// `i` and `j`. Entries whose pair indices both lie in `{1, 2}` are left
/// untouched bit-for-bit.
#[allow(non_snake_case)]
pub fn apply_collective_pairs(
    rho: &DensityMatrix,
    t_over_T: f64,
    pairs: &[(usize, usize)],
) -> Result<DensityMatrix> {
    let kraus = collective_kraus(t_over_T)?;
    let n = rho.n();
    check_pairing(n, pairs)?;
    let gram = diagonal_gram(&kraus);
    let dim = rho.dim();
    let masks: Vec<(usize, usize)> = pairs
        .iter()
        .map(|&(a, b)| (qubit_mask(n, a), qubit_mask(n, b)))
        .collect();
    let local = |i: usize, (ma, mb): (usize, usize)| {
        2 * usize::from(i & ma != 0) + usize::from(i & mb != 0)
    };
    let mut out = rho.clone();
    let data = out.as_mut_slice();
    for i in 0..dim {
        for j in 0..dim {
            let mut factor = 1.0;
            let mut touched = false;
            for &m in &masks {
                let g = gram[local(i, m) * 4 + local(j, m)];
                if g != 1.0 {
                    factor *= g;
                    touched = true;
                }
            }
            if touched {
                data[i * dim + j] *= factor;
            }
        }
    }
    Ok(out)
}

/// `G[a][b] = Σ_ν D_ν[a] conj(D_ν[b])` for a diagonal Kraus set.
pub(crate) fn diagonal_gram(kraus: &KrausSet) -> Vec<f64> {
    let d = kraus.dim();
    let mut g = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            let s: Complex64 = kraus
                .ops()
                .iter()
                .map(|k| k[a * d + a] * k[b * d + b].conj())
                .sum();
            g[a * d + b] = s.re;
        }
    }
    g
}

/// `c` in `ρ → c ρ + (1 − c) I / 2^n` for global depolarizing.
pub fn global_depolarizing_contraction(p: f64, n: usize) -> f64 {
    let four_n = 4f64.powi(n as i32);
    1.0 - p * four_n / (four_n - 1.0)
}

/// Depolarizing channel in either lift.
pub fn apply_depolarizing(
    rho: &DensityMatrix,
    p: f64,
    mode: DepolarizingMode,
) -> Result<DensityMatrix> {
    probability(p)?;
    let n = rho.n();
    let dim = rho.dim();
    let mut out = rho.clone();
    match mode {
        DepolarizingMode::Global => {
            let c = global_depolarizing_contraction(p, n);
            let tr = rho.trace();
            let data = out.as_mut_slice();
            data.iter_mut().for_each(|x| *x *= c);
            let shift = tr * ((1.0 - c) / dim as f64);
            for i in 0..dim {
                data[i * dim + i] += shift;
            }
        }
        DepolarizingMode::PerQubit => {
            // Per qubit: ρ → λ ρ + (1 − λ) Tr_q(ρ) ⊗ I/2 with λ = 1 − 4p/3.
            let lambda = 1.0 - 4.0 * p / 3.0;
            let mix = (1.0 - lambda) / 2.0;
            for q in 0..n {
                let m = qubit_mask(n, q);
                let src = out.as_slice().to_vec();
                let data = out.as_mut_slice();
                for i in 0..dim {
                    for j in 0..dim {
                        let mut v = src[i * dim + j] * lambda;
                        if (i & m != 0) == (j & m != 0) {
                            let (i0, j0) = (i & !m, j & !m);
                            v += (src[i0 * dim + j0] + src[(i0 | m) * dim + (j0 | m)]) * mix;
                        }
                        data[i * dim + j] = v;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Dispatches to the channel's production applier.
pub fn apply_channel(rho: &DensityMatrix, spec: &ChannelSpec) -> Result<DensityMatrix> {
    spec.check(rho.n())?;
    match *spec {
        ChannelSpec::Bath { gamma1_t } => apply_bath(rho, gamma1_t),
        ChannelSpec::Dephasing { gamma2_t } => dephasing_apply(rho, gamma2_t),
        ChannelSpec::CollectiveDephasing { t_over_T } => apply_collective(rho, t_over_T),
        ChannelSpec::Depolarizing { p, mode } => apply_depolarizing(rho, p, mode),
    }
}
