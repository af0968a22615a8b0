//! Fidelity against the input state and Monte-Carlo summaries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{
    self, apply_channel, consecutive_pairs, diagonal_gram, global_depolarizing_contraction,
    ChannelSpec, DepolarizingMode,
};
use crate::error::{Error, Result};
use crate::qstate::{density_from_pure, overlap, qubit_mask, StateVector, SPECTRAL_TOL};

/// Default number of histogram bins on `[0, 1]`.
pub const DEFAULT_BINS: usize = 50;

/// `⟨ψ| E(|ψ⟩⟨ψ|) |ψ⟩` through the density-matrix path.
pub fn fidelity(psi: &StateVector, spec: &ChannelSpec) -> Result<f64> {
    let out = apply_channel(&density_from_pure(psi), spec)?;
    overlap(psi, &out)
}

/// Same quantity as [`fidelity`] without forming the density matrix where the
/// channel allows it.
///
/// * bath: `Σ_S |⟨ψ|K_S|ψ⟩|²` over the product Kraus terms, enumerated as
///   `(index, submask of its zero bits)` pairs, `3^n` work;
/// * dephasing and collective dephasing: the Kraus operators are diagonal, so
///   `F = pᵀ (⊗ G) p` with `p_i = |ψ_i|²` and `G` the local Gram matrix;
/// * global depolarizing: `c + (1 − c)/2^n`.
///
/// Per-qubit depolarizing falls back to the density-matrix path.
pub fn fidelity_fast(psi: &StateVector, spec: &ChannelSpec) -> Result<f64> {
    let n = psi.n();
    spec.check(n)?;
    match *spec {
        ChannelSpec::Bath { gamma1_t } => Ok(bath_fidelity(psi, gamma1_t)),
        ChannelSpec::Dephasing { gamma2_t } => {
            let d = (-gamma2_t / 2.0).exp();
            let gram = [1.0, d, d, 1.0];
            let mut p = psi.probabilities();
            let weights = p.clone();
            for q in 0..n {
                apply_gram(&mut p, &gram, &[qubit_mask(n, q)]);
            }
            Ok(dot(&weights, &p))
        }
        ChannelSpec::CollectiveDephasing { t_over_T } => {
            let gram = diagonal_gram(&channels::collective_kraus(t_over_T)?);
            let mut p = psi.probabilities();
            let weights = p.clone();
            for (a, b) in consecutive_pairs(n)? {
                apply_gram(&mut p, &gram, &[qubit_mask(n, a), qubit_mask(n, b)]);
            }
            Ok(dot(&weights, &p))
        }
        ChannelSpec::Depolarizing {
            p,
            mode: DepolarizingMode::Global,
        } => {
            let c = global_depolarizing_contraction(p, n);
            Ok(c + (1.0 - c) / (1 << n) as f64)
        }
        ChannelSpec::Depolarizing {
            mode: DepolarizingMode::PerQubit,
            ..
        } => fidelity(psi, spec),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Applies a real local matrix on the bits in `masks` (first mask is the most
/// significant local bit) to a vector over the register.
fn apply_gram(v: &mut [f64], gram: &[f64], masks: &[usize]) {
    let d = 1 << masks.len();
    let offsets: Vec<usize> = (0..d)
        .map(|l| {
            masks
                .iter()
                .enumerate()
                .filter(|&(k, _)| l & (1 << (masks.len() - 1 - k)) != 0)
                .map(|(_, &m)| m)
                .sum()
        })
        .collect();
    let all: usize = masks.iter().sum();
    let mut buf = [0.0; 4];
    for base in (0..v.len()).filter(|b| b & all == 0) {
        for (l, &o) in offsets.iter().enumerate() {
            buf[l] = v[base | o];
        }
        for (l, &o) in offsets.iter().enumerate() {
            v[base | o] = (0..d).map(|m| gram[l * d + m] * buf[m]).sum();
        }
    }
}

fn bath_fidelity(psi: &StateVector, gamma1_t: f64) -> f64 {
    let amp = psi.amplitudes();
    let dim = amp.len();
    let q = (-gamma1_t).exp();
    let sqrt_q = q.sqrt();
    let n = psi.n();
    let sqrt_q_pow: Vec<f64> = (0..=n).map(|k| sqrt_q.powi(k as i32)).collect();
    // acc[S] = Σ_i conj(ψ[i|S]) ψ[i] √q^{#zeros(i) − |S|}, S ⊆ zeros(i)
    let mut acc = vec![Complex64::ZERO; dim];
    for (i, a) in amp.iter().enumerate() {
        if *a == Complex64::ZERO {
            continue;
        }
        let zeros = !i & (dim - 1);
        let nz = zeros.count_ones();
        let mut s = zeros;
        loop {
            let w = sqrt_q_pow[(nz - s.count_ones()) as usize];
            acc[s] += amp[i | s].conj() * a * w;
            if s == 0 {
                break;
            }
            s = (s - 1) & zeros;
        }
    }
    let decay = 1.0 - q;
    acc.iter()
        .enumerate()
        .map(|(s, a)| decay.powi(s.count_ones() as i32) * a.norm_sqr())
        .sum()
}

/// Uniform histogram on `[0, 1]`; bins are right-open except the last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// `(left, right)` edges of bin `k`.
    pub fn edges(&self, k: usize) -> (f64, f64) {
        let b = self.bins() as f64;
        (k as f64 / b, (k + 1) as f64 / b)
    }

    pub fn bin_of(value: f64, bins: usize) -> usize {
        ((value * bins as f64).floor() as usize).min(bins - 1)
    }
}

/// Summary of one Monte-Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityStats {
    pub count: usize,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Histogram,
}

impl FidelityStats {
    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }
}

/// Exact summary of a fidelity sample.
///
/// Values may stray outside `[0, 1]` by less than `1e-10` and are clamped.
/// The sums run over the sorted sample so the result does not depend on input
/// order.
pub fn summarize(fidelities: &[f64], bins: usize) -> Result<FidelityStats> {
    if fidelities.is_empty() {
        return Err(Error::Empty);
    }
    if bins == 0 {
        return Err(Error::ZeroBins);
    }
    let mut values = Vec::with_capacity(fidelities.len());
    for &f in fidelities {
        if !(-SPECTRAL_TOL..=1.0 + SPECTRAL_TOL).contains(&f) {
            return Err(Error::Parameter {
                name: "fidelity",
                value: f,
                reason: "must lie in [0, 1]",
            });
        }
        values.push(f.clamp(0.0, 1.0));
    }
    values.sort_by(f64::total_cmp);

    let count = values.len();
    let min = values[0];
    let max = values[count - 1];
    let mean = (values.iter().sum::<f64>() / count as f64).clamp(min, max);
    let variance = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / count as f64;
    let mut counts = vec![0u64; bins];
    for &v in &values {
        counts[Histogram::bin_of(v, bins)] += 1;
    }
    Ok(FidelityStats {
        count,
        mean,
        variance,
        min,
        max,
        histogram: Histogram { counts },
    })
}
