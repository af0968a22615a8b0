//! Dense state vectors and density matrices over n-qubit registers.
//!
//! Basis index `j` encodes the computational basis string of `j` with qubit 0
//! on the most significant bit, so `|00…0⟩` is index 0 and `|11…1⟩` is index
//! `2^n - 1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register handled by the dense representation.
pub const MAX_QUBITS: usize = 8;

/// Tolerance for exact algebraic identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for eigenvalue and positivity checks.
pub const SPECTRAL_TOL: f64 = 1e-10;

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::QubitCount(n))
    }
}

/// Bit mask of `qubit` inside a basis index of an `n`-qubit register.
#[inline]
pub fn qubit_mask(n: usize, qubit: usize) -> usize {
    1 << (n - 1 - qubit)
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    n: usize,
    amp: Vec<Complex64>,
}

impl StateVector {
    /// Normalizes `raw` into a state of `n` qubits.
    pub fn new(n: usize, raw: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1 << n;
        if raw.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                actual: raw.len(),
            });
        }
        let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let amp = raw.into_iter().map(|c| c / norm).collect();
        Ok(Self { n, amp })
    }

    /// The computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1 << n;
        if index >= dim {
            return Err(Error::Dimension {
                expected: dim,
                actual: index,
            });
        }
        let mut amp = vec![Complex64::ZERO; dim];
        amp[index] = Complex64::ONE;
        Ok(Self { n, amp })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    /// Squared moduli of the amplitudes.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amp.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `make_state`: normalizes a raw amplitude array.
pub fn make_state(n: usize, raw: Vec<Complex64>) -> Result<StateVector> {
    StateVector::new(n, raw)
}

/// A `2^n × 2^n` density operator stored row-major.
///
/// Channel outputs are produced through this type too, so construction via
/// [`DensityMatrix::from_raw`] checks only the shape. Use
/// [`DensityMatrix::validate`] to check the physical invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// Wraps row-major data without checking Hermiticity, trace or positivity.
    pub fn from_raw(n: usize, data: Vec<Complex64>) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if data.len() != dim * dim {
            return Err(Error::Dimension {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    /// Builds from nested rows, checking the shape only.
    pub fn from_rows(n: usize, rows: &[Vec<Complex64>]) -> Result<Self> {
        let data = rows.iter().flatten().copied().collect();
        Self::from_raw(n, data)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(psi: &StateVector) -> Self {
        let amp = psi.amplitudes();
        let dim = amp.len();
        let mut data = Vec::with_capacity(dim * dim);
        for a in amp {
            for b in amp {
                data.push(a * b.conj());
            }
        }
        Self { n: psi.n(), data }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        let mut data = vec![Complex64::ZERO; dim * dim];
        let w = 1.0 / dim as f64;
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(w, 0.0);
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_raw(self) -> Vec<Complex64> {
        self.data
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i]).sum()
    }

    /// `max |ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let d = (self.data[i * dim + j] - self.data[j * dim + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            0.5 * (self.data[i * dim + j] + self.data[j * dim + i].conj())
        });
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Checks Hermiticity, unit trace and positivity at the standard tolerances.
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        let herm = self.hermiticity_error();
        if herm >= EXACT_TOL {
            return Err(InvariantViolation::Hermiticity(herm));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() >= EXACT_TOL || tr.im.abs() >= EXACT_TOL {
            return Err(InvariantViolation::Trace(tr.re));
        }
        let min = self.min_eigenvalue();
        if min < -SPECTRAL_TOL {
            return Err(InvariantViolation::Positivity(min));
        }
        Ok(())
    }
}

/// `density_from_pure`.
pub fn density_from_pure(psi: &StateVector) -> DensityMatrix {
    DensityMatrix::from_pure(psi)
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum InvariantViolation {
    #[error("not Hermitian: deviation {0:e}")]
    Hermiticity(f64),
    #[error("trace {0} differs from 1")]
    Trace(f64),
    #[error("negative eigenvalue {0:e}")]
    Positivity(f64),
}

/// A 1- or 2-qubit matrix together with the qubits it acts on.
///
/// For two targets `[a, b]` the local basis index is `2·bit(a) + bit(b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    mat: Vec<Complex64>,
    targets: Vec<usize>,
}

impl LocalOperator {
    /// `mat` is row-major of size `2^arity × 2^arity` where `arity = targets.len()`.
    pub fn new(mat: Vec<Complex64>, targets: Vec<usize>) -> Result<Self> {
        let arity = targets.len();
        if !(1..=2).contains(&arity) {
            return Err(Error::Arity(arity));
        }
        if arity == 2 && targets[0] == targets[1] {
            return Err(Error::DuplicateTarget);
        }
        let d = 1 << arity;
        if mat.len() != d * d {
            return Err(Error::Dimension {
                expected: d * d,
                actual: mat.len(),
            });
        }
        Ok(Self { mat, targets })
    }

    pub fn single(mat: [[Complex64; 2]; 2], target: usize) -> Self {
        Self {
            mat: mat.iter().flatten().copied().collect(),
            targets: vec![target],
        }
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.mat
    }
}

/// Full-register indices reached from `base` by the local index bits.
fn local_offsets(n: usize, targets: &[usize]) -> Vec<usize> {
    let arity = targets.len();
    (0..1usize << arity)
        .map(|l| {
            targets
                .iter()
                .enumerate()
                .filter(|&(k, _)| l & (1 << (arity - 1 - k)) != 0)
                .map(|(_, &t)| qubit_mask(n, t))
                .sum()
        })
        .collect()
}

/// Computes `K ρ K†` with `K` the local operator embedded on its targets.
///
/// The contraction runs over target-index strides and never forms the
/// `2^n × 2^n` embedding.
pub fn apply_local(rho: &DensityMatrix, op: &LocalOperator) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    apply_local_in_place(&mut out, op)?;
    Ok(out)
}

pub(crate) fn apply_local_in_place(rho: &mut DensityMatrix, op: &LocalOperator) -> Result<()> {
    let n = rho.n();
    for &t in op.targets() {
        if t >= n {
            return Err(Error::TargetOutOfRange { target: t, n });
        }
    }
    let dim = rho.dim();
    let d = 1usize << op.arity();
    let k = op.matrix();
    let offsets = local_offsets(n, op.targets());
    let target_bits: usize = offsets.iter().fold(0, |acc, o| acc | o);
    let data = rho.as_mut_slice();
    let mut buf = [Complex64::ZERO; 4];

    for base in (0..dim).filter(|b| b & target_bits == 0) {
        // Left multiplication: rows base|offset mix, every column.
        for col in 0..dim {
            for (l, &o) in offsets.iter().enumerate() {
                buf[l] = data[(base | o) * dim + col];
            }
            for (l, &o) in offsets.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for m in 0..d {
                    acc += k[l * d + m] * buf[m];
                }
                data[(base | o) * dim + col] = acc;
            }
        }
    }
    for base in (0..dim).filter(|b| b & target_bits == 0) {
        // Right multiplication by K†.
        for row in 0..dim {
            let r = row * dim;
            for (l, &o) in offsets.iter().enumerate() {
                buf[l] = data[r + (base | o)];
            }
            for (l, &o) in offsets.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for m in 0..d {
                    acc += buf[m] * k[l * d + m].conj();
                }
                data[r + (base | o)] = acc;
            }
        }
    }
    Ok(())
}

/// `Re ⟨ψ|ρ|ψ⟩`; the imaginary residual is discarded.
pub fn overlap(psi: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    let dim = psi.dim();
    if rho.dim() != dim {
        return Err(Error::Dimension {
            expected: dim,
            actual: rho.dim(),
        });
    }
    let amp = psi.amplitudes();
    let data = rho.as_slice();
    let mut total = Complex64::ZERO;
    for (i, a) in amp.iter().enumerate() {
        let row = &data[i * dim..(i + 1) * dim];
        let inner: Complex64 = row.iter().zip(amp).map(|(r, b)| r * b).sum();
        total += a.conj() * inner;
    }
    debug_assert!(
        total.im.abs() < SPECTRAL_TOL,
        "overlap residual {}",
        total.im
    );
    Ok(total.re)
}
