//! Seeded Haar-uniform sampling of pure states in the three state classes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{check_qubits, StateVector};

/// Support pattern of a sampled state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateClass {
    /// Haar-random over the full register.
    General,
    /// `α|00…0⟩ + β|11…1⟩`.
    #[serde(rename = "ghz")]
    GhzType,
    /// Superposition of the `n` basis states with exactly one qubit set.
    #[serde(rename = "w")]
    WType,
}

impl StateClass {
    pub const ALL: [StateClass; 3] = [StateClass::General, StateClass::GhzType, StateClass::WType];

    pub fn name(self) -> &'static str {
        match self {
            StateClass::General => "general",
            StateClass::GhzType => "ghz",
            StateClass::WType => "w",
        }
    }

    pub fn min_qubits(self) -> usize {
        match self {
            StateClass::General => 1,
            StateClass::GhzType | StateClass::WType => 2,
        }
    }

    pub fn check(self, n: usize) -> Result<()> {
        check_qubits(n)?;
        if n < self.min_qubits() {
            return Err(Error::ClassQubits { class: self, n });
        }
        Ok(())
    }

    /// Basis indices that may carry nonzero amplitude.
    pub fn support(self, n: usize) -> Vec<usize> {
        match self {
            StateClass::General => (0..1 << n).collect(),
            StateClass::GhzType => vec![0, (1 << n) - 1],
            StateClass::WType => (0..n).map(|k| 1 << k).collect(),
        }
    }
}

impl fmt::Display for StateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StateClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "general" => Ok(StateClass::General),
            "ghz" | "ghz-type" => Ok(StateClass::GhzType),
            "w" | "w-type" => Ok(StateClass::WType),
            other => Err(Error::Config(format!(
                "unknown state class {other:?} (expected general, ghz or w)"
            ))),
        }
    }
}

/// A ChaCha8 stream fixed by `(master_seed, stream_index)`.
///
/// Each Monte-Carlo sample owns its stream, so results do not depend on how
/// samples are scheduled across threads.
#[derive(Debug, Clone)]
pub struct SeededRng {
    master_seed: u64,
    stream_index: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Haar-uniform unit vector in `C^d`, from normalized standard complex Gaussians.
pub fn haar_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Vec<Complex64>> {
    if d == 0 {
        return Err(Error::Dimension {
            expected: 1,
            actual: 0,
        });
    }
    loop {
        let mut v: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        // A zero draw has probability zero, but redraw rather than divide by it.
        if norm > 0.0 {
            v.iter_mut().for_each(|c| *c /= norm);
            return Ok(v);
        }
    }
}

/// Draws a random state of `class` on `n` qubits.
pub fn sample_state<R: Rng + ?Sized>(
    class: StateClass,
    n: usize,
    rng: &mut R,
) -> Result<StateVector> {
    class.check(n)?;
    let support = class.support(n);
    let coeffs = haar_unit(support.len(), rng)?;
    let mut amp = vec![Complex64::ZERO; 1 << n];
    for (idx, c) in support.into_iter().zip(coeffs) {
        amp[idx] = c;
    }
    StateVector::new(n, amp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn haar_unit_of_dimension_one_has_unit_modulus() {
        let mut rng = SeededRng::new(3, 0);
        for _ in 0..100 {
            let v = haar_unit(1, &mut rng).unwrap();
            assert!((v[0].norm() - 1.0).abs() < 1e-12);
        }
        assert!(haar_unit(0, &mut rng).is_err());
    }

    #[test]
    fn haar_moments_in_dimension_four() {
        let mut rng = SeededRng::new(2024, 0);
        let draws = 100_000;
        let mut m2 = [0.0; 4];
        let mut m4 = [0.0; 4];
        for _ in 0..draws {
            let v = haar_unit(4, &mut rng).unwrap();
            for (j, c) in v.iter().enumerate() {
                let p = c.norm_sqr();
                m2[j] += p;
                m4[j] += p * p;
            }
        }
        for j in 0..4 {
            // E|c|² = 1/d and E|c|⁴ = 2/(d(d+1)).
            assert!((m2[j] / draws as f64 - 0.25).abs() < 0.01);
            assert!((m4[j] / draws as f64 - 0.1).abs() < 0.01);
        }
    }

    #[test]
    fn support_patterns_are_exact() {
        let mut rng = SeededRng::new(5, 1);
        for _ in 0..50 {
            let ghz = sample_state(StateClass::GhzType, 3, &mut rng).unwrap();
            for (i, a) in ghz.amplitudes().iter().enumerate() {
                assert_eq!(*a == Complex64::ZERO, i != 0 && i != 7, "index {i}");
            }
            let w = sample_state(StateClass::WType, 3, &mut rng).unwrap();
            for (i, a) in w.amplitudes().iter().enumerate() {
                assert_eq!(*a == Complex64::ZERO, ![1, 2, 4].contains(&i), "index {i}");
            }
        }
    }

    #[test]
    fn sampled_states_are_normalized() {
        let mut rng = SeededRng::new(9, 9);
        for n in 1..=8 {
            for class in StateClass::ALL {
                if class.check(n).is_err() {
                    continue;
                }
                let s = sample_state(class, n, &mut rng).unwrap();
                assert_eq!(s.dim(), 1 << n);
                assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn same_seed_same_state() {
        let a = sample_state(StateClass::General, 1, &mut SeededRng::new(42, 17)).unwrap();
        let b = sample_state(StateClass::General, 1, &mut SeededRng::new(42, 17)).unwrap();
        assert_eq!(a, b);
        let c = sample_state(StateClass::General, 1, &mut SeededRng::new(42, 18)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn class_qubit_requirements() {
        let mut rng = SeededRng::new(0, 0);
        assert_eq!(
            sample_state(StateClass::WType, 1, &mut rng).unwrap_err(),
            Error::ClassQubits {
                class: StateClass::WType,
                n: 1
            }
        );
        assert!(sample_state(StateClass::GhzType, 1, &mut rng).is_err());
        assert!(sample_state(StateClass::General, 1, &mut rng).is_ok());
        assert!(sample_state(StateClass::General, 9, &mut rng).is_err());
    }

    #[test]
    fn ghz_weight_moments() {
        let samples = 100_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for i in 0..samples {
            let s = sample_state(StateClass::GhzType, 4, &mut SeededRng::new(77, i)).unwrap();
            let p = s.amplitudes()[0].norm_sqr();
            m1 += p;
            m2 += p * p;
        }
        assert!((m1 / samples as f64 - 0.5).abs() < 0.01);
        assert!((m2 / samples as f64 - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn streams_do_not_overlap() {
        let mut seen = HashSet::with_capacity(1_000_000);
        for stream in 0..100 {
            let mut rng = SeededRng::new(12345, stream);
            for _ in 0..10_000 {
                assert!(
                    seen.insert(rng.next_u64()),
                    "repeated word in stream {stream}"
                );
            }
        }
    }

    #[test]
    fn class_names_round_trip() {
        for class in StateClass::ALL {
            assert_eq!(class.name().parse::<StateClass>().unwrap(), class);
        }
        assert!("bell".parse::<StateClass>().is_err());
    }
}
