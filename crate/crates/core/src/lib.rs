//! Simulation of multi-qubit pure states under non-unitary channels.
//!
//! Four channels are provided (zero-temperature bath, dephasing, pairwise
//! collective dephasing, depolarizing), together with Haar-uniform sampling of
//! general, GHZ-type and W-type states and the Monte-Carlo machinery that turns
//! per-state fidelities into average-fidelity curves and histograms.
//!
//! ```
//! use qdecohere_core::{fidelity, sample_state, ChannelSpec, SeededRng, StateClass};
//!
//! let psi = sample_state(StateClass::WType, 3, &mut SeededRng::new(0, 0)).unwrap();
//! let f = fidelity(&psi, &ChannelSpec::Bath { gamma1_t: 1.0 }).unwrap();
//! assert!((f - (-2.0f64).exp()).abs() < 1e-12);
//! ```

pub mod channels;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod oracle;
pub mod qstate;
pub mod report;
pub mod sampler;

pub use channels::{
    apply_bath, apply_channel, apply_collective, apply_depolarizing, bath_kraus, collective_kraus,
    dephasing_apply, ChannelKind, ChannelSpec, DepolarizingMode, KrausSet,
};
pub use error::{Error, Result};
pub use harness::{
    calibrate, run, Calibration, CalibrationRequest, ExperimentConfig, ExperimentResult,
};
pub use metrics::{fidelity, fidelity_fast, summarize, FidelityStats, Histogram};
pub use num_complex::Complex64;
pub use qstate::{
    apply_local, density_from_pure, make_state, overlap, DensityMatrix, LocalOperator, StateVector,
};
pub use sampler::{haar_unit, sample_state, SeededRng, StateClass};
