use thiserror::Error;

use crate::channels::ChannelKind;
use crate::sampler::StateClass;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count {0} outside supported range 1..=8")]
    QubitCount(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("target qubit {target} out of range for {n} qubits")]
    TargetOutOfRange { target: usize, n: usize },
    #[error("local operator targets must be distinct")]
    DuplicateTarget,
    #[error("local operator arity must be 1 or 2, got {0}")]
    Arity(usize),
    #[error("invalid parameter {name} = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("{class} states require at least 2 qubits, got {n}")]
    ClassQubits { class: StateClass, n: usize },
    #[error("collective dephasing requires even qubit count, got {0}")]
    OddQubitCount(usize),
    #[error("invalid qubit pairing: {0}")]
    Pairing(String),
    #[error("Kraus set violates completeness: max deviation {0:e}")]
    Completeness(f64),
    #[error("oracle supports at most {max} qubits, got {n}")]
    OracleTooLarge { n: usize, max: usize },
    #[error("no closed-form fidelity for {class} states under {channel}")]
    NoClosedForm {
        class: StateClass,
        channel: ChannelKind,
    },
    #[error("empty input")]
    Empty,
    #[error("histogram needs at least one bin")]
    ZeroBins,
    #[error("no compatible (channel, class, n) combinations: {0}")]
    NoCompatibleTriples(String),
    #[error("target mean {target} unreachable: attainable range [{low}, {high}]")]
    Unreachable { target: f64, low: f64, high: f64 },
    #[error("{0}")]
    Config(String),
}
