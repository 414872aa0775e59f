use thiserror::Error;

use crate::circuit::ModeId;

pub type Result<T> = std::result::Result<T, Error>;

/// Domain errors raised by the engines. Structural defects of a circuit are
/// reported as [`crate::circuit::Violation`]s instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("wavelength must be positive, got {0} nm")]
    NonPositiveWavelength(f64),
    #[error("length must be non-negative, got {0} nm")]
    NegativeLength(f64),
    #[error("element `{element}` has no port pair {input} -> {output}")]
    InvalidPortPair {
        element: String,
        input: ModeId,
        output: ModeId,
    },
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown detector `{0}`")]
    UnknownDetector(String),
    #[error("unknown source `{0}`")]
    UnknownSource(String),
    #[error("unknown phase shifter `{0}`")]
    UnknownShifter(String),
    #[error("source `{0}` is not a single-photon source")]
    NotSinglePhoton(String),
    #[error("source `{0}` is not a pair source")]
    NotPairSource(String),
    #[error("hop list is disconnected at hop {index}: {reason}")]
    DisconnectedHops { index: usize, reason: String },
    #[error("detectors are not partitioned into two photon arms: {0}")]
    ArmsNotPartitioned(String),
    #[error("circuit is invalid: {0}")]
    InvalidCircuit(String),
    #[error("phase image: {0}")]
    InvalidImage(String),
    #[error("unpaired trial {0}")]
    UnpairedTrial(u64),
}
