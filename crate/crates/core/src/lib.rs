//! Path-sum simulation of photonic interferometers.
//!
//! A [`Circuit`] is described as a graph of beam splitters, mirrors and phase
//! shifters joined by named modes. Every route from a source to a detector
//! contributes the product of its hop amplitudes; routes to the same detector
//! add.
//!
//! - [`interference`]: one photon, detection probabilities and fringes.
//! - [`entanglement`]: photon pairs, joint tables and marginals.
//! - [`oracle`]: independent mode-vector propagation used to cross-check.
//! - [`montecarlo`]: sampled detection events and coincidence counting.
//! - [`dsl`]: the `.pic` text format.
//! - [`scenarios`]: ready-made interferometers.

pub mod circuit;
pub mod dsl;
pub mod entanglement;
pub mod error;
pub mod interference;
pub mod montecarlo;
pub mod oracle;
pub mod path;
pub mod scenarios;

pub use circuit::{
    validate, Arm, Circuit, Detector, Element, ElementKind, ModeId, Segment, Source, SourceKind,
    Violation,
};
pub use error::{Error, Result};
pub use path::{BranchLabel, Kernel, Origin, Path};
