//! First-order interference: one photon, several routes to a detector.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuit::{Circuit, ElementKind, SourceKind};
use crate::error::{Error, Result};
use crate::path::{summed_kernel, Origin};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub value: Complex64,
}

impl Amplitude {
    pub fn new(value: Complex64) -> Self {
        Amplitude { value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability {
    pub value: f64,
}

impl Probability {
    pub fn new(value: f64) -> Self {
        Probability { value }
    }
}

/// Sum of all route kernels from a single-photon source to a detector.
/// A detector with no route gets amplitude 0.
pub fn first_order_amplitude(circuit: &Circuit, source: &str, detector: &str) -> Result<Amplitude> {
    let src = circuit
        .source(source)
        .ok_or_else(|| Error::UnknownSource(source.to_owned()))?;
    if !matches!(src.kind, SourceKind::SinglePhoton { .. }) {
        return Err(Error::NotSinglePhoton(source.to_owned()));
    }
    let value = summed_kernel(circuit, &Origin::Single(source.to_owned()), detector)?;
    Ok(Amplitude::new(value))
}

pub fn detection_probability(a: Amplitude) -> Probability {
    Probability::new(a.value.norm_sqr())
}

/// Detection probability at `detector` for every value of `shifter`.
pub fn fringe_sweep(
    circuit: &Circuit,
    source: &str,
    shifter: &str,
    values: &[f64],
    detector: &str,
) -> Result<Vec<(f64, Probability)>> {
    let is_shifter = circuit
        .element(shifter)
        .is_some_and(|e| matches!(e.kind, ElementKind::PhaseShifter { .. }));
    if !is_shifter {
        return Err(Error::UnknownShifter(shifter.to_owned()));
    }
    values
        .par_iter()
        .map(|&phi| {
            let c = circuit.with_shifter_value(shifter, phi)?;
            let a = first_order_amplitude(&c, source, detector)?;
            Ok((phi, detection_probability(a)))
        })
        .collect()
}

/// The first single-photon source of a circuit, if any.
pub fn single_source(circuit: &Circuit) -> Option<&str> {
    circuit
        .sources
        .iter()
        .find(|s| matches!(s.kind, SourceKind::SinglePhoton { .. }))
        .map(|s| s.id.as_str())
}
