//! Route enumeration and per-route kernels.
//!
//! Every route through the acyclic mode graph is one term of the path sum.
//! A route's kernel is the ordered product of its hop amplitudes: element
//! transfers and segment propagation phases.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::circuit::{element_transfer, Arm, Circuit, ModeId, Port, SourceKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BranchLabel {
    Top,
    Bottom,
}

impl BranchLabel {
    pub const BOTH: [BranchLabel; 2] = [BranchLabel::Top, BranchLabel::Bottom];
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchLabel::Top => "top",
            BranchLabel::Bottom => "bottom",
        })
    }
}

/// Where enumeration starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    /// The output port of a single-photon source.
    Single(String),
    /// One photon of one emission branch of a pair source.
    Branch {
        source: String,
        branch: BranchLabel,
        arm: Arm,
    },
    /// One photon of a pair source, both branches.
    Pair { source: String, arm: Arm },
    /// An arbitrary mode inside the circuit.
    Mode(ModeId),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hop {
    /// Free propagation along a mode that carries a segment.
    Segment(ModeId),
    Element {
        id: String,
        input: ModeId,
        output: ModeId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub branch: Option<BranchLabel>,
    pub start: ModeId,
    pub hops: Vec<Hop>,
    pub terminal: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub amplitude: Complex64,
}

impl Kernel {
    pub const IDENTITY: Kernel = Kernel {
        amplitude: Complex64::new(1.0, 0.0),
    };

    pub fn new(amplitude: Complex64) -> Self {
        Kernel { amplitude }
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Self {
        Kernel::new(Complex64::from_polar(magnitude, phase))
    }
}

impl Mul for Kernel {
    type Output = Kernel;

    fn mul(self, rhs: Kernel) -> Kernel {
        compose(self, rhs)
    }
}

/// Kernels of successive legs multiply; their phases add.
pub fn compose(first: Kernel, second: Kernel) -> Kernel {
    Kernel::new(first.amplitude * second.amplitude)
}

fn origin_starts(circuit: &Circuit, origin: &Origin) -> Result<Vec<(Option<BranchLabel>, ModeId)>> {
    let source = |id: &str| {
        circuit
            .source(id)
            .ok_or_else(|| Error::UnknownSource(id.to_owned()))
    };
    match origin {
        Origin::Mode(m) => Ok(vec![(None, m.clone())]),
        Origin::Single(id) => match &source(id)?.kind {
            SourceKind::SinglePhoton { output } => Ok(vec![(None, output.clone())]),
            _ => Err(Error::NotSinglePhoton(id.clone())),
        },
        Origin::Branch {
            source: id,
            branch,
            arm,
        } => {
            let mode = source(id)?
                .branch_mode(*branch, *arm)
                .ok_or_else(|| Error::NotPairSource(id.clone()))?;
            Ok(vec![(Some(*branch), mode.clone())])
        }
        Origin::Pair { source: id, arm } => {
            let src = source(id)?;
            BranchLabel::BOTH
                .iter()
                .map(|b| {
                    src.branch_mode(*b, *arm)
                        .map(|m| (Some(*b), m.clone()))
                        .ok_or_else(|| Error::NotPairSource(id.clone()))
                })
                .collect()
        }
    }
}

/// Every route from `origin` to `detector`, sorted by hop sequence.
///
/// The circuit must be valid (acyclic); routes are followed mode by mode and
/// branch only at beam splitters.
pub fn enumerate_paths(circuit: &Circuit, origin: &Origin, detector: &str) -> Result<Vec<Path>> {
    let target = circuit
        .detectors
        .iter()
        .position(|d| d.id == detector)
        .ok_or_else(|| Error::UnknownDetector(detector.to_owned()))?;
    let wiring = circuit.wiring();
    let has_segment = |m: &ModeId| circuit.segments.iter().any(|s| &s.mode == m);

    let mut paths = Vec::new();
    for (branch, start) in origin_starts(circuit, origin)? {
        let mut routes = Vec::new();
        // (mode to enter, hops so far)
        let mut stack = vec![(start.clone(), Vec::new())];
        while let Some((mode, mut hops)) = stack.pop() {
            if has_segment(&mode) {
                hops.push(Hop::Segment(mode.clone()));
            }
            match wiring.consumer(&mode) {
                Some(Port::Detector(d)) if d == target => routes.push(hops),
                Some(Port::Element(e)) => {
                    let element = &circuit.elements[e];
                    for out in element.outputs() {
                        let mut next = hops.clone();
                        next.push(Hop::Element {
                            id: element.id.clone(),
                            input: mode.clone(),
                            output: out.clone(),
                        });
                        stack.push((out.clone(), next));
                    }
                }
                _ => {}
            }
        }
        routes.sort();
        paths.extend(routes.into_iter().map(|hops| Path {
            branch,
            start: start.clone(),
            hops,
            terminal: detector.to_owned(),
        }));
    }
    Ok(paths)
}

/// Product of hop amplitudes along a connected hop list.
pub fn hops_kernel(circuit: &Circuit, hops: &[Hop]) -> Result<Kernel> {
    let mut current: Option<&ModeId> = None;
    let mut kernel = Kernel::IDENTITY;
    for (index, hop) in hops.iter().enumerate() {
        let disconnected = |reason: String| Error::DisconnectedHops { index, reason };
        match hop {
            Hop::Segment(mode) => {
                if current.is_some_and(|c| c != mode) {
                    return Err(disconnected(format!(
                        "segment on `{mode}` does not follow `{}`",
                        current.unwrap()
                    )));
                }
                let segment = circuit
                    .segments
                    .iter()
                    .find(|s| &s.mode == mode)
                    .ok_or_else(|| disconnected(format!("no segment on `{mode}`")))?;
                kernel = kernel * Kernel::from_polar(1.0, segment.propagation_phase);
                current = Some(mode);
            }
            Hop::Element { id, input, output } => {
                if current.is_some_and(|c| c != input) {
                    return Err(disconnected(format!(
                        "`{id}` enters from `{input}`, previous hop left in `{}`",
                        current.unwrap()
                    )));
                }
                let element = circuit
                    .element(id)
                    .ok_or_else(|| Error::UnknownElement(id.clone()))?;
                kernel = kernel * Kernel::new(element_transfer(element, input, output)?);
                current = Some(output);
            }
        }
    }
    Ok(kernel)
}

/// Kernel of a complete route.
///
/// For pair-source routes the branch amplitude is not included; the joint
/// amplitude applies it once per branch.
pub fn path_kernel(circuit: &Circuit, path: &Path) -> Result<Kernel> {
    let first_mode = match path.hops.first() {
        Some(Hop::Segment(m)) => Some(m),
        Some(Hop::Element { input, .. }) => Some(input),
        None => None,
    };
    if let Some(m) = first_mode.filter(|m| **m != path.start) {
        return Err(Error::DisconnectedHops {
            index: 0,
            reason: format!("route starts at `{}` but first hop is on `{m}`", path.start),
        });
    }
    hops_kernel(circuit, &path.hops)
}

/// Sum of the kernels of every route from `origin` to `detector`.
pub fn summed_kernel(circuit: &Circuit, origin: &Origin, detector: &str) -> Result<Complex64> {
    enumerate_paths(circuit, origin, detector)?
        .iter()
        .map(|p| path_kernel(circuit, p).map(|k| k.amplitude))
        .sum()
}
