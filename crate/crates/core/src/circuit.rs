//! Static description of an optical circuit.
//!
//! A circuit is a directed graph: elements, sources and detectors are the
//! nodes, and named modes are the edges connecting one producing port to one
//! consuming port. Free propagation along a mode is carried by an optional
//! [`Segment`] phase.
//!
//! Beam-splitter port convention, used throughout the crate:
//!
//! ```text
//!            in[0] ──┐   ┌── out[0]   in[0] -> out[0]  transmit  s
//!                    ╲ ╱            in[0] -> out[1]  reflect   s·e^{iρ}
//!                    ╱ ╲            in[1] -> out[1]  transmit  s
//!            in[1] ──┘   └── out[1]   in[1] -> out[0]  reflect   s·e^{i(π-ρ)}
//! ```
//!
//! with `s = 1/√2` and `ρ = π/2` by default, which gives the symmetric
//! splitter `[[1, i], [i, 1]]/√2`. The `π - ρ` on the second input keeps the
//! splitter unitary for any configured `ρ`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::error::{Error, Result};
use crate::path::BranchLabel;

pub const DEFAULT_REFLECTION_PHASE: f64 = FRAC_PI_2;
pub const DEFAULT_AMPLITUDE_SPLIT: f64 = FRAC_1_SQRT_2;
pub const DEFAULT_BRANCH_AMPLITUDE: f64 = FRAC_1_SQRT_2;

const NORMALIZATION_TOL: f64 = 1e-12;

/// Reduce a phase into `[0, 2π)`.
pub fn reduce_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs; also folds -0.0
    if r >= TAU || r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Distance between two phases on the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = reduce_phase(a - b);
    d.min(TAU - d)
}

/// Free-propagation phase `2πL/λ`, reduced into `[0, 2π)`.
pub fn propagation_phase(length_nm: f64, wavelength_nm: f64) -> Result<f64> {
    if !wavelength_nm.is_finite() || wavelength_nm <= 0.0 {
        return Err(Error::NonPositiveWavelength(wavelength_nm));
    }
    if !length_nm.is_finite() || length_nm < 0.0 {
        return Err(Error::NegativeLength(length_nm));
    }
    // fmod is exact, so whole wavelengths drop out before any rounding
    let remainder = length_nm % wavelength_nm;
    Ok(reduce_phase(TAU * (remainder / wavelength_nm)))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId(String);

impl ModeId {
    pub fn new(name: impl Into<String>) -> Self {
        ModeId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ModeId {
    fn from(s: &str) -> Self {
        ModeId(s.to_owned())
    }
}

impl From<String> for ModeId {
    fn from(s: String) -> Self {
        ModeId(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    BeamSplitter {
        inputs: [ModeId; 2],
        outputs: [ModeId; 2],
        reflection_phase: f64,
        amplitude_split: f64,
    },
    Mirror {
        input: ModeId,
        output: ModeId,
        reflection_phase: f64,
    },
    PhaseShifter {
        input: ModeId,
        output: ModeId,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: String,
    pub kind: ElementKind,
}

impl Element {
    /// Symmetric 50:50 beam splitter. `outputs[0]` is the transmit partner of
    /// `inputs[0]`.
    pub fn beam_splitter(id: impl Into<String>, inputs: [ModeId; 2], outputs: [ModeId; 2]) -> Self {
        Self::beam_splitter_with_phase(id, inputs, outputs, DEFAULT_REFLECTION_PHASE)
    }

    pub fn beam_splitter_with_phase(
        id: impl Into<String>,
        inputs: [ModeId; 2],
        outputs: [ModeId; 2],
        reflection_phase: f64,
    ) -> Self {
        Element {
            id: id.into(),
            kind: ElementKind::BeamSplitter {
                inputs,
                outputs,
                reflection_phase: reduce_phase(reflection_phase),
                amplitude_split: DEFAULT_AMPLITUDE_SPLIT,
            },
        }
    }

    pub fn mirror(id: impl Into<String>, input: ModeId, output: ModeId) -> Self {
        Self::mirror_with_phase(id, input, output, DEFAULT_REFLECTION_PHASE)
    }

    pub fn mirror_with_phase(
        id: impl Into<String>,
        input: ModeId,
        output: ModeId,
        reflection_phase: f64,
    ) -> Self {
        Element {
            id: id.into(),
            kind: ElementKind::Mirror {
                input,
                output,
                reflection_phase: reduce_phase(reflection_phase),
            },
        }
    }

    pub fn phase_shifter(id: impl Into<String>, input: ModeId, output: ModeId, value: f64) -> Self {
        Element {
            id: id.into(),
            kind: ElementKind::PhaseShifter {
                input,
                output,
                value: reduce_phase(value),
            },
        }
    }

    pub fn inputs(&self) -> Vec<&ModeId> {
        match &self.kind {
            ElementKind::BeamSplitter { inputs, .. } => inputs.iter().collect(),
            ElementKind::Mirror { input, .. } | ElementKind::PhaseShifter { input, .. } => {
                vec![input]
            }
        }
    }

    pub fn outputs(&self) -> Vec<&ModeId> {
        match &self.kind {
            ElementKind::BeamSplitter { outputs, .. } => outputs.iter().collect(),
            ElementKind::Mirror { output, .. } | ElementKind::PhaseShifter { output, .. } => {
                vec![output]
            }
        }
    }

    fn phases(&self) -> Vec<f64> {
        match &self.kind {
            ElementKind::BeamSplitter {
                reflection_phase,
                amplitude_split,
                ..
            } => vec![*reflection_phase, *amplitude_split],
            ElementKind::Mirror {
                reflection_phase, ..
            } => vec![*reflection_phase],
            ElementKind::PhaseShifter { value, .. } => vec![*value],
        }
    }
}

/// Complex transfer amplitude of `element` from `input` to `output`.
pub fn element_transfer(element: &Element, input: &ModeId, output: &ModeId) -> Result<Complex64> {
    let invalid = || Error::InvalidPortPair {
        element: element.id.clone(),
        input: input.clone(),
        output: output.clone(),
    };
    match &element.kind {
        ElementKind::BeamSplitter {
            inputs,
            outputs,
            reflection_phase,
            amplitude_split,
        } => {
            let i = inputs.iter().position(|m| m == input).ok_or_else(invalid)?;
            let o = outputs
                .iter()
                .position(|m| m == output)
                .ok_or_else(invalid)?;
            let phase = match (i, o) {
                (0, 0) | (1, 1) => 0.0,
                (0, 1) => *reflection_phase,
                _ => PI - *reflection_phase,
            };
            Ok(Complex64::from_polar(*amplitude_split, phase))
        }
        ElementKind::Mirror {
            input: i,
            output: o,
            reflection_phase,
        } if i == input && o == output => Ok(Complex64::from_polar(1.0, *reflection_phase)),
        ElementKind::PhaseShifter {
            input: i,
            output: o,
            value,
        } if i == input && o == output => Ok(Complex64::from_polar(1.0, *value)),
        _ => Err(invalid()),
    }
}

/// Free propagation along one mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub mode: ModeId,
    pub propagation_phase: f64,
}

impl Segment {
    pub fn new(mode: ModeId, propagation_phase: f64) -> Self {
        Segment {
            mode,
            propagation_phase: reduce_phase(propagation_phase),
        }
    }

    pub fn from_length(mode: ModeId, length_nm: f64, wavelength_nm: f64) -> Result<Self> {
        Ok(Segment {
            mode,
            propagation_phase: propagation_phase(length_nm, wavelength_nm)?,
        })
    }
}

/// Which photon of a pair, and equivalently which detection arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arm {
    One,
    Two,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::One, Arm::Two];

    pub fn index(self) -> usize {
        match self {
            Arm::One => 0,
            Arm::Two => 1,
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arm::One => "1",
            Arm::Two => "2",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    SinglePhoton {
        output: ModeId,
    },
    /// Each branch emits photon 1 into `.0` and photon 2 into `.1`.
    PairSource {
        top: (ModeId, ModeId),
        bottom: (ModeId, ModeId),
        branch_amplitude: f64,
    },
    /// An unused input port. Produces a mode but emits no photon.
    Vacuum {
        output: ModeId,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub id: String,
    pub kind: SourceKind,
}

impl Source {
    pub fn single(id: impl Into<String>, output: ModeId) -> Self {
        Source {
            id: id.into(),
            kind: SourceKind::SinglePhoton { output },
        }
    }

    pub fn pair(id: impl Into<String>, top: (ModeId, ModeId), bottom: (ModeId, ModeId)) -> Self {
        Source {
            id: id.into(),
            kind: SourceKind::PairSource {
                top,
                bottom,
                branch_amplitude: DEFAULT_BRANCH_AMPLITUDE,
            },
        }
    }

    pub fn vacuum(id: impl Into<String>, output: ModeId) -> Self {
        Source {
            id: id.into(),
            kind: SourceKind::Vacuum { output },
        }
    }

    pub fn outputs(&self) -> Vec<&ModeId> {
        match &self.kind {
            SourceKind::SinglePhoton { output } | SourceKind::Vacuum { output } => vec![output],
            SourceKind::PairSource { top, bottom, .. } => {
                vec![&top.0, &top.1, &bottom.0, &bottom.1]
            }
        }
    }

    /// Emission mode of one photon in one branch of a pair source.
    pub fn branch_mode(&self, branch: BranchLabel, arm: Arm) -> Option<&ModeId> {
        match &self.kind {
            SourceKind::PairSource { top, bottom, .. } => {
                let pair = match branch {
                    BranchLabel::Top => top,
                    BranchLabel::Bottom => bottom,
                };
                Some(match arm {
                    Arm::One => &pair.0,
                    Arm::Two => &pair.1,
                })
            }
            _ => None,
        }
    }

    pub fn emits_photons(&self) -> bool {
        !matches!(self.kind, SourceKind::Vacuum { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detector {
    pub id: String,
    pub mode: ModeId,
}

impl Detector {
    pub fn new(id: impl Into<String>, mode: ModeId) -> Self {
        Detector {
            id: id.into(),
            mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub elements: Vec<Element>,
    pub segments: Vec<Segment>,
    pub sources: Vec<Source>,
    pub detectors: Vec<Detector>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn element(&self, id: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }

    pub fn source(&self, id: &str) -> Option<&Source> {
        self.sources.iter().find(|s| s.id == id)
    }

    pub fn detector(&self, id: &str) -> Option<&Detector> {
        self.detectors.iter().find(|d| d.id == id)
    }

    /// Propagation phase on `mode`, 0 when no segment is declared.
    pub fn segment_phase(&self, mode: &ModeId) -> f64 {
        self.segments
            .iter()
            .find(|s| &s.mode == mode)
            .map_or(0.0, |s| s.propagation_phase)
    }

    /// Copy of the circuit with phase shifter `id` set to `value`.
    pub fn with_shifter_value(&self, id: &str, value: f64) -> Result<Circuit> {
        let mut out = self.clone();
        let element = out
            .elements
            .iter_mut()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnknownShifter(id.to_owned()))?;
        match &mut element.kind {
            ElementKind::PhaseShifter { value: v, .. } => {
                *v = reduce_phase(value);
                Ok(out)
            }
            _ => Err(Error::UnknownShifter(id.to_owned())),
        }
    }

    /// Copy of the circuit with `delta` added to the segment phase of `mode`.
    pub fn with_added_segment_phase(&self, mode: &ModeId, delta: f64) -> Circuit {
        let mut out = self.clone();
        match out.segments.iter_mut().find(|s| &s.mode == mode) {
            Some(s) => s.propagation_phase = reduce_phase(s.propagation_phase + delta),
            None => out.segments.push(Segment::new(mode.clone(), delta)),
        }
        out
    }

    pub fn wiring(&self) -> Wiring {
        Wiring::new(self)
    }
}

/// Consumer of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    Element(usize),
    Detector(usize),
}

/// Mode-to-consumer lookup for a circuit.
#[derive(Debug, Clone)]
pub struct Wiring {
    consumers: HashMap<ModeId, Vec<Port>>,
}

impl Wiring {
    fn new(circuit: &Circuit) -> Self {
        let mut consumers: HashMap<ModeId, Vec<Port>> = HashMap::new();
        for (i, e) in circuit.elements.iter().enumerate() {
            for m in e.inputs() {
                consumers
                    .entry(m.clone())
                    .or_default()
                    .push(Port::Element(i));
            }
        }
        for (i, d) in circuit.detectors.iter().enumerate() {
            consumers
                .entry(d.mode.clone())
                .or_default()
                .push(Port::Detector(i));
        }
        Wiring { consumers }
    }

    /// The consumer of `mode`; the first one if the circuit is invalid.
    pub fn consumer(&self, mode: &ModeId) -> Option<Port> {
        self.consumers.get(mode).and_then(|c| c.first().copied())
    }

    /// Every mode reachable downstream of `start`, including `start`.
    pub fn reachable_modes<'a>(
        &self,
        circuit: &'a Circuit,
        start: impl IntoIterator<Item = &'a ModeId>,
    ) -> BTreeSet<ModeId> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<ModeId> = start.into_iter().cloned().collect();
        while let Some(m) = queue.pop_front() {
            if !seen.insert(m.clone()) {
                continue;
            }
            for port in self.consumers.get(&m).into_iter().flatten() {
                if let Port::Element(i) = port {
                    queue.extend(circuit.elements[*i].outputs().into_iter().cloned());
                }
            }
        }
        seen
    }
}

/// A broken circuit rule, naming the offending item.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("id `{0}` is declared more than once")]
    DuplicateId(String),
    #[error("mode `{0}` has more than one producer")]
    DuplicateProducer(ModeId),
    #[error("mode `{0}` has more than one consumer")]
    DuplicateConsumer(ModeId),
    #[error("mode `{0}` is dangling: {1}")]
    DanglingMode(ModeId, &'static str),
    #[error("element `{0}` lies on a cycle")]
    Cycle(String),
    #[error("detector `{0}` is not reachable from any photon source")]
    UnreachableDetector(String),
    #[error("beam splitter `{0}` must have amplitude split 1/sqrt(2)")]
    InvalidAmplitudeSplit(String),
    #[error("pair source `{0}` must have branch amplitude 1/sqrt(2)")]
    InvalidBranchAmplitude(String),
    #[error("pair source `{0}` emits two photons into the same mode")]
    OverlappingBranchModes(String),
    #[error("`{0}` carries a non-finite phase")]
    NonFinitePhase(String),
    #[error("mode `{0}` has more than one segment")]
    DuplicateSegment(ModeId),
    #[error("segment on mode `{0}` is not connected to anything")]
    UnusedSegment(ModeId),
}

impl Violation {
    /// Name of the mode, element, source or detector at fault.
    pub fn subject(&self) -> &str {
        match self {
            Violation::DuplicateProducer(m)
            | Violation::DuplicateConsumer(m)
            | Violation::DanglingMode(m, _)
            | Violation::DuplicateSegment(m)
            | Violation::UnusedSegment(m) => m.as_str(),
            Violation::DuplicateId(s)
            | Violation::Cycle(s)
            | Violation::UnreachableDetector(s)
            | Violation::InvalidAmplitudeSplit(s)
            | Violation::InvalidBranchAmplitude(s)
            | Violation::OverlappingBranchModes(s)
            | Violation::NonFinitePhase(s) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Producer {
    Element(usize),
    Single,
    Vacuum,
    Branch(usize, BranchLabel),
}

/// Check every structural rule; an empty list means the circuit is valid.
///
/// A mode has exactly one producer and one consumer, with one exception: a
/// pair-source emission mode may also be the output of an element that is fed
/// only by the opposite branch. This is how aligned idler modes (induced
/// coherence) are expressed: both emission alternatives leave in the same mode.
pub fn validate(circuit: &Circuit) -> Vec<Violation> {
    let mut violations = Vec::new();

    let mut ids = HashSet::new();
    let all_ids = circuit
        .elements
        .iter()
        .map(|e| &e.id)
        .chain(circuit.sources.iter().map(|s| &s.id))
        .chain(circuit.detectors.iter().map(|d| &d.id));
    for id in all_ids {
        if !ids.insert(id) {
            violations.push(Violation::DuplicateId(id.clone()));
        }
    }

    for e in &circuit.elements {
        if e.phases().iter().any(|p| !p.is_finite()) {
            violations.push(Violation::NonFinitePhase(e.id.clone()));
        }
        if let ElementKind::BeamSplitter {
            amplitude_split, ..
        } = e.kind
        {
            if (2.0 * amplitude_split * amplitude_split - 1.0).abs() > NORMALIZATION_TOL {
                violations.push(Violation::InvalidAmplitudeSplit(e.id.clone()));
            }
        }
    }

    let mut producers: BTreeMap<&ModeId, Vec<Producer>> = BTreeMap::new();
    for (i, e) in circuit.elements.iter().enumerate() {
        for m in e.outputs() {
            producers.entry(m).or_default().push(Producer::Element(i));
        }
    }
    for (i, s) in circuit.sources.iter().enumerate() {
        match &s.kind {
            SourceKind::SinglePhoton { output } => {
                producers.entry(output).or_default().push(Producer::Single)
            }
            SourceKind::Vacuum { output } => {
                producers.entry(output).or_default().push(Producer::Vacuum)
            }
            SourceKind::PairSource {
                top,
                bottom,
                branch_amplitude,
            } => {
                if (2.0 * branch_amplitude * branch_amplitude - 1.0).abs() > NORMALIZATION_TOL {
                    violations.push(Violation::InvalidBranchAmplitude(s.id.clone()));
                }
                let emitted: BTreeSet<&ModeId> = [&top.0, &top.1, &bottom.0, &bottom.1].into();
                if emitted.len() != 4 {
                    violations.push(Violation::OverlappingBranchModes(s.id.clone()));
                }
                for (label, pair) in [(BranchLabel::Top, top), (BranchLabel::Bottom, bottom)] {
                    for m in [&pair.0, &pair.1] {
                        let entry = producers.entry(m).or_default();
                        let p = Producer::Branch(i, label);
                        if !entry.contains(&p) {
                            entry.push(p);
                        }
                    }
                }
            }
        }
    }

    let mut consumers: BTreeMap<&ModeId, usize> = BTreeMap::new();
    for e in &circuit.elements {
        for m in e.inputs() {
            *consumers.entry(m).or_default() += 1;
        }
    }
    for d in &circuit.detectors {
        *consumers.entry(&d.mode).or_default() += 1;
    }

    let wiring = circuit.wiring();
    for (mode, prods) in &producers {
        if prods.len() > 1 && !is_aligned_mode(circuit, &wiring, prods) {
            violations.push(Violation::DuplicateProducer((*mode).clone()));
        }
    }
    for (mode, count) in &consumers {
        if *count > 1 {
            violations.push(Violation::DuplicateConsumer((*mode).clone()));
        }
    }
    let modes: BTreeSet<&ModeId> = producers.keys().chain(consumers.keys()).copied().collect();
    for mode in &modes {
        if !producers.contains_key(mode) {
            violations.push(Violation::DanglingMode((*mode).clone(), "no producer"));
        } else if !consumers.contains_key(mode) {
            violations.push(Violation::DanglingMode((*mode).clone(), "no consumer"));
        }
    }

    let mut segment_modes = HashSet::new();
    for s in &circuit.segments {
        if !s.propagation_phase.is_finite() {
            violations.push(Violation::NonFinitePhase(s.mode.to_string()));
        }
        if !segment_modes.insert(&s.mode) {
            violations.push(Violation::DuplicateSegment(s.mode.clone()));
        }
        if !modes.contains(&s.mode) {
            violations.push(Violation::UnusedSegment(s.mode.clone()));
        }
    }

    for i in cyclic_elements(circuit, &wiring) {
        violations.push(Violation::Cycle(circuit.elements[i].id.clone()));
    }

    let photon_modes = circuit
        .sources
        .iter()
        .filter(|s| s.emits_photons())
        .flat_map(|s| s.outputs());
    let reachable = wiring.reachable_modes(circuit, photon_modes);
    for d in &circuit.detectors {
        if !reachable.contains(&d.mode) {
            violations.push(Violation::UnreachableDetector(d.id.clone()));
        }
    }

    violations
}

fn is_aligned_mode(circuit: &Circuit, wiring: &Wiring, producers: &[Producer]) -> bool {
    let (element, source, branch) = match producers {
        [Producer::Element(e), Producer::Branch(s, b)]
        | [Producer::Branch(s, b), Producer::Element(e)] => (*e, *s, *b),
        _ => return false,
    };
    let src = &circuit.sources[source];
    let same_branch = Arm::BOTH.iter().filter_map(|a| src.branch_mode(branch, *a));
    let reach = wiring.reachable_modes(circuit, same_branch);
    circuit.elements[element]
        .inputs()
        .iter()
        .all(|m| !reach.contains(*m))
}

/// Indices of elements that cannot be placed in a topological order.
fn cyclic_elements(circuit: &Circuit, wiring: &Wiring) -> Vec<usize> {
    let n = circuit.elements.len();
    let mut indegree = vec![0usize; n];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in circuit.elements.iter().enumerate() {
        for m in e.outputs() {
            if let Some(Port::Element(j)) = wiring.consumer(m) {
                succ[i].push(j);
                indegree[j] += 1;
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut done = vec![false; n];
    while let Some(i) = queue.pop_front() {
        done[i] = true;
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                queue.push_back(j);
            }
        }
    }
    (0..n).filter(|&i| !done[i]).collect()
}
