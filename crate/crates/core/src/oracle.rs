//! Reference results by mode-vector propagation.
//!
//! Nothing here enumerates routes: a state vector over every mode is pushed
//! through each element's local matrix in topological order. Agreement with
//! the path engines is therefore evidence rather than a restatement.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::circuit::{Circuit, ElementKind, ModeId, SourceKind};
use crate::entanglement::JointOutcome;
use crate::error::{Error, Result};
use crate::interference::{Amplitude, Probability};

/// Full-circuit transfer matrix from source ports to detector modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub inputs: Vec<ModeId>,
    pub outputs: Vec<ModeId>,
    /// `entries[row][col]`: amplitude from `inputs[col]` to `outputs[row]`.
    pub entries: Vec<Vec<Complex64>>,
}

impl TransferMatrix {
    /// Largest entry of `U†U - I`, or infinity for a non-square matrix.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.inputs.len();
        if self.outputs.len() != n {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let dot: Complex64 = self.entries.iter().map(|row| row[a].conj() * row[b]).sum();
                let id = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - id).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }
}

/// Local matrix of one element, `m[out][in]`.
fn local_matrix(kind: &ElementKind) -> Vec<Vec<Complex64>> {
    match kind {
        ElementKind::BeamSplitter {
            reflection_phase,
            amplitude_split,
            ..
        } => {
            let t = Complex64::new(*amplitude_split, 0.0);
            let r = Complex64::from_polar(*amplitude_split, *reflection_phase);
            let r2 = Complex64::from_polar(*amplitude_split, PI - *reflection_phase);
            vec![vec![t, r2], vec![r, t]]
        }
        ElementKind::Mirror {
            reflection_phase, ..
        } => vec![vec![Complex64::from_polar(1.0, *reflection_phase)]],
        ElementKind::PhaseShifter { value, .. } => vec![vec![Complex64::from_polar(1.0, *value)]],
    }
}

fn producing_element(circuit: &Circuit) -> HashMap<&ModeId, usize> {
    let mut map = HashMap::new();
    for (i, e) in circuit.elements.iter().enumerate() {
        for m in e.outputs() {
            map.insert(m, i);
        }
    }
    map
}

/// Kahn order of the elements, lowest index first among ready elements.
pub fn topological_order(circuit: &Circuit) -> Result<Vec<usize>> {
    let producer = producing_element(circuit);
    let n = circuit.elements.len();
    let mut indegree = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for (j, e) in circuit.elements.iter().enumerate() {
        for m in e.inputs() {
            if let Some(&i) = producer.get(m) {
                succ[i].push(j);
                indegree[j] += 1;
            }
        }
    }
    let mut ready: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = ready.pop_front() {
        order.push(i);
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push_back(j);
            }
        }
    }
    if order.len() != n {
        return Err(Error::InvalidCircuit("element graph has a cycle".into()));
    }
    Ok(order)
}

fn check_order(circuit: &Circuit, order: &[usize]) -> Result<()> {
    let n = circuit.elements.len();
    let mut position = vec![usize::MAX; n];
    for (k, &i) in order.iter().enumerate() {
        if i >= n || position[i] != usize::MAX {
            return Err(Error::InvalidCircuit(format!(
                "bad element order {order:?}"
            )));
        }
        position[i] = k;
    }
    if order.len() != n {
        return Err(Error::InvalidCircuit(format!(
            "bad element order {order:?}"
        )));
    }
    let producer = producing_element(circuit);
    for (j, e) in circuit.elements.iter().enumerate() {
        for m in e.inputs() {
            if let Some(&i) = producer.get(m) {
                if position[i] > position[j] {
                    return Err(Error::InvalidCircuit(format!(
                        "order places `{}` before its feeder `{}`",
                        e.id, circuit.elements[i].id
                    )));
                }
            }
        }
    }
    Ok(())
}

/// State vector over every mode of a circuit.
struct ModeSpace<'a> {
    circuit: &'a Circuit,
    index: HashMap<&'a ModeId, usize>,
    phase: Vec<Complex64>,
}

impl<'a> ModeSpace<'a> {
    fn new(circuit: &'a Circuit) -> Self {
        let mut index = HashMap::new();
        let modes = circuit
            .sources
            .iter()
            .flat_map(|s| s.outputs())
            .chain(
                circuit
                    .elements
                    .iter()
                    .flat_map(|e| e.inputs().into_iter().chain(e.outputs())),
            )
            .chain(circuit.detectors.iter().map(|d| &d.mode));
        for m in modes {
            let next = index.len();
            index.entry(m).or_insert(next);
        }
        let mut phase = vec![Complex64::new(1.0, 0.0); index.len()];
        for s in &circuit.segments {
            if let Some(&i) = index.get(&s.mode) {
                phase[i] = Complex64::from_polar(1.0, s.propagation_phase);
            }
        }
        ModeSpace {
            circuit,
            index,
            phase,
        }
    }

    fn idx(&self, mode: &ModeId) -> Result<usize> {
        self.index
            .get(mode)
            .copied()
            .ok_or_else(|| Error::InvalidCircuit(format!("unknown mode `{mode}`")))
    }

    /// Inject unit amplitude at `mode` and push it through `order`.
    fn propagate(&self, mode: &ModeId, order: &[usize]) -> Result<Vec<Complex64>> {
        let mut v = vec![Complex64::default(); self.index.len()];
        let start = self.idx(mode)?;
        v[start] += self.phase[start];
        for &e in order {
            let element = &self.circuit.elements[e];
            let ins: Vec<usize> = element
                .inputs()
                .into_iter()
                .map(|m| self.idx(m))
                .collect::<Result<_>>()?;
            let outs: Vec<usize> = element
                .outputs()
                .into_iter()
                .map(|m| self.idx(m))
                .collect::<Result<_>>()?;
            let x: Vec<Complex64> = ins.iter().map(|&i| v[i]).collect();
            for &i in &ins {
                v[i] = Complex64::default();
            }
            let matrix = local_matrix(&element.kind);
            for (row, &o) in matrix.iter().zip(&outs) {
                let y: Complex64 = row.iter().zip(&x).map(|(a, b)| a * b).sum();
                v[o] += y * self.phase[o];
            }
        }
        Ok(v)
    }

    fn detector_index(&self, detector: &str) -> Result<usize> {
        let d = self
            .circuit
            .detector(detector)
            .ok_or_else(|| Error::UnknownDetector(detector.to_owned()))?;
        self.idx(&d.mode)
    }
}

pub fn single_photon_oracle(circuit: &Circuit, source: &str, detector: &str) -> Result<Amplitude> {
    single_photon_oracle_with_order(circuit, source, detector, &topological_order(circuit)?)
}

/// As [`single_photon_oracle`], with an explicit element evaluation order.
pub fn single_photon_oracle_with_order(
    circuit: &Circuit,
    source: &str,
    detector: &str,
    order: &[usize],
) -> Result<Amplitude> {
    check_order(circuit, order)?;
    let src = circuit
        .source(source)
        .ok_or_else(|| Error::UnknownSource(source.to_owned()))?;
    let SourceKind::SinglePhoton { output } = &src.kind else {
        return Err(Error::NotSinglePhoton(source.to_owned()));
    };
    let space = ModeSpace::new(circuit);
    let v = space.propagate(output, order)?;
    Ok(Amplitude::new(v[space.detector_index(detector)?]))
}

pub fn two_photon_oracle(
    circuit: &Circuit,
    pair: &str,
    outcome: &JointOutcome,
) -> Result<Probability> {
    two_photon_oracle_with_order(circuit, pair, outcome, &topological_order(circuit)?)
}

/// Builds the two-photon state `b Σ_branch (U e₁) ⊗ (U e₂)` over all mode
/// pairs and projects it onto the outcome's detector modes.
pub fn two_photon_oracle_with_order(
    circuit: &Circuit,
    pair: &str,
    outcome: &JointOutcome,
    order: &[usize],
) -> Result<Probability> {
    check_order(circuit, order)?;
    let src = circuit
        .source(pair)
        .ok_or_else(|| Error::UnknownSource(pair.to_owned()))?;
    let SourceKind::PairSource {
        top,
        bottom,
        branch_amplitude,
    } = &src.kind
    else {
        return Err(Error::NotPairSource(pair.to_owned()));
    };
    let space = ModeSpace::new(circuit);
    let n = space.index.len();
    let mut state = vec![vec![Complex64::default(); n]; n];
    for (m1, m2) in [top, bottom] {
        let u = space.propagate(m1, order)?;
        let w = space.propagate(m2, order)?;
        for (row, a) in state.iter_mut().zip(&u) {
            for (cell, b) in row.iter_mut().zip(&w) {
                *cell += a * b * *branch_amplitude;
            }
        }
    }
    let d1 = space.detector_index(&outcome.detector_1)?;
    let d2 = space.detector_index(&outcome.detector_2)?;
    Ok(Probability::new(state[d1][d2].norm_sqr()))
}

/// Transfer matrix from every source port (including vacuum ports) to every
/// detector mode.
pub fn transfer_matrix(circuit: &Circuit) -> Result<TransferMatrix> {
    let order = topological_order(circuit)?;
    let space = ModeSpace::new(circuit);
    let inputs: Vec<ModeId> = circuit
        .sources
        .iter()
        .flat_map(|s| s.outputs())
        .cloned()
        .collect();
    let outputs: Vec<ModeId> = circuit.detectors.iter().map(|d| d.mode.clone()).collect();
    let out_idx: Vec<usize> = outputs
        .iter()
        .map(|m| space.idx(m))
        .collect::<Result<_>>()?;
    let mut entries = vec![vec![Complex64::default(); inputs.len()]; outputs.len()];
    for (col, m) in inputs.iter().enumerate() {
        let v = space.propagate(m, &order)?;
        for (row, &o) in out_idx.iter().enumerate() {
            entries[row][col] = v[o];
        }
    }
    Ok(TransferMatrix {
        inputs,
        outputs,
        entries,
    })
}
