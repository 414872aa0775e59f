#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pathsum::circuit::DEFAULT_REFLECTION_PHASE;
use pathsum::{Circuit, Detector, Element, ModeId, Segment, Source};

pub const CORPUS_SIZE: u64 = 120;

/// Random circuit builder working on parallel "lanes". Each lane carries one
/// mode at a time; every element consumes the current lane heads and leaves
/// fresh modes behind.
struct Lanes {
    rng: ChaCha8Rng,
    heads: Vec<ModeId>,
    next_mode: usize,
    circuit: Circuit,
    segment_odds: f64,
}

impl Lanes {
    fn new(seed: u64, lanes: usize) -> Self {
        let mut l = Lanes {
            rng: ChaCha8Rng::seed_from_u64(seed),
            heads: Vec::new(),
            next_mode: 0,
            circuit: Circuit::default(),
            segment_odds: 0.3,
        };
        l.heads = (0..lanes).map(|k| l.fresh(k)).collect();
        l
    }

    fn fresh(&mut self, lane: usize) -> ModeId {
        let mode = ModeId::new(format!("m{lane}_{}", self.next_mode));
        self.next_mode += 1;
        if self.rng.gen_bool(self.segment_odds) {
            let phase = self.rng.gen_range(0.0..TAU);
            self.circuit
                .segments
                .push(Segment::new(mode.clone(), phase));
        }
        mode
    }

    fn id(&self, prefix: &str) -> String {
        format!("{prefix}{}", self.circuit.elements.len())
    }

    fn maybe_phase(&mut self) -> f64 {
        if self.rng.gen_bool(0.5) {
            DEFAULT_REFLECTION_PHASE
        } else {
            self.rng.gen_range(0.0..TAU)
        }
    }

    fn beam_splitter(&mut self, a: usize, b: usize) {
        let (a, b) = if self.rng.gen_bool(0.5) {
            (a, b)
        } else {
            (b, a)
        };
        let inputs = [self.heads[a].clone(), self.heads[b].clone()];
        let outputs = [self.fresh(a), self.fresh(b)];
        let refl = self.maybe_phase();
        let e = Element::beam_splitter_with_phase(self.id("BS"), inputs, outputs.clone(), refl);
        self.circuit.elements.push(e);
        self.heads[a] = outputs[0].clone();
        self.heads[b] = outputs[1].clone();
    }

    fn single_port(&mut self, lane: usize) {
        let input = self.heads[lane].clone();
        let output = self.fresh(lane);
        let e = if self.rng.gen_bool(0.5) {
            let refl = self.maybe_phase();
            Element::mirror_with_phase(self.id("M"), input, output.clone(), refl)
        } else {
            let value = self.rng.gen_range(0.0..TAU);
            Element::phase_shifter(self.id("F"), input, output.clone(), value)
        };
        self.circuit.elements.push(e);
        self.heads[lane] = output;
    }

    /// Link every lane in `lanes` into the set reached from `reached`.
    fn connect(&mut self, reached: &[usize], lanes: &[usize]) {
        let mut reached = reached.to_vec();
        let mut rest: Vec<usize> = lanes
            .iter()
            .copied()
            .filter(|l| !reached.contains(l))
            .collect();
        rest.shuffle(&mut self.rng);
        for lane in rest {
            let partner = *reached.choose(&mut self.rng).unwrap();
            self.beam_splitter(partner, lane);
            reached.push(lane);
        }
    }

    fn scramble(&mut self, lanes: &[usize], steps: usize) {
        for _ in 0..steps {
            if lanes.len() >= 2 && self.rng.gen_bool(0.6) {
                let pick: Vec<usize> = lanes.choose_multiple(&mut self.rng, 2).copied().collect();
                self.beam_splitter(pick[0], pick[1]);
            } else {
                let lane = *lanes.choose(&mut self.rng).unwrap();
                self.single_port(lane);
            }
        }
    }

    fn finish(mut self) -> Circuit {
        for (k, mode) in self.heads.iter().enumerate() {
            self.circuit
                .detectors
                .push(Detector::new(format!("D{k}"), mode.clone()));
        }
        self.circuit
    }
}

/// A single-photon circuit of 2 to 8 lanes with the photon entering lane 0
/// and vacuum on the others. Every lane ends in a detector.
pub fn random_single_circuit(seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5151);
    let n = rng.gen_range(2..=8);
    let steps = rng.gen_range(0..14);
    let mut l = Lanes::new(seed, n);
    l.circuit
        .sources
        .push(Source::single("S", l.heads[0].clone()));
    for k in 1..n {
        l.circuit
            .sources
            .push(Source::vacuum(format!("V{k}"), l.heads[k].clone()));
    }
    let all: Vec<usize> = (0..n).collect();
    l.connect(&[0], &all);
    l.scramble(&all, steps);
    l.finish()
}

/// A pair-source circuit: photon 1 lives on arm-1 lanes, photon 2 on arm-2
/// lanes, 2 to 4 lanes per arm (at most 8 in total). Lanes 0 and 1 of an
/// arm carry the top and bottom emission of that photon.
pub fn random_pair_circuit(seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa1a1);
    let n1 = rng.gen_range(2..=4);
    let n2 = rng.gen_range(2..=4);
    let steps1 = rng.gen_range(0..8);
    let steps2 = rng.gen_range(0..8);
    let mut l = Lanes::new(seed, n1 + n2);
    let arm1: Vec<usize> = (0..n1).collect();
    let arm2: Vec<usize> = (n1..n1 + n2).collect();
    l.circuit.sources.push(Source::pair(
        "P",
        (l.heads[arm1[0]].clone(), l.heads[arm2[0]].clone()),
        (l.heads[arm1[1]].clone(), l.heads[arm2[1]].clone()),
    ));
    for &k in arm1[2..].iter().chain(&arm2[2..]) {
        l.circuit
            .sources
            .push(Source::vacuum(format!("V{k}"), l.heads[k].clone()));
    }
    l.connect(&arm1[..2], &arm1);
    l.connect(&arm2[..2], &arm2);
    l.scramble(&arm1, steps1);
    l.scramble(&arm2, steps2);
    l.finish()
}

/// A random element order that respects causality.
pub fn random_topological_order(circuit: &Circuit, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let producer: HashMap<&ModeId, usize> = circuit
        .elements
        .iter()
        .enumerate()
        .flat_map(|(i, e)| e.outputs().into_iter().map(move |m| (m, i)))
        .collect();
    let deps: Vec<Vec<usize>> = circuit
        .elements
        .iter()
        .map(|e| {
            e.inputs()
                .iter()
                .filter_map(|m| producer.get(m).copied())
                .collect()
        })
        .collect();
    let mut placed = vec![false; circuit.elements.len()];
    let mut order = Vec::new();
    while order.len() < circuit.elements.len() {
        let ready: Vec<usize> = (0..circuit.elements.len())
            .filter(|&i| !placed[i] && deps[i].iter().all(|&d| placed[d]))
            .collect();
        let pick = *ready.choose(&mut rng).expect("acyclic circuit");
        placed[pick] = true;
        order.push(pick);
    }
    order
}

pub fn detector_ids(circuit: &Circuit) -> Vec<String> {
    circuit.detectors.iter().map(|d| d.id.clone()).collect()
}
