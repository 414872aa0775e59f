//! Second-order interference of an entangled pair.
//!
//! Within one emission branch the two partner kernels multiply, in no
//! particular order; the two branches then add coherently:
//!
//! ```text
//! A(d1, d2) = b · Σ_{branch} K(branch, photon 1 → d1) · K(branch, photon 2 → d2)
//! ```
//!
//! where `b` is the pair source's branch amplitude. Partner kernels from
//! different branches never multiply.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::circuit::{Arm, Circuit, Source, SourceKind};
use crate::error::{Error, Result};
use crate::interference::{Amplitude, Probability};
use crate::path::{summed_kernel, BranchLabel, Origin};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointOutcome {
    pub detector_1: String,
    pub detector_2: String,
}

impl JointOutcome {
    pub fn new(detector_1: impl Into<String>, detector_2: impl Into<String>) -> Self {
        JointOutcome {
            detector_1: detector_1.into(),
            detector_2: detector_2.into(),
        }
    }
}

/// Order in which the two partner kernels of a branch are multiplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartnerOrder {
    #[default]
    FirstTimesSecond,
    SecondTimesFirst,
}

/// Joint outcome probabilities over two detector arms, with marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    pub arm1: Vec<String>,
    pub arm2: Vec<String>,
    /// `joint[i][j]` is the probability of (`arm1[i]`, `arm2[j]`).
    pub joint: Vec<Vec<f64>>,
    pub marginals: BTreeMap<String, f64>,
}

impl ProbabilityTable {
    /// Build a table from its joint entries; marginals are row and column sums.
    pub fn from_joint(arm1: Vec<String>, arm2: Vec<String>, joint: Vec<Vec<f64>>) -> Self {
        let mut marginals = BTreeMap::new();
        for (i, d) in arm1.iter().enumerate() {
            marginals.insert(d.clone(), joint[i].iter().sum());
        }
        for (j, d) in arm2.iter().enumerate() {
            marginals.insert(d.clone(), joint.iter().map(|row| row[j]).sum());
        }
        ProbabilityTable {
            arm1,
            arm2,
            joint,
            marginals,
        }
    }

    pub fn joint(&self, detector_1: &str, detector_2: &str) -> Option<f64> {
        let i = self.arm1.iter().position(|d| d == detector_1)?;
        let j = self.arm2.iter().position(|d| d == detector_2)?;
        Some(self.joint[i][j])
    }

    /// Joint entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (JointOutcome, f64)> + '_ {
        self.arm1.iter().enumerate().flat_map(move |(i, a)| {
            self.arm2
                .iter()
                .enumerate()
                .map(move |(j, b)| (JointOutcome::new(a.clone(), b.clone()), self.joint[i][j]))
        })
    }

    pub fn total(&self) -> f64 {
        self.joint.iter().flatten().sum()
    }

    pub fn arm_of(&self, detector: &str) -> Option<Arm> {
        if self.arm1.iter().any(|d| d == detector) {
            Some(Arm::One)
        } else if self.arm2.iter().any(|d| d == detector) {
            Some(Arm::Two)
        } else {
            None
        }
    }
}

fn pair_source<'a>(circuit: &'a Circuit, pair: &str) -> Result<&'a Source> {
    let src = circuit
        .source(pair)
        .ok_or_else(|| Error::UnknownSource(pair.to_owned()))?;
    match src.kind {
        SourceKind::PairSource { .. } => Ok(src),
        _ => Err(Error::NotPairSource(pair.to_owned())),
    }
}

/// The first pair source of a circuit, if any.
pub fn first_pair_source(circuit: &Circuit) -> Option<&str> {
    circuit
        .sources
        .iter()
        .find(|s| matches!(s.kind, SourceKind::PairSource { .. }))
        .map(|s| s.id.as_str())
}

/// Detectors reachable by one photon of the pair, in declaration order.
pub fn arm_detectors(circuit: &Circuit, pair: &str, arm: Arm) -> Result<Vec<String>> {
    let src = pair_source(circuit, pair)?;
    let starts = BranchLabel::BOTH
        .iter()
        .filter_map(|b| src.branch_mode(*b, arm));
    let reach = circuit.wiring().reachable_modes(circuit, starts);
    Ok(circuit
        .detectors
        .iter()
        .filter(|d| reach.contains(&d.mode))
        .map(|d| d.id.clone())
        .collect())
}

fn check_arms(circuit: &Circuit, pair: &str, arm1: &[&str], arm2: &[&str]) -> Result<()> {
    let reach1: BTreeSet<String> = arm_detectors(circuit, pair, Arm::One)?
        .into_iter()
        .collect();
    let reach2: BTreeSet<String> = arm_detectors(circuit, pair, Arm::Two)?
        .into_iter()
        .collect();
    for d in arm1.iter().chain(arm2) {
        if circuit.detector(d).is_none() {
            return Err(Error::UnknownDetector((*d).to_owned()));
        }
    }
    for (mine, other_reach, label) in [(arm1, &reach2, 1), (arm2, &reach1, 2)] {
        if let Some(d) = mine.iter().find(|d| other_reach.contains(**d)) {
            return Err(Error::ArmsNotPartitioned(format!(
                "detector `{d}` listed in arm {label} is reachable by the other photon"
            )));
        }
    }
    if let Some(d) = arm1.iter().find(|d| arm2.contains(d)) {
        return Err(Error::ArmsNotPartitioned(format!(
            "detector `{d}` appears in both arms"
        )));
    }
    Ok(())
}

/// Per-branch partner kernels: `[(K1, K2) for top, (K1, K2) for bottom]`.
fn branch_kernels(
    circuit: &Circuit,
    pair: &str,
    outcome: &JointOutcome,
) -> Result<[(Complex64, Complex64); 2]> {
    let k = |branch, arm, detector: &str| {
        summed_kernel(
            circuit,
            &Origin::Branch {
                source: pair.to_owned(),
                branch,
                arm,
            },
            detector,
        )
    };
    let mut out = [(Complex64::default(), Complex64::default()); 2];
    for (slot, branch) in out.iter_mut().zip(BranchLabel::BOTH) {
        *slot = (
            k(branch, Arm::One, &outcome.detector_1)?,
            k(branch, Arm::Two, &outcome.detector_2)?,
        );
    }
    Ok(out)
}

/// Joint amplitude with the partner kernels multiplied in a chosen order.
pub fn joint_amplitude_ordered(
    circuit: &Circuit,
    pair: &str,
    outcome: &JointOutcome,
    order: PartnerOrder,
) -> Result<Amplitude> {
    let src = pair_source(circuit, pair)?;
    let SourceKind::PairSource {
        branch_amplitude, ..
    } = src.kind
    else {
        unreachable!("checked by pair_source");
    };
    check_arms(
        circuit,
        pair,
        &[outcome.detector_1.as_str()],
        &[outcome.detector_2.as_str()],
    )?;
    let sum: Complex64 = branch_kernels(circuit, pair, outcome)?
        .iter()
        .map(|(k1, k2)| match order {
            PartnerOrder::FirstTimesSecond => k1 * k2,
            PartnerOrder::SecondTimesFirst => k2 * k1,
        })
        .sum();
    Ok(Amplitude::new(sum * branch_amplitude))
}

pub fn joint_amplitude(circuit: &Circuit, pair: &str, outcome: &JointOutcome) -> Result<Amplitude> {
    joint_amplitude_ordered(circuit, pair, outcome, PartnerOrder::default())
}

/// Joint probabilities for every pairing of an arm-1 and an arm-2 detector.
pub fn joint_table(
    circuit: &Circuit,
    pair: &str,
    arm1: &[&str],
    arm2: &[&str],
) -> Result<ProbabilityTable> {
    pair_source(circuit, pair)?;
    check_arms(circuit, pair, arm1, arm2)?;
    let joint = arm1
        .iter()
        .map(|d1| {
            arm2.iter()
                .map(|d2| {
                    joint_amplitude(circuit, pair, &JointOutcome::new(*d1, *d2))
                        .map(|a| a.value.norm_sqr())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbabilityTable::from_joint(
        arm1.iter().map(|s| s.to_string()).collect(),
        arm2.iter().map(|s| s.to_string()).collect(),
        joint,
    ))
}

/// The 2×2 table for two detectors per arm.
pub fn joint_probability_table(
    circuit: &Circuit,
    pair: &str,
    arm1: (&str, &str),
    arm2: (&str, &str),
) -> Result<ProbabilityTable> {
    joint_table(circuit, pair, &[arm1.0, arm1.1], &[arm2.0, arm2.1])
}

/// Sum of the joint entries that involve `detector`.
pub fn marginal_probability(table: &ProbabilityTable, detector: &str) -> Result<Probability> {
    table
        .marginals
        .get(detector)
        .map(|v| Probability::new(*v))
        .ok_or_else(|| Error::UnknownDetector(detector.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Detector, Element, ModeId};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn m(s: &str) -> ModeId {
        ModeId::from(s)
    }

    fn jaeger(phi1: f64, phi2: f64) -> Circuit {
        Circuit {
            sources: vec![Source::pair("P", (m("a1"), m("a2")), (m("b1"), m("b2")))],
            elements: vec![
                Element::phase_shifter("F1", m("a1"), m("a1p"), phi1),
                Element::beam_splitter("H1", [m("a1p"), m("b1")], [m("u1"), m("l1")]),
                Element::phase_shifter("F2", m("a2"), m("a2p"), phi2),
                Element::beam_splitter("H2", [m("a2p"), m("b2")], [m("u2"), m("l2")]),
            ],
            segments: vec![],
            detectors: vec![
                Detector::new("U1", m("u1")),
                Detector::new("L1", m("l1")),
                Detector::new("U2", m("u2")),
                Detector::new("L2", m("l2")),
            ],
        }
    }

    fn table(phi1: f64, phi2: f64) -> ProbabilityTable {
        joint_probability_table(&jaeger(phi1, phi2), "P", ("U1", "L1"), ("U2", "L2")).unwrap()
    }

    fn assert_table(t: &ProbabilityTable, want: [f64; 4]) {
        let got = [
            t.joint("U1", "U2").unwrap(),
            t.joint("U1", "L2").unwrap(),
            t.joint("L1", "U2").unwrap(),
            t.joint("L1", "L2").unwrap(),
        ];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn jaeger_amplitudes_at_zero() {
        let c = jaeger(0.0, 0.0);
        let uu = joint_amplitude(&c, "P", &JointOutcome::new("U1", "U2")).unwrap();
        assert!(uu.value.norm_sqr() < 1e-24);
        let ul = joint_amplitude(&c, "P", &JointOutcome::new("U1", "L2")).unwrap();
        assert!((ul.value.norm_sqr() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn jaeger_tables() {
        assert_table(&table(0.0, 0.0), [0.0, 0.5, 0.5, 0.0]);
        assert_table(&table(FRAC_PI_2, FRAC_PI_2), [0.5, 0.0, 0.0, 0.5]);
        assert_table(&table(FRAC_PI_4, FRAC_PI_4), [0.25; 4]);
        for t in [table(0.0, 0.0), table(0.3, 1.9)] {
            for d in ["U1", "L1", "U2", "L2"] {
                assert!((marginal_probability(&t, d).unwrap().value - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn marginal_at_third_pi() {
        let t = table(FRAC_PI_3, 0.0);
        for d in ["U1", "L2"] {
            assert!((marginal_probability(&t, d).unwrap().value - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_of_constructed_table() {
        let t = ProbabilityTable::from_joint(
            vec!["U1".into(), "L1".into()],
            vec!["U2".into(), "L2".into()],
            vec![vec![1.0, 0.0], vec![0.0, 0.0]],
        );
        assert_eq!(marginal_probability(&t, "U1").unwrap().value, 1.0);
        assert_eq!(marginal_probability(&t, "L2").unwrap().value, 0.0);
        assert_eq!(
            marginal_probability(&t, "X"),
            Err(Error::UnknownDetector("X".into()))
        );
    }

    #[test]
    fn single_branch_reaching_detector_gives_plain_product() {
        // bottom photon 2 goes to its own detector; no interference at U2
        let c = Circuit {
            sources: vec![Source::pair("P", (m("a1"), m("a2")), (m("b1"), m("b2")))],
            elements: vec![Element::beam_splitter(
                "H1",
                [m("a1"), m("b1")],
                [m("u1"), m("l1")],
            )],
            segments: vec![],
            detectors: vec![
                Detector::new("U1", m("u1")),
                Detector::new("L1", m("l1")),
                Detector::new("U2", m("a2")),
                Detector::new("X2", m("b2")),
            ],
        };
        let a = joint_amplitude(&c, "P", &JointOutcome::new("U1", "U2")).unwrap();
        let expected = std::f64::consts::FRAC_1_SQRT_2 * std::f64::consts::FRAC_1_SQRT_2;
        assert!((a.value - Complex64::new(expected, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn error_paths() {
        let c = jaeger(0.0, 0.0);
        assert_eq!(
            joint_probability_table(&c, "P", ("U1", "U2"), ("L1", "L2")).map(|_| ()),
            Err(Error::ArmsNotPartitioned(
                "detector `U2` listed in arm 1 is reachable by the other photon".into()
            ))
        );
        assert_eq!(
            joint_amplitude(&c, "Q", &JointOutcome::new("U1", "U2")),
            Err(Error::UnknownSource("Q".into()))
        );
        let mut single = c.clone();
        single.sources.push(Source::single("S", m("x")));
        single.detectors.push(Detector::new("DX", m("x")));
        assert_eq!(
            joint_amplitude(&single, "S", &JointOutcome::new("U1", "U2")),
            Err(Error::NotPairSource("S".into()))
        );
    }

    #[test]
    fn partner_order_is_bit_identical() {
        let c = jaeger(0.37, 2.9);
        for o in [("U1", "U2"), ("L1", "U2"), ("U1", "L2"), ("L1", "L2")] {
            let outcome = JointOutcome::new(o.0, o.1);
            let a =
                joint_amplitude_ordered(&c, "P", &outcome, PartnerOrder::FirstTimesSecond).unwrap();
            let b =
                joint_amplitude_ordered(&c, "P", &outcome, PartnerOrder::SecondTimesFirst).unwrap();
            assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
            assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
        }
    }

    #[test]
    fn arm_detector_discovery() {
        let c = jaeger(0.0, 0.0);
        assert_eq!(arm_detectors(&c, "P", Arm::One).unwrap(), vec!["U1", "L1"]);
        assert_eq!(arm_detectors(&c, "P", Arm::Two).unwrap(), vec!["U2", "L2"]);
    }
}
