mod common;

use common::*;
use pathsum::entanglement::{arm_detectors, joint_table, JointOutcome};
use pathsum::interference::{detection_probability, first_order_amplitude};
use pathsum::oracle::{
    single_photon_oracle, single_photon_oracle_with_order, transfer_matrix, two_photon_oracle,
    two_photon_oracle_with_order,
};
use pathsum::path::{compose, enumerate_paths, hops_kernel, path_kernel};
use pathsum::{validate, Arm, Origin};

#[test]
fn corpus_is_valid() {
    for seed in 0..CORPUS_SIZE {
        let c = random_single_circuit(seed);
        assert_eq!(validate(&c), vec![], "single seed {seed}");
        let p = random_pair_circuit(seed);
        assert_eq!(validate(&p), vec![], "pair seed {seed}");
        assert!(c.detectors.len() <= 8 && p.detectors.len() <= 8);
    }
}

#[test]
fn single_photon_probabilities_sum_to_one() {
    for seed in 0..CORPUS_SIZE {
        let c = random_single_circuit(seed);
        let total: f64 = detector_ids(&c)
            .iter()
            .map(|d| detection_probability(first_order_amplitude(&c, "S", d).unwrap()).value)
            .sum();
        assert!((total - 1.0).abs() <= 1e-12, "seed {seed}: {total}");
    }
}

#[test]
fn pair_tables_sum_to_one() {
    for seed in 0..CORPUS_SIZE {
        let c = random_pair_circuit(seed);
        let a1 = arm_detectors(&c, "P", Arm::One).unwrap();
        let a2 = arm_detectors(&c, "P", Arm::Two).unwrap();
        let a1: Vec<&str> = a1.iter().map(String::as_str).collect();
        let a2: Vec<&str> = a2.iter().map(String::as_str).collect();
        let t = joint_table(&c, "P", &a1, &a2).unwrap();
        assert!(
            (t.total() - 1.0).abs() <= 1e-12,
            "seed {seed}: {}",
            t.total()
        );
    }
}

#[test]
fn path_sum_matches_matrix_oracle() {
    for seed in 0..CORPUS_SIZE {
        let c = random_single_circuit(seed);
        for d in detector_ids(&c) {
            let a = first_order_amplitude(&c, "S", &d).unwrap().value;
            let b = single_photon_oracle(&c, "S", &d).unwrap().value;
            assert!((a - b).norm() <= 1e-12, "seed {seed} {d}: {a} vs {b}");
        }
    }
}

#[test]
fn joint_tables_match_two_photon_oracle() {
    for seed in 0..CORPUS_SIZE {
        let c = random_pair_circuit(seed);
        let a1 = arm_detectors(&c, "P", Arm::One).unwrap();
        let a2 = arm_detectors(&c, "P", Arm::Two).unwrap();
        let r1: Vec<&str> = a1.iter().map(String::as_str).collect();
        let r2: Vec<&str> = a2.iter().map(String::as_str).collect();
        let t = joint_table(&c, "P", &r1, &r2).unwrap();
        for (outcome, p) in t.entries() {
            let q = two_photon_oracle(&c, "P", &outcome).unwrap().value;
            assert!(
                (p - q).abs() <= 1e-12,
                "seed {seed} {outcome:?}: {p} vs {q}"
            );
        }
    }
}

#[test]
fn full_transfer_matrix_is_unitary() {
    for seed in 0..CORPUS_SIZE {
        for c in [random_single_circuit(seed), random_pair_circuit(seed)] {
            let u = transfer_matrix(&c).unwrap();
            assert!(
                u.is_unitary(1e-10),
                "seed {seed}: defect {}",
                u.unitarity_defect()
            );
        }
    }
}

#[test]
fn oracle_ignores_element_order() {
    for seed in 0..40 {
        let c = random_single_circuit(seed);
        for k in 0..4 {
            let order = random_topological_order(&c, seed * 17 + k);
            for d in detector_ids(&c) {
                let a = single_photon_oracle(&c, "S", &d).unwrap().value;
                let b = single_photon_oracle_with_order(&c, "S", &d, &order)
                    .unwrap()
                    .value;
                assert!((a - b).norm() <= 1e-12, "seed {seed} order {order:?}");
            }
        }
        let p = random_pair_circuit(seed);
        let order = random_topological_order(&p, seed);
        let a1 = arm_detectors(&p, "P", Arm::One).unwrap();
        let a2 = arm_detectors(&p, "P", Arm::Two).unwrap();
        for d1 in &a1 {
            for d2 in &a2 {
                let o = JointOutcome::new(d1.as_str(), d2.as_str());
                let x = two_photon_oracle(&p, "P", &o).unwrap().value;
                let y = two_photon_oracle_with_order(&p, "P", &o, &order)
                    .unwrap()
                    .value;
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn paths_split_at_any_node() {
    for seed in 0..40 {
        let c = random_single_circuit(seed);
        for d in detector_ids(&c) {
            for path in enumerate_paths(&c, &Origin::Single("S".into()), &d).unwrap() {
                let whole = path_kernel(&c, &path).unwrap().amplitude;
                for cut in 0..=path.hops.len() {
                    let head = hops_kernel(&c, &path.hops[..cut]).unwrap();
                    let tail = hops_kernel(&c, &path.hops[cut..]).unwrap();
                    let joined = compose(head, tail).amplitude;
                    assert!((whole - joined).norm() <= 1e-12, "seed {seed} cut {cut}");
                }
            }
        }
    }
}

#[test]
fn enumeration_is_stable() {
    for seed in 0..20 {
        let c = random_single_circuit(seed);
        for d in detector_ids(&c) {
            let o = Origin::Single("S".into());
            assert_eq!(
                enumerate_paths(&c, &o, &d).unwrap(),
                enumerate_paths(&c, &o, &d).unwrap()
            );
        }
    }
}
