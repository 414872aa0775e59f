//! Detection-event sampling and the coincidence protocol.
//!
//! Each trial draws one joint outcome from a [`ProbabilityTable`] and emits
//! one record per arm. Coincidence counting pairs records by trial id and
//! recovers the joint distribution; singles counting ignores the partner and
//! only ever sees the marginals.
//!
//! Sampling uses ChaCha8 seeded through `seed_from_u64`, so a given
//! `(table, n, seed)` always yields the same records.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::sync::Arc;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::Arm;
use crate::entanglement::{JointOutcome, ProbabilityTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub trial_id: u64,
    pub arm: Arm,
    pub detector: Arc<str>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CountKey {
    Single { arm: Arm, detector: String },
    Joint(JointOutcome),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CountTable {
    pub counts: BTreeMap<CountKey, u64>,
    /// Number of trials counted.
    pub total: u64,
}

impl CountTable {
    pub fn joint(&self, detector_1: &str, detector_2: &str) -> u64 {
        let key = CountKey::Joint(JointOutcome::new(detector_1, detector_2));
        self.counts.get(&key).copied().unwrap_or(0)
    }

    /// Count for `detector`, whichever arm it sits in.
    pub fn single(&self, detector: &str) -> u64 {
        self.counts
            .iter()
            .filter(|(k, _)| matches!(k, CountKey::Single { detector: d, .. } if d.as_str() == detector))
            .map(|(_, v)| v)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Draw `n` trials from the table's joint distribution.
///
/// Returns `2n` records ordered by trial, arm 1 first.
pub fn sample_events(table: &ProbabilityTable, n: u64, seed: u64) -> Result<Vec<EventRecord>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let outcomes: Vec<(JointOutcome, f64)> = table.entries().collect();
    let weights = outcomes.iter().map(|(_, p)| p.max(0.0));
    let dist = WeightedIndex::new(weights)
        .map_err(|e| Error::InvalidCircuit(format!("probability table cannot be sampled: {e}")))?;
    let names: Vec<[Arc<str>; 2]> = outcomes
        .iter()
        .map(|(o, _)| {
            [
                Arc::from(o.detector_1.as_str()),
                Arc::from(o.detector_2.as_str()),
            ]
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut events = Vec::with_capacity(2 * n as usize);
    for trial_id in 0..n {
        let [d1, d2] = &names[dist.sample(&mut rng)];
        events.push(EventRecord {
            trial_id,
            arm: Arm::One,
            detector: d1.clone(),
        });
        events.push(EventRecord {
            trial_id,
            arm: Arm::Two,
            detector: d2.clone(),
        });
    }
    Ok(events)
}

fn bump<K: PartialEq>(counts: &mut Vec<(K, u64)>, key: K) {
    match counts.iter_mut().find(|(k, _)| *k == key) {
        Some((_, n)) => *n += 1,
        None => counts.push((key, 1)),
    }
}

/// Joint counts, pairing the two arms' records of each trial.
pub fn coincidence_counts(events: &[EventRecord]) -> Result<CountTable> {
    let mut by_trial: Vec<&EventRecord> = events.iter().collect();
    // already sorted for sampled runs, which this sort detects in one pass
    by_trial.sort_by_key(|e| (e.trial_id, e.arm));
    // few distinct detectors, so a linear scan beats hashing
    let mut joint: Vec<((&str, &str), u64)> = Vec::new();
    let mut total = 0;
    for group in by_trial.chunk_by(|a, b| a.trial_id == b.trial_id) {
        match group {
            [a, b] if a.arm == Arm::One && b.arm == Arm::Two => {
                bump(&mut joint, (&*a.detector, &*b.detector));
                total += 1;
            }
            _ => return Err(Error::UnpairedTrial(group[0].trial_id)),
        }
    }
    let counts = joint
        .into_iter()
        .map(|((d1, d2), n)| (CountKey::Joint(JointOutcome::new(d1, d2)), n))
        .collect();
    Ok(CountTable { counts, total })
}

/// Per-detector counts with the partner ignored.
pub fn singles_counts(events: &[EventRecord]) -> CountTable {
    let mut singles: Vec<((Arm, &str), u64)> = Vec::new();
    let mut per_arm = [0u64; 2];
    for e in events {
        bump(&mut singles, (e.arm, &*e.detector));
        per_arm[e.arm.index()] += 1;
    }
    let counts = singles
        .into_iter()
        .map(|((arm, d), n)| {
            let key = CountKey::Single {
                arm,
                detector: d.to_owned(),
            };
            (key, n)
        })
        .collect();
    CountTable {
        counts,
        total: per_arm[0].max(per_arm[1]),
    }
}

/// Binomial standard deviation of a count over `n` trials at probability `p`.
pub fn binomial_sigma(n: u64, p: f64) -> f64 {
    (n as f64 * p * (1.0 - p)).max(0.0).sqrt()
}

/// `|count - n p| <= k σ`.
pub fn within_sigmas(count: u64, n: u64, p: f64, k: f64) -> bool {
    (count as f64 - n as f64 * p).abs() <= k * binomial_sigma(n, p)
}

/// Write events as CSV with header `trial_id,arm,detector` and LF endings.
pub fn write_events_csv<W: Write>(mut out: W, events: &[EventRecord]) -> io::Result<()> {
    writeln!(out, "trial_id,arm,detector")?;
    for e in events {
        writeln!(out, "{},{},{}", e.trial_id, e.arm, e.detector)?;
    }
    Ok(())
}
