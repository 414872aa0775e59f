use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use pathsum::dsl::serialize;
use pathsum::Circuit;

pub const SCHEMA: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Computation {
    Sweep,
    Sample,
    Scenario,
}

/// JSON summary written next to command outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub tool_version: &'static str,
    pub computation: Computation,
    pub circuit_digest: String,
    pub parameters: Value,
    pub results: Value,
}

impl RunReport {
    pub fn new(
        computation: Computation,
        circuit: &Circuit,
        parameters: Value,
        results: Value,
    ) -> Self {
        RunReport {
            schema: SCHEMA,
            tool_version: TOOL_VERSION,
            computation,
            circuit_digest: circuit_digest(circuit),
            parameters,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// SHA-256 over the sorted canonical statements, so circuits that differ
/// only in statement order share a digest.
pub fn circuit_digest(circuit: &Circuit) -> String {
    let text = serialize(circuit).unwrap_or_default();
    let mut lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    lines.sort_unstable();
    let mut hasher = Sha256::new();
    for line in lines {
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pathsum::dsl::parse;
    use pathsum::scenarios::build_mzi;

    #[test]
    fn digest_ignores_statement_order() {
        let c = build_mzi(0.5);
        let text = serialize(&c).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.reverse();
        let reordered = parse(&lines.join("\n")).unwrap();
        assert_ne!(reordered, c);
        assert_eq!(circuit_digest(&reordered), circuit_digest(&c));
        assert_eq!(circuit_digest(&c).len(), 64);
        assert_ne!(circuit_digest(&c), circuit_digest(&build_mzi(0.6)));
    }
}
