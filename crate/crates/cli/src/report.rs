//! Deterministic suite reports: cases sorted by ID, byte-identical for
//! identical (document, seed, bounds). Wall time is printed in the human
//! log but kept out of the serialized report so the determinism contract
//! holds.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bounds {
    pub seed: u64,
    pub eps_bound: usize,
    pub depth: usize,
    pub samples: usize,
    #[serde(default)]
    pub debug_flip_cone_sign: bool,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            seed: 0,
            eps_bound: 2,
            depth: 6,
            samples: 100,
            debug_flip_cone_sign: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    /// reported outcome that is not a failure (e.g. an oracle that is
    /// honestly unavailable for a documented fixture)
    Reported,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Case {
    pub id: String,
    pub inputs_digest: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub bounds: Bounds,
    pub cases: Vec<Case>,
    pub passed: usize,
    pub failed: usize,
    pub reported: usize,
    #[serde(skip)]
    pub wall_ms: u128,
}

impl Report {
    pub fn new(suite: &str, bounds: &Bounds) -> Self {
        Report {
            suite: suite.to_string(),
            seed: bounds.seed,
            bounds: bounds.clone(),
            cases: Vec::new(),
            passed: 0,
            failed: 0,
            reported: 0,
            wall_ms: 0,
        }
    }

    pub fn push(&mut self, id: String, digest_input: &str, verdict: Verdict, counterexample: Option<String>) {
        match verdict {
            Verdict::Pass => self.passed += 1,
            Verdict::Fail => self.failed += 1,
            Verdict::Reported => self.reported += 1,
        }
        self.cases.push(Case {
            id,
            inputs_digest: fnv64(digest_input),
            verdict,
            counterexample,
        });
    }

    pub fn finalize(&mut self) {
        self.cases.sort_by(|a, b| a.id.cmp(&b.id));
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// FNV-1a 64-bit digest, hex encoded; stable across runs and platforms.
pub fn fnv64(s: &str) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}
