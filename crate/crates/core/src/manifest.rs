//! Run manifests: what was run, on which inputs, with what result.
//!
//! No timestamps or host details are recorded, so two runs with the same
//! command, parameters, seed and inputs produce byte-identical manifests.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

/// Name and version of the pinned generator every seeded run draws from.
pub const RNG: &str = "rand_chacha 0.3.1 ChaCha8Rng::seed_from_u64";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seed: Option<u64>,
    pub rng: String,
    pub tool_version: String,
    /// sha256 of every input file, keyed by role.
    pub inputs: BTreeMap<String, String>,
    /// sha256 of every output written, keyed by role.
    pub outputs: BTreeMap<String, String>,
    pub outcome: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            seed,
            rng: RNG.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            outcome: serde_json::Value::Null,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters
            .insert(key.to_string(), serde_json::to_value(value).expect("plain parameter"));
        self
    }

    pub fn input(&mut self, role: &str, bytes: &[u8]) -> &mut Self {
        self.inputs.insert(role.to_string(), sha256_hex(bytes));
        self
    }

    pub fn output(&mut self, role: &str, bytes: &[u8]) -> &mut Self {
        self.outputs.insert(role.to_string(), sha256_hex(bytes));
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
