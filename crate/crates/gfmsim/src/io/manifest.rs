//! Run manifest: input and resolved-parameter hashes plus run facts.
//!
//! The two hashes change exactly when any input byte or any resolved
//! parameter changes; wall time is informational and excluded from
//! reproducibility comparisons.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::simulator::Scenario;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub case_name: String,
    /// SHA-256 of the case-file bytes.
    pub input_sha256: String,
    /// SHA-256 of the fully resolved scenario (defaults applied).
    pub scenario_sha256: String,
    pub tool_version: String,
    pub defaults_applied: Vec<String>,
    /// Load multiplier chosen when matching the slack dispatch.
    pub load_scale: f64,
    pub wall_time_s: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Hash of the resolved scenario; field order is fixed by the type, so the
/// serialization is canonical.
pub fn scenario_hash(scenario: &Scenario) -> String {
    let json = serde_json::to_string(scenario).expect("scenario serialization cannot fail");
    sha256_hex(json.as_bytes())
}

impl RunManifest {
    pub fn new(
        case_name: &str,
        input_bytes: &[u8],
        scenario: &Scenario,
        defaults_applied: Vec<String>,
        load_scale: f64,
        wall_time_s: f64,
    ) -> Self {
        Self {
            case_name: case_name.to_string(),
            input_sha256: sha256_hex(input_bytes),
            scenario_sha256: scenario_hash(scenario),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            defaults_applied,
            load_scale,
            wall_time_s,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization cannot fail")
    }
}
