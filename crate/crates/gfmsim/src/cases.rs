//! Bundled case library.
//!
//! Six ready-to-run cases: a 3-bus machine/inverter pair under load steps
//! at three dispatches, and the New England 39-bus system losing a 540 MW
//! unit with zero, linear-droop, or exponential-droop inverter fleets.
//! The JSON sources live under `cases/` and are embedded so the binary is
//! self-contained.

use crate::error::{Error, Result};
use crate::io::{load_case_str, LoadedCase};

/// Name/content pairs for every bundled case.
pub const BUNDLED: [(&str, &str); 6] = [
    ("case_3bus_A", include_str!("../cases/case_3bus_A.json")),
    ("case_3bus_B", include_str!("../cases/case_3bus_B.json")),
    ("case_3bus_C", include_str!("../cases/case_3bus_C.json")),
    ("case_39bus_A", include_str!("../cases/case_39bus_A.json")),
    ("case_39bus_B", include_str!("../cases/case_39bus_B.json")),
    ("case_39bus_C", include_str!("../cases/case_39bus_C.json")),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

/// Raw JSON of a bundled case.
pub fn bundled_source(name: &str) -> Option<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// Loads a bundled case by name.
pub fn load_bundled(name: &str) -> Result<LoadedCase> {
    let text = bundled_source(name).ok_or_else(|| Error::UnknownRef {
        kind: "bundled case",
        name: name.to_string(),
    })?;
    load_case_str(text)
}
