//! Case files, CSV artifacts, and run manifests.

mod case;
mod csv;
mod manifest;

pub use case::{
    build_scenario, emit_case, load_case, load_case_str, parse_grid, AnalysisSection, BranchEntry,
    BusEntry, BusKindEntry, CaseFile, ControllerKindEntry, DeviceKindEntry, DeviceSection,
    DispatchEntry, EventEntry, EventKindEntry, ExpDroopEntry, GfmCouplingEntry, LinearDroopEntry,
    LoadedCase, NetworkSection, OptionsSection, SgParamsEntry, SimulationSection,
};
pub use csv::{curve_csv, metrics_csv, modal_csv, parse_timeseries_csv, timeseries_csv};
pub use manifest::{scenario_hash, sha256_hex, RunManifest};
