//! Small-signal linearization, modal identification, and frequency metrics.

mod linearize;
mod metrics;
mod pencil;

pub use linearize::{
    bifurcation_points, dispatch_sweep, eigen_report, linearize, linearize_scenario, ModalReport,
    ModeKind, StateMatrix, SweepPoint, SweepResult, GFM_PARTICIPATION_THRESHOLD,
    REFERENCE_MODE_MAGNITUDE,
};
pub use metrics::{aggregate_inertia, frequency_metrics, weighted_frequency, FrequencyMetrics};
pub use pencil::{matrix_pencil, MatrixPencilOptions, PencilMode};
