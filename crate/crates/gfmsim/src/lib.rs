//! Phasor-domain power-system dynamics with exponential grid-forming droop
//! control.
//!
//! The crate simulates mixed fleets of synchronous generators and
//! grid-forming inverters on small transmission networks, and analyses
//! them: steady-state power flow, implicit-trapezoidal time-domain
//! integration with load-step and trip events, small-signal linearization
//! with eigenvalue/participation reporting, matrix-pencil modal
//! identification, and the frequency-stability metrics (nadir, windowed
//! ROCOF, MVA-weighted frequency, aggregate inertia) used to compare
//! controller designs.
//!
//! The centerpiece is the exponential droop law in [`droop`]: an odd,
//! strictly decreasing power-frequency curve that concentrates its
//! stiffness near zero dispatch (large effective inertia where headroom is
//! plentiful), linearizes at a parameterized tangent-droop limit, and
//! carries an autonomous integrator that restores equitable linear-droop
//! power sharing after a disturbance settles, with no communication.
//!
//! Start with the bundled case library in [`cases`], or see the runnable
//! `examples/` for each capability end to end.

pub mod analysis;
pub mod cases;
pub mod cli;
pub mod device;
pub mod droop;
pub mod error;
pub mod io;
pub mod network;
pub mod simulator;
pub mod solver;

pub use error::{Error, Result};
