//! Time-domain simulation: scenario assembly, steady-state initialization,
//! event handling, and the coupled device/network integration loop.
//!
//! A run proceeds as the studies describe: solve the power flow, back-solve
//! every device so the system starts at an exact equilibrium, verify the
//! pre-event hold stays flat, then integrate with implicit trapezoidal
//! steps, solving the network algebraically inside each derivative
//! evaluation. Events mutate loads or trip devices at their scheduled times
//! and force fresh factorizations everywhere.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::device::{Device, DeviceModel, GfmController};
use crate::droop::PowerSharingState;
use crate::error::{Error, Result};
use crate::network::{
    build_ybus, power_flow, BusKind, BusSchedule, Injector, Network, NetworkSolver,
    PowerFlowSolution,
};
use crate::solver::{DerivativeSystem, TrapezoidalStepper};

/// Timed perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// Adds to the constant-power load at a bus (network pu).
    LoadStep { bus: usize, dp: f64, dq: f64 },
    /// Opens the breaker of a device: injection removed, states frozen.
    GenTrip { device: usize },
}

/// Per-device dispatch at the initial power flow (network pu).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispatch {
    pub p: f64,
    /// Honored only when the device terminal is a PQ bus.
    pub q: f64,
}

/// A fully resolved simulation case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub network: Network,
    pub devices: Vec<Device>,
    /// One entry per device, same order.
    pub dispatch: Vec<Dispatch>,
    pub events: Vec<Event>,
    pub t_end: f64,
    pub dt: f64,
    /// Also emit reactive power and bus voltage channels.
    pub extended_channels: bool,
    /// Scale all loads so the slack device lands on its dispatched power
    /// (used when loads come from a foreign dataset).
    pub scale_loads_to_slack: bool,
    /// Sliding window for the rate-of-change-of-frequency metric (s).
    pub rocof_window: f64,
}

/// Duration of the verified pre-event hold.
pub const HOLD_DURATION_S: f64 = 0.5;
/// Flatness bound on every channel during the hold.
pub const HOLD_TOLERANCE: f64 = 1e-6;
/// Equilibrium bound on the initial state derivative (infinity norm).
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-8;
/// KCL tolerance inside time stepping.
const NET_TOL_SIM: f64 = 1e-12;

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        if self.devices.is_empty() {
            return Err(Error::Case("scenario has no devices".into()));
        }
        if self.devices.len() != self.dispatch.len() {
            return Err(Error::Case("dispatch table does not match device list".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Case(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Case("t_end must be positive".into()));
        }
        if !(self.rocof_window > 0.0) {
            return Err(Error::Case("rocof window must be positive".into()));
        }
        let n_bus = self.network.buses.len();
        let mut seen_bus = vec![false; n_bus];
        for dev in &self.devices {
            if dev.bus >= n_bus {
                return Err(Error::Device {
                    device: dev.name.clone(),
                    detail: "terminal bus out of range".into(),
                });
            }
            if seen_bus[dev.bus] {
                return Err(Error::Device {
                    device: dev.name.clone(),
                    detail: format!(
                        "bus '{}' already hosts a device",
                        self.network.buses[dev.bus].id
                    ),
                });
            }
            seen_bus[dev.bus] = true;
            match &dev.model {
                DeviceModel::Sg(p) => p.validate()?,
                DeviceModel::Gfm(p) => p.validate()?,
            }
        }
        for ev in &self.events {
            if !(ev.time > 0.0 && ev.time < self.t_end) {
                return Err(Error::Case(format!(
                    "event time {} outside (0, t_end)",
                    ev.time
                )));
            }
            if ev.time <= HOLD_DURATION_S {
                return Err(Error::Case(format!(
                    "event at {} s falls inside the {} s steady hold",
                    ev.time, HOLD_DURATION_S
                )));
            }
            match ev.kind {
                EventKind::LoadStep { bus, .. } if bus >= n_bus => {
                    return Err(Error::Case("load step references unknown bus".into()))
                }
                EventKind::GenTrip { device } if device >= self.devices.len() => {
                    return Err(Error::Case("generator trip references unknown device".into()))
                }
                _ => {}
            }
        }
        // The power flow needs a slack device to absorb the imbalance.
        let slack = self
            .network
            .buses
            .iter()
            .position(|b| b.kind == BusKind::Slack);
        match slack {
            Some(i) if seen_bus[i] => Ok(()),
            Some(i) => Err(Error::Case(format!(
                "slack bus '{}' has no device",
                self.network.buses[i].id
            ))),
            None => Err(Error::Case("no slack bus defined".into())),
        }
    }

    pub fn device_index(&self, name: &str) -> Result<usize> {
        self.devices
            .iter()
            .position(|d| d.name == name)
            .ok_or_else(|| Error::UnknownRef {
                kind: "device",
                name: name.to_string(),
            })
    }
}

/// The coupled differential/algebraic grid model with frozen controller
/// offsets; implements the derivative map for the integrator by solving
/// the network at every evaluation.
pub struct GridSystem {
    pub devices: Vec<Device>,
    pub tripped: Vec<bool>,
    /// Power-sharing offsets held constant during a step (pu).
    pub omega_ps: Vec<f64>,
    /// Constant-power loads per bus (network pu), mutated by events.
    pub loads: Vec<Complex64>,
    /// Buses pinned to a fixed phasor (stiff sources in test systems).
    pub pinned: Vec<(usize, Complex64)>,
    /// Device-base to network-base current scaling.
    scale: Vec<f64>,
    offsets: Vec<usize>,
    dim: usize,
    solver: NetworkSolver,
    /// Latest solved bus voltages; warm start for the next evaluation.
    pub v: Vec<Complex64>,
    /// KCL tolerance used inside derivative evaluations.
    pub net_tol: f64,
    /// When true every network solve refactorizes; used by linearization
    /// for maximum accuracy.
    pub exact_mode: bool,
}

impl GridSystem {
    /// Assembles a system directly from devices and an admittance matrix;
    /// the scenario path does this via [`build_system`]. Useful for small
    /// hand-built test systems (e.g. a device against a pinned bus).
    pub fn from_parts(
        devices: Vec<Device>,
        loads: Vec<Complex64>,
        pinned: Vec<(usize, Complex64)>,
        ybus: nalgebra::DMatrix<Complex64>,
        v0: Vec<Complex64>,
        s_base: f64,
    ) -> Self {
        let scale: Vec<f64> = devices.iter().map(|d| d.s_rating() / s_base).collect();
        let mut offsets = Vec::with_capacity(devices.len());
        let mut dim = 0;
        for dev in &devices {
            offsets.push(dim);
            dim += dev.n_states();
        }
        Self {
            tripped: vec![false; devices.len()],
            omega_ps: vec![0.0; devices.len()],
            pinned,
            scale,
            offsets,
            dim,
            solver: NetworkSolver::new(ybus),
            v: v0,
            net_tol: NET_TOL_SIM,
            exact_mode: false,
            loads,
            devices,
        }
    }
    pub fn state_dim(&self) -> usize {
        self.dim
    }

    pub fn state_offset(&self, device: usize) -> usize {
        self.offsets[device]
    }

    pub fn state_labels(&self) -> Vec<String> {
        self.devices.iter().flat_map(|d| d.state_labels()).collect()
    }

    fn injectors(&self, x: &DVector<f64>) -> Vec<Injector> {
        let mut list = Vec::with_capacity(self.devices.len() + self.loads.len());
        for (d, dev) in self.devices.iter().enumerate() {
            if self.tripped[d] {
                continue;
            }
            let xs = &x.as_slice()[self.offsets[d]..self.offsets[d] + dev.n_states()];
            list.push(dev.injector(xs, self.scale[d]));
        }
        for (bus, s) in self.loads.iter().enumerate() {
            if s.norm() > 0.0 {
                list.push(Injector::ConstantPower { bus, s: *s });
            }
        }
        for &(bus, v) in &self.pinned {
            list.push(Injector::FixedVoltage { bus, v });
        }
        list
    }

    /// Solves the network at the given states and refreshes `self.v`.
    pub fn solve_network(&mut self, x: &DVector<f64>) -> Result<()> {
        if self.exact_mode {
            self.solver.invalidate();
        }
        let injectors = self.injectors(x);
        self.solver
            .solve(&injectors, &mut self.v, self.net_tol, 60)?;
        Ok(())
    }

    pub fn invalidate(&mut self) {
        self.solver.invalidate();
    }

    /// Applies one event: load steps accumulate onto the bus load,
    /// generator trips zero the injection and freeze the states. The
    /// caller must drop cached factorizations afterwards.
    pub fn apply_event(&mut self, kind: &EventKind) -> Result<()> {
        match *kind {
            EventKind::LoadStep { bus, dp, dq } => {
                if bus >= self.loads.len() {
                    return Err(Error::UnknownRef {
                        kind: "bus",
                        name: bus.to_string(),
                    });
                }
                self.loads[bus] += Complex64::new(dp, dq);
            }
            EventKind::GenTrip { device } => {
                if device >= self.devices.len() {
                    return Err(Error::UnknownRef {
                        kind: "device",
                        name: device.to_string(),
                    });
                }
                self.tripped[device] = true;
            }
        }
        Ok(())
    }

    /// Terminal apparent power of a device on the network base.
    pub fn terminal_power_network(&self, x: &DVector<f64>, d: usize) -> Complex64 {
        if self.tripped[d] {
            return Complex64::new(0.0, 0.0);
        }
        let dev = &self.devices[d];
        let xs = &x.as_slice()[self.offsets[d]..self.offsets[d] + dev.n_states()];
        dev.terminal_power(xs, self.v[dev.bus]) * self.scale[d]
    }

    /// Device frequency in Hz at the current states.
    pub fn frequency_hz(&self, x: &DVector<f64>, d: usize) -> f64 {
        let dev = &self.devices[d];
        let xs = &x.as_slice()[self.offsets[d]..self.offsets[d] + dev.n_states()];
        dev.frequency_rad(xs, self.omega_ps[d]) / (2.0 * std::f64::consts::PI)
    }
}

impl DerivativeSystem for GridSystem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn derivatives(&mut self, _t: f64, x: &DVector<f64>, out: &mut DVector<f64>) -> Result<()> {
        self.solve_network(x)?;
        for (d, dev) in self.devices.iter().enumerate() {
            let lo = self.offsets[d];
            let hi = lo + dev.n_states();
            if self.tripped[d] {
                out.as_mut_slice()[lo..hi].fill(0.0);
                continue;
            }
            let xs = &x.as_slice()[lo..hi];
            dev.derivatives(xs, self.v[dev.bus], self.omega_ps[d], &mut out.as_mut_slice()[lo..hi])?;
        }
        Ok(())
    }
}

/// Result of scenario initialization.
pub struct BuiltSystem {
    pub system: GridSystem,
    pub x0: DVector<f64>,
    pub power_flow: PowerFlowSolution,
    /// Load multiplier applied when matching the slack dispatch.
    pub load_scale: f64,
    /// Resolved dispatch per device (network pu) after the power flow.
    pub solved_dispatch: Vec<Complex64>,
}

/// Solves the power flow and back-solves every device at the operating
/// point, so the returned state is an equilibrium of the full DAE.
pub fn build_system(scenario: &Scenario) -> Result<BuiltSystem> {
    scenario.validate()?;
    let network = &scenario.network;
    let n_bus = network.buses.len();

    let mut device_for_bus: Vec<Option<usize>> = vec![None; n_bus];
    for (d, dev) in scenario.devices.iter().enumerate() {
        device_for_bus[dev.bus] = Some(d);
    }

    let schedule = |net: &Network| -> Vec<BusSchedule> {
        (0..n_bus)
            .map(|i| match device_for_bus[i] {
                Some(d) => BusSchedule {
                    p: scenario.dispatch[d].p,
                    q: scenario.dispatch[d].q,
                },
                None => BusSchedule::default(),
            })
            .map(|s| {
                let _ = net;
                s
            })
            .collect()
    };

    let mut net = network.clone();
    let mut load_scale = 1.0;
    let mut pf = power_flow(&net, &schedule(&net))?;
    if scenario.scale_loads_to_slack {
        let slack_bus = net
            .buses
            .iter()
            .position(|b| b.kind == BusKind::Slack)
            .expect("validated");
        let slack_dev = device_for_bus[slack_bus].expect("validated");
        let target = scenario.dispatch[slack_dev].p;
        let base_load: f64 = network.buses.iter().map(|b| b.load_p).sum();
        if base_load <= 0.0 {
            return Err(Error::Case("load scaling requires nonzero base load".into()));
        }
        for _ in 0..15 {
            let have = pf.s_device[slack_bus].re;
            if (have - target).abs() < 1e-9 * target.abs().max(1.0) {
                break;
            }
            load_scale += (target - have) / base_load;
            for (bus, base) in net.buses.iter_mut().zip(&network.buses) {
                bus.load_p = base.load_p * load_scale;
                bus.load_q = base.load_q * load_scale;
            }
            pf = power_flow(&net, &schedule(&net))?;
        }
        let have = pf.s_device[slack_bus].re;
        if (have - target).abs() > 0.01 * target.abs().max(1.0) {
            return Err(Error::Case(format!(
                "load scaling left slack at {have:.4} pu vs dispatch {target:.4} pu"
            )));
        }
    }

    let mut devices = scenario.devices.clone();
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(devices.len());
    for dev in devices.iter_mut() {
        let v_term = pf.v[dev.bus];
        let s_net = pf.s_device[dev.bus];
        let x = dev.initialize(v_term, s_net, net.s_base)?;
        states.push(x);
    }

    let mut offsets = Vec::with_capacity(devices.len());
    let mut dim = 0;
    for dev in &devices {
        offsets.push(dim);
        dim += dev.n_states();
    }
    let mut x0 = DVector::zeros(dim);
    for (d, xs) in states.iter().enumerate() {
        x0.as_mut_slice()[offsets[d]..offsets[d] + xs.len()].copy_from_slice(xs);
    }

    let scale: Vec<f64> = devices.iter().map(|d| d.s_rating() / net.s_base).collect();
    let loads: Vec<Complex64> = net
        .buses
        .iter()
        .map(|b| Complex64::new(b.load_p, b.load_q))
        .collect();
    let solved_dispatch: Vec<Complex64> = devices.iter().map(|d| pf.s_device[d.bus]).collect();

    let mut system = GridSystem {
        tripped: vec![false; devices.len()],
        omega_ps: vec![0.0; devices.len()],
        pinned: Vec::new(),
        scale,
        offsets,
        dim,
        solver: NetworkSolver::new(build_ybus(&net)?),
        v: pf.v.clone(),
        net_tol: NET_TOL_SIM,
        exact_mode: false,
        loads,
        devices,
    };

    // The initialization must be a true equilibrium of the coupled system.
    let mut dx = DVector::zeros(dim);
    system.derivatives(0.0, &x0, &mut dx)?;
    let residual = dx.amax();
    if residual > EQUILIBRIUM_TOLERANCE {
        return Err(Error::Case(format!(
            "initialized state is not an equilibrium (residual {residual:.3e})"
        )));
    }

    Ok(BuiltSystem {
        system,
        x0,
        power_flow: pf,
        load_scale,
        solved_dispatch,
    })
}

/// One named sample stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub data: Vec<f64>,
}

/// Uniformly sampled simulation output channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub time: Vec<f64>,
    pub channels: Vec<Channel>,
}

impl TimeSeries {
    pub fn dt(&self) -> f64 {
        if self.time.len() > 1 {
            self.time[1] - self.time[0]
        } else {
            0.0
        }
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.data.as_slice())
    }
}

/// Static description of one simulated device, for downstream statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceMeta {
    pub name: String,
    pub rating_mva: f64,
    pub inertia_s: f64,
    pub is_gfm: bool,
    pub sharing_armed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub series: TimeSeries,
    pub devices: Vec<DeviceMeta>,
    /// Time the power-sharing loop latched, per device.
    pub sharing_activation: Vec<Option<f64>>,
    /// Times at which events were applied.
    pub events_applied: Vec<f64>,
    /// Time of the first event, if any.
    pub first_event: Option<f64>,
    /// Load multiplier chosen during initialization.
    pub load_scale: f64,
    /// Channel recommended for frequency statistics: the machine speed when
    /// exactly one synchronous device exists, otherwise the MVA-weighted
    /// average.
    pub stats_channel: String,
}

impl SimulationOutput {
    /// Frequency trace to use for system statistics (see `stats_channel`).
    pub fn stats_frequency(&self) -> Vec<f64> {
        if self.stats_channel == "f_weighted_hz" {
            let total: f64 = self.devices.iter().map(|d| d.rating_mva).sum();
            let n = self.series.time.len();
            let mut acc = vec![0.0; n];
            for dev in &self.devices {
                let f = self
                    .series
                    .channel(&format!("f_{}_hz", dev.name))
                    .expect("frequency channel present");
                for (a, s) in acc.iter_mut().zip(f) {
                    *a += dev.rating_mva * s;
                }
            }
            for a in acc.iter_mut() {
                *a /= total;
            }
            acc
        } else {
            self.series
                .channel(&self.stats_channel)
                .expect("stats channel present")
                .to_vec()
        }
    }
}

fn channel_names(scenario: &Scenario) -> Vec<String> {
    let mut names = Vec::new();
    for dev in &scenario.devices {
        names.push(format!("f_{}_hz", dev.name));
    }
    for dev in &scenario.devices {
        names.push(format!("p_{}_pu", dev.name));
    }
    let armed: Vec<&Device> = scenario
        .devices
        .iter()
        .filter(|d| d.power_sharing_armed())
        .collect();
    for dev in &armed {
        if armed.len() == 1 {
            names.push("omega_ps_pu".into());
        } else {
            names.push(format!("omega_ps_{}_pu", dev.name));
        }
    }
    if scenario.extended_channels {
        for dev in &scenario.devices {
            names.push(format!("q_{}_pu", dev.name));
        }
        for bus in &scenario.network.buses {
            names.push(format!("v_{}_pu", bus.id));
        }
    }
    names
}

/// Runs a scenario to completion.
pub fn run(scenario: &Scenario) -> Result<SimulationOutput> {
    let built = build_system(scenario)?;
    let mut sys = built.system;
    let mut x = built.x0;

    let n_steps = (scenario.t_end / scenario.dt).round() as usize;
    let dt = scenario.dt;
    let names = channel_names(scenario);
    let mut channels: Vec<Channel> = names
        .iter()
        .map(|n| Channel {
            name: n.clone(),
            data: Vec::with_capacity(n_steps + 1),
        })
        .collect();
    let mut time = Vec::with_capacity(n_steps + 1);

    let mut sharing: Vec<Option<PowerSharingState>> = sys
        .devices
        .iter()
        .enumerate()
        .map(|(d, dev)| {
            dev.power_sharing_armed().then(|| {
                let p0 = x[sys.state_offset(d) + 1];
                PowerSharingState::new(p0)
            })
        })
        .collect();
    let mut sharing_activation = vec![None; sys.devices.len()];

    let mut events: Vec<(f64, EventKind, bool)> = scenario
        .events
        .iter()
        .map(|e| (e.time, e.kind.clone(), false))
        .collect();
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite event times"));
    let mut events_applied = Vec::new();

    let record =
        |sys: &GridSystem, x: &DVector<f64>, channels: &mut Vec<Channel>, time: &mut Vec<f64>, t: f64| {
            time.push(t);
            let mut idx = 0;
            for d in 0..sys.devices.len() {
                channels[idx].data.push(sys.frequency_hz(x, d));
                idx += 1;
            }
            for d in 0..sys.devices.len() {
                channels[idx].data.push(sys.terminal_power_network(x, d).re);
                idx += 1;
            }
            for d in 0..sys.devices.len() {
                if sys.devices[d].power_sharing_armed() {
                    channels[idx].data.push(sys.omega_ps[d]);
                    idx += 1;
                }
            }
            if scenario.extended_channels {
                for d in 0..sys.devices.len() {
                    channels[idx].data.push(sys.terminal_power_network(x, d).im);
                    idx += 1;
                }
                for b in 0..sys.v.len() {
                    channels[idx].data.push(sys.v[b].norm());
                    idx += 1;
                }
            }
        };

    // Initial sample at the solved equilibrium.
    sys.solve_network(&x)?;
    record(&sys, &x, &mut channels, &mut time, 0.0);

    let mut stepper = TrapezoidalStepper::new(sys.dim());
    for k in 0..n_steps {
        let t = k as f64 * dt;

        let mut invalidated = false;
        for (ev_time, kind, applied) in events.iter_mut() {
            if *applied || *ev_time > t + 0.5 * dt {
                continue;
            }
            sys.apply_event(kind)?;
            *applied = true;
            invalidated = true;
            events_applied.push(*ev_time);
        }
        if invalidated {
            sys.invalidate();
            stepper.invalidate();
        }

        x = stepper.step(&mut sys, t, &x, dt).map_err(|e| match e {
            Error::NetworkSolve { detail, .. } => Error::NetworkSolve { t, detail },
            other => other,
        })?;

        // Advance the power-sharing controllers on the end-of-step power;
        // their offsets are inputs to the next step.
        for (d, slot) in sharing.iter_mut().enumerate() {
            if let Some(state) = slot {
                if sys.tripped[d] {
                    continue;
                }
                let p = x[sys.state_offset(d) + 1];
                let params = match &sys.devices[d].model {
                    DeviceModel::Gfm(g) => match &g.controller {
                        GfmController::ExpDroop { params, .. } => *params,
                        GfmController::Linear { .. } => unreachable!("sharing requires exp droop"),
                    },
                    DeviceModel::Sg(_) => unreachable!("sharing is inverter-only"),
                };
                let p_set = match &sys.devices[d].model {
                    DeviceModel::Gfm(g) => g.p_set,
                    DeviceModel::Sg(_) => unreachable!(),
                };
                let was_latched = state.latched;
                state.step(p, p_set, dt, &params);
                if state.latched && !was_latched {
                    sharing_activation[d] = Some(t + dt);
                }
                sys.omega_ps[d] = state.omega_ps;
            }
        }

        record(&sys, &x, &mut channels, &mut time, (k + 1) as f64 * dt);
    }

    let series = TimeSeries { time, channels };
    for ch in &series.channels {
        if let Some(k) = ch.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Case(format!(
                "channel {} went non-finite at t = {:.3} s",
                ch.name,
                k as f64 * dt
            )));
        }
    }

    // Verify the pre-event steady hold.
    let hold_samples = (HOLD_DURATION_S / dt).round() as usize;
    for ch in &series.channels {
        let first = ch.data[0];
        for (i, v) in ch.data.iter().enumerate().take(hold_samples + 1) {
            if (v - first).abs() > HOLD_TOLERANCE {
                return Err(Error::Case(format!(
                    "channel {} drifted {:.3e} at t = {:.3} s during the steady hold",
                    ch.name,
                    (v - first).abs(),
                    i as f64 * dt
                )));
            }
        }
    }

    let devices: Vec<DeviceMeta> = sys
        .devices
        .iter()
        .map(|d| DeviceMeta {
            name: d.name.clone(),
            rating_mva: d.s_rating(),
            inertia_s: d.inertia_s(),
            is_gfm: d.is_gfm(),
            sharing_armed: d.power_sharing_armed(),
        })
        .collect();
    let sg_count = devices.iter().filter(|d| !d.is_gfm).count();
    let stats_channel = if sg_count == 1 {
        let sg = devices.iter().find(|d| !d.is_gfm).expect("one machine");
        format!("f_{}_hz", sg.name)
    } else if devices.len() == 1 {
        format!("f_{}_hz", devices[0].name)
    } else {
        "f_weighted_hz".into()
    };

    let first_event = events_applied.first().copied();
    Ok(SimulationOutput {
        series,
        devices,
        sharing_activation,
        events_applied,
        first_event,
        load_scale: built.load_scale,
        stats_channel,
    })
}
