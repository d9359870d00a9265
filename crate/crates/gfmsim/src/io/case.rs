//! Case-file schema and loading.
//!
//! Cases are JSON with explicit unit-suffixed field names. Unknown keys are
//! rejected everywhere. Physical quantities arrive in engineering units
//! (MW, Mvar, kV, seconds) and are converted to per unit on the network
//! base when the scenario is built. Omitted controller and machine
//! parameters fall back to the study defaults and each substitution is
//! recorded for the run manifest.

use serde::{Deserialize, Serialize};

use crate::device::{Device, DeviceModel, GfmController, GfmParams, SgParams};
use crate::droop::{ExpDroopParams, LinearDroopParams};
use crate::error::{Error, Result};
use crate::network::{Branch, Bus, BusKind, Network};
use crate::simulator::{Dispatch, Event, EventKind, Scenario};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub network: NetworkSection,
    pub devices: Vec<DeviceSection>,
    pub dispatch: Vec<DispatchEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventEntry>,
    pub simulation: SimulationSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub s_base_mva: f64,
    pub v_base_kv: f64,
    pub buses: Vec<BusEntry>,
    pub branches: Vec<BranchEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusEntry {
    pub id: String,
    pub kind: BusKindEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_setpoint_pu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_p_mw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_q_mvar: Option<f64>,
}

/// Bus roles; `device` buses become PV when a voltage setpoint is given,
/// PQ otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusKindEntry {
    Slack,
    Pv,
    Pq,
    Device,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchEntry {
    pub from: String,
    pub to: String,
    pub r_pu: f64,
    pub x_pu: f64,
    #[serde(default)]
    pub b_pu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tap: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    pub name: String,
    pub bus: String,
    pub kind: DeviceKindEntry,
    pub rating_mva: f64,
    /// Exponential or linear frequency control, grid-forming devices only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerKindEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_sharing: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub machine: Option<SgParamsEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<GfmCouplingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub droop: Option<ExpDroopEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_droop: Option<LinearDroopEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKindEntry {
    Sg,
    Gfm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKindEntry {
    ExpDroop,
    Linear,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgParamsEntry {
    pub h_s: Option<f64>,
    pub d_pu: Option<f64>,
    pub x_d_pu: Option<f64>,
    pub x_q_pu: Option<f64>,
    pub x_d_prime_pu: Option<f64>,
    pub x_q_prime_pu: Option<f64>,
    pub t_do_prime_s: Option<f64>,
    pub t_qo_prime_s: Option<f64>,
    pub k_a: Option<f64>,
    pub t_a_s: Option<f64>,
    pub k_e: Option<f64>,
    pub t_e_s: Option<f64>,
    pub k_f: Option<f64>,
    pub t_f_s: Option<f64>,
    pub sat_gamma: Option<f64>,
    pub sat_epsilon: Option<f64>,
    pub governor_droop_pu: Option<f64>,
    pub t_tg_s: Option<f64>,
    pub omega_b_rad_per_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GfmCouplingEntry {
    pub x_out_pu: Option<f64>,
    pub r_out_pu: Option<f64>,
    pub t_fil_s: Option<f64>,
    pub q_v_gain_pu: Option<f64>,
    pub v_set_pu: Option<f64>,
    pub omega_b_rad_per_s: Option<f64>,
    pub positive_export: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpDroopEntry {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub d_max_pu: Option<f64>,
    pub d_min_pu: Option<f64>,
    pub m_d_pu: Option<f64>,
    pub omega_nom_pu: Option<f64>,
    pub omega_b_rad_per_s: Option<f64>,
    pub k_per_s: Option<f64>,
    pub eps_p_pu: Option<f64>,
    pub eps_dp_pu_per_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearDroopEntry {
    pub m_d_pu: Option<f64>,
    pub omega_fil_rad_per_s: Option<f64>,
    pub omega_set_pu: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispatchEntry {
    pub device: String,
    pub p_mw: f64,
    #[serde(default)]
    pub q_mvar: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventEntry {
    pub time_s: f64,
    pub kind: EventKindEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bus: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<String>,
    /// Load step as a percentage of the bus's base load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_p_mw: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_q_mvar: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKindEntry {
    LoadStep,
    GenTrip,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub t_end_s: f64,
    pub dt_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_device: Option<String>,
    /// Dispatch grid "start:step:stop" in device pu.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rocof_window_s: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSection {
    #[serde(default)]
    pub scale_loads_to_slack_dispatch: bool,
    #[serde(default)]
    pub extended_channels: bool,
}

/// A parsed case: the runnable scenario plus bookkeeping for the manifest.
#[derive(Debug, Clone)]
pub struct LoadedCase {
    pub scenario: Scenario,
    /// Grid-forming device and grid for `sweep`, when declared.
    pub sweep: Option<(String, Vec<f64>)>,
    /// Defaults substituted for omitted fields, `device.field=value`.
    pub defaults_applied: Vec<String>,
    pub case: CaseFile,
}

/// Parses "start:step:stop" into an inclusive grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Case(format!(
            "grid '{text}' must be start:step:stop"
        )));
    }
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Case(format!("grid component '{s}' is not a number")))
    };
    let (start, step, stop) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if !(step > 0.0) || stop < start {
        return Err(Error::Case(format!("grid '{text}' is not increasing")));
    }
    let n = ((stop - start) / step).round() as usize;
    Ok((0..=n).map(|k| start + step * k as f64).collect())
}

struct DefaultTracker {
    log: Vec<String>,
}

impl DefaultTracker {
    fn pick(&mut self, device: &str, field: &str, given: Option<f64>, default: f64) -> f64 {
        match given {
            Some(v) => v,
            None => {
                self.log.push(format!("{device}.{field}={default}"));
                default
            }
        }
    }
}

/// Converts a parsed case file into a validated scenario.
pub fn build_scenario(case: &CaseFile) -> Result<LoadedCase> {
    if case.schema_version != 1 {
        return Err(Error::Case(format!(
            "unsupported schema version {}",
            case.schema_version
        )));
    }
    let s_base = case.network.s_base_mva;
    if !(s_base > 0.0) {
        return Err(Error::Case("s_base_mva must be positive".into()));
    }

    let mut buses = Vec::with_capacity(case.network.buses.len());
    for b in &case.network.buses {
        let kind = match b.kind {
            BusKindEntry::Slack => BusKind::Slack,
            BusKindEntry::Pv => BusKind::Pv,
            BusKindEntry::Pq => BusKind::Pq,
            BusKindEntry::Device => {
                if b.v_setpoint_pu.is_some() {
                    BusKind::Pv
                } else {
                    BusKind::Pq
                }
            }
        };
        if matches!(kind, BusKind::Slack | BusKind::Pv) && b.v_setpoint_pu.is_none() {
            return Err(Error::Case(format!(
                "bus '{}' needs v_setpoint_pu for its role",
                b.id
            )));
        }
        buses.push(Bus {
            id: b.id.clone(),
            kind,
            v_setpoint: b.v_setpoint_pu.unwrap_or(1.0),
            load_p: b.load_p_mw.unwrap_or(0.0) / s_base,
            load_q: b.load_q_mvar.unwrap_or(0.0) / s_base,
        });
    }
    let network = Network {
        buses,
        branches: Vec::new(),
        s_base,
        v_base: case.network.v_base_kv,
    };
    let mut network = network;
    for br in &case.network.branches {
        let from = network.bus_index(&br.from)?;
        let to = network.bus_index(&br.to)?;
        network.branches.push(Branch {
            from,
            to,
            r: br.r_pu,
            x: br.x_pu,
            b: br.b_pu,
            tap: br.tap.unwrap_or(1.0),
        });
    }

    let mut tracker = DefaultTracker { log: Vec::new() };
    let mut devices = Vec::with_capacity(case.devices.len());
    for d in &case.devices {
        let bus = network.bus_index(&d.bus)?;
        let model = match d.kind {
            DeviceKindEntry::Sg => {
                if d.controller.is_some() || d.coupling.is_some() || d.droop.is_some() {
                    return Err(Error::Case(format!(
                        "device '{}': machine devices take no inverter sections",
                        d.name
                    )));
                }
                let m = d.machine.clone().unwrap_or_default();
                let base = SgParams::default();
                DeviceModel::Sg(SgParams {
                    h: tracker.pick(&d.name, "h_s", m.h_s, base.h),
                    d: tracker.pick(&d.name, "d_pu", m.d_pu, base.d),
                    x_d: tracker.pick(&d.name, "x_d_pu", m.x_d_pu, base.x_d),
                    x_q: tracker.pick(&d.name, "x_q_pu", m.x_q_pu, base.x_q),
                    x_d_p: tracker.pick(&d.name, "x_d_prime_pu", m.x_d_prime_pu, base.x_d_p),
                    x_q_p: tracker.pick(&d.name, "x_q_prime_pu", m.x_q_prime_pu, base.x_q_p),
                    t_do_p: tracker.pick(&d.name, "t_do_prime_s", m.t_do_prime_s, base.t_do_p),
                    t_qo_p: tracker.pick(&d.name, "t_qo_prime_s", m.t_qo_prime_s, base.t_qo_p),
                    k_a: tracker.pick(&d.name, "k_a", m.k_a, base.k_a),
                    t_a: tracker.pick(&d.name, "t_a_s", m.t_a_s, base.t_a),
                    k_e: tracker.pick(&d.name, "k_e", m.k_e, base.k_e),
                    t_e: tracker.pick(&d.name, "t_e_s", m.t_e_s, base.t_e),
                    k_f: tracker.pick(&d.name, "k_f", m.k_f, base.k_f),
                    t_f: tracker.pick(&d.name, "t_f_s", m.t_f_s, base.t_f),
                    sat_gamma: tracker.pick(&d.name, "sat_gamma", m.sat_gamma, base.sat_gamma),
                    sat_epsilon: tracker.pick(&d.name, "sat_epsilon", m.sat_epsilon, base.sat_epsilon),
                    m_d: tracker.pick(&d.name, "governor_droop_pu", m.governor_droop_pu, base.m_d),
                    t_tg: tracker.pick(&d.name, "t_tg_s", m.t_tg_s, base.t_tg),
                    s_rating: d.rating_mva,
                    omega_b: tracker.pick(
                        &d.name,
                        "omega_b_rad_per_s",
                        m.omega_b_rad_per_s,
                        base.omega_b,
                    ),
                    v_ref: base.v_ref,
                    p_set: base.p_set,
                    omega_set: base.omega_set,
                })
            }
            DeviceKindEntry::Gfm => {
                if d.machine.is_some() {
                    return Err(Error::Case(format!(
                        "device '{}': inverter devices take no machine section",
                        d.name
                    )));
                }
                let coupling = d.coupling.clone().unwrap_or_default();
                let controller_kind = d.controller.unwrap_or(ControllerKindEntry::ExpDroop);
                let controller = match controller_kind {
                    ControllerKindEntry::ExpDroop => {
                        if d.linear_droop.is_some() {
                            return Err(Error::Case(format!(
                                "device '{}': linear_droop section with exp_droop controller",
                                d.name
                            )));
                        }
                        let e = d.droop.clone().unwrap_or_default();
                        let base = ExpDroopParams::default();
                        let params = ExpDroopParams {
                            alpha: tracker.pick(&d.name, "alpha", e.alpha, base.alpha),
                            beta: tracker.pick(&d.name, "beta", e.beta, base.beta),
                            d_max: tracker.pick(&d.name, "d_max_pu", e.d_max_pu, base.d_max),
                            d_min: tracker.pick(&d.name, "d_min_pu", e.d_min_pu, base.d_min),
                            m_d: tracker.pick(&d.name, "m_d_pu", e.m_d_pu, base.m_d),
                            omega_nom: tracker.pick(&d.name, "omega_nom_pu", e.omega_nom_pu, base.omega_nom),
                            omega_b: tracker.pick(
                                &d.name,
                                "omega_b_rad_per_s",
                                e.omega_b_rad_per_s,
                                base.omega_b,
                            ),
                            k: tracker.pick(&d.name, "k_per_s", e.k_per_s, base.k),
                            eps_p: tracker.pick(&d.name, "eps_p_pu", e.eps_p_pu, base.eps_p),
                            eps_dp: tracker.pick(&d.name, "eps_dp_pu_per_s", e.eps_dp_pu_per_s, base.eps_dp),
                        };
                        params.validate()?;
                        GfmController::ExpDroop {
                            params,
                            power_sharing: d.power_sharing.unwrap_or(true),
                        }
                    }
                    ControllerKindEntry::Linear => {
                        if d.droop.is_some() {
                            return Err(Error::Case(format!(
                                "device '{}': droop section with linear controller",
                                d.name
                            )));
                        }
                        if d.power_sharing == Some(true) {
                            return Err(Error::Case(format!(
                                "device '{}': power sharing needs the exp_droop controller",
                                d.name
                            )));
                        }
                        let l = d.linear_droop.clone().unwrap_or_default();
                        let base = LinearDroopParams::default();
                        let params = LinearDroopParams {
                            m_d: tracker.pick(&d.name, "m_d_pu", l.m_d_pu, base.m_d),
                            omega_fil: tracker.pick(
                                &d.name,
                                "omega_fil_rad_per_s",
                                l.omega_fil_rad_per_s,
                                base.omega_fil,
                            ),
                            omega_set: tracker.pick(&d.name, "omega_set_pu", l.omega_set_pu, base.omega_set),
                        };
                        params.validate()?;
                        GfmController::Linear { params }
                    }
                };
                let base_coupling = (0.15, 0.005, 0.0167, 0.05, 1.0);
                DeviceModel::Gfm(GfmParams {
                    controller,
                    x_out: tracker.pick(&d.name, "x_out_pu", coupling.x_out_pu, base_coupling.0),
                    r_out: tracker.pick(&d.name, "r_out_pu", coupling.r_out_pu, base_coupling.1),
                    t_fil: tracker.pick(&d.name, "t_fil_s", coupling.t_fil_s, base_coupling.2),
                    s_rating: d.rating_mva,
                    q_v_gain: tracker.pick(&d.name, "q_v_gain_pu", coupling.q_v_gain_pu, base_coupling.3),
                    v_set: tracker.pick(&d.name, "v_set_pu", coupling.v_set_pu, base_coupling.4),
                    e_mag: 1.0,
                    p_set: 0.0,
                    omega_b: tracker.pick(
                        &d.name,
                        "omega_b_rad_per_s",
                        coupling.omega_b_rad_per_s,
                        crate::droop::NOMINAL_OMEGA_60HZ,
                    ),
                    positive_export: coupling.positive_export.unwrap_or(false),
                })
            }
        };
        devices.push(Device {
            name: d.name.clone(),
            bus,
            model,
        });
    }

    // Dispatch table: every device exactly once.
    let mut dispatch = vec![None; devices.len()];
    for entry in &case.dispatch {
        let idx = devices
            .iter()
            .position(|d| d.name == entry.device)
            .ok_or_else(|| Error::UnknownRef {
                kind: "device",
                name: entry.device.clone(),
            })?;
        if dispatch[idx].is_some() {
            return Err(Error::Case(format!(
                "device '{}' dispatched twice",
                entry.device
            )));
        }
        dispatch[idx] = Some(Dispatch {
            p: entry.p_mw / s_base,
            q: entry.q_mvar / s_base,
        });
    }
    let dispatch: Vec<Dispatch> = dispatch
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            d.ok_or_else(|| Error::Case(format!("device '{}' has no dispatch", devices[i].name)))
        })
        .collect::<Result<_>>()?;

    let mut events = Vec::with_capacity(case.events.len());
    for ev in &case.events {
        let kind = match ev.kind {
            EventKindEntry::LoadStep => {
                let bus_id = ev.bus.as_deref().ok_or_else(|| {
                    Error::Case(format!("load step at t={} needs a bus", ev.time_s))
                })?;
                let bus = network.bus_index(bus_id)?;
                if ev.device.is_some() {
                    return Err(Error::Case("load step takes no device".into()));
                }
                let (dp, dq) = match (ev.scale_pct, ev.delta_p_mw, ev.delta_q_mvar) {
                    (Some(pct), None, None) => (
                        network.buses[bus].load_p * pct / 100.0,
                        network.buses[bus].load_q * pct / 100.0,
                    ),
                    (None, p_mw, q_mvar) if p_mw.is_some() || q_mvar.is_some() => (
                        p_mw.unwrap_or(0.0) / s_base,
                        q_mvar.unwrap_or(0.0) / s_base,
                    ),
                    _ => {
                        return Err(Error::Case(
                            "load step needs scale_pct or delta_p_mw/delta_q_mvar, not both".into(),
                        ))
                    }
                };
                EventKind::LoadStep { bus, dp, dq }
            }
            EventKindEntry::GenTrip => {
                let name = ev.device.as_deref().ok_or_else(|| {
                    Error::Case(format!("generator trip at t={} needs a device", ev.time_s))
                })?;
                if ev.bus.is_some() || ev.scale_pct.is_some() || ev.delta_p_mw.is_some() {
                    return Err(Error::Case("generator trip takes only a device".into()));
                }
                let device = devices
                    .iter()
                    .position(|d| d.name == name)
                    .ok_or_else(|| Error::UnknownRef {
                        kind: "device",
                        name: name.to_string(),
                    })?;
                EventKind::GenTrip { device }
            }
        };
        events.push(Event {
            time: ev.time_s,
            kind,
        });
    }

    let options = case.options.clone().unwrap_or_default();
    let rocof_window = case
        .analysis
        .as_ref()
        .and_then(|a| a.rocof_window_s)
        .unwrap_or(0.1);
    let scenario = Scenario {
        name: case.name.clone(),
        network,
        devices,
        dispatch,
        events,
        t_end: case.simulation.t_end_s,
        dt: case.simulation.dt_s,
        extended_channels: options.extended_channels,
        scale_loads_to_slack: options.scale_loads_to_slack_dispatch,
        rocof_window,
    };
    scenario.validate()?;

    let sweep = match case.analysis.as_ref() {
        Some(a) => match (&a.sweep_device, &a.sweep_grid) {
            (Some(dev), Some(grid)) => {
                scenario.device_index(dev)?;
                Some((dev.clone(), parse_grid(grid)?))
            }
            (None, None) => None,
            _ => {
                return Err(Error::Case(
                    "analysis needs both sweep_device and sweep_grid or neither".into(),
                ))
            }
        },
        None => None,
    };

    Ok(LoadedCase {
        scenario,
        sweep,
        defaults_applied: tracker.log,
        case: case.clone(),
    })
}

/// Parses and validates a case from JSON text.
pub fn load_case_str(text: &str) -> Result<LoadedCase> {
    let case: CaseFile =
        serde_json::from_str(text).map_err(|e| Error::Case(format!("parse error: {e}")))?;
    build_scenario(&case)
}

/// Parses and validates a case file from disk.
pub fn load_case(path: &std::path::Path) -> Result<LoadedCase> {
    let text = std::fs::read_to_string(path)?;
    load_case_str(&text)
}

/// Serializes a case back to canonical JSON.
pub fn emit_case(case: &CaseFile) -> String {
    serde_json::to_string_pretty(case).expect("case serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_case() -> String {
        r#"{
            "schema_version": 1,
            "name": "mini",
            "network": {
                "s_base_mva": 100.0,
                "v_base_kv": 18.0,
                "buses": [
                    {"id": "b1", "kind": "slack", "v_setpoint_pu": 1.02},
                    {"id": "b2", "kind": "pq", "load_p_mw": 75.0, "load_q_mvar": 25.0},
                    {"id": "b3", "kind": "pv", "v_setpoint_pu": 1.02}
                ],
                "branches": [
                    {"from": "b1", "to": "b2", "r_pu": 0.0, "x_pu": 0.05},
                    {"from": "b2", "to": "b3", "r_pu": 0.0, "x_pu": 0.05}
                ]
            },
            "devices": [
                {"name": "sg", "bus": "b1", "kind": "sg", "rating_mva": 100.0},
                {"name": "gfm", "bus": "b3", "kind": "gfm", "rating_mva": 50.0}
            ],
            "dispatch": [
                {"device": "sg", "p_mw": 73.0, "q_mvar": 21.0},
                {"device": "gfm", "p_mw": 3.0, "q_mvar": 7.0}
            ],
            "events": [
                {"time_s": 1.0, "kind": "load_step", "bus": "b2", "scale_pct": 20.0}
            ],
            "simulation": {"t_end_s": 2.0, "dt_s": 0.001}
        }"#
        .to_string()
    }

    #[test]
    fn minimal_case_loads_with_default_log() {
        let loaded = load_case_str(&minimal_case()).unwrap();
        assert_eq!(loaded.scenario.devices.len(), 2);
        // Missing beta falls back to the study default and is logged.
        assert!(loaded
            .defaults_applied
            .iter()
            .any(|d| d == "gfm.beta=3.2"));
        // Load step scale: 20 % of 0.75 pu.
        match loaded.scenario.events[0].kind {
            EventKind::LoadStep { dp, dq, .. } => {
                assert!((dp - 0.15).abs() < 1e-12);
                assert!((dq - 0.05).abs() < 1e-12);
            }
            _ => panic!("expected load step"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = minimal_case().replace("\"name\": \"mini\",", "\"name\": \"mini\", \"bogus\": 1,");
        assert!(load_case_str(&text).is_err());
    }

    #[test]
    fn dangling_bus_reference_names_device() {
        let text = minimal_case().replace("\"bus\": \"b3\"", "\"bus\": \"nowhere\"");
        let err = load_case_str(&text).unwrap_err();
        assert!(err.to_string().contains("nowhere"));
    }

    #[test]
    fn dispatch_must_cover_every_device() {
        let text = minimal_case().replace(
            r#"{"device": "gfm", "p_mw": 3.0, "q_mvar": 7.0}"#,
            r#"{"device": "sg", "p_mw": 3.0, "q_mvar": 7.0}"#,
        );
        assert!(load_case_str(&text).is_err());
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("-1:0.5:1").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[0] + 1.0).abs() < 1e-12);
        assert!((g[4] - 1.0).abs() < 1e-12);
        assert!(parse_grid("1:0.5:-1").is_err());
        assert!(parse_grid("nonsense").is_err());
    }

    #[test]
    fn round_trip_is_semantically_identical() {
        let loaded = load_case_str(&minimal_case()).unwrap();
        let emitted = emit_case(&loaded.case);
        let reloaded = load_case_str(&emitted).unwrap();
        assert_eq!(loaded.scenario, reloaded.scenario);
        assert_eq!(loaded.defaults_applied, reloaded.defaults_applied);
    }
}
