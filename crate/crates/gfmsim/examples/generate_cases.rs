// Regenerates the bundled case files under cases/ from their builders.
// Run from the crate root: cargo run --example generate_cases

use gfmsim::io::{
    emit_case, load_case_str, AnalysisSection, BranchEntry, BusEntry, BusKindEntry, CaseFile,
    ControllerKindEntry, DeviceKindEntry, DeviceSection, DispatchEntry, EventEntry, EventKindEntry,
    GfmCouplingEntry, NetworkSection, OptionsSection, SimulationSection,
};

fn bus(id: &str, kind: BusKindEntry, v: Option<f64>, p: Option<f64>, q: Option<f64>) -> BusEntry {
    BusEntry {
        id: id.into(),
        kind,
        v_setpoint_pu: v,
        load_p_mw: p,
        load_q_mvar: q,
    }
}

fn line(from: &str, to: &str, r: f64, x: f64, b: f64) -> BranchEntry {
    BranchEntry {
        from: from.into(),
        to: to.into(),
        r_pu: r,
        x_pu: x,
        b_pu: b,
        tap: None,
    }
}

fn xfmr(from: &str, to: &str, r: f64, x: f64, tap: f64) -> BranchEntry {
    BranchEntry {
        from: from.into(),
        to: to.into(),
        r_pu: r,
        x_pu: x,
        b_pu: 0.0,
        tap: Some(tap),
    }
}

fn sg(name: &str, bus: &str, rating: f64) -> DeviceSection {
    DeviceSection {
        name: name.into(),
        bus: bus.into(),
        kind: DeviceKindEntry::Sg,
        rating_mva: rating,
        controller: None,
        power_sharing: None,
        machine: None,
        coupling: None,
        droop: None,
        linear_droop: None,
    }
}

fn gfm(name: &str, bus: &str, rating: f64, controller: ControllerKindEntry, v_set: f64) -> DeviceSection {
    DeviceSection {
        name: name.into(),
        bus: bus.into(),
        kind: DeviceKindEntry::Gfm,
        rating_mva: rating,
        controller: Some(controller),
        power_sharing: matches!(controller, ControllerKindEntry::ExpDroop).then_some(true),
        machine: None,
        coupling: Some(GfmCouplingEntry {
            x_out_pu: Some(0.15),
            r_out_pu: Some(0.005),
            t_fil_s: Some(0.0167),
            q_v_gain_pu: Some(0.05),
            v_set_pu: Some(v_set),
            omega_b_rad_per_s: None,
            positive_export: None,
        }),
        droop: None,
        linear_droop: None,
    }
}

fn three_bus_case(tag: &str, step_pct: f64, gfm_p_mw: f64, sg_p_mw: f64, gfm_q: f64, sg_q: f64) -> CaseFile {
    CaseFile {
        schema_version: 1,
        name: format!("case_3bus_{tag}"),
        description: Some(format!(
            "Three-bus study system: 100 MVA machine at bus1, 50 MVA storage-backed \
             grid-forming inverter with exponential droop at bus3, constant-power load \
             at bus2, {step_pct:+.0} % load step at t = 1 s."
        )),
        network: NetworkSection {
            s_base_mva: 100.0,
            v_base_kv: 18.0,
            buses: vec![
                bus("bus1", BusKindEntry::Slack, Some(1.02), None, None),
                bus("bus2", BusKindEntry::Pq, None, Some(75.0), Some(25.0)),
                bus("bus3", BusKindEntry::Pv, Some(1.02), None, None),
            ],
            branches: vec![
                line("bus1", "bus2", 0.0, 0.05, 0.0),
                line("bus2", "bus3", 0.0, 0.05, 0.0),
            ],
            provenance: None,
        },
        devices: vec![
            sg("sg", "bus1", 100.0),
            gfm("gfm", "bus3", 50.0, ControllerKindEntry::ExpDroop, 1.02),
        ],
        dispatch: vec![
            DispatchEntry {
                device: "sg".into(),
                p_mw: sg_p_mw,
                q_mvar: sg_q,
            },
            DispatchEntry {
                device: "gfm".into(),
                p_mw: gfm_p_mw,
                q_mvar: gfm_q,
            },
        ],
        events: vec![EventEntry {
            time_s: 1.0,
            kind: EventKindEntry::LoadStep,
            bus: Some("bus2".into()),
            device: None,
            scale_pct: Some(step_pct),
            delta_p_mw: None,
            delta_q_mvar: None,
        }],
        simulation: SimulationSection {
            t_end_s: 30.0,
            dt_s: 0.001,
        },
        analysis: Some(AnalysisSection {
            sweep_device: Some("gfm".into()),
            sweep_grid: Some("-1:0.05:1".into()),
            rocof_window_s: Some(0.1),
        }),
        options: None,
    }
}

/// New England 39-bus network: 34 lines, 12 transformers, 19 loads, ten
/// 1000 MVA units on buses 30-39. Branch and load data from the standard
/// public test-system dataset.
fn new_england_network() -> NetworkSection {
    let loads: &[(usize, f64, f64)] = &[
        (3, 322.0, 2.4),
        (4, 500.0, 184.0),
        (7, 233.8, 84.0),
        (8, 522.0, 176.0),
        (12, 8.5, 88.0),
        (15, 320.0, 153.0),
        (16, 329.0, 32.3),
        (18, 158.0, 30.0),
        (20, 628.0, 103.0),
        (21, 274.0, 115.0),
        (23, 247.5, 84.6),
        (24, 308.6, -92.2),
        (25, 224.0, 47.2),
        (26, 139.0, 17.0),
        (27, 281.0, 75.5),
        (28, 206.0, 27.6),
        (29, 283.5, 26.9),
        (31, 9.2, 4.6),
        (39, 1104.0, 250.0),
    ];
    // Generator terminal voltage setpoints from the same dataset.
    let v_set: &[(usize, f64)] = &[
        (30, 1.0499),
        (31, 0.982),
        (32, 0.9841),
        (33, 0.9972),
        (34, 1.0123),
        (35, 1.0494),
        (36, 1.0636),
        (37, 1.0275),
        (38, 1.0265),
        (39, 1.03),
    ];
    let mut buses = Vec::new();
    for i in 1..=39 {
        let load = loads.iter().find(|(b, _, _)| *b == i);
        let vset = v_set.iter().find(|(b, _)| *b == i);
        let kind = if i == 31 {
            BusKindEntry::Slack
        } else if vset.is_some() {
            BusKindEntry::Pv
        } else {
            BusKindEntry::Pq
        };
        buses.push(bus(
            &format!("bus{i}"),
            kind,
            vset.map(|(_, v)| *v),
            load.map(|(_, p, _)| *p),
            load.map(|(_, _, q)| *q),
        ));
    }

    let b = |f: usize, t: usize, r: f64, x: f64, bb: f64| {
        line(&format!("bus{f}"), &format!("bus{t}"), r, x, bb)
    };
    let tx = |f: usize, t: usize, r: f64, x: f64, tap: f64| {
        xfmr(&format!("bus{f}"), &format!("bus{t}"), r, x, tap)
    };
    let branches = vec![
        b(1, 2, 0.0035, 0.0411, 0.6987),
        b(1, 39, 0.0010, 0.0250, 0.7500),
        b(2, 3, 0.0013, 0.0151, 0.2572),
        b(2, 25, 0.0070, 0.0086, 0.1460),
        tx(2, 30, 0.0000, 0.0181, 1.025),
        b(3, 4, 0.0013, 0.0213, 0.2214),
        b(3, 18, 0.0011, 0.0133, 0.2138),
        b(4, 5, 0.0008, 0.0128, 0.1342),
        b(4, 14, 0.0008, 0.0129, 0.1382),
        b(5, 6, 0.0002, 0.0026, 0.0434),
        b(5, 8, 0.0008, 0.0112, 0.1476),
        b(6, 7, 0.0006, 0.0092, 0.1130),
        b(6, 11, 0.0007, 0.0082, 0.1389),
        tx(6, 31, 0.0000, 0.0250, 1.070),
        b(7, 8, 0.0004, 0.0046, 0.0780),
        b(8, 9, 0.0023, 0.0363, 0.3804),
        b(9, 39, 0.0010, 0.0250, 1.2000),
        b(10, 11, 0.0004, 0.0043, 0.0729),
        b(10, 13, 0.0004, 0.0043, 0.0729),
        tx(10, 32, 0.0000, 0.0200, 1.070),
        tx(12, 11, 0.0016, 0.0435, 1.006),
        tx(12, 13, 0.0016, 0.0435, 1.006),
        b(13, 14, 0.0009, 0.0101, 0.1723),
        b(14, 15, 0.0018, 0.0217, 0.3660),
        b(15, 16, 0.0009, 0.0094, 0.1710),
        b(16, 17, 0.0007, 0.0089, 0.1342),
        b(16, 19, 0.0016, 0.0195, 0.3040),
        b(16, 21, 0.0008, 0.0135, 0.2548),
        b(16, 24, 0.0003, 0.0059, 0.0680),
        b(17, 18, 0.0007, 0.0082, 0.1319),
        b(17, 27, 0.0013, 0.0173, 0.3216),
        tx(19, 20, 0.0007, 0.0138, 1.060),
        tx(19, 33, 0.0007, 0.0142, 1.070),
        tx(20, 34, 0.0009, 0.0180, 1.009),
        b(21, 22, 0.0008, 0.0140, 0.2565),
        b(22, 23, 0.0006, 0.0096, 0.1846),
        tx(22, 35, 0.0000, 0.0143, 1.025),
        b(23, 24, 0.0022, 0.0350, 0.3610),
        tx(23, 36, 0.0005, 0.0272, 1.000),
        b(25, 26, 0.0032, 0.0323, 0.5310),
        tx(25, 37, 0.0006, 0.0232, 1.025),
        b(26, 27, 0.0014, 0.0147, 0.2396),
        b(26, 28, 0.0043, 0.0474, 0.7802),
        b(26, 29, 0.0057, 0.0625, 1.0290),
        b(28, 29, 0.0014, 0.0151, 0.2490),
        tx(29, 38, 0.0008, 0.0156, 1.025),
    ];

    NetworkSection {
        s_base_mva: 100.0,
        v_base_kv: 345.0,
        buses,
        branches,
        provenance: Some(
            "Branch, transformer, and load data from the standard public IEEE 39-bus \
             New England test-system dataset; loads are scaled at initialization to \
             match the dispatched generation."
                .into(),
        ),
    }
}

fn thirty_nine_bus_case(tag: &str, gfm_units: &[usize]) -> CaseFile {
    // Unit dispatches in MW, generator i at bus 30 + i.
    let dispatch_mw = [250.0, 678.0, 650.0, 632.0, 508.0, 650.0, 560.0, 540.0, 830.0, 1000.0];
    let network = new_england_network();
    let controller = match tag {
        "B" => ControllerKindEntry::Linear,
        _ => ControllerKindEntry::ExpDroop,
    };
    let mut devices = Vec::new();
    for (i, _) in dispatch_mw.iter().enumerate() {
        let bus_id = format!("bus{}", 30 + i);
        let v = network
            .buses
            .iter()
            .find(|b| b.id == bus_id)
            .and_then(|b| b.v_setpoint_pu)
            .unwrap_or(1.0);
        let name = format!("gen{i}");
        if gfm_units.contains(&i) {
            devices.push(gfm(&name, &bus_id, 1000.0, controller, v));
        } else {
            devices.push(sg(&name, &bus_id, 1000.0));
        }
    }
    let dispatch = dispatch_mw
        .iter()
        .enumerate()
        .map(|(i, &p)| DispatchEntry {
            device: format!("gen{i}"),
            p_mw: p,
            q_mvar: 0.0,
        })
        .collect();
    let kind_note = match tag {
        "A" => "all ten units are synchronous machines",
        "B" => "units 0, 4, 8 are 5 % linear-droop grid-forming inverters",
        _ => "units 0, 4, 8 are exponential-droop grid-forming inverters",
    };
    CaseFile {
        schema_version: 1,
        name: format!("case_39bus_{tag}"),
        description: Some(format!(
            "New England 39-bus system, ten 1000 MVA units; {kind_note}; \
             unit 7 (540 MW) trips at t = 1 s."
        )),
        network,
        devices,
        dispatch,
        events: vec![EventEntry {
            time_s: 1.0,
            kind: EventKindEntry::GenTrip,
            bus: None,
            device: Some("gen7".into()),
            scale_pct: None,
            delta_p_mw: None,
            delta_q_mvar: None,
        }],
        simulation: SimulationSection {
            t_end_s: 30.0,
            dt_s: 0.001,
        },
        analysis: Some(AnalysisSection {
            sweep_device: None,
            sweep_grid: None,
            rocof_window_s: Some(0.1),
        }),
        options: Some(OptionsSection {
            scale_loads_to_slack_dispatch: true,
            extended_channels: false,
        }),
    }
}

fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("cases");
    std::fs::create_dir_all(&dir).expect("create cases dir");

    // Dispatches per the study's case table (100 MVA base): A and C share
    // the near-zero inverter dispatch, B is the highly dispatched case.
    let cases = vec![
        three_bus_case("A", 20.0, 3.0, 73.0, 7.0, 21.0),
        three_bus_case("B", 20.0, 40.0, 40.0, 3.0, 24.0),
        three_bus_case("C", -20.0, 3.0, 73.0, 7.0, 21.0),
        thirty_nine_bus_case("A", &[]),
        thirty_nine_bus_case("B", &[0, 4, 8]),
        thirty_nine_bus_case("C", &[0, 4, 8]),
    ];
    for case in cases {
        let text = emit_case(&case);
        // Every bundled case must load and validate.
        let loaded = load_case_str(&text).expect("bundled case must validate");
        let path = dir.join(format!("{}.json", case.name));
        std::fs::write(&path, text).expect("write case file");
        println!(
            "wrote {} ({} devices, {} events)",
            path.display(),
            loaded.scenario.devices.len(),
            loaded.scenario.events.len()
        );
    }
}
