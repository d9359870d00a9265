//! Whole-system invariants on the bundled cases: dimensionality of the
//! linearization, convergence of the difference scheme, and energy
//! accounting across a disturbance.

use gfmsim::analysis::linearize_scenario;
use gfmsim::cases::load_bundled;
use gfmsim::simulator::run;

#[test]
fn three_bus_state_matrix_is_eleven_square() {
    // Nine machine states plus two inverter states.
    let loaded = load_bundled("case_3bus_A").unwrap();
    let sm = linearize_scenario(&loaded.scenario, 1e-6).unwrap();
    assert_eq!(sm.a.nrows(), 11);
    assert_eq!(sm.a.ncols(), 11);
    assert_eq!(sm.labels.len(), 11);
    assert_eq!(sm.labels[0], "sg.delta");
    assert_eq!(sm.labels[9], "gfm.delta");
    assert_eq!(sm.labels[10], "gfm.p");
    assert_eq!(sm.gfm_states.iter().filter(|g| **g).count(), 2);
}

#[test]
fn perturbation_halving_converges() {
    // Central differences have settled: halving the step changes entries
    // within mixed tolerance 1e-6 * (1 + |A|).
    let loaded = load_bundled("case_3bus_A").unwrap();
    let a1 = linearize_scenario(&loaded.scenario, 1e-6).unwrap().a;
    let a2 = linearize_scenario(&loaded.scenario, 5e-7).unwrap().a;
    for i in 0..a1.nrows() {
        for j in 0..a1.ncols() {
            let delta = (a1[(i, j)] - a2[(i, j)]).abs();
            assert!(
                delta <= 1e-6 * (1.0 + a1[(i, j)].abs()),
                "entry ({i}, {j}) moved {delta} between perturbation sizes"
            );
        }
    }
}

#[test]
fn post_event_energy_balance() {
    // At the final steady state the device powers cover the stepped load
    // plus losses; the bundled 3-bus lines are lossless so the sum is the
    // load exactly.
    let loaded = load_bundled("case_3bus_A").unwrap();
    let out = run(&loaded.scenario).unwrap();
    let p_sg = out.series.channel("p_sg_pu").unwrap();
    let p_gfm = out.series.channel("p_gfm_pu").unwrap();
    let n = p_sg.len() - 1;
    let generated = p_sg[n] + p_gfm[n];
    let stepped_load = 0.75 * 1.2;
    assert!(
        (generated - stepped_load).abs() < 1e-3,
        "generation {generated} vs load {stepped_load}"
    );
}

#[test]
fn trip_creates_matching_generation_deficit() {
    // Removing the 540 MW unit zeroes its 5.4 pu injection at the event
    // instant; the remaining fleet redistributes it, so total generation
    // returns to load plus losses at the new steady state.
    let loaded = load_bundled("case_39bus_A").unwrap();
    let mut scenario = loaded.scenario.clone();
    scenario.t_end = 12.0;
    let out = run(&scenario).unwrap();
    let dt = scenario.dt;
    let k_event = (out.first_event.unwrap() / dt).round() as usize;

    let p_gen7 = out.series.channel("p_gen7_pu").unwrap();
    assert!(
        (p_gen7[k_event] - 5.4).abs() < 0.01,
        "pre-trip output {} pu, dispatched 5.4",
        p_gen7[k_event]
    );
    assert_eq!(p_gen7[k_event + 1], 0.0);

    let total_at = |k: usize| -> f64 {
        out.series
            .channels
            .iter()
            .filter(|c| c.name.starts_with("p_"))
            .map(|c| c.data[k])
            .sum()
    };
    // The load is unchanged, so up to the (small) change in network
    // losses the surviving units replace the tripped output.
    let before = total_at(k_event);
    let final_total = total_at(out.series.time.len() - 1);
    assert!(
        (final_total - before).abs() < 0.1,
        "fleet output moved from {before} to {final_total} pu"
    );
}
