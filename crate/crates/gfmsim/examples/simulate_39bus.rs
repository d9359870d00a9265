//! The New England 39-bus comparison: losing a 540 MW unit with an
//! all-machine fleet, with three linear-droop inverters, and with three
//! exponential-droop inverters at the same dispatches.
//!
//!     cargo run --release --example simulate_39bus

use gfmsim::analysis::{aggregate_inertia, frequency_metrics};
use gfmsim::cases::load_bundled;
use gfmsim::simulator::run;

fn main() {
    println!(
        "{:<14} {:>9} {:>9} {:>9} {:>11} {:>9} {:>9}",
        "case", "inertia_s", "nadir_hz", "settle_hz", "rocof_hz_s", "mode_hz", "zeta"
    );
    for tag in ["A", "B", "C"] {
        let name = format!("case_39bus_{tag}");
        let loaded = load_bundled(&name).unwrap();
        let out = run(&loaded.scenario).unwrap();

        let h: Vec<f64> = out.devices.iter().map(|d| d.inertia_s).collect();
        let s: Vec<f64> = out.devices.iter().map(|d| d.rating_mva).collect();
        let inertia = aggregate_inertia(&h, &s).unwrap();

        let f = out.stats_frequency();
        let m = frequency_metrics(&out.series.time, &f, out.first_event, 0.1).unwrap();
        println!(
            "{:<14} {:>9.2} {:>9.4} {:>9.4} {:>11.3} {:>9.3} {:>9.3}",
            name,
            inertia,
            m.nadir_hz,
            m.settling_hz,
            m.max_rocof_hz_per_s,
            m.dominant_mode_hz.unwrap_or(f64::NAN),
            m.dominant_mode_damping.unwrap_or(f64::NAN),
        );

        let latched: Vec<String> = out
            .sharing_activation
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.map(|t| format!("{} at {t:.2} s", out.devices[i].name)))
            .collect();
        if !latched.is_empty() {
            println!("{:<14} power sharing: {}", "", latched.join(", "));
        }
    }
    println!();
    println!("the exponential-droop fleet (case C) recovers the all-machine ROCOF");
    println!("while holding the highest nadir; the linear fleet trades nadir for ROCOF.");
}
