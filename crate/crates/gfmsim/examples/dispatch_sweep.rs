//! Small-signal stability across the inverter's full dispatch range on
//! the 3-bus system: eigenvalues, participation-based mode labels, and
//! real/oscillatory bifurcations.
//!
//!     cargo run --release --example dispatch_sweep

use gfmsim::analysis::{bifurcation_points, dispatch_sweep, ModeKind};
use gfmsim::cases::load_bundled;

fn main() {
    let loaded = load_bundled("case_3bus_A").unwrap();
    let (device, grid) = loaded.sweep.clone().expect("case declares a sweep");

    let t0 = std::time::Instant::now();
    let sweep = dispatch_sweep(&loaded.scenario, &device, &grid).unwrap();
    println!(
        "swept '{device}' over {} dispatches in {:?} ({} skipped)",
        sweep.points.len(),
        t0.elapsed(),
        sweep.skipped.len()
    );

    println!();
    println!("inverter-participating modes (one line per conjugate pair):");
    for pt in sweep.points.iter().step_by(4) {
        let r = &pt.report;
        println!("p_set = {:+.2}", pt.p_set);
        for i in 0..r.eigenvalues.len() {
            if r.eigenvalues[i].im < 0.0 || r.kind(i) == ModeKind::Reference {
                continue;
            }
            if r.gfm_participation(i) <= 0.1 {
                continue;
            }
            println!(
                "  lambda = {:>8.3} {:+8.3}j   f = {:>6.3} Hz  zeta = {:>5.3}  states: {}",
                r.eigenvalues[i].re,
                r.eigenvalues[i].im,
                r.frequency_hz(i),
                r.damping(i),
                r.dominant_states(i, 4).join(", ")
            );
        }
    }

    // Stability margin across the range.
    let worst = sweep
        .points
        .iter()
        .flat_map(|pt| {
            pt.report
                .eigenvalues
                .iter()
                .zip(0..)
                .filter(|(_, i)| pt.report.kind(*i) != ModeKind::Reference)
                .map(|(l, _)| l.re)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    println!();
    println!("largest non-reference Re(lambda) over the sweep: {worst:.4} 1/s");

    let flags = bifurcation_points(&sweep.points);
    println!("real/oscillatory transitions of inverter modes near: {flags:?}");
}
