//! Matrix-pencil identification: first on a synthetic two-mode signal
//! with known parameters, then on the machine frequency from a simulated
//! disturbance.
//!
//!     cargo run --release --example modal_identification

use gfmsim::analysis::{matrix_pencil, MatrixPencilOptions};
use gfmsim::cases::load_bundled;
use gfmsim::simulator::run;

fn main() {
    // Synthetic: 0.44 Hz decaying at 0.5 1/s plus a faster, lighter mode.
    let dt = 1e-3;
    let signal: Vec<f64> = (0..6000)
        .map(|k| {
            let t = k as f64 * dt;
            (-0.5 * t).exp() * (2.0 * std::f64::consts::PI * 0.44 * t).cos()
                + 0.3 * (-1.1 * t).exp() * (2.0 * std::f64::consts::PI * 1.9 * t + 0.7).cos()
        })
        .collect();
    let opts = MatrixPencilOptions {
        max_samples: Some(600),
        ..Default::default()
    };
    println!("synthetic signal, true modes: (0.44 Hz, zeta 0.178) and (1.90 Hz, zeta 0.092):");
    for m in matrix_pencil(&signal, dt, &opts).unwrap() {
        println!(
            "  f = {:.4} Hz  zeta = {:.4}  amplitude = {:.4}  energy = {:.3}",
            m.frequency_hz, m.damping, m.amplitude, m.energy
        );
    }

    // Simulated: machine speed after the 3-bus case B load step. Detrend
    // with a linear fit, then decompose the ring-down.
    let loaded = load_bundled("case_3bus_B").unwrap();
    let out = run(&loaded.scenario).unwrap();
    let f = out.series.channel("f_sg_hz").unwrap();
    let t_ev = out.first_event.unwrap();
    let start = out.series.time.iter().position(|&t| t >= t_ev).unwrap();
    let window = &f[start..start + 8000];

    let n = window.len() as f64;
    let mean_i = (n - 1.0) / 2.0;
    let mean_y: f64 = window.iter().sum::<f64>() / n;
    let slope: f64 = window
        .iter()
        .enumerate()
        .map(|(i, &y)| (i as f64 - mean_i) * (y - mean_y))
        .sum::<f64>()
        / window
            .iter()
            .enumerate()
            .map(|(i, _)| (i as f64 - mean_i).powi(2))
            .sum::<f64>();
    let detrended: Vec<f64> = window
        .iter()
        .enumerate()
        .map(|(i, &y)| y - mean_y - slope * (i as f64 - mean_i))
        .collect();

    println!();
    println!("machine frequency ring-down, case_3bus_B (top modes):");
    let opts = MatrixPencilOptions {
        max_samples: Some(400),
        ..Default::default()
    };
    for m in matrix_pencil(&detrended, dt, &opts).unwrap().iter().take(4) {
        println!(
            "  f = {:.4} Hz  zeta = {:.4}  energy = {:.3e}",
            m.frequency_hz, m.damping, m.energy
        );
    }
}
