//! The exponential droop law itself: deviation curve, tangent droop, the
//! linearization power, and the frequency envelope.
//!
//!     cargo run --example droop_curves

use gfmsim::droop::ExpDroopParams;

fn main() {
    let params = ExpDroopParams::default();
    params.validate().unwrap();

    let p_l = params.p_l().unwrap();
    println!("study parameters: alpha = {}, beta = {}", params.alpha, params.beta);
    println!("minimum tangent droop  alpha*beta = {:.4} %", 100.0 * params.alpha * params.beta);
    println!("maximum tangent droop  d_max      = {:.1} %", 100.0 * params.d_max);
    println!("linearization power    p_l        = {p_l:.4} pu");
    println!();

    let f_nom = params.omega_b / (2.0 * std::f64::consts::PI);
    println!("{:>6} {:>12} {:>10} {:>14}", "p_pu", "d_exp_pu", "freq_hz", "tangent_pu");
    for k in 0..=20 {
        let p = -1.0 + 0.1 * k as f64;
        let d = params.deviation(p).unwrap();
        let tangent = params.tangent_droop(p).unwrap();
        let freq = f_nom * (params.omega_nom + d);
        println!("{p:>6.2} {d:>12.6} {freq:>10.4} {tangent:>14.6}");
    }
    println!();

    // The frequency setpoint offset cancels the curve at the dispatch
    // point, so a device at p = p_set holds nominal frequency exactly.
    for p_set in [-0.9, -0.3, 0.06, 0.5, 0.95] {
        let w = params.frequency_rad(p_set, p_set, 0.0).unwrap();
        println!(
            "p_set = {p_set:+.2}: omega_set = {:+.6} pu, command at setpoint = {:.4} Hz",
            params.setpoint_offset(p_set).unwrap(),
            w / (2.0 * std::f64::consts::PI)
        );
    }
    println!();
    println!(
        "full range: p = +1 -> {:.3} Hz, p = -1 -> {:.3} Hz",
        params.frequency_rad(1.0, 0.0, 0.0).unwrap() / (2.0 * std::f64::consts::PI),
        params.frequency_rad(-1.0, 0.0, 0.0).unwrap() / (2.0 * std::f64::consts::PI),
    );
}
