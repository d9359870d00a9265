//! The autonomous power-sharing loop in isolation: disturbance detection,
//! latching, and convergence of the frequency offset to the equitable
//! droop point.
//!
//!     cargo run --example power_sharing

use gfmsim::droop::{ExpDroopParams, PowerSharingState};

fn main() {
    let params = ExpDroopParams::default();
    let p_set = 0.06;
    let mut state = PowerSharingState::new(p_set);
    let dt = 1e-3;

    // Scripted filtered-power trace: settled, then a ramp to a new level
    // (the disturbance), then settled again.
    let p_of_t = |t: f64| -> f64 {
        if t < 1.0 {
            p_set
        } else if t < 1.3 {
            p_set + (t - 1.0) / 0.3 * 0.24
        } else {
            0.30
        }
    };

    let mut latched_at = None;
    for k in 0..60_000 {
        let t = k as f64 * dt;
        let p = p_of_t(t);
        state.step(p, p_set, dt, &params);
        if state.latched && latched_at.is_none() {
            latched_at = Some(t);
            println!("disturbance latched at t = {t:.3} s (|dp/dt| fell below eps_dp)");
        }
        if k % 6000 == 0 {
            println!(
                "t = {t:6.2} s  p = {p:.3}  omega_ps = {:+.6} pu  error = {:+.2e}",
                state.omega_ps,
                state.sharing_error(p, p_set, &params)
            );
        }
    }

    // At the fixpoint the offset equals the linear-droop deviation minus
    // the exponential curve's own contribution.
    let p_final = p_of_t(60.0);
    let target = (p_set - p_final) * params.m_d - params.deviation(p_final).unwrap();
    println!();
    println!("converged omega_ps = {:+.6} pu", state.omega_ps);
    println!("equitable target   = {:+.6} pu", target);
    println!("difference         = {:.2e} pu", (state.omega_ps - target).abs());

    // The resulting total deviation sits on the m_d line: this is what
    // restores conventional 5 % sharing after the transient.
    let total = params.deviation(p_final).unwrap() + state.omega_ps;
    println!(
        "total deviation {:+.6} pu vs m_d * (p_set - p) = {:+.6} pu",
        total,
        params.m_d * (p_set - p_final)
    );
}
