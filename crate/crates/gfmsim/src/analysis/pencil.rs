//! Matrix-pencil identification of damped sinusoids in a sampled signal.
//!
//! The Hankel matrix of the samples is rank-reduced by singular values,
//! the shifted pencil eigenvalues give the discrete poles `z_i`, and a
//! linear least-squares fit recovers the complex residues. Continuous
//! parameters follow from `lambda_i = ln(z_i) / dt`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct MatrixPencilOptions {
    /// Pencil parameter as a fraction of the sample count (L = ratio * N).
    pub pencil_ratio: f64,
    /// Singular values below `cutoff * sigma_max` are treated as noise.
    pub sv_rel_cutoff: f64,
    /// Optional hard cap on the identified model order.
    pub max_order: Option<usize>,
    /// Decimate long signals to at most this many samples before building
    /// the Hankel matrix. Decimation of a modal signal is exact as long as
    /// the decimated rate still resolves the modes.
    pub max_samples: Option<usize>,
}

impl Default for MatrixPencilOptions {
    fn default() -> Self {
        Self {
            pencil_ratio: 1.0 / 3.0,
            sv_rel_cutoff: 1e-8,
            max_order: None,
            max_samples: None,
        }
    }
}

/// One identified damped-sinusoid component.
#[derive(Debug, Clone, Copy)]
pub struct PencilMode {
    pub frequency_hz: f64,
    pub damping: f64,
    /// Continuous eigenvalue (1/s, rad/s).
    pub eigenvalue: Complex64,
    /// Peak amplitude of the reconstructed component at t = 0.
    pub amplitude: f64,
    pub phase_rad: f64,
    /// Signal energy carried by this component over the fit window.
    pub energy: f64,
}

/// Decomposes `signal` (uniform sampling `dt`) into damped exponentials,
/// sorted by carried energy. A constant signal has no modes.
pub fn matrix_pencil(
    signal: &[f64],
    dt: f64,
    options: &MatrixPencilOptions,
) -> Result<Vec<PencilMode>> {
    if !(dt > 0.0) {
        return Err(Error::Analysis("matrix pencil needs a positive sample period".into()));
    }
    if signal.len() < 8 {
        return Err(Error::Analysis(format!(
            "matrix pencil needs at least 8 samples, got {}",
            signal.len()
        )));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::Analysis("matrix pencil input contains non-finite samples".into()));
    }

    // Rank collapse: an exactly constant signal carries no dynamics.
    if signal.iter().all(|&v| v == signal[0]) {
        return Ok(Vec::new());
    }

    let (samples, dt_eff): (Vec<f64>, f64) = match options.max_samples {
        Some(cap) if signal.len() > cap.max(8) => {
            let stride = signal.len().div_ceil(cap.max(8));
            (
                signal.iter().step_by(stride).copied().collect(),
                dt * stride as f64,
            )
        }
        _ => (signal.to_vec(), dt),
    };
    let n = samples.len();
    let l = ((n as f64 * options.pencil_ratio).floor() as usize).clamp(2, n - 2);

    // Hankel matrix Y[i][j] = y[i + j], (n - l) x (l + 1).
    let rows = n - l;
    let cols = l + 1;
    let y = DMatrix::<f64>::from_fn(rows, cols, |i, j| samples[i + j]);

    let svd = y.svd(false, true);
    let v_t = svd
        .v_t
        .expect("right singular vectors requested");
    let sigma_max = svd.singular_values.max();
    if sigma_max == 0.0 {
        return Ok(Vec::new());
    }
    let mut order = svd
        .singular_values
        .iter()
        .filter(|&&s| s > options.sv_rel_cutoff * sigma_max)
        .count();
    if let Some(cap) = options.max_order {
        order = order.min(cap);
    }
    order = order.min(l);
    if order == 0 {
        return Ok(Vec::new());
    }

    // V-filtered pencil: z are the eigenvalues of pinv(V1) * V2 where V1/V2
    // drop the last/first row of the dominant right singular vectors.
    let v_m = v_t.rows(0, order).transpose(); // (l + 1) x order
    let v1 = v_m.rows(0, l).into_owned();
    let v2 = v_m.rows(1, l).into_owned();
    let gram = v1.transpose() * &v1;
    let rhs = v1.transpose() * &v2;
    let pencil = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Analysis("pencil normal equations are singular".into()))?;
    let z_all: Vec<Complex64> = pencil
        .complex_eigenvalues()
        .iter()
        .copied()
        .filter(|z| z.norm() > 1e-12)
        .collect();
    if z_all.is_empty() {
        return Ok(Vec::new());
    }

    // Residues by linear least squares on the full (decimated) record.
    let m = z_all.len();
    let vand = DMatrix::<Complex64>::from_fn(n, m, |i, j| z_all[j].powu(i as u32));
    let vh = vand.adjoint();
    let normal = &vh * &vand;
    let b = &vh * DVector::from_iterator(n, samples.iter().map(|&v| Complex64::new(v, 0.0)));
    let residues = normal
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Analysis("residue fit is singular".into()))?;

    // Merge conjugate pairs into single reported modes.
    let mut used = vec![false; m];
    let mut modes = Vec::new();
    for i in 0..m {
        if used[i] {
            continue;
        }
        used[i] = true;
        let z = z_all[i];
        let c = residues[i];
        let lam = z.ln() / dt_eff;
        let energy_single: f64 = (0..n).map(|k| (c * z.powu(k as u32)).norm_sqr()).sum();
        if lam.im.abs() < 1e-9 {
            modes.push(PencilMode {
                frequency_hz: 0.0,
                damping: if lam.norm() == 0.0 { 0.0 } else { -lam.re / lam.norm() },
                eigenvalue: Complex64::new(lam.re, 0.0),
                amplitude: c.norm(),
                phase_rad: c.arg(),
                energy: energy_single,
            });
            continue;
        }
        // Closest conjugate partner, if present.
        let mut partner: Option<(usize, f64)> = None;
        for (j, zj) in z_all.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (zj - z.conj()).norm();
            if partner.map_or(true, |(_, bd)| d < bd) {
                partner = Some((j, d));
            }
        }
        let mut energy = energy_single;
        if let Some((j, d)) = partner {
            if d < 1e-6 * z.norm().max(1.0) {
                used[j] = true;
                energy += (0..n)
                    .map(|k| (residues[j] * z_all[j].powu(k as u32)).norm_sqr())
                    .sum::<f64>();
            }
        }
        let lam_pos = Complex64::new(lam.re, lam.im.abs());
        modes.push(PencilMode {
            frequency_hz: lam_pos.im / (2.0 * std::f64::consts::PI),
            damping: -lam_pos.re / lam_pos.norm(),
            eigenvalue: lam_pos,
            amplitude: 2.0 * c.norm(),
            phase_rad: if lam.im >= 0.0 { c.arg() } else { (-c.arg()).rem_euclid(2.0 * std::f64::consts::PI) },
            energy,
        });
    }
    modes.sort_by(|a, b| b.energy.partial_cmp(&a.energy).expect("finite energies"));
    Ok(modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample(f: impl Fn(f64) -> f64, dt: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| f(k as f64 * dt)).collect()
    }

    #[test]
    fn pure_sinusoid_is_one_undamped_mode() {
        let dt = 1e-3;
        let signal = sample(|t| (2.0 * std::f64::consts::PI * 60.0 * t).sin(), dt, 1000);
        let modes = matrix_pencil(&signal, dt, &MatrixPencilOptions::default()).unwrap();
        assert_eq!(modes.len(), 1);
        assert_relative_eq!(modes[0].frequency_hz, 60.0, epsilon = 1e-6);
        assert!(modes[0].damping.abs() < 1e-6);
    }

    #[test]
    fn damped_mode_closed_form() {
        // zeta = 0.5 / sqrt(0.25 + (2 pi 0.44)^2) = 0.17797..., hand derived.
        let dt = 1e-3;
        let signal = sample(
            |t| (-0.5 * t).exp() * (2.0 * std::f64::consts::PI * 0.44 * t).cos(),
            dt,
            5000,
        );
        let opts = MatrixPencilOptions {
            max_samples: Some(500),
            ..Default::default()
        };
        let modes = matrix_pencil(&signal, dt, &opts).unwrap();
        assert_relative_eq!(modes[0].frequency_hz, 0.44, epsilon = 1e-6);
        assert_relative_eq!(modes[0].damping, 0.17797063801370788, epsilon = 1e-6);
    }

    #[test]
    fn two_separated_modes_recovered() {
        let dt = 2e-3;
        let signal = sample(
            |t| {
                1.5 * (-0.3 * t).exp() * (2.0 * std::f64::consts::PI * 0.4 * t).cos()
                    + 0.6 * (-1.2 * t).exp() * (2.0 * std::f64::consts::PI * 1.7 * t + 0.4).cos()
            },
            dt,
            4000,
        );
        let opts = MatrixPencilOptions {
            max_samples: Some(600),
            ..Default::default()
        };
        let modes = matrix_pencil(&signal, dt, &opts).unwrap();
        assert!(modes.len() >= 2);
        assert_relative_eq!(modes[0].frequency_hz, 0.4, max_relative = 1e-3);
        assert_relative_eq!(modes[0].amplitude, 1.5, max_relative = 1e-3);
        assert_relative_eq!(modes[1].frequency_hz, 1.7, max_relative = 1e-3);
        assert_relative_eq!(modes[1].amplitude, 0.6, max_relative = 1e-3);
    }

    #[test]
    fn constant_signal_yields_no_modes() {
        let signal = vec![2.5; 200];
        let modes = matrix_pencil(&signal, 1e-3, &MatrixPencilOptions::default()).unwrap();
        assert!(modes.is_empty());
    }

    #[test]
    fn too_short_signal_is_rejected() {
        assert!(matrix_pencil(&[1.0; 4], 1e-3, &MatrixPencilOptions::default()).is_err());
    }
}
