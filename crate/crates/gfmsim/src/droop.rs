//! Exponential power–frequency droop control for grid-forming inverters,
//! plus the conventional linear droop law and the autonomous power-sharing
//! loop.
//!
//! The frequency command of an exponential-droop device is
//!
//! ```text
//! omega = omega_b * [omega_nom + omega_set(p_set) + d_exp(p) + omega_ps]
//! ```
//!
//! where `d_exp` is an odd, strictly decreasing curve: exponential in |p| up
//! to the linearization power `p_l`, linear with slope `-d_max` beyond it.
//! `omega_set` cancels `d_exp` at the dispatch point so the device holds
//! nominal frequency at `p = p_set`. `omega_ps` is the output of the
//! power-sharing integrator, zero until a disturbance is latched.
//!
//! All powers here are per unit on the device base, in `[-1, 1]` for a
//! storage-backed device. Devices that can only export use
//! [`positive_export_projection`] to map `[0, 1]` onto the full domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the exponential droop law and its power-sharing loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpDroopParams {
    /// Linear scalar of the exponential (dimensionless).
    pub alpha: f64,
    /// Argument scalar of the exponential (dimensionless).
    pub beta: f64,
    /// Maximum tangent droop magnitude (pu freq per pu power).
    pub d_max: f64,
    /// Lower bound enforced on `alpha * beta` (pu/pu).
    pub d_min: f64,
    /// Equitable power-sharing droop (pu/pu).
    pub m_d: f64,
    /// Nominal frequency setpoint (pu, normally 1.0).
    pub omega_nom: f64,
    /// Base angular frequency (rad/s).
    pub omega_b: f64,
    /// Power-sharing integrator gain (1/s).
    pub k: f64,
    /// Disturbance power tolerance (pu).
    pub eps_p: f64,
    /// Power-rate tolerance (pu/s).
    pub eps_dp: f64,
}

impl Default for ExpDroopParams {
    /// The study parameter set: alpha 0.0012, beta 3.2, d_max 6 %, m_d 5 %,
    /// 60 Hz base.
    fn default() -> Self {
        Self {
            alpha: 0.0012,
            beta: 3.2,
            d_max: 0.06,
            d_min: 0.0025,
            m_d: 0.05,
            omega_nom: 1.0,
            omega_b: NOMINAL_OMEGA_60HZ,
            k: 0.2,
            eps_p: 0.01,
            eps_dp: 0.001,
        }
    }
}

/// 2*pi*60 rad/s.
pub const NOMINAL_OMEGA_60HZ: f64 = 120.0 * std::f64::consts::PI;

impl ExpDroopParams {
    /// Checks the parameter domain:
    /// `alpha, beta, d_max, omega_b > 0`, `d_min <= alpha*beta < m_d`, and
    /// `alpha*beta < d_max` so the linearization power is strictly positive.
    pub fn validate(&self) -> Result<()> {
        let ab = self.alpha * self.beta;
        if !(self.alpha > 0.0 && self.beta > 0.0 && self.d_max > 0.0 && self.omega_b > 0.0) {
            return Err(Error::Params(format!(
                "alpha, beta, d_max, omega_b must be positive (got {}, {}, {}, {})",
                self.alpha, self.beta, self.d_max, self.omega_b
            )));
        }
        if !(self.d_min <= ab) {
            return Err(Error::Params(format!(
                "d_min = {} exceeds alpha*beta = {}",
                self.d_min, ab
            )));
        }
        if !(ab < self.m_d) {
            return Err(Error::Params(format!(
                "alpha*beta = {} must be below the sharing droop m_d = {}",
                ab, self.m_d
            )));
        }
        if !(ab < self.d_max) {
            return Err(Error::Params(format!(
                "alpha*beta = {} must be below d_max = {} for a positive linearization power",
                ab, self.d_max
            )));
        }
        if !(self.k >= 0.0 && self.eps_p >= 0.0 && self.eps_dp >= 0.0) {
            return Err(Error::Params(
                "k, eps_p, eps_dp must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Power magnitude at which the tangent droop reaches `d_max` and the
    /// law switches to its linear branch: `ln(d_max / (alpha*beta)) / beta`.
    pub fn p_l(&self) -> Result<f64> {
        let ab = self.alpha * self.beta;
        if !(ab < self.d_max) || ab <= 0.0 {
            return Err(Error::Params(format!(
                "p_l undefined: alpha*beta = {} not in (0, d_max = {})",
                ab, self.d_max
            )));
        }
        Ok((self.d_max / ab).ln() / self.beta)
    }

    /// Frequency deviation `d_exp(p)` (pu). Odd in `p`; exponential branch
    /// for `|p| < p_l`, linear with slope `-d_max` beyond.
    pub fn deviation(&self, p: f64) -> Result<f64> {
        check_power_domain("p", p)?;
        Ok(self.deviation_extended(p))
    }

    /// `d_exp` without the `[-1, 1]` domain check. The linear branch extends
    /// naturally past |p| = 1; dynamic models use this so that transient
    /// filtered-power excursions beyond the rating stay well defined.
    pub fn deviation_extended(&self, p: f64) -> f64 {
        let p_l = (self.d_max / (self.alpha * self.beta)).ln() / self.beta;
        let mag = p.abs();
        let value = if mag < p_l {
            self.alpha * ((self.beta * mag).exp() - 1.0)
        } else {
            self.alpha * ((self.beta * p_l).exp() - 1.0) + self.d_max * (mag - p_l)
        };
        -sign(p) * value
    }

    /// Local slope `d(d_exp)/dp` (pu/pu), strictly negative, continuous at
    /// `|p| = p_l` where both branches evaluate to `-d_max`.
    pub fn tangent_droop(&self, p: f64) -> Result<f64> {
        check_power_domain("p", p)?;
        Ok(self.tangent_droop_extended(p))
    }

    /// Tangent droop without the domain check (see [`Self::deviation_extended`]).
    pub fn tangent_droop_extended(&self, p: f64) -> f64 {
        let ab = self.alpha * self.beta;
        let p_l = (self.d_max / ab).ln() / self.beta;
        if p.abs() < p_l {
            -ab * (self.beta * p.abs()).exp()
        } else {
            -self.d_max
        }
    }

    /// Frequency offset that cancels the droop curve at the dispatch point:
    /// `omega_set(p_set) = -d_exp(p_set)`.
    pub fn setpoint_offset(&self, p_set: f64) -> Result<f64> {
        check_power_domain("p_set", p_set)?;
        Ok(-self.deviation_extended(p_set))
    }

    /// Full frequency command in rad/s:
    /// `omega_b * [omega_nom + omega_set(p_set) + d_exp(p) + omega_ps]`.
    ///
    /// Equals `omega_b * omega_nom` when `p = p_set` and `omega_ps = 0`.
    pub fn frequency_rad(&self, p: f64, p_set: f64, omega_ps: f64) -> Result<f64> {
        check_power_domain("p", p)?;
        check_power_domain("p_set", p_set)?;
        Ok(self.frequency_rad_extended(p, p_set, omega_ps))
    }

    /// Frequency command without the domain checks.
    pub fn frequency_rad_extended(&self, p: f64, p_set: f64, omega_ps: f64) -> f64 {
        self.omega_b
            * (self.omega_nom - self.deviation_extended(p_set)
                + self.deviation_extended(p)
                + omega_ps)
    }
}

/// Projection for positive-export-only devices: maps `p in [0, 1]` to the
/// bidirectional control domain, placing the curve inversion at `p = 0.5`.
pub fn positive_export_projection(p: f64) -> f64 {
    2.0 * p - 1.0
}

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn check_power_domain(what: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value.abs() > 1.0 {
        return Err(Error::Domain {
            what,
            value,
            domain: "[-1, 1]",
        });
    }
    Ok(())
}

/// State of the autonomous power-sharing loop of one device.
///
/// The loop is dormant until a disturbance is latched: the filtered power
/// must depart from the setpoint by more than `eps_p` while its rate of
/// change is below `eps_dp` (transients have settled). Once latched, the
/// integrator `omega_ps' = k * omega_e` stays enabled so chattering at the
/// tolerance boundary cannot stop it; it parks itself as `omega_e -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSharingState {
    /// Accumulated frequency offset (pu).
    pub omega_ps: f64,
    /// Disturbance-detected flag.
    pub latched: bool,
    /// Previous filtered power sample (pu).
    pub last_p: f64,
    /// Smoothed power-rate estimate (pu/s).
    pub dp_dt_est: f64,
}

/// Time constant of the first-order smoothing applied to the backward
/// difference used for the |dp/dt| disturbance criterion.
pub const DP_DT_FILTER_TAU_S: f64 = 0.1;

impl PowerSharingState {
    /// Fresh state at the operating point `p0`; no disturbance seen.
    pub fn new(p0: f64) -> Self {
        Self {
            omega_ps: 0.0,
            latched: false,
            last_p: p0,
            dp_dt_est: 0.0,
        }
    }

    /// Sharing error `omega_e = omega_md - d_exp(p) - omega_ps`, whose zero
    /// places the device on the equitable `m_d` droop line. `omega_md` is
    /// the deviation a linear droop would produce, `(p_set - p) * m_d`.
    pub fn sharing_error(&self, p: f64, p_set: f64, params: &ExpDroopParams) -> f64 {
        let omega_md = (p_set - p) * params.m_d;
        omega_md - params.deviation_extended(p) - self.omega_ps
    }

    /// Advances the loop by one sample of the filtered power.
    ///
    /// Updates the dp/dt estimate, evaluates the disturbance gate, latches
    /// when it first passes, and integrates `omega_ps` while latched.
    /// Returns the gated error that was integrated.
    pub fn step(&mut self, p: f64, p_set: f64, dt: f64, params: &ExpDroopParams) -> f64 {
        debug_assert!(dt > 0.0);
        let dp_raw = (p - self.last_p) / dt;
        self.last_p = p;
        let blend = (dt / DP_DT_FILTER_TAU_S).min(1.0);
        self.dp_dt_est += blend * (dp_raw - self.dp_dt_est);

        if !self.latched {
            let disturbed = (p_set - p).abs() > params.eps_p;
            let settled = self.dp_dt_est.abs() < params.eps_dp;
            if disturbed && settled {
                self.latched = true;
            }
        }
        if !self.latched {
            return 0.0;
        }
        let omega_e = self.sharing_error(p, p_set, params);
        self.omega_ps += params.k * omega_e * dt;
        omega_e
    }
}

/// Conventional linear droop law, kept for comparison runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearDroopParams {
    /// Droop gain (pu/pu).
    pub m_d: f64,
    /// Power-measurement cutoff (rad/s).
    pub omega_fil: f64,
    /// Frequency setpoint (pu).
    pub omega_set: f64,
}

impl Default for LinearDroopParams {
    fn default() -> Self {
        Self {
            m_d: 0.05,
            omega_fil: 1.0 / 0.0167,
            omega_set: 1.0,
        }
    }
}

impl LinearDroopParams {
    /// A zero droop gain makes the law ill-posed (infinite power response).
    pub fn validate(&self) -> Result<()> {
        if !(self.m_d > 0.0) {
            return Err(Error::Params(format!(
                "linear droop gain must be positive, got {}",
                self.m_d
            )));
        }
        Ok(())
    }

    /// Per-unit frequency command `m_d * (p_set - p) + omega_set`; callers
    /// scale by their base to rad/s.
    pub fn frequency_pu(&self, p: f64, p_set: f64) -> f64 {
        self.m_d * (p_set - p) + self.omega_set
    }
}
