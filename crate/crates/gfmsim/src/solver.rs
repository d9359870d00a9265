//! Implicit trapezoidal integration with a quasi-Newton corrector.
//!
//! The stepper works on any system exposing its state derivative through
//! [`DerivativeSystem`]; the grid simulator implements it by solving the
//! network algebraically inside every evaluation, which makes one step here
//! a full DAE step. The corrector Jacobian `I - dt/2 * df/dx` is built by
//! finite differences and reused across steps until Newton convergence
//! degrades, since consecutive steps see nearly identical dynamics.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A system `dx/dt = f(t, x)`; evaluation may mutate internal caches.
pub trait DerivativeSystem {
    fn dim(&self) -> usize;
    fn derivatives(&mut self, t: f64, x: &DVector<f64>, out: &mut DVector<f64>) -> Result<()>;
}

/// Newton tolerance on the trapezoidal residual (infinity norm).
pub const STEP_TOLERANCE: f64 = 1e-10;
const MAX_NEWTON_ITER: usize = 25;
/// Iteration count beyond which the cached Jacobian is considered stale.
const REFRESH_AFTER_ITER: usize = 6;
/// Relative perturbation floor for the finite-difference Jacobian.
const FD_EPS: f64 = 1e-7;

/// Reusable stepper state: the factorized corrector matrix and scratch
/// vectors.
pub struct TrapezoidalStepper {
    lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    lu_dt: f64,
    scratch: DVector<f64>,
    pub factorizations: usize,
}

impl TrapezoidalStepper {
    pub fn new(dim: usize) -> Self {
        Self {
            lu: None,
            lu_dt: 0.0,
            scratch: DVector::zeros(dim),
            factorizations: 0,
        }
    }

    /// Drops the cached factorization (event applied, topology changed).
    pub fn invalidate(&mut self) {
        self.lu = None;
    }

    fn refresh<S: DerivativeSystem>(
        &mut self,
        sys: &mut S,
        t: f64,
        x: &DVector<f64>,
        dt: f64,
    ) -> Result<()> {
        let n = sys.dim();
        let mut jac = DMatrix::<f64>::zeros(n, n);
        let mut x_pert = x.clone();
        let mut f_plus = DVector::zeros(n);
        let mut f_minus = DVector::zeros(n);
        for j in 0..n {
            let h = FD_EPS * x[j].abs().max(1.0);
            x_pert[j] = x[j] + h;
            sys.derivatives(t, &x_pert, &mut f_plus)?;
            x_pert[j] = x[j] - h;
            sys.derivatives(t, &x_pert, &mut f_minus)?;
            x_pert[j] = x[j];
            for i in 0..n {
                jac[(i, j)] = (f_plus[i] - f_minus[i]) / (2.0 * h);
            }
        }
        // Corrector matrix I - dt/2 J.
        let mut m = DMatrix::<f64>::identity(n, n);
        m -= jac * (dt / 2.0);
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::Step {
                t,
                detail: "singular trapezoidal corrector matrix".into(),
            });
        }
        self.lu = Some(lu);
        self.lu_dt = dt;
        self.factorizations += 1;
        Ok(())
    }

    /// Advances `x` from `t` to `t + dt`, returning the new state.
    ///
    /// Solves `x1 - x0 - dt/2 (f(t, x0) + f(t+dt, x1)) = 0` by Newton
    /// iteration with the cached corrector.
    pub fn step<S: DerivativeSystem>(
        &mut self,
        sys: &mut S,
        t: f64,
        x0: &DVector<f64>,
        dt: f64,
    ) -> Result<DVector<f64>> {
        let n = sys.dim();
        let mut f0 = DVector::zeros(n);
        sys.derivatives(t, x0, &mut f0)?;
        // Explicit predictor.
        let mut x1 = x0 + &f0 * dt;
        let mut refreshed_this_step = false;
        if self.lu.is_none() || self.lu_dt != dt {
            self.refresh(sys, t, x0, dt)?;
            refreshed_this_step = true;
        }
        for iter in 0..MAX_NEWTON_ITER {
            sys.derivatives(t + dt, &x1, &mut self.scratch)?;
            let residual = &x1 - x0 - (&f0 + &self.scratch) * (dt / 2.0);
            let res_norm = residual.amax();
            if res_norm < STEP_TOLERANCE {
                return Ok(x1);
            }
            if iter >= REFRESH_AFTER_ITER && !refreshed_this_step {
                self.refresh(sys, t + dt, &x1, dt)?;
                refreshed_this_step = true;
            }
            let lu = self.lu.as_ref().expect("corrector factorized");
            let delta = lu.solve(&residual).ok_or_else(|| Error::Step {
                t,
                detail: "corrector solve failed".into(),
            })?;
            x1 -= delta;
            if !x1.iter().all(|v| v.is_finite()) {
                return Err(Error::Step {
                    t,
                    detail: "state diverged to non-finite values".into(),
                });
            }
        }
        Err(Error::Step {
            t,
            detail: format!("Newton did not converge in {MAX_NEWTON_ITER} iterations"),
        })
    }
}
