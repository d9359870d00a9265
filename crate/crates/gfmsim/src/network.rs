//! Static network model, steady-state power flow, and the per-step
//! algebraic solution of bus voltages.
//!
//! Two solvers live here:
//!
//! * [`power_flow`] — conventional Newton-Raphson in polar coordinates with
//!   slack/PV/PQ bus types, used once to establish the operating point.
//! * [`NetworkSolver`] — the algebraic half of the DAE. Given frozen device
//!   states (expressed as [`Injector`]s) it solves Kirchhoff's current law
//!   in rectangular coordinates with an analytic Jacobian. The factorization
//!   is cached across calls and rebuilt only when convergence stalls, since
//!   consecutive integrator steps move the solution very little.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bus role in the steady-state power flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusKind {
    Slack,
    Pv,
    Pq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    pub kind: BusKind,
    /// Voltage magnitude setpoint (pu); honored for slack and PV buses.
    pub v_setpoint: f64,
    /// Constant-power load (pu network base).
    pub load_p: f64,
    pub load_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    /// Total line-charging susceptance (pu), split half per end.
    pub b: f64,
    /// Off-nominal tap ratio on the from side (1.0 for lines).
    pub tap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    /// System MVA base.
    pub s_base: f64,
    /// Voltage base (kV), informational.
    pub v_base: f64,
}

impl Network {
    pub fn bus_index(&self, id: &str) -> Result<usize> {
        self.buses
            .iter()
            .position(|b| b.id == id)
            .ok_or_else(|| Error::UnknownRef {
                kind: "bus",
                name: id.to_string(),
            })
    }

    /// Structural checks: unique ids, in-range branch endpoints, nonzero
    /// impedances, one connected component.
    pub fn validate(&self) -> Result<()> {
        let n = self.buses.len();
        if n == 0 {
            return Err(Error::Case("network has no buses".into()));
        }
        for (i, bus) in self.buses.iter().enumerate() {
            if self.buses[..i].iter().any(|other| other.id == bus.id) {
                return Err(Error::Case(format!("duplicate bus id '{}'", bus.id)));
            }
        }
        for br in &self.branches {
            if br.from >= n || br.to >= n {
                return Err(Error::Case("branch endpoint out of range".into()));
            }
            if br.r == 0.0 && br.x == 0.0 {
                return Err(Error::Case(format!(
                    "zero-impedance branch {} - {}",
                    self.buses[br.from].id, self.buses[br.to].id
                )));
            }
            if !(br.tap > 0.0) {
                return Err(Error::Case("branch tap ratio must be positive".into()));
            }
        }
        // Connectivity by breadth-first search.
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for br in &self.branches {
                for (a, b) in [(br.from, br.to), (br.to, br.from)] {
                    if a == i && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Case("network graph is not connected".into()));
        }
        Ok(())
    }
}

/// Assembles the complex bus admittance matrix.
pub fn build_ybus(network: &Network) -> Result<DMatrix<Complex64>> {
    network.validate()?;
    let n = network.buses.len();
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for br in &network.branches {
        let series = 1.0 / Complex64::new(br.r, br.x);
        let shunt = Complex64::new(0.0, br.b / 2.0);
        let t = br.tap;
        y[(br.from, br.from)] += (series + shunt) / (t * t);
        y[(br.to, br.to)] += series + shunt;
        y[(br.from, br.to)] -= series / t;
        y[(br.to, br.from)] -= series / t;
    }
    Ok(y)
}

/// Net scheduled device injection at one bus (network pu), before loads.
#[derive(Debug, Clone, Copy, Default)]
pub struct BusSchedule {
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone)]
pub struct PowerFlowSolution {
    /// Complex voltage per bus (pu).
    pub v: Vec<Complex64>,
    /// Net device apparent power per bus (pu): scheduled for PQ buses,
    /// reactive solved for PV, both solved for the slack.
    pub s_device: Vec<Complex64>,
    /// Final worst-case mismatch (pu).
    pub mismatch: f64,
    pub iterations: usize,
}

const PF_TOLERANCE: f64 = 1e-10;
const PF_MAX_ITER: usize = 40;

/// Newton-Raphson power flow in polar coordinates.
///
/// `schedules[i]` carries the total device P (PV/PQ) and Q (PQ) at bus `i`;
/// bus loads come from the network itself. Exactly one slack bus is required.
pub fn power_flow(network: &Network, schedules: &[BusSchedule]) -> Result<PowerFlowSolution> {
    let n = network.buses.len();
    if schedules.len() != n {
        return Err(Error::Case("schedule length does not match bus count".into()));
    }
    let slack_count = network
        .buses
        .iter()
        .filter(|b| b.kind == BusKind::Slack)
        .count();
    if slack_count != 1 {
        return Err(Error::Case(format!(
            "power flow needs exactly one slack bus, found {slack_count}"
        )));
    }
    let ybus = build_ybus(network)?;

    let mut vm: Vec<f64> = network
        .buses
        .iter()
        .map(|b| match b.kind {
            BusKind::Slack | BusKind::Pv => b.v_setpoint,
            BusKind::Pq => 1.0,
        })
        .collect();
    let mut va = vec![0.0f64; n];

    // Net scheduled injection (devices minus load).
    let p_sched: Vec<f64> = (0..n)
        .map(|i| schedules[i].p - network.buses[i].load_p)
        .collect();
    let q_sched: Vec<f64> = (0..n)
        .map(|i| schedules[i].q - network.buses[i].load_q)
        .collect();

    let ang_idx: Vec<usize> = (0..n)
        .filter(|&i| network.buses[i].kind != BusKind::Slack)
        .collect();
    let mag_idx: Vec<usize> = (0..n)
        .filter(|&i| network.buses[i].kind == BusKind::Pq)
        .collect();
    let m = ang_idx.len() + mag_idx.len();

    let calc_pq = |vm: &[f64], va: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                let y = ybus[(i, j)];
                if y == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let th = va[i] - va[j];
                p[i] += vm[i] * vm[j] * (y.re * th.cos() + y.im * th.sin());
                q[i] += vm[i] * vm[j] * (y.re * th.sin() - y.im * th.cos());
            }
        }
        (p, q)
    };

    let mut mismatch = f64::INFINITY;
    let mut iterations = 0;
    for iter in 0..=PF_MAX_ITER {
        let (p_calc, q_calc) = calc_pq(&vm, &va);
        let mut rhs = DVector::<f64>::zeros(m);
        for (r, &i) in ang_idx.iter().enumerate() {
            rhs[r] = p_sched[i] - p_calc[i];
        }
        for (r, &i) in mag_idx.iter().enumerate() {
            rhs[ang_idx.len() + r] = q_sched[i] - q_calc[i];
        }
        mismatch = rhs.amax();
        iterations = iter;
        if mismatch < PF_TOLERANCE {
            break;
        }
        if iter == PF_MAX_ITER {
            return Err(Error::PowerFlow {
                iters: iter,
                mismatch,
            });
        }

        let jac = power_flow_jacobian(&ybus, &vm, &va, &p_calc, &q_calc, &ang_idx, &mag_idx);
        let delta = jac.lu().solve(&rhs).ok_or(Error::PowerFlow {
            iters: iter,
            mismatch,
        })?;
        for (r, &i) in ang_idx.iter().enumerate() {
            va[i] += delta[r];
        }
        for (r, &i) in mag_idx.iter().enumerate() {
            vm[i] += delta[ang_idx.len() + r];
        }
    }

    let (p_calc, q_calc) = calc_pq(&vm, &va);
    let v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(vm[i], va[i]))
        .collect();
    let s_device: Vec<Complex64> = (0..n)
        .map(|i| match network.buses[i].kind {
            BusKind::Slack => Complex64::new(
                p_calc[i] + network.buses[i].load_p,
                q_calc[i] + network.buses[i].load_q,
            ),
            BusKind::Pv => Complex64::new(
                schedules[i].p,
                q_calc[i] + network.buses[i].load_q,
            ),
            BusKind::Pq => Complex64::new(schedules[i].p, schedules[i].q),
        })
        .collect();
    Ok(PowerFlowSolution {
        v,
        s_device,
        mismatch,
        iterations,
    })
}

/// Standard polar power-flow Jacobian
/// `[dP/dtheta dP/dV; dQ/dtheta dQ/dV]` over the reduced variable set.
fn power_flow_jacobian(
    ybus: &DMatrix<Complex64>,
    vm: &[f64],
    va: &[f64],
    p_calc: &[f64],
    q_calc: &[f64],
    ang_idx: &[usize],
    mag_idx: &[usize],
) -> DMatrix<f64> {
    let na = ang_idx.len();
    let m = na + mag_idx.len();
    let mut jac = DMatrix::<f64>::zeros(m, m);
    let term = |i: usize, j: usize| -> (f64, f64) {
        let y = ybus[(i, j)];
        let th = va[i] - va[j];
        (
            y.re * th.cos() + y.im * th.sin(),
            y.re * th.sin() - y.im * th.cos(),
        )
    };
    for (r, &i) in ang_idx.iter().enumerate() {
        for (c, &j) in ang_idx.iter().enumerate() {
            jac[(r, c)] = if i == j {
                -q_calc[i] - ybus[(i, i)].im * vm[i] * vm[i]
            } else {
                let (_, s) = term(i, j);
                vm[i] * vm[j] * s
            };
        }
        for (c, &j) in mag_idx.iter().enumerate() {
            jac[(r, na + c)] = if i == j {
                p_calc[i] / vm[i] + ybus[(i, i)].re * vm[i]
            } else {
                let (c_t, _) = term(i, j);
                vm[i] * c_t
            };
        }
    }
    for (r, &i) in mag_idx.iter().enumerate() {
        for (c, &j) in ang_idx.iter().enumerate() {
            jac[(na + r, c)] = if i == j {
                p_calc[i] - ybus[(i, i)].re * vm[i] * vm[i]
            } else {
                let (c_t, _) = term(i, j);
                -vm[i] * vm[j] * c_t
            };
        }
        for (c, &j) in mag_idx.iter().enumerate() {
            jac[(na + r, na + c)] = if i == j {
                q_calc[i] / vm[i] - ybus[(i, i)].im * vm[i]
            } else {
                let (_, s) = term(i, j);
                vm[i] * s
            };
        }
    }
    jac
}

/// One current source seen by the algebraic network solve.
#[derive(Debug, Clone, Copy)]
pub enum Injector {
    /// Fixed EMF behind an impedance; `scale` converts the device-base
    /// current to the network base.
    VoltageBehindImpedance {
        bus: usize,
        emf: Complex64,
        z: Complex64,
        scale: f64,
    },
    /// Two-axis machine stator with frozen rotor quantities.
    TwoAxisStator {
        bus: usize,
        delta: f64,
        e_q_p: f64,
        e_d_p: f64,
        x_d_p: f64,
        x_q_p: f64,
        scale: f64,
    },
    /// Constant-power draw (positive `s` consumes power).
    ConstantPower { bus: usize, s: Complex64 },
    /// Pins the bus voltage (stiff source); replaces that bus's KCL rows.
    FixedVoltage { bus: usize, v: Complex64 },
}

impl Injector {
    fn bus(&self) -> usize {
        match *self {
            Injector::VoltageBehindImpedance { bus, .. }
            | Injector::TwoAxisStator { bus, .. }
            | Injector::ConstantPower { bus, .. }
            | Injector::FixedVoltage { bus, .. } => bus,
        }
    }

    /// Injected current at the present voltage (network base).
    pub fn current(&self, v: Complex64) -> Complex64 {
        match *self {
            Injector::VoltageBehindImpedance { emf, z, scale, .. } => (emf - v) / z * scale,
            Injector::TwoAxisStator {
                delta,
                e_q_p,
                e_d_p,
                x_d_p,
                x_q_p,
                scale,
                ..
            } => {
                let w = Complex64::from_polar(1.0, delta - std::f64::consts::FRAC_PI_2);
                let v_dq = v * w.conj();
                let i_d = (e_q_p - v_dq.im) / x_d_p;
                let i_q = (v_dq.re - e_d_p) / x_q_p;
                Complex64::new(i_d, i_q) * w * scale
            }
            Injector::ConstantPower { s, .. } => -(s / v).conj(),
            Injector::FixedVoltage { .. } => Complex64::new(0.0, 0.0),
        }
    }

    /// Real 2x2 block d(current)/d(V_re, V_im).
    fn current_jacobian(&self, v: Complex64) -> [[f64; 2]; 2] {
        // A complex-linear coefficient c (dI = c dV) maps to
        // [[Re c, -Im c], [Im c, Re c]]; a conjugate-linear coefficient d
        // (dI = d d(conj V)) maps to [[Re d, Im d], [Im d, -Re d]].
        match *self {
            Injector::VoltageBehindImpedance { z, scale, .. } => {
                let c = -scale / z;
                [[c.re, -c.im], [c.im, c.re]]
            }
            Injector::TwoAxisStator {
                delta,
                x_d_p,
                x_q_p,
                scale,
                ..
            } => {
                let w = Complex64::from_polar(1.0, delta - std::f64::consts::FRAC_PI_2);
                // I = [(e_q_p - v_q)/x_d_p + j (v_d - e_d_p)/x_q_p] w with
                // v_d + j v_q = V conj(w).
                let di_dvd = Complex64::new(0.0, 1.0 / x_q_p) * w * scale;
                let di_dvq = Complex64::new(-1.0 / x_d_p, 0.0) * w * scale;
                let dvd = [w.re, w.im]; // d v_d / d(V_re, V_im)
                let dvq = [-w.im, w.re]; // d v_q / d(V_re, V_im)
                let col = |k: usize| di_dvd * dvd[k] + di_dvq * dvq[k];
                let c0 = col(0);
                let c1 = col(1);
                [[c0.re, c1.re], [c0.im, c1.im]]
            }
            Injector::ConstantPower { s, .. } => {
                let d = s.conj() / (v.conj() * v.conj());
                [[d.re, d.im], [d.im, -d.re]]
            }
            Injector::FixedVoltage { .. } => [[0.0; 2]; 2],
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    pub iterations: usize,
    pub factorizations: usize,
    pub residual: f64,
}

/// Algebraic solver with a cached Jacobian factorization.
pub struct NetworkSolver {
    ybus: DMatrix<Complex64>,
    cached: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    pub stats: SolveStats,
}

impl NetworkSolver {
    pub fn new(ybus: DMatrix<Complex64>) -> Self {
        Self {
            ybus,
            cached: None,
            stats: SolveStats::default(),
        }
    }

    pub fn ybus(&self) -> &DMatrix<Complex64> {
        &self.ybus
    }

    /// Drops the cached factorization (topology or operating point changed).
    pub fn invalidate(&mut self) {
        self.cached = None;
    }

    fn residual(&self, injectors: &[Injector], v: &[Complex64], out: &mut DVector<f64>) {
        let n = self.ybus.nrows();
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let y = self.ybus[(i, j)];
                if y != Complex64::new(0.0, 0.0) {
                    acc += y * v[j];
                }
            }
            f[i] = acc;
        }
        for inj in injectors {
            if !matches!(inj, Injector::FixedVoltage { .. }) {
                f[inj.bus()] -= inj.current(v[inj.bus()]);
            }
        }
        for inj in injectors {
            if let Injector::FixedVoltage { bus, v: pin } = *inj {
                f[bus] = v[bus] - pin;
            }
        }
        for i in 0..n {
            out[2 * i] = f[i].re;
            out[2 * i + 1] = f[i].im;
        }
    }

    fn jacobian(&self, injectors: &[Injector], v: &[Complex64]) -> DMatrix<f64> {
        let n = self.ybus.nrows();
        let mut jac = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let y = self.ybus[(i, j)];
                if y == Complex64::new(0.0, 0.0) {
                    continue;
                }
                jac[(2 * i, 2 * j)] = y.re;
                jac[(2 * i, 2 * j + 1)] = -y.im;
                jac[(2 * i + 1, 2 * j)] = y.im;
                jac[(2 * i + 1, 2 * j + 1)] = y.re;
            }
        }
        for inj in injectors {
            if matches!(inj, Injector::FixedVoltage { .. }) {
                continue;
            }
            let bus = inj.bus();
            let block = inj.current_jacobian(v[bus]);
            jac[(2 * bus, 2 * bus)] -= block[0][0];
            jac[(2 * bus, 2 * bus + 1)] -= block[0][1];
            jac[(2 * bus + 1, 2 * bus)] -= block[1][0];
            jac[(2 * bus + 1, 2 * bus + 1)] -= block[1][1];
        }
        for inj in injectors {
            if let Injector::FixedVoltage { bus, .. } = *inj {
                for c in 0..2 * n {
                    jac[(2 * bus, c)] = 0.0;
                    jac[(2 * bus + 1, c)] = 0.0;
                }
                jac[(2 * bus, 2 * bus)] = 1.0;
                jac[(2 * bus + 1, 2 * bus + 1)] = 1.0;
            }
        }
        jac
    }

    /// Solves KCL for the bus voltages, warm-starting from `v`.
    ///
    /// The cached factorization is reused until the iteration stalls
    /// (residual shrinking by less than 10x per sweep), then rebuilt at the
    /// current iterate.
    pub fn solve(
        &mut self,
        injectors: &[Injector],
        v: &mut [Complex64],
        tol: f64,
        max_iter: usize,
    ) -> Result<SolveStats> {
        let n = self.ybus.nrows();
        let mut r = DVector::<f64>::zeros(2 * n);
        let mut stats = SolveStats::default();
        self.residual(injectors, v, &mut r);
        let mut res = r.amax();
        let mut prev = f64::INFINITY;
        while res > tol {
            if stats.iterations >= max_iter {
                self.cached = None;
                return Err(Error::NetworkSolve {
                    t: f64::NAN,
                    detail: format!(
                        "no convergence after {max_iter} iterations (residual {res:.3e})"
                    ),
                });
            }
            let stalled = res > 0.1 * prev;
            if self.cached.is_none() || (stalled && stats.iterations > 0) {
                let jac = self.jacobian(injectors, v);
                let lu = jac.lu();
                if lu.is_invertible() {
                    self.cached = Some(lu);
                    stats.factorizations += 1;
                } else if self.cached.is_none() {
                    return Err(Error::NetworkSolve {
                        t: f64::NAN,
                        detail: "singular network Jacobian".into(),
                    });
                }
            }
            let lu = self.cached.as_ref().expect("factorization present");
            let delta = lu.solve(&(-&r)).ok_or_else(|| Error::NetworkSolve {
                t: f64::NAN,
                detail: "factorization solve failed".into(),
            })?;
            for i in 0..n {
                v[i] += Complex64::new(delta[2 * i], delta[2 * i + 1]);
            }
            prev = res;
            self.residual(injectors, v, &mut r);
            res = r.amax();
            stats.iterations += 1;
            if !res.is_finite() {
                self.cached = None;
                return Err(Error::NetworkSolve {
                    t: f64::NAN,
                    detail: "residual diverged to non-finite values".into(),
                });
            }
        }
        stats.residual = res;
        self.stats.iterations += stats.iterations;
        self.stats.factorizations += stats.factorizations;
        self.stats.residual = res;
        Ok(stats)
    }
}
