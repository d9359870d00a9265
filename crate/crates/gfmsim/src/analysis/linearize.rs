//! Numerical linearization to the state matrix, eigen-decomposition with
//! participation factors, and the dispatch sweep.
//!
//! The algebraic network variables never appear in the state matrix: each
//! perturbed derivative evaluation re-solves the network, so the central
//! differences act on the reduced map and `A` already contains the
//! eliminated algebraic sensitivities.
//!
//! One structural mode comes with the territory: shifting every device
//! angle together rigidly rotates the network solution and changes
//! nothing, so `A` always owns one eigenvalue at the origin. It is flagged
//! as the reference mode and excluded from stability verdicts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::simulator::{build_system, GridSystem, Scenario};
use crate::solver::DerivativeSystem;

/// Dense linearized system `d(dx)/dt = A dx` with labeling metadata.
#[derive(Debug, Clone)]
pub struct StateMatrix {
    pub a: DMatrix<f64>,
    /// One label per state, `device.state` in device order.
    pub labels: Vec<String>,
    /// True for states belonging to grid-forming devices.
    pub gfm_states: Vec<bool>,
    /// Operating-point descriptor.
    pub operating_point: String,
}

/// Equilibrium residual bound required before linearizing.
const EQUILIBRIUM_BOUND: f64 = 1e-8;
/// Network tolerance while linearizing; evaluations must be much more
/// accurate than the difference quotient resolves.
const NET_TOL_LINEARIZE: f64 = 1e-13;
/// Default state perturbation.
pub const DEFAULT_PERTURBATION: f64 = 1e-6;

/// A modal participation above this marks a state as involved in a mode.
pub const GFM_PARTICIPATION_THRESHOLD: f64 = 0.1;
/// Eigenvalues this close to the origin are the angle-reference mode.
pub const REFERENCE_MODE_MAGNITUDE: f64 = 1e-6;

/// Central-difference linearization of the reduced derivative map around
/// an equilibrium.
pub fn linearize(
    system: &mut GridSystem,
    x_eq: &DVector<f64>,
    perturbation: f64,
    operating_point: String,
) -> Result<StateMatrix> {
    let n = system.dim();
    let mut f = DVector::zeros(n);
    let saved_tol = system.net_tol;
    let saved_mode = system.exact_mode;
    system.net_tol = NET_TOL_LINEARIZE;
    system.exact_mode = true;

    let result = (|| -> Result<DMatrix<f64>> {
        system.derivatives(0.0, x_eq, &mut f)?;
        let residual = f.amax();
        if residual > EQUILIBRIUM_BOUND {
            return Err(Error::Analysis(format!(
                "operating point is not an equilibrium (residual {residual:.3e})"
            )));
        }
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut x = x_eq.clone();
        let mut f_plus = DVector::zeros(n);
        let mut f_minus = DVector::zeros(n);
        for j in 0..n {
            let h = perturbation * x_eq[j].abs().max(1.0);
            x[j] = x_eq[j] + h;
            system.derivatives(0.0, &x, &mut f_plus)?;
            x[j] = x_eq[j] - h;
            system.derivatives(0.0, &x, &mut f_minus)?;
            x[j] = x_eq[j];
            for i in 0..n {
                a[(i, j)] = (f_plus[i] - f_minus[i]) / (2.0 * h);
            }
        }
        Ok(a)
    })();

    system.net_tol = saved_tol;
    system.exact_mode = saved_mode;
    let a = result?;

    let gfm_states = system
        .devices
        .iter()
        .flat_map(|d| std::iter::repeat(d.is_gfm()).take(d.n_states()))
        .collect();
    Ok(StateMatrix {
        a,
        labels: system.state_labels(),
        gfm_states,
        operating_point,
    })
}

/// Builds the scenario's equilibrium and linearizes there.
pub fn linearize_scenario(scenario: &Scenario, perturbation: f64) -> Result<StateMatrix> {
    let built = build_system(scenario)?;
    let mut system = built.system;
    linearize(
        &mut system,
        &built.x0,
        perturbation,
        format!("case '{}' base dispatch", scenario.name),
    )
}

/// How an eigenvalue participates in the spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Real,
    /// Member of a complex-conjugate pair (the report keeps both members).
    Oscillatory,
    /// The structural angle-reference mode at the origin.
    Reference,
}

/// Eigenvalues, damping ratios, and normalized participation factors.
#[derive(Debug, Clone)]
pub struct ModalReport {
    /// All eigenvalues, closed under conjugation, sorted by frequency then
    /// real part.
    pub eigenvalues: Vec<Complex64>,
    /// Right eigenvectors, one column per eigenvalue (same order).
    pub right_vectors: Vec<DVector<Complex64>>,
    /// Participation magnitudes, column `i` for eigenvalue `i`, each column
    /// scaled to unit maximum.
    pub participation: DMatrix<f64>,
    pub labels: Vec<String>,
    pub gfm_states: Vec<bool>,
    kinds: Vec<ModeKind>,
}

impl ModalReport {
    pub fn damping(&self, i: usize) -> f64 {
        let lam = self.eigenvalues[i];
        let mag = lam.norm();
        if mag == 0.0 {
            0.0
        } else {
            -lam.re / mag
        }
    }

    pub fn frequency_hz(&self, i: usize) -> f64 {
        self.eigenvalues[i].im.abs() / (2.0 * std::f64::consts::PI)
    }

    pub fn kind(&self, i: usize) -> ModeKind {
        self.kinds[i]
    }

    /// Largest participation of any grid-forming state in mode `i`.
    pub fn gfm_participation(&self, i: usize) -> f64 {
        self.gfm_states
            .iter()
            .enumerate()
            .filter(|(_, is_gfm)| **is_gfm)
            .map(|(k, _)| self.participation[(k, i)])
            .fold(0.0, f64::max)
    }

    /// Largest participation of any synchronous-machine state in mode `i`.
    pub fn sg_participation(&self, i: usize) -> f64 {
        self.gfm_states
            .iter()
            .enumerate()
            .filter(|(_, is_gfm)| !**is_gfm)
            .map(|(k, _)| self.participation[(k, i)])
            .fold(0.0, f64::max)
    }

    /// States participating above the classification threshold, strongest
    /// first.
    pub fn dominant_states(&self, i: usize, limit: usize) -> Vec<&str> {
        let mut idx: Vec<usize> = (0..self.labels.len()).collect();
        idx.sort_by(|&a, &b| {
            self.participation[(b, i)]
                .partial_cmp(&self.participation[(a, i)])
                .expect("finite participation")
        });
        idx.into_iter()
            .take(limit)
            .filter(|&k| self.participation[(k, i)] > GFM_PARTICIPATION_THRESHOLD)
            .map(|k| self.labels[k].as_str())
            .collect()
    }
}

/// Full eigen-decomposition of a state matrix with right/left eigenvector
/// participation factors.
pub fn eigen_report(sm: &StateMatrix) -> Result<ModalReport> {
    let n = sm.a.nrows();
    if n == 0 || sm.a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Analysis("state matrix must be finite and non-empty".into()));
    }
    let mut eigenvalues: Vec<Complex64> = sm.a.clone().complex_eigenvalues().iter().copied().collect();

    // Clean tiny imaginary parts and enforce exact conjugate closure.
    let scale = eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max).max(1.0);
    for lam in eigenvalues.iter_mut() {
        if lam.im.abs() < 1e-9 * scale {
            lam.im = 0.0;
        }
    }
    let mut paired: Vec<Complex64> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        used[i] = true;
        let li = eigenvalues[i];
        if li.im == 0.0 {
            paired.push(li);
            continue;
        }
        // Find the closest conjugate partner and symmetrize the pair.
        let mut best: Option<(usize, f64)> = None;
        for (j, lj) in eigenvalues.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (lj - li.conj()).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.ok_or_else(|| {
            Error::Analysis("complex eigenvalue without conjugate partner".into())
        })?;
        if d > 1e-6 * scale {
            return Err(Error::Analysis(format!(
                "eigenvalue {li} has no conjugate partner within tolerance (closest {d:.3e})"
            )));
        }
        used[j] = true;
        let sym = (li + eigenvalues[j].conj()) / 2.0;
        paired.push(Complex64::new(sym.re, sym.im.abs()));
        paired.push(Complex64::new(sym.re, -sym.im.abs()));
    }
    paired.sort_by(|a, b| {
        (a.im.abs(), a.re, -a.im)
            .partial_cmp(&(b.im.abs(), b.re, -b.im))
            .expect("finite eigenvalues")
    });

    let a_c = sm.a.map(|v| Complex64::new(v, 0.0));
    let a_t = a_c.transpose();
    let mut right_vectors = Vec::with_capacity(n);
    let mut participation = DMatrix::<f64>::zeros(n, n);
    for (i, lam) in paired.iter().enumerate() {
        let v = null_vector(&a_c, *lam)?;
        let w = null_vector(&a_t, *lam)?;
        for k in 0..n {
            participation[(k, i)] = (v[k] * w[k]).norm();
        }
        let max = participation.column(i).amax();
        if max > 0.0 {
            for k in 0..n {
                participation[(k, i)] /= max;
            }
        }
        right_vectors.push(v);
    }

    let kinds: Vec<ModeKind> = paired
        .iter()
        .map(|lam| {
            if lam.norm() < REFERENCE_MODE_MAGNITUDE {
                ModeKind::Reference
            } else if lam.im == 0.0 {
                ModeKind::Real
            } else {
                ModeKind::Oscillatory
            }
        })
        .collect();

    Ok(ModalReport {
        eigenvalues: paired,
        right_vectors,
        participation,
        labels: sm.labels.clone(),
        gfm_states: sm.gfm_states.clone(),
        kinds,
    })
}

/// Eigenvector of `a` for eigenvalue `lam` via the null space of
/// `a - lam I` (smallest singular direction).
fn null_vector(a: &DMatrix<Complex64>, lam: Complex64) -> Result<DVector<Complex64>> {
    let n = a.nrows();
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] -= lam;
    }
    let svd = shifted.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Analysis("SVD failed to produce singular vectors".into()))?;
    let v = v_t.row(n - 1).adjoint();
    Ok(DVector::from_iterator(n, v.iter().copied()))
}

/// One converged sweep sample.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// Inverter dispatch (pu on its own base).
    pub p_set: f64,
    pub report: ModalReport,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Grid values skipped because no equilibrium could be built, with the
    /// reason.
    pub skipped: Vec<(f64, String)>,
}

/// Linearizes the scenario across a grid of dispatch setpoints for one
/// grid-forming device. Points are independent and evaluated in parallel;
/// the result order follows the grid.
pub fn dispatch_sweep(scenario: &Scenario, device: &str, grid: &[f64]) -> Result<SweepResult> {
    let dev_idx = scenario.device_index(device)?;
    if !scenario.devices[dev_idx].is_gfm() {
        return Err(Error::Analysis(format!(
            "dispatch sweep expects a grid-forming device, '{device}' is not"
        )));
    }
    let rating = scenario.devices[dev_idx].s_rating();
    let s_base = scenario.network.s_base;

    let evaluated: Vec<(f64, std::result::Result<ModalReport, String>)> = grid
        .par_iter()
        .map(|&p_set| {
            let mut sc = scenario.clone();
            sc.dispatch[dev_idx].p = p_set * rating / s_base;
            sc.events.clear();
            let outcome = linearize_scenario(&sc, DEFAULT_PERTURBATION)
                .and_then(|sm| eigen_report(&sm))
                .map_err(|e| e.to_string());
            (p_set, outcome)
        })
        .collect();

    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (p_set, outcome) in evaluated {
        match outcome {
            Ok(report) => points.push(SweepPoint { p_set, report }),
            Err(reason) => skipped.push((p_set, reason)),
        }
    }
    Ok(SweepResult { points, skipped })
}

/// Overlap between two (complex) mode shapes, normalized to [0, 1].
fn shape_overlap(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
    let num = a.dotc(b).norm();
    let den = a.norm() * b.norm();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Detects real/oscillatory transitions of grid-forming-participating
/// modes along a sweep by tracking mode shapes between adjacent grid
/// points. Returns the dispatch value at each flagged transition (midpoint
/// of the bracketing interval), including matching failures (overlap at or
/// below 0.8), deduplicated.
pub fn bifurcation_points(sweep: &[SweepPoint]) -> Vec<f64> {
    let mut flags = Vec::new();
    for pair in sweep.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let mid = 0.5 * (a.p_set + b.p_set);
        let mut flagged = false;
        for i in 0..a.report.eigenvalues.len() {
            if a.report.kind(i) == ModeKind::Reference {
                continue;
            }
            if a.report.eigenvalues[i].im < 0.0 {
                continue; // one representative per conjugate pair
            }
            if a.report.gfm_participation(i) <= GFM_PARTICIPATION_THRESHOLD {
                continue;
            }
            // Best shape match at the next grid point.
            let mut best: Option<(usize, f64)> = None;
            for j in 0..b.report.eigenvalues.len() {
                if b.report.kind(j) == ModeKind::Reference || b.report.eigenvalues[j].im < 0.0 {
                    continue;
                }
                let ov = shape_overlap(&a.report.right_vectors[i], &b.report.right_vectors[j]);
                if best.map_or(true, |(_, bo)| ov > bo) {
                    best = Some((j, ov));
                }
            }
            if let Some((j, ov)) = best {
                let was_osc = a.report.kind(i) == ModeKind::Oscillatory;
                let is_osc = b.report.kind(j) == ModeKind::Oscillatory;
                if ov <= 0.8 || was_osc != is_osc {
                    flagged = true;
                }
            }
        }
        if flagged {
            flags.push(mid);
        }
    }
    flags.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    flags
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn plain_matrix(a: DMatrix<f64>) -> StateMatrix {
        let n = a.nrows();
        StateMatrix {
            a,
            labels: (0..n).map(|i| format!("x{i}")).collect(),
            gfm_states: vec![false; n],
            operating_point: "test".into(),
        }
    }

    #[test]
    fn damping_formula_direct() {
        // lambda = -1 +/- 2j gives zeta = 1/sqrt(5).
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, -2.0, -1.0]);
        let report = eigen_report(&plain_matrix(a)).unwrap();
        for i in 0..2 {
            assert_relative_eq!(report.damping(i), 0.4472135954999579, max_relative = 1e-10);
        }
    }

    #[test]
    fn diagonal_matrix_has_identity_participation() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, -3.0]);
        let report = eigen_report(&plain_matrix(a)).unwrap();
        // Eigenvalues sorted ascending in re for real modes.
        for i in 0..3 {
            let col = report.participation.column(i);
            let lam = report.eigenvalues[i].re;
            let state = (-lam) as usize - 1;
            let expect_state = 2 - state; // sorted -3, -2, -1
            let _ = expect_state;
            for k in 0..3 {
                let expected = if report.participation[(k, i)] == 1.0 { 1.0 } else { 0.0 };
                assert!((col[k] - expected).abs() < 1e-8);
            }
            assert_eq!(col.iter().filter(|&&p| p > 0.5).count(), 1);
        }
    }

    #[test]
    fn companion_matrix_roots() {
        // x'' + 3x' + 2x = 0 has roots -1 and -2.
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -3.0]);
        let report = eigen_report(&plain_matrix(a)).unwrap();
        let mut roots: Vec<f64> = report.eigenvalues.iter().map(|l| l.re).collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(roots[0], -2.0, epsilon = 1e-10);
        assert_relative_eq!(roots[1], -1.0, epsilon = 1e-10);
        assert!(report.eigenvalues.iter().all(|l| l.im == 0.0));
    }

    #[test]
    fn conjugate_closure_and_equal_damping() {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                -0.3, 5.0, 0.1, 0.0, -5.0, -0.3, 0.0, 0.2, 0.0, 0.1, -1.0, 2.5, 0.05, 0.0, -2.5,
                -1.0,
            ],
        );
        let report = eigen_report(&plain_matrix(a)).unwrap();
        for lam in &report.eigenvalues {
            if lam.im != 0.0 {
                let conj_present = report
                    .eigenvalues
                    .iter()
                    .any(|other| *other == lam.conj());
                assert!(conj_present, "missing conjugate of {lam}");
            }
        }
        // Damping computed from either member of a pair is identical.
        for i in 0..report.eigenvalues.len() {
            for j in 0..report.eigenvalues.len() {
                if report.eigenvalues[i] == report.eigenvalues[j].conj() {
                    assert_eq!(report.damping(i), report.damping(j));
                }
            }
        }
    }

    #[test]
    fn eigenvector_residual_is_small() {
        let a = DMatrix::from_row_slice(
            3,
            3,
            &[-0.5, 2.0, 0.3, -2.0, -0.5, 0.1, 0.0, 0.2, -1.5],
        );
        let sm = plain_matrix(a.clone());
        let report = eigen_report(&sm).unwrap();
        let a_c = a.map(|v| Complex64::new(v, 0.0));
        for (i, lam) in report.eigenvalues.iter().enumerate() {
            let v = &report.right_vectors[i];
            let resid = (&a_c * v - v * *lam).norm();
            assert!(resid < 1e-9, "Av - lv residual {resid} for {lam}");
        }
    }
}
