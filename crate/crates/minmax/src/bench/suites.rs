//! Prebuilt experiment drivers: the alignment-angle study, the step-size
//! grid on the separable-potential game, oracle-cost accounting, fitted-
//! versus-predicted contraction rates, and energy-decay traces.

use nalgebra::{DMatrix, DVector};

use crate::bench::sweep::{default_start, run_sweep, best_per_method, RunResult, SweepSpec};
use crate::bench::config::{AlignmentSpec, LyapunovSpec};
use crate::error::Result;
use crate::flow::{rk4_integrate, CouplingConvention, FlowState, Scheme};
use crate::game::GameOracle;
use crate::lyapunov::{
    continuous_bilinear_trace, continuous_rate_bound_bilinear, discrete_quadratic_trace,
    discrete_rate_bound, verify_decay, DecayMode, DecayReport, EnergyTrace,
};
use crate::optim::{run, JointState, Method, OptimizerConfig, RunOptions, RunStatus};
use crate::spectral::tuned_rate_bilinear;

/// Counter-clockwise rotation by `theta` degrees.
fn rotation2(theta_deg: f64) -> DMatrix<f64> {
    let t = theta_deg.to_radians();
    let (s, c) = t.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, s, -s, c])
}

/// Two-dimensional quadratic game whose coupling direction is rotated
/// against fixed curvature.
///
/// Both curvature blocks share the eigenbasis at 90 degrees with eigenvalues
/// `(lambda1, lambda2)`; the coupling block reuses the right factor but
/// rotates the left one to `theta_a_deg`. At 90 degrees the coupling aligns
/// with the curvature (all three blocks equal); at 0 degrees it is maximally
/// misaligned (skew for equal eigenvalues).
pub fn build_alignment_game(theta_a_deg: f64, lambda1: f64, lambda2: f64) -> Result<GameOracle> {
    let lam = DMatrix::from_diagonal(&DVector::from_vec(vec![lambda1, lambda2]));
    let r90 = rotation2(90.0);
    let curvature = &r90 * &lam * r90.transpose();
    let a = rotation2(theta_a_deg) * &lam * r90.transpose();
    GameOracle::quadratic(curvature.clone(), a, curvature)
}

/// Tuning-sweep outcome at one coupling angle.
#[derive(Debug, Clone)]
pub struct AlignmentAngleResult {
    pub theta_a_deg: f64,
    /// Every (method, configuration) run at this angle.
    pub results: Vec<RunResult>,
    /// Each method's best configuration at this angle.
    pub best: Vec<RunResult>,
}

/// Tuned sweeps across coupling angles. The master seed is reused at every
/// angle, so each method faces the identical configuration list throughout
/// and the angles are directly comparable.
pub fn alignment_experiment(
    align: &AlignmentSpec,
    sweep: &SweepSpec,
) -> Result<Vec<AlignmentAngleResult>> {
    let mut out = Vec::with_capacity(align.thetas_deg.len());
    for &theta in &align.thetas_deg {
        let game = build_alignment_game(theta, align.lambda1, align.lambda2)?;
        let results = run_sweep(&game, sweep)?;
        let best = best_per_method(&results);
        out.push(AlignmentAngleResult { theta_a_deg: theta, results, best });
    }
    Ok(out)
}

/// One (gamma, method, step size) run on the separable-potential game.
#[derive(Debug, Clone, PartialEq)]
pub struct OgdaCell {
    pub gamma: f64,
    pub method: Method,
    pub eta: f64,
    pub status: RunStatus,
    /// Iterations to tolerance; `None` unless converged.
    pub iters: Option<usize>,
    pub final_dist_sq: f64,
}

/// Grid totals for one (gamma, method) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct OgdaMethodSummary {
    pub gamma: f64,
    pub method: Method,
    pub grid_points: usize,
    pub converged_points: usize,
    pub best_eta: Option<f64>,
    pub best_iters: Option<usize>,
}

/// Full result of the separable-game step-size grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OgdaFailureReport {
    pub cells: Vec<OgdaCell>,
    pub summary: Vec<OgdaMethodSummary>,
}

/// The methods the separable-game grid compares: the stale-gradient method
/// under test plus three references that reduce to plain descent there.
pub const OGDA_SUITE_METHODS: [Method; 4] =
    [Method::Ogda, Method::Lead, Method::Gda, Method::Cgd];

/// Exhaustive step-size grid on `f = gamma (x^2 - y^2)`.
///
/// Every run starts from the same unit-norm point with momentum and
/// interaction terms off, so the grid isolates how each method's use of
/// gradient history copes with pure-potential curvature.
pub fn ogda_failure_suite(
    gammas: &[f64],
    eta_grid: &[f64],
    max_iters: usize,
) -> Result<OgdaFailureReport> {
    let start = default_start(1);
    let opts = RunOptions { max_iters, ..RunOptions::default() };
    let mut cells = Vec::with_capacity(gammas.len() * OGDA_SUITE_METHODS.len() * eta_grid.len());
    let mut summary = Vec::with_capacity(gammas.len() * OGDA_SUITE_METHODS.len());
    for &gamma in gammas {
        let game = GameOracle::scaled_separable(gamma);
        for method in OGDA_SUITE_METHODS {
            let mut converged_points = 0;
            let mut best: Option<(f64, usize)> = None;
            for &eta in eta_grid {
                let cfg = OptimizerConfig::direct(eta, 0.0, 0.0);
                let traj = run(&game, method, &cfg, &start, &opts)?;
                let iters = matches!(traj.status, RunStatus::Converged).then_some(traj.steps);
                if let Some(k) = iters {
                    converged_points += 1;
                    if best.map_or(true, |(_, bk)| k < bk) {
                        best = Some((eta, k));
                    }
                }
                cells.push(OgdaCell {
                    gamma,
                    method,
                    eta,
                    status: traj.status,
                    iters,
                    final_dist_sq: traj.final_dist_sq(),
                });
            }
            summary.push(OgdaMethodSummary {
                gamma,
                method,
                grid_points: eta_grid.len(),
                converged_points,
                best_eta: best.map(|(e, _)| e),
                best_iters: best.map(|(_, k)| k),
            });
        }
    }
    Ok(OgdaFailureReport { cells, summary })
}

/// Oracle-call totals for one method over a fixed run length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostRow {
    pub method: Method,
    pub iters: usize,
    pub grad_evals: u64,
    pub jvp_evals: u64,
    pub linear_solves: u64,
}

/// Run each method for exactly `iters` steps and report measured oracle
/// calls. Convergence is disabled (the tolerance is unreachable) so the
/// totals always cover the full run length.
pub fn cost_table(methods: &[Method], game: &GameOracle, iters: usize) -> Result<Vec<CostRow>> {
    let start = default_start(game.dim());
    let cfg = OptimizerConfig::direct(0.05, 0.1, 0.05);
    let opts = RunOptions {
        max_iters: iters,
        tol: -1.0,
        divergence_norm: f64::INFINITY,
        record_states: false,
    };
    methods
        .iter()
        .map(|&method| {
            let traj = run(game, method, &cfg, &start, &opts)?;
            Ok(CostRow {
                method,
                iters,
                grad_evals: traj.grad_evals,
                jvp_evals: traj.jvp_evals,
                linear_solves: traj.linear_solves,
            })
        })
        .collect()
}

/// Least-squares geometric rate fitted to `series[lo..=hi]`, skipping
/// non-finite and underflowed entries. `None` if fewer than two usable
/// points remain.
pub fn fit_rate_window(series: &[f64], lo: usize, hi: usize) -> Option<f64> {
    let hi = hi.min(series.len().saturating_sub(1));
    if lo >= hi {
        return None;
    }
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .filter_map(|k| {
            let v = series[k];
            (v.is_finite() && v > 1e-290).then(|| (k as f64, v.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < f64::EPSILON {
        return None;
    }
    Some(((n * sxy - sx * sy) / denom).exp())
}

/// Fitted-versus-predicted contraction at the tuned bilinear parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RateValidation {
    /// Squared-radius contraction factor from the closed-form spectrum.
    pub predicted_rate: f64,
    /// The tuned step and interaction strength (both set to this value).
    pub eta_alpha: f64,
    /// Rate fitted to the measured two-step distance sums.
    pub fitted_rate: Option<f64>,
    /// Iterate window the fit used.
    pub window: (usize, usize),
}

/// Run the interaction method at its tuned bilinear parameters and fit the
/// empirical contraction rate over `window`.
///
/// The prediction contracts the stacked pair of consecutive iterates, so the
/// fit runs on `dist_sq[t] + dist_sq[t-1]` rather than single-iterate
/// distances, which oscillate mode-by-mode.
pub fn rate_validation(
    a: &DMatrix<f64>,
    max_iters: usize,
    window: (usize, usize),
) -> Result<RateValidation> {
    let (predicted_rate, eta_alpha) = tuned_rate_bilinear(a)?;
    let game = GameOracle::bilinear(a.clone())?;
    let cfg = OptimizerConfig::direct(eta_alpha, 0.0, eta_alpha);
    let opts = RunOptions {
        max_iters,
        tol: -1.0,
        divergence_norm: f64::INFINITY,
        record_states: false,
    };
    let traj = run(&game, Method::Lead, &cfg, &default_start(game.dim()), &opts)?;
    let d = &traj.dist_sq;
    let pair_sums: Vec<f64> = (1..d.len()).map(|t| d[t] + d[t - 1]).collect();
    let fitted_rate = fit_rate_window(&pair_sums, window.0, window.1);
    Ok(RateValidation { predicted_rate, eta_alpha, fitted_rate, window })
}

/// Energy trace plus its decay certificate.
#[derive(Debug, Clone)]
pub struct LyapunovOutcome {
    pub trace: EnergyTrace,
    pub report: DecayReport,
    /// Proven per-step factor (discrete) or exponential rate (continuous).
    pub rate: f64,
    /// Interaction strength the certificate prescribes.
    pub q: f64,
    /// Whether the discrete certificate's validity condition holds
    /// (always true in continuous mode).
    pub valid: bool,
}

/// Produce one energy-decay trace with its proven bound.
///
/// Discrete mode runs the implicit interaction method on the scalar
/// quadratic game from `x = y = 1`; continuous mode integrates the
/// second-order dynamics on the two-dimensional identity-coupling bilinear
/// game from `x = y = (1, 1)`.
pub fn lyapunov_decay(spec: &LyapunovSpec) -> Result<LyapunovOutcome> {
    match spec.mode {
        DecayMode::Discrete => {
            let (rate, q_default, valid) = discrete_rate_bound(spec.h, spec.mu, spec.delta);
            let q = spec.q.unwrap_or(q_default);
            let game = GameOracle::quadratic_scalar(spec.h);
            let cfg = OptimizerConfig::physical(spec.mu, q, spec.delta, Scheme::Implicit);
            let start = JointState::fresh(
                DVector::from_element(1, 1.0),
                DVector::from_element(1, 1.0),
            );
            let opts = RunOptions {
                max_iters: spec.steps,
                tol: -1.0,
                divergence_norm: f64::INFINITY,
                record_states: true,
            };
            let traj = run(&game, Method::ILead, &cfg, &start, &opts)?;
            let states = traj.states.expect("state recording was requested");
            let trace = discrete_quadratic_trace(spec.h, spec.mu, spec.delta, &states, Some(rate))?;
            let report = verify_decay(&trace, rate, DecayMode::Discrete);
            Ok(LyapunovOutcome { trace, report, rate, q, valid })
        }
        DecayMode::Continuous => {
            let a = DMatrix::identity(2, 2);
            let game = GameOracle::bilinear(a.clone())?;
            let (rho, q_default) = continuous_rate_bound_bilinear(&a, spec.mu);
            let q = spec.q.unwrap_or(q_default);
            let s0 = FlowState::at_rest(
                DVector::from_element(2, 1.0),
                DVector::from_element(2, 1.0),
            );
            let states = rk4_integrate(
                &game,
                &s0,
                spec.mu,
                q,
                CouplingConvention::Single,
                spec.delta,
                spec.steps,
            )?;
            let trace = continuous_bilinear_trace(&a, spec.mu, &states, Some(rho))?;
            let report = verify_decay(&trace, rho, DecayMode::Continuous);
            Ok(LyapunovOutcome { trace, report, rate: rho, q, valid: true })
        }
    }
}
