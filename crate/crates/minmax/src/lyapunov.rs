//! Lyapunov energies for the damped interaction dynamics, in continuous and
//! discrete time, plus decay verification against the proven rate bounds.
//!
//! Each energy is a sum of squares built from shifted velocities plus a
//! positive multiple of the squared distance to the Nash point, so it is
//! nonnegative, vanishes exactly at rest on the equilibrium, and dominates
//! `dist_sq` with a game-dependent floor constant. Trajectory checks are
//! mechanical: evaluate the energy along the run, compare against the
//! geometric/exponential reference curve, and count violations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::flow::FlowState;
use crate::optim::JointState;

/// An energy series sampled along one trajectory.
#[derive(Debug, Clone)]
pub struct EnergyTrace {
    /// Iteration indices (discrete runs) or sample times (continuous runs).
    pub ticks: Vec<f64>,
    /// Energy at each tick; nonnegative by construction.
    pub energy: Vec<f64>,
    /// Squared distance to the Nash point at each tick.
    pub dist_sq: Vec<f64>,
    /// Optional reference curve `E0 * decay(tick)` for plotting/CSV output.
    pub bound_curve: Option<Vec<f64>>,
}

impl EnergyTrace {
    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }
}

/// Outcome of checking a trace against monotonicity and a rate bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    /// Steps where energy increased beyond relative rounding slack.
    pub monotonicity_violations: usize,
    /// Samples where energy exceeded the claimed reference curve.
    pub bound_violations: usize,
    /// Empirical rate from a least-squares fit of log energy: the per-step
    /// ratio in discrete mode, the exponential decay constant in continuous
    /// mode. `None` when fewer than two samples are usable.
    pub fitted_rate: Option<f64>,
}

/// Whether a trace is indexed by iteration count or physical time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayMode {
    Discrete,
    Continuous,
}

/// Relative slack absorbing floating-point rounding in exactly-conserved or
/// slowly-moving stretches of a trace.
const MONOTONE_SLACK: f64 = 1e-12;

/// Reference-curve values below this are deep in subnormal territory; the
/// comparison carries no information there and is skipped.
const BOUND_FLOOR: f64 = 1e-290;

/// Energy of the damped bilinear flow at one instant:
///
/// ```text
/// E = 1/2 |vx + mu x + mu A y|^2 + 1/2 |vy + mu y - mu A^T x|^2
///   + 1/2 (|vx|^2 + |vy|^2) + |A^T x|^2 + |A y|^2
/// ```
pub fn continuous_energy_bilinear(
    a: &DMatrix<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
    vx: &DVector<f64>,
    vy: &DVector<f64>,
    mu: f64,
) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::shape(
            "continuous_energy_bilinear",
            "square coupling matrix",
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    if x.len() != n || y.len() != n || vx.len() != n || vy.len() != n {
        return Err(Error::shape(
            "continuous_energy_bilinear",
            format!("state vectors of length {n}"),
            format!("({}, {}, {}, {})", x.len(), y.len(), vx.len(), vy.len()),
        ));
    }
    assert!(mu >= 0.0, "friction mu must be nonnegative, got {mu}");
    let ay = a * y;
    let atx = a.transpose() * x;
    let shifted_x = vx + x * mu + &ay * mu;
    let shifted_y = vy + y * mu - &atx * mu;
    Ok(0.5 * shifted_x.norm_squared()
        + 0.5 * shifted_y.norm_squared()
        + 0.5 * (vx.norm_squared() + vy.norm_squared())
        + atx.norm_squared()
        + ay.norm_squared())
}

/// Decay constant and interaction strength proven for the damped bilinear
/// flow: `q = 2/mu + mu`, and
///
/// ```text
/// rho = min( mu/(1+mu),  min_j 2 mu sigma_j^2 / ((1+sigma_j^2)(mu^2+mu) + 2 sigma_j^2) )
/// ```
///
/// over all singular values `sigma_j` of the coupling matrix. The second
/// branch grows with `sigma`, so the smallest singular value binds.
pub fn continuous_rate_bound_bilinear(a: &DMatrix<f64>, mu: f64) -> (f64, f64) {
    assert!(mu > 0.0, "friction mu must be positive, got {mu}");
    let q = 2.0 / mu + mu;
    let mut rho = mu / (1.0 + mu);
    for sigma in a.clone().svd(false, false).singular_values.iter() {
        let s2 = sigma * sigma;
        let branch = 2.0 * mu * s2 / ((1.0 + s2) * (mu * mu + mu) + 2.0 * s2);
        rho = rho.min(branch);
    }
    (rho, q)
}

/// Energy of the damped scalar-quadratic flow (curvature `h` on both
/// players, unit coupling):
///
/// ```text
/// E = 1/2 (vx + mu x + mu y)^2 + 1/2 (vy + mu y - mu x)^2
///   + 1/2 (vx^2 + vy^2) + (1 + h)(x^2 + y^2)
/// ```
///
/// The matching interaction strength is `q = (2 + mu^2)/mu`.
pub fn continuous_energy_quadratic(h: f64, x: f64, y: f64, vx: f64, vy: f64, mu: f64) -> f64 {
    assert!(mu >= 0.0, "friction mu must be nonnegative, got {mu}");
    let shifted_x = vx + mu * x + mu * y;
    let shifted_y = vy + mu * y - mu * x;
    0.5 * shifted_x * shifted_x
        + 0.5 * shifted_y * shifted_y
        + 0.5 * (vx * vx + vy * vy)
        + (1.0 + h) * (x * x + y * y)
}

/// Discrete-time energy for the implicit update on the scalar-quadratic
/// game, with velocity shift `c = 2 sqrt(sqrt(5)/3) / mu`:
///
/// ```text
/// E_k = 1/2 (vx + c x + c y)^2 + 1/2 (vy + c y - c x)^2
///     + 1/2 (vx^2 + vy^2) + 2 sqrt(5) (1 + 2h/sqrt(5)) (x^2 + y^2)
/// ```
///
/// Velocities are the backward differences `(w_k - w_{k-1})/delta` of the
/// iterates. Fails for `mu <= 0`, which has no velocity shift.
pub fn discrete_energy_quadratic(
    h: f64,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    mu: f64,
) -> Result<f64> {
    if mu <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "discrete energy needs positive friction mu, got {mu}"
        )));
    }
    let sqrt5 = 5.0f64.sqrt();
    let c = 2.0 * (sqrt5 / 3.0).sqrt() / mu;
    let shifted_x = vx + c * x + c * y;
    let shifted_y = vy + c * y - c * x;
    Ok(0.5 * shifted_x * shifted_x
        + 0.5 * shifted_y * shifted_y
        + 0.5 * (vx * vx + vy * vy)
        + 2.0 * sqrt5 * (1.0 + 2.0 * h / sqrt5) * (x * x + y * y))
}

/// Per-step contraction factor proven for the implicit update on the
/// scalar-quadratic game:
///
/// ```text
/// rate = C / (C + delta mu),   C = mu^2 (2 sqrt(5) + 4h) + 4 sqrt(5)
/// ```
///
/// with interaction strength `q = sqrt(5) (2 + mu^2) / mu`. The bound is
/// proven under `mu delta >= 1`, reported via `valid`.
pub fn discrete_rate_bound(h: f64, mu: f64, delta: f64) -> (f64, f64, bool) {
    assert!(mu > 0.0, "friction mu must be positive, got {mu}");
    assert!(delta > 0.0, "step delta must be positive, got {delta}");
    let sqrt5 = 5.0f64.sqrt();
    let big_c = mu * mu * (2.0 * sqrt5 + 4.0 * h) + 4.0 * sqrt5;
    let rate = big_c / (big_c + delta * mu);
    let q = sqrt5 * (2.0 + mu * mu) / mu;
    (rate, q, mu * delta >= 1.0)
}

/// Evaluate the discrete energy along an iterate history, reconstructing
/// velocities as backward differences over `delta`. A fresh starting state
/// (no history) correctly yields zero initial velocity. `rate` fills the
/// reference curve `E0 * rate^k`.
pub fn discrete_quadratic_trace(
    h: f64,
    mu: f64,
    delta: f64,
    states: &[JointState],
    rate: Option<f64>,
) -> Result<EnergyTrace> {
    if delta <= 0.0 {
        return Err(Error::InvalidArgument(format!("step delta must be positive, got {delta}")));
    }
    let mut ticks = Vec::with_capacity(states.len());
    let mut energy = Vec::with_capacity(states.len());
    let mut dist_sq = Vec::with_capacity(states.len());
    for (k, s) in states.iter().enumerate() {
        if s.x.len() != 1 || s.y.len() != 1 {
            return Err(Error::shape(
                "discrete_quadratic_trace",
                "scalar (1-dimensional) iterates",
                format!("({}, {})", s.x.len(), s.y.len()),
            ));
        }
        let vx = (s.x[0] - s.x_prev[0]) / delta;
        let vy = (s.y[0] - s.y_prev[0]) / delta;
        ticks.push(k as f64);
        energy.push(discrete_energy_quadratic(h, s.x[0], s.y[0], vx, vy, mu)?);
        dist_sq.push(s.dist_sq());
    }
    let bound_curve = rate.map(|r| {
        let e0 = energy.first().copied().unwrap_or(0.0);
        (0..energy.len()).map(|k| e0 * r.powi(k as i32)).collect()
    });
    Ok(EnergyTrace { ticks, energy, dist_sq, bound_curve })
}

/// Evaluate the bilinear flow energy along integrator output. `rho` fills
/// the reference curve `E0 * exp(-rho (t - t0))`.
pub fn continuous_bilinear_trace(
    a: &DMatrix<f64>,
    mu: f64,
    states: &[FlowState],
    rho: Option<f64>,
) -> Result<EnergyTrace> {
    let mut ticks = Vec::with_capacity(states.len());
    let mut energy = Vec::with_capacity(states.len());
    let mut dist_sq = Vec::with_capacity(states.len());
    for s in states {
        ticks.push(s.t);
        energy.push(continuous_energy_bilinear(a, &s.x, &s.y, &s.vx, &s.vy, mu)?);
        dist_sq.push(s.dist_sq());
    }
    let bound_curve = rho.map(|r| {
        let e0 = energy.first().copied().unwrap_or(0.0);
        let t0 = ticks.first().copied().unwrap_or(0.0);
        ticks.iter().map(|t| e0 * (-r * (t - t0)).exp()).collect()
    });
    Ok(EnergyTrace { ticks, energy, dist_sq, bound_curve })
}

/// Check a trace for monotone decay and against the claimed rate.
///
/// `rate_or_rho` is the per-step factor (discrete mode, reference
/// `E0 * rate^k`) or the decay constant (continuous mode, reference
/// `E0 * exp(-rho (t - t0))`). Reference values that have decayed below
/// `1e-290` are skipped: the comparison is vacuous at subnormal scale.
pub fn verify_decay(trace: &EnergyTrace, rate_or_rho: f64, mode: DecayMode) -> DecayReport {
    let e = &trace.energy;
    let mut monotonicity_violations = 0;
    for i in 1..e.len() {
        if e[i] > e[i - 1] * (1.0 + MONOTONE_SLACK) {
            monotonicity_violations += 1;
        }
    }

    let mut bound_violations = 0;
    if let Some(&e0) = e.first() {
        let t0 = trace.ticks.first().copied().unwrap_or(0.0);
        for (i, (&ei, &ti)) in e.iter().zip(trace.ticks.iter()).enumerate() {
            let reference = match mode {
                DecayMode::Discrete => e0 * rate_or_rho.powi(i as i32),
                DecayMode::Continuous => e0 * (-rate_or_rho * (ti - t0)).exp(),
            };
            if reference < BOUND_FLOOR {
                continue;
            }
            if ei > reference * (1.0 + 1e-9) {
                bound_violations += 1;
            }
        }
    }

    let fitted_rate = fit_log_slope(&trace.ticks, e).map(|slope| match mode {
        DecayMode::Discrete => slope.exp(),
        DecayMode::Continuous => -slope,
    });

    DecayReport { monotonicity_violations, bound_violations, fitted_rate }
}

/// Per-row bound flags for export: 1 where the energy exceeds the stored
/// bound curve beyond rounding slack, 0 elsewhere — and everywhere when the
/// trace carries no bound curve. Uses the same slack and subnormal floor as
/// [`verify_decay`].
pub fn bound_violation_flags(trace: &EnergyTrace) -> Vec<u8> {
    match &trace.bound_curve {
        None => vec![0; trace.energy.len()],
        Some(bound) => trace
            .energy
            .iter()
            .zip(bound.iter())
            .map(|(&e, &b)| u8::from(b >= BOUND_FLOOR && e > b * (1.0 + 1e-9)))
            .collect(),
    }
}

/// Least-squares slope of `log(values)` against `ticks`, using only finite
/// positive entries above the subnormal floor. `None` with fewer than two
/// usable points.
fn fit_log_slope(ticks: &[f64], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ticks
        .iter()
        .zip(values.iter())
        .filter(|(_, &v)| v.is_finite() && v > BOUND_FLOOR)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_w = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, w) in pts {
        num += (t - mean_t) * (w - mean_w);
        den += (t - mean_t) * (t - mean_t);
    }
    if den == 0.0 {
        return None;
    }
    Some(num / den)
}

/// Geometric per-step ratio fitted to the tail of a positive series
/// (typically squared distances): the leading `skip_fraction` of the series
/// is dropped to let transients die out, entries at or below the subnormal
/// floor are ignored, and the result is `exp(slope)` of the log-linear fit.
pub fn fit_geometric_rate(series: &[f64], skip_fraction: f64) -> Option<f64> {
    assert!((0.0..1.0).contains(&skip_fraction), "skip_fraction must be in [0, 1)");
    let start = (series.len() as f64 * skip_fraction) as usize;
    let tail = &series[start..];
    let ticks: Vec<f64> = (start..series.len()).map(|k| k as f64).collect();
    fit_log_slope(&ticks, tail).map(f64::exp)
}
