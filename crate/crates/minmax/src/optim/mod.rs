//! Discrete-time optimizers for two-player zero-sum games.
//!
//! The star of the module is the least-action family in [`lead`]: an explicit
//! momentum method whose interaction term couples each player to the *motion*
//! of its opponent, plus an implicit variant that solves a small linear system
//! per step. [`adam`] wraps the explicit update in per-coordinate Adam
//! scaling, and [`baselines`] collects the standard first- and second-order
//! methods we compare against. All of them advance a [`JointState`] and report
//! their per-step oracle cost in a [`StepRecord`], so benchmark results can be
//! priced in gradient evaluations rather than wall clock.

pub mod adam;
pub mod baselines;
pub mod lead;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::flow::{discretization_params, Scheme};
use crate::game::GameOracle;

pub use adam::{lead_adam_step, AdamState};
pub use baselines::baseline_step;
pub use lead::{ilead_step, lead_step};

/// Both players' iterates together with one step of history.
///
/// The previous iterates feed the momentum and opponent-motion terms; a fresh
/// state (no history yet) simply repeats the current point, which makes every
/// method's first step well defined.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub x_prev: DVector<f64>,
    pub y_prev: DVector<f64>,
}

impl JointState {
    /// State with zero history: the previous iterate equals the current one.
    pub fn fresh(x: DVector<f64>, y: DVector<f64>) -> Self {
        let x_prev = x.clone();
        let y_prev = y.clone();
        Self { x, y, x_prev, y_prev }
    }

    /// State with explicit history.
    pub fn with_history(
        x: DVector<f64>,
        y: DVector<f64>,
        x_prev: DVector<f64>,
        y_prev: DVector<f64>,
    ) -> Self {
        Self { x, y, x_prev, y_prev }
    }

    /// Squared distance of the current joint iterate from the origin
    /// (the Nash point of every game in this crate).
    pub fn dist_sq(&self) -> f64 {
        self.x.norm_squared() + self.y.norm_squared()
    }

    /// Most recent x-displacement `x_k - x_{k-1}`.
    pub fn dx(&self) -> DVector<f64> {
        &self.x - &self.x_prev
    }

    /// Most recent y-displacement `y_k - y_{k-1}`.
    pub fn dy(&self) -> DVector<f64> {
        &self.y - &self.y_prev
    }

    /// True when every entry of the current iterate is finite.
    pub fn is_finite(&self) -> bool {
        self.x.iter().all(|v| v.is_finite()) && self.y.iter().all(|v| v.is_finite())
    }
}

/// How the update coefficients `(eta, beta, alpha)` are specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Parameterization {
    /// Step size, momentum, and interaction strength given directly.
    Direct { eta: f64, beta: f64, alpha: f64 },
    /// Physical constants of the underlying second-order flow — friction
    /// `mu`, interaction strength `q`, and step `delta` — mapped to update
    /// coefficients by the chosen discretization scheme.
    Physical { mu: f64, q: f64, delta: f64, scheme: Scheme },
}

/// Update coefficients after resolving the parameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    pub eta: f64,
    pub beta: f64,
    pub alpha: f64,
}

/// Adam moment-decay and stabilization constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Shared optimizer configuration.
///
/// `gamma_reg` is the regularization weight used by the gradient-adjustment
/// baselines (SGA and consensus); it is ignored by methods that do not have
/// such a knob. `alpha_x`/`alpha_y` optionally split the interaction strength
/// per player (useful for the Adam variant); when unset both players use the
/// effective `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub params: Parameterization,
    pub gamma_reg: f64,
    pub adam: AdamParams,
    pub alpha_x: Option<f64>,
    pub alpha_y: Option<f64>,
}

impl OptimizerConfig {
    /// Direct coefficients. Requires `eta > 0`; `beta` and `alpha` are free
    /// (negative momentum is a legitimate method).
    pub fn direct(eta: f64, beta: f64, alpha: f64) -> Self {
        assert!(eta > 0.0, "step size eta must be positive, got {eta}");
        assert!(
            eta.is_finite() && beta.is_finite() && alpha.is_finite(),
            "update coefficients must be finite"
        );
        Self {
            params: Parameterization::Direct { eta, beta, alpha },
            gamma_reg: 1.0,
            adam: AdamParams::default(),
            alpha_x: None,
            alpha_y: None,
        }
    }

    /// Physical constants plus a discretization scheme.
    pub fn physical(mu: f64, q: f64, delta: f64, scheme: Scheme) -> Self {
        assert!(delta > 0.0, "step delta must be positive, got {delta}");
        assert!(mu >= 0.0, "friction mu must be nonnegative, got {mu}");
        Self {
            params: Parameterization::Physical { mu, q, delta, scheme },
            gamma_reg: 1.0,
            adam: AdamParams::default(),
            alpha_x: None,
            alpha_y: None,
        }
    }

    /// Replace the regularization weight used by SGA and consensus.
    pub fn with_gamma_reg(mut self, gamma_reg: f64) -> Self {
        self.gamma_reg = gamma_reg;
        self
    }

    /// Replace the Adam constants.
    pub fn with_adam(mut self, adam: AdamParams) -> Self {
        self.adam = adam;
        self
    }

    /// Give the two players distinct interaction strengths.
    pub fn with_alpha_xy(mut self, alpha_x: f64, alpha_y: f64) -> Self {
        self.alpha_x = Some(alpha_x);
        self.alpha_y = Some(alpha_y);
        self
    }

    /// The update coefficients, resolving a physical parameterization through
    /// its discretization scheme.
    pub fn effective(&self) -> EffectiveParams {
        match self.params {
            Parameterization::Direct { eta, beta, alpha } => EffectiveParams { eta, beta, alpha },
            Parameterization::Physical { mu, q, delta, scheme } => {
                let (beta, eta, alpha) = discretization_params(scheme, mu, q, delta);
                EffectiveParams { eta, beta, alpha }
            }
        }
    }

    /// Per-player interaction strengths, defaulting to the effective `alpha`.
    pub fn player_alphas(&self) -> (f64, f64) {
        let alpha = self.effective().alpha;
        (self.alpha_x.unwrap_or(alpha), self.alpha_y.unwrap_or(alpha))
    }
}

/// One optimizer step: the new state plus what it cost.
///
/// Costs count *oracle calls*, one per player-block: a full simultaneous
/// gradient is two `grad_evals`, each curvature-vector product is one
/// `jvp_evals`, and each dense linear solve is one `linear_solves`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub state: JointState,
    pub grad_evals: u32,
    pub jvp_evals: u32,
    pub linear_solves: u32,
}

/// Every discrete method the benchmark harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Lead,
    ILead,
    LeadAdam,
    Gda,
    MomentumGda,
    NegativeMomentumGda,
    Ogda,
    ExtraGradient,
    Sga,
    Co,
    Cgd,
    Lola,
}

impl Method {
    /// Stable lowercase identifier used in CSV output and config files.
    pub fn name(&self) -> &'static str {
        match self {
            Method::Lead => "lead",
            Method::ILead => "ilead",
            Method::LeadAdam => "lead_adam",
            Method::Gda => "gda",
            Method::MomentumGda => "momentum_gda",
            Method::NegativeMomentumGda => "negative_momentum_gda",
            Method::Ogda => "ogda",
            Method::ExtraGradient => "extragradient",
            Method::Sga => "sga",
            Method::Co => "co",
            Method::Cgd => "cgd",
            Method::Lola => "lola",
        }
    }

    /// Parse the identifier produced by [`Method::name`].
    pub fn parse(s: &str) -> Option<Method> {
        Method::all().iter().copied().find(|m| m.name() == s)
    }

    /// All methods, in a stable presentation order.
    pub fn all() -> &'static [Method] {
        &[
            Method::Lead,
            Method::ILead,
            Method::LeadAdam,
            Method::Gda,
            Method::MomentumGda,
            Method::NegativeMomentumGda,
            Method::Ogda,
            Method::ExtraGradient,
            Method::Sga,
            Method::Co,
            Method::Cgd,
            Method::Lola,
        ]
    }
}

/// One step of `method` from `state`.
///
/// `adam` carries the moment estimates between steps and is required exactly
/// for [`Method::LeadAdam`]; every other method ignores it.
pub fn step_method(
    game: &GameOracle,
    method: Method,
    state: &JointState,
    cfg: &OptimizerConfig,
    adam: Option<&mut AdamState>,
) -> Result<StepRecord> {
    match method {
        Method::Lead => lead_step(game, state, cfg),
        Method::ILead => ilead_step(game, state, cfg),
        Method::LeadAdam => {
            let adam = adam.ok_or_else(|| {
                Error::InvalidArgument("lead_adam requires an AdamState".to_string())
            })?;
            lead_adam_step(game, state, adam, cfg)
        }
        Method::Gda => baseline_step(baselines::Baseline::Gda, game, state, cfg),
        Method::MomentumGda => baseline_step(baselines::Baseline::MomentumGda, game, state, cfg),
        Method::NegativeMomentumGda => {
            baseline_step(baselines::Baseline::NegativeMomentumGda, game, state, cfg)
        }
        Method::Ogda => baseline_step(baselines::Baseline::Ogda, game, state, cfg),
        Method::ExtraGradient => baseline_step(baselines::Baseline::ExtraGradient, game, state, cfg),
        Method::Sga => baseline_step(baselines::Baseline::Sga, game, state, cfg),
        Method::Co => baseline_step(baselines::Baseline::Co, game, state, cfg),
        Method::Cgd => baseline_step(baselines::Baseline::Cgd, game, state, cfg),
        Method::Lola => baseline_step(baselines::Baseline::Lola, game, state, cfg),
    }
}

/// How [`run`] decides it is done.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Hard cap on the number of steps.
    pub max_iters: usize,
    /// Converged when the squared distance to the Nash point drops to this.
    pub tol: f64,
    /// Diverged when the joint-iterate norm exceeds this (or goes non-finite).
    pub divergence_norm: f64,
    /// Keep the full state history (memory-hungry; off for sweeps).
    pub record_states: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { max_iters: 10_000, tol: 1e-12, divergence_norm: 1e12, record_states: false }
    }
}

/// Terminal condition of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    Diverged,
    Timeout,
}

impl RunStatus {
    /// Stable lowercase identifier used in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::Diverged => "diverged",
            RunStatus::Timeout => "timeout",
        }
    }
}

/// A completed trajectory: termination status, per-step distances, and the
/// total oracle cost. `dist_sq[k]` is the squared distance at iterate `k`,
/// so the vector has `steps + 1` entries.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub status: RunStatus,
    pub steps: usize,
    pub dist_sq: Vec<f64>,
    pub states: Option<Vec<JointState>>,
    pub grad_evals: u64,
    pub jvp_evals: u64,
    pub linear_solves: u64,
}

impl Trajectory {
    /// Squared distance at the last recorded iterate.
    pub fn final_dist_sq(&self) -> f64 {
        *self.dist_sq.last().expect("trajectory records at least the start")
    }
}

/// Iterate `method` from `s0` until convergence, divergence, or the step cap.
///
/// Divergence is data, not an error: a blown-up trajectory comes back with
/// [`RunStatus::Diverged`] and the distance history up to the blow-up point.
/// Errors are reserved for misuse (shape mismatches, unsupported game kinds,
/// singular implicit systems).
pub fn run(
    game: &GameOracle,
    method: Method,
    cfg: &OptimizerConfig,
    s0: &JointState,
    opts: &RunOptions,
) -> Result<Trajectory> {
    let guard = opts.divergence_norm * opts.divergence_norm;
    let mut state = s0.clone();
    let mut adam = match method {
        Method::LeadAdam => Some(AdamState::new(game.dim())),
        _ => None,
    };
    let mut dist_sq = Vec::with_capacity(opts.max_iters.min(4096) + 1);
    let mut states = opts.record_states.then(Vec::new);
    let mut grad_evals = 0u64;
    let mut jvp_evals = 0u64;
    let mut linear_solves = 0u64;

    for step in 0..=opts.max_iters {
        let d2 = state.dist_sq();
        dist_sq.push(d2);
        if let Some(hist) = states.as_mut() {
            hist.push(state.clone());
        }
        if !state.is_finite() || d2 > guard {
            return Ok(Trajectory {
                status: RunStatus::Diverged,
                steps: step,
                dist_sq,
                states,
                grad_evals,
                jvp_evals,
                linear_solves,
            });
        }
        if d2 <= opts.tol {
            return Ok(Trajectory {
                status: RunStatus::Converged,
                steps: step,
                dist_sq,
                states,
                grad_evals,
                jvp_evals,
                linear_solves,
            });
        }
        if step == opts.max_iters {
            break;
        }
        let rec = step_method(game, method, &state, cfg, adam.as_mut())?;
        grad_evals += u64::from(rec.grad_evals);
        jvp_evals += u64::from(rec.jvp_evals);
        linear_solves += u64::from(rec.linear_solves);
        state = rec.state;
    }

    Ok(Trajectory {
        status: RunStatus::Timeout,
        steps: opts.max_iters,
        dist_sq,
        states,
        grad_evals,
        jvp_evals,
        linear_solves,
    })
}
