//! Seeded random-search tuning sweeps. Every method draws its own
//! hyperparameter stream from the master seed, so adding or removing a method
//! never perturbs the configurations any other method sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nalgebra::DVector;

use crate::bench::config::GridSpec;
use crate::error::Result;
use crate::game::GameOracle;
use crate::lyapunov::fit_geometric_rate;
use crate::optim::{run, JointState, Method, OptimizerConfig, RunOptions, RunStatus};

/// What to sweep and how hard.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub methods: Vec<Method>,
    /// Hyperparameter configurations per method.
    pub budget: usize,
    pub max_iters: usize,
    /// Converged when squared distance to the equilibrium drops below this.
    pub tol: f64,
    pub seed: u64,
    pub grids: GridSpec,
}

/// Outcome of one (method, configuration) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub method: Method,
    pub cfg_index: usize,
    pub eta: f64,
    pub beta: f64,
    pub alpha: f64,
    pub gamma_reg: f64,
    /// Iterations to reach the tolerance; `None` unless converged.
    pub iters_to_tol: Option<usize>,
    pub status: RunStatus,
    pub final_dist_sq: f64,
    pub grad_evals: u64,
    pub jvp_evals: u64,
    /// Geometric decay rate fitted to the squared-distance trace.
    pub fitted_rate: Option<f64>,
}

/// 64-bit FNV-1a over a byte string; used to derive per-method RNG streams.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Unit-norm start with equal mass on every coordinate of both players.
pub fn default_start(n: usize) -> JointState {
    let scale = 1.0 / ((2 * n) as f64).sqrt();
    JointState::fresh(
        DVector::from_element(n, scale),
        DVector::from_element(n, scale),
    )
}

/// Run one method/configuration pair and package the outcome.
pub fn run_configured(
    game: &GameOracle,
    method: Method,
    cfg_index: usize,
    cfg: &OptimizerConfig,
    start: &JointState,
    max_iters: usize,
    tol: f64,
) -> Result<RunResult> {
    let opts = RunOptions { max_iters, tol, ..RunOptions::default() };
    let traj = run(game, method, cfg, start, &opts)?;
    let iters_to_tol = match traj.status {
        RunStatus::Converged => Some(traj.steps),
        _ => None,
    };
    let fitted_rate = fit_geometric_rate(&traj.dist_sq, 0.1);
    let eff = cfg.effective();
    Ok(RunResult {
        method,
        cfg_index,
        eta: eff.eta,
        beta: eff.beta,
        alpha: eff.alpha,
        gamma_reg: cfg.gamma_reg,
        iters_to_tol,
        status: traj.status,
        final_dist_sq: traj.final_dist_sq(),
        grad_evals: traj.grad_evals,
        jvp_evals: traj.jvp_evals,
        fitted_rate,
    })
}

/// Random-search sweep: `budget` seeded configurations per method, all
/// started from the same unit-norm point. Results come back grouped by
/// method in the order `spec.methods` lists them.
pub fn run_sweep(game: &GameOracle, spec: &SweepSpec) -> Result<Vec<RunResult>> {
    let start = default_start(game.dim());
    let mut results = Vec::with_capacity(spec.methods.len() * spec.budget);
    for &method in &spec.methods {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ fnv1a64(method.name().as_bytes()));
        for cfg_index in 0..spec.budget {
            let eta = spec.grids.eta.draw(&mut rng);
            let beta = spec.grids.beta.draw(&mut rng);
            let alpha = spec.grids.alpha.draw(&mut rng);
            let gamma_reg = spec.grids.gamma_reg.draw(&mut rng);
            let cfg = OptimizerConfig::direct(eta, beta, alpha).with_gamma_reg(gamma_reg);
            results.push(run_configured(
                game,
                method,
                cfg_index,
                &cfg,
                &start,
                spec.max_iters,
                spec.tol,
            )?);
        }
    }
    Ok(results)
}

/// Pick each method's best configuration: fewest iterations among converged
/// runs, otherwise the smallest final distance. Returns one result per
/// method, in first-seen order.
pub fn best_per_method(results: &[RunResult]) -> Vec<RunResult> {
    let mut order: Vec<Method> = Vec::new();
    for r in results {
        if !order.contains(&r.method) {
            order.push(r.method);
        }
    }
    order
        .into_iter()
        .filter_map(|method| {
            results
                .iter()
                .filter(|r| r.method == method)
                .min_by(|a, b| rank(a).partial_cmp(&rank(b)).expect("ranks are finite"))
                .cloned()
        })
        .collect()
}

/// Sort key: converged runs (ordered by iterations) strictly beat
/// non-converged runs (ordered by final distance).
fn rank(r: &RunResult) -> (u8, f64) {
    match r.status {
        RunStatus::Converged => (0, r.iters_to_tol.unwrap_or(usize::MAX) as f64),
        _ => (1, if r.final_dist_sq.is_finite() { r.final_dist_sq } else { f64::MAX }),
    }
}
