//! Adam-scaled variant of the least-action update, in the alternating form
//! used for training runs: the x-player moves first, then the y-player reacts
//! to the move that was just made.

use nalgebra::DVector;

use crate::error::Result;
use crate::game::{Block, GameOracle};
use crate::optim::{JointState, OptimizerConfig, StepRecord};

/// Adam moment estimates for both players, advanced once per joint step.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    /// Shared step counter for bias correction.
    pub t: u64,
    pub mx: DVector<f64>,
    pub vx: DVector<f64>,
    pub my: DVector<f64>,
    pub vy: DVector<f64>,
}

impl AdamState {
    /// Zeroed moments for players of dimension `n`.
    pub fn new(n: usize) -> Self {
        Self {
            t: 0,
            mx: DVector::zeros(n),
            vx: DVector::zeros(n),
            my: DVector::zeros(n),
            vy: DVector::zeros(n),
        }
    }
}

fn adam_direction(
    m: &mut DVector<f64>,
    v: &mut DVector<f64>,
    grad: &DVector<f64>,
    beta1: f64,
    beta2: f64,
    eps: f64,
    bias1: f64,
    bias2: f64,
) -> DVector<f64> {
    *m = &*m * beta1 + grad * (1.0 - beta1);
    *v = &*v * beta2 + grad.component_mul(grad) * (1.0 - beta2);
    let m_hat = &*m / bias1;
    let v_hat = &*v / bias2;
    m_hat.zip_map(&v_hat, |mi, vi| mi / (vi.sqrt() + eps))
}

/// One alternating step with per-coordinate Adam scaling.
///
/// The x-player forms its adjusted gradient `grad_x f + alpha_x A (y - y_prev)`
/// at the current pair, pushes it through Adam moments, and moves. The
/// y-player then forms `grad_y f + alpha_y A^T (x_next - x)` — its opponent
/// displacement is the move the x-player *just made* — and ascends through its
/// own moments. Both players share one step counter for bias correction.
/// Cost: 2 gradient evaluations and 2 curvature-vector products.
pub fn lead_adam_step(
    game: &GameOracle,
    s: &JointState,
    adam: &mut AdamState,
    cfg: &OptimizerConfig,
) -> Result<StepRecord> {
    let p = cfg.effective();
    let (alpha_x, alpha_y) = cfg.player_alphas();
    let ap = cfg.adam;
    adam.t += 1;
    let t = adam.t as f64;
    let bias1 = 1.0 - ap.beta1.powf(t);
    let bias2 = 1.0 - ap.beta2.powf(t);

    let gx = game.grad_x(&s.x, &s.y)?;
    let adj_x = &gx + game.jvp(Block::Xy, &s.dy())? * alpha_x;
    let dir_x = adam_direction(&mut adam.mx, &mut adam.vx, &adj_x, ap.beta1, ap.beta2, ap.eps, bias1, bias2);
    let x_next = &s.x - dir_x * p.eta;

    let gy = game.grad_y(&x_next, &s.y)?;
    let adj_y = &gy + game.jvp(Block::Yx, &(&x_next - &s.x))? * alpha_y;
    let dir_y = adam_direction(&mut adam.my, &mut adam.vy, &adj_y, ap.beta1, ap.beta2, ap.eps, bias1, bias2);
    let y_next = &s.y + dir_y * p.eta;

    Ok(StepRecord {
        state: JointState::with_history(x_next, y_next, s.x.clone(), s.y.clone()),
        grad_evals: 2,
        jvp_evals: 2,
        linear_solves: 0,
    })
}
