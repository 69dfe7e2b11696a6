//! Standard first- and second-order baselines for simultaneous games.
//!
//! All of them share the optimizer configuration: `eta` is the step size,
//! `beta` the momentum weight (where the method has momentum), `gamma_reg`
//! the regularization weight of the gradient-adjustment methods, and `alpha`
//! the opponent-learning-rate of LOLA. Each step reports its oracle cost;
//! methods that re-evaluate gradients at a second point pay for it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::{Block, GameOracle};
use crate::optim::{JointState, OptimizerConfig, StepRecord};

/// The baseline methods, named as in the benchmark output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    /// Simultaneous gradient descent-ascent.
    Gda,
    /// GDA plus heavy-ball momentum on both players.
    MomentumGda,
    /// Identical update rule to [`Baseline::MomentumGda`]; the name records
    /// the intent of running it with `beta < 0`.
    NegativeMomentumGda,
    /// Optimistic GDA: extrapolates with the previous gradient.
    Ogda,
    /// Extra-gradient with optional momentum on the corrector step.
    ExtraGradient,
    /// Symplectic gradient adjustment.
    Sga,
    /// Consensus optimization.
    Co,
    /// Competitive gradient descent (per-player linear solves).
    Cgd,
    /// Learning with opponent-learning awareness, zero-sum form.
    Lola,
}

fn record(s: &JointState, x: DVector<f64>, y: DVector<f64>, grads: u32, jvps: u32, solves: u32) -> StepRecord {
    StepRecord {
        state: JointState::with_history(x, y, s.x.clone(), s.y.clone()),
        grad_evals: grads,
        jvp_evals: jvps,
        linear_solves: solves,
    }
}

/// One step of the chosen baseline from `s`.
pub fn baseline_step(
    method: Baseline,
    game: &GameOracle,
    s: &JointState,
    cfg: &OptimizerConfig,
) -> Result<StepRecord> {
    let p = cfg.effective();
    let (gx, gy) = game.grads(&s.x, &s.y)?;
    match method {
        Baseline::Gda => {
            let x = &s.x - &gx * p.eta;
            let y = &s.y + &gy * p.eta;
            Ok(record(s, x, y, 2, 0, 0))
        }
        Baseline::MomentumGda | Baseline::NegativeMomentumGda => {
            let x = &s.x + s.dx() * p.beta - &gx * p.eta;
            let y = &s.y + s.dy() * p.beta + &gy * p.eta;
            Ok(record(s, x, y, 2, 0, 0))
        }
        Baseline::Ogda => {
            // Extrapolation through the previous iterate's gradient. The
            // history gradient is recomputed rather than cached, which is
            // what the cost of 4 gradient evaluations pays for; on the first
            // step (no history) the combined gradient collapses to the plain
            // one and the update coincides with GDA exactly.
            let (gxp, gyp) = game.grads(&s.x_prev, &s.y_prev)?;
            let ex = &gx * 2.0 - &gxp;
            let ey = &gy * 2.0 - &gyp;
            let x = &s.x - &ex * p.eta;
            let y = &s.y + &ey * p.eta;
            Ok(record(s, x, y, 4, 0, 0))
        }
        Baseline::ExtraGradient => {
            // Predictor: a plain gradient half-step. Corrector: step from the
            // *current* iterate along the predictor-point gradient, with
            // optional momentum (beta = 0 recovers the textbook method).
            let xh = &s.x - &gx * p.eta;
            let yh = &s.y + &gy * p.eta;
            let (gxh, gyh) = game.grads(&xh, &yh)?;
            let x = &s.x + s.dx() * p.beta - &gxh * p.eta;
            let y = &s.y + s.dy() * p.beta + &gyh * p.eta;
            Ok(record(s, x, y, 4, 0, 0))
        }
        Baseline::Sga => {
            // Adjustment along the antisymmetric part of the game Jacobian:
            // each player also descends the opponent-mediated curl term.
            let adj_x = game.jvp(Block::Xy, &gy)?;
            let adj_y = game.jvp(Block::Yx, &gx)?;
            let c = p.eta * cfg.gamma_reg;
            let x = &s.x - &gx * p.eta - &adj_x * c;
            let y = &s.y + &gy * p.eta - &adj_y * c;
            Ok(record(s, x, y, 2, 2, 0))
        }
        Baseline::Co => {
            // Both players additionally descend gamma_reg/2 * |v|^2, the
            // squared norm of the simultaneous-gradient field.
            let adj_x = game.jvp(Block::Xy, &gy)? + game.jvp(Block::Xx, &gx)?;
            let adj_y = game.jvp(Block::Yx, &gx)? + game.jvp(Block::Yy, &gy)?;
            let c = p.eta * cfg.gamma_reg;
            let x = &s.x - &gx * p.eta - &adj_x * c;
            let y = &s.y + &gy * p.eta - &adj_y * c;
            Ok(record(s, x, y, 2, 4, 0))
        }
        Baseline::Cgd => {
            // Each player's move solves a local bilinear approximation of the
            // game against the opponent's best response:
            //   (I + eta^2 A A^T) dx = -eta (grad_x f + eta A grad_y f)
            //   (I + eta^2 A^T A) dy =  eta (grad_y f - eta A^T grad_x f)
            // The system matrices come from the constant curvature blocks;
            // the per-step oracle cost is the two cross products and the two
            // dense solves.
            let n = game.dim();
            let a = game.coupling();
            let at = a.transpose();
            let e2 = p.eta * p.eta;
            let mx = DMatrix::<f64>::identity(n, n) + a * &at * e2;
            let my = DMatrix::<f64>::identity(n, n) + &at * a * e2;
            let rhs_x = -(&gx + game.jvp(Block::Xy, &gy)? * p.eta) * p.eta;
            let rhs_y = (&gy - game.jvp(Block::Yx, &gx)? * p.eta) * p.eta;
            let dx = mx.lu().solve(&rhs_x).ok_or(Error::SingularSystem { cond: f64::INFINITY })?;
            let dy = my.lu().solve(&rhs_y).ok_or(Error::SingularSystem { cond: f64::INFINITY })?;
            let x = &s.x + dx;
            let y = &s.y + dy;
            Ok(record(s, x, y, 2, 2, 2))
        }
        Baseline::Lola => {
            // Zero-sum LOLA: each player differentiates through one
            // anticipated opponent gradient step of length alpha, which on
            // these games lands on the SGA adjustment with weight 2 alpha.
            let adj_x = game.jvp(Block::Xy, &gy)?;
            let adj_y = game.jvp(Block::Yx, &gx)?;
            let c = 2.0 * p.eta * p.alpha;
            let x = &s.x - &gx * p.eta - &adj_x * c;
            let y = &s.y + &gy * p.eta - &adj_y * c;
            Ok(record(s, x, y, 2, 2, 0))
        }
    }
}
