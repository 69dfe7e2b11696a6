//! Continuous-time least-action dynamics and discretization maps.
//!
//! The optimizers in this crate discretize a second-order flow in which each
//! player is a unit mass moving in its own potential, damped by friction `mu`
//! and steered by a magnetic-like coupling of strength `q` to the opponent's
//! velocity:
//!
//! ```text
//! x'' = -mu x' - grad_x f - c q (d2f/dxdy) y'
//! y'' = -mu y' + grad_y f + c q (d2f/dydx) x'
//! ```
//!
//! The velocity-coupling coefficient appears in two conventions, selected by
//! [`CouplingConvention`]: `Single` uses the term `q * (block) * velocity`
//! (the reduced form the bilinear theory is stated in, c = 1), while
//! `Doubled` uses `2q` (the raw general-game form, c = 2). All bilinear
//! rate and energy results in this crate quote `q` in the `Single`
//! convention.
//!
//! Two Euler-family discretizations of this flow produce the discrete
//! optimizers; [`discretization_params`] maps physical parameters
//! `(mu, q, delta)` to update-rule hyperparameters `(beta, eta, alpha)`:
//!
//! * `Symplectic`: beta = 1 - mu*delta, eta = delta^2, alpha = q*delta
//!   (explicit update, the standard LEAD step);
//! * `Implicit`: the same three divided by (1 + mu*delta) (backward
//!   evaluation, the implicit LEAD step).
//!
//! A classical fourth-order Runge–Kutta integrator serves as the reference
//! trajectory against which one-step discretization error is measured.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::game::{Block, GameOracle};

/// Position/velocity state of the continuous dynamics.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub vx: DVector<f64>,
    pub vy: DVector<f64>,
    pub t: f64,
}

impl FlowState {
    /// A state at rest (zero velocity) at position `(x, y)`, t = 0.
    pub fn at_rest(x: DVector<f64>, y: DVector<f64>) -> Self {
        let vx = DVector::zeros(x.len());
        let vy = DVector::zeros(y.len());
        FlowState { x, y, vx, vy, t: 0.0 }
    }

    /// Squared distance of the position to the origin (the equilibrium).
    pub fn dist_sq(&self) -> f64 {
        self.x.norm_squared() + self.y.norm_squared()
    }

    fn is_finite(&self) -> bool {
        self.x.iter().all(|v| v.is_finite())
            && self.y.iter().all(|v| v.is_finite())
            && self.vx.iter().all(|v| v.is_finite())
            && self.vy.iter().all(|v| v.is_finite())
    }
}

/// How the velocity-coupling coefficient is scaled; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingConvention {
    /// Coupling term `q * (block) * velocity` — the reduced bilinear form.
    #[default]
    Single,
    /// Coupling term `2q * (block) * velocity` — the raw general-game form.
    Doubled,
}

impl CouplingConvention {
    fn factor(self) -> f64 {
        match self {
            CouplingConvention::Single => 1.0,
            CouplingConvention::Doubled => 2.0,
        }
    }
}

/// Right-hand side of the flow at state `s`: returns
/// `(dvx, dvy, dx, dy)` where `dx = vx`, `dy = vy`.
pub fn eom_rhs(
    game: &GameOracle,
    s: &FlowState,
    mu: f64,
    q: f64,
    convention: CouplingConvention,
) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>)> {
    let (gx, gy) = game.grads(&s.x, &s.y)?;
    let c = convention.factor() * q;
    let dvx = -(&s.vx * mu) - gx - game.jvp(Block::Xy, &s.vy)? * c;
    let dvy = -(&s.vy * mu) + gy + game.jvp(Block::Yx, &s.vx)? * c;
    Ok((dvx, dvy, s.vx.clone(), s.vy.clone()))
}

/// Integrates the flow with classical fourth-order Runge–Kutta.
///
/// Returns `steps + 1` states including the initial one; time advances by
/// `dt` per step. Aborts with a [`Error::NonFinite`] diagnostic if the state
/// leaves the finite floats.
pub fn rk4_integrate(
    game: &GameOracle,
    s0: &FlowState,
    mu: f64,
    q: f64,
    convention: CouplingConvention,
    dt: f64,
    steps: usize,
) -> Result<Vec<FlowState>> {
    if dt <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rk4 step size must be positive, got {dt}"
        )));
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(s0.clone());
    let mut s = s0.clone();
    for k in 0..steps {
        let k1 = eom_rhs(game, &s, mu, q, convention)?;
        let s2 = offset(&s, &k1, dt / 2.0);
        let k2 = eom_rhs(game, &s2, mu, q, convention)?;
        let s3 = offset(&s, &k2, dt / 2.0);
        let k3 = eom_rhs(game, &s3, mu, q, convention)?;
        let s4 = offset(&s, &k3, dt);
        let k4 = eom_rhs(game, &s4, mu, q, convention)?;

        s.x += (&k1.2 + &k2.2 * 2.0 + &k3.2 * 2.0 + &k4.2) * (dt / 6.0);
        s.y += (&k1.3 + &k2.3 * 2.0 + &k3.3 * 2.0 + &k4.3) * (dt / 6.0);
        s.vx += (&k1.0 + &k2.0 * 2.0 + &k3.0 * 2.0 + &k4.0) * (dt / 6.0);
        s.vy += (&k1.1 + &k2.1 * 2.0 + &k3.1 * 2.0 + &k4.1) * (dt / 6.0);
        s.t = s0.t + (k as f64 + 1.0) * dt;
        if !s.is_finite() {
            return Err(Error::NonFinite {
                context: "rk4_integrate",
                step: k,
            });
        }
        out.push(s.clone());
    }
    Ok(out)
}

type Rhs = (DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>);

fn offset(s: &FlowState, d: &Rhs, h: f64) -> FlowState {
    FlowState {
        x: &s.x + &d.2 * h,
        y: &s.y + &d.3 * h,
        vx: &s.vx + &d.0 * h,
        vy: &s.vy + &d.1 * h,
        t: s.t + h,
    }
}

/// The two Euler-family discretizations of the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Explicit update; positions advance with the *new* velocity.
    Symplectic,
    /// Backward evaluation; forces taken at the new point (linear solve).
    Implicit,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Symplectic => "symplectic",
            Scheme::Implicit => "implicit",
        }
    }
}

/// Maps physical parameters to update-rule hyperparameters
/// `(beta, eta, alpha)` for the given scheme.
///
/// Symplectic: `(1 - mu d, d^2, q d)`. Implicit: the same triple divided by
/// `1 + mu d`. With `mu d > 1` the symplectic momentum goes negative, which
/// is permitted (negative momentum is a meaningful regime). As `delta -> 0`
/// both schemes approach `(1, 0, 0)`, the continuous limit.
pub fn discretization_params(scheme: Scheme, mu: f64, q: f64, delta: f64) -> (f64, f64, f64) {
    assert!(delta > 0.0, "discretization step must be positive");
    match scheme {
        Scheme::Symplectic => (1.0 - mu * delta, delta * delta, q * delta),
        Scheme::Implicit => {
            let z = 1.0 + mu * delta;
            (1.0 / z, delta * delta / z, q * delta / z)
        }
    }
}
