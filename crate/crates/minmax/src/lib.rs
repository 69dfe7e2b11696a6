//! A desk-scale laboratory for momentum and coupling methods in two-player
//! zero-sum games.
//!
//! The crate studies a family of optimizers built around *least-action
//! dynamics* (LEAD): each player follows its own gradient while an interaction
//! term, formed from the mixed second derivative of the game and the
//! opponent's most recent displacement, counteracts the rotational part of the
//! joint vector field. Everything runs on small analytic games — bilinear and
//! quadratic saddle problems whose second derivatives are constant — so every
//! quantity of interest has an exact counterpart:
//!
//! * [`game`] — the game zoo and its oracles (values, gradients,
//!   Jacobian-vector products, finite-difference checks).
//! * [`optim`] — LEAD, its implicit variant, an Adam-flavoured variant, and
//!   nine baseline update rules, all as pure step functions with exact
//!   per-step cost accounting.
//! * [`flow`] — the continuous-time second-order dynamics behind LEAD, a
//!   reference Runge–Kutta integrator, and the map from physical parameters
//!   (friction, charge, step size) to discrete hyperparameters.
//! * [`spectral`] — update-operator assembly, closed-form eigenvalues,
//!   spectral radii, and convergence-rate predictions for bilinear games.
//! * [`lyapunov`] — energy functions certifying convergence in continuous and
//!   discrete time, plus decay verification over recorded traces.
//! * [`bench`] — a deterministic experiment harness: hyperparameter sweeps,
//!   failure-case suites, cost tables, and CSV artifacts, shared with the
//!   `minmax` command-line binary.
//!
//! All numerics are `f64`. Games are at most quadratic, so Jacobian-vector
//! products are exact matrix products and the only approximation anywhere is
//! floating-point rounding (and the explicit finite-difference test oracles).

pub mod bench;
pub mod error;
pub mod flow;
pub mod game;
pub mod lyapunov;
pub mod optim;
pub mod spectral;

mod book;

pub use error::{Error, Result};
