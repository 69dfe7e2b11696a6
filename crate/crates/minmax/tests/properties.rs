//! Property-based invariants over random games, states, and parameters.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use proptest::prelude::*;

use minmax::flow::{rk4_integrate, CouplingConvention, FlowState};
use minmax::game::{Block, GameKind, GameOracle};
use minmax::lyapunov::{continuous_energy_bilinear, discrete_energy_quadratic};
use minmax::optim::{
    run, step_method, AdamState, JointState, Method, OptimizerConfig, RunOptions,
};
use minmax::spectral::{assemble_lead_operator, lead_mu_closed_form, lead_spectrum};

// ---------- strategies ----------

fn vec_strategy(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-5.0..5.0f64, n).prop_map(DVector::from_vec)
}

fn matrix_strategy(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-3.0..3.0f64, n * n)
        .prop_map(move |data| DMatrix::from_row_slice(n, n, &data))
}

fn symmetric_strategy(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    matrix_strategy(n).prop_map(|m| (&m + m.transpose()) * 0.5)
}

/// A random game of any kind, paired with its per-player dimension.
fn game_strategy() -> impl Strategy<Value = GameOracle> {
    prop_oneof![
        (1usize..=4).prop_flat_map(|n| matrix_strategy(n))
            .prop_map(|a| GameOracle::bilinear(a).unwrap()),
        (1usize..=3).prop_flat_map(|n| (symmetric_strategy(n), matrix_strategy(n), symmetric_strategy(n)))
            .prop_map(|(h, a, g)| GameOracle::quadratic(h, a, g).unwrap()),
        (-3.0..3.0f64).prop_map(GameOracle::quadratic_scalar),
        (0.1..3.0f64).prop_map(GameOracle::scaled_separable),
    ]
}

fn state_for(game: &GameOracle) -> impl Strategy<Value = JointState> {
    let n = game.dim();
    (vec_strategy(n), vec_strategy(n), vec_strategy(n), vec_strategy(n))
        .prop_map(|(x, y, xp, yp)| JointState::with_history(x, y, xp, yp))
}

fn game_and_state() -> impl Strategy<Value = (GameOracle, JointState)> {
    game_strategy().prop_flat_map(|g| {
        let s = state_for(&g);
        (Just(g), s)
    })
}

// ---------- gradient and oracle identities ----------

proptest! {
    /// Analytic gradients match central finite differences of the game value.
    /// The games are quadratic, so the central difference is exact up to
    /// floating-point rounding.
    #[test]
    fn finite_difference_gradients_agree((game, s) in game_and_state()) {
        let (gx, gy) = game.grads(&s.x, &s.y).unwrap();
        let h = 1e-6;
        let n = game.dim();
        let mut fd_x = DVector::zeros(n);
        let mut fd_y = DVector::zeros(n);
        for i in 0..n {
            let mut xp = s.x.clone();
            let mut xm = s.x.clone();
            xp[i] += h;
            xm[i] -= h;
            fd_x[i] = (game.eval_f(&xp, &s.y).unwrap() - game.eval_f(&xm, &s.y).unwrap()) / (2.0 * h);
            let mut yp = s.y.clone();
            let mut ym = s.y.clone();
            yp[i] += h;
            ym[i] -= h;
            fd_y[i] = (game.eval_f(&s.x, &yp).unwrap() - game.eval_f(&s.x, &ym).unwrap()) / (2.0 * h);
        }
        let tol = 1e-6;
        prop_assert!((&fd_x - &gx).norm() <= tol * (1.0 + gx.norm()));
        prop_assert!((&fd_y - &gy).norm() <= tol * (1.0 + gy.norm()));
    }

    /// The off-diagonal second-derivative products are mutual adjoints.
    #[test]
    fn jvp_blocks_are_adjoint((game, s) in game_and_state()) {
        let v = &s.x;
        let w = &s.y;
        let av = game.jvp(Block::Xy, w).unwrap();
        let atv = game.jvp(Block::Yx, v).unwrap();
        prop_assert!((av.dot(v) - atv.dot(w)).abs() <= 1e-10 * (1.0 + av.norm() * v.norm()));
    }

    /// The simultaneous-play field is exactly the concatenation of the
    /// x-gradient and the negated y-gradient.
    #[test]
    fn vector_field_concatenates_gradients((game, s) in game_and_state()) {
        let (gx, gy) = game.grads(&s.x, &s.y).unwrap();
        let vf = game.vector_field(&s.x, &s.y).unwrap();
        let n = game.dim();
        prop_assert_eq!(vf.len(), 2 * n);
        for i in 0..n {
            prop_assert_eq!(vf[i], gx[i]);
            prop_assert_eq!(vf[n + i], -gy[i]);
        }
    }

    /// Bilinear games scale linearly in each player.
    #[test]
    fn bilinear_game_value_is_bilinear(
        a in (1usize..=3).prop_flat_map(matrix_strategy),
        c in -3.0..3.0f64,
    ) {
        let game = GameOracle::bilinear(a).unwrap();
        let n = game.dim();
        let x = DVector::from_fn(n, |i, _| (i as f64 + 1.0) * 0.3);
        let y = DVector::from_fn(n, |i, _| 1.0 - 0.2 * i as f64);
        let f = game.eval_f(&x, &y).unwrap();
        let fx = game.eval_f(&(&x * c), &y).unwrap();
        let fy = game.eval_f(&x, &(&y * c)).unwrap();
        prop_assert!((fx - c * f).abs() <= 1e-12 * (1.0 + f.abs() * c.abs()));
        prop_assert!((fy - c * f).abs() <= 1e-12 * (1.0 + f.abs() * c.abs()));
    }
}

// ---------- optimizer step invariants ----------

/// Expected per-step oracle calls: (gradients, jvps, linear solves).
fn expected_costs(method: Method) -> (u32, u32, u32) {
    match method {
        Method::Gda | Method::MomentumGda | Method::NegativeMomentumGda => (2, 0, 0),
        Method::Ogda | Method::ExtraGradient => (4, 0, 0),
        Method::Lead | Method::LeadAdam | Method::Sga | Method::Lola => (2, 2, 0),
        Method::Co => (2, 4, 0),
        Method::Cgd => (2, 2, 2),
        Method::ILead => (0, 2, 1),
    }
}

proptest! {
    /// Every method leaves the equilibrium at the origin exactly fixed.
    #[test]
    fn origin_is_a_fixed_point_of_every_method(game in game_strategy(), eta in 0.01..0.9f64) {
        let n = game.dim();
        let origin = JointState::fresh(DVector::zeros(n), DVector::zeros(n));
        let cfg = OptimizerConfig::direct(eta, 0.3, 0.2);
        for &method in Method::all() {
            let mut adam = AdamState::new(n);
            match step_method(&game, method, &origin, &cfg, Some(&mut adam)) {
                Ok(rec) => {
                    prop_assert_eq!(&rec.state.x, &origin.x, "{} moved x off origin", method.name());
                    prop_assert_eq!(&rec.state.y, &origin.y, "{} moved y off origin", method.name());
                }
                // The implicit method declines the decoupled scalar game.
                Err(minmax::Error::Unsupported(_)) => {}
                Err(e) => return Err(TestCaseError::fail(format!("{}: {e}", method.name()))),
            }
        }
    }

    /// A step is a pure function of its inputs.
    #[test]
    fn steps_are_deterministic((game, s) in game_and_state(), eta in 0.01..0.5f64) {
        let cfg = OptimizerConfig::direct(eta, 0.25, 0.1);
        for &method in Method::all() {
            let mut adam1 = AdamState::new(game.dim());
            let mut adam2 = AdamState::new(game.dim());
            let r1 = step_method(&game, method, &s, &cfg, Some(&mut adam1));
            let r2 = step_method(&game, method, &s, &cfg, Some(&mut adam2));
            match (r1, r2) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(&a.state.x, &b.state.x);
                    prop_assert_eq!(&a.state.y, &b.state.y);
                }
                (Err(_), Err(_)) => {}
                _ => return Err(TestCaseError::fail(format!("{}: divergent results", method.name()))),
            }
        }
    }

    /// Per-step oracle-call counts are a constant of the method, independent
    /// of game, state, and parameters.
    #[test]
    fn per_step_costs_are_method_constants((game, s) in game_and_state(), eta in 0.01..0.5f64) {
        let cfg = OptimizerConfig::direct(eta, 0.1, 0.2);
        for &method in Method::all() {
            let mut adam = AdamState::new(game.dim());
            if let Ok(rec) = step_method(&game, method, &s, &cfg, Some(&mut adam)) {
                let got = (rec.grad_evals, rec.jvp_evals, rec.linear_solves);
                prop_assert_eq!(got, expected_costs(method), "{}", method.name());
            }
        }
    }

    /// With the interaction off, the explicit method is momentum
    /// descent-ascent; with momentum also off it is plain descent-ascent.
    #[test]
    fn interaction_and_momentum_reductions_are_exact(
        (game, s) in game_and_state(),
        eta in 0.01..0.9f64,
        beta in -0.5..0.9f64,
    ) {
        let lead_cfg = OptimizerConfig::direct(eta, beta, 0.0);
        let a = step_method(&game, Method::Lead, &s, &lead_cfg, None).unwrap();
        let b = step_method(&game, Method::MomentumGda, &s, &lead_cfg, None).unwrap();
        prop_assert_eq!(&a.state.x, &b.state.x);
        prop_assert_eq!(&a.state.y, &b.state.y);

        let nomomentum_cfg = OptimizerConfig::direct(eta, 0.0, 0.0);
        let c = step_method(&game, Method::Lead, &s, &nomomentum_cfg, None).unwrap();
        let d = step_method(&game, Method::Gda, &s, &nomomentum_cfg, None).unwrap();
        prop_assert_eq!(&c.state.x, &d.state.x);
        prop_assert_eq!(&c.state.y, &d.state.y);
    }

    /// On bilinear games descent-ascent expands the squared norm by exactly
    /// eta^2 |v(w)|^2 per step — the algebraic form of its divergence.
    #[test]
    fn gda_norm_expansion_identity(
        a in (1usize..=4).prop_flat_map(matrix_strategy),
        eta in 0.01..0.5f64,
    ) {
        let game = GameOracle::bilinear(a).unwrap();
        let n = game.dim();
        let x = DVector::from_fn(n, |i, _| 0.5 + 0.1 * i as f64);
        let y = DVector::from_fn(n, |i, _| 1.0 - 0.15 * i as f64);
        let s = JointState::fresh(x.clone(), y.clone());
        let cfg = OptimizerConfig::direct(eta, 0.0, 0.0);
        let rec = step_method(&game, Method::Gda, &s, &cfg, None).unwrap();
        let before = s.dist_sq();
        let after = rec.state.dist_sq();
        let field = game.vector_field(&x, &y).unwrap();
        let expected = before + eta * eta * field.norm_squared();
        prop_assert!((after - expected).abs() <= 1e-12 * (1.0 + expected));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Whole-trajectory runs are reproducible to the bit.
    #[test]
    fn runs_are_deterministic(
        a in (1usize..=3).prop_flat_map(matrix_strategy),
        eta in 0.01..0.4f64,
        method_ix in 0usize..12,
    ) {
        let game = GameOracle::bilinear(a).unwrap();
        let method = Method::all()[method_ix];
        let n = game.dim();
        let s0 = JointState::fresh(
            DVector::from_element(n, 0.5),
            DVector::from_element(n, -0.5),
        );
        let cfg = OptimizerConfig::direct(eta, 0.2, 0.1);
        let opts = RunOptions { max_iters: 40, ..RunOptions::default() };
        let t1 = run(&game, method, &cfg, &s0, &opts).unwrap();
        let t2 = run(&game, method, &cfg, &s0, &opts).unwrap();
        prop_assert_eq!(t1.status, t2.status);
        prop_assert_eq!(t1.dist_sq, t2.dist_sq);
    }
}

// ---------- spectral identities ----------

proptest! {
    /// Root sum and product recover the characteristic polynomial's
    /// coefficients, and the plus-branch carries the larger modulus.
    #[test]
    fn closed_form_roots_satisfy_vieta(
        xi in 0.05..4.0f64,
        eta in 0.01..1.0f64,
        beta in -0.5..0.9f64,
        alpha in 0.0..1.0f64,
    ) {
        let lambda = Complex::new(0.0, xi);
        let (p, m) = lead_mu_closed_form(lambda, alpha, beta, eta);
        let b = Complex::new(1.0 + beta, 0.0) - lambda * (eta + alpha);
        let c = Complex::new(beta, 0.0) - lambda * alpha;
        prop_assert!(((p + m) - b).norm() <= 1e-12 * (1.0 + b.norm()));
        prop_assert!((p * m - c).norm() <= 1e-12 * (1.0 + c.norm()));
        prop_assert!(p.norm() >= m.norm() - 1e-12);
    }
}

/// Match two eigenvalue multisets by greedy nearest pairing.
fn multiset_distance(pred: &[Complex<f64>], comp: &[Complex<f64>]) -> f64 {
    assert_eq!(pred.len(), comp.len());
    let mut used = vec![false; comp.len()];
    let mut worst: f64 = 0.0;
    for p in pred {
        let mut best: Option<(usize, f64)> = None;
        for (j, c) in comp.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (p - c).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("equal lengths leave a candidate");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The dense update operator's eigenvalues equal the closed-form roots.
    #[test]
    fn operator_spectrum_matches_closed_form(
        a in (1usize..=4).prop_flat_map(matrix_strategy),
        eta in 0.05..0.95f64,
        beta in 0.0..0.9f64,
        alpha in 0.05..0.95f64,
    ) {
        let report = lead_spectrum(&a, eta, beta, alpha).unwrap();
        let op = assemble_lead_operator(&a, eta, beta, alpha).unwrap();
        let computed: Vec<Complex<f64>> = op.complex_eigenvalues().iter().copied().collect();
        prop_assert_eq!(report.eigenvalues.len(), computed.len());
        let d = multiset_distance(&report.eigenvalues, &computed);
        prop_assert!(d < 1e-8, "multiset distance {d}");
    }
}

// ---------- energy invariants ----------

proptest! {
    /// Both generalized energies are sums of squares, hence nonnegative.
    #[test]
    fn energies_are_nonnegative(
        n in 1usize..=3,
        seed_x in -5.0..5.0f64,
        seed_y in -5.0..5.0f64,
        vx0 in -5.0..5.0f64,
        vy0 in -5.0..5.0f64,
        mu in 0.2..3.0f64,
        h in 0.0..3.0f64,
    ) {
        let a = DMatrix::from_fn(n, n, |i, j| ((i * n + j) as f64 * 0.37).sin());
        let x = DVector::from_fn(n, |i, _| seed_x + i as f64 * 0.4);
        let y = DVector::from_fn(n, |i, _| seed_y - i as f64 * 0.3);
        let vx = DVector::from_element(n, vx0);
        let vy = DVector::from_element(n, vy0);
        let e = continuous_energy_bilinear(&a, &x, &y, &vx, &vy, mu).unwrap();
        prop_assert!(e >= -1e-12);
        let ed = discrete_energy_quadratic(h, seed_x, seed_y, vx0, vy0, mu).unwrap();
        prop_assert!(ed >= -1e-12);
    }
}

// ---------- flow integration checks (deterministic, not property-sampled) ----------

/// Along the damped flow the energy's time derivative is
/// `-mu (|A^T X|^2 + |A Y|^2 + |X'|^2 + |Y'|^2)`; a central difference of the
/// integrated trace must reproduce it.
#[test]
fn energy_derivative_matches_dissipation_formula() {
    let a = DMatrix::identity(2, 2);
    let game = GameOracle::bilinear(a.clone()).unwrap();
    let ones = DVector::from_element(2, 1.0);
    let s0 = FlowState::at_rest(ones.clone(), ones);
    let dt = 1e-3;
    let states = rk4_integrate(&game, &s0, 1.0, 3.0, CouplingConvention::Single, dt, 2_000).unwrap();
    let energy: Vec<f64> = states
        .iter()
        .map(|s| continuous_energy_bilinear(&a, &s.x, &s.y, &s.vx, &s.vy, 1.0).unwrap())
        .collect();
    for k in [100usize, 500, 1000, 1900] {
        let numeric = (energy[k + 1] - energy[k - 1]) / (2.0 * dt);
        let s = &states[k];
        let analytic = -1.0
            * ((a.transpose() * &s.x).norm_squared()
                + (&a * &s.y).norm_squared()
                + s.vx.norm_squared()
                + s.vy.norm_squared());
        assert!(
            (numeric - analytic).abs() <= 1e-5 * (1.0 + analytic.abs()),
            "at k={k}: numeric {numeric} vs analytic {analytic}"
        );
    }
}

/// Halving the integrator step shrinks the endpoint error by ~2^4.
#[test]
fn rk4_error_scales_at_fourth_order() {
    let game = GameOracle::bilinear(DMatrix::from_element(1, 1, 1.0)).unwrap();
    let s0 = FlowState::at_rest(DVector::from_element(1, 1.0), DVector::from_element(1, 0.5));
    let endpoint = |dt: f64, steps: usize| {
        let states =
            rk4_integrate(&game, &s0, 0.3, 1.5, CouplingConvention::Single, dt, steps).unwrap();
        states.last().unwrap().clone()
    };
    let reference = endpoint(1e-4, 10_000);
    let err = |s: &FlowState| {
        ((&s.x - &reference.x).norm_squared()
            + (&s.y - &reference.y).norm_squared()
            + (&s.vx - &reference.vx).norm_squared()
            + (&s.vy - &reference.vy).norm_squared())
        .sqrt()
    };
    let coarse = err(&endpoint(2e-2, 50));
    let fine = err(&endpoint(1e-2, 100));
    let ratio = coarse / fine;
    assert!(
        (12.0..=20.0).contains(&ratio),
        "expected ~16x error reduction per step halving, got {ratio} (coarse {coarse}, fine {fine})"
    );
}

/// Game kinds report the dimensions and couplings they were built with.
#[test]
fn game_kind_metadata_is_consistent() {
    let g = GameOracle::quadratic_scalar(0.5);
    assert_eq!(g.kind(), GameKind::QuadraticScalar);
    assert_eq!(g.dim(), 1);
    assert_eq!(g.coupling()[(0, 0)], 1.0);
    let g = GameOracle::scaled_separable(2.0);
    assert_eq!(g.kind(), GameKind::ScaledSeparable);
    assert_eq!(g.coupling()[(0, 0)], 0.0);
    assert_eq!(g.hessian_block(Block::Xx)[(0, 0)], 4.0);
}
