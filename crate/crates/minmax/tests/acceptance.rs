//! The eleven end-to-end acceptance checks for this laboratory. Each test
//! prints exactly one `ACCEPTANCE <n>: ...` verdict line (run with
//! `--nocapture` to see the passing ones).
//!
//! Two checks — 8 and 11 — encode expectations that the underlying
//! mathematics does not satisfy. They run the stated experiments faithfully,
//! print the measured outcome with an analysis, and fail: the numbers are
//! right, the stated expectation is not.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use minmax::bench::{
    alignment_experiment, cost_table, log_grid, lyapunov_decay, ogda_failure_suite,
    rate_validation, AlignmentSpec, GridSpec, LyapunovSpec, SweepSpec,
};
use minmax::flow::{rk4_integrate, CouplingConvention, FlowState, Scheme};
use minmax::game::GameOracle;
use minmax::lyapunov::DecayMode;
use minmax::optim::{
    run, step_method, JointState, Method, OptimizerConfig, RunOptions, RunStatus,
};
use minmax::spectral::{
    assemble_lead_operator, lead_mu_closed_form, lead_spectrum, rho_alpha_derivative_at_zero,
};

fn verdict(n: usize, pass: bool, detail: &str) {
    if pass {
        println!("ACCEPTANCE {n}: PASS ({detail})");
    } else {
        println!("ACCEPTANCE {n}: FAIL — {detail}");
    }
    assert!(pass, "ACCEPTANCE {n}: FAIL — {detail}");
}

fn gaussian_matrix(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
}

fn unit_start(n: usize) -> JointState {
    let s = 1.0 / ((2 * n) as f64).sqrt();
    JointState::fresh(DVector::from_element(n, s), DVector::from_element(n, s))
}

/// Greedy nearest-neighbour matching distance between equal-size multisets.
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

/// 1. The dense update operator and the closed-form roots give the same
///    eigenvalue multiset on random bilinear games.
#[test]
fn criterion_01_operator_matches_closed_form_spectrum() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let dims = [1usize, 2, 4, 8];
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = dims[case % dims.len()];
        let a = DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        let eta: f64 = rng.gen();
        let beta: f64 = rng.gen();
        let alpha: f64 = rng.gen();
        let report = lead_spectrum(&a, eta, beta, alpha).unwrap();
        let op = assemble_lead_operator(&a, eta, beta, alpha).unwrap();
        let computed: Vec<Complex<f64>> = op.complex_eigenvalues().iter().copied().collect();
        worst = worst.max(multiset_distance(&report.eigenvalues, &computed));
    }
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        1,
        worst < 1e-10 && elapsed < 10.0,
        &format!("50 games, worst multiset distance {worst:.2e}, {elapsed:.2}s"),
    );
}

/// 2. Fitted two-step contraction at the tuned parameters matches the
///    closed-form prediction on both reference couplings.
#[test]
fn criterion_02_tuned_rate_reproduction() {
    let started = Instant::now();
    let aniso = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
    let rv1 = rate_validation(&aniso, 2_000, (100, 2_000)).unwrap();
    let fit1 = rv1.fitted_rate.expect("long trace fits");
    let ok1 = (rv1.eta_alpha - 0.25).abs() < 1e-12 && (fit1 - 0.9330).abs() <= 0.02;

    let iso = DMatrix::identity(2, 2);
    let rv2 = rate_validation(&iso, 2_000, (100, 2_000)).unwrap();
    let fit2 = rv2.fitted_rate.expect("long trace fits");
    let ok2 = (rv2.eta_alpha - 0.5).abs() < 1e-12 && (fit2 - 0.5).abs() <= 0.02;

    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        2,
        ok1 && ok2 && elapsed < 5.0,
        &format!(
            "diag(1,2): fitted {fit1:.5} vs 0.9330; identity: fitted {fit2:.5} vs 0.5; {elapsed:.2}s"
        ),
    );
}

/// 3. Plain descent-ascent strictly expands the iterate norm on every
///    bilinear fixture at every tested step size.
#[test]
fn criterion_03_gda_diverges_on_bilinear_games() {
    let games: Vec<(String, DMatrix<f64>)> = vec![
        ("identity-1".into(), DMatrix::identity(1, 1)),
        ("identity-2".into(), DMatrix::identity(2, 2)),
        ("identity-4".into(), DMatrix::identity(4, 4)),
        ("diag(1,2)".into(), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0])),
        ("gaussian-3".into(), gaussian_matrix(3, 7)),
        ("gaussian-8".into(), gaussian_matrix(8, 11)),
    ];
    let mut failures = Vec::new();
    for (name, a) in &games {
        let smin = a
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        assert!(smin > 1e-6, "fixture {name} must be nonsingular (smin {smin:e})");
        let game = GameOracle::bilinear(a.clone()).unwrap();
        for &eta in &[1e-3, 1e-2, 1e-1] {
            let cfg = OptimizerConfig::direct(eta, 0.0, 0.0);
            let opts = RunOptions {
                max_iters: 1_000,
                tol: -1.0,
                divergence_norm: f64::INFINITY,
                record_states: false,
            };
            let traj = run(&game, Method::Gda, &cfg, &unit_start(game.dim()), &opts).unwrap();
            let strictly_up = traj.dist_sq.windows(2).all(|w| w[1] > w[0]);
            if !strictly_up {
                failures.push(format!("{name} at eta={eta}"));
            }
        }
    }
    verdict(
        3,
        failures.is_empty(),
        &if failures.is_empty() {
            format!("{} games x 3 step sizes, all strictly increasing for 1000 steps", games.len())
        } else {
            format!("non-monotone norm on: {}", failures.join(", "))
        },
    );
}

/// 4. The discrete energy decays monotonically and under its geometric
///    bound for the implicit method on the scalar quadratic game.
#[test]
fn criterion_04_discrete_energy_certificate() {
    let mut details = Vec::new();
    let mut pass = true;
    for &h in &[0.0, 1.0] {
        let spec = LyapunovSpec {
            mode: DecayMode::Discrete,
            h,
            mu: 1.0,
            delta: 1.0,
            q: None,
            steps: 10_000,
        };
        let out = lyapunov_decay(&spec).unwrap();
        let q_ok = (out.q - 3.0 * 5.0f64.sqrt()).abs() < 1e-12;
        let ok = out.valid
            && q_ok
            && out.report.monotonicity_violations == 0
            && out.report.bound_violations == 0;
        pass &= ok;
        details.push(format!(
            "h={h}: rate {:.6}, mono {} / bound {} violations over 10^4 steps",
            out.rate, out.report.monotonicity_violations, out.report.bound_violations
        ));
    }
    verdict(4, pass, &details.join("; "));
}

/// 5. The continuous energy decays monotonically along the integrated flow
///    and the squared distance respects the exponential envelope.
#[test]
fn criterion_05_continuous_energy_certificate() {
    let spec = LyapunovSpec {
        mode: DecayMode::Continuous,
        h: 0.0,
        mu: 1.0,
        delta: 1e-3,
        q: None,
        steps: 20_000,
    };
    let out = lyapunov_decay(&spec).unwrap();
    let e0 = out.trace.energy[0];
    // Identity coupling: every singular value is 1, so the distance envelope
    // is E0 * exp(-t/3) with 5% integration headroom.
    let mut dist_ok = true;
    let mut worst_margin = f64::NEG_INFINITY;
    for i in 0..out.trace.len() {
        let envelope = e0 * (-out.trace.ticks[i] / 3.0).exp() * 1.05;
        let margin = out.trace.dist_sq[i] / envelope;
        worst_margin = worst_margin.max(margin);
        if out.trace.dist_sq[i] > envelope {
            dist_ok = false;
        }
    }
    let pass = (out.rate - 1.0 / 3.0).abs() < 1e-12
        && out.report.monotonicity_violations == 0
        && dist_ok;
    verdict(
        5,
        pass,
        &format!(
            "E0 {e0}, rho {:.4}, mono violations {}, worst dist/envelope {:.3} over t=20",
            out.rate, out.report.monotonicity_violations, worst_margin
        ),
    );
}

/// 6. The interaction-derivative of the squared top root matches a central
///    difference, and its sign flips exactly at eta = 1.
#[test]
fn criterion_06_interaction_rate_derivative() {
    let lambda = Complex::new(0.0, 1.0);
    let rho = |alpha: f64, eta: f64| {
        let (p, m) = lead_mu_closed_form(lambda, alpha, 0.0, eta);
        p.norm().max(m.norm()).powi(2)
    };
    let mut worst = 0.0f64;
    for &eta in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        let analytic = rho_alpha_derivative_at_zero(lambda, eta).unwrap();
        let h = 1e-6;
        let numeric = (rho(h, eta) - rho(-h, eta)) / (2.0 * h);
        worst = worst.max((analytic - numeric).abs());
    }
    let below = rho_alpha_derivative_at_zero(lambda, 0.9).unwrap();
    let at_one = rho_alpha_derivative_at_zero(lambda, 1.0).unwrap();
    let above = rho_alpha_derivative_at_zero(lambda, 1.1).unwrap();
    let sign_ok = below < 0.0 && at_one.abs() < 1e-14 && above > 0.0;
    verdict(
        6,
        worst < 1e-5 && sign_ok,
        &format!(
            "worst |analytic - central difference| {worst:.2e}; derivative {below:.3} at eta=0.9, \
             {at_one:.1e} at 1.0, {above:.3} at 1.1"
        ),
    );
}

/// 7. Analytic gradients agree with finite differences on 100 random states
///    per game kind.
#[test]
fn criterion_07_gradient_oracles_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    let games: Vec<(String, GameOracle)> = vec![
        ("bilinear".into(), GameOracle::bilinear(gaussian_matrix(3, 21)).unwrap()),
        ("quadratic".into(), {
            let m = gaussian_matrix(3, 22);
            let h = (&m + m.transpose()) * 0.5;
            let m = gaussian_matrix(3, 23);
            let g = (&m + m.transpose()) * 0.5;
            GameOracle::quadratic(h, gaussian_matrix(3, 24), g).unwrap()
        }),
        ("quadratic_scalar".into(), GameOracle::quadratic_scalar(0.7)),
        ("scaled_separable".into(), GameOracle::scaled_separable(2.5)),
    ];
    let mut worst = 0.0f64;
    for (_, game) in &games {
        let n = game.dim();
        for _ in 0..100 {
            let x = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal) * 2.0);
            let y = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal) * 2.0);
            let (gx, gy) = game.grads(&x, &y).unwrap();
            let h = 1e-6;
            for i in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (game.eval_f(&xp, &y).unwrap() - game.eval_f(&xm, &y).unwrap()) / (2.0 * h);
                worst = worst.max((fd - gx[i]).abs() / (1.0 + gx[i].abs()));
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[i] += h;
                ym[i] -= h;
                let fd = (game.eval_f(&x, &yp).unwrap() - game.eval_f(&x, &ym).unwrap()) / (2.0 * h);
                worst = worst.max((fd - gy[i]).abs() / (1.0 + gy[i].abs()));
            }
        }
    }
    verdict(
        7,
        worst < 1e-6,
        &format!("4 kinds x 100 states, worst relative deviation {worst:.2e}"),
    );
}

/// 8. Step-size grid on the separable-potential game. The reference methods
///    must converge somewhere at both curvatures, and the stale-gradient
///    method is expected to find no convergent step at the higher curvature.
///
///    That last expectation is not attainable: on f = gamma (x^2 - y^2) the
///    players decouple, two-step OGDA on each coordinate is stable exactly
///    for eta < 1/(3 gamma) (root analysis of z^2 - (1-2c)z - c, c = 2 eta
///    gamma), so at gamma = 6 the lower two-thirds of the log grid
///    converges. The suite reports the measured grid faithfully and this
///    check fails by design.
#[test]
fn criterion_08_ogda_failure_grid() {
    let gammas = [1.0, 6.0];
    let etas = log_grid(1e-4, 1.0, 30);
    let report = ogda_failure_suite(&gammas, &etas, 100_000).unwrap();
    let converged = |method: Method, gamma: f64| {
        report
            .summary
            .iter()
            .find(|s| s.method == method && s.gamma == gamma)
            .map(|s| s.converged_points)
            .unwrap_or(0)
    };
    println!("  separable-game grid (30 log-spaced steps in [1e-4, 1], 10^5 iteration cap):");
    for s in &report.summary {
        println!(
            "    gamma={} {:<5} converged {}/{} (best eta {:?}, best iters {:?})",
            s.gamma, s.method.name(), s.converged_points, s.grid_points, s.best_eta, s.best_iters
        );
    }
    let references_ok = gammas.iter().all(|&g| {
        converged(Method::Gda, g) > 0
            && converged(Method::Lead, g) > 0
            && converged(Method::Cgd, g) > 0
    });
    let ogda_low_ok = converged(Method::Ogda, 1.0) > 0;
    let ogda_high = converged(Method::Ogda, 6.0);
    verdict(
        8,
        references_ok && ogda_low_ok && ogda_high == 0,
        &format!(
            "references converge at both curvatures: {references_ok}; OGDA converges at \
             gamma=1: {ogda_low_ok}; OGDA at gamma=6 converged at {ogda_high}/30 grid points \
             where the expectation was 0/30 — its stable window there is eta < 1/18, which the \
             grid's lower decades satisfy, and any consistent one-step method converges for \
             small steps because the decoupled flow x' = -2*gamma*x is a contraction"
        ),
    );
}

/// 9. Oracle-call accounting is exact over arbitrary run lengths.
#[test]
fn criterion_09_cost_accounting() {
    let game = GameOracle::bilinear(DMatrix::identity(2, 2)).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for &iters in &[100usize, 357] {
        let rows = cost_table(&[Method::Lead, Method::ExtraGradient], &game, iters).unwrap();
        let lead = &rows[0];
        let eg = &rows[1];
        let ok = lead.grad_evals == 2 * iters as u64
            && lead.jvp_evals == 2 * iters as u64
            && lead.linear_solves == 0
            && eg.grad_evals == 4 * iters as u64
            && eg.jvp_evals == 0;
        pass &= ok;
        details.push(format!(
            "{iters} iters: lead {}g+{}j, extragradient {}g",
            lead.grad_evals, lead.jvp_evals, eg.grad_evals
        ));
    }
    verdict(9, pass, &details.join("; "));
}

/// 10. One symplectic step from rest tracks the integrated flow over the
///     same interval with second-order local error.
#[test]
fn criterion_10_discretization_local_error_order() {
    let a = DMatrix::identity(2, 2);
    let game = GameOracle::bilinear(a).unwrap();
    let ones = DVector::from_element(2, 1.0);
    let local_error = |delta: f64| {
        let cfg = OptimizerConfig::physical(1.0, 3.0, delta, Scheme::Symplectic);
        let s = JointState::fresh(ones.clone(), ones.clone());
        let stepped = step_method(&game, Method::Lead, &s, &cfg, None).unwrap().state;
        let flow0 = FlowState::at_rest(ones.clone(), ones.clone());
        let flow = rk4_integrate(
            &game,
            &flow0,
            1.0,
            3.0,
            CouplingConvention::Single,
            delta / 100.0,
            100,
        )
        .unwrap();
        let end = flow.last().unwrap();
        ((&stepped.x - &end.x).norm_squared() + (&stepped.y - &end.y).norm_squared()).sqrt()
    };
    let coarse = local_error(1e-2);
    let fine = local_error(5e-3);
    let ratio = coarse / fine;
    verdict(
        10,
        (3.5..=4.5).contains(&ratio),
        &format!("one-step error {coarse:.3e} at delta=1e-2, {fine:.3e} at 5e-3, ratio {ratio:.4}"),
    );
}

/// 11. Tuned comparison across coupling alignment. The stated expectation —
///     the interaction method beats extra-gradient-with-momentum in
///     iterations at 0 degrees, and all convergent methods sit within 2x of
///     each other at 90 degrees — does not hold under this protocol:
///     extra-gradient's two half-steps buy a genuinely better tuned
///     iteration count on skew couplings (it spends 4 gradient calls per
///     step to do it), and at 90 degrees the implicit-solve method is far
///     more than 2x faster than plain descent-ascent. The experiment and
///     its numbers are faithful; this check fails by design.
#[test]
fn criterion_11_alignment_comparison() {
    let methods = vec![
        Method::Lead,
        Method::ExtraGradient,
        Method::Gda,
        Method::Sga,
        Method::Co,
        Method::Cgd,
    ];
    let sweep = SweepSpec {
        methods,
        budget: 200,
        max_iters: 10_000,
        tol: 1e-12,
        seed: 0,
        grids: GridSpec::default(),
    };
    let align = AlignmentSpec { thetas_deg: vec![0.0, 90.0], lambda1: 1.0, lambda2: 2.0 };
    let angles = alignment_experiment(&align, &sweep).unwrap();

    println!("  tuned best-per-method (budget 200, tol 1e-12 on squared distance):");
    for angle in &angles {
        for b in &angle.best {
            println!(
                "    theta={:<3} {:<13} status={:<9} iters={:<6} grads={:<6} jvps={}",
                angle.theta_a_deg,
                b.method.name(),
                b.status.name(),
                b.iters_to_tol.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
                b.grad_evals,
                b.jvp_evals,
            );
        }
    }

    let best_iters = |theta: f64, m: Method| {
        angles
            .iter()
            .find(|a| a.theta_a_deg == theta)
            .and_then(|a| a.best.iter().find(|b| b.method == m))
            .and_then(|b| b.iters_to_tol)
    };
    let lead0 = best_iters(0.0, Method::Lead);
    let eg0 = best_iters(0.0, Method::ExtraGradient);
    let clause_a = match (lead0, eg0) {
        (Some(l), Some(e)) => l <= e,
        _ => false,
    };

    let ninety = angles.iter().find(|a| a.theta_a_deg == 90.0).unwrap();
    let converged: Vec<(Method, usize)> = ninety
        .best
        .iter()
        .filter(|b| b.status == RunStatus::Converged)
        .filter_map(|b| b.iters_to_tol.map(|k| (b.method, k)))
        .collect();
    let fastest = converged.iter().map(|(_, k)| *k).min().unwrap_or(0);
    let slowest = converged.iter().map(|(_, k)| *k).max().unwrap_or(0);
    let clause_b = !converged.is_empty() && slowest <= 2 * fastest;

    verdict(
        11,
        clause_a && clause_b,
        &format!(
            "at 0 deg tuned lead took {lead0:?} iterations vs extragradient {eg0:?} \
             (lead wins on gradient-call totals, not iterations); at 90 deg the convergent \
             spread is {fastest}..{slowest} iterations ({:.1}x, beyond the within-2x \
             expectation, driven by the implicit-solve method vs plain descent-ascent)",
            if fastest > 0 { slowest as f64 / fastest as f64 } else { f64::NAN }
        ),
    );
}
