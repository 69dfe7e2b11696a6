//! Command-line driver for the experiment harness.
//!
//! `minmax run <config>` executes a config-file experiment; the other
//! subcommands are one-off shortcuts for the single-file exports.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use nalgebra::{DMatrix, DVector};

use minmax::bench::config::{parse_matrix, parse_vector};
use minmax::bench::{
    alignment_experiment, cost_table, csvout, log_grid, lyapunov_decay,
    ogda_failure_suite, rate_validation, run_sweep, ExperimentConfig, ExperimentKind, GameSpec,
    LyapunovSpec, SweepSpec,
};
use minmax::flow::{rk4_integrate, CouplingConvention, FlowState};
use minmax::game::{GameKind, GameOracle};
use minmax::lyapunov::{continuous_energy_bilinear, DecayMode};
use minmax::optim::Method;
use minmax::spectral::{gda_spectrum, lead_spectrum};

#[derive(Parser)]
#[command(
    name = "minmax",
    version,
    about = "Second-order min-max optimization lab: sweeps, spectra, flows, energy traces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a config file.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
    },
    /// Update-operator spectrum of a coupling matrix.
    Spectra {
        /// File holding the coupling matrix (rows on lines or `;`-separated).
        #[arg(long, conflicts_with = "identity")]
        matrix: Option<PathBuf>,
        /// Use an identity coupling of this dimension instead of a file.
        #[arg(long, default_value_t = 2)]
        identity: usize,
        #[arg(long, default_value_t = 0.25)]
        eta: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.25)]
        alpha: f64,
        /// Report the plain descent-ascent spectrum (ignores beta and alpha).
        #[arg(long)]
        gda: bool,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the damped second-order dynamics on a bilinear game.
    Flow {
        #[arg(long, conflicts_with = "identity")]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        identity: usize,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 3.0)]
        q: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 20_000)]
        steps: usize,
        /// Interaction convention: `single` or `doubled`.
        #[arg(long, default_value = "single")]
        convention: String,
        /// Start position for x, e.g. `1,1`; defaults to all ones.
        #[arg(long)]
        x0: Option<String>,
        /// Start position for y; defaults to all ones.
        #[arg(long)]
        y0: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Energy-decay trace with its proven bound.
    Lyapunov {
        /// `discrete` or `continuous`.
        #[arg(long, default_value = "discrete")]
        mode: String,
        /// Curvature of the scalar quadratic game (discrete mode).
        #[arg(long, default_value_t = 0.0)]
        h: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Iterate step (discrete) or integrator step (continuous);
        /// defaults to 1 and 1e-3 respectively.
        #[arg(long)]
        delta: Option<f64>,
        /// Interaction strength; the proven prescription when omitted.
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measured oracle-call totals per method.
    Cost {
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// Comma-separated method names; all methods when omitted.
        #[arg(long)]
        methods: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.cmd) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch(cmd: Cmd) -> anyhow::Result<()> {
    match cmd {
        Cmd::Run { config } => cmd_run(&config),
        Cmd::Spectra { matrix, identity, eta, beta, alpha, gda, out } => {
            let a = load_matrix(matrix.as_deref(), identity)?;
            let report =
                if gda { gda_spectrum(&a, eta)? } else { lead_spectrum(&a, eta, beta, alpha)? };
            emit(out.as_deref(), |w| csvout::write_spectra_csv(w, &report))
        }
        Cmd::Flow { matrix, identity, mu, q, dt, steps, convention, x0, y0, out } => {
            let a = load_matrix(matrix.as_deref(), identity)?;
            let convention = parse_convention(&convention)?;
            let game = GameOracle::bilinear(a.clone())?;
            let n = game.dim();
            let x0 = opt_vector(x0.as_deref())?.unwrap_or_else(|| DVector::from_element(n, 1.0));
            let y0 = opt_vector(y0.as_deref())?.unwrap_or_else(|| DVector::from_element(n, 1.0));
            let s0 = FlowState::at_rest(x0, y0);
            let states = rk4_integrate(&game, &s0, mu, q, convention, dt, steps)?;
            let energy = flow_energies(&a, &states, mu)?;
            emit(out.as_deref(), |w| csvout::write_flow_csv(w, &states, &energy))
        }
        Cmd::Lyapunov { mode, h, mu, delta, q, steps, out } => {
            let mode = parse_mode(&mode)?;
            let delta = delta.unwrap_or(match mode {
                DecayMode::Discrete => 1.0,
                DecayMode::Continuous => 1e-3,
            });
            let spec = LyapunovSpec { mode, h, mu, delta, q, steps };
            let outcome = lyapunov_decay(&spec)?;
            emit(out.as_deref(), |w| csvout::write_lyapunov_csv(w, &outcome.trace))?;
            report_decay_summary(out.is_some(), &outcome);
            Ok(())
        }
        Cmd::Cost { iters, methods, out } => {
            let methods = match methods.as_deref() {
                Some(list) => parse_method_list(list)?,
                None => Method::all().to_vec(),
            };
            let game = GameOracle::bilinear(DMatrix::identity(2, 2))?;
            let rows = cost_table(&methods, &game, iters)?;
            emit(out.as_deref(), |w| csvout::write_cost_csv(w, &rows))
        }
    }
}

/// Run a config-file experiment, honoring the `MINMAX_SEED` override.
fn cmd_run(path: &Path) -> anyhow::Result<()> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut cfg = ExperimentConfig::from_text(&text)?;
    if let Ok(seed) = std::env::var("MINMAX_SEED") {
        cfg.seed = seed
            .parse::<u64>()
            .map_err(|_| anyhow!("MINMAX_SEED must be an unsigned integer, got `{seed}`"))?;
    }
    match cfg.experiment {
        ExperimentKind::Sweep => {
            let game = require_game(&cfg)?.build()?;
            let results = run_sweep(&game, &sweep_spec(&cfg))?;
            emit(out_path(&cfg).as_deref(), |w| csvout::write_run_csv(w, &results))
        }
        ExperimentKind::Alignment => {
            let align = cfg
                .alignment
                .clone()
                .ok_or_else(|| anyhow!("the alignment experiment needs an [alignment] section"))?;
            let angles = alignment_experiment(&align, &sweep_spec(&cfg))?;
            let dir = require_out_dir(&cfg)?;
            for angle in &angles {
                let file = dir.join(format!("run_theta_{}.csv", angle.theta_a_deg));
                csvout::to_file(&file, |w| csvout::write_run_csv(w, &angle.results))?;
            }
            csvout::to_file(&dir.join("summary.csv"), |w| {
                csvout::write_alignment_summary_csv(w, &angles)
            })?;
            println!("wrote {} angle files and summary.csv to {}", angles.len(), dir.display());
            Ok(())
        }
        ExperimentKind::OgdaFailure => {
            let (gammas, eta_grid) = match cfg.ogda.clone() {
                Some(spec) => (spec.gammas, spec.eta_grid),
                None => (vec![1.0, 3.0, 6.0], log_grid(1e-4, 1.0, 30)),
            };
            let report = ogda_failure_suite(&gammas, &eta_grid, cfg.max_iters)?;
            let dir = require_out_dir(&cfg)?;
            for &gamma in &gammas {
                let cells: Vec<_> =
                    report.cells.iter().filter(|c| c.gamma == gamma).cloned().collect();
                let file = dir.join(format!("grid_gamma_{gamma}.csv"));
                csvout::to_file(&file, |w| csvout::write_ogda_cells_csv(w, &cells))?;
            }
            csvout::to_file(&dir.join("summary.csv"), |w| {
                csvout::write_ogda_summary_csv(w, &report.summary)
            })?;
            println!("wrote {} grid files and summary.csv to {}", gammas.len(), dir.display());
            Ok(())
        }
        ExperimentKind::RateValidation => {
            let a = match &cfg.game {
                Some(spec) => bilinear_coupling(spec)?,
                None => DMatrix::identity(2, 2),
            };
            let rv = rate_validation(&a, cfg.max_iters, (100, 2_000))?;
            emit(out_path(&cfg).as_deref(), |w| {
                writeln!(w, "predicted_rate,fitted_rate,eta_alpha,window_lo,window_hi")?;
                writeln!(
                    w,
                    "{:e},{},{:e},{},{}",
                    rv.predicted_rate,
                    rv.fitted_rate.map(|r| format!("{r:e}")).unwrap_or_default(),
                    rv.eta_alpha,
                    rv.window.0,
                    rv.window.1,
                )
            })
        }
        ExperimentKind::LyapunovDecay => {
            let spec = cfg.lyapunov.clone().unwrap_or(LyapunovSpec {
                mode: DecayMode::Discrete,
                h: 0.0,
                mu: 1.0,
                delta: 1.0,
                q: None,
                steps: 200,
            });
            let outcome = lyapunov_decay(&spec)?;
            emit(out_path(&cfg).as_deref(), |w| csvout::write_lyapunov_csv(w, &outcome.trace))?;
            report_decay_summary(cfg.out.is_some(), &outcome);
            Ok(())
        }
        ExperimentKind::CostTable => {
            let methods = if cfg.methods.is_empty() {
                Method::all().to_vec()
            } else {
                cfg.methods.clone()
            };
            let game = match &cfg.game {
                Some(spec) => spec.build()?,
                None => GameOracle::bilinear(DMatrix::identity(2, 2))?,
            };
            let rows = cost_table(&methods, &game, cfg.cost_iters)?;
            emit(out_path(&cfg).as_deref(), |w| csvout::write_cost_csv(w, &rows))
        }
        ExperimentKind::Spectra => {
            let a = match &cfg.game {
                Some(spec) => bilinear_coupling(spec)?,
                None => DMatrix::identity(2, 2),
            };
            let spec = cfg.spectra.unwrap_or(minmax::bench::SpectraSpec {
                eta: 0.25,
                beta: 0.0,
                alpha: 0.25,
                gda: false,
            });
            let report = if spec.gda {
                gda_spectrum(&a, spec.eta)?
            } else {
                lead_spectrum(&a, spec.eta, spec.beta, spec.alpha)?
            };
            emit(out_path(&cfg).as_deref(), |w| csvout::write_spectra_csv(w, &report))
        }
        ExperimentKind::Flow => {
            let flow = cfg
                .flow
                .clone()
                .ok_or_else(|| anyhow!("the flow experiment needs a [flow] section"))?;
            let a = match &cfg.game {
                Some(spec) => bilinear_coupling(spec)?,
                None => DMatrix::identity(2, 2),
            };
            let game = GameOracle::bilinear(a.clone())?;
            let n = game.dim();
            let x0 = flow.x0.clone().unwrap_or_else(|| DVector::from_element(n, 1.0));
            let y0 = flow.y0.clone().unwrap_or_else(|| DVector::from_element(n, 1.0));
            let s0 = FlowState::at_rest(x0, y0);
            let states =
                rk4_integrate(&game, &s0, flow.mu, flow.q, flow.convention, flow.dt, flow.steps)?;
            let energy = flow_energies(&a, &states, flow.mu)?;
            emit(out_path(&cfg).as_deref(), |w| csvout::write_flow_csv(w, &states, &energy))
        }
    }
}

fn sweep_spec(cfg: &ExperimentConfig) -> SweepSpec {
    let methods = if cfg.methods.is_empty() {
        Method::all().to_vec()
    } else {
        cfg.methods.clone()
    };
    SweepSpec {
        methods,
        budget: cfg.budget,
        max_iters: cfg.max_iters,
        tol: cfg.tol,
        seed: cfg.seed,
        grids: cfg.grids.clone(),
    }
}

fn require_game(cfg: &ExperimentConfig) -> anyhow::Result<&GameSpec> {
    cfg.game
        .as_ref()
        .ok_or_else(|| anyhow!("this experiment needs a [game] section"))
}

/// The coupling matrix of a bilinear game spec, rejecting game kinds whose
/// curvature the spectral formulas do not model.
fn bilinear_coupling(spec: &GameSpec) -> anyhow::Result<DMatrix<f64>> {
    let game = spec.build()?;
    if game.kind() != GameKind::Bilinear {
        bail!("this experiment is defined for bilinear games; got {}", game.kind().name());
    }
    Ok(game.coupling().clone())
}

fn out_path(cfg: &ExperimentConfig) -> Option<PathBuf> {
    cfg.out.as_ref().map(PathBuf::from)
}

fn require_out_dir(cfg: &ExperimentConfig) -> anyhow::Result<PathBuf> {
    let dir = out_path(cfg)
        .ok_or_else(|| anyhow!("this experiment writes multiple files; set out = <directory>"))?;
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

/// Write CSV to the path when given, else to stdout.
fn emit<F>(out: Option<&Path>, write_fn: F) -> anyhow::Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => csvout::to_file(path, write_fn)?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_fn(&mut lock).context("writing to stdout")?;
        }
    }
    Ok(())
}

/// Human-readable decay verdict: stdout when the CSV went to a file, stderr
/// when the CSV occupies stdout.
fn report_decay_summary(csv_went_to_file: bool, outcome: &minmax::bench::LyapunovOutcome) {
    let line = format!(
        "rate={:e} q={:e} valid={} monotonicity_violations={} bound_violations={} fitted={}",
        outcome.rate,
        outcome.q,
        outcome.valid,
        outcome.report.monotonicity_violations,
        outcome.report.bound_violations,
        outcome
            .report
            .fitted_rate
            .map(|r| format!("{r:e}"))
            .unwrap_or_else(|| "n/a".to_string()),
    );
    if csv_went_to_file {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn load_matrix(path: Option<&Path>, identity: usize) -> anyhow::Result<DMatrix<f64>> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading matrix file {}", p.display()))?;
            // Accept one row per line as well as the inline `;` form.
            let inline = text.trim().replace('\n', ";");
            Ok(parse_matrix(&inline)?)
        }
        None => {
            if identity == 0 {
                bail!("identity dimension must be at least 1");
            }
            Ok(DMatrix::identity(identity, identity))
        }
    }
}

fn opt_vector(text: Option<&str>) -> anyhow::Result<Option<DVector<f64>>> {
    Ok(text.map(parse_vector).transpose()?)
}

fn parse_convention(s: &str) -> anyhow::Result<CouplingConvention> {
    match s {
        "single" => Ok(CouplingConvention::Single),
        "doubled" => Ok(CouplingConvention::Doubled),
        other => bail!("unknown convention `{other}`; expected single or doubled"),
    }
}

fn parse_mode(s: &str) -> anyhow::Result<DecayMode> {
    match s {
        "discrete" => Ok(DecayMode::Discrete),
        "continuous" => Ok(DecayMode::Continuous),
        other => bail!("unknown mode `{other}`; expected discrete or continuous"),
    }
}

fn parse_method_list(list: &str) -> anyhow::Result<Vec<Method>> {
    let methods: Vec<Method> = list
        .split(',')
        .map(str::trim)
        .filter(|m| !m.is_empty())
        .map(|m| Method::parse(m).ok_or_else(|| anyhow!("unknown method `{m}`")))
        .collect::<anyhow::Result<_>>()?;
    if methods.is_empty() {
        bail!("method list is empty");
    }
    Ok(methods)
}

fn flow_energies(a: &DMatrix<f64>, states: &[FlowState], mu: f64) -> anyhow::Result<Vec<f64>> {
    states
        .iter()
        .map(|s| Ok(continuous_energy_bilinear(a, &s.x, &s.y, &s.vx, &s.vy, mu)?))
        .collect()
}
