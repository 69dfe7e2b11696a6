//! Plain-text experiment configuration: `key = value` lines grouped under
//! bracketed section headers, with `#` or `;` comments. Unknown sections and
//! keys are hard errors so that a typo cannot silently run the wrong
//! experiment.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bench::suites::build_alignment_game;
use crate::error::{Error, Result};
use crate::flow::CouplingConvention;
use crate::game::GameOracle;
use crate::lyapunov::DecayMode;
use crate::optim::Method;

/// Which driver a config file runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Generic tuned sweep on the configured game.
    Sweep,
    /// Tuned sweeps across coupling-alignment angles.
    Alignment,
    /// Exhaustive step-size grid on the separable-potential game.
    OgdaFailure,
    /// Fitted-versus-predicted contraction on a bilinear game.
    RateValidation,
    /// Energy decay along one trajectory.
    LyapunovDecay,
    /// Oracle-call totals per method.
    CostTable,
    /// Update-operator spectrum of the configured coupling matrix.
    Spectra,
    /// Continuous-dynamics integration.
    Flow,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "sweep" => Self::Sweep,
            "alignment" => Self::Alignment,
            "ogda_failure" => Self::OgdaFailure,
            "rate_validation" => Self::RateValidation,
            "lyapunov_decay" => Self::LyapunovDecay,
            "cost_table" => Self::CostTable,
            "spectra" => Self::Spectra,
            "flow" => Self::Flow,
            _ => return None,
        })
    }
}

/// How one hyperparameter is supplied to a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamSpec {
    /// Always this value; consumes no randomness.
    Fixed(f64),
    /// Seeded uniform choice among the entries.
    List(Vec<f64>),
    /// Seeded log-uniform draw from `[lo, hi]`.
    LogUniform { lo: f64, hi: f64 },
    /// Seeded uniform draw from `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

impl ParamSpec {
    /// Draw one value. List and range specs consume exactly one random
    /// number so draw sequences stay aligned across configurations.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            ParamSpec::Fixed(v) => *v,
            ParamSpec::List(vs) => vs[rng.gen_range(0..vs.len())],
            ParamSpec::LogUniform { lo, hi } => {
                let u: f64 = rng.gen_range(lo.ln()..=hi.ln());
                u.exp()
            }
            ParamSpec::Uniform { lo, hi } => rng.gen_range(*lo..=*hi),
        }
    }

    fn parse(key: &str, value: &str) -> Result<Self> {
        let mut tokens = value.split_whitespace();
        let tag = tokens
            .next()
            .ok_or_else(|| Error::Config(format!("empty value for grid key `{key}`")))?;
        let rest: Vec<&str> = tokens.collect();
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("grid key `{key}`: `{s}` is not a number")))
        };
        match tag {
            "fixed" => {
                if rest.len() != 1 {
                    return Err(Error::Config(format!("grid key `{key}`: fixed takes one value")));
                }
                Ok(ParamSpec::Fixed(num(rest[0])?))
            }
            "list" => {
                if rest.is_empty() {
                    return Err(Error::Config(format!("grid key `{key}`: list needs entries")));
                }
                Ok(ParamSpec::List(rest.iter().map(|s| num(s)).collect::<Result<_>>()?))
            }
            "log_uniform" | "uniform" => {
                if rest.len() != 2 {
                    return Err(Error::Config(format!("grid key `{key}`: {tag} takes lo hi")));
                }
                let (lo, hi) = (num(rest[0])?, num(rest[1])?);
                if hi < lo {
                    return Err(Error::Config(format!("grid key `{key}`: hi < lo")));
                }
                if tag == "log_uniform" {
                    if lo <= 0.0 {
                        return Err(Error::Config(format!(
                            "grid key `{key}`: log_uniform needs lo > 0"
                        )));
                    }
                    Ok(ParamSpec::LogUniform { lo, hi })
                } else {
                    Ok(ParamSpec::Uniform { lo, hi })
                }
            }
            _ => Err(Error::Config(format!(
                "grid key `{key}`: unknown spec `{tag}` (use fixed/list/log_uniform/uniform)"
            ))),
        }
    }
}

/// Sampling specs for the four swept hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub eta: ParamSpec,
    pub beta: ParamSpec,
    pub alpha: ParamSpec,
    pub gamma_reg: ParamSpec,
}

impl Default for GridSpec {
    /// The tuning distributions used throughout the benchmarks: log-uniform
    /// step size, interaction strength, and regularization weight over
    /// `[1e-4, 1]`; momentum uniform over `[-0.5, 0.9]`.
    fn default() -> Self {
        Self {
            eta: ParamSpec::LogUniform { lo: 1e-4, hi: 1.0 },
            beta: ParamSpec::Uniform { lo: -0.5, hi: 0.9 },
            alpha: ParamSpec::LogUniform { lo: 1e-4, hi: 1.0 },
            gamma_reg: ParamSpec::LogUniform { lo: 1e-4, hi: 1.0 },
        }
    }
}

/// Game description from the `[game]` section.
#[derive(Debug, Clone, PartialEq)]
pub enum GameSpec {
    /// Bilinear game with an explicit coupling matrix.
    Bilinear { a: DMatrix<f64> },
    /// Full quadratic game with explicit curvature and coupling blocks.
    Quadratic { h: DMatrix<f64>, a: DMatrix<f64>, g: DMatrix<f64> },
    /// Scalar quadratic game with curvature `h` on both players.
    QuadraticScalar { h: f64 },
    /// Separable potential game `gamma (x^2 - y^2)`.
    ScaledSeparable { gamma: f64 },
    /// Bilinear game with identity coupling of dimension `n`.
    Identity { n: usize },
    /// Bilinear game with seeded standard-normal coupling entries.
    Gaussian { n: usize, seed: u64 },
    /// Rotation-conjugated diagonal quadratic game at a coupling angle.
    Alignment { theta_a_deg: f64, lambda1: f64, lambda2: f64 },
}

impl GameSpec {
    /// Instantiate the oracle this spec describes.
    pub fn build(&self) -> Result<GameOracle> {
        match self {
            GameSpec::Bilinear { a } => GameOracle::bilinear(a.clone()),
            GameSpec::Quadratic { h, a, g } => GameOracle::quadratic(h.clone(), a.clone(), g.clone()),
            GameSpec::QuadraticScalar { h } => Ok(GameOracle::quadratic_scalar(*h)),
            GameSpec::ScaledSeparable { gamma } => Ok(GameOracle::scaled_separable(*gamma)),
            GameSpec::Identity { n } => GameOracle::bilinear(DMatrix::identity(*n, *n)),
            GameSpec::Gaussian { n, seed } => {
                use rand::SeedableRng;
                use rand_distr::{Distribution, StandardNormal};
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let a = DMatrix::from_fn(*n, *n, |_, _| StandardNormal.sample(&mut rng));
                GameOracle::bilinear(a)
            }
            GameSpec::Alignment { theta_a_deg, lambda1, lambda2 } => {
                build_alignment_game(*theta_a_deg, *lambda1, *lambda2)
            }
        }
    }
}

/// Settings for the continuous-dynamics experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub mu: f64,
    pub q: f64,
    pub dt: f64,
    pub steps: usize,
    pub convention: CouplingConvention,
    pub x0: Option<DVector<f64>>,
    pub y0: Option<DVector<f64>>,
}

/// Settings for the energy-decay experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSpec {
    pub mode: DecayMode,
    /// Curvature of the scalar-quadratic game (discrete mode).
    pub h: f64,
    pub mu: f64,
    /// Iterate step (discrete) or integrator step (continuous).
    pub delta: f64,
    /// Interaction strength; `None` picks the proven prescription.
    pub q: Option<f64>,
    pub steps: usize,
}

/// Settings for the alignment experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentSpec {
    pub thetas_deg: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Settings for the step-size grid on the separable-potential game.
#[derive(Debug, Clone, PartialEq)]
pub struct OgdaSpec {
    pub gammas: Vec<f64>,
    pub eta_grid: Vec<f64>,
}

/// Settings for the spectra experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectraSpec {
    pub eta: f64,
    pub beta: f64,
    pub alpha: f64,
    /// Report the plain descent-ascent spectrum instead of the
    /// interaction-update spectrum.
    pub gda: bool,
}

/// A parsed experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub budget: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub out: Option<String>,
    pub game: Option<GameSpec>,
    pub methods: Vec<Method>,
    pub grids: GridSpec,
    pub alignment: Option<AlignmentSpec>,
    pub ogda: Option<OgdaSpec>,
    pub flow: Option<FlowSpec>,
    pub lyapunov: Option<LyapunovSpec>,
    pub spectra: Option<SpectraSpec>,
    pub cost_iters: usize,
}

/// Parse `1,2;3,4` (rows separated by `;`, entries by `,`) into a matrix.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<&str> = text.split(';').map(str::trim).filter(|r| !r.is_empty()).collect();
    if rows.is_empty() {
        return Err(Error::Config("empty matrix literal".to_string()));
    }
    let mut data = Vec::new();
    let mut ncols = None;
    for row in &rows {
        let entries: Vec<f64> = row
            .split(',')
            .map(str::trim)
            .filter(|e| !e.is_empty())
            .map(|e| {
                e.parse::<f64>()
                    .map_err(|_| Error::Config(format!("matrix entry `{e}` is not a number")))
            })
            .collect::<Result<_>>()?;
        match ncols {
            None => ncols = Some(entries.len()),
            Some(c) if c != entries.len() => {
                return Err(Error::Config(format!(
                    "ragged matrix literal: row lengths {c} and {}",
                    entries.len()
                )))
            }
            _ => {}
        }
        data.extend(entries);
    }
    let ncols = ncols.unwrap_or(0);
    if ncols == 0 {
        return Err(Error::Config("matrix literal has empty rows".to_string()));
    }
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &data))
}

/// Parse `1,0,2.5` into a vector.
pub fn parse_vector(text: &str) -> Result<DVector<f64>> {
    let entries: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .filter(|e| !e.is_empty())
        .map(|e| {
            e.parse::<f64>()
                .map_err(|_| Error::Config(format!("vector entry `{e}` is not a number")))
        })
        .collect::<Result<_>>()?;
    if entries.is_empty() {
        return Err(Error::Config("empty vector literal".to_string()));
    }
    Ok(DVector::from_vec(entries))
}

/// One parsed section: ordered `(key, value)` pairs.
struct Section {
    name: String,
    entries: Vec<(String, String)>,
}

fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections = vec![Section { name: String::new(), entries: Vec::new() }];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| {
                    Error::Config(format!("line {}: unterminated section header", lineno + 1))
                })?
                .trim();
            if name.is_empty() {
                return Err(Error::Config(format!("line {}: empty section name", lineno + 1)));
            }
            sections.push(Section { name: name.to_string(), entries: Vec::new() });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
        })?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        sections
            .last_mut()
            .expect("sections start nonempty")
            .entries
            .push((key, value.trim().to_string()));
    }
    Ok(sections)
}

/// Key-checked view of one section.
struct SectionView<'a> {
    name: &'a str,
    entries: &'a [(String, String)],
}

impl<'a> SectionView<'a> {
    fn get(&self, key: &str) -> Option<&'a str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&'a str> {
        self.get(key).ok_or_else(|| {
            Error::Config(format!("missing key `{key}` in section [{}]", self.display_name()))
        })
    }

    fn display_name(&self) -> &str {
        if self.name.is_empty() {
            "top level"
        } else {
            self.name
        }
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (k, _) in self.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config(format!(
                    "unknown key `{k}` in section [{}]; allowed: {}",
                    self.display_name(),
                    allowed.join(", ")
                )));
            }
            if !seen.insert(k.clone()) {
                return Err(Error::Config(format!(
                    "duplicate key `{k}` in section [{}]",
                    self.display_name()
                )));
            }
        }
        Ok(())
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("key `{key}`: `{v}` is not a number")))
            })
            .transpose()
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Error::Config(format!("key `{key}`: `{v}` is not an integer")))
            })
            .transpose()
            .map(|o| o.unwrap_or(default))
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| Error::Config(format!("key `{key}`: `{v}` is not an integer")))
            })
            .transpose()
            .map(|o| o.unwrap_or(default))
    }

    fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|e| !e.is_empty())
                    .map(|e| {
                        e.parse::<f64>().map_err(|_| {
                            Error::Config(format!("key `{key}`: `{e}` is not a number"))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .transpose()
    }
}

/// Evenly log-spaced grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && count >= 2, "log grid needs 0 < lo <= hi and count >= 2");
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

impl ExperimentConfig {
    /// Parse a full config file.
    pub fn from_text(text: &str) -> Result<Self> {
        let sections = parse_sections(text)?;
        let mut top = None;
        let mut game = None;
        let mut methods = None;
        let mut grid = None;
        let mut alignment = None;
        let mut ogda = None;
        let mut flow = None;
        let mut lyap = None;
        let mut spectra = None;
        let mut cost = None;
        for s in &sections {
            let view = SectionView { name: &s.name, entries: &s.entries };
            let slot: &mut Option<SectionView> = match s.name.as_str() {
                "" => &mut top,
                "game" => &mut game,
                "methods" => &mut methods,
                "grid" => &mut grid,
                "alignment" => &mut alignment,
                "ogda" => &mut ogda,
                "flow" => &mut flow,
                "lyapunov" => &mut lyap,
                "spectra" => &mut spectra,
                "cost" => &mut cost,
                other => {
                    return Err(Error::Config(format!("unknown section [{other}]")));
                }
            };
            if s.name.is_empty() && s.entries.is_empty() {
                continue;
            }
            if slot.is_some() {
                return Err(Error::Config(format!("duplicate section [{}]", s.name)));
            }
            *slot = Some(view);
        }

        let top = top.ok_or_else(|| {
            Error::Config("config must start with top-level keys (experiment = ...)".to_string())
        })?;
        top.check_keys(&["experiment", "seed", "budget", "max_iters", "tol", "out"])?;
        let experiment_name = top.require("experiment")?;
        let experiment = ExperimentKind::parse(experiment_name).ok_or_else(|| {
            Error::Config(format!(
                "unknown experiment `{experiment_name}`; expected one of sweep, alignment, \
                 ogda_failure, rate_validation, lyapunov_decay, cost_table, spectra, flow"
            ))
        })?;
        let seed = top.u64_or("seed", 0)?;
        let budget = top.usize_or("budget", 200)?;
        if budget == 0 {
            return Err(Error::Config("budget must be at least 1".to_string()));
        }
        let max_iters = top.usize_or("max_iters", 10_000)?;
        let tol = top.f64_or("tol", 1e-12)?;
        let out = top.get("out").map(str::to_string);

        let game = game.map(|v| Self::parse_game(&v)).transpose()?;
        let methods = methods.map(|v| Self::parse_methods(&v)).transpose()?.unwrap_or_default();
        let grids = grid.map(|v| Self::parse_grid(&v)).transpose()?.unwrap_or_default();
        let alignment = alignment.map(|v| Self::parse_alignment(&v)).transpose()?;
        let ogda = ogda.map(|v| Self::parse_ogda(&v)).transpose()?;
        let flow = flow.map(|v| Self::parse_flow(&v)).transpose()?;
        let lyapunov = lyap.map(|v| Self::parse_lyapunov(&v)).transpose()?;
        let spectra = spectra.map(|v| Self::parse_spectra(&v)).transpose()?;
        let cost_iters = match cost {
            Some(v) => {
                v.check_keys(&["iters"])?;
                v.usize_or("iters", 100)?
            }
            None => 100,
        };

        Ok(Self {
            experiment,
            seed,
            budget,
            max_iters,
            tol,
            out,
            game,
            methods,
            grids,
            alignment,
            ogda,
            flow,
            lyapunov,
            spectra,
            cost_iters,
        })
    }

    fn parse_game(v: &SectionView) -> Result<GameSpec> {
        v.check_keys(&[
            "kind",
            "construct",
            "a",
            "h",
            "g",
            "h_scalar",
            "gamma",
            "n",
            "gauss_seed",
            "theta_a_deg",
            "lambda1",
            "lambda2",
        ])?;
        if let Some(construct) = v.get("construct") {
            return match construct {
                "identity" => Ok(GameSpec::Identity { n: v.usize_or("n", 2)? }),
                "gaussian" => {
                    Ok(GameSpec::Gaussian { n: v.usize_or("n", 2)?, seed: v.u64_or("gauss_seed", 0)? })
                }
                "alignment" => Ok(GameSpec::Alignment {
                    theta_a_deg: v.f64_or("theta_a_deg", 90.0)?,
                    lambda1: v.f64_or("lambda1", 1.0)?,
                    lambda2: v.f64_or("lambda2", 2.0)?,
                }),
                other => Err(Error::Config(format!(
                    "unknown game constructor `{other}`; expected identity, gaussian, or alignment"
                ))),
            };
        }
        match v.require("kind")? {
            "bilinear" => Ok(GameSpec::Bilinear { a: parse_matrix(v.require("a")?)? }),
            "quadratic" => Ok(GameSpec::Quadratic {
                h: parse_matrix(v.require("h")?)?,
                a: parse_matrix(v.require("a")?)?,
                g: parse_matrix(v.require("g")?)?,
            }),
            "quadratic_scalar" => Ok(GameSpec::QuadraticScalar { h: v.f64_or("h_scalar", 0.0)? }),
            "scaled_separable" => Ok(GameSpec::ScaledSeparable { gamma: v.f64_or("gamma", 1.0)? }),
            other => Err(Error::Config(format!(
                "unknown game kind `{other}`; expected bilinear, quadratic, quadratic_scalar, \
                 or scaled_separable"
            ))),
        }
    }

    fn parse_methods(v: &SectionView) -> Result<Vec<Method>> {
        v.check_keys(&["list"])?;
        let list = v.require("list")?;
        let methods: Vec<Method> = list
            .split(',')
            .map(str::trim)
            .filter(|m| !m.is_empty())
            .map(|m| {
                Method::parse(m)
                    .ok_or_else(|| Error::Config(format!("unknown method `{m}` in [methods]")))
            })
            .collect::<Result<_>>()?;
        if methods.is_empty() {
            return Err(Error::Config("[methods] list is empty".to_string()));
        }
        Ok(methods)
    }

    fn parse_grid(v: &SectionView) -> Result<GridSpec> {
        v.check_keys(&["eta", "beta", "alpha", "gamma_reg"])?;
        let mut grids = GridSpec::default();
        if let Some(raw) = v.get("eta") {
            grids.eta = ParamSpec::parse("eta", raw)?;
        }
        if let Some(raw) = v.get("beta") {
            grids.beta = ParamSpec::parse("beta", raw)?;
        }
        if let Some(raw) = v.get("alpha") {
            grids.alpha = ParamSpec::parse("alpha", raw)?;
        }
        if let Some(raw) = v.get("gamma_reg") {
            grids.gamma_reg = ParamSpec::parse("gamma_reg", raw)?;
        }
        Ok(grids)
    }

    fn parse_alignment(v: &SectionView) -> Result<AlignmentSpec> {
        v.check_keys(&["theta_a_deg", "lambda1", "lambda2"])?;
        let thetas_deg = v
            .f64_list("theta_a_deg")?
            .ok_or_else(|| Error::Config("[alignment] needs theta_a_deg".to_string()))?;
        if thetas_deg.is_empty() {
            return Err(Error::Config("[alignment] theta_a_deg list is empty".to_string()));
        }
        Ok(AlignmentSpec {
            thetas_deg,
            lambda1: v.f64_or("lambda1", 1.0)?,
            lambda2: v.f64_or("lambda2", 2.0)?,
        })
    }

    fn parse_ogda(v: &SectionView) -> Result<OgdaSpec> {
        v.check_keys(&["gamma", "eta_lo", "eta_hi", "eta_count"])?;
        let gammas = v
            .f64_list("gamma")?
            .ok_or_else(|| Error::Config("[ogda] needs gamma".to_string()))?;
        if gammas.is_empty() || gammas.iter().any(|g| *g <= 0.0) {
            return Err(Error::Config("[ogda] gamma entries must be positive".to_string()));
        }
        let lo = v.f64_or("eta_lo", 1e-4)?;
        let hi = v.f64_or("eta_hi", 1.0)?;
        let count = v.usize_or("eta_count", 30)?;
        if !(lo > 0.0 && hi >= lo && count >= 2) {
            return Err(Error::Config(
                "[ogda] step grid needs 0 < eta_lo <= eta_hi and eta_count >= 2".to_string(),
            ));
        }
        Ok(OgdaSpec { gammas, eta_grid: log_grid(lo, hi, count) })
    }

    fn parse_flow(v: &SectionView) -> Result<FlowSpec> {
        v.check_keys(&["mu", "q", "dt", "steps", "convention", "x0", "y0"])?;
        let convention = match v.get("convention").unwrap_or("single") {
            "single" => CouplingConvention::Single,
            "doubled" => CouplingConvention::Doubled,
            other => {
                return Err(Error::Config(format!(
                    "unknown coupling convention `{other}`; expected single or doubled"
                )))
            }
        };
        Ok(FlowSpec {
            mu: v.f64_or("mu", 1.0)?,
            q: v.f64_or("q", 3.0)?,
            dt: v.f64_or("dt", 1e-3)?,
            steps: v.usize_or("steps", 10_000)?,
            convention,
            x0: v.get("x0").map(parse_vector).transpose()?,
            y0: v.get("y0").map(parse_vector).transpose()?,
        })
    }

    fn parse_lyapunov(v: &SectionView) -> Result<LyapunovSpec> {
        v.check_keys(&["mode", "h", "mu", "delta", "q", "steps"])?;
        let mode = match v.get("mode").unwrap_or("discrete") {
            "discrete" => DecayMode::Discrete,
            "continuous" => DecayMode::Continuous,
            other => {
                return Err(Error::Config(format!(
                    "unknown lyapunov mode `{other}`; expected discrete or continuous"
                )))
            }
        };
        Ok(LyapunovSpec {
            mode,
            h: v.f64_or("h", 0.0)?,
            mu: v.f64_or("mu", 1.0)?,
            delta: v.f64_or("delta", if mode == DecayMode::Discrete { 1.0 } else { 1e-3 })?,
            q: v.f64("q")?,
            steps: v.usize_or("steps", 10_000)?,
        })
    }

    fn parse_spectra(v: &SectionView) -> Result<SpectraSpec> {
        v.check_keys(&["eta", "beta", "alpha", "operator"])?;
        let gda = match v.get("operator").unwrap_or("lead") {
            "lead" => false,
            "gda" => true,
            other => {
                return Err(Error::Config(format!(
                    "unknown operator `{other}`; expected lead or gda"
                )))
            }
        };
        Ok(SpectraSpec {
            eta: v.f64_or("eta", 0.25)?,
            beta: v.f64_or("beta", 0.0)?,
            alpha: v.f64_or("alpha", 0.25)?,
            gda,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GameKind;

    #[test]
    fn parses_matrix_and_vector_literals() {
        let m = parse_matrix("1, 0; 0.5, 2").unwrap();
        assert_eq!(m.nrows(), 2);
        assert_eq!(m[(1, 0)], 0.5);
        assert!(parse_matrix("1,0;1").is_err());
        assert!(parse_matrix("").is_err());
        let v = parse_vector("1, 2.5, -3").unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v[2], -3.0);
    }

    #[test]
    fn parses_minimal_sweep_config() {
        let cfg = ExperimentConfig::from_text(
            "experiment = sweep\nseed = 7\nbudget = 5\n\n[game]\nkind = bilinear\na = 1,0;0,1\n\n\
             [methods]\nlist = lead, gda\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Sweep);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.budget, 5);
        assert_eq!(cfg.max_iters, 10_000);
        assert_eq!(cfg.methods, vec![Method::Lead, Method::Gda]);
        let game = cfg.game.unwrap().build().unwrap();
        assert_eq!(game.kind(), GameKind::Bilinear);
        assert_eq!(game.dim(), 2);
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        assert!(matches!(
            ExperimentConfig::from_text("experiment = sweep\nbogus = 1\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_text("experiment = sweep\n\n[nope]\nx = 1\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_text("experiment = dance\n"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_text("experiment = sweep\nseed = 1\nseed = 2\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn named_constructors_build() {
        let cfg = ExperimentConfig::from_text(
            "experiment = sweep\n[game]\nconstruct = identity\nn = 3\n",
        )
        .unwrap();
        let game = cfg.game.unwrap().build().unwrap();
        assert_eq!(game.dim(), 3);

        let cfg = ExperimentConfig::from_text(
            "experiment = sweep\n[game]\nconstruct = gaussian\nn = 4\ngauss_seed = 11\n",
        )
        .unwrap();
        let g1 = cfg.game.clone().unwrap().build().unwrap();
        let g2 = cfg.game.unwrap().build().unwrap();
        assert_eq!(g1.coupling(), g2.coupling(), "seeded constructor must be deterministic");

        let cfg = ExperimentConfig::from_text(
            "experiment = sweep\n[game]\nconstruct = alignment\ntheta_a_deg = 90\n\
             lambda1 = 1\nlambda2 = 2\n",
        )
        .unwrap();
        let game = cfg.game.unwrap().build().unwrap();
        assert_eq!(game.kind(), GameKind::QuadraticMatrix);
    }

    #[test]
    fn grid_specs_parse_and_draw_in_range() {
        use rand::SeedableRng;
        let cfg = ExperimentConfig::from_text(
            "experiment = sweep\n[grid]\neta = log_uniform 1e-3 1\nbeta = fixed 0.5\n\
             alpha = list 0.1 0.2 0.3\ngamma_reg = uniform 0 2\n",
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let eta = cfg.grids.eta.draw(&mut rng);
            assert!((1e-3..=1.0).contains(&eta));
            assert_eq!(cfg.grids.beta.draw(&mut rng), 0.5);
            let alpha = cfg.grids.alpha.draw(&mut rng);
            assert!([0.1, 0.2, 0.3].contains(&alpha));
            let g = cfg.grids.gamma_reg.draw(&mut rng);
            assert!((0.0..=2.0).contains(&g));
        }
    }

    #[test]
    fn ogda_section_expands_to_log_grid() {
        let cfg = ExperimentConfig::from_text(
            "experiment = ogda_failure\n[ogda]\ngamma = 1, 6\neta_lo = 1e-4\neta_hi = 1\n\
             eta_count = 30\n",
        )
        .unwrap();
        let ogda = cfg.ogda.unwrap();
        assert_eq!(ogda.gammas, vec![1.0, 6.0]);
        assert_eq!(ogda.eta_grid.len(), 30);
        assert!((ogda.eta_grid[0] - 1e-4).abs() < 1e-12);
        assert!((ogda.eta_grid[29] - 1.0).abs() < 1e-12);
        let mid_ratio = ogda.eta_grid[1] / ogda.eta_grid[0];
        for w in ogda.eta_grid.windows(2) {
            assert!((w[1] / w[0] - mid_ratio).abs() < 1e-9, "grid must be evenly log-spaced");
        }
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = ExperimentConfig::from_text(
            "# leading comment\nexperiment = flow\n; another\n\n[flow]\nmu = 2\nq = 4\n",
        )
        .unwrap();
        let flow = cfg.flow.unwrap();
        assert_eq!(flow.mu, 2.0);
        assert_eq!(flow.q, 4.0);
        assert_eq!(flow.convention, CouplingConvention::Single);
    }
}
