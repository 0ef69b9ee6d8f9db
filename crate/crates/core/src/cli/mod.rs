//! Subcommands behind the `ipgg` binary.
//!
//! Every subcommand returns a [`Report`]: text for the terminal plus at most
//! one CSV or SVG artifact. CSV artifacts begin with a `# key = value` block
//! holding the full configuration and every default that shaped the output.

pub mod config;
pub mod csv;
pub mod svg;
pub mod verify;

use std::path::PathBuf;

use thiserror::Error;

use crate::analytic::{self, AnalysisError, Regime};
use crate::dynamics::{self, DynamicsError};
use crate::game::{GroupComposition, Strategy, ZeroCountRule};
use crate::oracle::{self, OracleError, RngSeed};
use crate::sweep::{self, Classified, SweepError, SweepParameter, DEFAULT_F_RANGE, DEFAULT_RP_RANGE, DEFAULT_STEPS};

use self::config::{ConfigError, RunConfig};
use self::csv::{float, optional, CsvError, CsvWriter};

pub const GRID_POINTS: usize = 1001;
pub const GRID_STEPS: usize = 100;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Clone, PartialEq, clap::Subcommand)]
pub enum Command {
    /// Q(x) and G(x) on a uniform grid over [0, 1]
    Gradient {
        #[arg(long, default_value_t = GRID_POINTS)]
        points: usize,
    },
    /// Per-group payoffs for every composition of co-players
    Payoffs,
    /// Bistability thresholds on F and the regime at the configured F
    Thresholds,
    /// Interior rest point, or why there is none
    Roots,
    /// Measure of initial states that reach full cooperation
    Basins,
    /// Regime and x* along F or r_p
    Sweep {
        #[arg(long, default_value = "f")]
        param: String,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
    },
    /// Regime and basin over an (F, r_p) grid
    Grid {
        #[arg(long, default_value_t = DEFAULT_F_RANGE.0)]
        f_lo: f64,
        #[arg(long, default_value_t = DEFAULT_F_RANGE.1)]
        f_hi: f64,
        #[arg(long, default_value_t = DEFAULT_RP_RANGE.0)]
        rp_lo: f64,
        #[arg(long, default_value_t = DEFAULT_RP_RANGE.1)]
        rp_hi: f64,
        #[arg(long, default_value_t = GRID_STEPS)]
        f_steps: usize,
        #[arg(long, default_value_t = GRID_STEPS)]
        rp_steps: usize,
    },
    /// Replicator trajectory from x0
    Integrate {
        #[arg(long)]
        x0: f64,
    },
    /// Monte Carlo payoff estimates against the closed forms
    Simulate {
        /// Population fraction; per-composition estimates when omitted
        #[arg(long)]
        x: Option<f64>,
    },
    /// Full oracle-agreement battery
    Verify,
    /// Render an emitted CSV as SVG
    Plot {
        input: PathBuf,
        #[arg(long)]
        title: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Gradient { .. } => "gradient",
            Command::Payoffs => "payoffs",
            Command::Thresholds => "thresholds",
            Command::Roots => "roots",
            Command::Basins => "basins",
            Command::Sweep { .. } => "sweep",
            Command::Grid { .. } => "grid",
            Command::Integrate { .. } => "integrate",
            Command::Simulate { .. } => "simulate",
            Command::Verify => "verify",
            Command::Plot { .. } => "plot",
        }
    }

    pub fn needs_config(&self) -> bool {
        !matches!(self, Command::Plot { .. })
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: CsvError },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_INVALID,
        }
    }
}

macro_rules! invalid_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Invalid(e.to_string())
            }
        })*
    };
}
invalid_from!(AnalysisError, DynamicsError, OracleError, SweepError);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub extension: &'static str,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub text: String,
    pub artifact: Option<Artifact>,
    pub verification_failed: bool,
}

impl Report {
    fn text(text: String) -> Self {
        Report {
            text,
            ..Default::default()
        }
    }

    fn csv(text: String, content: String) -> Self {
        Report {
            text,
            artifact: Some(Artifact {
                extension: "csv",
                content,
            }),
            verification_failed: false,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.verification_failed {
            EXIT_VERIFY_FAILED
        } else {
            EXIT_OK
        }
    }
}

/// Shortest decimal with at least one fractional digit, rounded to 10 places.
pub fn short(v: f64) -> String {
    let s = format!("{:.10}", v);
    let s = s.trim_end_matches('0');
    let s = if s.ends_with('.') { format!("{s}0") } else { s.to_string() };
    if s == "-0.0" {
        "0.0".into()
    } else {
        s
    }
}

fn metadata(command: &str, cfg: &RunConfig, extra: &[(&str, String)]) -> Vec<String> {
    let mut out = vec![format!("command = {command}")];
    out.extend(cfg.describe());
    out.extend(extra.iter().map(|(k, v)| format!("{k} = {v}")));
    out.extend(cfg.warnings.iter().map(|w| format!("warning: {w}")));
    out
}

pub fn run_subcommand(command: &Command, config: Option<&RunConfig>) -> Result<Report, CliError> {
    if let Command::Plot { input, title } = command {
        return plot(input, title.as_deref());
    }
    let cfg = config.ok_or_else(|| CliError::Invalid(format!("`{}` needs a configuration", command.name())))?;
    let model = &cfg.model;
    let name = command.name();

    match command {
        Command::Gradient { points } => {
            if *points < 2 {
                return Err(CliError::Invalid(format!("need at least 2 grid points (got {points})")));
            }
            let mut w = CsvWriter::new(&metadata(name, cfg, &[("points", points.to_string())]), &["x", "q", "g"]);
            let last = (*points - 1) as f64;
            let mut max_g = f64::NEG_INFINITY;
            for i in 0..*points {
                let x = i as f64 / last;
                let q = analytic::q_function(model, x)?;
                let g = analytic::gradient_of_selection(model, x)?;
                max_g = max_g.max(g);
                w.row(&[float(x), float(q), float(g)]);
            }
            Ok(Report::csv(format!("points={points} max_g={max_g:e}"), w.finish()))
        }
        Command::Payoffs => {
            let mut w = CsvWriter::new(&metadata(name, cfg, &[]), &["n_c", "n_d", "pi_c", "pi_d"]);
            for comp in GroupComposition::all(model.n()) {
                w.row(&[
                    comp.cooperators().to_string(),
                    comp.defectors().to_string(),
                    float(model.payoff(Strategy::Cooperate, comp)),
                    float(model.payoff(Strategy::Defect, comp)),
                ]);
            }
            Ok(Report::csv(format!("compositions={}", model.n()), w.finish()))
        }
        Command::Thresholds => {
            let th = analytic::thresholds(model);
            let regime = Classified(analytic::classify_regime(model)).label();
            Ok(Report::text(format!(
                "f_min={} f_max={} regime={regime}",
                short(th.f_min),
                short(th.f_max)
            )))
        }
        Command::Roots => Ok(Report::text(match analytic::classify_regime(model) {
            Ok(Regime::Bistable { x_star }) => format!("x_star={x_star}"),
            Ok(Regime::DefectionDominant) => "no interior root: F below f_min".into(),
            Ok(Regime::CooperationDominant) => "no interior root: F above f_max".into(),
            Err(AnalysisError::KnifeEdge { edge, .. }) => {
                format!("no interior root: F at {} (root on the boundary)", edge.label())
            }
            Err(AnalysisError::Degenerate { regime, .. }) => {
                format!("no interior root: no punishment, dynamics are {}", regime.label())
            }
            Err(e) => return Err(e.into()),
        })),
        Command::Basins => {
            let classified = Classified(analytic::classify_regime(model));
            Ok(Report::text(match classified.basin() {
                Some(b) => format!("basin={b} regime={}", classified.label()),
                None => format!("basin=undefined regime={}", classified.label()),
            }))
        }
        Command::Sweep { param, lo, hi, steps } => {
            let parameter = SweepParameter::parse(param)
                .ok_or_else(|| CliError::Invalid(format!("unknown sweep parameter `{param}` (use f or r_p)")))?;
            let (d_lo, d_hi) = parameter.default_range();
            let (lo, hi) = (lo.unwrap_or(d_lo), hi.unwrap_or(d_hi));
            let result = sweep::sweep_root(model, parameter, lo, hi, *steps)?;
            let meta = metadata(
                name,
                cfg,
                &[
                    ("param", parameter.label().to_string()),
                    ("lo", lo.to_string()),
                    ("hi", hi.to_string()),
                    ("steps", steps.to_string()),
                ],
            );
            let mut w = CsvWriter::new(&meta, &["param", "regime", "x_star", "basin"]);
            for p in &result.points {
                w.row(&[
                    float(p.value),
                    p.classified.label(),
                    optional(p.classified.x_star()),
                    optional(p.classified.basin()),
                ]);
            }
            let bistable = result.points.iter().filter(|p| p.classified.x_star().is_some()).count();
            Ok(Report::csv(format!("points={steps} bistable={bistable}"), w.finish()))
        }
        Command::Grid {
            f_lo,
            f_hi,
            rp_lo,
            rp_hi,
            f_steps,
            rp_steps,
        } => {
            let grid = sweep::regime_grid(model, *f_lo, *f_hi, *rp_lo, *rp_hi, *f_steps, *rp_steps)?;
            let meta = metadata(
                name,
                cfg,
                &[
                    ("f_range", format!("{f_lo}..{f_hi}")),
                    ("r_p_range", format!("{rp_lo}..{rp_hi}")),
                    ("f_steps", f_steps.to_string()),
                    ("r_p_steps", rp_steps.to_string()),
                ],
            );
            let mut w = CsvWriter::new(&meta, &["f", "r_p", "regime", "basin"]);
            for cell in &grid.cells {
                w.row(&[float(cell.f), float(cell.r_p), cell.classified.label(), optional(cell.classified.basin())]);
            }
            Ok(Report::csv(format!("cells={}", grid.cells.len()), w.finish()))
        }
        Command::Integrate { x0 } => {
            let c = &cfg.controls;
            let traj = dynamics::integrate(model, *x0, c.step, c.t_max, c.conv_tol)?;
            let mut w = CsvWriter::new(&metadata(name, cfg, &[("x0", x0.to_string())]), &["t", "x"]);
            for (t, x) in traj.times.iter().zip(&traj.states) {
                w.row(&[float(*t), float(*x)]);
            }
            let text = match traj.converged_to {
                Some(x) => format!("converged_to={x} t={}", traj.times.last().copied().unwrap_or(0.0)),
                None => format!("not converged by t_max={} x={}", c.t_max, traj.last_state()),
            };
            Ok(Report::csv(text, w.finish()))
        }
        Command::Simulate { x } => simulate(cfg, *x),
        Command::Verify => {
            let c = &cfg.controls;
            let outcome = verify::run(c.seed, c.samples, &metadata(name, cfg, &[]));
            let mut text: Vec<String> = outcome.suites.iter().map(|s| s.line()).collect();
            text.push(format!("verify {}", if outcome.passed() { "PASS" } else { "FAIL" }));
            Ok(Report {
                text: text.join("\n"),
                verification_failed: !outcome.passed(),
                artifact: Some(Artifact {
                    extension: "csv",
                    content: outcome.csv,
                }),
            })
        }
        Command::Plot { .. } => unreachable!("handled above"),
    }
}

fn simulate(cfg: &RunConfig, x: Option<f64>) -> Result<Report, CliError> {
    let model = &cfg.model;
    let c = &cfg.controls;
    let mut max_z: f64 = 0.0;
    let content = match x {
        Some(x) => {
            let meta = metadata("simulate", cfg, &[("x", x.to_string())]);
            let mut w = CsvWriter::new(&meta, &["x", "strategy", "mean", "std_error", "reference", "z"]);
            for (i, s) in Strategy::BOTH.into_iter().enumerate() {
                let est = oracle::estimate_avg_payoff(model, x, s, c.samples, RngSeed::new(c.seed, i as u64))?;
                let reference = analytic::binomial_avg_payoff(model, x, s, ZeroCountRule::Vanish)?;
                let z = est.z_score(reference);
                max_z = max_z.max(z);
                w.row(&[float(x), s.label().into(), float(est.mean), float(est.std_error), float(reference), float(z)]);
            }
            w.finish()
        }
        None => {
            let meta = metadata("simulate", cfg, &[]);
            let mut w = CsvWriter::new(&meta, &["n_c", "n_d", "strategy", "mean", "std_error", "reference", "z"]);
            let mut stream = 0;
            for comp in GroupComposition::all(model.n()) {
                for s in Strategy::BOTH {
                    let est = oracle::estimate_expected_payoff(model, s, comp, c.samples, RngSeed::new(c.seed, stream))?;
                    stream += 1;
                    let reference = model.payoff(s, comp);
                    let z = est.z_score(reference);
                    max_z = max_z.max(z);
                    w.row(&[
                        comp.cooperators().to_string(),
                        comp.defectors().to_string(),
                        s.label().into(),
                        float(est.mean),
                        float(est.std_error),
                        float(reference),
                        float(z),
                    ]);
                }
            }
            w.finish()
        }
    };
    Ok(Report::csv(format!("samples={} max_z={max_z:.3}", c.samples), content))
}

fn plot(input: &PathBuf, title: Option<&str>) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(input).map_err(|source| CliError::Io {
        path: input.clone(),
        source,
    })?;
    let table = csv::read(&text).map_err(|source| CliError::Csv {
        path: input.clone(),
        source,
    })?;
    let default_title = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let content = svg::render(&table, title.unwrap_or(&default_title));
    Ok(Report {
        text: format!("rows={}", table.rows.len()),
        artifact: Some(Artifact {
            extension: "svg",
            content,
        }),
        verification_failed: false,
    })
}
