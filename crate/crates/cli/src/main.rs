use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cavity_discord::dynamics::{cutoff_audit, Observable, DEFAULT_DT, DEFAULT_T_MAX};
use cavity_discord::model::ModelParams;
use cavity_discord_cli::config::{read_document as parse_document, resolve_with, Axis, ConfigError, Format, RawAxis, RawConfig, Violation};
use cavity_discord_cli::config::ScenarioConfig;
use cavity_discord_cli::output::{fmt_float, write_csv, write_json, write_states};
use cavity_discord_cli::scenario::run_scenario;
use cavity_discord_cli::settling::{angular, experiment_rates, settling_report, SettlingError, EXPERIMENT_G_HZ};
use clap::{ArgAction, Args, Parser, Subcommand};
use log::info;

const EXIT_CONFIG: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_NOT_SETTLED: u8 = 3;

/// Quantum discord and concurrence between two atoms in a noisy leaky cavity.
#[derive(Parser)]
#[command(name = "cavity-discord", version)]
struct Cli {
    /// TOML scenario document; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// More log output (-v info, -vv debug). RUST_LOG takes precedence.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct ParamArgs {
    /// Atom-cavity coupling (the unit of all rates).
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Noise intensity on the atoms.
    #[arg(long = "n-t")]
    n_t: Option<f64>,
    /// Noise intensity on the cavity.
    #[arg(long = "m-t")]
    m_t: Option<f64>,
    /// Highest retained photon number.
    #[arg(long)]
    cutoff: Option<i64>,
    #[arg(long = "omega-a")]
    omega_a: Option<f64>,
    #[arg(long = "omega-c")]
    omega_c: Option<f64>,
}

#[derive(Args, Default)]
struct RunArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Evolve mode reports every STRIDE-th step.
    #[arg(long)]
    stride: Option<i64>,
    /// name:start:stop:count with name one of n_t, m_t, gamma, kappa, n_t=m_t.
    /// Repeat for a second axis; replaces the axes of the config document.
    #[arg(long = "axis", value_name = "SPEC")]
    axes: Vec<String>,
    /// Output file (stdout when absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Also write the steady (or final) states as JSON to this file.
    #[arg(long = "dump-states", value_name = "PATH")]
    dump_states: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Time evolution from |g g 0>, one row per reported time and axis point.
    Evolve(RunArgs),
    /// Steady state of a single parameter point.
    Steady(RunArgs),
    /// Steady states over one or two parameter axes.
    Sweep(RunArgs),
    /// A figure scenario (fig2, fig3a-d, fig4, fig5a-d, fig6).
    Preset {
        name: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Smallest cutoff at which a steady-state observable is converged.
    AuditCutoff {
        #[command(flatten)]
        params: ParamArgs,
        /// discord, classical_correlation, mutual_information, concurrence,
        /// photon_number or atom_excitation.
        #[arg(long, default_value = "discord")]
        observable: String,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Discord settling time in seconds. Defaults: gamma = kappa = g/sqrt(20),
    /// n_t = 0.7, m_t = 0.
    SettlingReport {
        #[command(flatten)]
        params: ParamArgs,
        /// g/2π in Hz.
        #[arg(long = "g-hz", default_value_t = EXPERIMENT_G_HZ)]
        g_hz: f64,
        /// Settling band as a fraction of the plateau.
        #[arg(long = "tol-fraction", default_value_t = 0.01)]
        tol_fraction: f64,
        #[arg(long = "t-max", default_value_t = DEFAULT_T_MAX)]
        t_max: f64,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
    },
}

impl ParamArgs {
    fn raw(&self) -> RawConfig {
        RawConfig {
            g: self.g,
            gamma: self.gamma,
            kappa: self.kappa,
            n_t: self.n_t,
            m_t: self.m_t,
            cutoff: self.cutoff,
            omega_a: self.omega_a,
            omega_c: self.omega_c,
            ..RawConfig::default()
        }
    }
}

impl RunArgs {
    fn raw(&self) -> Result<RawConfig, ConfigError> {
        let mut raw = self.params.raw();
        raw.t_max = self.t_max;
        raw.dt = self.dt;
        raw.stride = self.stride;
        raw.output = self.output.clone();
        raw.format = self.format.clone();
        raw.dump_states = self.dump_states.clone();
        if !self.axes.is_empty() {
            let mut axes = Vec::new();
            let mut bad = Vec::new();
            for spec in &self.axes {
                match spec.parse::<Axis>() {
                    Ok(a) => axes.push(RawAxis::from(a)),
                    Err(message) => bad.push(Violation {
                        field: "--axis".into(),
                        line: None,
                        message,
                    }),
                }
            }
            if !bad.is_empty() {
                return Err(ConfigError(bad));
            }
            raw.axes = Some(axes);
        }
        Ok(raw)
    }
}

enum Failure {
    Config(String),
    Solver(String),
    NotSettled(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

/// A configuration document as read, with the problems found while reading
/// it. They are reported together with any found after merging the flags.
struct Document {
    raw: RawConfig,
    violations: Vec<Violation>,
}

impl Document {
    fn read(path: Option<&Path>) -> Result<Document, Failure> {
        let Some(path) = path else {
            return Ok(Document {
                raw: RawConfig::default(),
                violations: Vec::new(),
            });
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let (raw, violations) =
            parse_document(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        Ok(Document { raw, violations })
    }

    fn resolve(self, base: RawConfig, flags: RawConfig) -> Result<ScenarioConfig, Failure> {
        Ok(resolve_with(&base.merge(self.raw).merge(flags), self.violations)?)
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        None => Box::new(BufWriter::new(io::stdout().lock())),
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Solver(format!("cannot create {}: {e}", p.display())))?,
        )),
    })
}

fn io_failure(e: io::Error) -> Failure {
    Failure::Solver(format!("write failed: {e}"))
}

fn run(cfg: ScenarioConfig) -> Result<(), Failure> {
    info!("running {} over {} point(s)", cfg.mode.name(), cfg.points().len());
    let result = run_scenario(&cfg);
    let mut out = sink(cfg.output.as_deref())?;
    match cfg.format {
        Format::Csv => write_csv(&cfg, &result, &mut out),
        Format::Json => write_json(&cfg, &result, &mut out),
    }
    .and_then(|()| out.flush())
    .map_err(io_failure)?;
    if let Some(path) = &cfg.dump_states {
        let mut w = sink(Some(path))?;
        write_states(&result.states, &mut w).and_then(|()| w.flush()).map_err(io_failure)?;
    }
    let d = result.diagnostics;
    info!(
        "max trace error {:e}, max Hermiticity error {:e}, min eigenvalue {:e}, max swap asymmetry {:e}",
        d.max_trace_error, d.max_hermiticity_error, d.min_eigenvalue, d.max_swap_asymmetry
    );
    match result.failed_rows() {
        0 => Ok(()),
        n => Err(Failure::Solver(format!("{n} row(s) failed; see the error column"))),
    }
}

/// Parameters from the document and flags, without scenario-level checks.
fn params_only(document: Document, base: RawConfig, mut flags: RawConfig) -> Result<ModelParams, Failure> {
    flags.mode = Some("steady".into());
    flags.axes = Some(Vec::new());
    let mut document = document;
    document.raw.preset = None;
    Ok(document.resolve(base, flags)?.params)
}

fn audit(params: ModelParams, observable: &str, tol: f64) -> Result<(), Failure> {
    let observable = Observable::from_name(observable)
        .ok_or_else(|| Failure::Config(format!("unknown observable {observable:?}")))?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Failure::Config(format!("--tol must be > 0, got {tol}")));
    }
    let audit = cutoff_audit(&params, observable, tol).map_err(|e| Failure::Solver(e.to_string()))?;
    let mut out = io::stdout().lock();
    let write = |out: &mut dyn Write| -> io::Result<()> {
        writeln!(out, "# observable = {}", observable.name())?;
        writeln!(out, "# tol = {}", fmt_float(tol))?;
        writeln!(out, "# sufficient_cutoff = {}", audit.cutoff)?;
        writeln!(out, "cutoff,value")?;
        for (c, v) in &audit.values {
            writeln!(out, "{c},{}", fmt_float(*v))?;
        }
        Ok(())
    };
    write(&mut out).map_err(io_failure)
}

fn settling(params: ModelParams, g_hz: f64, fraction: f64, t_max: f64, dt: f64) -> Result<(), Failure> {
    let report = settling_report(&params, angular(g_hz), fraction, t_max, dt).map_err(|e| match e {
        SettlingError::Dynamics(e) => Failure::Solver(e.to_string()),
        other => Failure::Config(other.to_string()),
    })?;
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    println!("{text}");
    match report.settle_seconds {
        Some(s) => {
            eprintln!("discord settles at {s:.3e} s (plateau {:.6e})", report.plateau);
            Ok(())
        }
        None => Err(Failure::NotSettled(format!(
            "discord did not settle within t_max = {t_max} (last excursion at t = {:?})",
            report.last_excursion
        ))),
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let document = Document::read(cli.config.as_deref())?;
    let none = RawConfig::default;
    match cli.command {
        Command::Evolve(args) => {
            run(document.resolve(none(), RawConfig { mode: Some("evolve".into()), ..args.raw()? })?)
        }
        Command::Steady(args) => {
            run(document.resolve(none(), RawConfig { mode: Some("steady".into()), ..args.raw()? })?)
        }
        Command::Sweep(args) => {
            run(document.resolve(none(), RawConfig { mode: Some("sweep2d".into()), ..args.raw()? })?)
        }
        Command::Preset { name, run: args } => {
            let mut document = document;
            document.raw.mode = None;
            let flags = RawConfig {
                mode: Some("figure-preset".into()),
                preset: Some(name),
                ..args.raw()?
            };
            run(document.resolve(none(), flags)?)
        }
        Command::AuditCutoff { params, observable, tol } => {
            audit(params_only(document, none(), params.raw())?, &observable, tol)
        }
        Command::SettlingReport { params, g_hz, tol_fraction, t_max, dt } => {
            let (gamma, kappa) = experiment_rates();
            let defaults = RawConfig {
                gamma: Some(gamma),
                kappa: Some(kappa),
                n_t: Some(0.7),
                m_t: Some(0.0),
                ..RawConfig::default()
            };
            settling(params_only(document, defaults, params.raw())?, g_hz, tol_fraction, t_max, dt)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprint!("error: {m}");
            if !m.ends_with('\n') {
                eprintln!();
            }
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(Failure::NotSettled(m)) => {
            eprintln!("not settled: {m}");
            ExitCode::from(EXIT_NOT_SETTLED)
        }
    }
}
