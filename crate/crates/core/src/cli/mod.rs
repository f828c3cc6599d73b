//! Batch front-end: `hybridprobe <subcommand> --config <path> [--out <dir>]
//! [--threads N]`.
//!
//! Every run writes `meta.json` (library version, subcommand and the resolved
//! configuration; accepted back as `--config`) and one CSV per subcommand.
//! Floats are written with 17 significant digits and all computations are
//! deterministic, so identical configurations give byte-identical files.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 numerical
//! failure.

mod config;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser};
use rayon::prelude::*;

use crate::analysis::{
    closed_cutoff_convergence, entropy_scan, global_loss_ratio, open_cutoff_convergence, open_step_convergence,
    optimal_subsystem_map, ConvergenceReport, EntropyRecord, MapSpec, Scenario, Window,
};
use crate::estimation::{ClosedStencil, FisherRecord, InitialState, OpenStencil};
use crate::hilbert::Subsystem;
use crate::homodyne::optimize_lo_phase;
use crate::{Error, C64, VERSION};

pub use config::{ConvergenceConfig, HomodyneConfig, MapConfig, Meta, RunConfig, Study, TimeSpec};

#[derive(Debug, Parser)]
#[command(name = "hybridprobe", version, about = "Fisher-information scans of a qubit-cavity-mechanics hybrid system")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration, or a `meta.json` written by an earlier run.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "HYBRIDPROBE_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Subsystem von Neumann entropies.
    Entropy(CommonArgs),
    /// Single-parameter bounds (Q_ii)^-1, global and per subsystem.
    Qfi(CommonArgs),
    /// Nuisance bounds (Q^-1)_ii, global and per subsystem.
    Nuisance(CommonArgs),
    /// Joint scalar bound Tr[Q^-1], optionally with optimized homodyne detection.
    Joint {
        #[command(flatten)]
        common: CommonArgs,
        /// Add the optimized homodyne bound Tr[F^-1] on the cavity state.
        #[arg(long)]
        homodyne: bool,
    },
    /// Efficiency and optimal-subsystem map over a (g1, g2) grid.
    Map(CommonArgs),
    /// Closed against open (master-equation) bounds and loss ratios.
    Open(CommonArgs),
    /// Cutoff or integration-step convergence study.
    Convergence(CommonArgs),
}

/// Subcommand identity without arguments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Entropy,
    Qfi,
    Nuisance,
    Joint,
    Map,
    Open,
    Convergence,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Entropy => "entropy",
            Subcommand::Qfi => "qfi",
            Subcommand::Nuisance => "nuisance",
            Subcommand::Joint => "joint",
            Subcommand::Map => "map",
            Subcommand::Open => "open",
            Subcommand::Convergence => "convergence",
        }
    }
}

impl Command {
    fn parts(&self) -> (Subcommand, &CommonArgs, bool) {
        match self {
            Command::Entropy(c) => (Subcommand::Entropy, c, false),
            Command::Qfi(c) => (Subcommand::Qfi, c, false),
            Command::Nuisance(c) => (Subcommand::Nuisance, c, false),
            Command::Joint { common, homodyne } => (Subcommand::Joint, common, *homodyne),
            Command::Map(c) => (Subcommand::Map, c, false),
            Command::Open(c) => (Subcommand::Open, c, false),
            Command::Convergence(c) => (Subcommand::Convergence, c, false),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.into())
    }
}

fn config_err(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

fn numerical(e: Error) -> CliError {
    CliError::Numerical(e.to_string())
}

fn at_record(i: usize, t: f64) -> impl Fn(Error) -> CliError {
    move |e| CliError::Numerical(format!("record {i} (t = {t}): {e}"))
}

/// Files written by a successful run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub meta: PathBuf,
    pub csv: Vec<PathBuf>,
}

/// Parses arguments, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli.command) {
        Ok(out) => {
            for p in &out.csv {
                log::info!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("hybridprobe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(command: &Command) -> Result<RunOutput, CliError> {
    let (sub, args, homodyne) = command.parts();
    let cfg = RunConfig::load(&args.config).and_then(|c| c.resolve(sub)).map_err(config_err)?;
    let threads = match args.threads {
        Some(0) => return Err(CliError::Config("--threads must be >= 1".into())),
        Some(n) => n,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    fs::create_dir_all(&args.out)?;
    let meta = Meta { version: VERSION.into(), subcommand: sub.name().into(), homodyne, config: cfg.clone() };
    let meta_path = args.out.join("meta.json");
    fs::write(&meta_path, serde_json::to_string_pretty(&meta).map_err(io::Error::other)? + "\n")?;
    let csv = pool.install(|| execute(sub, homodyne, &cfg, &args.out))?;
    Ok(RunOutput { meta: meta_path, csv })
}

fn execute(sub: Subcommand, homodyne: bool, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    match sub {
        Subcommand::Entropy => {
            let path = out.join("entropy.csv");
            write_entropy(&path, &entropy(cfg)?)?;
            Ok(vec![path])
        }
        Subcommand::Qfi | Subcommand::Nuisance | Subcommand::Joint => {
            let records = closed_records(cfg)?;
            let path = out.join(format!("{}.csv", sub.name()));
            match sub {
                Subcommand::Qfi => write_bounds(&path, &records, &[Scenario::SingleG1, Scenario::SingleG2])?,
                Subcommand::Nuisance => write_bounds(&path, &records, &[Scenario::NuisanceG1, Scenario::NuisanceG2])?,
                _ => {
                    let hd = if homodyne { Some(homodyne_bounds(cfg)?) } else { None };
                    write_joint(&path, &records, hd.as_deref())?
                }
            }
            Ok(vec![path])
        }
        Subcommand::Map => {
            let spec = MapSpec {
                base: cfg.system,
                dims: cfg.dims(),
                stencil: cfg.stencil,
                grid: cfg.grid().map_err(config_err)?,
                initial: cfg.initial,
                g1_values: cfg.map.g1.clone(),
                g2_values: cfg.map.g2.clone(),
                windows: cfg.map.windows.clone(),
                scenarios: cfg.map.scenarios.clone(),
            };
            let rows = optimal_subsystem_map(&spec).map_err(numerical)?;
            let path = out.join("map.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["g1", "g2", "window", "scenario", "best_subsystem", "eta", "t_star", "excluded"])?;
            for r in rows {
                w.write_record([
                    num(r.g1),
                    num(r.g2),
                    r.window.to_string(),
                    r.scenario.to_string(),
                    r.best_subsystem.to_string(),
                    num(r.eta),
                    num(r.t_star),
                    r.excluded.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(vec![path])
        }
        Subcommand::Open => {
            let closed = closed_records(cfg)?;
            let open = open_records(cfg)?;
            let path = out.join("open.csv");
            write_open(&path, &closed, &open)?;
            let mu_path = out.join("mu.csv");
            let mut w = csv::Writer::from_path(&mu_path)?;
            w.write_record(["scenario", "window", "t_star", "closed", "open", "mu"])?;
            for window in Window::ALL {
                if !closed.iter().any(|r| window.contains(r.t)) {
                    continue;
                }
                for scenario in Scenario::ALL {
                    let mu = global_loss_ratio(&closed, &open, window, scenario).map_err(numerical)?;
                    w.write_record([
                        scenario.to_string(),
                        window.to_string(),
                        num(mu.t_star),
                        num(mu.closed),
                        num(mu.open),
                        num(mu.mu),
                    ])?;
                }
            }
            w.flush()?;
            Ok(vec![path, mu_path])
        }
        Subcommand::Convergence => {
            let grid = cfg.grid().map_err(config_err)?;
            let d = cfg.dims();
            let report = match cfg.convergence.study {
                Study::ClosedCutoff => closed_cutoff_convergence(&cfg.system, &d, &cfg.initial, &grid),
                Study::OpenCutoff => open_cutoff_convergence(
                    &cfg.system,
                    &cfg.rates,
                    &cfg.initial,
                    &d,
                    &cfg.fine_dims().map_err(config_err)?,
                    &grid,
                    &cfg.integrator,
                ),
                Study::OpenStep => {
                    open_step_convergence(&cfg.system, &cfg.rates, &cfg.initial, &d, &grid, &cfg.integrator)
                }
            }
            .map_err(numerical)?;
            log::info!("{}: max deviation {:.3e}", report.study, report.max_deviation);
            let path = out.join("convergence.csv");
            write_convergence(&path, &report)?;
            Ok(vec![path])
        }
    }
}

fn entropy(cfg: &RunConfig) -> Result<Vec<EntropyRecord>, CliError> {
    let InitialState::Pure { alpha, beta } = cfg.initial else {
        return Err(CliError::Config("entropy needs a pure initial state".into()));
    };
    let grid = cfg.grid().map_err(config_err)?;
    entropy_scan(&cfg.system, &cfg.dims(), C64::from(alpha), C64::from(beta), &grid).map_err(numerical)
}

fn closed_stencil(cfg: &RunConfig) -> Result<ClosedStencil, CliError> {
    Ok(ClosedStencil::new(&cfg.system, &cfg.dims(), &cfg.stencil, &cfg.initial)
        .map_err(numerical)?
        .with_eps_rel(cfg.eps_rel()))
}

fn closed_records(cfg: &RunConfig) -> Result<Vec<FisherRecord>, CliError> {
    let stencil = closed_stencil(cfg)?;
    let grid = cfg.grid().map_err(config_err)?;
    grid.times().par_iter().enumerate().map(|(i, &t)| stencil.record_at(t).map_err(at_record(i, t))).collect()
}

fn open_records(cfg: &RunConfig) -> Result<Vec<FisherRecord>, CliError> {
    let grid = cfg.grid().map_err(config_err)?;
    let mut stencil =
        OpenStencil::new(&cfg.system, &cfg.dims(), &cfg.stencil, &cfg.initial, &cfg.rates, cfg.integrator.dt)
            .map_err(numerical)?
            .with_eps_rel(cfg.eps_rel());
    let mut out = Vec::with_capacity(grid.len());
    for (i, &t) in grid.times().iter().enumerate() {
        stencil.advance_to(t).map_err(at_record(i, t))?;
        out.push(stencil.record().map_err(at_record(i, t))?);
    }
    Ok(out)
}

/// Optimized homodyne `Tr[F⁻¹]` and the optimal phase at each time.
fn homodyne_bounds(cfg: &RunConfig) -> Result<Vec<(f64, f64)>, CliError> {
    let stencil = closed_stencil(cfg)?;
    let grid = cfg.grid().map_err(config_err)?;
    grid.times()
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let family = stencil.reduced_family(t, Subsystem::Cavity).map_err(at_record(i, t))?;
            let scan = optimize_lo_phase(&family, &cfg.homodyne.grid, cfg.homodyne.phases).map_err(at_record(i, t))?;
            Ok((scan.best_scalar, scan.best_phase))
        })
        .collect()
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

const SUB_COLUMNS: [&str; 4] = ["global", "qubit", "cavity", "mech"];

fn entries(r: &FisherRecord) -> [&crate::estimation::FisherEntry; 4] {
    [&r.global, r.subsystem(Subsystem::Qubit), r.subsystem(Subsystem::Cavity), r.subsystem(Subsystem::Mechanics)]
}

fn column_prefix(s: Scenario) -> &'static str {
    match s {
        Scenario::SingleG1 => "invQ11",
        Scenario::SingleG2 => "invQ22",
        Scenario::NuisanceG1 => "Qinv11",
        Scenario::NuisanceG2 => "Qinv22",
        Scenario::Joint => "trQinv",
    }
}

fn write_entropy(path: &Path, rows: &[EntropyRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "S_qubit", "S_cavity", "S_mech"])?;
    for r in rows {
        w.write_record([num(r.t), num(r.qubit), num(r.cavity), num(r.mechanics)])?;
    }
    w.flush()?;
    Ok(())
}

fn write_bounds(path: &Path, records: &[FisherRecord], scenarios: &[Scenario]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    for &s in scenarios {
        header.extend(SUB_COLUMNS.iter().map(|c| format!("{}_{c}", column_prefix(s))));
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![num(r.t)];
        for &s in scenarios {
            row.extend(entries(r).iter().map(|e| num(s.bound(e))));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_joint(path: &Path, records: &[FisherRecord], homodyne: Option<&[(f64, f64)]>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> =
        std::iter::once("t".to_string()).chain(SUB_COLUMNS.iter().map(|c| format!("trQinv_{c}"))).collect();
    if homodyne.is_some() {
        header.extend(["trFinv_homodyne".to_string(), "lo_phase".to_string()]);
    }
    w.write_record(&header)?;
    for (i, r) in records.iter().enumerate() {
        let mut row = vec![num(r.t)];
        row.extend(entries(r).iter().map(|e| num(e.scalar)));
        if let Some(h) = homodyne {
            row.extend([num(h[i].0), num(h[i].1)]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_open(path: &Path, closed: &[FisherRecord], open: &[FisherRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    for s in Scenario::ALL {
        let p = column_prefix(s);
        header.push(format!("{p}_global_closed"));
        header.extend(SUB_COLUMNS.iter().map(|c| format!("{p}_{c}_open")));
    }
    w.write_record(&header)?;
    for (c, o) in closed.iter().zip(open) {
        let mut row = vec![num(o.t)];
        for s in Scenario::ALL {
            row.push(num(s.bound(&c.global)));
            row.extend(entries(o).iter().map(|e| num(s.bound(e))));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_convergence(path: &Path, report: &ConvergenceReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["study", "t", "observable", "coarse", "fine", "abs_diff"])?;
    for r in &report.rows {
        w.write_record([
            report.study.clone(),
            num(r.t),
            r.observable.clone(),
            num(r.coarse),
            num(r.fine),
            num(r.abs_diff),
        ])?;
    }
    w.flush()?;
    Ok(())
}
