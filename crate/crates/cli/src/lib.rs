//! Command-line front end for the beamforming capacity library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod presets;
pub mod record;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use clap::{Args, Parser, Subcommand};

use crate::config::{resolve, CommandKind, CommonArgs, ExperimentConfig, Format};
use crate::record::{write_csv, write_json, Record};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Domain(beamcap::Error),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl From<beamcap::Error> for CliError {
    fn from(e: beamcap::Error) -> Self {
        match e {
            beamcap::Error::Resource(msg) => Self::Runtime(msg),
            other => Self::Domain(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Domain(_) => 3,
            Self::Runtime(_) | Self::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "beamcap", version, about = "Capacity bounds and overhead optimization for RVQ beamforming")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity bounds at a given estimation error and feedback length.
    Bounds(CommonArgs),
    /// Optimal training and feedback lengths.
    Optimize(CommonArgs),
    /// Effective rate against total overhead.
    Sweep(CommonArgs),
    /// Monte Carlo rates and beam-gain moments.
    Simulate(CommonArgs),
    /// Large-antenna predictions and convergence tables.
    Asymptotics(CommonArgs),
    /// Every run behind one of the reference figures.
    Figure(FigureArgs),
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// fig1 .. fig6
    #[arg(long)]
    pub name: String,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Parses `argv` (program name first), runs, and writes records to
/// stdout unless `--output` is given. Returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match dispatch(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Configurations `command` expands to.
pub fn plan(command: &Command) -> Result<Vec<ExperimentConfig>, CliError> {
    Ok(match command {
        Command::Bounds(a) => vec![resolve(CommandKind::Bounds, a)?],
        Command::Optimize(a) => vec![resolve(CommandKind::Optimize, a)?],
        Command::Sweep(a) => vec![resolve(CommandKind::Sweep, a)?],
        Command::Simulate(a) => vec![resolve(CommandKind::Simulate, a)?],
        Command::Asymptotics(a) => vec![resolve(CommandKind::Asymptotics, a)?],
        Command::Figure(f) => figure_plan(f)?,
    })
}

fn figure_plan(f: &FigureArgs) -> Result<Vec<ExperimentConfig>, CliError> {
    let a = &f.common;
    let system_flags = a.config.is_some()
        || a.channel.is_some()
        || a.nt.is_some()
        || a.nrbar.is_some()
        || a.snr_db.is_some()
        || a.lbar.is_some()
        || a.mu.is_some()
        || a.tbar.is_some()
        || a.bbar.is_some()
        || a.sigma_w2.is_some()
        || a.c.is_some()
        || a.bound.is_some()
        || a.finite_size
        || a.table_bits.is_some()
        || a.ratio.is_some()
        || a.optimized_split
        || a.references
        || a.nt_list.is_some();
    if system_flags {
        return Err(CliError::Usage(
            "figure presets fix the system parameters; only --trials, --seed, --workers, --fixed-codebook, \
             --points, --log-base, --format and --output may be given"
                .into(),
        ));
    }
    let mut presets = presets::figure_presets(&f.name)?;
    for p in &mut presets {
        if let Some(v) = a.trials {
            p.trials = v;
        }
        if let Some(v) = a.seed {
            p.seed = v;
        }
        if a.workers.is_some() {
            p.workers = a.workers;
        }
        if let Some(v) = a.points {
            p.points = v;
        }
        p.fixed_codebook |= a.fixed_codebook;
        if let Some(v) = a.log_base {
            p.output.log_base = v;
        }
        if let Some(v) = a.format {
            p.output.format = v;
        }
        if a.output.is_some() {
            p.output.path = a.output.clone();
        }
        p.validate()?;
    }
    Ok(presets)
}

fn dispatch(command: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    let plan = plan(command)?;
    let mut records: Vec<Record> = Vec::new();
    for cfg in &plan {
        records.extend(commands::execute(cfg)?);
    }
    let output = &plan.first().expect("every command plans at least one run").output;
    match &output.path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            emit(&mut w, output.format, &records)?;
            w.flush()?;
        }
        None => emit(out, output.format, &records)?,
    }
    Ok(())
}

fn emit(w: &mut dyn Write, format: Format, records: &[Record]) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(w, records),
        Format::Json => write_json(w, records),
    }
}
