//! Resolved experiment parameters, from flags layered over a config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use beamcap::channel::snr_from_db;
use beamcap::montecarlo::{SimulationSpec, DEFAULT_RATE_TRIALS};
use beamcap::{BoundKind, ChannelKind};
use clap::{Args, ValueEnum};

use crate::CliError;

pub const DEFAULT_TABLE_BITS: u32 = 12;
pub const DEFAULT_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Bounds,
    Optimize,
    Sweep,
    Simulate,
    Asymptotics,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Bounds => "bounds",
            Self::Optimize => "optimize",
            Self::Sweep => "sweep",
            Self::Simulate => "simulate",
            Self::Asymptotics => "asymptotics",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Miso,
    Mimo,
}

impl From<ChannelArg> for ChannelKind {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Miso => ChannelKind::Miso,
            ChannelArg::Mimo => ChannelKind::Mimo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Lower,
    Upper,
}

impl From<BoundArg> for BoundKind {
    fn from(b: BoundArg) -> Self {
        match b {
            BoundArg::Lower => BoundKind::Lower,
            BoundArg::Upper => BoundKind::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogBase {
    #[value(name = "e")]
    E,
    #[value(name = "2")]
    Two,
}

impl LogBase {
    /// Divisor taking nats to this base.
    pub fn divisor(&self) -> f64 {
        match self {
            Self::E => 1.0,
            Self::Two => std::f64::consts::LN_2,
        }
    }

    pub fn units(&self) -> &'static str {
        match self {
            Self::E => "nats",
            Self::Two => "bits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Source of the MIMO mean beam gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaMode {
    /// Large-system `γ_rvq` with a fixed concentration factor.
    Asymptotic,
    /// Simulated η table over integer feedback up to `max_bits`.
    FiniteSize { max_bits: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepMode {
    Ratio(f64),
    OptimizedSplit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Format,
    pub log_base: LogBase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub channel: ChannelKind,
    pub n_t: Option<usize>,
    pub n_r_bar: Option<f64>,
    pub snr_db: Option<f64>,
    pub l_bar: Option<f64>,
    pub mu: f64,
    pub t_bar: Option<f64>,
    pub b_bar: Option<f64>,
    pub sigma_w2: Option<f64>,
    pub c: f64,
    pub bound: BoundKind,
    pub trials: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub fixed_codebook: bool,
    pub eta: EtaMode,
    pub sweep: SweepMode,
    pub points: usize,
    pub references: bool,
    pub n_t_list: Vec<usize>,
    pub label: Option<String>,
    pub output: OutputSpec,
}

impl ExperimentConfig {
    /// Defaults for everything not tied to a particular system.
    pub fn new(command: CommandKind, channel: ChannelKind) -> Self {
        Self {
            command,
            channel,
            n_t: None,
            n_r_bar: None,
            snr_db: None,
            l_bar: None,
            mu: 1.0,
            t_bar: None,
            b_bar: None,
            sigma_w2: None,
            c: 0.0,
            bound: BoundKind::Lower,
            trials: DEFAULT_RATE_TRIALS,
            seed: 1,
            workers: None,
            fixed_codebook: false,
            eta: EtaMode::Asymptotic,
            sweep: SweepMode::Ratio(1.0),
            points: DEFAULT_POINTS,
            references: false,
            n_t_list: Vec::new(),
            label: None,
            output: OutputSpec {
                path: None,
                format: Format::Csv,
                log_base: LogBase::E,
            },
        }
    }

    pub fn snr(&self) -> Result<f64, CliError> {
        Ok(snr_from_db(need(self.snr_db, "--snr-db")?))
    }

    pub fn simulation(&self) -> SimulationSpec {
        SimulationSpec {
            trials: self.trials,
            seed: self.seed,
            fresh_codebook_per_trial: !self.fixed_codebook,
            workers: self.workers,
        }
    }

    /// Domain checks on every numeric field that is set.
    pub fn validate(&self) -> Result<(), CliError> {
        fn bad(name: &'static str, value: f64, expected: &'static str) -> CliError {
            CliError::Domain(beamcap::Error::Domain { name, value, expected })
        }
        let finite = |name, x: Option<f64>| match x {
            Some(v) if !v.is_finite() => Err(bad(name, v, "finite value")),
            _ => Ok(()),
        };
        finite("snr_db", self.snr_db)?;
        finite("n_r_bar", self.n_r_bar)?;
        finite("l_bar", self.l_bar)?;
        finite("t_bar", self.t_bar)?;
        finite("b_bar", self.b_bar)?;
        finite("sigma_w2", self.sigma_w2)?;
        if let Some(n) = self.n_t {
            if n < 1 {
                return Err(bad("n_t", n as f64, "N_t >= 1"));
            }
        }
        if let Some(x) = self.n_r_bar {
            if x <= 0.0 {
                return Err(bad("n_r_bar", x, "N̄r > 0"));
            }
        }
        if let Some(x) = self.l_bar {
            if x <= 0.0 {
                return Err(bad("l_bar", x, "L̄ > 0"));
            }
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(bad("mu", self.mu, "μ > 0"));
        }
        if let Some(x) = self.t_bar {
            if x < 0.0 {
                return Err(bad("t_bar", x, "T̄ >= 0"));
            }
        }
        if let Some(x) = self.b_bar {
            if x < 0.0 {
                return Err(bad("b_bar", x, "B̄ >= 0"));
            }
        }
        if let Some(x) = self.sigma_w2 {
            if !(0.0..=1.0).contains(&x) {
                return Err(bad("sigma_w2", x, "0 <= σ_w² <= 1"));
            }
        }
        if !(0.0..1.0).contains(&self.c) {
            return Err(bad("c", self.c, "0 <= c < 1"));
        }
        if self.trials < 1 {
            return Err(bad("trials", 0.0, "trials >= 1"));
        }
        if self.workers == Some(0) {
            return Err(bad("workers", 0.0, "workers >= 1"));
        }
        if self.points < 2 {
            return Err(bad("points", self.points as f64, "points >= 2"));
        }
        if let SweepMode::Ratio(r) = self.sweep {
            if !(r > 0.0) || !r.is_finite() {
                return Err(bad("ratio", r, "T̄/(μB̄) > 0"));
            }
        }
        Ok(())
    }
}

pub fn need<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required parameter {flag}")))
}

/// Flags shared by every command. Any of them may also come from the
/// `--config` file, with the flag taking precedence.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Plain `key = value` file; `#` starts a comment.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub channel: Option<ChannelArg>,
    /// Transmit antennas.
    #[arg(long)]
    pub nt: Option<usize>,
    /// Receive-to-transmit antenna ratio.
    #[arg(long, allow_negative_numbers = true)]
    pub nrbar: Option<f64>,
    #[arg(long = "snr-db", allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    /// Coherence length per transmit antenna.
    #[arg(long, allow_negative_numbers = true)]
    pub lbar: Option<f64>,
    /// Feedback symbols per bit.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tbar: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub bbar: Option<f64>,
    /// Estimation error variance, bypassing the training length.
    #[arg(long = "sigma-w2", allow_negative_numbers = true)]
    pub sigma_w2: Option<f64>,
    /// Concentration factor for the MIMO lower bound.
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, value_enum)]
    pub bound: Option<BoundArg>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Share one codebook across trials.
    #[arg(long)]
    pub fixed_codebook: bool,
    /// Use simulated η moments instead of the large-system limit (MIMO).
    #[arg(long)]
    pub finite_size: bool,
    /// Largest codebook size, in bits, tabulated in finite-size mode.
    #[arg(long)]
    pub table_bits: Option<u32>,
    /// Sweep ratio T̄/(μB̄).
    #[arg(long, allow_negative_numbers = true)]
    pub ratio: Option<f64>,
    /// Optimize the training/feedback split at every sweep point.
    #[arg(long)]
    pub optimized_split: bool,
    #[arg(long)]
    pub points: Option<usize>,
    /// Also simulate the perfect-CSI and perfect-estimation reference rates.
    #[arg(long)]
    pub references: bool,
    /// Antenna counts for a convergence table, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub nt_list: Option<Vec<usize>>,
    #[arg(long = "log-base", value_enum)]
    pub log_base: Option<LogBase>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

const KNOWN_KEYS: &[&str] = &[
    "channel",
    "nt",
    "nrbar",
    "snr-db",
    "lbar",
    "mu",
    "tbar",
    "bbar",
    "sigma-w2",
    "c",
    "bound",
    "trials",
    "seed",
    "workers",
    "fixed-codebook",
    "finite-size",
    "table-bits",
    "ratio",
    "optimized-split",
    "points",
    "references",
    "nt-list",
    "log-base",
    "format",
    "output",
];

/// True for names the config file accepts, in either `_` or `-` form.
pub fn is_config_key(key: &str) -> bool {
    KNOWN_KEYS.contains(&key.replace('_', "-").to_lowercase().as_str())
}

/// Parses `key = value` lines. Keys accept `_` or `-`.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().replace('_', "-").to_lowercase();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{}`", i + 1, k.trim())));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

struct Layer<'a> {
    file: &'a BTreeMap<String, String>,
}

impl Layer<'_> {
    fn parsed<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|s| s.parse::<T>().map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{s}`"))))
            .transpose()
    }

    fn enumerated<T: ValueEnum>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|s| T::from_str(s, true).map_err(|_| CliError::Usage(format!("config key `{key}`: invalid value `{s}`"))))
            .transpose()
    }

    fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.parsed::<bool>(None, key)?.unwrap_or(false))
    }
}

/// Builds the configuration for `command` from flags and the optional file.
pub fn resolve(command: CommandKind, args: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let layer = Layer { file: &file };
    let channel = layer.enumerated(args.channel, "channel")?.unwrap_or(ChannelArg::Miso);
    let mut cfg = ExperimentConfig::new(command, channel.into());
    apply(&mut cfg, args, &layer)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Overrides fields of `cfg` with anything given in `args` (or its file).
pub fn overlay(cfg: &mut ExperimentConfig, args: &CommonArgs) -> Result<(), CliError> {
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    apply(cfg, args, &Layer { file: &file })?;
    cfg.validate()
}

fn apply(cfg: &mut ExperimentConfig, args: &CommonArgs, layer: &Layer<'_>) -> Result<(), CliError> {
    if let Some(c) = layer.enumerated(args.channel, "channel")? {
        cfg.channel = c.into();
    }
    macro_rules! set {
        ($field:ident, $flag:expr, $key:literal) => {
            if let Some(v) = layer.parsed($flag, $key)? {
                cfg.$field = Some(v);
            }
        };
    }
    set!(n_t, args.nt, "nt");
    set!(n_r_bar, args.nrbar, "nrbar");
    set!(snr_db, args.snr_db, "snr-db");
    set!(l_bar, args.lbar, "lbar");
    set!(t_bar, args.tbar, "tbar");
    set!(b_bar, args.bbar, "bbar");
    set!(sigma_w2, args.sigma_w2, "sigma-w2");
    set!(workers, args.workers, "workers");
    if let Some(v) = layer.parsed(args.mu, "mu")? {
        cfg.mu = v;
    }
    if let Some(v) = layer.parsed(args.c, "c")? {
        cfg.c = v;
    }
    if let Some(v) = layer.enumerated(args.bound, "bound")? {
        cfg.bound = v.into();
    }
    if let Some(v) = layer.parsed(args.trials, "trials")? {
        cfg.trials = v;
    }
    if let Some(v) = layer.parsed(args.seed, "seed")? {
        cfg.seed = v;
    }
    if let Some(v) = layer.parsed(args.points, "points")? {
        cfg.points = v;
    }
    cfg.fixed_codebook |= layer.switch(args.fixed_codebook, "fixed-codebook")?;
    cfg.references |= layer.switch(args.references, "references")?;

    let table_bits = layer.parsed(args.table_bits, "table-bits")?;
    if layer.switch(args.finite_size, "finite-size")? {
        cfg.eta = EtaMode::FiniteSize {
            max_bits: table_bits.unwrap_or(DEFAULT_TABLE_BITS),
        };
    } else if let (EtaMode::FiniteSize { .. }, Some(b)) = (cfg.eta, table_bits) {
        cfg.eta = EtaMode::FiniteSize { max_bits: b };
    }

    if layer.switch(args.optimized_split, "optimized-split")? {
        cfg.sweep = SweepMode::OptimizedSplit;
    } else if let Some(r) = layer.parsed(args.ratio, "ratio")? {
        cfg.sweep = SweepMode::Ratio(r);
    }

    let list = match &args.nt_list {
        Some(v) => Some(v.clone()),
        None => layer
            .file
            .get("nt-list")
            .map(|s| {
                s.split(',')
                    .map(|x| x.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CliError::Usage(format!("config key `nt-list`: cannot parse `{s}`")))
            })
            .transpose()?,
    };
    if let Some(list) = list {
        cfg.n_t_list = list;
    }

    if let Some(v) = layer.enumerated(args.log_base, "log-base")? {
        cfg.output.log_base = v;
    }
    if let Some(v) = layer.enumerated(args.format, "format")? {
        cfg.output.format = v;
    }
    if let Some(v) = layer.parsed(args.output.clone(), "output")? {
        cfg.output.path = Some(v);
    }
    Ok(())
}
