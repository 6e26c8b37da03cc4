//! Dispatch from a resolved configuration to the library routines.

use beamcap::bounds::{
    effective_rate, mimo_bounds_from_eta, mimo_bounds_with_variance, miso_bounds_with_variance,
};
use beamcap::channel::mse_variance;
use beamcap::montecarlo::{
    estimate_eta_stats, estimate_eta_table, reference_rates, simulate_genie_rate, simulate_lower_rate, EtaTable,
};
use beamcap::optimizer::{
    asymptotic_prediction, convergence_series, optimize_with_model, sweep_overhead, sweep_overhead_optimized,
    SweepPoint, DEFAULT_GRID,
};
use beamcap::{ChannelKind, Link, OptimizationResult, OverheadAllocation, RateModel, SystemConfig};

use crate::config::{need, CommandKind, EtaMode, ExperimentConfig, SweepMode};
use crate::record::Record;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Runs one configuration and returns its records.
pub fn execute(cfg: &ExperimentConfig) -> Result<Vec<Record>, CliError> {
    cfg.validate()?;
    match cfg.command {
        CommandKind::Bounds => bounds(cfg).map(|r| vec![r]),
        CommandKind::Optimize => optimize(cfg).map(|r| vec![r]),
        CommandKind::Sweep => sweep(cfg),
        CommandKind::Simulate => simulate(cfg).map(|r| vec![r]),
        CommandKind::Asymptotics => asymptotics(cfg),
    }
}

/// Rates are computed in nats and divided by this on output.
fn div(cfg: &ExperimentConfig) -> f64 {
    cfg.output.log_base.divisor()
}

fn finite_size(cfg: &ExperimentConfig) -> Option<u32> {
    match (cfg.channel, cfg.eta) {
        (ChannelKind::Mimo, EtaMode::FiniteSize { max_bits }) => Some(max_bits),
        _ => None,
    }
}

/// Resolved inputs, under the same names the config file accepts.
fn echo(cfg: &ExperimentConfig) -> Record {
    let mut r = Record::new();
    r.set("command", cfg.command.name());
    if let Some(label) = &cfg.label {
        r.set("label", label.as_str());
    }
    r.set("channel", cfg.channel.to_string());
    if let Some(n) = cfg.n_t {
        r.set("nt", n);
    }
    if cfg.channel == ChannelKind::Mimo {
        if let Some(x) = cfg.n_r_bar {
            r.set("nrbar", x);
        }
    }
    for (key, value) in [
        ("snr_db", cfg.snr_db),
        ("lbar", cfg.l_bar),
        ("tbar", cfg.t_bar),
        ("bbar", cfg.b_bar),
        ("sigma_w2", cfg.sigma_w2),
    ] {
        if let Some(x) = value {
            r.set(key, x);
        }
    }
    r.set("mu", cfg.mu);
    if cfg.channel == ChannelKind::Mimo && finite_size(cfg).is_none() {
        r.set("c", cfg.c);
    }
    if matches!(cfg.command, CommandKind::Optimize | CommandKind::Sweep | CommandKind::Asymptotics) {
        r.set("bound", cfg.bound.to_string());
    }
    if let Some(bits) = finite_size(cfg) {
        r.set("finite_size", true).set("table_bits", bits);
    }
    if cfg.command == CommandKind::Sweep {
        match cfg.sweep {
            SweepMode::Ratio(x) => r.set("ratio", x),
            SweepMode::OptimizedSplit => r.set("optimized_split", true),
        };
        r.set("points", cfg.points);
    }
    if cfg.command == CommandKind::Optimize {
        r.set("references", cfg.references);
    }
    if cfg.command == CommandKind::Asymptotics && !cfg.n_t_list.is_empty() {
        let list: Vec<String> = cfg.n_t_list.iter().map(|n| n.to_string()).collect();
        r.set("nt_list", list.join(","));
    }
    r.set("trials", cfg.trials)
        .set("seed", cfg.seed)
        .set("fixed_codebook", cfg.fixed_codebook)
        .set("log_base", if div(cfg) == 1.0 { "e" } else { "2" })
        .set("units", cfg.output.log_base.units())
        .set("version", VERSION);
    r
}

fn system(cfg: &ExperimentConfig, n_t: usize) -> Result<SystemConfig, CliError> {
    let snr = cfg.snr()?;
    let l_bar = need(cfg.l_bar, "--lbar")?;
    Ok(match cfg.channel {
        ChannelKind::Miso => SystemConfig::miso(n_t, snr, l_bar, cfg.mu)?,
        ChannelKind::Mimo => SystemConfig::mimo(n_t, need(cfg.n_r_bar, "--nrbar")?, snr, l_bar, cfg.mu)?,
    })
}

fn link(cfg: &ExperimentConfig) -> Result<Link, CliError> {
    let n_t = need(cfg.n_t, "--nt")?;
    let n_r = match cfg.channel {
        ChannelKind::Miso => 1,
        ChannelKind::Mimo => (need(cfg.n_r_bar, "--nrbar")? * n_t as f64).round().max(1.0) as usize,
    };
    Ok(Link::new(n_t, n_r, cfg.snr()?)?)
}

/// `σ_w²` from exactly one of `--sigma-w2` and `--tbar`.
fn variance(cfg: &ExperimentConfig) -> Result<f64, CliError> {
    match (cfg.sigma_w2, cfg.t_bar) {
        (Some(s), None) => Ok(s),
        (None, Some(t)) => Ok(mse_variance(t, cfg.snr()?)?),
        (Some(_), Some(_)) => Err(CliError::Usage("give only one of --sigma-w2 and --tbar".into())),
        (None, None) => Err(CliError::Usage("missing required parameter --sigma-w2 or --tbar".into())),
    }
}

fn bits_for(b_bar: f64, n_t: usize) -> u32 {
    (b_bar * n_t as f64).round() as u32
}

fn eta_table(cfg: &ExperimentConfig, link: &Link) -> Result<Option<EtaTable>, CliError> {
    match finite_size(cfg) {
        Some(max_bits) => Ok(Some(estimate_eta_table(link, max_bits, &cfg.simulation())?)),
        None => Ok(None),
    }
}

fn model<'a>(cfg: &ExperimentConfig, table: Option<&'a EtaTable>) -> RateModel<'a> {
    match table {
        Some(t) => RateModel::MimoTable(t),
        None => RateModel::from_kind(cfg.channel, cfg.c),
    }
}

fn set_allocation(r: &mut Record, a: &OverheadAllocation, l_bar: f64, mu: f64) {
    r.set("t_alloc", a.t_bar)
        .set("b_alloc", a.b_bar)
        .set("d_alloc", a.d_bar)
        .set("t_share", a.t_bar / l_bar)
        .set("b_share", mu * a.b_bar / l_bar)
        .set("d_share", a.d_bar / l_bar);
}

fn bounds(cfg: &ExperimentConfig) -> Result<Record, CliError> {
    let link = link(cfg)?;
    let b_bar = need(cfg.b_bar, "--bbar")?;
    let sigma_w2 = variance(cfg)?;
    let mut r = echo(cfg);
    let pair = match cfg.channel {
        ChannelKind::Miso => miso_bounds_with_variance(link.n_t, link.snr, sigma_w2, b_bar)?,
        ChannelKind::Mimo => match eta_table(cfg, &link)? {
            Some(table) => {
                let bits = bits_for(b_bar, link.n_t);
                let (mean_eta, c) = table.moments(sigma_w2, bits)?;
                r.set("bits", bits).set("e_eta", mean_eta).set("c_factor", c);
                mimo_bounds_from_eta(link.snr, sigma_w2, mean_eta, c)?
            }
            None => mimo_bounds_with_variance(
                link.n_t,
                link.n_r as f64 / link.n_t as f64,
                link.snr,
                sigma_w2,
                b_bar,
                cfg.c,
            )?,
        },
    };
    if cfg.t_bar.is_some() {
        r.set("mse_variance", sigma_w2);
    }
    r.set("lower", pair.lower / div(cfg)).set("upper", pair.upper / div(cfg));
    if let (Some(t_bar), Some(_)) = (cfg.t_bar, cfg.l_bar) {
        let sys = system(cfg, link.n_t)?;
        let a = OverheadAllocation::new(&sys, t_bar, b_bar)?;
        set_allocation(&mut r, &a, sys.l_bar, sys.mu);
        r.set("eff_lower", effective_rate(pair.lower, a, sys.l_bar).value / div(cfg))
            .set("eff_upper", effective_rate(pair.upper, a, sys.l_bar).value / div(cfg));
    }
    Ok(r)
}

fn set_optimum(r: &mut Record, cfg: &ExperimentConfig, sys: &SystemConfig, res: &OptimizationResult) {
    set_allocation(r, &res.allocation, sys.l_bar, sys.mu);
    r.set("bits_alloc", bits_for(res.allocation.b_bar, sys.n_t))
        .set("overhead_fraction", res.overhead_fraction(sys))
        .set("rate", res.rate.value / div(cfg))
        .set("iterations", res.iterations)
        .set("tolerance_met", res.tolerance_met)
        .set("at_feedback_cap", res.at_feedback_cap)
        .set("degenerate", res.degenerate);
}

fn optimize(cfg: &ExperimentConfig) -> Result<Record, CliError> {
    let sys = system(cfg, need(cfg.n_t, "--nt")?)?;
    let table = eta_table(cfg, &sys.link())?;
    let res = optimize_with_model(&sys, model(cfg, table.as_ref()), cfg.bound, DEFAULT_GRID)?;
    let mut r = echo(cfg);
    set_optimum(&mut r, cfg, &sys, &res);
    if cfg.references {
        let bits = bits_for(res.allocation.b_bar, sys.n_t);
        let refs = reference_rates(&sys.link(), bits, &cfg.simulation())?;
        r.set("perfect_csi_rate", refs.perfect_csi.mean / div(cfg))
            .set("perfect_csi_se", refs.perfect_csi.std_err / div(cfg))
            .set("rvq_perfect_estimation_rate", refs.rvq_perfect_estimation.mean / div(cfg))
            .set("rvq_perfect_estimation_se", refs.rvq_perfect_estimation.std_err / div(cfg));
    }
    Ok(r)
}

fn sweep(cfg: &ExperimentConfig) -> Result<Vec<Record>, CliError> {
    let sys = system(cfg, need(cfg.n_t, "--nt")?)?;
    let table = eta_table(cfg, &sys.link())?;
    let m = model(cfg, table.as_ref());
    let points: Vec<SweepPoint> = match cfg.sweep {
        SweepMode::Ratio(ratio) => sweep_overhead(&sys, m, cfg.bound, ratio, cfg.points)?,
        SweepMode::OptimizedSplit => sweep_overhead_optimized(&sys, m, cfg.bound, cfg.points)?,
    };
    let base = echo(cfg);
    Ok(points
        .iter()
        .map(|p| {
            let mut r = base.clone();
            r.set("overhead_fraction", p.overhead_fraction)
                .set("t_alloc", p.t_bar)
                .set("b_alloc", p.b_bar)
                .set("rate", p.rate / div(cfg));
            r
        })
        .collect())
}

fn simulate(cfg: &ExperimentConfig) -> Result<Record, CliError> {
    let link = link(cfg)?;
    let b_bar = need(cfg.b_bar, "--bbar")?;
    let sigma_w2 = variance(cfg)?;
    let bits = bits_for(b_bar, link.n_t);
    let spec = cfg.simulation();
    let mut r = echo(cfg);
    r.set("bits", bits);
    if cfg.t_bar.is_some() {
        r.set("mse_variance", sigma_w2);
    }
    let genie = simulate_genie_rate(&link, sigma_w2, bits, &spec)?;
    let lower = simulate_lower_rate(&link, sigma_w2, bits, &spec)?;
    r.set("genie_rate", genie.mean / div(cfg))
        .set("genie_se", genie.std_err / div(cfg))
        .set("lower_rate", lower.mean / div(cfg))
        .set("lower_se", lower.std_err / div(cfg));
    let pair = match cfg.channel {
        ChannelKind::Miso if link.n_t >= 2 => Some(miso_bounds_with_variance(link.n_t, link.snr, sigma_w2, b_bar)?),
        ChannelKind::Miso => None,
        ChannelKind::Mimo => {
            let eta = estimate_eta_stats(&link, sigma_w2, bits, &spec)?;
            r.set("e_eta", eta.e_eta)
                .set("sigma_eta", eta.sigma_eta)
                .set("eta_se", eta.std_err)
                .set("c_factor", eta.c_factor);
            Some(mimo_bounds_from_eta(link.snr, sigma_w2, eta.e_eta, eta.c_factor)?)
        }
    };
    if let Some(pair) = pair {
        r.set("lower", pair.lower / div(cfg)).set("upper", pair.upper / div(cfg));
    }
    Ok(r)
}

fn asymptotics(cfg: &ExperimentConfig) -> Result<Vec<Record>, CliError> {
    let n_t = match (cfg.n_t, cfg.n_t_list.first()) {
        (Some(n), _) => n,
        (None, Some(&n)) => n,
        (None, None) => return Err(CliError::Usage("missing required parameter --nt or --nt-list".into())),
    };
    let sys = system(cfg, n_t)?;
    let pred = asymptotic_prediction(&sys, cfg.channel)?;
    let base = echo(cfg);
    let mut out = Vec::new();
    let mut r = base.clone();
    r.set("row", "prediction")
        .set("t_pred", pred.t_bar_pred)
        .set("b_pred", pred.b_bar_pred)
        .set("capacity_offset", pred.capacity_offset / div(cfg))
        .set("capacity_offset_lower", pred.capacity_offset_lower / div(cfg))
        .set("training_fraction", pred.training_fraction)
        .set("feedback_fraction", pred.feedback_fraction)
        .set("data_fraction", pred.data_fraction());
    out.push(r);
    if !cfg.n_t_list.is_empty() {
        let rows = convergence_series(&sys, cfg.channel, cfg.bound, cfg.c, &cfg.n_t_list)?;
        for row in rows {
            let series_sys = system(cfg, row.n_t)?;
            let mut r = base.clone();
            r.set("row", "convergence")
                .set("series_nt", row.n_t)
                .set("t_scaled", row.t_scaled)
                .set("b_scaled", row.b_scaled)
                .set("feedback_to_training", row.feedback_to_training)
                .set("capacity_offset", row.capacity_offset / div(cfg));
            set_optimum(&mut r, cfg, &series_sys, &row.result);
            out.push(r);
        }
    }
    Ok(out)
}
