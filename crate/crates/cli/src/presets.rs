//! Parameter sets for the six reference figures.

use beamcap::{BoundKind, ChannelKind};

use crate::config::{CommandKind, EtaMode, ExperimentConfig, SweepMode, DEFAULT_TABLE_BITS};
use crate::CliError;

pub const FIGURE_NAMES: [&str; 6] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"];

/// Coherence lengths for the rate-versus-`L̄` curves. At `L̄ = 10` the
/// optimal codebook already has 16 bits, and the perfect-estimation
/// reference searches all of it in every trial.
pub const FIG2_L_BARS: [f64; 7] = [2.0, 3.0, 4.0, 5.0, 6.0, 7.5, 10.0];
pub const FIG3_RATIOS: [f64; 3] = [0.5, 1.0, 2.0];
pub const FIG4_N_T: [usize; 11] = [3, 4, 5, 6, 8, 10, 15, 20, 30, 50, 100];
pub const FIG5_N_T: [usize; 5] = [2, 3, 4, 5, 6];

fn base(command: CommandKind, channel: ChannelKind, figure: &str, label: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(command, channel);
    cfg.snr_db = Some(5.0);
    cfg.mu = 1.0;
    cfg.bound = BoundKind::Lower;
    cfg.label = Some(format!("{figure}:{label}"));
    cfg
}

fn mimo(mut cfg: ExperimentConfig, n_t: usize, l_bar: f64) -> ExperimentConfig {
    cfg.n_t = Some(n_t);
    cfg.n_r_bar = Some(2.0);
    cfg.l_bar = Some(l_bar);
    cfg
}

/// Ratio `T̄/(μB̄)` of the large-system allocation for a MIMO system.
pub fn asymptotic_ratio(n_t: usize, n_r_bar: f64, l_bar: f64, mu: f64) -> f64 {
    2.0 * mu * n_r_bar * (n_t as f64).ln() / (l_bar * std::f64::consts::LN_2)
}

/// The runs that make up figure `name`, in output order.
pub fn figure_presets(name: &str) -> Result<Vec<ExperimentConfig>, CliError> {
    let mut out = Vec::new();
    match name {
        "fig1" => {
            for n_t in 2..=12 {
                let mut cfg = base(CommandKind::Simulate, ChannelKind::Miso, name, "rate");
                cfg.n_t = Some(n_t);
                cfg.b_bar = Some(1.0);
                cfg.sigma_w2 = Some(0.15);
                out.push(cfg);
            }
        }
        "fig2" => {
            for l_bar in FIG2_L_BARS {
                let mut cfg = base(CommandKind::Optimize, ChannelKind::Miso, name, "optimized");
                cfg.n_t = Some(10);
                cfg.l_bar = Some(l_bar);
                cfg.references = true;
                out.push(cfg);
            }
        }
        "fig3" => {
            let mut cfg = base(CommandKind::Sweep, ChannelKind::Miso, name, "optimized");
            cfg.n_t = Some(6);
            cfg.l_bar = Some(100.0);
            cfg.sweep = SweepMode::OptimizedSplit;
            out.push(cfg.clone());
            for ratio in FIG3_RATIOS {
                cfg.sweep = SweepMode::Ratio(ratio);
                cfg.label = Some(format!("{name}:ratio={ratio}"));
                out.push(cfg.clone());
            }
        }
        "fig4" => {
            for n_t in FIG4_N_T {
                let cfg = base(CommandKind::Optimize, ChannelKind::Mimo, name, "optimized");
                out.push(mimo(cfg, n_t, 50.0));
            }
        }
        "fig5" => {
            let finite = EtaMode::FiniteSize {
                max_bits: DEFAULT_TABLE_BITS,
            };
            for n_t in FIG5_N_T {
                let mut cfg = mimo(base(CommandKind::Optimize, ChannelKind::Mimo, name, "optimized"), n_t, 50.0);
                cfg.eta = finite;
                cfg.references = true;
                out.push(cfg);

                let mut cfg = mimo(base(CommandKind::Bounds, ChannelKind::Mimo, name, "heuristic"), n_t, 50.0);
                cfg.eta = finite;
                cfg.t_bar = Some(1.5);
                cfg.b_bar = Some(1.0);
                out.push(cfg);

                let mut cfg = base(CommandKind::Optimize, ChannelKind::Miso, name, "miso");
                cfg.n_t = Some(n_t);
                cfg.l_bar = Some(50.0);
                out.push(cfg);
            }
        }
        "fig6" => {
            let mut cfg = mimo(base(CommandKind::Sweep, ChannelKind::Mimo, name, "optimized"), 9, 10.0);
            cfg.sweep = SweepMode::OptimizedSplit;
            out.push(cfg.clone());
            for (label, ratio) in [
                ("equal", 1.0),
                ("asymptotic", asymptotic_ratio(9, 2.0, 10.0, 1.0)),
                ("feedback=2x", 0.5),
            ] {
                cfg.sweep = SweepMode::Ratio(ratio);
                cfg.label = Some(format!("{name}:{label}"));
                out.push(cfg.clone());
            }
        }
        _ => {
            return Err(CliError::Usage(format!(
                "unknown figure `{name}`; expected one of {}",
                FIGURE_NAMES.join(", ")
            )))
        }
    }
    Ok(out)
}
