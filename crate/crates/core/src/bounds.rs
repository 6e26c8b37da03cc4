//! Closed-form per-symbol capacity bounds and the effective rate.
//!
//! All rates are in nats per channel use. The MISO pair combines the
//! Jensen upper bound with the worst-case-noise lower bound; the MIMO pair
//! is driven by the mean received power `E[η]`, taken either from the
//! large-system `γ_rvq` or from a simulated [`EtaTable`].

use std::f64::consts::LN_2;

use crate::channel::{mse_variance, OverheadAllocation, SystemConfig};
use crate::error::{domain, Result};
use crate::montecarlo::EtaTable;
use crate::numerics::EULER_GAMMA;
use crate::rvq::{d_factor, gamma_rvq};

pub use crate::montecarlo::{reference_rates, ReferenceRates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Miso,
    Mimo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Lower,
    Upper,
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Miso => "miso",
            Self::Mimo => "mimo",
        })
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Lower => "lower",
            Self::Upper => "upper",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityBounds {
    pub lower: f64,
    pub upper: f64,
    pub channel_kind: ChannelKind,
}

impl CapacityBounds {
    pub fn get(&self, kind: BoundKind) -> f64 {
        match kind {
            BoundKind::Lower => self.lower,
            BoundKind::Upper => self.upper,
        }
    }

    /// Same pair expressed with logarithm base `base` (2 for bits).
    pub fn in_base(&self, base: f64) -> Self {
        let scale = base.ln();
        Self {
            lower: self.lower / scale,
            upper: self.upper / scale,
            channel_kind: self.channel_kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveRate {
    pub value: f64,
    pub allocation: OverheadAllocation,
}

/// Scales a per-symbol rate by the data fraction `D̄/L̄`.
pub fn effective_rate(bound_value: f64, allocation: OverheadAllocation, l_bar: f64) -> EffectiveRate {
    EffectiveRate {
        value: (allocation.d_bar / l_bar * bound_value).max(0.0),
        allocation,
    }
}

fn check_variance(sigma_w2: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&sigma_w2) {
        return Err(domain("sigma_w2", sigma_w2, "0 <= σ_w² <= 1"));
    }
    Ok(())
}

fn check_snr(snr: f64) -> Result<()> {
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(domain("snr", snr, "ρ > 0"));
    }
    Ok(())
}

/// MISO bounds at a given estimation error variance.
pub fn miso_bounds_with_variance(n_t: usize, snr: f64, sigma_w2: f64, b_bar: f64) -> Result<CapacityBounds> {
    check_snr(snr)?;
    check_variance(sigma_w2)?;
    if !(b_bar >= 0.0) || !b_bar.is_finite() {
        return Err(domain("b_bar", b_bar, "B̄ >= 0"));
    }
    if n_t < 2 {
        return Err(domain("n_t", n_t as f64, "N_t >= 2"));
    }
    let nt = n_t as f64;
    let p = (-b_bar * LN_2).exp();
    let captured = -(-b_bar * LN_2).exp_m1();

    let correction = (1.0 + (EULER_GAMMA - 1.0) * p + (-b_bar * nt * LN_2).exp()) / (nt - 1.0);
    let upper = (snr * sigma_w2 + snr * (1.0 - sigma_w2) * nt * (captured + correction)).ln_1p();

    let lower = if b_bar == 0.0 || sigma_w2 == 1.0 {
        0.0
    } else {
        let concentration = (1.0 - d_factor(n_t, b_bar)?).max(0.0);
        let sinr = snr * (1.0 - sigma_w2) / (1.0 + snr * sigma_w2);
        concentration * (sinr * captured * nt).ln_1p()
    };
    Ok(CapacityBounds {
        lower,
        upper: upper.max(lower),
        channel_kind: ChannelKind::Miso,
    })
}

/// MISO bounds with `σ_w²` set by the training length `T̄`.
pub fn miso_capacity_bounds(config: &SystemConfig, t_bar: f64, b_bar: f64) -> Result<CapacityBounds> {
    config.validate()?;
    let sigma_w2 = mse_variance(t_bar, config.snr)?;
    miso_bounds_with_variance(config.n_t, config.snr, sigma_w2, b_bar)
}

/// MIMO bounds from the mean received power `E[η]` and concentration `c`.
pub fn mimo_bounds_from_eta(snr: f64, sigma_w2: f64, mean_eta: f64, c: f64) -> Result<CapacityBounds> {
    check_snr(snr)?;
    check_variance(sigma_w2)?;
    if !(mean_eta >= 0.0) || !mean_eta.is_finite() {
        return Err(domain("mean_eta", mean_eta, "E[η] >= 0"));
    }
    if !(0.0..1.0).contains(&c) {
        return Err(domain("c", c, "0 <= c < 1"));
    }
    let upper = (snr * sigma_w2 + snr * mean_eta).ln_1p();
    let lower = (1.0 - c) * (snr * mean_eta / (1.0 + snr * sigma_w2)).ln_1p();
    Ok(CapacityBounds {
        lower,
        upper: upper.max(lower),
        channel_kind: ChannelKind::Mimo,
    })
}

/// MIMO bounds with `E[η] = (1 - σ_w²) γ_rvq(N̄r, B̄) N_t`.
pub fn mimo_bounds_with_variance(
    n_t: usize,
    n_r_bar: f64,
    snr: f64,
    sigma_w2: f64,
    b_bar: f64,
    c: f64,
) -> Result<CapacityBounds> {
    check_variance(sigma_w2)?;
    let gamma = gamma_rvq(n_r_bar, b_bar)?;
    let mean_eta = (1.0 - sigma_w2) * gamma.value * n_t as f64;
    mimo_bounds_from_eta(snr, sigma_w2, mean_eta, c)
}

pub fn mimo_capacity_bounds(config: &SystemConfig, t_bar: f64, b_bar: f64, c: f64) -> Result<CapacityBounds> {
    config.validate()?;
    let sigma_w2 = mse_variance(t_bar, config.snr)?;
    mimo_bounds_with_variance(config.n_t, config.n_r_bar(), config.snr, sigma_w2, b_bar, c)
}

/// MIMO bounds with the η moments of a simulated table at an integer
/// number of feedback bits.
pub fn mimo_bounds_from_table(config: &SystemConfig, table: &EtaTable, t_bar: f64, bits: u32) -> Result<CapacityBounds> {
    config.validate()?;
    let sigma_w2 = mse_variance(t_bar, config.snr)?;
    let (mean_eta, c) = table.moments(sigma_w2, bits)?;
    mimo_bounds_from_eta(config.snr, sigma_w2, mean_eta, c)
}
