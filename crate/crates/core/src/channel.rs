//! Block-fading channel model, pilot design and linear MMSE estimation.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::sampling::{complex_normal, substream};

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance on the overhead budget `T̄ + μB̄ + D̄ = L̄`.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// Converts an SNR in dB to the linear power ratio ρ.
pub fn snr_from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Link-level parameters of a coherence block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// Transmit antennas `N_t`.
    pub n_t: usize,
    /// Receive antennas `N_r` (1 for MISO).
    pub n_r: usize,
    /// Linear SNR ρ = 1/σ_n².
    pub snr: f64,
    /// Coherence length per transmit antenna, `L̄ = L/N_t`.
    pub l_bar: f64,
    /// Symbols spent per feedback bit.
    pub mu: f64,
}

impl SystemConfig {
    pub fn new(n_t: usize, n_r: usize, snr: f64, l_bar: f64, mu: f64) -> Result<Self> {
        let config = Self {
            n_t,
            n_r,
            snr,
            l_bar,
            mu,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn miso(n_t: usize, snr: f64, l_bar: f64, mu: f64) -> Result<Self> {
        Self::new(n_t, 1, snr, l_bar, mu)
    }

    /// MIMO configuration with `N_r = round(N̄r · N_t)`.
    pub fn mimo(n_t: usize, n_r_bar: f64, snr: f64, l_bar: f64, mu: f64) -> Result<Self> {
        if !(n_r_bar > 0.0) || !n_r_bar.is_finite() {
            return Err(domain("n_r_bar", n_r_bar, "N̄r > 0"));
        }
        let n_r = (n_r_bar * n_t as f64).round().max(1.0) as usize;
        Self::new(n_t, n_r, snr, l_bar, mu)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t < 2 {
            return Err(domain("n_t", self.n_t as f64, "N_t >= 2"));
        }
        if self.n_r < 1 {
            return Err(domain("n_r", self.n_r as f64, "N_r >= 1"));
        }
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return Err(domain("snr", self.snr, "ρ > 0"));
        }
        if !(self.l_bar > 0.0) || !self.l_bar.is_finite() {
            return Err(domain("l_bar", self.l_bar, "L̄ > 0"));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(domain("mu", self.mu, "μ > 0"));
        }
        Ok(())
    }

    /// Receive-to-transmit antenna ratio `N̄r = N_r / N_t`.
    pub fn n_r_bar(&self) -> f64 {
        self.n_r as f64 / self.n_t as f64
    }

    pub fn link(&self) -> Link {
        Link {
            n_t: self.n_t,
            n_r: self.n_r,
            snr: self.snr,
        }
    }
}

/// The antenna counts and SNR a simulation needs. Unlike
/// [`SystemConfig`] this allows a single transmit antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub n_t: usize,
    pub n_r: usize,
    pub snr: f64,
}

impl Link {
    pub fn new(n_t: usize, n_r: usize, snr: f64) -> Result<Self> {
        let link = Self { n_t, n_r, snr };
        link.validate()?;
        Ok(link)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t < 1 {
            return Err(domain("n_t", self.n_t as f64, "N_t >= 1"));
        }
        if self.n_r < 1 {
            return Err(domain("n_r", self.n_r as f64, "N_r >= 1"));
        }
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return Err(domain("snr", self.snr, "ρ > 0"));
        }
        Ok(())
    }
}

/// Normalized split of a coherence block into training, feedback and data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadAllocation {
    pub t_bar: f64,
    pub b_bar: f64,
    pub d_bar: f64,
}

impl OverheadAllocation {
    /// Fills in the data share `D̄ = L̄ - T̄ - μB̄`.
    pub fn new(config: &SystemConfig, t_bar: f64, b_bar: f64) -> Result<Self> {
        if !(t_bar >= 0.0) {
            return Err(domain("t_bar", t_bar, "T̄ >= 0"));
        }
        if !(b_bar >= 0.0) {
            return Err(domain("b_bar", b_bar, "B̄ >= 0"));
        }
        let d_bar = config.l_bar - t_bar - config.mu * b_bar;
        if d_bar < -BUDGET_TOLERANCE {
            return Err(Error::Infeasible(format!(
                "T̄ + μB̄ = {} exceeds L̄ = {}",
                t_bar + config.mu * b_bar,
                config.l_bar
            )));
        }
        Ok(Self {
            t_bar,
            b_bar,
            d_bar: d_bar.max(0.0),
        })
    }

    /// Checks nonnegativity and the budget identity against `config`.
    pub fn check(&self, config: &SystemConfig) -> Result<()> {
        if self.t_bar < 0.0 || self.b_bar < 0.0 || self.d_bar < 0.0 {
            return Err(Error::Infeasible("negative allocation component".into()));
        }
        let total = self.t_bar + config.mu * self.b_bar + self.d_bar;
        if (total - config.l_bar).abs() > BUDGET_TOLERANCE * config.l_bar.max(1.0) {
            return Err(Error::Infeasible(format!(
                "T̄ + μB̄ + D̄ = {total} but L̄ = {}",
                config.l_bar
            )));
        }
        Ok(())
    }

    /// Fraction of the block spent on training and feedback.
    pub fn overhead_fraction(&self, config: &SystemConfig) -> f64 {
        (self.t_bar + config.mu * self.b_bar) / config.l_bar
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `N_r × N_t` channel with i.i.d. CN(0, 1) entries.
    pub matrix: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// `N_r × N_t` estimate Ĥ.
    pub estimate: CMatrix,
    /// Per-entry estimation error variance σ_w².
    pub error_variance: f64,
}

/// Estimation error variance of the MMSE estimate with Welch-bound pilots.
///
/// `1 - T̄/(1 + 1/ρ)` while `T̄ < 1` (not every antenna is sounded) and
/// `1/(1 + ρT̄)` once `T̄ >= 1`. Both branches equal `1/(1 + ρ)` at `T̄ = 1`.
pub fn mse_variance(t_bar: f64, snr: f64) -> Result<f64> {
    if !(t_bar >= 0.0) || !t_bar.is_finite() {
        return Err(domain("t_bar", t_bar, "T̄ >= 0"));
    }
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(domain("snr", snr, "ρ > 0"));
    }
    let value = if t_bar < 1.0 {
        1.0 - t_bar / (1.0 + 1.0 / snr)
    } else {
        1.0 / (1.0 + snr * t_bar)
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Pilot beamformers `V_T` (N_t × T, unit-norm columns) and pilot symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDesign {
    pub pilot_matrix: CMatrix,
    pub pilot_symbols: Vec<Complex64>,
}

impl TrainingDesign {
    pub fn n_t(&self) -> usize {
        self.pilot_matrix.nrows()
    }

    pub fn pilots(&self) -> usize {
        self.pilot_matrix.ncols()
    }
}

/// Welch-bound-achieving training matrix.
///
/// With `t <= n_t` the pilots sound the antennas one at a time (first `t`
/// identity columns, `V†V = I`). With `t > n_t` column `k` carries the DFT
/// phases `exp(2πi nk/t)/√n_t`, which gives `V V† = (t/n_t) I` for any `t`.
pub fn training_matrix(t: usize, n_t: usize) -> Result<TrainingDesign> {
    if t < 1 {
        return Err(domain("t", t as f64, "T >= 1"));
    }
    if n_t < 2 {
        return Err(domain("n_t", n_t as f64, "N_t >= 2"));
    }
    let pilot_matrix = if t <= n_t {
        CMatrix::from_fn(n_t, t, |row, col| {
            if row == col {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    } else {
        let scale = 1.0 / (n_t as f64).sqrt();
        CMatrix::from_fn(n_t, t, |row, col| {
            // reduce n·k mod t first to keep the phase argument small
            let phase = 2.0 * PI * ((row * col) % t) as f64 / t as f64;
            Complex64::from_polar(scale, phase)
        })
    };
    Ok(TrainingDesign {
        pilot_matrix,
        pilot_symbols: vec![Complex64::new(1.0, 0.0); t],
    })
}

/// Linear MMSE filter `C` (T × N_t) so that `ĥ = r_T C`.
#[derive(Debug, Clone)]
pub struct MmseFilter {
    filter: CMatrix,
}

impl MmseFilter {
    /// `C = (Aᴴ A + σ_n² I)⁻¹ Aᴴ` with `A = V_T B_T` and `σ_n² = 1/ρ`.
    pub fn new(design: &TrainingDesign, snr: f64) -> Result<Self> {
        if !(snr > 0.0) || !snr.is_finite() {
            return Err(domain("snr", snr, "ρ > 0"));
        }
        let mut a = design.pilot_matrix.clone();
        for (k, b) in design.pilot_symbols.iter().enumerate() {
            for z in a.column_mut(k).iter_mut() {
                *z *= b;
            }
        }
        let a_h = a.adjoint();
        let t = design.pilots();
        let gram = &a_h * &a + CMatrix::identity(t, t) * Complex64::new(1.0 / snr, 0.0);
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::Singular("pilot Gram matrix is not positive definite".into()))?;
        Ok(Self {
            filter: chol.solve(&a_h),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.filter
    }

    /// Estimates every row of the channel from the `N_r × T` received block.
    pub fn apply(&self, received: &CMatrix) -> Result<CMatrix> {
        if received.ncols() != self.filter.nrows() {
            return Err(Error::Dimension {
                expected: self.filter.nrows(),
                found: received.ncols(),
            });
        }
        Ok(received * &self.filter)
    }
}

/// MMSE estimate of one channel row from its `T` received pilot samples.
pub fn mmse_estimate(received: &[Complex64], design: &TrainingDesign, snr: f64) -> Result<Vec<Complex64>> {
    if received.len() != design.pilots() {
        return Err(Error::Dimension {
            expected: design.pilots(),
            found: received.len(),
        });
    }
    let filter = MmseFilter::new(design, snr)?;
    let row = CMatrix::from_row_slice(1, received.len(), received);
    Ok(filter.apply(&row)?.iter().copied().collect())
}

/// Draws `(H, Ĥ)` directly from the decomposition `H = Ĥ + w`, skipping
/// the pilot simulation.
pub fn synthesize_estimate(
    n_r: usize,
    n_t: usize,
    sigma_w2: f64,
    seed: u64,
) -> Result<(ChannelRealization, ChannelEstimate)> {
    let mut rng = substream(seed, 0);
    synthesize_estimate_with(&mut rng, n_r, n_t, sigma_w2)
}

pub fn synthesize_estimate_with<R: Rng + ?Sized>(
    rng: &mut R,
    n_r: usize,
    n_t: usize,
    sigma_w2: f64,
) -> Result<(ChannelRealization, ChannelEstimate)> {
    if !(0.0..=1.0).contains(&sigma_w2) {
        return Err(domain("sigma_w2", sigma_w2, "0 <= σ_w² <= 1"));
    }
    if n_r < 1 || n_t < 1 {
        return Err(domain("n_t", n_t.min(n_r) as f64, "N_r, N_t >= 1"));
    }
    let estimate = CMatrix::from_fn(n_r, n_t, |_, _| complex_normal(rng, 1.0 - sigma_w2));
    let error = CMatrix::from_fn(n_r, n_t, |_, _| complex_normal(rng, sigma_w2));
    Ok((
        ChannelRealization {
            matrix: &estimate + error,
        },
        ChannelEstimate {
            estimate,
            error_variance: sigma_w2,
        },
    ))
}
