//! Monte Carlo estimates of rates, η moments and model checks.
//!
//! Trial `i` draws from substream `i + 1` of the seed (stream 0 is
//! reserved for a shared codebook), the trials are mapped in parallel and
//! the results are reduced in trial order, so estimates do not depend on
//! the number of workers.
//!
//! Fresh codebooks are drawn vector by vector after the channel and
//! searched on the fly. A `2^(B+1)` codebook therefore starts with the
//! `2^B` codebook of the same trial.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{synthesize_estimate_with, training_matrix, CMatrix, Link, MmseFilter};
use crate::error::{domain, Error, Result};
use crate::rvq::{draw_unit_vector, generate_codebook, BeamGain, Codebook, MAX_CODEBOOK_BITS};
use crate::sampling::{complex_normal, substream, TrialRng};

pub const DEFAULT_RATE_TRIALS: usize = 10_000;
pub const DEFAULT_MOMENT_TRIALS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationSpec {
    pub trials: usize,
    pub seed: u64,
    /// Draw a new codebook in every trial instead of sharing one.
    pub fresh_codebook_per_trial: bool,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl SimulationSpec {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            fresh_codebook_per_trial: true,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn with_fixed_codebook(mut self) -> Self {
        self.fresh_codebook_per_trial = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(domain("trials", self.trials as f64, "trials >= 1"));
        }
        if self.workers == Some(0) {
            return Err(domain("workers", 0.0, "workers >= 1"));
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub trials: usize,
}

pub type RateEstimate = Estimate;

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let (mean, sd) = mean_and_sd(samples);
        Self {
            mean,
            std_err: sd / (samples.len() as f64).sqrt(),
            trials: samples.len(),
        }
    }

    /// `|mean - target| <= k · std_err`.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err
    }
}

fn mean_and_sd(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Normalized length to a symbol count: nearest integer, at least 1 when
/// the normalized length is positive.
pub fn symbol_count(normalized: f64, n_t: usize) -> usize {
    if normalized <= 0.0 {
        return 0;
    }
    ((normalized * n_t as f64).round() as usize).max(1)
}

fn run_trials<T, F>(spec: &SimulationSpec, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut TrialRng) -> Result<T> + Sync,
{
    spec.validate()?;
    let job = || {
        (0..spec.trials as u64)
            .into_par_iter()
            .map(|i| trial(&mut substream(spec.seed, i + 1)))
            .collect::<Result<Vec<T>>>()
    };
    match spec.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Resource(e.to_string()))?
            .install(job),
        None => job(),
    }
}

enum Beams {
    Fresh,
    Fixed(Codebook),
}

impl Beams {
    fn new(spec: &SimulationSpec, n_t: usize, bits: u32) -> Result<Self> {
        if bits > MAX_CODEBOOK_BITS {
            return Err(Error::Capacity {
                bits,
                max_bits: MAX_CODEBOOK_BITS,
            });
        }
        Ok(if spec.fresh_codebook_per_trial {
            Self::Fresh
        } else {
            Self::Fixed(generate_codebook(n_t, bits, spec.seed)?)
        })
    }

    /// Searches the first `2^bits` beams, leaving the winner in `best`.
    /// `marks` receives the running maximum after each power of two.
    fn search<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        gain: &BeamGain,
        bits: u32,
        best: &mut [Complex64],
        mut marks: Option<&mut Vec<f64>>,
    ) -> f64 {
        let size = 1usize << bits;
        let mut top = f64::NEG_INFINITY;
        let mut scratch = vec![Complex64::new(0.0, 0.0); gain.n_t()];
        for j in 0..size {
            let v: &[Complex64] = match self {
                Self::Fresh => {
                    draw_unit_vector(rng, &mut scratch);
                    &scratch
                }
                Self::Fixed(cb) => cb.vector(j),
            };
            let g = gain.gain(v);
            if g > top {
                top = g;
                best.copy_from_slice(v);
            }
            if let Some(m) = marks.as_deref_mut() {
                if (j + 1).is_power_of_two() {
                    m.push(top);
                }
            }
        }
        top
    }
}

fn check_variance(sigma_w2: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&sigma_w2) {
        return Err(domain("sigma_w2", sigma_w2, "0 <= σ_w² <= 1"));
    }
    Ok(())
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, n_r: usize, n_t: usize) -> CMatrix {
    CMatrix::from_fn(n_r, n_t, |_, _| complex_normal(rng, 1.0))
}

/// `E[log(1 + ρ‖H v(Ĥ)‖²)]`: the beam is chosen on the estimate and used
/// on the true channel.
pub fn simulate_genie_rate(link: &Link, sigma_w2: f64, bits: u32, spec: &SimulationSpec) -> Result<RateEstimate> {
    link.validate()?;
    check_variance(sigma_w2)?;
    let beams = Beams::new(spec, link.n_t, bits)?;
    let samples = run_trials(spec, |rng| {
        let (h, h_hat) = synthesize_estimate_with(rng, link.n_r, link.n_t, sigma_w2)?;
        let mut v = vec![Complex64::new(0.0, 0.0); link.n_t];
        beams.search(rng, &BeamGain::new(&h_hat.estimate), bits, &mut v, None);
        Ok((link.snr * BeamGain::new(&h.matrix).gain(&v)).ln_1p())
    })?;
    Ok(Estimate::from_samples(&samples))
}

/// `E[log(1 + ‖Ĥ v(Ĥ)‖²/(σ_w² + 1/ρ))]`, the rate with the estimation
/// error treated as Gaussian noise.
pub fn simulate_lower_rate(link: &Link, sigma_w2: f64, bits: u32, spec: &SimulationSpec) -> Result<RateEstimate> {
    link.validate()?;
    check_variance(sigma_w2)?;
    let beams = Beams::new(spec, link.n_t, bits)?;
    let noise = sigma_w2 + 1.0 / link.snr;
    let samples = run_trials(spec, |rng| {
        let (_, h_hat) = synthesize_estimate_with(rng, link.n_r, link.n_t, sigma_w2)?;
        let mut v = vec![Complex64::new(0.0, 0.0); link.n_t];
        let eta = beams.search(rng, &BeamGain::new(&h_hat.estimate), bits, &mut v, None);
        Ok((eta / noise).ln_1p())
    })?;
    Ok(Estimate::from_samples(&samples))
}

/// Moments of the selected beam gain `η = ‖Ĥ v(Ĥ)‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaStats {
    pub e_eta: f64,
    pub sigma_eta: f64,
    /// `σ_η / (2 E[η])`.
    pub c_factor: f64,
    pub std_err: f64,
    pub trials: usize,
}

impl EtaStats {
    fn from_samples(samples: &[f64]) -> Self {
        let (mean, sd) = mean_and_sd(samples);
        Self {
            e_eta: mean,
            sigma_eta: sd,
            c_factor: if mean > 0.0 { sd / (2.0 * mean) } else { 0.0 },
            std_err: sd / (samples.len() as f64).sqrt(),
            trials: samples.len(),
        }
    }
}

pub fn estimate_eta_stats(link: &Link, sigma_w2: f64, bits: u32, spec: &SimulationSpec) -> Result<EtaStats> {
    link.validate()?;
    check_variance(sigma_w2)?;
    let beams = Beams::new(spec, link.n_t, bits)?;
    let samples = run_trials(spec, |rng| {
        let (_, h_hat) = synthesize_estimate_with(rng, link.n_r, link.n_t, sigma_w2)?;
        let mut v = vec![Complex64::new(0.0, 0.0); link.n_t];
        Ok(beams.search(rng, &BeamGain::new(&h_hat.estimate), bits, &mut v, None))
    })?;
    Ok(EtaStats::from_samples(&samples))
}

/// η moments for a unit-variance estimate at every codebook size
/// `2^0 ..= 2^max_bits`.
///
/// The beam choice does not depend on the scale of `Ĥ`, so for an
/// estimate of variance `1 - σ_w²` the mean scales by `1 - σ_w²` and the
/// ratio `c` is unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaTable {
    pub n_t: usize,
    pub n_r: usize,
    pub stats: Vec<EtaStats>,
}

impl EtaTable {
    pub fn max_bits(&self) -> u32 {
        self.stats.len() as u32 - 1
    }

    /// `(E[η], c)` for estimation error variance `sigma_w2`.
    pub fn moments(&self, sigma_w2: f64, bits: u32) -> Result<(f64, f64)> {
        check_variance(sigma_w2)?;
        let s = self.stats.get(bits as usize).ok_or(Error::Capacity {
            bits,
            max_bits: self.max_bits(),
        })?;
        Ok(((1.0 - sigma_w2) * s.e_eta, s.c_factor))
    }
}

pub fn estimate_eta_table(link: &Link, max_bits: u32, spec: &SimulationSpec) -> Result<EtaTable> {
    link.validate()?;
    let beams = Beams::new(spec, link.n_t, max_bits)?;
    let rows = run_trials(spec, |rng| {
        let g = gaussian_matrix(rng, link.n_r, link.n_t);
        let mut v = vec![Complex64::new(0.0, 0.0); link.n_t];
        let mut marks = Vec::with_capacity(max_bits as usize + 1);
        beams.search(rng, &BeamGain::new(&g), max_bits, &mut v, Some(&mut marks));
        Ok(marks)
    })?;
    let stats = (0..=max_bits as usize)
        .map(|b| {
            let column: Vec<f64> = rows.iter().map(|r| r[b]).collect();
            EtaStats::from_samples(&column)
        })
        .collect();
    Ok(EtaTable {
        n_t: link.n_t,
        n_r: link.n_r,
        stats,
    })
}

/// Per-entry squared error of the pilot-based MMSE estimate, simulated
/// end to end with `t` pilot symbols.
pub fn validate_mse(n_t: usize, t: usize, snr: f64, spec: &SimulationSpec) -> Result<Estimate> {
    let design = training_matrix(t, n_t)?;
    let filter = MmseFilter::new(&design, snr)?;
    let mut a = design.pilot_matrix.clone();
    for (k, b) in design.pilot_symbols.iter().enumerate() {
        for z in a.column_mut(k).iter_mut() {
            *z *= b;
        }
    }
    let noise_var = 1.0 / snr;
    let samples = run_trials(spec, |rng| {
        let h = gaussian_matrix(rng, 1, n_t);
        let noise = CMatrix::from_fn(1, t, |_, _| complex_normal(rng, noise_var));
        let h_hat = filter.apply(&(&h * &a + noise))?;
        Ok((h - h_hat).norm_squared() / n_t as f64)
    })?;
    Ok(Estimate::from_samples(&samples))
}

/// Sample mean of `ν = max_j |ĥ v_j|² / ‖ĥ‖²`.
pub fn validate_e_nu(n_t: usize, bits: u32, spec: &SimulationSpec) -> Result<Estimate> {
    if n_t < 1 {
        return Err(domain("n_t", n_t as f64, "N_t >= 1"));
    }
    let beams = Beams::new(spec, n_t, bits)?;
    let samples = run_trials(spec, |rng| {
        let h = gaussian_matrix(rng, 1, n_t);
        let mut v = vec![Complex64::new(0.0, 0.0); n_t];
        let top = beams.search(rng, &BeamGain::new(&h), bits, &mut v, None);
        Ok(top / h.norm_squared())
    })?;
    Ok(Estimate::from_samples(&samples))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRates {
    /// Eigen-beamforming with the channel known at both ends.
    pub perfect_csi: Estimate,
    /// RVQ with `2^B` beams chosen on the true channel.
    pub rvq_perfect_estimation: Estimate,
}

fn largest_eigenvalue(h: &CMatrix) -> f64 {
    if h.nrows() == 1 {
        return h.norm_squared();
    }
    let gram = if h.nrows() < h.ncols() { h * h.adjoint() } else { h.adjoint() * h };
    gram.symmetric_eigenvalues().max()
}

/// Both reference rates on shared channel draws.
pub fn reference_rates(link: &Link, bits: u32, spec: &SimulationSpec) -> Result<ReferenceRates> {
    link.validate()?;
    let beams = Beams::new(spec, link.n_t, bits)?;
    let pairs = run_trials(spec, |rng| {
        let h = gaussian_matrix(rng, link.n_r, link.n_t);
        let mut v = vec![Complex64::new(0.0, 0.0); link.n_t];
        let rvq = beams.search(rng, &BeamGain::new(&h), bits, &mut v, None);
        let lambda = largest_eigenvalue(&h);
        Ok(((link.snr * lambda).ln_1p(), (link.snr * rvq).ln_1p()))
    })?;
    let perfect: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let rvq: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    Ok(ReferenceRates {
        perfect_csi: Estimate::from_samples(&perfect),
        rvq_perfect_estimation: Estimate::from_samples(&rvq),
    })
}
