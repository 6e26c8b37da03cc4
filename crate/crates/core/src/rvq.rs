//! Random vector quantization of the beamformer.
//!
//! A codebook holds `2^B` i.i.d. isotropic unit vectors; the receiver
//! feeds back the index maximizing `‖Ĥ v_j‖²`. Besides generation and
//! selection this module carries the closed-form statistics of the
//! quantization gain `ν = max_j |ĥ v_j|² / ‖ĥ‖²` and the large-system
//! received power `γ_rvq` used by the MIMO bounds.

use std::f64::consts::{E, LN_2};

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{CMatrix, ChannelEstimate};
use crate::error::{domain, Error, Result};
use crate::numerics::{gamma, lambert_w_m1, log_beta, log_gamma, EULER_GAMMA};
use crate::sampling::{complex_normal, substream};

/// Largest codebook, in bits, that will be materialized.
pub const MAX_CODEBOOK_BITS: u32 = 24;

/// `2^B` unit-norm beamforming vectors of dimension `N_t`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    vectors: Vec<Complex64>,
    n_t: usize,
    bits: u32,
    seed: Option<u64>,
}

impl Codebook {
    /// Draws a codebook from `rng`. Vector `j` only depends on the first
    /// `j + 1` draws, so a larger codebook from the same stream extends a
    /// smaller one.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n_t: usize, bits: u32) -> Result<Self> {
        if bits > MAX_CODEBOOK_BITS {
            return Err(Error::Capacity {
                bits,
                max_bits: MAX_CODEBOOK_BITS,
            });
        }
        if n_t < 1 {
            return Err(domain("n_t", n_t as f64, "N_t >= 1"));
        }
        let size = 1usize << bits;
        let mut vectors = vec![Complex64::new(0.0, 0.0); size * n_t];
        for v in vectors.chunks_exact_mut(n_t) {
            draw_unit_vector(rng, v);
        }
        Ok(Self {
            vectors,
            n_t,
            bits,
            seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len() / self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn vector(&self, j: usize) -> &[Complex64] {
        &self.vectors[j * self.n_t..(j + 1) * self.n_t]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, Complex64> {
        self.vectors.chunks_exact(self.n_t)
    }
}

pub(crate) fn draw_unit_vector<R: Rng + ?Sized>(rng: &mut R, out: &mut [Complex64]) {
    loop {
        let mut norm2 = 0.0;
        for z in out.iter_mut() {
            *z = complex_normal(rng, 1.0);
            norm2 += z.norm_sqr();
        }
        if norm2 > 0.0 {
            let inv = 1.0 / norm2.sqrt();
            out.iter_mut().for_each(|z| *z *= inv);
            return;
        }
    }
}

/// Reproducible codebook for `seed`.
pub fn generate_codebook(n_t: usize, bits: u32, seed: u64) -> Result<Codebook> {
    let mut rng = substream(seed, 0);
    let mut codebook = Codebook::random(&mut rng, n_t, bits)?;
    codebook.seed = Some(seed);
    Ok(codebook)
}

/// Evaluates `‖M v‖²` for a fixed matrix over many candidate `v`.
///
/// Tall matrices are reduced to their Gram matrix `MᴴM` first.
#[derive(Debug, Clone)]
pub struct BeamGain {
    kind: GainKind,
    n_t: usize,
}

#[derive(Debug, Clone)]
enum GainKind {
    Rows { rows: Vec<Complex64>, n_r: usize },
    Gram(Vec<Complex64>),
}

impl BeamGain {
    pub fn new(matrix: &CMatrix) -> Self {
        let (n_r, n_t) = matrix.shape();
        let kind = if n_r <= n_t {
            let mut rows = Vec::with_capacity(n_r * n_t);
            for r in 0..n_r {
                rows.extend(matrix.row(r).iter().copied());
            }
            GainKind::Rows { rows, n_r }
        } else {
            let g = matrix.adjoint() * matrix;
            let mut gram = Vec::with_capacity(n_t * n_t);
            for a in 0..n_t {
                gram.extend(g.row(a).iter().copied());
            }
            GainKind::Gram(gram)
        };
        Self { kind, n_t }
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    #[inline]
    pub fn gain(&self, v: &[Complex64]) -> f64 {
        match &self.kind {
            GainKind::Rows { rows, n_r } => {
                let mut total = 0.0;
                for r in 0..*n_r {
                    let row = &rows[r * self.n_t..(r + 1) * self.n_t];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (h, x) in row.iter().zip(v) {
                        acc += h * x;
                    }
                    total += acc.norm_sqr();
                }
                total
            }
            GainKind::Gram(g) => {
                let mut total = 0.0;
                for a in 0..self.n_t {
                    let row = &g[a * self.n_t..(a + 1) * self.n_t];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (gab, x) in row.iter().zip(v) {
                        acc += gab * x;
                    }
                    total += (v[a].conj() * acc).re;
                }
                total
            }
        }
    }

    /// Index and gain of the best codebook entry; ties go to the lowest index.
    pub fn best(&self, codebook: &Codebook) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (j, v) in codebook.iter().enumerate() {
            let g = self.gain(v);
            if g > best.1 {
                best = (j, g);
            }
        }
        best
    }
}

/// `‖M v‖²`.
pub fn beam_gain(matrix: &CMatrix, v: &[Complex64]) -> Result<f64> {
    if v.len() != matrix.ncols() {
        return Err(Error::Dimension {
            expected: matrix.ncols(),
            found: v.len(),
        });
    }
    Ok(BeamGain::new(matrix).gain(v))
}

/// Picks `argmax_j ‖Ĥ v_j‖²` from the codebook.
pub fn select_beamformer<'c>(estimate: &ChannelEstimate, codebook: &'c Codebook) -> Result<(usize, &'c [Complex64])> {
    if codebook.n_t() != estimate.estimate.ncols() {
        return Err(Error::Dimension {
            expected: estimate.estimate.ncols(),
            found: codebook.n_t(),
        });
    }
    let (index, _) = BeamGain::new(&estimate.estimate).best(codebook);
    Ok((index, codebook.vector(index)))
}

/// Mean, variance and concentration factor of the quantization gain ν.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationStats {
    pub e_nu: f64,
    pub var_nu: f64,
    pub d_factor: f64,
}

pub fn quantization_stats(n_t: usize, bits: f64) -> Result<QuantizationStats> {
    let e_nu = expected_nu_exact(n_t, bits)?;
    let var = var_nu(n_t, bits)?;
    let d = d_factor(n_t, bits / n_t as f64)?;
    Ok(QuantizationStats {
        e_nu,
        var_nu: var,
        d_factor: d,
    })
}

fn check_antennas(n_t: usize) -> Result<()> {
    if n_t < 2 {
        return Err(domain("n_t", n_t as f64, "N_t >= 2"));
    }
    Ok(())
}

fn check_nonneg(name: &'static str, x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(name, x, ">= 0"));
    }
    Ok(())
}

/// `ln(n B(n, q))` with `n = 2^bits`.
fn log_n_beta(bits: f64, q: f64) -> Result<f64> {
    let ln_n = bits * LN_2;
    if ln_n > 700.0 {
        // n B(n, q) = Γ(q) n^{1-q} (1 + O(1/n)) and 1/n is far below f64 resolution
        return Ok(log_gamma(q)? + (1.0 - q) * ln_n);
    }
    Ok(ln_n + log_beta(ln_n.exp(), q)?)
}

/// Exact mean quantization gain `E[ν] = 1 - 2^B B(2^B, N_t/(N_t - 1))`.
pub fn expected_nu_exact(n_t: usize, bits: f64) -> Result<f64> {
    check_antennas(n_t)?;
    check_nonneg("bits", bits)?;
    let q = 1.0 + 1.0 / (n_t as f64 - 1.0);
    Ok(-log_n_beta(bits, q)?.exp_m1())
}

/// Closed-form bracket `(lower, upper)` on `E[ν]` at normalized feedback `B̄`.
pub fn expected_nu_bounds(n_t: usize, b_bar: f64) -> Result<(f64, f64)> {
    check_antennas(n_t)?;
    check_nonneg("b_bar", b_bar)?;
    let p = (-b_bar * LN_2).exp();
    let lower = -(-b_bar * LN_2).exp_m1();
    let tail = (1.0 + (EULER_GAMMA - 1.0) * p + (-b_bar * n_t as f64 * LN_2).exp()) / (n_t as f64 - 1.0);
    Ok((lower, lower + tail))
}

/// Variance of ν: `n B(n, 1 + 2/(N_t-1)) - n² B²(n, 1 + 1/(N_t-1))`, `n = 2^B`.
pub fn var_nu(n_t: usize, bits: f64) -> Result<f64> {
    check_antennas(n_t)?;
    check_nonneg("bits", bits)?;
    let a = 1.0 / (n_t as f64 - 1.0);
    let second = log_n_beta(bits, 1.0 + 2.0 * a)?;
    let first = log_n_beta(bits, 1.0 + a)?;
    // E[(1-ν)²] - E²[1-ν], factored to keep relative accuracy when both are tiny
    let value = second.exp() * -(2.0 * first - second).exp_m1();
    Ok(value.max(0.0))
}

/// Concentration factor `d(N_t)` of the Jensen-type lower bound.
pub fn d_factor(n_t: usize, b_bar: f64) -> Result<f64> {
    check_antennas(n_t)?;
    check_nonneg("b_bar", b_bar)?;
    let nt = n_t as f64;
    let a = 1.0 / (nt - 1.0);
    let g1 = gamma(1.0 + a)?;
    let g2 = gamma(1.0 + 2.0 * a)?;
    let tail = (-b_bar * nt * LN_2).exp().ln_1p();
    let numerator = g2 - g1 * g1 * (-2.0 * a * tail).exp();
    let gap = (b_bar * (1.0 + a) * LN_2).exp() - g1;
    if gap == 0.0 {
        return Err(Error::Singular(format!(
            "d(N_t) denominator vanishes at N_t = {n_t}, B̄ = {b_bar}"
        )));
    }
    let inner = 1.0 / nt + (1.0 + 1.0 / nt) * numerator / (gap * gap);
    Ok(0.5 * inner.max(0.0).sqrt())
}

/// Feedback level `B̄*` bounding the regime of the `γ_rvq` fixed point.
pub fn b_star(n_r_bar: f64) -> Result<f64> {
    if !(n_r_bar > 0.0) || !n_r_bar.is_finite() {
        return Err(domain("n_r_bar", n_r_bar, "N̄r > 0"));
    }
    let s = n_r_bar.sqrt();
    Ok((n_r_bar * s.ln() - n_r_bar * s.ln_1p() + s) / LN_2)
}

/// Relative slack on `B̄ <= B̄*` absorbing rounding in callers that step
/// up to the boundary.
pub const REGIME_GUARD: f64 = 1e-12;

/// Large-system received power `‖Ĥv‖²/N_t` under RVQ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRvq {
    pub value: f64,
    pub n_r_bar: f64,
    pub b_bar: f64,
}

impl GammaRvq {
    /// `(-γ/N̄r) e^{-γ/N̄r} + e^{-1} 2^{-B̄/N̄r}`, zero at the solution.
    pub fn residual(&self) -> f64 {
        let u = self.value / self.n_r_bar;
        -u * (-u).exp() + (-1.0 - self.b_bar / self.n_r_bar * LN_2).exp()
    }
}

/// Solves `(-γ/N̄r) e^{-γ/N̄r} = -e^{-1} 2^{-B̄/N̄r}` on the lower branch,
/// valid for `0 <= B̄ <= B̄*`.
pub fn gamma_rvq(n_r_bar: f64, b_bar: f64) -> Result<GammaRvq> {
    let cap = b_star(n_r_bar)?;
    check_nonneg("b_bar", b_bar)?;
    if b_bar > cap * (1.0 + REGIME_GUARD) {
        return Err(Error::OutOfRegime {
            b_bar,
            b_star: cap,
            n_r_bar,
        });
    }
    let b_bar = b_bar.min(cap);
    let value = if b_bar == 0.0 {
        n_r_bar
    } else {
        let x = -(-b_bar / n_r_bar * LN_2).exp() / E;
        -n_r_bar * lambert_w_m1(x)?
    };
    Ok(GammaRvq {
        value,
        n_r_bar,
        b_bar,
    })
}
