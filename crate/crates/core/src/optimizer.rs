//! Training/feedback allocation that maximizes the effective rate.
//!
//! The data share is eliminated through `D̄ = L̄ - T̄ - μB̄`, leaving a
//! two-dimensional search over the triangle `T̄, B̄ >= 0`, `T̄ + μB̄ <= L̄`.
//! A uniform grid locates the basin and coordinate descent with
//! golden-section line searches polishes the grid winner.

use rayon::prelude::*;

use crate::bounds::{
    effective_rate, mimo_bounds_from_table, mimo_capacity_bounds, miso_capacity_bounds, BoundKind, ChannelKind,
    EffectiveRate,
};
use crate::channel::{OverheadAllocation, SystemConfig};
use crate::error::{domain, Error, Result};
use crate::montecarlo::EtaTable;
use crate::rvq::b_star;

pub const DEFAULT_GRID: usize = 200;
pub const OBJECTIVE_TOLERANCE: f64 = 1e-8;
pub const ARGUMENT_TOLERANCE: f64 = 1e-7;
const MAX_SWEEPS: usize = 500;
/// Optima within this fraction of `B̄*` are flagged as pinned to the cap.
const CAP_PROXIMITY: f64 = 0.01;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Which per-symbol bound family feeds the objective.
#[derive(Debug, Clone, Copy)]
pub enum RateModel<'a> {
    Miso,
    /// Large-system MIMO bounds with a fixed concentration factor `c`;
    /// feedback is confined to `[0, B̄*]`.
    Mimo { c: f64 },
    /// MIMO bounds with simulated η moments; feedback is an integer bit
    /// count up to the table size.
    MimoTable(&'a EtaTable),
}

impl RateModel<'_> {
    pub fn channel_kind(&self) -> ChannelKind {
        match self {
            Self::Miso => ChannelKind::Miso,
            _ => ChannelKind::Mimo,
        }
    }

    pub fn from_kind(kind: ChannelKind, c: f64) -> RateModel<'static> {
        match kind {
            ChannelKind::Miso => RateModel::Miso,
            ChannelKind::Mimo => RateModel::Mimo { c },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    pub allocation: OverheadAllocation,
    pub rate: EffectiveRate,
    pub bound_kind: BoundKind,
    pub iterations: usize,
    pub tolerance_met: bool,
    /// MIMO optimum within 1% of `B̄*`.
    pub at_feedback_cap: bool,
    /// Objective was zero on the whole grid; the allocation is the origin.
    pub degenerate: bool,
}

impl OptimizationResult {
    pub fn overhead_fraction(&self, config: &SystemConfig) -> f64 {
        self.allocation.overhead_fraction(config)
    }
}

struct Objective<'a> {
    config: &'a SystemConfig,
    model: RateModel<'a>,
    bound: BoundKind,
}

impl Objective<'_> {
    /// Largest admissible `B̄` in continuous models.
    fn b_limit(&self) -> Result<f64> {
        let budget = self.config.l_bar / self.config.mu;
        Ok(match self.model {
            RateModel::Mimo { .. } => budget.min(b_star(self.config.n_r_bar())?),
            _ => budget,
        })
    }

    fn per_symbol(&self, t_bar: f64, b_bar: f64) -> Result<f64> {
        let pair = match self.model {
            RateModel::Miso => miso_capacity_bounds(self.config, t_bar, b_bar)?,
            RateModel::Mimo { c } => mimo_capacity_bounds(self.config, t_bar, b_bar, c)?,
            RateModel::MimoTable(table) => {
                let bits = (b_bar * self.config.n_t as f64).round() as u32;
                mimo_bounds_from_table(self.config, table, t_bar, bits)?
            }
        };
        Ok(pair.get(self.bound))
    }

    fn rate(&self, t_bar: f64, b_bar: f64) -> Result<EffectiveRate> {
        let allocation = OverheadAllocation::new(self.config, t_bar, b_bar)?;
        Ok(effective_rate(self.per_symbol(t_bar, b_bar)?, allocation, self.config.l_bar))
    }

    fn value(&self, t_bar: f64, b_bar: f64) -> Result<f64> {
        Ok(self.rate(t_bar, b_bar)?.value)
    }

    fn t_max(&self, b_bar: f64) -> f64 {
        (self.config.l_bar - self.config.mu * b_bar).max(0.0)
    }
}

/// Golden-section maximization of `f` on `[lo, hi]`.
fn golden_max(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > ARGUMENT_TOLERANCE * hi.abs().max(1.0) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Maximizes the effective rate under `T̄ + μB̄ + D̄ = L̄`.
pub fn optimize_allocation(
    config: &SystemConfig,
    channel_kind: ChannelKind,
    bound_kind: BoundKind,
    c_estimate: f64,
) -> Result<OptimizationResult> {
    optimize_with_model(config, RateModel::from_kind(channel_kind, c_estimate), bound_kind, DEFAULT_GRID)
}

pub fn optimize_with_model(
    config: &SystemConfig,
    model: RateModel<'_>,
    bound_kind: BoundKind,
    grid: usize,
) -> Result<OptimizationResult> {
    config.validate()?;
    if grid < 2 {
        return Err(domain("grid", grid as f64, "grid >= 2"));
    }
    let objective = Objective {
        config,
        model,
        bound: bound_kind,
    };
    match model {
        RateModel::MimoTable(table) => optimize_integer_feedback(&objective, table, grid),
        _ => optimize_continuous(&objective, grid),
    }
}

fn optimize_continuous(objective: &Objective<'_>, grid: usize) -> Result<OptimizationResult> {
    let config = objective.config;
    let b_limit = objective.b_limit()?;
    let dt = config.l_bar / (grid - 1) as f64;
    let db = b_limit / (grid - 1) as f64;

    let values: Vec<Option<f64>> = (0..grid * grid)
        .into_par_iter()
        .map(|k| {
            let (t, b) = ((k / grid) as f64 * dt, (k % grid) as f64 * db);
            if t + config.mu * b > config.l_bar {
                return Ok(None);
            }
            objective.value(t, b).map(Some)
        })
        .collect::<Result<_>>()?;
    let mut best = (0usize, f64::NEG_INFINITY);
    for (k, v) in values.iter().enumerate() {
        if let Some(v) = v {
            if *v > best.1 {
                best = (k, *v);
            }
        }
    }
    if best.1 <= 0.0 {
        return finish(objective, 0.0, 0.0, 0, true, true, b_limit);
    }

    let (mut t, mut b) = ((best.0 / grid) as f64 * dt, (best.0 % grid) as f64 * db);
    let mut f = best.1;
    let (mut step_t, mut step_b) = (dt, db);
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let (t0, b0, f0) = (t, b, f);

        let hi = (t + step_t).min(objective.t_max(b));
        let (t_new, f_new) = golden_max((t - step_t).max(0.0), hi, |x| objective.value(x, b))?;
        if f_new > f {
            t = t_new;
            f = f_new;
        }
        let b_hi = (b + step_b).min(b_limit).min((config.l_bar - t) / config.mu);
        let (b_new, f_new) = golden_max((b - step_b).max(0.0), b_hi, |y| objective.value(t, y))?;
        if f_new > f {
            b = b_new;
            f = f_new;
        }

        let moved = (t - t0).abs().max((b - b0).abs());
        if f - f0 < OBJECTIVE_TOLERANCE && moved < ARGUMENT_TOLERANCE {
            converged = true;
            break;
        }
        // keep the brackets a few moves wide around the current iterate
        step_t = (4.0 * (t - t0).abs()).clamp(ARGUMENT_TOLERANCE, dt);
        step_b = (4.0 * (b - b0).abs()).clamp(ARGUMENT_TOLERANCE, db);
    }
    finish(objective, t, b, sweeps, converged, false, b_limit)
}

fn finish(
    objective: &Objective<'_>,
    t: f64,
    b: f64,
    iterations: usize,
    tolerance_met: bool,
    degenerate: bool,
    b_limit: f64,
) -> Result<OptimizationResult> {
    let rate = objective.rate(t, b)?;
    let at_feedback_cap = match objective.model {
        RateModel::Mimo { .. } => b >= (1.0 - CAP_PROXIMITY) * b_limit,
        _ => false,
    };
    Ok(OptimizationResult {
        allocation: rate.allocation,
        rate,
        bound_kind: objective.bound,
        iterations,
        tolerance_met,
        at_feedback_cap,
        degenerate,
    })
}

/// Best training length for every feasible bit count in the table.
fn optimize_integer_feedback(objective: &Objective<'_>, table: &EtaTable, grid: usize) -> Result<OptimizationResult> {
    let config = objective.config;
    if table.n_t != config.n_t || table.n_r != config.n_r {
        return Err(Error::Dimension {
            expected: config.n_t,
            found: table.n_t,
        });
    }
    let n_t = config.n_t as f64;
    let mut best: Option<(f64, f64, f64)> = None;
    let mut iterations = 0;
    for bits in 0..=table.max_bits() {
        let b = bits as f64 / n_t;
        let t_max = objective.t_max(b);
        if config.mu * b >= config.l_bar {
            break;
        }
        let dt = t_max / (grid - 1) as f64;
        let mut start = (0.0, f64::NEG_INFINITY);
        for i in 0..grid {
            let t = i as f64 * dt;
            let v = objective.value(t, b)?;
            if v > start.1 {
                start = (t, v);
            }
        }
        let (t, v) = golden_max((start.0 - dt).max(0.0), (start.0 + dt).min(t_max), |x| objective.value(x, b))?;
        let (t, v) = if v > start.1 { (t, v) } else { start };
        iterations += 1;
        if best.is_none_or(|p| v > p.2) {
            best = Some((t, b, v));
        }
    }
    let (t, b, v) = best.ok_or_else(|| Error::Infeasible("no feasible feedback length".into()))?;
    finish(objective, t, b, iterations, true, v <= 0.0, f64::INFINITY)
}

/// One point of an overhead sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub overhead_fraction: f64,
    pub t_bar: f64,
    pub b_bar: f64,
    pub rate: f64,
}

/// Effective rate along `T̄ = ratio·μB̄` as `T̄ + μB̄` runs over `[0, L̄]`.
/// MIMO sweeps stop where `B̄` would pass `B̄*`.
pub fn sweep_overhead(
    config: &SystemConfig,
    model: RateModel<'_>,
    bound_kind: BoundKind,
    ratio: f64,
    points: usize,
) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(domain("ratio", ratio, "T̄/(μB̄) > 0"));
    }
    if points < 2 {
        return Err(domain("points", points as f64, "points >= 2"));
    }
    let objective = Objective {
        config,
        model,
        bound: bound_kind,
    };
    let b_limit = objective.b_limit()?;
    let mut out = Vec::with_capacity(points);
    for k in 0..points {
        let fraction = k as f64 / (points - 1) as f64;
        let total = fraction * config.l_bar;
        let b = total / (1.0 + ratio) / config.mu;
        if b > b_limit {
            break;
        }
        let t = (total - config.mu * b).max(0.0);
        out.push(SweepPoint {
            overhead_fraction: fraction,
            t_bar: t,
            b_bar: b,
            rate: objective.value(t, b)?,
        });
    }
    Ok(out)
}

/// Like [`sweep_overhead`] but with the training/feedback split
/// optimized at every total overhead.
pub fn sweep_overhead_optimized(
    config: &SystemConfig,
    model: RateModel<'_>,
    bound_kind: BoundKind,
    points: usize,
) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    if points < 2 {
        return Err(domain("points", points as f64, "points >= 2"));
    }
    let objective = Objective {
        config,
        model,
        bound: bound_kind,
    };
    let b_limit = objective.b_limit()?;
    (0..points)
        .into_par_iter()
        .map(|k| {
            let fraction = k as f64 / (points - 1) as f64;
            let total = fraction * config.l_bar;
            // split by the feedback share; T̄ takes the rest
            let b_max = (total / config.mu).min(b_limit);
            let at = |b: f64| objective.value((total - config.mu * b).max(0.0), b);
            let scan = 64;
            let mut start = (0.0, at(0.0)?);
            for i in 1..=scan {
                let b = b_max * i as f64 / scan as f64;
                let v = at(b)?;
                if v > start.1 {
                    start = (b, v);
                }
            }
            let h = b_max / scan as f64;
            let (b, v) = if h > 0.0 {
                golden_max((start.0 - h).max(0.0), (start.0 + h).min(b_max), at)?
            } else {
                start
            };
            let (b, v) = if v > start.1 { (b, v) } else { start };
            Ok(SweepPoint {
                overhead_fraction: fraction,
                t_bar: (total - config.mu * b).max(0.0),
                b_bar: b,
                rate: v,
            })
        })
        .collect()
}

/// Limit-law predictions evaluated at a finite antenna count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticPrediction {
    pub channel_kind: ChannelKind,
    pub n_t: f64,
    /// `L̄ / log N_t`.
    pub t_bar_pred: f64,
    /// `L̄/(μ log N_t)` (MISO) or `L̄² log 2/(2μ² N̄r log² N_t)` (MIMO).
    pub b_bar_pred: f64,
    /// Upper end of the bracket on the capacity offset constant.
    pub capacity_offset: f64,
    /// Lower end, `capacity_offset - log(1 + ρ)`.
    pub capacity_offset_lower: f64,
    /// Predicted training share of `L̄`, `δ/2` (MISO) or `ε₁` (MIMO).
    pub training_fraction: f64,
    /// Predicted feedback share of `L̄`, `δ/2` (MISO) or `ε₂` (MIMO).
    pub feedback_fraction: f64,
}

impl AsymptoticPrediction {
    /// Predicted `D̄/L̄`.
    pub fn data_fraction(&self) -> f64 {
        1.0 - self.training_fraction - self.feedback_fraction
    }
}

pub fn asymptotic_prediction(config: &SystemConfig, channel_kind: ChannelKind) -> Result<AsymptoticPrediction> {
    config.validate()?;
    asymptotic_prediction_at(config.n_t as f64, config, channel_kind)
}

/// Same as [`asymptotic_prediction`] at a real-valued `N_t`, which lets the
/// limit laws be evaluated far beyond simulable sizes.
pub fn asymptotic_prediction_at(
    n_t: f64,
    config: &SystemConfig,
    channel_kind: ChannelKind,
) -> Result<AsymptoticPrediction> {
    if !(n_t > std::f64::consts::E) || !n_t.is_finite() {
        return Err(domain("n_t", n_t, "N_t > e"));
    }
    let (l, mu, rho) = (config.l_bar, config.mu, config.snr);
    let ln_n = n_t.ln();
    let ln2 = std::f64::consts::LN_2;
    let t_bar_pred = l / ln_n;
    let pred = match channel_kind {
        ChannelKind::Miso => {
            let zeta = (l * l * ln2).ln() - (mu * (1.0 + 1.0 / rho)).ln() - 2.0;
            let delta = 2.0 / ln_n;
            (l / (mu * ln_n), zeta, delta / 2.0, delta / 2.0)
        }
        ChannelKind::Mimo => {
            let n_r_bar = config.n_r_bar();
            let xi = (l * n_r_bar).ln() - (1.0 + 1.0 / rho).ln() - 1.0;
            let eps2 = l * ln2 / (2.0 * n_r_bar * mu * ln_n * ln_n);
            (l * l * ln2 / (2.0 * mu * mu * n_r_bar * ln_n * ln_n), xi, 1.0 / ln_n, eps2)
        }
    };
    Ok(AsymptoticPrediction {
        channel_kind,
        n_t,
        t_bar_pred,
        b_bar_pred: pred.0,
        capacity_offset: pred.1,
        capacity_offset_lower: pred.1 - rho.ln_1p(),
        training_fraction: pred.2,
        feedback_fraction: pred.3,
    })
}

/// Scaled optimizer outputs whose limits the asymptotic laws predict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n_t: usize,
    pub t_scaled: f64,
    /// `B̄°·log N_t` (MISO) or `B̄°·log² N_t` (MIMO).
    pub b_scaled: f64,
    /// `μB̄°/T̄°`.
    pub feedback_to_training: f64,
    /// `C° - log(ρN_t) + k log log N_t` with `k = 2` (MISO) or `1` (MIMO).
    pub capacity_offset: f64,
    pub result: OptimizationResult,
}

/// Optimizes at each antenna count of `n_t_list` with the other
/// parameters of `template` held fixed. MIMO keeps `N̄r` fixed.
pub fn convergence_series(
    template: &SystemConfig,
    channel_kind: ChannelKind,
    bound_kind: BoundKind,
    c_estimate: f64,
    n_t_list: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    if n_t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("n_t_list", f64::NAN, "strictly increasing antenna counts"));
    }
    let n_r_bar = template.n_r_bar();
    n_t_list
        .iter()
        .map(|&n_t| {
            if n_t < 3 {
                return Err(domain("n_t", n_t as f64, "N_t >= 3"));
            }
            let config = match channel_kind {
                ChannelKind::Miso => SystemConfig::miso(n_t, template.snr, template.l_bar, template.mu)?,
                ChannelKind::Mimo => SystemConfig::mimo(n_t, n_r_bar, template.snr, template.l_bar, template.mu)?,
            };
            let result = optimize_allocation(&config, channel_kind, bound_kind, c_estimate)?;
            let ln_n = (n_t as f64).ln();
            let (k, b_scale) = match channel_kind {
                ChannelKind::Miso => (2.0, ln_n),
                ChannelKind::Mimo => (1.0, ln_n * ln_n),
            };
            let a = result.allocation;
            Ok(ConvergenceRow {
                n_t,
                t_scaled: a.t_bar * ln_n,
                b_scaled: a.b_bar * b_scale,
                feedback_to_training: config.mu * a.b_bar / a.t_bar,
                capacity_offset: result.rate.value - (config.snr * n_t as f64).ln() + k * ln_n.ln(),
                result,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::snr_from_db;
    use crate::rvq::b_star;
    use rand::Rng;

    fn rho() -> f64 {
        snr_from_db(5.0)
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, f) = golden_max(-3.0, 5.0, |x| Ok(-(x - 1.25) * (x - 1.25) + 2.0)).unwrap();
        assert!((x - 1.25).abs() < 1e-6 && (f - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_optimum_is_interior() {
        for n_t in [2usize, 4, 6, 16] {
            let config = SystemConfig::miso(n_t, rho(), 20.0, 1.0).unwrap();
            let r = optimize_allocation(&config, ChannelKind::Miso, BoundKind::Lower, 0.0).unwrap();
            let a = r.allocation;
            assert!(a.t_bar > 0.0 && a.b_bar > 0.0 && a.d_bar > 0.0, "{a:?}");
            a.check(&config).unwrap();
            assert!(r.tolerance_met && !r.degenerate);
        }
    }

    #[test]
    fn optimum_dominates_random_feasible_points() {
        let config = SystemConfig::miso(6, rho(), 100.0, 1.0).unwrap();
        let r = optimize_allocation(&config, ChannelKind::Miso, BoundKind::Lower, 0.0).unwrap();
        let mut rng = crate::sampling::substream(99, 0);
        for _ in 0..1000 {
            let t: f64 = rng.random::<f64>() * config.l_bar;
            let b: f64 = rng.random::<f64>() * (config.l_bar - t) / config.mu;
            let v = miso_capacity_bounds(&config, t, b).unwrap().lower * (config.l_bar - t - b) / config.l_bar;
            assert!(v <= r.rate.value + 1e-12);
        }

        let config = SystemConfig::mimo(9, 2.0, rho(), 10.0, 1.0).unwrap();
        let r = optimize_allocation(&config, ChannelKind::Mimo, BoundKind::Upper, 0.0).unwrap();
        let cap = b_star(2.0).unwrap();
        for _ in 0..1000 {
            let b: f64 = rng.random::<f64>() * cap;
            let t: f64 = rng.random::<f64>() * (config.l_bar - b);
            let v = mimo_capacity_bounds(&config, t, b, 0.0).unwrap().upper * (config.l_bar - t - b) / config.l_bar;
            assert!(v <= r.rate.value + 1e-12);
        }
    }

    #[test]
    fn optimizer_is_deterministic() {
        let config = SystemConfig::mimo(9, 2.0, rho(), 10.0, 1.0).unwrap();
        let a = optimize_allocation(&config, ChannelKind::Mimo, BoundKind::Lower, 0.05).unwrap();
        let b = optimize_allocation(&config, ChannelKind::Mimo, BoundKind::Lower, 0.05).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mimo_search_respects_feedback_cap() {
        let config = SystemConfig::mimo(9, 2.0, rho(), 10.0, 1.0).unwrap();
        let r = optimize_allocation(&config, ChannelKind::Mimo, BoundKind::Lower, 0.0).unwrap();
        let cap = b_star(2.0).unwrap();
        assert!(r.allocation.b_bar <= cap * (1.0 + 1e-12));
        assert_eq!(r.at_feedback_cap, r.allocation.b_bar >= 0.99 * cap);
    }

    #[test]
    fn sweep_endpoints_and_truncation() {
        let config = SystemConfig::miso(6, rho(), 100.0, 1.0).unwrap();
        let s = sweep_overhead(&config, RateModel::Miso, BoundKind::Lower, 1.0, 101).unwrap();
        assert_eq!(s.len(), 101);
        assert_eq!(s[0].rate, 0.0);
        assert_eq!(s[100].rate, 0.0);
        assert!((s[37].t_bar - s[37].b_bar).abs() < 1e-12);

        let config = SystemConfig::mimo(9, 2.0, rho(), 10.0, 1.0).unwrap();
        let s = sweep_overhead(&config, RateModel::Mimo { c: 0.0 }, BoundKind::Lower, 1.0, 101).unwrap();
        assert!(s.len() < 101);
        assert!(s.iter().all(|p| p.b_bar <= b_star(2.0).unwrap()));
        assert!(sweep_overhead(&config, RateModel::Miso, BoundKind::Lower, 0.0, 10).is_err());
    }

    #[test]
    fn optimized_sweep_peak_matches_optimizer() {
        let config = SystemConfig::miso(6, rho(), 100.0, 1.0).unwrap();
        let r = optimize_allocation(&config, ChannelKind::Miso, BoundKind::Lower, 0.0).unwrap();
        let s = sweep_overhead_optimized(&config, RateModel::Miso, BoundKind::Lower, 401).unwrap();
        let peak = s.iter().map(|p| p.rate).fold(0.0, f64::max);
        assert!(peak <= r.rate.value + 1e-9);
        assert!(peak >= r.rate.value * (1.0 - 1e-3), "{peak} vs {}", r.rate.value);

        // at the optimal ratio the fixed-ratio sweep reaches the optimum too
        let ratio = r.allocation.t_bar / (config.mu * r.allocation.b_bar);
        let s = sweep_overhead(&config, RateModel::Miso, BoundKind::Lower, ratio, 2001).unwrap();
        let peak = s.iter().map(|p| p.rate).fold(0.0, f64::max);
        assert!(peak >= r.rate.value * (1.0 - 1e-3) && peak <= r.rate.value + 1e-9);
    }

    #[test]
    fn asymptotic_examples() {
        let config = SystemConfig::miso(100, rho(), 100.0, 1.0).unwrap();
        let p = asymptotic_prediction(&config, ChannelKind::Miso).unwrap();
        let zeta = (1e4 * std::f64::consts::LN_2).ln() - (1.0 + 10f64.powf(-0.5)).ln() - 2.0;
        assert!((p.capacity_offset - zeta).abs() < 1e-12);
        assert!((p.capacity_offset - 6.569).abs() < 1e-3);
        assert!((p.capacity_offset_lower - (zeta - (1.0 + rho()).ln())).abs() < 1e-12);
        assert!((p.t_bar_pred * (100f64).ln() - 100.0).abs() < 1e-12);
        assert_eq!(config.mu * p.b_bar_pred, p.t_bar_pred);
        assert!((p.data_fraction() - (1.0 - 2.0 / 100f64.ln())).abs() < 1e-15);

        let config = SystemConfig::mimo(4, 2.0, rho(), 50.0, 1.0).unwrap();
        let p = asymptotic_prediction_at(10f64.exp(), &config, ChannelKind::Mimo).unwrap();
        let expected = 2500.0 * std::f64::consts::LN_2 / (2.0 * 2.0 * 100.0);
        assert!((p.b_bar_pred - expected).abs() < 1e-12 * expected);
        assert!(asymptotic_prediction_at(2.5, &config, ChannelKind::Mimo).is_err());
        let small = SystemConfig::miso(2, rho(), 50.0, 1.0).unwrap();
        assert!(asymptotic_prediction(&small, ChannelKind::Miso).is_err());
        for n_t in 3..50 {
            let config = SystemConfig::mimo(n_t, 2.0, rho(), 50.0, 1.0).unwrap();
            for kind in [ChannelKind::Miso, ChannelKind::Mimo] {
                let p = asymptotic_prediction(&config, kind).unwrap();
                assert!(p.t_bar_pred > 0.0 && p.b_bar_pred > 0.0);
            }
        }
    }

    #[test]
    fn convergence_series_rejects_unsorted_lists() {
        let config = SystemConfig::miso(10, rho(), 50.0, 1.0).unwrap();
        assert!(convergence_series(&config, ChannelKind::Miso, BoundKind::Lower, 0.0, &[100, 10]).is_err());
        assert!(convergence_series(&config, ChannelKind::Miso, BoundKind::Lower, 0.0, &[2, 10]).is_err());
        let rows = convergence_series(&config, ChannelKind::Miso, BoundKind::Lower, 0.0, &[10, 100]).unwrap();
        assert_eq!(rows.len(), 2);
    }

    #[test]
    fn miso_feedback_balances_training_at_scale() {
        // first-order balance: μB̄° ≈ T̄° up to an O(T̄) correction
        let config = SystemConfig::miso(1_000_000, rho(), 10.0, 1.0).unwrap();
        let r = optimize_allocation(&config, ChannelKind::Miso, BoundKind::Lower, 0.0).unwrap();
        let ratio = r.allocation.b_bar / r.allocation.t_bar;
        assert!((ratio - 1.0).abs() < 2.0 * r.allocation.t_bar, "{ratio} {:?}", r.allocation);
    }
}
