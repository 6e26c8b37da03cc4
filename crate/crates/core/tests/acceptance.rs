//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so that every criterion reports
//! exactly one PASS/FAIL line, in order, with its measured values.

use std::f64::consts::LN_2;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use beamcap::bounds::{effective_rate, mimo_bounds_from_table, miso_bounds_with_variance, reference_rates};
use beamcap::channel::{mse_variance, snr_from_db, Link, OverheadAllocation, SystemConfig};
use beamcap::montecarlo::{
    estimate_eta_stats, estimate_eta_table, simulate_genie_rate, simulate_lower_rate, symbol_count, validate_e_nu,
    validate_mse, Estimate, SimulationSpec,
};
use beamcap::optimizer::{
    convergence_series, optimize_allocation, optimize_with_model, sweep_overhead, RateModel, DEFAULT_GRID,
};
use beamcap::rvq::{b_star, expected_nu_bounds, expected_nu_exact, gamma_rvq};
use beamcap::{BoundKind, ChannelKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rho() -> f64 {
    snr_from_db(5.0)
}

/// Tolerance `|a - b| <= k·se` for two independent estimates or one
/// estimate against an exact value (`b_se = 0`).
fn within(a: f64, a_se: f64, b: f64, b_se: f64, k: f64) -> bool {
    (a - b).abs() <= k * a_se.hypot(b_se)
}

// 1: Monte Carlo rates sit inside the closed-form MISO bounds.
fn criterion_1_runs(workers: Option<usize>) -> Vec<(usize, Estimate, Estimate)> {
    let sigma_w2 = 0.15;
    [2usize, 4, 6, 8, 10]
        .iter()
        .map(|&n_t| {
            let link = Link::new(n_t, 1, rho()).unwrap();
            let mut spec = SimulationSpec::new(10_000, 1000 + n_t as u64);
            spec.workers = workers;
            let bits = n_t as u32;
            let lower = simulate_lower_rate(&link, sigma_w2, bits, &spec).unwrap();
            let genie = simulate_genie_rate(&link, sigma_w2, bits, &spec).unwrap();
            (n_t, lower, genie)
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n_t, lower, genie) in criterion_1_runs(None) {
        let b = miso_bounds_with_variance(n_t, rho(), 0.15, 1.0).unwrap();
        let ok = b.lower - 3.0 * lower.std_err <= lower.mean && genie.mean <= b.upper + 3.0 * genie.std_err;
        pass &= ok;
        parts.push(format!(
            "Nt={n_t}: Cl={:.4} sim_l={:.4}±{:.4} sim={:.4}±{:.4} Cu={:.4}",
            b.lower, lower.mean, lower.std_err, genie.mean, genie.std_err, b.upper
        ));
    }
    outcome(pass, parts.join("; "))
}

// 2: simulated E[ν] against the exact beta-function expression.
fn criterion_2_runs(workers: Option<usize>) -> Vec<(usize, u32, Estimate)> {
    let mut out = Vec::new();
    for n_t in [2usize, 4, 6] {
        for bits in [0u32, 1, 4, 8] {
            let mut spec = SimulationSpec::new(100_000, 2000 + 10 * n_t as u64 + bits as u64);
            spec.workers = workers;
            out.push((n_t, bits, validate_e_nu(n_t, bits, &spec).unwrap()));
        }
    }
    out
}

fn criterion_2() -> Outcome {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for (n_t, bits, est) in criterion_2_runs(None) {
        let exact = expected_nu_exact(n_t, bits as f64).unwrap();
        pass &= within(est.mean, est.std_err, exact, 0.0, 3.0);
        worst = worst.max((est.mean - exact).abs() / est.std_err);
    }
    let e21 = expected_nu_exact(2, 1.0).unwrap();
    pass &= (e21 - 2.0 / 3.0).abs() <= 1e-12;
    outcome(
        pass,
        format!("max |sim - exact| = {worst:.2} stderr over 12 cases; |E[nu](2,1) - 2/3| = {:.1e}", (e21 - 2.0 / 3.0).abs()),
    )
}

// 3: two-sided bracket on E[ν], exact inequality.
fn criterion_3() -> Outcome {
    let mut violations = 0;
    let mut cases = 0;
    for n_t in 2..=64usize {
        for k in 0..=16 {
            let b_bar = 0.25 * k as f64;
            let (lo, hi) = expected_nu_bounds(n_t, b_bar).unwrap();
            let exact = expected_nu_exact(n_t, b_bar * n_t as f64).unwrap();
            cases += 1;
            if !(lo <= exact && exact <= hi) {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("{violations} violations over {cases} grid points"))
}

// 4: pilot-path MMSE simulation against the closed-form error variance.
fn criterion_4_runs(workers: Option<usize>) -> Vec<(usize, usize, f64, Estimate)> {
    let mut out = Vec::new();
    for (n_t, t) in [(8usize, 4usize), (4, 8)] {
        for snr in [1.0, rho()] {
            let mut spec = SimulationSpec::new(100_000, 4000 + (n_t * 10 + t) as u64);
            spec.workers = workers;
            out.push((n_t, t, snr, validate_mse(n_t, t, snr, &spec).unwrap()));
        }
    }
    out
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n_t, t, snr, est) in criterion_4_runs(None) {
        let exact = mse_variance(t as f64 / n_t as f64, snr).unwrap();
        pass &= within(est.mean, est.std_err, exact, 0.0, 3.0);
        parts.push(format!("(Nt={n_t},T={t},rho={snr:.3}): {:.5}±{:.5} vs {exact:.5}", est.mean, est.std_err));
    }
    outcome(pass, parts.join("; "))
}

// 5: γ_rvq fixed point residual, zero-feedback value, small-B̄ series.
fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut worst_residual: f64 = 0.0;
    let mut worst_series_ratio: f64 = 0.0;
    let mut series_points = 0;
    for n_r_bar in [0.5, 1.0, 2.0, 4.0] {
        let cap = b_star(n_r_bar).unwrap();
        let zero = gamma_rvq(n_r_bar, 0.0).unwrap().value;
        pass &= (zero - n_r_bar).abs() <= 1e-12;
        let mut b_values: Vec<f64> = (0..50).map(|i| cap * i as f64 / 49.0).collect();
        b_values.extend([0.001, 0.005, 0.01, 0.015, 0.02]);
        for b_bar in b_values {
            let g = gamma_rvq(n_r_bar, b_bar).unwrap();
            let residual = g.residual().abs();
            worst_residual = worst_residual.max(residual);
            pass &= residual < 1e-12;
            if b_bar > 0.0 && b_bar <= 0.02 {
                let z = 2.0 * -(-b_bar / n_r_bar * LN_2).exp_m1();
                let series = 1.0 + z.sqrt() + z / 3.0 + 11.0 / 72.0 * z * z.sqrt();
                let err = (g.value / n_r_bar - series).abs();
                let allowed = 5.0 * z.powf(2.5);
                worst_series_ratio = worst_series_ratio.max(err / allowed);
                pass &= err <= allowed;
                series_points += 1;
            }
        }
    }
    outcome(
        pass,
        format!(
            "max residual {worst_residual:.1e}; worst series error {worst_series_ratio:.3} of 5·ζ^(5/2) over {series_points} points"
        ),
    )
}

// 6: MISO optimum location and equal-split sweep.
fn criterion_6() -> Outcome {
    let config = SystemConfig::miso(6, rho(), 100.0, 1.0).unwrap();
    let opt = optimize_allocation(&config, ChannelKind::Miso, BoundKind::Lower, 0.0).unwrap();
    let fraction = opt.overhead_fraction(&config);
    let sweep = sweep_overhead(&config, RateModel::Miso, BoundKind::Lower, 1.0, 1001).unwrap();
    let peak = sweep.iter().map(|p| p.rate).fold(0.0, f64::max);
    let shortfall = 1.0 - peak / opt.rate.value;
    let pass = (0.07..=0.13).contains(&fraction) && shortfall.abs() <= 0.02;
    outcome(
        pass,
        format!(
            "overhead {fraction:.4} (T={:.3}, B={:.3}), rate {:.4}; equal-split peak {peak:.4} ({:.2}% below)",
            opt.allocation.t_bar,
            opt.allocation.b_bar,
            opt.rate.value,
            100.0 * shortfall
        ),
    )
}

// 7: MIMO optimum location with a simulated concentration factor.
fn criterion_7_c(config: &SystemConfig, workers: Option<usize>) -> (f64, u32, f64) {
    let first = optimize_allocation(config, ChannelKind::Mimo, BoundKind::Lower, 0.0).unwrap();
    let bits = symbol_count(first.allocation.b_bar, config.n_t) as u32;
    let sigma_w2 = mse_variance(first.allocation.t_bar, config.snr).unwrap();
    let mut spec = SimulationSpec::new(10_000, 7000);
    spec.workers = workers;
    let stats = estimate_eta_stats(&config.link(), sigma_w2, bits, &spec).unwrap();
    (stats.c_factor, bits, stats.e_eta)
}

fn criterion_7() -> Outcome {
    let config = SystemConfig::mimo(9, 2.0, rho(), 10.0, 1.0).unwrap();
    let (c, bits, _) = criterion_7_c(&config, None);
    let opt = optimize_allocation(&config, ChannelKind::Mimo, BoundKind::Lower, c).unwrap();
    let fraction = opt.overhead_fraction(&config);
    outcome(
        (0.15..=0.25).contains(&fraction),
        format!(
            "c = {c:.4} (B = {bits} bits); overhead {fraction:.4} (T={:.4}, B={:.4}, at cap: {}), rate {:.4}",
            opt.allocation.t_bar, opt.allocation.b_bar, opt.at_feedback_cap, opt.rate.value
        ),
    )
}

fn monotone_toward(seq: &[f64], target: f64) -> bool {
    seq.windows(2).all(|w| (w[1] - target).abs() < (w[0] - target).abs())
}

const LARGE_ARRAYS: [usize; 4] = [100, 1_000, 10_000, 100_000];

// 8: MISO trend toward the large-array laws.
fn criterion_8() -> Outcome {
    let template = SystemConfig::miso(100, rho(), 50.0, 1.0).unwrap();
    let rows = convergence_series(&template, ChannelKind::Miso, BoundKind::Lower, 0.0, &LARGE_ARRAYS).unwrap();
    let l = template.l_bar;
    let t: Vec<f64> = rows.iter().map(|r| r.t_scaled).collect();
    let b: Vec<f64> = rows.iter().map(|r| template.mu * r.b_scaled).collect();
    let last = rows.last().unwrap();
    let t_gap = (t[3] - l).abs() / l;
    let b_gap = (b[3] - l).abs() / l;
    let ratio = last.feedback_to_training;
    let pass = monotone_toward(&t, l)
        && monotone_toward(&b, l)
        && t_gap < 0.25
        && b_gap < 0.25
        && (0.8..=1.2).contains(&ratio);
    outcome(
        pass,
        format!(
            "T·lnNt = {:?}, μB·lnNt = {:?} (target {l}); final gaps {:.1}% / {:.1}%; μB/T at 1e5 = {ratio:.3}",
            round3(&t),
            round3(&b),
            100.0 * t_gap,
            100.0 * b_gap
        ),
    )
}

// 9: MIMO trend toward the large-array laws.
fn criterion_9() -> Outcome {
    let template = SystemConfig::mimo(100, 2.0, rho(), 50.0, 1.0).unwrap();
    let rows = convergence_series(&template, ChannelKind::Mimo, BoundKind::Lower, 0.0, &LARGE_ARRAYS).unwrap();
    let target = template.l_bar * template.l_bar * LN_2 / (2.0 * template.mu * template.mu * 2.0);
    let b: Vec<f64> = rows.iter().map(|r| r.b_scaled).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.feedback_to_training).collect();
    let gap = (b[3] - target).abs() / target;
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let capped = rows.iter().filter(|r| r.result.at_feedback_cap).count();
    let pass = monotone_toward(&b, target) && gap < 0.30 && decreasing;
    outcome(
        pass,
        format!(
            "B·ln²Nt = {:?} (target {target:.1}); final gap {:.1}%; μB/T = {:?}; {capped}/4 optima pinned at B*",
            round3(&b),
            100.0 * gap,
            round3(&ratios)
        ),
    )
}

fn round3(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1000.0).round() / 1000.0).collect()
}

// 10: optimized vs heuristic overhead, and the perfect-CSI margin.
const FIG5_TABLE_BITS: u32 = 12;

fn criterion_10_runs(workers: Option<usize>) -> (Vec<Estimate>, Estimate) {
    let config = SystemConfig::mimo(3, 2.0, rho(), 50.0, 1.0).unwrap();
    let mut spec = SimulationSpec::new(10_000, 10_000);
    spec.workers = workers;
    let table = estimate_eta_table(&config.link(), FIG5_TABLE_BITS, &spec).unwrap();
    let mut ref_spec = SimulationSpec::new(10_000, 10_001);
    ref_spec.workers = workers;
    let refs = reference_rates(&config.link(), 0, &ref_spec).unwrap();
    let eta = table
        .stats
        .iter()
        .map(|s| Estimate {
            mean: s.e_eta,
            std_err: s.std_err,
            trials: s.trials,
        })
        .collect();
    (eta, refs.perfect_csi)
}

fn criterion_10() -> Outcome {
    let config = SystemConfig::mimo(3, 2.0, rho(), 50.0, 1.0).unwrap();
    let spec = SimulationSpec::new(10_000, 10_000);
    let table = estimate_eta_table(&config.link(), FIG5_TABLE_BITS, &spec).unwrap();
    let opt = optimize_with_model(&config, RateModel::MimoTable(&table), BoundKind::Lower, DEFAULT_GRID).unwrap();

    let (t_h, b_h) = (1.5, 1.0);
    let bits_h = (b_h * config.n_t as f64) as u32;
    let heuristic_bound = mimo_bounds_from_table(&config, &table, t_h, bits_h).unwrap().lower;
    let heuristic =
        effective_rate(heuristic_bound, OverheadAllocation::new(&config, t_h, b_h).unwrap(), config.l_bar).value;

    let refs = reference_rates(&config.link(), 0, &SimulationSpec::new(10_000, 10_001)).unwrap();
    let gain = opt.rate.value / heuristic - 1.0;
    let margin = refs.perfect_csi.mean / opt.rate.value - 1.0;
    let pass = (0.05..=0.15).contains(&gain) && (0.25..=0.55).contains(&margin);
    outcome(
        pass,
        format!(
            "optimized {:.4} (T={:.3}, B={} bits) vs heuristic {heuristic:.4}: +{:.1}%; perfect CSI {:.4}±{:.4}: +{:.1}%",
            opt.rate.value,
            opt.allocation.t_bar,
            (opt.allocation.b_bar * config.n_t as f64).round(),
            100.0 * gain,
            refs.perfect_csi.mean,
            refs.perfect_csi.std_err,
            100.0 * margin
        ),
    )
}

// 11: every Monte Carlo run above is bit-identical on 1 and 8 workers.
fn criterion_11() -> Outcome {
    let mut mismatches = Vec::new();
    let a = criterion_1_runs(Some(1));
    let b = criterion_1_runs(Some(8));
    if a.iter().zip(&b).any(|(x, y)| x.1 != y.1 || x.2 != y.2) {
        mismatches.push("1");
    }
    let a = criterion_2_runs(Some(1));
    let b = criterion_2_runs(Some(8));
    if a.iter().zip(&b).any(|(x, y)| x.2 != y.2) {
        mismatches.push("2");
    }
    let a = criterion_4_runs(Some(1));
    let b = criterion_4_runs(Some(8));
    if a.iter().zip(&b).any(|(x, y)| x.3 != y.3) {
        mismatches.push("4");
    }
    let config = SystemConfig::mimo(9, 2.0, rho(), 10.0, 1.0).unwrap();
    let a = criterion_7_c(&config, Some(1));
    let b = criterion_7_c(&config, Some(8));
    if a.0.to_bits() != b.0.to_bits() || a.2.to_bits() != b.2.to_bits() {
        mismatches.push("7");
    }
    let a = criterion_10_runs(Some(1));
    let b = criterion_10_runs(Some(8));
    if a != b {
        mismatches.push("10");
    }
    let pass = mismatches.is_empty();
    outcome(
        pass,
        if pass {
            "runs of criteria 1, 2, 4, 7, 10 identical on 1 and 8 workers".into()
        } else {
            format!("mismatch in criteria {}", mismatches.join(", "))
        },
    )
}

/// Number, name, check and time budget.
type Criterion = (u32, &'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "MISO bound sandwich", criterion_1, Duration::from_secs(120)),
        (2, "quantization gain exactness", criterion_2, Duration::from_secs(60)),
        (3, "quantization gain bracket", criterion_3, Duration::from_secs(1)),
        (4, "MMSE error variance", criterion_4, Duration::from_secs(60)),
        (5, "RVQ fixed point", criterion_5, Duration::from_secs(1)),
        (6, "MISO optimum location", criterion_6, Duration::from_secs(5)),
        (7, "MIMO optimum location", criterion_7, Duration::from_secs(120)),
        (8, "MISO large-array trend", criterion_8, Duration::from_secs(30)),
        (9, "MIMO large-array trend", criterion_9, Duration::from_secs(30)),
        (10, "optimized vs heuristic overhead", criterion_10, Duration::from_secs(120)),
        (11, "reproducibility across workers", criterion_11, Duration::MAX),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, run, budget) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= budget, o.detail),
            Err(_) => (false, "panicked".into()),
        };
        let timing = if elapsed > budget {
            format!("{:.2}s, over the {:.0}s budget", elapsed.as_secs_f64(), budget.as_secs_f64())
        } else {
            format!("{:.2}s", elapsed.as_secs_f64())
        };
        println!(
            "criterion {id:>2} [{}] {name}: {detail} ({timing})",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
