//! Public-API runs from pilots to optimized rates.

use beamcap::bounds::{miso_bounds_with_variance, miso_capacity_bounds};
use beamcap::channel::{mmse_estimate, mse_variance, snr_from_db, training_matrix, CMatrix, ChannelEstimate};
use beamcap::montecarlo::{estimate_eta_table, simulate_genie_rate, simulate_lower_rate};
use beamcap::optimizer::{optimize_with_model, DEFAULT_GRID};
use beamcap::rvq::{generate_codebook, select_beamformer};
use beamcap::sampling::{complex_normal, substream};
use beamcap::{optimize_allocation, BoundKind, ChannelKind, Link, RateModel, SimulationSpec, SystemConfig};
use num_complex::Complex64;

/// Hand-rolled pilot transmission through the row estimator.
fn pilot_mse(n_t: usize, t: usize, snr: f64, trials: u64) -> (f64, f64) {
    let design = training_matrix(t, n_t).unwrap();
    let mut errors = Vec::with_capacity(trials as usize);
    for i in 0..trials {
        let mut rng = substream(77, i);
        let h: Vec<Complex64> = (0..n_t).map(|_| complex_normal(&mut rng, 1.0)).collect();
        let received: Vec<Complex64> = (0..t)
            .map(|k| {
                let clean: Complex64 = (0..n_t).map(|n| h[n] * design.pilot_matrix[(n, k)]).sum();
                clean * design.pilot_symbols[k] + complex_normal(&mut rng, 1.0 / snr)
            })
            .collect();
        let h_hat = mmse_estimate(&received, &design, snr).unwrap();
        let err: f64 = h.iter().zip(&h_hat).map(|(a, b)| (a - b).norm_sqr()).sum();
        errors.push(err / n_t as f64);
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn pilot_path_matches_error_variance() {
    let snr = snr_from_db(5.0);
    for (n_t, t) in [(4, 2), (4, 4), (4, 9)] {
        let (mean, se) = pilot_mse(n_t, t, snr, 4000);
        let expected = mse_variance(t as f64 / n_t as f64, snr).unwrap();
        assert!((mean - expected).abs() < 4.0 * se, "T={t}: {mean} vs {expected} (se {se})");
    }
}

#[test]
fn estimate_then_quantize() {
    let design = training_matrix(6, 6).unwrap();
    let codebook = generate_codebook(6, 6, 5).unwrap();
    let mut rng = substream(3, 1);
    let received: Vec<Complex64> = (0..6).map(|_| complex_normal(&mut rng, 1.0)).collect();
    let h_hat = mmse_estimate(&received, &design, 2.0).unwrap();
    let est = ChannelEstimate {
        estimate: CMatrix::from_row_slice(1, 6, &h_hat),
        error_variance: mse_variance(1.0, 2.0).unwrap(),
    };
    let (index, v) = select_beamformer(&est, &codebook).unwrap();
    let gain = |w: &[Complex64]| -> f64 { h_hat.iter().zip(w).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr() };
    assert!(codebook.iter().all(|w| gain(w) <= gain(v)));
    assert_eq!(codebook.vector(index), v);
}

#[test]
fn simulated_rates_sit_inside_the_bounds() {
    let link = Link::new(5, 1, snr_from_db(5.0)).unwrap();
    let (sigma_w2, b_bar) = (0.3, 1.2);
    let bits = 6;
    let spec = SimulationSpec::new(4000, 21);
    let genie = simulate_genie_rate(&link, sigma_w2, bits, &spec).unwrap();
    let lower = simulate_lower_rate(&link, sigma_w2, bits, &spec).unwrap();
    let pair = miso_bounds_with_variance(5, link.snr, sigma_w2, b_bar).unwrap();
    assert!(genie.mean <= pair.upper + 3.0 * genie.std_err);
    assert!(lower.mean + 3.0 * lower.std_err >= pair.lower);
    assert!(lower.mean <= genie.mean);
}

#[test]
fn optimum_rate_is_the_bound_at_the_optimum() {
    let config = SystemConfig::miso(8, snr_from_db(5.0), 40.0, 1.0).unwrap();
    let res = optimize_allocation(&config, ChannelKind::Miso, BoundKind::Lower, 0.0).unwrap();
    let a = res.allocation;
    a.check(&config).unwrap();
    let bound = miso_capacity_bounds(&config, a.t_bar, a.b_bar).unwrap().lower;
    assert!((res.rate.value - a.d_bar / config.l_bar * bound).abs() < 1e-12);
    assert!(res.tolerance_met);
}

#[test]
fn table_mode_uses_whole_bit_counts() {
    let config = SystemConfig::mimo(3, 2.0, snr_from_db(5.0), 50.0, 1.0).unwrap();
    let table = estimate_eta_table(&config.link(), 8, &SimulationSpec::new(2000, 4)).unwrap();
    let res = optimize_with_model(&config, RateModel::MimoTable(&table), BoundKind::Lower, DEFAULT_GRID).unwrap();
    let bits = res.allocation.b_bar * config.n_t as f64;
    assert!((bits - bits.round()).abs() < 1e-9, "B = {bits}");
    assert!(bits.round() <= 8.0 && res.rate.value > 0.0);
}
