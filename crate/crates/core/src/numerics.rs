//! Special-function kernels: log-gamma, log-beta and the lower real branch
//! of the Lambert-W function.
//!
//! Everything here works in natural logarithms. The beta function is only
//! ever evaluated in the log domain since one argument is a codebook size
//! `2^B` that overflows `f64` long before the quantities built from it do.

use std::f64::consts::{E, PI};

use crate::error::{domain, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Branch point of the Lambert-W function, `-1/e`.
pub const BRANCH_POINT: f64 = -0.367_879_441_171_442_33;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `B_{2k} / (2k (2k-1))` for k = 1..8, the Stirling series coefficients.
const STIRLING_COEF: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Threshold above which the Stirling series is used.
const STIRLING_MIN: f64 = 10.0;

/// Remainder of ln Γ(x) after the leading Stirling terms,
/// `ln Γ(x) - [(x - 1/2) ln x - x + ln √(2π)]`, for `x >= 10`.
fn stirling_correction(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in STIRLING_COEF.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

fn lanczos_log_gamma(x: f64) -> f64 {
    let x = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + a.ln()
}

/// Natural log of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("x", x, "x > 0"));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x >= STIRLING_MIN {
        (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_correction(x)
    } else if x >= 0.5 {
        lanczos_log_gamma(x)
    } else {
        // reflection: Γ(x) Γ(1 - x) = π / sin(πx)
        (PI / (PI * x).sin()).ln() - lanczos_log_gamma(1.0 - x)
    }
}

/// Gamma function for positive arguments of moderate size.
pub fn gamma(x: f64) -> Result<f64> {
    log_gamma(x).map(f64::exp)
}

/// Natural log of the beta function `B(m, n) = Γ(m)Γ(n)/Γ(m+n)`.
///
/// Large arguments go through the Stirling remainder so that the huge
/// `ln Γ` terms cancel analytically instead of numerically.
pub fn log_beta(m: f64, n: f64) -> Result<f64> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(domain("m", m, "m > 0"));
    }
    if !(n > 0.0) || !n.is_finite() {
        return Err(domain("n", n, "n > 0"));
    }
    let (p, q) = if m <= n { (m, n) } else { (n, m) };
    let sum = p + q;
    let value = if p >= STIRLING_MIN {
        let corr = stirling_correction(p) + stirling_correction(q) - stirling_correction(sum);
        -0.5 * q.ln() + LN_SQRT_2PI + corr + (p - 0.5) * (p / sum).ln() + q * (-p / sum).ln_1p()
    } else if q >= STIRLING_MIN {
        let corr = stirling_correction(q) - stirling_correction(sum);
        log_gamma_unchecked(p) + corr + p - p * sum.ln() + (q - 0.5) * (-p / sum).ln_1p()
    } else {
        log_gamma_unchecked(p) + log_gamma_unchecked(q) - log_gamma_unchecked(sum)
    };
    Ok(value)
}

/// Lower real branch `W₋₁` of the Lambert-W function on `[-1/e, 0)`.
///
/// Returns `w <= -1` with `w e^w = x`. Seeded from the square-root
/// expansion about the branch point when `x` is within `1e-3` of `-1/e`,
/// otherwise from `ln(-x) - ln(-ln(-x))`, then polished by Halley
/// iterations kept inside a sign-change bracket on `(-inf, -1]`.
pub fn lambert_w_m1(x: f64) -> Result<f64> {
    if !(BRANCH_POINT..0.0).contains(&x) {
        return Err(domain("x", x, "-1/e <= x < 0"));
    }
    if x == BRANCH_POINT {
        return Ok(-1.0);
    }

    let mut w = if x - BRANCH_POINT < 1e-3 {
        let p = (2.0 * (1.0 + E * x)).max(0.0).sqrt();
        -1.0 - p - p * p / 3.0
    } else {
        let l1 = (-x).ln();
        l1 - (-l1).ln()
    };
    w = w.min(-1.0);

    // Near the branch point iterate on f(w) = x - w e^w; elsewhere on
    // f(w) = w + ln(-w) - ln(-x), which stays well scaled as x -> 0.
    let log_form = x - BRANCH_POINT >= 1e-3;
    let ln_mx = (-x).ln();
    let mut lo = f64::NEG_INFINITY;
    let mut hi = -1.0;
    for _ in 0..100 {
        let (f, d1, d2) = if log_form {
            (w + (-w).ln() - ln_mx, 1.0 + 1.0 / w, -1.0 / (w * w))
        } else {
            let ew = w.exp();
            (-(w * ew - x), -ew * (w + 1.0), -ew * (w + 2.0))
        };
        if f == 0.0 {
            break;
        }
        // f is increasing on (-inf, -1] in both forms
        if f < 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let mut next = w - f / (d1 - f * d2 / (2.0 * d1));
        if !next.is_finite() || next <= lo || next >= hi {
            next = if lo.is_finite() { 0.5 * (lo + hi) } else { 2.0 * w - 1.0 };
        }
        let step = (next - w).abs();
        w = next;
        if step <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    Ok(w)
}
