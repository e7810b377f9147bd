//! Special functions needed by the densities: the log of the modified Bessel
//! function of the second kind, `ln K_ν(x)`, for real order and `x > 0`.
//!
//! The order is reduced to `|μ| <= 1/2`, `K_μ` and `K_{μ+1}` are evaluated with
//! Temme's series (`x < 2`), Steed's continued fraction (`2 <= x`), or the
//! Hankel asymptotic expansion (large `x`), and the result is carried up to
//! the requested order by the (stable) forward recurrence, all in log space.

use std::f64::consts::PI;

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// Taylor coefficients of `1/Γ(z) = Σ c_k z^k`, `k = 1, 2, ...`.
const RGAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Returns `(gam1, gam2, 1/Γ(1+μ), 1/Γ(1−μ))` for `|μ| <= 1/2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // even part: Σ_{k odd} c_k μ^{k-1}; odd part / μ: Σ_{k even} c_k μ^{k-2}
    let mu2 = mu * mu;
    let mut even = 0.0;
    let mut odd = 0.0;
    let mut pow = 1.0;
    for pair in RGAMMA.chunks(2) {
        even += pair[0] * pow;
        if let Some(c) = pair.get(1) {
            odd += c * pow;
        }
        pow *= mu2;
    }
    let gampl = even + mu * odd;
    let gammi = even - mu * odd;
    (-odd, even, gampl, gammi)
}

/// `(K_μ(x), K_{μ+1}(x))` via Temme's series, `|μ| <= 1/2`, `0 < x < 2`.
fn temme_series(mu: f64, x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        sum1 += c * (p - fi * ff);
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / x)
}

/// `(ln K_μ(x), ln K_{μ+1}(x))` via Steed's continued fraction, `|μ| <= 1/2`, `x >= 2`.
fn steed_cf2(mu: f64, x: f64) -> (f64, f64) {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu * mu;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= (b * d - 1.0);
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    let h = a1 * h;
    let log_kmu = 0.5 * (PI / (2.0 * x)).ln() - x - s.ln();
    let ratio = (mu + x + 0.5 - h) / x;
    (log_kmu, log_kmu + ratio.ln())
}

/// `ln K_ν(x)` from the Hankel expansion; accurate once `x` dominates `ν²`.
fn hankel_log(nu: f64, x: f64) -> f64 {
    let m = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let fk = k as f64;
        let next = term * (m - (2.0 * fk - 1.0).powi(2)) / (fk * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    0.5 * (PI / (2.0 * x)).ln() - x + sum.ln()
}

/// Threshold above which the asymptotic branch is used.
fn hankel_threshold(nu: f64) -> f64 {
    50.0 + 2.0 * nu * nu
}

/// Natural log of `K_ν(x)` for real `ν` and `x > 0`.
///
/// Returns `+∞` at `x = 0` and `NaN` for negative or NaN input.
pub fn ln_bessel_k(nu: f64, x: f64) -> f64 {
    if x.is_nan() || nu.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let nu = nu.abs();
    if x > hankel_threshold(nu) {
        return hankel_log(nu, x);
    }
    by_recurrence(nu, x, x < 2.0)
}

fn by_recurrence(nu: f64, x: f64, use_series: bool) -> f64 {
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut log_k, mut log_k1) = if use_series {
        let (k, k1) = temme_series(mu, x);
        (k.ln(), k1.ln())
    } else {
        steed_cf2(mu, x)
    };
    // forward recurrence on the ratio r = K_{ν+1}/K_ν
    let mut order = mu;
    for _ in 0..nl as usize {
        let r = (log_k1 - log_k).exp();
        let r_next = 2.0 * (order + 1.0) / x + 1.0 / r;
        order += 1.0;
        log_k = log_k1;
        log_k1 = log_k + r_next.ln();
    }
    log_k
}

/// `K_{ν+1}(x) / K_ν(x)`, computed without overflow.
pub fn bessel_k_ratio(nu: f64, x: f64) -> f64 {
    (ln_bessel_k(nu + 1.0, x) - ln_bessel_k(nu, x)).exp()
}
