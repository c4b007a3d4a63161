//! Special functions and small numeric helpers: scaled Bessel I0, the
//! first-order Marcum Q-function, Gaussian tail probabilities and an adaptive
//! Simpson integrator.

use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};
use std::f64::consts::{PI, SQRT_2};

/// Exponentially scaled modified Bessel function of the first kind, order 0:
/// `exp(-|x|) * I0(x)`.
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x <= 25.0 {
        // power series; all terms positive so no cancellation
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * k);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // asymptotic expansion, truncated before the terms start growing
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            let next = term * (2.0 * kf - 1.0).powi(2) / (8.0 * kf * x);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// Natural log of `I0(x)`.
pub fn ln_bessel_i0(x: f64) -> f64 {
    bessel_i0e(x).ln() + x.abs()
}

/// Standard normal upper tail `Q(x) = 1 - Phi(x)`.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// `ln N(x; mean, var)`.
#[inline]
pub fn ln_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let r = x - mean;
    -0.5 * (2.0 * PI * var).ln() - 0.5 * r * r / var
}

#[inline]
fn ln_poisson_pmf(k: u64, lambda: f64) -> f64 {
    let kf = k as f64;
    -lambda + kf * lambda.ln() - ln_gamma(kf + 1.0)
}

/// First-order Marcum Q-function `Q1(a, b)`.
///
/// Uses the identity `Q1(a, b) = P(N2 <= N1)` for independent Poisson
/// variables `N1 ~ Poi(a^2/2)` and `N2 ~ Poi(b^2/2)`, summed over the
/// effective support of `N1`. For `a > b` the complement is summed so that
/// values close to one keep full absolute accuracy.
pub fn marcum_q1(a: f64, b: f64) -> f64 {
    let a = a.abs();
    if b <= 0.0 {
        return 1.0;
    }
    let lam2 = 0.5 * b * b;
    if a == 0.0 {
        return (-lam2).exp();
    }
    let lam1 = 0.5 * a * a;
    let spread = 12.0 * lam1.sqrt() + 12.0;
    let lo = (lam1 - spread).floor().max(0.0) as u64;
    let hi = (lam1 + spread).ceil() as u64;
    let complement = a > b;
    let mut total = 0.0;
    for k in lo..=hi {
        let p1 = ln_poisson_pmf(k, lam1).exp();
        if p1 == 0.0 {
            continue;
        }
        let kf = k as f64 + 1.0;
        // P(N2 <= k) = Q(k + 1, lam2), P(N2 > k) = P(k + 1, lam2)
        let tail = if complement {
            gamma_lr(kf, lam2)
        } else {
            gamma_ur(kf, lam2)
        };
        total += p1 * tail;
    }
    let q = if complement { 1.0 - total } else { total };
    q.clamp(0.0, 1.0)
}

/// `ln(sum(exp(v)))`, robust to large magnitudes. Returns `-inf` for empty
/// or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `ln(exp(a) + exp(b))`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // split into panels first so narrow peaks are not missed
    const PANELS: usize = 64;
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let x0 = a + i as f64 * h;
            let x1 = x0 + h;
            let fa = f(x0);
            let fb = f(x1);
            let m = 0.5 * (x0 + x1);
            let fm = f(m);
            let whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_step(&f, x0, x1, fa, fm, fb, whole, tol / PANELS as f64, 40)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
