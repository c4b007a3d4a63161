use super::{angle_diff, ArrayGeometry, HyperParams, KinematicState, LikelihoodMode, Measurement};
use crate::special::{bessel_i0e, ln_normal_pdf, marcum_q1, std_normal_cdf, std_normal_sf};
use std::f64::consts::PI;

use super::amp_scale_sq;

/// Amplitudes below this are raised to it inside the variance formulas.
pub const U_FLOOR: f64 = 1e-3;

/// Upper bound on the AoA variance (rad^2).
pub const ANGLE_VARIANCE_CAP: f64 = 4.0 * PI * PI;

/// Distance measurement variance `c^2 / (8 pi^2 beta_bw^2 u^2)`.
pub fn sigma_d_sq(u: f64, geom: &ArrayGeometry) -> f64 {
    let u = u.max(U_FLOOR);
    geom.c * geom.c / (8.0 * PI * PI * geom.beta_bw_sq * u * u)
}

/// `sum_h (d_h sin(phi - psi - phi_h))^2`.
pub fn aperture_sq(phi: f64, geom: &ArrayGeometry) -> f64 {
    geom.element_offsets
        .iter()
        .map(|e| (e.radius * (phi - geom.psi - e.angle).sin()).powi(2))
        .sum()
}

/// [`aperture_sq`] as `a - b cos 2t - c sin 2t`, for repeated evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApertureCoeffs {
    a: f64,
    b: f64,
    c: f64,
    psi: f64,
}

impl ApertureCoeffs {
    pub fn new(geom: &ArrayGeometry) -> Self {
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for e in &geom.element_offsets {
            let r2 = 0.5 * e.radius * e.radius;
            let (s2, c2) = (2.0 * e.angle).sin_cos();
            a += r2;
            b += r2 * c2;
            c += r2 * s2;
        }
        Self { a, b, c, psi: geom.psi }
    }

    pub fn eval(&self, phi: f64) -> f64 {
        let (s2, c2) = (2.0 * (phi - self.psi)).sin_cos();
        (self.a - self.b * c2 - self.c * s2).max(0.0)
    }
}

/// Per-element average of [`aperture_sq`], the aperture that enters the AoA
/// Fisher information when `u^2` is the SNR summed over all elements.
pub fn effective_aperture_sq(phi: f64, geom: &ArrayGeometry) -> f64 {
    aperture_sq(phi, geom) / geom.num_elements().max(1) as f64
}

/// AoA measurement variance `c^2 / (8 pi^2 f_c^2 u^2 D^2(phi))`, capped at
/// [`ANGLE_VARIANCE_CAP`].
pub fn sigma_phi_sq(u: f64, phi: f64, geom: &ArrayGeometry) -> f64 {
    let u = u.max(U_FLOOR);
    let d2 = effective_aperture_sq(phi, geom);
    if d2 <= 0.0 {
        return ANGLE_VARIANCE_CAP;
    }
    let v = geom.c * geom.c / (8.0 * PI * PI * geom.f_c * geom.f_c * u * u * d2);
    v.min(ANGLE_VARIANCE_CAP)
}

pub fn lik_distance(z_d: f64, d: f64, u: f64, geom: &ArrayGeometry) -> f64 {
    ln_normal_pdf(z_d, d, sigma_d_sq(u, geom)).exp()
}

pub fn lik_aoa(z_phi: f64, phi: f64, u: f64, geom: &ArrayGeometry) -> f64 {
    ln_normal_pdf(angle_diff(z_phi, phi), 0.0, sigma_phi_sq(u, phi, geom)).exp()
}

/// Detection probability of a component with amplitude `u`.
pub fn detection_prob(u: f64, u_de: f64, n_eff: f64, mode: LikelihoodMode) -> f64 {
    let s = amp_scale_sq(u, n_eff).sqrt();
    match mode {
        LikelihoodMode::Exact => marcum_q1(u / s, u_de.sqrt() / s),
        LikelihoodMode::Gauss => std_normal_sf((u_de.sqrt() - u) / s),
    }
}

/// `1 - detection_prob`, evaluated without cancellation where possible.
pub fn miss_prob(u: f64, u_de: f64, n_eff: f64, mode: LikelihoodMode) -> f64 {
    match mode {
        LikelihoodMode::Exact => 1.0 - detection_prob(u, u_de, n_eff, mode),
        LikelihoodMode::Gauss => {
            let s = amp_scale_sq(u, n_eff).sqrt();
            std_normal_cdf((u_de.sqrt() - u) / s)
        }
    }
}

/// Log of the untruncated amplitude density times the detection
/// probability, i.e. `ln(p_d(u) f(z_u | u))` for `z_u` above threshold.
fn ln_amplitude_untruncated(z_u: f64, u: f64, n_eff: f64, mode: LikelihoodMode) -> f64 {
    let s2 = amp_scale_sq(u, n_eff);
    match mode {
        LikelihoodMode::Exact => {
            let r = z_u - u;
            z_u.ln() - s2.ln() - 0.5 * r * r / s2 + bessel_i0e(z_u * u / s2).ln()
        }
        LikelihoodMode::Gauss => ln_normal_pdf(z_u, u, s2),
    }
}

/// Log of the truncated amplitude likelihood; `-inf` at or below threshold.
pub fn ln_lik_amplitude(z_u: f64, u: f64, u_de: f64, n_eff: f64, mode: LikelihoodMode) -> f64 {
    if z_u <= u_de.sqrt() {
        return f64::NEG_INFINITY;
    }
    ln_amplitude_untruncated(z_u, u, n_eff, mode) - detection_prob(u, u_de, n_eff, mode).ln()
}

pub fn lik_amplitude(z_u: f64, u: f64, u_de: f64, n_eff: f64, mode: LikelihoodMode) -> f64 {
    ln_lik_amplitude(z_u, u, u_de, n_eff, mode).exp()
}

/// `ln f(z | x)`.
pub fn ln_measurement_lik(
    z: &Measurement,
    x: &KinematicState,
    params: &HyperParams,
    geom: &ArrayGeometry,
) -> f64 {
    ln_normal_pdf(z.z_d, x.d, sigma_d_sq(x.u, geom))
        + ln_normal_pdf(angle_diff(z.z_phi, x.phi), 0.0, sigma_phi_sq(x.u, x.phi, geom))
        + ln_lik_amplitude(z.z_u, x.u, params.u_de, geom.n_eff(), params.likelihood_mode)
}

/// `ln(p_d(u) f(z | x))`, the detection-weighted likelihood.
pub fn ln_detected_lik(
    z: &Measurement,
    x: &KinematicState,
    params: &HyperParams,
    geom: &ArrayGeometry,
) -> f64 {
    if z.z_u <= params.amp_threshold() {
        return f64::NEG_INFINITY;
    }
    ln_normal_pdf(z.z_d, x.d, sigma_d_sq(x.u, geom))
        + ln_normal_pdf(angle_diff(z.z_phi, x.phi), 0.0, sigma_phi_sq(x.u, x.phi, geom))
        + ln_amplitude_untruncated(z.z_u, x.u, geom.n_eff(), params.likelihood_mode)
}

/// Per-state variances shared by all measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikTerms {
    pub var_d: f64,
    pub var_phi: f64,
    pub var_u: f64,
    /// Sum of the three Gaussian log normalizers.
    ln_norm: f64,
}

impl LikTerms {
    pub fn new(x: &KinematicState, geom: &ArrayGeometry) -> Self {
        Self::with_aperture(x, geom, &ApertureCoeffs::new(geom))
    }

    pub fn with_aperture(x: &KinematicState, geom: &ArrayGeometry, ap: &ApertureCoeffs) -> Self {
        let var_d = sigma_d_sq(x.u, geom);
        let d2 = ap.eval(x.phi) / geom.num_elements().max(1) as f64;
        let u = x.u.max(U_FLOOR);
        let var_phi = if d2 <= 0.0 {
            ANGLE_VARIANCE_CAP
        } else {
            (geom.c * geom.c / (8.0 * PI * PI * geom.f_c * geom.f_c * u * u * d2)).min(ANGLE_VARIANCE_CAP)
        };
        let var_u = amp_scale_sq(x.u, geom.n_eff());
        let ln_norm = -0.5 * ((2.0 * PI).powi(3) * var_d * var_phi * var_u).ln();
        Self {
            var_d,
            var_phi,
            var_u,
            ln_norm,
        }
    }
}

/// `ln_detected_lik` with precomputed variances.
pub fn ln_detected_lik_with(
    z: &Measurement,
    x: &KinematicState,
    t: &LikTerms,
    params: &HyperParams,
) -> f64 {
    if z.z_u <= params.amp_threshold() {
        return f64::NEG_INFINITY;
    }
    let ed = z.z_d - x.d;
    let ep = angle_diff(z.z_phi, x.phi);
    let eu = z.z_u - x.u;
    let quad = -0.5 * (ed * ed / t.var_d + ep * ep / t.var_phi + eu * eu / t.var_u);
    match params.likelihood_mode {
        LikelihoodMode::Gauss => t.ln_norm + quad,
        LikelihoodMode::Exact => {
            // Rician in place of the amplitude Gaussian
            t.ln_norm + 0.5 * (2.0 * PI * t.var_u).ln() + quad + z.z_u.ln() - t.var_u.ln()
                + bessel_i0e(z.z_u * x.u / t.var_u).ln()
        }
    }
}

/// Log clutter density; `-inf` outside the support.
pub fn ln_fa_density(z: &Measurement, u_de: f64, d_max: f64) -> f64 {
    if !(z.z_u > u_de.sqrt())
        || !(0.0..=d_max).contains(&z.z_d)
        || !(-PI..PI).contains(&z.z_phi)
    {
        return f64::NEG_INFINITY;
    }
    -d_max.ln() - (2.0 * PI).ln() + (2.0 * z.z_u).ln() - z.z_u * z.z_u + u_de
}

pub fn fa_density(z: &Measurement, u_de: f64, d_max: f64) -> f64 {
    ln_fa_density(z, u_de, d_max).exp()
}
