use super::AssociationWeights;
use crate::belief::{FarBelief, PmpcBelief};
use crate::model::{
    birth_log_evidence, far_norm, ln_detected_lik_with, ln_fa_density, ApertureCoeffs, LikTerms, miss_prob, ArrayGeometry,
    HyperParams, Measurement,
};
use crate::special::{log_add_exp, log_sum_exp};
use rayon::prelude::*;

/// Per-track quantities reused by the measurement update.
#[derive(Debug, Clone, PartialEq)]
pub struct LegacyEvaluation {
    /// `1 - p_d(u_j)` per particle.
    pub miss: Vec<f64>,
    /// `ln(p_d(u_j) f(z_m | x_j) / f_fa(z_m))`, indexed `[m][j]`.
    pub log_detect: Vec<Vec<f64>>,
    /// `ln((1 - q) + q sum_j w_j (1 - p_d(u_j)))`.
    pub ln_miss_mass: f64,
    /// `ln(q sum_j w_j p_d f / f_fa)` per measurement.
    pub ln_detect_mass: Vec<f64>,
}

/// Moments of the FAR normalization over the FAR particles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarMoments {
    /// `<n(mu)>`.
    pub mean_norm: f64,
    /// `<n(mu)> / <n(mu) mu>`, the inverse of the weighted mean FAR.
    pub inv_rate: f64,
}

/// Everything the measurement-evaluation stage produces.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEvaluation {
    pub weights: AssociationWeights,
    pub legacy: Vec<LegacyEvaluation>,
    /// `ln I_m`, the birth evidence relative to clutter.
    pub ln_birth: Vec<f64>,
    pub far: FarMoments,
}

/// Build the association weights for legacy beliefs (already predicted)
/// against a measurement set, marginalizing the FAR over its particles.
///
/// Columns are rescaled per measurement and rows per track so all entries
/// stay finite; the removed log factors are recorded in the weights.
pub fn evaluate_weights(
    legacy: &[PmpcBelief],
    measurements: &[Measurement],
    far: &FarBelief,
    params: &HyperParams,
    geom: &ArrayGeometry,
) -> MeasurementEvaluation {
    let k_n = legacy.len();
    let m_n = measurements.len();
    let n_eff = geom.n_eff();

    let far_m = far_moments(far, m_n, k_n);
    let ln_r = far_m.inv_rate.ln();

    let ln_fa: Vec<f64> = measurements
        .iter()
        .map(|z| ln_fa_density(z, params.u_de, params.d_max))
        .collect();

    let aperture = ApertureCoeffs::new(geom);
    let legacy_eval: Vec<LegacyEvaluation> = legacy
        .par_iter()
        .map(|b| {
            let q = b.p_exist;
            let miss: Vec<f64> = b
                .particles
                .iter()
                .map(|x| miss_prob(x.u, params.u_de, n_eff, params.likelihood_mode))
                .collect();
            let mean_miss: f64 = b.weights.iter().zip(&miss).map(|(w, m)| w * m).sum();
            let ln_miss_mass = ((1.0 - q) + q * mean_miss).ln();
            let ln_w: Vec<f64> = b.weights.iter().map(|w| w.ln()).collect();
            let mut log_detect = Vec::with_capacity(m_n);
            let mut ln_detect_mass = Vec::with_capacity(m_n);
            let terms: Vec<LikTerms> = b
                .particles
                .iter()
                .map(|x| LikTerms::with_aperture(x, geom, &aperture))
                .collect();
            let mut buf = vec![0.0; b.particles.len()];
            for (z, &lf) in measurements.iter().zip(&ln_fa) {
                let t: Vec<f64> = b
                    .particles
                    .iter()
                    .zip(&terms)
                    .map(|(x, tm)| ln_detected_lik_with(z, x, tm, params) - lf)
                    .collect();
                for ((o, ti), lw) in buf.iter_mut().zip(&t).zip(&ln_w) {
                    *o = ti + lw;
                }
                ln_detect_mass.push(q.ln() + log_sum_exp(&buf));
                log_detect.push(t);
            }
            LegacyEvaluation {
                miss,
                log_detect,
                ln_miss_mass,
                ln_detect_mass,
            }
        })
        .collect();

    let ln_birth: Vec<f64> = measurements
        .par_iter()
        .map(|z| birth_log_evidence(z, params, geom))
        .collect();

    let ln_mu_n = params.mu_n.ln();
    let ln_xi0: Vec<f64> = ln_birth
        .iter()
        .map(|lb| log_add_exp(0.0, ln_mu_n + ln_r + lb))
        .collect();

    let measurement_log_scale: Vec<f64> = (0..m_n)
        .map(|m| {
            legacy_eval
                .iter()
                .map(|e| ln_r + e.ln_detect_mass[m])
                .fold(ln_xi0[m], f64::max)
        })
        .collect();

    let mut beta = Vec::with_capacity(k_n);
    let mut beta_log_scale = Vec::with_capacity(k_n);
    for e in &legacy_eval {
        let mut row = Vec::with_capacity(m_n + 1);
        row.push(e.ln_miss_mass);
        row.extend((0..m_n).map(|m| ln_r + e.ln_detect_mass[m] - measurement_log_scale[m]));
        let t = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if t.is_finite() {
            beta.push(row.iter().map(|v| (v - t).exp()).collect());
            beta_log_scale.push(t + far_m.mean_norm.ln());
        } else {
            beta.push(vec![0.0; m_n + 1]);
            beta_log_scale.push(0.0);
        }
    }
    let xi0: Vec<f64> = (0..m_n)
        .map(|m| (ln_xi0[m] - measurement_log_scale[m]).exp())
        .collect();
    let mut weights = AssociationWeights::new(beta, xi0);
    weights.beta_log_scale = beta_log_scale;
    weights.measurement_log_scale = measurement_log_scale;

    MeasurementEvaluation {
        weights,
        legacy: legacy_eval,
        ln_birth,
        far: far_m,
    }
}

fn far_moments(far: &FarBelief, m: usize, k: usize) -> FarMoments {
    if k + m == 0 {
        let mean: f64 = far.particles.iter().zip(&far.weights).map(|(p, w)| w * p).sum();
        return FarMoments {
            mean_norm: 1.0,
            inv_rate: 1.0 / mean,
        };
    }
    let mut s = 0.0;
    let mut s_mu = 0.0;
    for (&mu, &w) in far.particles.iter().zip(&far.weights) {
        let n = far_norm(mu, m, k).unwrap_or(0.0);
        s += w * n;
        s_mu += w * n * mu;
    }
    FarMoments {
        mean_norm: s,
        inv_rate: s / s_mu,
    }
}
