use super::Scenario;
use crate::error::{Error, Result};
use crate::model::{
    amp_scale_sq, detection_prob, sigma_d_sq, sigma_phi_sq, wrap_angle, ArrayGeometry,
    HyperParams, LikelihoodMode, Measurement,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use std::f64::consts::PI;

const MAX_REJECTIONS: usize = 10_000_000;

/// Draw from the Rician with parameter `u` and scale^2 `amp_scale_sq(u)`,
/// conditioned on exceeding `sqrt(u_de)`.
pub fn sample_truncated_rician<R: Rng + ?Sized>(u: f64, u_de: f64, n_eff: f64, rng: &mut R) -> f64 {
    let s = amp_scale_sq(u, n_eff).sqrt();
    let thr = u_de.sqrt();
    for _ in 0..MAX_REJECTIONS {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let z = (u + s * a).hypot(s * b);
        if z > thr {
            return z;
        }
    }
    // acceptance below 1e-7: fall back to the Rayleigh-like tail
    let e: f64 = Exp1.sample(rng);
    (thr * thr + 2.0 * s * s * e).sqrt()
}

/// Fully synthetic measurement set for one scenario step.
///
/// Each alive component is detected with probability `p_d(u)` (exact
/// Rician detection model) and perturbed with its CRLB-scale noise; clutter
/// is Poisson with mean `far_profile[step]`, uniform in distance and angle
/// with truncated-Rayleigh amplitude. Detections falling outside
/// `[0, d_max]` are dropped. Output order is random.
pub fn synth_measurements<R: Rng + ?Sized>(
    scn: &Scenario,
    step: usize,
    params: &HyperParams,
    geom: &ArrayGeometry,
    rng: &mut R,
) -> Result<Vec<Measurement>> {
    if step >= scn.steps {
        return Err(Error::StepOutOfRange {
            step,
            steps: scn.steps,
        });
    }
    let n_eff = geom.n_eff();
    let u_de = scn.u_de;
    let mut out = Vec::new();
    for x in scn.truth_at(step) {
        let pd = detection_prob(x.u, u_de, n_eff, LikelihoodMode::Exact);
        if rng.random::<f64>() >= pd {
            continue;
        }
        let ed: f64 = rng.sample(StandardNormal);
        let ep: f64 = rng.sample(StandardNormal);
        let z_d = x.d + sigma_d_sq(x.u, geom).sqrt() * ed;
        let z_phi = wrap_angle(x.phi + sigma_phi_sq(x.u, x.phi, geom).sqrt() * ep);
        let z_u = sample_truncated_rician(x.u, u_de, n_eff, rng);
        if (0.0..=params.d_max).contains(&z_d) {
            out.push(Measurement { z_d, z_phi, z_u });
        }
    }
    let mu = scn.far_profile[step];
    let count = if mu > 0.0 {
        Poisson::new(mu).map_err(|e| Error::Scenario(e.to_string()))?.sample(rng) as usize
    } else {
        0
    };
    for _ in 0..count {
        let e: f64 = Exp1.sample(rng);
        out.push(Measurement {
            z_d: rng.random::<f64>() * params.d_max,
            z_phi: wrap_angle(-PI + rng.random::<f64>() * 2.0 * PI),
            z_u: (u_de + e).sqrt(),
        });
    }
    out.shuffle(rng);
    Ok(out)
}
