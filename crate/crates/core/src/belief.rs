//! Particle beliefs of potential MPCs and of the false-alarm rate.

use crate::error::{Error, Result};
use crate::model::{angle_diff, wrap_angle, KinematicState};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Particle posterior of one potential MPC.
#[derive(Debug, Clone, PartialEq)]
pub struct PmpcBelief {
    pub id: u64,
    pub birth_step: usize,
    pub particles: Vec<KinematicState>,
    pub weights: Vec<f64>,
    pub p_exist: f64,
}

/// Weighted mean and standard deviation of the kinematic state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefSummary {
    pub id: u64,
    pub d: f64,
    pub phi: f64,
    pub u: f64,
    pub sigma_d: f64,
    pub sigma_phi: f64,
    pub p_exist: f64,
}

impl PmpcBelief {
    /// Equally weighted belief over `particles`.
    pub fn uniform(id: u64, birth_step: usize, particles: Vec<KinematicState>, p_exist: f64) -> Self {
        let j = particles.len();
        Self {
            id,
            birth_step,
            particles,
            weights: vec![1.0 / j as f64; j],
            p_exist,
        }
    }

    /// MMSE means and weighted standard deviations. The angular mean is the
    /// weighted mean of residuals about the first particle, so it is
    /// continuous across the +-pi seam.
    pub fn summary(&self) -> BeliefSummary {
        let mut d = 0.0;
        let mut u = 0.0;
        let mut dphi = 0.0;
        let reference = self.particles.first().map_or(0.0, |p| p.phi);
        for (p, &w) in self.particles.iter().zip(&self.weights) {
            d += w * p.d;
            u += w * p.u;
            dphi += w * angle_diff(p.phi, reference);
        }
        let phi = wrap_angle(reference + dphi);
        let mut vd = 0.0;
        let mut vp = 0.0;
        for (p, &w) in self.particles.iter().zip(&self.weights) {
            vd += w * (p.d - d).powi(2);
            vp += w * angle_diff(p.phi, phi).powi(2);
        }
        BeliefSummary {
            id: self.id,
            d,
            phi,
            u,
            sigma_d: vd.sqrt(),
            sigma_phi: vp.sqrt(),
            p_exist: self.p_exist,
        }
    }

    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }
}

/// Particle posterior of the mean false-alarm rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FarBelief {
    pub particles: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FarBelief {
    pub fn mean(&self) -> f64 {
        self.particles.iter().zip(&self.weights).map(|(p, w)| p * w).sum()
    }
}

/// Normalize weights in place; errors if they sum to zero or are not finite.
pub fn normalize(weights: &mut [f64]) -> Result<()> {
    let s: f64 = weights.iter().sum();
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::DegenerateWeights);
    }
    weights.iter_mut().for_each(|w| *w /= s);
    Ok(())
}

/// Turn log-weights into normalized weights.
pub fn normalize_log(log_w: &[f64]) -> Result<Vec<f64>> {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegenerateWeights);
    }
    let mut w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    normalize(&mut w)?;
    Ok(w)
}

/// Systematic resampling indices: `j` draws from `weights`.
pub fn systematic_indices<R: Rng + ?Sized>(weights: &[f64], j: usize, rng: &mut R) -> Result<Vec<usize>> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || !(total > 0.0 && total.is_finite()) {
        return Err(Error::DegenerateWeights);
    }
    let step = total / j as f64;
    let mut pos = rng.random::<f64>() * step;
    let mut out = Vec::with_capacity(j);
    let mut cum = weights[0];
    let mut i = 0;
    for _ in 0..j {
        while pos >= cum && i + 1 < weights.len() {
            i += 1;
            cum += weights[i];
        }
        out.push(i);
        pos += step;
    }
    Ok(out)
}

/// Systematic resampling of a belief to `j` equally weighted particles.
pub fn resample<R: Rng + ?Sized>(belief: &PmpcBelief, j: usize, rng: &mut R) -> Result<PmpcBelief> {
    let idx = systematic_indices(&belief.weights, j, rng)?;
    Ok(PmpcBelief {
        particles: idx.iter().map(|&i| belief.particles[i]).collect(),
        weights: vec![1.0 / j as f64; j],
        ..belief.clone()
    })
}

/// Systematic resampling of the false-alarm-rate belief.
pub fn resample_far<R: Rng + ?Sized>(belief: &FarBelief, j: usize, rng: &mut R) -> Result<FarBelief> {
    let idx = systematic_indices(&belief.weights, j, rng)?;
    Ok(FarBelief {
        particles: idx.iter().map(|&i| belief.particles[i]).collect(),
        weights: vec![1.0 / j as f64; j],
    })
}
