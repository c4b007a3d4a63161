//! Sequential detection and tracking of potential MPCs.

use crate::association::{evaluate_weights, loopy_da, AssociationMarginals, MeasurementEvaluation};
use crate::belief::{
    normalize_log, resample_far, systematic_indices, BeliefSummary, FarBelief, PmpcBelief,
};
use crate::error::{Error, Result};
use crate::model::{
    angle_diff, far_transition_sample, ln_measurement_lik, propagate_noisy, sigma_d_sq,
    sigma_phi_sq, amp_scale_sq, wrap_angle, ArrayGeometry, HyperParams, KinematicState,
    Measurement, MU_FA_FLOOR,
};
use crate::special::{ln_normal_pdf, log_add_exp, log_sum_exp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Tracker output for one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEstimate {
    pub step: usize,
    pub detected: Vec<BeliefSummary>,
    pub nom_hat: usize,
    pub mu_fa_mmse: f64,
    pub all_tracks: Vec<BeliefSummary>,
}

/// Complete filter state.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    pub legacy: Vec<PmpcBelief>,
    /// `None` until the first measurement set fixes the initial FAR mean.
    pub far: Option<FarBelief>,
    pub step: usize,
    pub next_id: u64,
    pub rng: ChaCha8Rng,
}

/// Fresh tracker state with no legacy PMPCs.
pub fn init(params: &HyperParams, seed: u64) -> Result<TrackerState> {
    params.check()?;
    Ok(TrackerState {
        legacy: Vec::new(),
        far: None,
        step: 0,
        next_id: 0,
        rng: ChaCha8Rng::seed_from_u64(seed),
    })
}

/// Prediction: propagate every particle and fold survival into existence.
pub fn predict(state: &mut TrackerState, params: &HyperParams) {
    let seeds: Vec<u64> = state.legacy.iter().map(|_| state.rng.random()).collect();
    state
        .legacy
        .par_iter_mut()
        .zip(seeds)
        .for_each(|(b, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for x in b.particles.iter_mut() {
                *x = propagate_noisy(x, params, &mut rng);
            }
            b.p_exist *= params.p_s;
        });
    if let Some(far) = state.far.as_mut() {
        for mu in far.particles.iter_mut() {
            *mu = far_transition_sample(*mu, params.sigma_fa, &mut state.rng).mu_fa;
        }
    }
}

fn check_measurements(zs: &[Measurement], params: &HyperParams) -> Result<()> {
    let thr = params.amp_threshold();
    for (i, z) in zs.iter().enumerate() {
        if !(z.z_u > thr) {
            return Err(Error::BelowThreshold {
                index: i,
                z_u: z.z_u,
                threshold: thr,
            });
        }
        if !(0.0..=params.d_max).contains(&z.z_d) || !z.z_phi.is_finite() {
            return Err(Error::InvalidParameter {
                field: format!("measurements[{i}]"),
                reason: format!("z_d = {} outside [0, {}]", z.z_d, params.d_max),
            });
        }
    }
    Ok(())
}

/// Measurement update for one snapshot. Assumes [`predict`] was called for
/// this step (or that the state holds predicted beliefs).
pub fn update(
    state: &mut TrackerState,
    measurements: &[Measurement],
    params: &HyperParams,
    geom: &ArrayGeometry,
) -> Result<(StepEstimate, AssociationMarginals)> {
    check_measurements(measurements, params)?;
    state.step += 1;

    // canonical order so the result does not depend on input order
    let mut order: Vec<usize> = (0..measurements.len()).collect();
    order.sort_by(|&a, &b| {
        let (za, zb) = (&measurements[a], &measurements[b]);
        za.z_d
            .total_cmp(&zb.z_d)
            .then(za.z_phi.total_cmp(&zb.z_phi))
            .then(za.z_u.total_cmp(&zb.z_u))
    });
    let zs: Vec<Measurement> = order.iter().map(|&i| measurements[i]).collect();
    let m_n = zs.len();

    if state.far.is_none() {
        let mean = m_n as f64 / 2.0;
        let particles = (0..params.j)
            .map(|_| {
                let e: f64 = state.rng.sample(StandardNormal);
                (mean + params.sigma_fa_ini * e).max(MU_FA_FLOOR)
            })
            .collect();
        state.far = Some(FarBelief {
            particles,
            weights: vec![1.0 / params.j as f64; params.j],
        });
    }
    let far = state.far.as_ref().expect("initialized above");

    let eval = evaluate_weights(&state.legacy, &zs, far, params, geom);
    let marg = loopy_da(&eval.weights, params.p, params.da_tol);

    let ln_r = eval.far.inv_rate.ln();
    let scale = &eval.weights.measurement_log_scale;

    // legacy reweighting and existence
    let seeds: Vec<u64> = state.legacy.iter().map(|_| state.rng.random()).collect();
    let updated: Vec<Result<PmpcBelief>> = state
        .legacy
        .par_iter()
        .zip(&eval.legacy)
        .zip(&marg.nu)
        .zip(seeds)
        .map(|(((b, e), nu), seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coef: Vec<f64> = (0..m_n).map(|m| ln_r + nu[m].ln() - scale[m]).collect();
            let gamma: Vec<f64> = (0..b.particles.len())
                .map(|j| {
                    let mut g = e.miss[j];
                    for m in 0..m_n {
                        g += (coef[m] + e.log_detect[m][j]).exp();
                    }
                    g
                })
                .collect();
            let q = b.p_exist;
            let mass: f64 = b.weights.iter().zip(&gamma).map(|(w, g)| w * g).sum();
            let num = q * mass;
            let p_exist = if num > 0.0 { num / (num + (1.0 - q)) } else { 0.0 };
            let mut out = b.clone();
            out.p_exist = p_exist.clamp(0.0, 1.0);
            if mass > 0.0 && mass.is_finite() {
                let w: Vec<f64> = b.weights.iter().zip(&gamma).map(|(w, g)| w * g).collect();
                let idx = systematic_indices(&w, params.j, &mut rng)?;
                out.particles = idx.iter().map(|&i| b.particles[i]).collect();
                out.weights = vec![1.0 / params.j as f64; params.j];
            }
            Ok(out)
        })
        .collect();
    let legacy: Vec<PmpcBelief> = updated.into_iter().collect::<Result<_>>()?;

    // FAR reweighting
    let new_far = update_far(far, &eval, &marg, params, &mut state.rng)?;

    // new PMPCs, one per measurement
    let seeds: Vec<u64> = zs.iter().map(|_| state.rng.random()).collect();
    let ln_mu_n = params.mu_n.ln();
    let newborn: Vec<(f64, Vec<KinematicState>)> = zs
        .par_iter()
        .enumerate()
        .zip(seeds)
        .map(|((m, z), seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ln_zeta = log_sum_exp(&marg.zeta.iter().map(|row| row[m].ln()).collect::<Vec<_>>());
            let ln_num = ln_mu_n + ln_r + eval.ln_birth[m] - scale[m];
            let ln_den = log_add_exp(log_add_exp(ln_num, -scale[m]), ln_zeta);
            let p = if ln_num.is_finite() { (ln_num - ln_den).exp() } else { 0.0 };
            (p.clamp(0.0, 1.0), birth_particles(z, params, geom, &mut rng))
        })
        .collect();

    let mut legacy: Vec<PmpcBelief> = legacy.into_iter().filter(|b| b.p_exist >= params.p_pr).collect();
    for (p, particles) in newborn {
        legacy.push(PmpcBelief::uniform(state.next_id, state.step, particles, p));
        state.next_id += 1;
    }
    state.legacy = legacy;
    state.far = Some(new_far);

    Ok((estimate(state, params), unpermute(marg, &order)))
}

fn update_far<R: Rng + ?Sized>(
    far: &FarBelief,
    eval: &MeasurementEvaluation,
    marg: &AssociationMarginals,
    params: &HyperParams,
    rng: &mut R,
) -> Result<FarBelief> {
    // per measurement: probability of a non-legacy origin and the birth rate
    // relative to the clutter density
    let mu_ref = 1.0 / eval.far.inv_rate;
    let terms: Vec<(f64, f64)> = marg
        .p_b
        .iter()
        .zip(&eval.ln_birth)
        .map(|(pb, &lb)| (pb[0], params.mu_n * lb.exp()))
        .collect();
    let log_w: Vec<f64> = far
        .particles
        .par_iter()
        .zip(&far.weights)
        .map(|(&mu, &w)| {
            let mut lw = w.ln() - mu;
            for &(q, c) in &terms {
                let ratio = if c.is_finite() { (mu + c) / (mu_ref + c) } else { 1.0 };
                lw += ((1.0 - q) + q * ratio).ln();
            }
            lw
        })
        .collect();
    let weights = normalize_log(&log_w)?;
    resample_far(
        &FarBelief {
            particles: far.particles.clone(),
            weights,
        },
        params.j,
        rng,
    )
}

/// Importance-sampled particles for the new PMPC of measurement `z`.
fn birth_particles<R: Rng + ?Sized>(
    z: &Measurement,
    params: &HyperParams,
    geom: &ArrayGeometry,
    rng: &mut R,
) -> Vec<KinematicState> {
    let var_d = sigma_d_sq(z.z_u, geom);
    let var_phi = sigma_phi_sq(z.z_u, z.z_phi, geom);
    let var_u = amp_scale_sq(z.z_u, geom.n_eff());
    let (sd, sp, su) = (var_d.sqrt(), var_phi.sqrt(), var_u.sqrt());
    let mut particles = Vec::with_capacity(params.j);
    let mut log_w = Vec::with_capacity(params.j);
    for _ in 0..params.j {
        let n: [f64; 5] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let x = KinematicState {
            d: z.z_d + sd * n[0],
            phi: wrap_angle(z.z_phi + sp * n[1]),
            u: (z.z_u + su * n[2]).abs(),
            v_d: params.sigma_v_d * n[3],
            v_phi: params.sigma_v_phi * n[4],
        };
        let ln_q = ln_normal_pdf(x.d, z.z_d, var_d)
            + ln_normal_pdf(angle_diff(x.phi, z.z_phi), 0.0, var_phi)
            + log_add_exp(
                ln_normal_pdf(x.u, z.z_u, var_u),
                ln_normal_pdf(-x.u, z.z_u, var_u),
            );
        let ln_f = if (0.0..=params.d_max).contains(&x.d) {
            ln_measurement_lik(z, &x, params, geom)
        } else {
            f64::NEG_INFINITY
        };
        log_w.push(ln_f - ln_q);
        particles.push(x);
    }
    match normalize_log(&log_w).and_then(|w| systematic_indices(&w, params.j, rng)) {
        Ok(idx) => idx.iter().map(|&i| particles[i]).collect(),
        Err(_) => particles,
    }
}

fn unpermute(mut marg: AssociationMarginals, order: &[usize]) -> AssociationMarginals {
    let m_n = order.len();
    let mut inv = vec![0; m_n];
    for (pos, &orig) in order.iter().enumerate() {
        inv[orig] = pos;
    }
    for row in marg.p_a.iter_mut() {
        let sorted = row.clone();
        for orig in 0..m_n {
            row[orig + 1] = sorted[inv[orig] + 1];
        }
    }
    for rows in [&mut marg.nu, &mut marg.zeta] {
        for row in rows.iter_mut() {
            if row.len() == m_n {
                let sorted = row.clone();
                for orig in 0..m_n {
                    row[orig] = sorted[inv[orig]];
                }
            }
        }
    }
    let sorted = std::mem::take(&mut marg.p_b);
    marg.p_b = (0..m_n).map(|orig| sorted[inv[orig]].clone()).collect();
    marg.degenerate_measurements = marg
        .degenerate_measurements
        .iter()
        .map(|&pos| order[pos])
        .collect();
    marg
}

/// Detection and MMSE extraction from the current state.
pub fn estimate(state: &TrackerState, params: &HyperParams) -> StepEstimate {
    let all_tracks: Vec<BeliefSummary> = state.legacy.iter().map(PmpcBelief::summary).collect();
    let detected: Vec<BeliefSummary> = all_tracks
        .iter()
        .filter(|s| s.p_exist > params.p_de)
        .copied()
        .collect();
    StepEstimate {
        step: state.step,
        nom_hat: detected.len(),
        detected,
        mu_fa_mmse: state.far.as_ref().map_or(0.0, FarBelief::mean),
        all_tracks,
    }
}

/// Convenience driver holding parameters alongside the state.
#[derive(Debug, Clone)]
pub struct Tracker {
    pub params: HyperParams,
    pub geom: ArrayGeometry,
    pub state: TrackerState,
}

impl Tracker {
    pub fn new(params: HyperParams, geom: ArrayGeometry, seed: u64) -> Result<Self> {
        let state = init(&params, seed)?;
        Ok(Self { params, geom, state })
    }

    /// Predict and update with one measurement set.
    pub fn step(&mut self, measurements: &[Measurement]) -> Result<StepEstimate> {
        predict(&mut self.state, &self.params);
        update(&mut self.state, measurements, &self.params, &self.geom).map(|(e, _)| e)
    }
}
