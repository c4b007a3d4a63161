use super::{wrap_angle, AugmentedState, FarState, HyperParams, KinematicState};
use rand::Rng;
use rand_distr::StandardNormal;

/// Lower bound applied to false-alarm-rate samples.
pub const MU_FA_FLOOR: f64 = 1e-6;

/// Nearly-constant-velocity step driven by the noise triple
/// `(eps_d, eps_phi, eps_u)`.
pub fn propagate(x: &KinematicState, delta_t: f64, eps: [f64; 3]) -> KinematicState {
    let half = 0.5 * delta_t * delta_t;
    KinematicState {
        d: x.d + delta_t * x.v_d + half * eps[0],
        phi: wrap_angle(x.phi + delta_t * x.v_phi + half * eps[1]),
        u: (x.u + eps[2]).max(0.0),
        v_d: x.v_d + delta_t * eps[0],
        v_phi: x.v_phi + delta_t * eps[1],
    }
}

/// Draw `y' ~ f(y' | x, r)`.
pub fn transition_sample<R: Rng + ?Sized>(
    x: &KinematicState,
    exists: bool,
    params: &HyperParams,
    rng: &mut R,
) -> AugmentedState {
    if !exists || rng.random::<f64>() >= params.p_s {
        return AugmentedState { x: *x, exists: false };
    }
    AugmentedState {
        x: propagate_noisy(x, params, rng),
        exists: true,
    }
}

/// Kinematic propagation with freshly drawn driving noise.
pub fn propagate_noisy<R: Rng + ?Sized>(
    x: &KinematicState,
    params: &HyperParams,
    rng: &mut R,
) -> KinematicState {
    let n: [f64; 3] = [
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    ];
    let eps = [
        params.sigma_d * n[0],
        params.sigma_phi * n[1],
        params.sigma_u_rel * x.u * n[2],
    ];
    propagate(x, params.delta_t, eps)
}

/// Gaussian random-walk step of the false-alarm rate.
pub fn far_transition_sample<R: Rng + ?Sized>(mu_fa: f64, sigma_fa: f64, rng: &mut R) -> FarState {
    let e: f64 = rng.sample(StandardNormal);
    FarState {
        mu_fa: (mu_fa + sigma_fa * e).max(MU_FA_FLOOR),
    }
}
