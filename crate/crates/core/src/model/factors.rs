use super::likelihood::{ln_detected_lik, ln_fa_density, ln_lik_amplitude, ln_measurement_lik, miss_prob};
use super::{ArrayGeometry, HyperParams, KinematicState, Measurement};
use crate::error::{Error, Result};
use crate::special::integrate;
use std::f64::consts::PI;

use super::amp_scale_sq;

/// Value of the track-oriented association variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Association<'a> {
    Missed,
    Measurement(&'a Measurement),
}

/// Value of the measurement-oriented association variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementOrigin {
    NewOrClutter,
    Legacy(usize),
}

/// `n(mu) = (exp(-mu) mu^M)^(1 / (K + M))`.
pub fn far_norm(mu_fa: f64, m: usize, k: usize) -> Result<f64> {
    if k + m == 0 {
        return Err(Error::EmptyFactorGraph);
    }
    let ln = (-mu_fa + m as f64 * mu_fa.ln()) / (k + m) as f64;
    Ok(ln.exp())
}

/// Legacy pseudo-likelihood `g(x, r, a; mu, z)`.
#[allow(clippy::too_many_arguments)]
pub fn pseudo_g(
    x: &KinematicState,
    exists: bool,
    a: Association<'_>,
    mu_fa: f64,
    m: usize,
    k: usize,
    params: &HyperParams,
    geom: &ArrayGeometry,
) -> Result<f64> {
    let n = far_norm(mu_fa, m, k)?;
    Ok(match (exists, a) {
        (false, Association::Missed) => n,
        (false, Association::Measurement(_)) => 0.0,
        (true, Association::Missed) => {
            n * miss_prob(x.u, params.u_de, geom.n_eff(), params.likelihood_mode)
        }
        (true, Association::Measurement(z)) => {
            let ln = ln_detected_lik(z, x, params, geom) - ln_fa_density(z, params.u_de, params.d_max);
            n * ln.exp() / mu_fa
        }
    })
}

/// New-PMPC pseudo-likelihood `h(x, r, b; mu, z)`.
#[allow(clippy::too_many_arguments)]
pub fn pseudo_h(
    x: &KinematicState,
    exists: bool,
    b: MeasurementOrigin,
    mu_fa: f64,
    z: &Measurement,
    m: usize,
    k: usize,
    params: &HyperParams,
    geom: &ArrayGeometry,
) -> Result<f64> {
    let n = far_norm(mu_fa, m, k)?;
    Ok(match (exists, b) {
        (false, _) => n,
        (true, MeasurementOrigin::Legacy(_)) => 0.0,
        (true, MeasurementOrigin::NewOrClutter) => {
            let ln_fn = -(2.0 * PI * params.d_max).ln();
            let ln = ln_fn + ln_measurement_lik(z, x, params, geom)
                - ln_fa_density(z, params.u_de, params.d_max);
            n * params.mu_n * ln.exp() / mu_fa
        }
    })
}

/// `ln( int f_n(x) f(z | x) dx / f_fa(z) )` for a new PMPC with uniform
/// distance/angle prior and flat amplitude prior.
///
/// The distance and angle factors integrate to one; the amplitude integral is
/// done by quadrature.
pub fn birth_log_evidence(z: &Measurement, params: &HyperParams, geom: &ArrayGeometry) -> f64 {
    let ln_fa = ln_fa_density(z, params.u_de, params.d_max);
    if !ln_fa.is_finite() {
        return f64::NEG_INFINITY;
    }
    let n_eff = geom.n_eff();
    let mode = params.likelihood_mode;
    let f = |u: f64| ln_lik_amplitude(z.z_u, u, params.u_de, n_eff, mode).exp();
    let width = amp_scale_sq(z.z_u + 40.0, n_eff).sqrt();
    let hi = z.z_u + 40.0 * width;
    let peak = f(z.z_u).max(1e-300);
    let mass = integrate(f, 0.0, hi, 1e-10 * peak);
    -(2.0 * PI * params.d_max).ln() + mass.ln() - ln_fa
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{detection_prob, fa_density, lik_amplitude, lik_aoa, lik_distance, LikelihoodMode};
    use proptest::prelude::*;

    fn setup() -> (HyperParams, ArrayGeometry) {
        (HyperParams::default(), ArrayGeometry::default())
    }

    #[test]
    fn far_norm_values() {
        assert!((far_norm(1.0, 1, 0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!((far_norm(2.0, 4, 6).unwrap() - 1.080_32).abs() < 1e-5);
        assert!((far_norm(3.0, 0, 4).unwrap() - (-0.75f64).exp()).abs() < 1e-15);
        assert_eq!(far_norm(1.0, 0, 0), Err(Error::EmptyFactorGraph));
    }

    #[test]
    fn g_branches() {
        let (p, g) = setup();
        let x = KinematicState::new(3.0, 0.2, 6.0, 0.0, 0.0);
        let z = Measurement::new(3.0, 0.2, 6.0);
        let n = far_norm(2.0, 4, 6).unwrap();
        assert_eq!(pseudo_g(&x, false, Association::Measurement(&z), 2.0, 4, 6, &p, &g).unwrap(), 0.0);
        let g0 = pseudo_g(&x, false, Association::Missed, 2.0, 4, 6, &p, &g).unwrap();
        assert!((g0 - 1.080_32).abs() < 1e-5);

        // choose u with p_d = 0.9 in gauss mode: (sqrt(u_de) - u)/s = -1.28155...
        let mut u = 3.0;
        for _ in 0..100 {
            let s = amp_scale_sq(u, g.n_eff()).sqrt();
            u = p.u_de.sqrt() + 1.281_551_565_544_600_5 * s;
        }
        let pd = detection_prob(u, p.u_de, g.n_eff(), LikelihoodMode::Gauss);
        assert!((pd - 0.9).abs() < 1e-9);
        let xu = KinematicState { u, ..x };
        let g1 = pseudo_g(&xu, true, Association::Missed, 2.0, 4, 6, &p, &g).unwrap();
        assert!((g1 - 0.108_032).abs() < 1e-6);

        let gm = pseudo_g(&x, true, Association::Measurement(&z), 2.0, 4, 6, &p, &g).unwrap();
        let pdx = detection_prob(x.u, p.u_de, g.n_eff(), p.likelihood_mode);
        let f = lik_distance(z.z_d, x.d, x.u, &g)
            * lik_aoa(z.z_phi, x.phi, x.u, &g)
            * lik_amplitude(z.z_u, x.u, p.u_de, g.n_eff(), p.likelihood_mode);
        let want = n * f * pdx / (2.0 * fa_density(&z, p.u_de, p.d_max));
        assert!(((gm - want) / want).abs() < 1e-9);
    }

    #[test]
    fn h_branches() {
        let (p, g) = setup();
        let x = KinematicState::new(3.0, 0.2, 6.0, 0.0, 0.0);
        let z = Measurement::new(3.01, 0.21, 5.5);
        let n = far_norm(2.0, 4, 6).unwrap();
        assert_eq!(pseudo_h(&x, true, MeasurementOrigin::Legacy(2), 2.0, &z, 4, 6, &p, &g).unwrap(), 0.0);
        for b in [MeasurementOrigin::NewOrClutter, MeasurementOrigin::Legacy(1)] {
            assert_eq!(pseudo_h(&x, false, b, 2.0, &z, 4, 6, &p, &g).unwrap(), n);
        }
        let h = pseudo_h(&x, true, MeasurementOrigin::NewOrClutter, 2.0, &z, 4, 6, &p, &g).unwrap();
        let f = lik_distance(z.z_d, x.d, x.u, &g)
            * lik_aoa(z.z_phi, x.phi, x.u, &g)
            * lik_amplitude(z.z_u, x.u, p.u_de, g.n_eff(), p.likelihood_mode);
        let ratio = f / fa_density(&z, p.u_de, p.d_max);
        let want = n * 0.008 / (2.0 * PI * 17.0 * 2.0);
        assert!(((h / ratio - want) / want).abs() < 1e-9);
    }

    #[test]
    fn birth_evidence_matches_brute_force() {
        let (p, g) = setup();
        let z = Measurement::new(4.0, -0.5, 7.0);
        let got = birth_log_evidence(&z, &p, &g);
        // plain trapezoid on a fine grid
        let n = 200_000;
        let hi = 30.0;
        let h = hi / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let u = i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            s += w * lik_amplitude(z.z_u, u, p.u_de, g.n_eff(), p.likelihood_mode);
        }
        let want = (s * h / (2.0 * PI * p.d_max)).ln() - fa_density(&z, p.u_de, p.d_max).ln();
        assert!((got - want).abs() < 1e-6, "got {got} want {want}");
    }

    proptest! {
        #[test]
        fn far_norm_power_identity(mu in 1e-3f64..20.0, m in 0usize..15, k in 0usize..15) {
            prop_assume!(k + m > 0);
            let n = far_norm(mu, m, k).unwrap();
            let want = (-mu).exp() * mu.powi(m as i32);
            prop_assert!(((n.powi((k + m) as i32) - want) / want).abs() < 1e-12);
        }

        #[test]
        fn factors_nonnegative(
            d in 0.0f64..17.0, phi in -3.0f64..3.0, u in 0.0f64..40.0,
            zd in 0.0f64..17.0, zp in -3.0f64..3.0, zu in 2.05f64..40.0,
            mu in 1e-6f64..10.0,
        ) {
            let (p, g) = setup();
            let x = KinematicState::new(d, phi, u, 0.0, 0.0);
            let z = Measurement::new(zd, zp, zu);
            for r in [false, true] {
                for a in [Association::Missed, Association::Measurement(&z)] {
                    prop_assert!(pseudo_g(&x, r, a, mu, 2, 3, &p, &g).unwrap() >= 0.0);
                }
                for b in [MeasurementOrigin::NewOrClutter, MeasurementOrigin::Legacy(0)] {
                    prop_assert!(pseudo_h(&x, r, b, mu, &z, 2, 3, &p, &g).unwrap() >= 0.0);
                }
            }
            prop_assert_eq!(pseudo_h(&x, true, MeasurementOrigin::Legacy(1), mu, &z, 2, 3, &p, &g).unwrap(), 0.0);
        }
    }
}
