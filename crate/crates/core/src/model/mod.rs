//! Domain types, motion and measurement models, and the factor functions of
//! the association graph.

mod crlb;
mod factors;
mod likelihood;
mod transition;

pub use crlb::{amp_scale_sq, crlb_amp_scale_numeric};
pub use factors::{birth_log_evidence, far_norm, pseudo_g, pseudo_h, Association, MeasurementOrigin};
pub use likelihood::{
    aperture_sq, detection_prob, effective_aperture_sq, fa_density, lik_amplitude, lik_aoa,
    lik_distance, ln_detected_lik, ln_detected_lik_with, ln_fa_density, ln_lik_amplitude, ln_measurement_lik,
    miss_prob, ApertureCoeffs, LikTerms, sigma_d_sq, sigma_phi_sq, ANGLE_VARIANCE_CAP, U_FLOOR,
};
pub use transition::{far_transition_sample, propagate, propagate_noisy, transition_sample, MU_FA_FLOOR};

use crate::error::Error;
use crate::pulse::RrcPulse;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Wrap an angle into `[-pi, pi)`.
#[inline]
pub fn wrap_angle(x: f64) -> f64 {
    let w = x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor();
    if w >= PI {
        w - 2.0 * PI
    } else if w < -PI {
        -PI
    } else {
        w
    }
}

/// Wrapped angular difference `a - b` in `(-pi, pi]`.
#[inline]
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let w = wrap_angle(a - b);
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Kinematic state of one potential MPC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub d: f64,
    pub phi: f64,
    pub u: f64,
    pub v_d: f64,
    pub v_phi: f64,
}

impl KinematicState {
    pub fn new(d: f64, phi: f64, u: f64, v_d: f64, v_phi: f64) -> Self {
        Self {
            d,
            phi: wrap_angle(phi),
            u: u.max(0.0),
            v_d,
            v_phi,
        }
    }
}

/// Kinematic state together with its existence flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedState {
    pub x: KinematicState,
    pub exists: bool,
}

/// One snapshot-estimator output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub z_d: f64,
    pub z_phi: f64,
    pub z_u: f64,
}

impl Measurement {
    pub fn new(z_d: f64, z_phi: f64, z_u: f64) -> Self {
        Self {
            z_d,
            z_phi: wrap_angle(z_phi),
            z_u,
        }
    }
}

/// Mean false-alarm rate sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarState {
    pub mu_fa: f64,
}

/// Polar offset of one array element relative to the centroid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementOffset {
    pub radius: f64,
    pub angle: f64,
}

/// Receive array and signal parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayGeometry {
    pub element_offsets: Vec<ElementOffset>,
    pub psi: f64,
    pub f_c: f64,
    pub beta_bw_sq: f64,
    pub n_s: usize,
    pub t_s: f64,
    pub c: f64,
    /// RRC symbol period used by the radio forward model.
    pub t_p: f64,
    pub rolloff: f64,
}

impl ArrayGeometry {
    /// Uniform rectangular array centred at the origin.
    pub fn uniform_rectangular(rows: usize, cols: usize, spacing: f64) -> Vec<ElementOffset> {
        let r0 = (rows as f64 - 1.0) / 2.0;
        let c0 = (cols as f64 - 1.0) / 2.0;
        let mut out = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let x = (j as f64 - c0) * spacing;
                let y = (i as f64 - r0) * spacing;
                out.push(ElementOffset {
                    radius: x.hypot(y),
                    angle: y.atan2(x),
                });
            }
        }
        out
    }

    pub fn num_elements(&self) -> usize {
        self.element_offsets.len()
    }

    /// `N_s * H`.
    pub fn n_eff(&self) -> f64 {
        (self.n_s * self.num_elements()) as f64
    }

    pub fn pulse(&self) -> RrcPulse {
        RrcPulse::new(self.t_p, self.rolloff)
    }

    /// Cartesian element positions.
    pub fn element_positions(&self) -> Vec<(f64, f64)> {
        self.element_offsets
            .iter()
            .map(|e| (e.radius * e.angle.cos(), e.radius * e.angle.sin()))
            .collect()
    }

    pub fn validate(&self) -> Vec<(String, String)> {
        let mut errs = Vec::new();
        if self.element_offsets.is_empty() {
            errs.push(("geom.element_offsets".into(), "at least one element required".into()));
        } else {
            let pos = self.element_positions();
            let n = pos.len() as f64;
            let cx: f64 = pos.iter().map(|p| p.0).sum::<f64>() / n;
            let cy: f64 = pos.iter().map(|p| p.1).sum::<f64>() / n;
            let scale = self
                .element_offsets
                .iter()
                .map(|e| e.radius)
                .fold(0.0, f64::max)
                .max(1e-12);
            if cx.hypot(cy) > 1e-9 * scale.max(1.0) {
                errs.push(("geom.element_offsets".into(), "centroid must be the origin".into()));
            }
            if self.element_offsets.iter().any(|e| !(e.radius >= 0.0)) {
                errs.push(("geom.element_offsets".into(), "radii must be nonnegative".into()));
            }
        }
        if self.n_s == 0 {
            errs.push(("geom.n_s".into(), "must be >= 1".into()));
        }
        for (name, v) in [
            ("geom.f_c", self.f_c),
            ("geom.beta_bw_sq", self.beta_bw_sq),
            ("geom.t_s", self.t_s),
            ("geom.c", self.c),
            ("geom.t_p", self.t_p),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push((name.into(), "must be positive and finite".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            errs.push(("geom.rolloff".into(), "must lie in [0, 1]".into()));
        }
        errs
    }
}

impl Default for ArrayGeometry {
    /// 3x3 array with 2 cm spacing at 6 GHz, 46 samples at 1.25 ns, RRC pulse
    /// of 2 ns with roll-off 0.6.
    fn default() -> Self {
        let pulse = RrcPulse::new(2e-9, 0.6);
        Self {
            element_offsets: Self::uniform_rectangular(3, 3, 0.02),
            psi: 0.0,
            f_c: 6e9,
            beta_bw_sq: pulse.mean_square_bandwidth(),
            n_s: 46,
            t_s: 1.25e-9,
            c: SPEED_OF_LIGHT,
            t_p: pulse.t_p,
            rolloff: pulse.rolloff,
        }
    }
}

/// Amplitude likelihood flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodMode {
    Exact,
    #[default]
    Gauss,
}

/// Squared-amplitude detection threshold `N_s H 10^(db/10)` for an
/// input-SNR threshold given in dB.
pub fn u_de_from_input_db(db: f64, n_eff: f64) -> f64 {
    n_eff * 10f64.powf(db / 10.0)
}

/// Tracker and model hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperParams {
    pub p_s: f64,
    pub p_de: f64,
    pub p_pr: f64,
    pub mu_n: f64,
    pub u_de: f64,
    pub d_max: f64,
    pub sigma_d: f64,
    pub sigma_phi: f64,
    pub sigma_u_rel: f64,
    pub sigma_fa: f64,
    pub sigma_fa_ini: f64,
    pub sigma_v_d: f64,
    pub sigma_v_phi: f64,
    pub delta_t: f64,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(rename = "P")]
    pub p: usize,
    pub da_tol: f64,
    pub likelihood_mode: LikelihoodMode,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            p_s: 0.999,
            p_de: 0.5,
            p_pr: 1e-4,
            mu_n: 0.008,
            u_de: u_de_from_input_db(-20.0, 414.0),
            d_max: 17.0,
            sigma_d: 0.002,
            sigma_phi: 0.17f64.to_radians(),
            sigma_u_rel: 0.02,
            sigma_fa: 0.15,
            sigma_fa_ini: 0.5,
            sigma_v_d: 0.01,
            sigma_v_phi: 0.6f64.to_radians(),
            delta_t: 1.0,
            j: 10_000,
            p: 5_000,
            da_tol: 1e-6,
            likelihood_mode: LikelihoodMode::Gauss,
        }
    }
}

impl HyperParams {
    /// `sqrt(u_de)`, the amplitude threshold.
    pub fn amp_threshold(&self) -> f64 {
        self.u_de.sqrt()
    }

    /// Range violations as `(field path, reason)` pairs.
    pub fn validate(&self) -> Vec<(String, String)> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("hyper.p_s", self.p_s),
            ("hyper.p_de", self.p_de),
            ("hyper.p_pr", self.p_pr),
        ] {
            if !(0.0..=1.0).contains(&v) {
                errs.push((name.into(), format!("{v} outside [0, 1]")));
            }
        }
        for (name, v) in [
            ("hyper.sigma_d", self.sigma_d),
            ("hyper.sigma_phi", self.sigma_phi),
            ("hyper.sigma_u_rel", self.sigma_u_rel),
            ("hyper.sigma_fa", self.sigma_fa),
            ("hyper.sigma_fa_ini", self.sigma_fa_ini),
            ("hyper.sigma_v_d", self.sigma_v_d),
            ("hyper.sigma_v_phi", self.sigma_v_phi),
            ("hyper.mu_n", self.mu_n),
            ("hyper.u_de", self.u_de),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                errs.push((name.into(), format!("{v} must be nonnegative and finite")));
            }
        }
        for (name, v) in [
            ("hyper.d_max", self.d_max),
            ("hyper.delta_t", self.delta_t),
            ("hyper.da_tol", self.da_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push((name.into(), format!("{v} must be positive and finite")));
            }
        }
        if self.j == 0 {
            errs.push(("hyper.J".into(), "must be >= 1".into()));
        }
        if self.p == 0 {
            errs.push(("hyper.P".into(), "must be >= 1".into()));
        }
        errs
    }

    /// Validate, folding all violations into one error.
    pub fn check(&self) -> Result<(), Error> {
        let errs = self.validate();
        match errs.first() {
            None => Ok(()),
            Some((field, reason)) => Err(Error::InvalidParameter {
                field: field.clone(),
                reason: reason.clone(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_validate() {
        assert!(HyperParams::default().validate().is_empty());
        assert!(ArrayGeometry::default().validate().is_empty());
        assert!((HyperParams::default().u_de - 4.14).abs() < 1e-12);
        assert_eq!(ArrayGeometry::default().n_eff(), 414.0);
    }

    #[test]
    fn wrap_edges() {
        assert_eq!(wrap_angle(PI), -PI);
        assert_eq!(wrap_angle(-PI), -PI);
        assert!((angle_diff(-PI + 0.01, PI - 0.01) - 0.02).abs() < 1e-12);
        assert_eq!(angle_diff(0.0, PI), PI);
    }

    #[test]
    fn out_of_range_probability_is_reported() {
        let p = HyperParams {
            p_s: 1.5,
            ..Default::default()
        };
        let errs = p.validate();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].0, "hyper.p_s");
    }

    proptest! {
        #[test]
        fn wrap_angle_range(x in -1e4f64..1e4) {
            let w = wrap_angle(x);
            prop_assert!((-PI..PI).contains(&w));
            let k = ((x - w) / (2.0 * PI)).round();
            prop_assert!((x - w - 2.0 * PI * k).abs() < 1e-9);
        }

        #[test]
        fn angle_diff_range(a in -10f64..10.0, b in -10f64..10.0) {
            let r = angle_diff(a, b);
            prop_assert!(r > -PI && r <= PI);
        }
    }
}
