use crate::error::{Error, Result};
use crate::model::{u_de_from_input_db, wrap_angle, KinematicState};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Current scenario file schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Ground truth of one MPC over its lifetime (inclusive step bounds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackTruth {
    pub id: usize,
    pub birth_step: usize,
    pub death_step: usize,
    pub states: Vec<KinematicState>,
}

impl TrackTruth {
    pub fn alive(&self, step: usize) -> bool {
        (self.birth_step..=self.death_step).contains(&step)
    }

    pub fn at(&self, step: usize) -> Option<&KinematicState> {
        if self.alive(step) {
            self.states.get(step - self.birth_step)
        } else {
            None
        }
    }
}

/// Straight-line track: `d(n) = d0 + v_d n`, `phi(n) = phi0 + v_phi n` in
/// absolute steps, amplitude from free-space loss with 3 dB per reflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSpec {
    pub birth: usize,
    pub death: usize,
    pub d0: f64,
    pub v_d: f64,
    pub phi0_deg: f64,
    pub v_phi_deg: f64,
    pub reflections: u32,
}

impl TrackSpec {
    fn materialize(&self, id: usize, u_1m: f64, delta_t: f64) -> TrackTruth {
        let states = (self.birth..=self.death)
            .map(|n| {
                let t = n as f64;
                let d = self.d0 + self.v_d * t;
                let u = u_1m * 10f64.powf(-3.0 * self.reflections as f64 / 20.0) / d;
                KinematicState {
                    d,
                    phi: wrap_angle((self.phi0_deg + self.v_phi_deg * t).to_radians()),
                    u,
                    v_d: self.v_d / delta_t,
                    v_phi: self.v_phi_deg.to_radians() / delta_t,
                }
            })
            .collect();
        TrackTruth {
            id,
            birth_step: self.birth,
            death_step: self.death,
            states,
        }
    }
}

/// Ground-truth scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub steps: usize,
    pub tracks: Vec<TrackTruth>,
    pub far_profile: Vec<f64>,
    pub u_de: f64,
    pub seed: u64,
}

/// Bundled scenario variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioVariant {
    /// 364 steps, 7 tracks, FAR ramp 1.5 -> 3.
    Standard,
    /// As `Standard` with a step-changing FAR.
    FastFar,
    /// 100 steps, 3 well separated tracks, FAR ramp 1.5 -> 3.
    Desk,
    /// As `Desk` with a step-changing FAR.
    DeskFastFar,
    /// 50 steps, 2 tracks, threshold for the radio pipeline.
    RadioDesk,
}

impl ScenarioVariant {
    pub const ALL: [ScenarioVariant; 5] = [
        Self::Standard,
        Self::FastFar,
        Self::Desk,
        Self::DeskFastFar,
        Self::RadioDesk,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::FastFar => "fast_far",
            Self::Desk => "desk",
            Self::DeskFastFar => "desk_fast_far",
            Self::RadioDesk => "radio_desk",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }
}

/// Number of array samples, the `N_s H` of the default geometry.
const DEFAULT_N_EFF: f64 = 414.0;

fn ramp(steps: usize, from: f64, to: f64) -> Vec<f64> {
    (0..steps)
        .map(|n| from + (to - from) * n as f64 / (steps - 1) as f64)
        .collect()
}

fn piecewise(steps: usize, levels: &[(usize, f64)]) -> Vec<f64> {
    (0..steps)
        .map(|n| {
            levels
                .iter()
                .rev()
                .find(|(start, _)| n >= *start)
                .map_or(levels[0].1, |l| l.1)
        })
        .collect()
}

/// Build a bundled scenario.
pub fn paper_scenario(variant: ScenarioVariant) -> Scenario {
    let seven = [
        // crossing in distance at n = 83
        TrackSpec { birth: 0, death: 363, d0: 4.0, v_d: 0.01, phi0_deg: 40.0, v_phi_deg: 0.05, reflections: 1 },
        TrackSpec { birth: 20, death: 300, d0: 5.66, v_d: -0.01, phi0_deg: -60.0, v_phi_deg: -0.04, reflections: 1 },
        // crossing in AoA at n = 125
        TrackSpec { birth: 50, death: 363, d0: 8.0, v_d: 0.005, phi0_deg: -15.0, v_phi_deg: 0.12, reflections: 2 },
        TrackSpec { birth: 0, death: 250, d0: 11.0, v_d: -0.004, phi0_deg: 35.0, v_phi_deg: -0.28, reflections: 2 },
        TrackSpec { birth: 100, death: 363, d0: 13.0, v_d: 0.002, phi0_deg: 150.0, v_phi_deg: 0.02, reflections: 1 },
        TrackSpec { birth: 0, death: 180, d0: 2.5, v_d: 0.003, phi0_deg: -120.0, v_phi_deg: 0.03, reflections: 0 },
        TrackSpec { birth: 200, death: 363, d0: 5.0, v_d: 0.004, phi0_deg: 100.0, v_phi_deg: -0.05, reflections: 3 },
    ];
    let desk = [
        TrackSpec { birth: 0, death: 99, d0: 3.0, v_d: 0.005, phi0_deg: 20.0, v_phi_deg: 0.05, reflections: 0 },
        TrackSpec { birth: 0, death: 99, d0: 6.0, v_d: -0.005, phi0_deg: 130.0, v_phi_deg: -0.05, reflections: 1 },
        TrackSpec { birth: 0, death: 99, d0: 9.0, v_d: 0.003, phi0_deg: -90.0, v_phi_deg: 0.03, reflections: 2 },
    ];
    let radio = [
        TrackSpec { birth: 0, death: 49, d0: 3.0, v_d: 0.005, phi0_deg: 20.0, v_phi_deg: 0.05, reflections: 0 },
        TrackSpec { birth: 0, death: 49, d0: 7.0, v_d: -0.005, phi0_deg: -100.0, v_phi_deg: -0.05, reflections: 1 },
    ];
    let snr_1m_db = 18.4;
    let u_1m = u_de_from_input_db(snr_1m_db, DEFAULT_N_EFF).sqrt();
    let (specs, steps, far, u_de_db): (&[TrackSpec], usize, Vec<f64>, f64) = match variant {
        ScenarioVariant::Standard => (&seven, 364, ramp(364, 1.5, 3.0), -20.0),
        ScenarioVariant::FastFar => (
            &seven,
            364,
            piecewise(364, &[(0, 1.5), (91, 3.0), (182, 1.0), (273, 2.5)]),
            -20.0,
        ),
        ScenarioVariant::Desk => (&desk, 100, ramp(100, 1.5, 3.0), -20.0),
        ScenarioVariant::DeskFastFar => (
            &desk,
            100,
            piecewise(100, &[(0, 1.5), (25, 3.0), (50, 1.0), (75, 2.5)]),
            -20.0,
        ),
        ScenarioVariant::RadioDesk => (&radio, 50, vec![0.0; 50], -14.4),
    };
    Scenario {
        schema_version: SCHEMA_VERSION,
        name: variant.name().to_string(),
        steps,
        tracks: specs
            .iter()
            .enumerate()
            .map(|(i, s)| s.materialize(i, u_1m, 1.0))
            .collect(),
        far_profile: far,
        u_de: u_de_from_input_db(u_de_db, DEFAULT_N_EFF),
        seed: 0,
    }
}

impl Scenario {
    /// True states alive at `step`.
    pub fn truth_at(&self, step: usize) -> Vec<KinematicState> {
        self.tracks.iter().filter_map(|t| t.at(step).copied()).collect()
    }

    pub fn nom(&self, step: usize) -> usize {
        self.tracks.iter().filter(|t| t.alive(step)).count()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Scenario(m));
        if self.schema_version != SCHEMA_VERSION {
            return fail(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.steps == 0 {
            return fail("steps must be >= 1".into());
        }
        if self.far_profile.len() != self.steps {
            return fail(format!(
                "far_profile has {} entries for {} steps",
                self.far_profile.len(),
                self.steps
            ));
        }
        if self.far_profile.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return fail("far_profile entries must be finite and nonnegative".into());
        }
        if !(self.u_de >= 0.0) {
            return fail("u_de must be nonnegative".into());
        }
        for t in &self.tracks {
            if t.birth_step > t.death_step || t.death_step >= self.steps {
                return fail(format!("track {}: lifetime outside scenario", t.id));
            }
            if t.states.len() != t.death_step - t.birth_step + 1 {
                return fail(format!("track {}: states do not cover the lifetime", t.id));
            }
            if t.states.iter().any(|s| !(s.u >= 0.0) || !s.d.is_finite()) {
                return fail(format!("track {}: invalid state", t.id));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let scn: Scenario = serde_json::from_str(s)?;
        scn.validate()?;
        Ok(scn)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
