//! Ground-truth scenarios, synthetic measurements, radio snapshots and a
//! successive-cancellation snapshot estimator.

mod estimator;
mod measurements;
mod radio;
mod scenario;

pub use estimator::{snapshot_estimate, EstimatorConfig};
pub use measurements::{sample_truncated_rician, synth_measurements};
pub use radio::{atom, synth_radio, synthesize, RadioComponent, RadioSnapshot};
pub use scenario::{paper_scenario, Scenario, ScenarioVariant, TrackSpec, TrackTruth, SCHEMA_VERSION};
