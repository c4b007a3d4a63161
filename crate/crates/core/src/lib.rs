//! Multipath component detection and tracking with belief-propagation data
//! association, particle beliefs and online false-alarm-rate estimation.

pub mod association;
pub mod belief;
pub mod error;
pub mod eval;
pub mod model;
pub mod pulse;
pub mod special;
pub mod synth;
pub mod tracker;

pub use association::{exhaustive_da_oracle, loopy_da, AssociationMarginals, AssociationWeights};
pub use belief::{BeliefSummary, FarBelief, PmpcBelief};
pub use error::{Error, Result};
pub use model::{
    ArrayGeometry, AugmentedState, FarState, HyperParams, KinematicState, LikelihoodMode,
    Measurement,
};
pub use tracker::{StepEstimate, Tracker, TrackerState};
