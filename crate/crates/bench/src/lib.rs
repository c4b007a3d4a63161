//! Fixtures shared by the benchmarks.

use mpctrack_core::synth::{paper_scenario, synth_measurements, ScenarioVariant};
use mpctrack_core::{ArrayGeometry, AssociationWeights, HyperParams, Measurement, Tracker};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random association weights with `k` tracks and `m` measurements.
pub fn random_weights(k: usize, m: usize, seed: u64) -> AssociationWeights {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || 10f64.powf(rng.random_range(-2.0..2.0));
    let beta = (0..k).map(|_| (0..=m).map(|_| draw()).collect()).collect();
    let xi0 = (0..m).map(|_| draw()).collect();
    AssociationWeights::new(beta, xi0)
}

/// A desk-scenario tracker after `warmup` steps and the next measurement set.
pub fn warm_tracker(j: usize, warmup: usize) -> (Tracker, Vec<Measurement>) {
    let scn = paper_scenario(ScenarioVariant::Desk);
    let params = HyperParams {
        j,
        u_de: scn.u_de,
        ..Default::default()
    };
    let geom = ArrayGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut tracker = Tracker::new(params.clone(), geom.clone(), 2).expect("valid parameters");
    for n in 0..warmup {
        let z = synth_measurements(&scn, n, &params, &geom, &mut rng).expect("step in range");
        tracker.step(&z).expect("tracker step");
    }
    let next = synth_measurements(&scn, warmup, &params, &geom, &mut rng).expect("step in range");
    (tracker, next)
}
