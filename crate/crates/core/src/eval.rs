//! OSPA metrics and aggregation of per-step errors.

use crate::error::{Error, Result};
use crate::model::angle_diff;
use serde::{Deserialize, Serialize};

/// Order and cutoffs of the per-dimension OSPA metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OspaConfig {
    pub order: f64,
    pub cutoff_d: f64,
    pub cutoff_phi_deg: f64,
    pub cutoff_snr_db: f64,
}

impl Default for OspaConfig {
    fn default() -> Self {
        Self {
            order: 2.0,
            cutoff_d: 0.1,
            cutoff_phi_deg: 10.0,
            cutoff_snr_db: 6.0,
        }
    }
}

impl OspaConfig {
    pub fn validate(&self) -> Vec<(String, String)> {
        let mut errs = Vec::new();
        if !(self.order >= 1.0 && self.order.is_finite()) {
            errs.push(("ospa.order".into(), "must be >= 1".into()));
        }
        for (name, v) in [
            ("ospa.cutoff_d", self.cutoff_d),
            ("ospa.cutoff_phi_deg", self.cutoff_phi_deg),
            ("ospa.cutoff_snr_db", self.cutoff_snr_db),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push((name.into(), "must be positive".into()));
            }
        }
        errs
    }
}

/// Minimum-cost perfect matching of the rows of a square or wide cost matrix
/// (`rows <= cols`) onto distinct columns. Returns the column of each row.
pub fn assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return vec![];
    }
    let m = cost[0].len();
    assert!(n <= m, "assignment needs rows <= cols");
    // shortest augmenting path (Jonker-Volgenant style potentials), 1-based
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

/// OSPA distance between two scalar sets under `dist`.
pub fn ospa_with<F: Fn(f64, f64) -> f64>(truth: &[f64], est: &[f64], order: f64, cutoff: f64, dist: F) -> f64 {
    let (small, large) = if truth.len() <= est.len() {
        (truth, est)
    } else {
        (est, truth)
    };
    let n_max = large.len();
    if n_max == 0 {
        return 0.0;
    }
    let cost: Vec<Vec<f64>> = small
        .iter()
        .map(|&a| large.iter().map(|&b| dist(a, b).min(cutoff).powf(order)).collect())
        .collect();
    let assign = assignment(&cost);
    let matched: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    let card = cutoff.powf(order) * (n_max - small.len()) as f64;
    ((matched + card) / n_max as f64).powf(1.0 / order)
}

/// OSPA on the real line.
pub fn ospa(truth: &[f64], est: &[f64], order: f64, cutoff: f64) -> f64 {
    ospa_with(truth, est, order, cutoff, |a, b| (a - b).abs())
}

/// OSPA on angles in radians, using wrapped differences.
pub fn ospa_angle(truth: &[f64], est: &[f64], order: f64, cutoff: f64) -> f64 {
    ospa_with(truth, est, order, cutoff, |a, b| angle_diff(a, b).abs())
}

/// Cardinality component of OSPA.
pub fn cardinality_error(truth_count: usize, est_count: usize, order: f64, cutoff: f64) -> f64 {
    let n = truth_count.max(est_count);
    if n == 0 {
        return 0.0;
    }
    let diff = truth_count.abs_diff(est_count) as f64;
    (cutoff.powf(order) * diff / n as f64).powf(1.0 / order)
}

/// Per-step evaluation record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub ospa_d_m: f64,
    pub ospa_phi_deg: f64,
    pub ospa_snr_db: f64,
    pub nom_true: f64,
    pub nom_hat: f64,
    pub mu_fa_true: f64,
    pub mu_fa_hat: f64,
}

/// Parameter set of one MPC used for scoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredComponent {
    pub d: f64,
    pub phi: f64,
    pub u: f64,
}

/// Component SNR `u^2` in dB.
pub fn snr_db(u: f64) -> f64 {
    20.0 * u.max(1e-12).log10()
}

/// Score one step.
pub fn score_step(
    step: usize,
    truth: &[ScoredComponent],
    est: &[ScoredComponent],
    mu_fa_true: f64,
    mu_fa_hat: f64,
    cfg: &OspaConfig,
) -> StepRecord {
    let td: Vec<f64> = truth.iter().map(|c| c.d).collect();
    let ed: Vec<f64> = est.iter().map(|c| c.d).collect();
    let tp: Vec<f64> = truth.iter().map(|c| c.phi).collect();
    let ep: Vec<f64> = est.iter().map(|c| c.phi).collect();
    let ts: Vec<f64> = truth.iter().map(|c| snr_db(c.u)).collect();
    let es: Vec<f64> = est.iter().map(|c| snr_db(c.u)).collect();
    StepRecord {
        step,
        ospa_d_m: ospa(&td, &ed, cfg.order, cfg.cutoff_d),
        ospa_phi_deg: ospa_angle(&tp, &ep, cfg.order, cfg.cutoff_phi_deg.to_radians()).to_degrees(),
        ospa_snr_db: ospa(&ts, &es, cfg.order, cfg.cutoff_snr_db),
        nom_true: truth.len() as f64,
        nom_hat: est.len() as f64,
        mu_fa_true,
        mu_fa_hat,
    }
}

/// All step records of one Monte-Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<StepRecord>,
}

/// Cross-run means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Per-step means across runs.
    pub per_step: Vec<StepRecord>,
    /// Means over all steps and runs.
    pub overall: StepRecord,
}

fn mean_records(records: &[&StepRecord], step: usize) -> StepRecord {
    let n = records.len() as f64;
    let avg = |f: fn(&StepRecord) -> f64| records.iter().map(|r| f(r)).sum::<f64>() / n;
    StepRecord {
        step,
        ospa_d_m: avg(|r| r.ospa_d_m),
        ospa_phi_deg: avg(|r| r.ospa_phi_deg),
        ospa_snr_db: avg(|r| r.ospa_snr_db),
        nom_true: avg(|r| r.nom_true),
        nom_hat: avg(|r| r.nom_hat),
        mu_fa_true: avg(|r| r.mu_fa_true),
        mu_fa_hat: avg(|r| r.mu_fa_hat),
    }
}

/// Average logs step by step and overall.
pub fn aggregate(logs: &[RunLog]) -> Result<Summary> {
    let first = logs
        .first()
        .ok_or_else(|| Error::Aggregate("no run logs".into()))?;
    let steps = first.records.len();
    if let Some(bad) = logs.iter().position(|l| l.records.len() != steps) {
        return Err(Error::Aggregate(format!(
            "run {bad} has {} steps, expected {steps}",
            logs[bad].records.len()
        )));
    }
    let per_step: Vec<StepRecord> = (0..steps)
        .map(|i| {
            let rs: Vec<&StepRecord> = logs.iter().map(|l| &l.records[i]).collect();
            mean_records(&rs, first.records[i].step)
        })
        .collect();
    let all: Vec<&StepRecord> = logs.iter().flat_map(|l| l.records.iter()).collect();
    let overall = if all.is_empty() {
        mean_records(&[&StepRecord::zero()], 0)
    } else {
        mean_records(&all, 0)
    };
    Ok(Summary { per_step, overall })
}

impl StepRecord {
    fn zero() -> Self {
        Self {
            step: 0,
            ospa_d_m: 0.0,
            ospa_phi_deg: 0.0,
            ospa_snr_db: 0.0,
            nom_true: 0.0,
            nom_hat: 0.0,
            mu_fa_true: 0.0,
            mu_fa_hat: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_min(cost: &[Vec<f64>]) -> f64 {
        fn go(cost: &[Vec<f64>], perm: &mut Vec<usize>, used: &mut Vec<bool>, best: &mut f64) {
            if perm.len() == cost.len() {
                let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
                *best = best.min(total);
                return;
            }
            for j in 0..used.len() {
                if !used[j] {
                    used[j] = true;
                    perm.push(j);
                    go(cost, perm, used, best);
                    perm.pop();
                    used[j] = false;
                }
            }
        }
        let m = cost.first().map_or(0, |r| r.len());
        let mut best = f64::INFINITY;
        go(cost, &mut Vec::new(), &mut vec![false; m], &mut best);
        best
    }

    #[test]
    fn ospa_reference_values() {
        assert_eq!(ospa(&[1.0, 2.0], &[2.0, 1.0], 2.0, 0.1), 0.0);
        assert_eq!(ospa(&[], &[], 2.0, 0.1), 0.0);
        assert!((ospa(&[3.0], &[], 2.0, 0.1) - 0.1).abs() < 1e-15);
        assert!((ospa(&[1.0], &[1.05], 2.0, 0.1) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn cardinality_reference_values() {
        assert_eq!(cardinality_error(3, 3, 2.0, 0.3), 0.0);
        assert!((cardinality_error(4, 2, 2.0, 0.3) - 0.212_132).abs() < 1e-6);
        assert!((cardinality_error(0, 3, 2.0, 0.3) - 0.3).abs() < 1e-15);
        assert_eq!(cardinality_error(0, 0, 2.0, 0.3), 0.0);
    }

    #[test]
    fn aggregate_means_and_mismatch() {
        let rec = |v: f64| StepRecord { ospa_d_m: v, ..StepRecord::zero() };
        let a = RunLog { records: vec![rec(1.0), rec(3.0)] };
        let b = RunLog { records: vec![rec(3.0), rec(5.0)] };
        let s = aggregate(std::slice::from_ref(&a)).unwrap();
        assert_eq!(s.per_step, a.records);
        let s = aggregate(&[a.clone(), b]).unwrap();
        assert_eq!(s.per_step[0].ospa_d_m, 2.0);
        assert_eq!(s.per_step[1].ospa_d_m, 4.0);
        assert_eq!(s.overall.ospa_d_m, 3.0);
        let c = RunLog { records: vec![rec(1.0)] };
        assert!(aggregate(&[a, c]).is_err());
    }

    proptest! {
        #[test]
        fn assignment_is_optimal(n in 1usize..7, extra in 0usize..2, vals in proptest::collection::vec(0.0f64..10.0, 64)) {
            let m = (n + extra).min(6);
            let cost: Vec<Vec<f64>> = (0..n).map(|i| (0..m).map(|j| vals[(i * 8 + j) % 64]).collect()).collect();
            let a = assignment(&cost);
            let mut seen = a.clone();
            seen.sort();
            seen.dedup();
            prop_assert_eq!(seen.len(), n);
            let got: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            prop_assert_eq!(got, brute_min(&cost));
        }

        #[test]
        fn ospa_axioms(
            x in proptest::collection::vec(-1.0f64..1.0, 0..6),
            y in proptest::collection::vec(-1.0f64..1.0, 0..6),
            z in proptest::collection::vec(-1.0f64..1.0, 0..6),
        ) {
            let (p, c) = (2.0, 0.3);
            let dxy = ospa(&x, &y, p, c);
            prop_assert!((dxy - ospa(&y, &x, p, c)).abs() < 1e-9);
            prop_assert!(dxy <= c + 1e-12);
            prop_assert!(ospa(&x, &x, p, c) < 1e-9);
            prop_assert!(dxy <= ospa(&x, &z, p, c) + ospa(&z, &y, p, c) + 1e-9);
        }
    }
}
