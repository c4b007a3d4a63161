//! Probabilistic data association by loopy belief propagation on the
//! bipartite track/measurement graph.

mod evaluate;
mod oracle;

pub use evaluate::{evaluate_weights, FarMoments, LegacyEvaluation, MeasurementEvaluation};
pub use oracle::{exhaustive_da_oracle, ORACLE_MAX};

use crate::error::{Error, Result};

/// Factor weights of the association graph.
///
/// `beta[k][0]` is the missed-detection weight of legacy track `k` and
/// `beta[k][m]` (m >= 1) its weight for measurement `m`. `xi[m][0]` is the
/// new-or-clutter weight of measurement `m`; `xi[m][k]` for `k >= 1` are
/// consistency couplings and carry no evidence (1 unless a caller wants to
/// forbid a pairing).
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationWeights {
    pub beta: Vec<Vec<f64>>,
    pub xi: Vec<Vec<f64>>,
    /// Log of the factor removed from each `beta` row.
    pub beta_log_scale: Vec<f64>,
    /// Log of the factor removed from each measurement column (both
    /// `beta[.][m]` and `xi[m][0]`).
    pub measurement_log_scale: Vec<f64>,
}

impl AssociationWeights {
    /// Weights with unit couplings and no recorded scaling.
    pub fn new(beta: Vec<Vec<f64>>, xi0: Vec<f64>) -> Self {
        let k = beta.len();
        let m = xi0.len();
        let xi = xi0
            .into_iter()
            .map(|x| {
                let mut row = vec![1.0; k + 1];
                row[0] = x;
                row
            })
            .collect();
        Self {
            beta,
            xi,
            beta_log_scale: vec![0.0; k],
            measurement_log_scale: vec![0.0; m],
        }
    }

    pub fn num_legacy(&self) -> usize {
        self.beta.len()
    }

    pub fn num_measurements(&self) -> usize {
        self.xi.len()
    }

    pub fn validate(&self) -> Result<()> {
        let (k, m) = (self.num_legacy(), self.num_measurements());
        let bad = |field: &str, reason: &str| {
            Err(Error::InvalidParameter {
                field: field.into(),
                reason: reason.into(),
            })
        };
        if self.beta.iter().any(|r| r.len() != m + 1) {
            return bad("beta", "rows must have M + 1 entries");
        }
        if self.xi.iter().any(|r| r.len() != k + 1) {
            return bad("xi", "rows must have K + 1 entries");
        }
        let ok = |v: &f64| v.is_finite() && *v >= 0.0;
        if !self.beta.iter().flatten().all(ok) || !self.xi.iter().flatten().all(ok) {
            return bad("weights", "entries must be finite and nonnegative");
        }
        Ok(())
    }
}

/// Approximate association marginals and the converged messages.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMarginals {
    /// `p_a[k][m]`, K x (M + 1).
    pub p_a: Vec<Vec<f64>>,
    /// `p_b[m][k]`, M x (K + 1).
    pub p_b: Vec<Vec<f64>>,
    /// Measurement-to-track messages `nu[k][m-1]`.
    pub nu: Vec<Vec<f64>>,
    /// Track-to-measurement messages `zeta[k][m-1]`.
    pub zeta: Vec<Vec<f64>>,
    pub iterations_used: usize,
    pub converged: bool,
    /// Legacy rows whose weights were all zero (marginal set uniform).
    pub degenerate_legacy: Vec<usize>,
    /// Measurement rows whose weights were all zero (marginal set uniform).
    pub degenerate_measurements: Vec<usize>,
}

impl AssociationMarginals {
    pub(crate) fn uniform_rows(&mut self) {
        for &k in &self.degenerate_legacy {
            let n = self.p_a[k].len() as f64;
            self.p_a[k].iter_mut().for_each(|v| *v = 1.0 / n);
        }
        for &m in &self.degenerate_measurements {
            let n = self.p_b[m].len() as f64;
            self.p_b[m].iter_mut().for_each(|v| *v = 1.0 / n);
        }
    }
}

fn normalize_row(row: &mut [f64]) -> bool {
    let s: f64 = row.iter().sum();
    if s > 0.0 && s.is_finite() {
        row.iter_mut().for_each(|v| *v /= s);
        true
    } else {
        false
    }
}

/// Loopy sum-product iteration for the association marginals.
///
/// Messages are updated synchronously: `zeta` from the previous `nu`, then
/// `nu` from the new `zeta`. Iteration stops once the largest change of any
/// `nu` falls below `tol`, or after `max_iter` sweeps.
pub fn loopy_da(w: &AssociationWeights, max_iter: usize, tol: f64) -> AssociationMarginals {
    let k_n = w.num_legacy();
    let m_n = w.num_measurements();

    let degenerate_legacy: Vec<usize> =
        (0..k_n).filter(|&k| w.beta[k].iter().all(|&v| v == 0.0)).collect();
    let degenerate_measurements: Vec<usize> =
        (0..m_n).filter(|&m| w.xi[m].iter().all(|&v| v == 0.0)).collect();

    let mut nu = vec![vec![1.0; m_n]; k_n];
    let mut zeta = vec![vec![0.0; m_n]; k_n];
    let mut iterations_used = 0;
    let mut converged = k_n == 0 || m_n == 0;

    let mut sums = vec![0.0; m_n.max(k_n)];
    while !converged && iterations_used < max_iter {
        iterations_used += 1;
        // zeta[k][m] = beta_k(m) / (beta_k(0) + sum_{m' != m} beta_k(m') nu[k][m'])
        for k in 0..k_n {
            let b = &w.beta[k];
            for m in 0..m_n {
                let mut s = b[0];
                for mp in 0..m_n {
                    if mp != m {
                        s += b[mp + 1] * nu[k][mp];
                    }
                }
                sums[m] = s;
            }
            for m in 0..m_n {
                zeta[k][m] = ratio(b[m + 1], sums[m]);
            }
        }
        // nu[k][m] = xi_m(k) / (xi_m(0) + sum_{k' != k} xi_m(k') zeta[k'][m])
        let mut delta: f64 = 0.0;
        for m in 0..m_n {
            let x = &w.xi[m];
            for k in 0..k_n {
                let mut s = x[0];
                for kp in 0..k_n {
                    if kp != k {
                        s += x[kp + 1] * zeta[kp][m];
                    }
                }
                sums[k] = s;
            }
            for k in 0..k_n {
                let new = ratio(x[k + 1], sums[k]);
                delta = delta.max((new - nu[k][m]).abs());
                nu[k][m] = new;
            }
        }
        converged = delta < tol;
    }
    if k_n > 0 && m_n > 0 && iterations_used == 0 {
        converged = false;
    }

    let p_a = (0..k_n)
        .map(|k| {
            let mut row = Vec::with_capacity(m_n + 1);
            row.push(w.beta[k][0]);
            row.extend((0..m_n).map(|m| w.beta[k][m + 1] * nu[k][m]));
            normalize_row(&mut row);
            row
        })
        .collect();
    let p_b = (0..m_n)
        .map(|m| {
            let mut row = Vec::with_capacity(k_n + 1);
            row.push(w.xi[m][0]);
            row.extend((0..k_n).map(|k| w.xi[m][k + 1] * zeta[k][m]));
            normalize_row(&mut row);
            row
        })
        .collect();

    let mut out = AssociationMarginals {
        p_a,
        p_b,
        nu,
        zeta,
        iterations_used,
        converged,
        degenerate_legacy,
        degenerate_measurements,
    };
    out.uniform_rows();
    out
}

#[inline]
fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den > 0.0 {
        num / den
    } else {
        f64::MAX
    }
}
