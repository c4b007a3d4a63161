use super::{normalize_row, AssociationMarginals, AssociationWeights};
use crate::error::{Error, Result};

/// Largest K and M accepted by [`exhaustive_da_oracle`].
pub const ORACLE_MAX: usize = 8;

/// Exact association marginals by enumerating every admissible joint
/// assignment.
pub fn exhaustive_da_oracle(w: &AssociationWeights) -> Result<AssociationMarginals> {
    let k_n = w.num_legacy();
    let m_n = w.num_measurements();
    if k_n > ORACLE_MAX || m_n > ORACLE_MAX {
        return Err(Error::InstanceTooLarge {
            legacy: k_n,
            measurements: m_n,
            max: ORACLE_MAX,
        });
    }
    let mut p_a = vec![vec![0.0; m_n + 1]; k_n];
    let mut p_b = vec![vec![0.0; k_n + 1]; m_n];
    let mut assign = vec![0usize; k_n];
    let mut owner = vec![0usize; m_n];
    let mut total = 0.0;
    enumerate(w, 0, &mut assign, &mut owner, &mut p_a, &mut p_b, &mut total);
    if !(total > 0.0) {
        return Err(Error::DegenerateInstance);
    }
    for row in p_a.iter_mut().chain(p_b.iter_mut()) {
        normalize_row(row);
    }
    Ok(AssociationMarginals {
        p_a,
        p_b,
        nu: vec![vec![]; k_n],
        zeta: vec![vec![]; k_n],
        iterations_used: 0,
        converged: true,
        degenerate_legacy: vec![],
        degenerate_measurements: vec![],
    })
}

fn enumerate(
    w: &AssociationWeights,
    k: usize,
    assign: &mut [usize],
    owner: &mut [usize],
    p_a: &mut [Vec<f64>],
    p_b: &mut [Vec<f64>],
    total: &mut f64,
) {
    if k == assign.len() {
        let mut weight = 1.0;
        for (kk, &a) in assign.iter().enumerate() {
            weight *= w.beta[kk][a];
        }
        for (m, &b) in owner.iter().enumerate() {
            weight *= w.xi[m][b];
        }
        if weight == 0.0 {
            return;
        }
        *total += weight;
        for (kk, &a) in assign.iter().enumerate() {
            p_a[kk][a] += weight;
        }
        for (m, &b) in owner.iter().enumerate() {
            p_b[m][b] += weight;
        }
        return;
    }
    assign[k] = 0;
    enumerate(w, k + 1, assign, owner, p_a, p_b, total);
    for m in 0..owner.len() {
        if owner[m] == 0 {
            owner[m] = k + 1;
            assign[k] = m + 1;
            enumerate(w, k + 1, assign, owner, p_a, p_b, total);
            owner[m] = 0;
        }
    }
    assign[k] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_term_enumeration() {
        let w = AssociationWeights::new(vec![vec![1.0, 2.0]], vec![1.0]);
        let p = exhaustive_da_oracle(&w).unwrap();
        assert!((p.p_a[0][1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_tracks_share_mass() {
        let w = AssociationWeights::new(vec![vec![1.0, 3.0], vec![1.0, 3.0]], vec![0.5]);
        let p = exhaustive_da_oracle(&w).unwrap();
        assert_eq!(p.p_a[0][1], p.p_a[1][1]);
        // configurations: none (0.5), track 1 (3), track 2 (3)
        assert!((p.p_a[0][1] - 3.0 / 6.5).abs() < 1e-15);
    }

    #[test]
    fn no_tracks_means_all_new_or_clutter() {
        let w = AssociationWeights::new(vec![], vec![0.4, 7.0]);
        let p = exhaustive_da_oracle(&w).unwrap();
        assert_eq!(p.p_b, vec![vec![1.0], vec![1.0]]);
    }

    #[test]
    fn too_large() {
        let w = AssociationWeights::new(vec![vec![1.0; 10]; 9], vec![1.0; 9]);
        assert!(matches!(exhaustive_da_oracle(&w), Err(Error::InstanceTooLarge { .. })));
    }
}
