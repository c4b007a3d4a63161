use crate::error::{Error, Result};
use num_complex::Complex64;

/// Amplitude scale parameter `1/2 + u^2 / (4 n_eff)`.
pub fn amp_scale_sq(u: f64, n_eff: f64) -> f64 {
    0.5 + u * u / (4.0 * n_eff)
}

/// Same quantity as [`amp_scale_sq`], evaluated as `t^T J^-1 t` from the
/// Fisher information of `(Re alpha, Im alpha, sigma^2)` and the Jacobian of
/// `u = |alpha| ||s|| / sigma`.
pub fn crlb_amp_scale_numeric(
    alpha: Complex64,
    s_norm_sq: f64,
    sigma_sq: f64,
    n_eff: f64,
) -> Result<f64> {
    if !(sigma_sq > 0.0) || !(s_norm_sq > 0.0) || !(n_eff > 0.0) {
        return Err(Error::SingularFim);
    }
    let fim = [
        [2.0 * s_norm_sq / sigma_sq, 0.0, 0.0],
        [0.0, 2.0 * s_norm_sq / sigma_sq, 0.0],
        [0.0, 0.0, n_eff / (sigma_sq * sigma_sq)],
    ];
    let s_norm = s_norm_sq.sqrt();
    let sigma = sigma_sq.sqrt();
    let mag = alpha.norm();
    // d|alpha|/d(Re, Im) is a unit vector; any direction works at alpha = 0
    let (cr, ci) = if mag > 0.0 {
        (alpha.re / mag, alpha.im / mag)
    } else {
        (1.0, 0.0)
    };
    let t = [
        cr * s_norm / sigma,
        ci * s_norm / sigma,
        -0.5 * mag * s_norm / (sigma_sq * sigma),
    ];
    let y = solve3(fim, t)?;
    Ok(t.iter().zip(&y).map(|(a, b)| a * b).sum())
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Result<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if !(a[piv][col].abs() > 0.0) || !a[piv][col].is_finite() {
            return Err(Error::SingularFim);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}
