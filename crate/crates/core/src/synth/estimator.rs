use super::radio::{atom, RadioSnapshot, PULSE_SPAN};
use crate::belief::BeliefSummary;
use crate::model::{wrap_angle, ArrayGeometry, Measurement};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Search settings of the snapshot estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Delay grid spacing as a fraction of `T_s`.
    pub delay_step_frac: f64,
    pub angle_step_deg: f64,
    pub newton_steps: usize,
    pub max_components: usize,
    pub d_max: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            delay_step_frac: 0.25,
            angle_step_deg: 2.0,
            newton_steps: 2,
            max_components: 20,
            d_max: 17.0,
        }
    }
}

struct Component {
    d: f64,
    phi: f64,
    s: Vec<Complex64>,
    s_norm_sq: f64,
}

impl Component {
    fn new(d: f64, phi: f64, geom: &ArrayGeometry) -> Self {
        let s = atom(d, phi, geom);
        let s_norm_sq = s.iter().map(|v| v.norm_sqr()).sum();
        Self { d, phi, s, s_norm_sq }
    }

    fn inner(&self, r: &[Complex64]) -> Complex64 {
        self.s.iter().zip(r).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Matched-filter output power `|s^H r|^2 / ||s||^2`.
fn score(d: f64, phi: f64, r: &[Complex64], geom: &ArrayGeometry) -> f64 {
    let c = Component::new(d, phi, geom);
    if c.s_norm_sq <= 0.0 {
        return 0.0;
    }
    c.inner(r).norm_sqr() / c.s_norm_sq
}

/// Coarse delay-angle search: per-element pulse correlation on the delay
/// grid followed by beamforming on the angle grid.
fn coarse_search(r: &[Complex64], geom: &ArrayGeometry, cfg: &EstimatorConfig) -> (f64, f64, f64) {
    let pulse = geom.pulse();
    let span = PULSE_SPAN * geom.t_p;
    let n_s = geom.n_s;
    let dt = cfg.delay_step_frac * geom.t_s;
    let n_tau = ((n_s as f64 * geom.t_s) / dt).ceil() as usize;
    let n_phi = (360.0 / cfg.angle_step_deg).round() as usize;
    let steer: Vec<Vec<Complex64>> = (0..n_phi)
        .map(|a| {
            let phi = (-180.0 + a as f64 * cfg.angle_step_deg).to_radians();
            geom.element_offsets
                .iter()
                .map(|e| {
                    let g = e.radius * (phi - geom.psi - e.angle).cos() / geom.c;
                    Complex64::from_polar(1.0, -2.0 * PI * geom.f_c * g)
                })
                .collect()
        })
        .collect();
    let h = geom.num_elements();
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    let mut p = vec![0.0; n_s];
    let mut corr = vec![Complex64::new(0.0, 0.0); h];
    for k in 0..=n_tau {
        let tau = k as f64 * dt;
        let mut energy = 0.0;
        for (i, pi) in p.iter_mut().enumerate() {
            let t = i as f64 * geom.t_s - tau;
            *pi = if t.abs() <= span { pulse.value(t) } else { 0.0 };
            energy += *pi * *pi;
        }
        if energy <= 0.0 {
            continue;
        }
        for (hh, c) in corr.iter_mut().enumerate() {
            let row = &r[hh * n_s..(hh + 1) * n_s];
            *c = row.iter().zip(&p).map(|(v, w)| v * w).sum();
        }
        for (a, w) in steer.iter().enumerate() {
            let v: Complex64 = w.iter().zip(&corr).map(|(x, y)| x * y).sum();
            let sc = v.norm_sqr() / (energy * h as f64);
            if sc > best.2 {
                best = (
                    tau * geom.c,
                    (-180.0 + a as f64 * cfg.angle_step_deg).to_radians(),
                    sc,
                );
            }
        }
    }
    best
}

/// Newton ascent of the matched-filter power with numeric derivatives.
fn refine(d: f64, phi: f64, r: &[Complex64], geom: &ArrayGeometry, steps: usize) -> (f64, f64, f64) {
    let hd = geom.c * geom.t_s / 50.0;
    let hp = 0.2f64.to_radians();
    let mut x = (d, phi);
    let mut fx = score(x.0, x.1, r, geom);
    for _ in 0..steps {
        let f = |a: f64, b: f64| score(x.0 + a * hd, x.1 + b * hp, r, geom);
        let (fpp, fmm) = (f(1.0, 0.0), f(-1.0, 0.0));
        let (gpp, gmm) = (f(0.0, 1.0), f(0.0, -1.0));
        let g = [(fpp - fmm) / 2.0, (gpp - gmm) / 2.0];
        let h11 = fpp - 2.0 * fx + fmm;
        let h22 = gpp - 2.0 * fx + gmm;
        let h12 = (f(1.0, 1.0) - f(1.0, -1.0) - f(-1.0, 1.0) + f(-1.0, -1.0)) / 4.0;
        let det = h11 * h22 - h12 * h12;
        let mut step = if h11 < 0.0 && det > 0.0 {
            [-(h22 * g[0] - h12 * g[1]) / det, -(h11 * g[1] - h12 * g[0]) / det]
        } else {
            // not locally concave: move one probe width uphill
            let n = g[0].hypot(g[1]);
            if n == 0.0 {
                break;
            }
            [g[0] / n, g[1] / n]
        };
        let mut improved = false;
        for _ in 0..8 {
            let cand = (x.0 + step[0] * hd, wrap_angle(x.1 + step[1] * hp));
            let fc = score(cand.0, cand.1, r, geom);
            if fc > fx {
                x = cand;
                fx = fc;
                improved = true;
                break;
            }
            step = [step[0] / 2.0, step[1] / 2.0];
        }
        if !improved {
            break;
        }
    }
    (x.0, x.1, fx)
}

/// Least-squares amplitudes of all components for `y`.
fn joint_amplitudes(comps: &[Component], y: &[Complex64]) -> Option<Vec<Complex64>> {
    let l = comps.len();
    let mut a = vec![vec![Complex64::new(0.0, 0.0); l + 1]; l];
    for i in 0..l {
        for j in 0..l {
            a[i][j] = comps[i].s.iter().zip(&comps[j].s).map(|(p, q)| p.conj() * q).sum();
        }
        a[i][l] = comps[i].inner(y);
    }
    for col in 0..l {
        let piv = (col..l).max_by(|&p, &q| a[p][col].norm().total_cmp(&a[q][col].norm()))?;
        if a[piv][col].norm() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for row in col + 1..l {
            let f = a[row][col] / a[col][col];
            for k in col..=l {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); l];
    for row in (0..l).rev() {
        let s: Complex64 = (row + 1..l).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][l] - s) / a[row][row];
    }
    Some(x)
}

fn residual(comps: &[Component], alpha: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    let mut r = y.to_vec();
    for (c, a) in comps.iter().zip(alpha) {
        for (v, s) in r.iter_mut().zip(&c.s) {
            *v -= a * s;
        }
    }
    r
}

/// Successive-cancellation estimator producing `(z_d, z_phi, z_u)` triples.
///
/// Each pass refines the strongest matched-filter response (feedback means
/// are tried first as starting points), subtracts it, and continues while the
/// normalized amplitude stays above `sqrt(u_de)`. A final joint
/// least-squares refit re-estimates amplitudes and noise variance and drops
/// components that fall below the threshold.
pub fn snapshot_estimate(
    snap: &RadioSnapshot,
    priors: Option<&[BeliefSummary]>,
    geom: &ArrayGeometry,
    u_de: f64,
    cfg: &EstimatorConfig,
) -> Vec<Measurement> {
    let y = &snap.samples;
    let n = y.len() as f64;
    let thr = u_de.sqrt();
    let mut seeds: Vec<(f64, f64)> = priors
        .unwrap_or(&[])
        .iter()
        .map(|p| (p.d, p.phi))
        .collect();
    let mut comps: Vec<Component> = Vec::new();
    let mut r = y.clone();

    while comps.len() < cfg.max_components {
        let (gd, gp, _) = coarse_search(&r, geom, cfg);
        let mut best = refine(gd, gp, &r, geom, cfg.newton_steps);
        let mut seed_used = None;
        for (i, &(sd, sp)) in seeds.iter().enumerate() {
            let cand = refine(sd, sp, &r, geom, cfg.newton_steps);
            if cand.2 > best.2 {
                best = cand;
                seed_used = Some(i);
            }
        }
        let c = Component::new(best.0, best.1, geom);
        if c.s_norm_sq <= 0.0 {
            break;
        }
        let alpha = c.inner(&r) / c.s_norm_sq;
        let rem: f64 = r
            .iter()
            .zip(&c.s)
            .map(|(v, s)| (v - alpha * s).norm_sqr())
            .sum();
        let dof = n - (comps.len() + 1) as f64;
        if dof <= 0.0 {
            break;
        }
        let sigma = (rem / dof).sqrt();
        let z_u = alpha.norm() * c.s_norm_sq.sqrt() / sigma;
        if !(z_u > thr) {
            break;
        }
        for (v, s) in r.iter_mut().zip(&c.s) {
            *v -= alpha * s;
        }
        if let Some(i) = seed_used {
            seeds.swap_remove(i);
        }
        comps.push(c);
    }

    comps.retain(|c| (0.0..=cfg.d_max).contains(&c.d));
    loop {
        if comps.is_empty() {
            return Vec::new();
        }
        let Some(alpha) = joint_amplitudes(&comps, y) else {
            comps.pop();
            continue;
        };
        let res = residual(&comps, &alpha, y);
        let dof = n - comps.len() as f64;
        let sigma = (res.iter().map(|v| v.norm_sqr()).sum::<f64>() / dof).sqrt();
        let z: Vec<f64> = comps
            .iter()
            .zip(&alpha)
            .map(|(c, a)| a.norm() * c.s_norm_sq.sqrt() / sigma)
            .collect();
        let weakest = z
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, v)| (i, *v));
        match weakest {
            Some((i, v)) if !(v > thr) => {
                comps.remove(i);
            }
            _ => {
                return comps
                    .iter()
                    .zip(z)
                    .map(|(c, z_u)| Measurement::new(c.d, c.phi, z_u))
                    .collect();
            }
        }
    }
}
