use crate::error::{Error, Result};
use crate::model::{ArrayGeometry, KinematicState};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;
use std::io::{Read, Write};

/// Pulse support in symbol periods on each side.
pub const PULSE_SPAN: f64 = 8.0;

/// Sampled array snapshot, element-major (`h * N_s + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct RadioSnapshot {
    pub samples: Vec<Complex64>,
    pub n_s: usize,
    pub h: usize,
    pub sigma_sq: f64,
}

/// One component of the radio forward model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioComponent {
    pub state: KinematicState,
    /// Phase of the complex amplitude in radians.
    pub phase: f64,
}

/// Normalized-by-nothing signal atom `s(d, phi)`.
pub fn atom(d: f64, phi: f64, geom: &ArrayGeometry) -> Vec<Complex64> {
    let pulse = geom.pulse();
    let span = PULSE_SPAN * geom.t_p;
    let tau = d / geom.c;
    let mut out = Vec::with_capacity(geom.n_s * geom.num_elements());
    for e in &geom.element_offsets {
        let g = e.radius * (phi - geom.psi - e.angle).cos() / geom.c;
        let rot = Complex64::from_polar(1.0, 2.0 * PI * geom.f_c * g);
        for i in 0..geom.n_s {
            let t = i as f64 * geom.t_s - tau + g;
            let p = if t.abs() <= span { pulse.value(t) } else { 0.0 };
            out.push(rot * p);
        }
    }
    out
}

/// Superposition of atoms with explicit complex amplitudes plus circular
/// Gaussian noise of variance `sigma_sq`.
pub fn synthesize<R: Rng + ?Sized>(
    components: &[(f64, f64, Complex64)],
    geom: &ArrayGeometry,
    sigma_sq: f64,
    rng: &mut R,
) -> RadioSnapshot {
    let n = geom.n_s * geom.num_elements();
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    for &(d, phi, alpha) in components {
        for (y, s) in samples.iter_mut().zip(atom(d, phi, geom)) {
            *y += alpha * s;
        }
    }
    if sigma_sq > 0.0 {
        let s = (sigma_sq / 2.0).sqrt();
        for y in samples.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *y += Complex64::new(s * re, s * im);
        }
    }
    RadioSnapshot {
        samples,
        n_s: geom.n_s,
        h: geom.num_elements(),
        sigma_sq,
    }
}

/// Snapshot of components whose normalized amplitude `u` is taken relative
/// to unit noise variance: `|alpha| = u / ||s||`.
pub fn synth_radio<R: Rng + ?Sized>(
    truth: &[RadioComponent],
    geom: &ArrayGeometry,
    sigma_sq: f64,
    rng: &mut R,
) -> RadioSnapshot {
    let comps: Vec<(f64, f64, Complex64)> = truth
        .iter()
        .map(|c| {
            let s = atom(c.state.d, c.state.phi, geom);
            let norm = s.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let mag = if norm > 0.0 { c.state.u / norm } else { 0.0 };
            (c.state.d, c.state.phi, Complex64::from_polar(mag, c.phase))
        })
        .collect();
    synthesize(&comps, geom, sigma_sq, rng)
}

impl RadioSnapshot {
    /// Little-endian dump: `N_s` (u64), `H` (u64), `sigma_sq` (f64), then
    /// interleaved `(re, im)` f64 pairs.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n_s as u64).to_le_bytes())?;
        w.write_all(&(self.h as u64).to_le_bytes())?;
        w.write_all(&self.sigma_sq.to_le_bytes())?;
        for s in &self.samples {
            w.write_all(&s.re.to_le_bytes())?;
            w.write_all(&s.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut b8 = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut b8)?;
            Ok(b8)
        };
        let n_s = u64::from_le_bytes(next(&mut r)?) as usize;
        let h = u64::from_le_bytes(next(&mut r)?) as usize;
        let sigma_sq = f64::from_le_bytes(next(&mut r)?);
        let len = n_s
            .checked_mul(h)
            .ok_or_else(|| Error::Format("snapshot header overflow".into()))?;
        let mut samples = Vec::with_capacity(len);
        for _ in 0..len {
            let re = f64::from_le_bytes(next(&mut r)?);
            let im = f64::from_le_bytes(next(&mut r)?);
            samples.push(Complex64::new(re, im));
        }
        Ok(Self {
            samples,
            n_s,
            h,
            sigma_sq,
        })
    }
}
