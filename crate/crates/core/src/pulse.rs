//! Root-raised-cosine pulse shape and its spectral moments.

use crate::special::integrate;
use std::f64::consts::PI;

/// Root-raised-cosine pulse with symbol period `t_p` and roll-off `rolloff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrcPulse {
    pub t_p: f64,
    pub rolloff: f64,
}

impl RrcPulse {
    pub fn new(t_p: f64, rolloff: f64) -> Self {
        Self { t_p, rolloff }
    }

    /// Time-domain value at `t` (seconds), unit peak-energy convention.
    pub fn value(&self, t: f64) -> f64 {
        let b = self.rolloff;
        let x = t / self.t_p;
        if x.abs() < 1e-12 {
            return 1.0 + b * (4.0 / PI - 1.0);
        }
        if b > 0.0 && (x.abs() - 1.0 / (4.0 * b)).abs() < 1e-9 {
            let s = (PI / (4.0 * b)).sin();
            let c = (PI / (4.0 * b)).cos();
            return b / 2f64.sqrt() * ((1.0 + 2.0 / PI) * s + (1.0 - 2.0 / PI) * c);
        }
        let num = (PI * x * (1.0 - b)).sin() + 4.0 * b * x * (PI * x * (1.0 + b)).cos();
        let den = PI * x * (1.0 - (4.0 * b * x).powi(2));
        num / den
    }

    /// Energy spectrum `|P(f)|^2` (raised cosine), peak normalized to 1.
    pub fn power_spectrum(&self, f: f64) -> f64 {
        let b = self.rolloff;
        let f = f.abs();
        let f1 = (1.0 - b) / (2.0 * self.t_p);
        let f2 = (1.0 + b) / (2.0 * self.t_p);
        if f <= f1 {
            1.0
        } else if f <= f2 {
            0.5 * (1.0 + (PI * self.t_p / b * (f - f1)).cos())
        } else {
            0.0
        }
    }

    /// Mean-square bandwidth `int f^2 |P(f)|^2 df / int |P(f)|^2 df` in Hz^2.
    pub fn mean_square_bandwidth(&self) -> f64 {
        let f2 = (1.0 + self.rolloff) / (2.0 * self.t_p);
        let num = integrate(|f| f * f * self.power_spectrum(f), 0.0, f2, 1e-6 * f2.powi(3));
        let den = integrate(|f| self.power_spectrum(f), 0.0, f2, 1e-12 * f2);
        num / den
    }
}
