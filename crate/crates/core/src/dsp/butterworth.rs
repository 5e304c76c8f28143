//! Butterworth band-pass design and second-order-section filtering.
//!
//! Design follows the classical route: analog low-pass prototype poles,
//! low-pass to band-pass transform at prewarped edges, bilinear map to the
//! z-plane. A prototype of order `N` yields `N` biquads (`2N` poles), each
//! with one zero at `z = 1` and one at `z = -1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{FilterSpec, PhaseMode};
use crate::csi_data::UniformSeries;
use crate::error::{Error, Result};

/// `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + self.b[1] * z_inv + self.b[2] * z2) / (self.a[0] + self.a[1] * z_inv + self.a[2] * z2)
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SosFilter {
    sections: Vec<Biquad>,
}

impl SosFilter {
    pub fn from_sections(sections: Vec<Biquad>) -> Self {
        SosFilter { sections }
    }

    /// Band-pass from an order-`order` Butterworth prototype, -3 dB at `low`
    /// and `high` Hz.
    pub fn butterworth_bandpass(order: usize, low: f64, high: f64, rate: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("filter order must be >= 1".into()));
        }
        let nyquist = rate / 2.0;
        if !(low > 0.0 && low < high) {
            return Err(Error::InvalidInput(format!(
                "band edges must satisfy 0 < low < high, got {low}, {high}"
            )));
        }
        if high >= nyquist {
            return Err(Error::InvalidInput(format!(
                "cutoff {high} Hz is not below Nyquist ({nyquist} Hz)"
            )));
        }
        let fs2 = 2.0 * rate;
        let w_low = fs2 * (PI * low / rate).tan();
        let w_high = fs2 * (PI * high / rate).tan();
        let bw = w_high - w_low;
        let w0_sq = w_low * w_high;

        let mut upper = Vec::new();
        let mut real = Vec::new();
        for k in 0..order {
            let theta = PI * (2 * k + 1) as f64 / (2 * order) as f64;
            let proto = Complex64::new(-theta.sin(), theta.cos());
            let lp = proto * (bw / 2.0);
            let disc = (lp * lp - w0_sq).sqrt();
            for s in [lp + disc, lp - disc] {
                let z = (fs2 + s) / (fs2 - s);
                if z.im > 1e-12 * z.norm() {
                    upper.push(z);
                } else if z.im.abs() <= 1e-12 * z.norm() {
                    real.push(z.re);
                }
            }
        }
        real.sort_by(|a, b| a.total_cmp(b));
        let mut sections: Vec<Biquad> = upper
            .iter()
            .map(|p| Biquad {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -2.0 * p.re, p.norm_sqr()],
            })
            .collect();
        for pair in real.chunks(2) {
            let (p, q) = (pair[0], pair.get(1).copied().unwrap_or(0.0));
            sections.push(Biquad {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -(p + q), p * q],
            });
        }
        debug_assert_eq!(sections.len(), order);

        // Unit gain at the digital image of the analog center frequency.
        let center = 2.0 * (w0_sq.sqrt() / fs2).atan();
        let mut filter = SosFilter { sections };
        let g = filter.response_at(center).norm();
        let per_section = g.powf(-1.0 / filter.sections.len() as f64);
        for s in &mut filter.sections {
            for b in &mut s.b {
                *b *= per_section;
            }
        }
        Ok(filter)
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Response at normalized angular frequency `omega` (rad/sample).
    pub fn response_at(&self, omega: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -omega);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    /// Single-pass response at `freq` Hz for sampling rate `rate`.
    pub fn response(&self, freq: f64, rate: f64) -> Complex64 {
        self.response_at(2.0 * PI * freq / rate)
    }

    /// Per-section state (transposed direct form II) that holds the output
    /// at steady state for a unit step input.
    pub fn step_initial_state(&self) -> Vec<[f64; 2]> {
        let mut input = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let y = s.dc_gain() * input;
                let z2 = s.b[2] * input - s.a[2] * y;
                let z1 = y - s.b[0] * input;
                input = y;
                [z1, z2]
            })
            .collect()
    }

    /// Causal filtering, state initialized to the step steady state at `x[0]`.
    pub fn filter(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        if x.is_empty() {
            return y;
        }
        let x0 = x[0];
        for (s, zi) in self.sections.iter().zip(self.step_initial_state()) {
            let (mut z1, mut z2) = (zi[0] * x0, zi[1] * x0);
            for v in y.iter_mut() {
                let input = *v;
                let out = s.b[0] * input + z1;
                z1 = s.b[1] * input - s.a[1] * out + z2;
                z2 = s.b[2] * input - s.a[2] * out;
                *v = out;
            }
        }
        y
    }

    /// Forward-backward filtering: zero phase, squared magnitude response.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.filter(x);
        y.reverse();
        let mut y = self.filter(&y);
        y.reverse();
        y
    }
}

/// Band-pass `x` per `spec`. The series must already be at `spec.target_rate`.
pub fn butterworth_bandpass(x: &UniformSeries, spec: &FilterSpec) -> Result<UniformSeries> {
    spec.validate()?;
    if (x.rate() - spec.target_rate).abs() > 1e-9 * spec.target_rate {
        return Err(Error::InvalidInput(format!(
            "series rate {} Hz differs from filter rate {} Hz",
            x.rate(),
            spec.target_rate
        )));
    }
    let filter = spec.bandpass_filter()?;
    let out = match spec.phase_mode {
        PhaseMode::ZeroPhase => filter.filtfilt(x.samples()),
        PhaseMode::Causal => filter.filter(x.samples()),
    };
    x.with_samples(out)
}
