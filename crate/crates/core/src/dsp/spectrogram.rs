use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use image::{GrayImage, Luma};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::csi_data::{write_atomic, UniformSeries};
use crate::error::{Error, Result};

/// Short-time Fourier magnitudes. `magnitude[frame][bin]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    /// Frame center times, seconds.
    pub times: Vec<f64>,
    /// Bin frequencies from 0 to rate/2, Hz.
    pub freqs: Vec<f64>,
    pub magnitude: Vec<Vec<f64>>,
}

impl Spectrogram {
    /// Index of the strongest bin in each frame.
    pub fn peak_bins(&self) -> Vec<usize> {
        self.magnitude
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                    .0
            })
            .collect()
    }

    pub fn bin_of(&self, freq: f64) -> usize {
        let df = self.freqs.get(1).copied().unwrap_or(1.0);
        ((freq / df).round() as usize).min(self.freqs.len().saturating_sub(1))
    }

    /// Rows: one per frame, first column the frame time; header row holds the
    /// frequency axis.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        write!(w, "time_s\\freq_hz")?;
        for f in &self.freqs {
            write!(w, ",{f}")?;
        }
        writeln!(w)?;
        for (t, row) in self.times.iter().zip(&self.magnitude) {
            write!(w, "{t}")?;
            for v in row {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Hann-windowed STFT magnitude with hop `window * (1 - overlap)`.
pub fn spectrogram(x: &UniformSeries, window: f64, overlap: f64) -> Result<Spectrogram> {
    let n = (window * x.rate()).round() as usize;
    if n < 8 {
        return Err(Error::InvalidInput(format!(
            "spectrogram window of {window} s spans fewer than 8 samples"
        )));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::InvalidInput(format!(
            "overlap must lie in [0, 1), got {overlap}"
        )));
    }
    if x.len() < n {
        return Err(Error::InvalidInput(format!(
            "series of {} samples is shorter than one {n}-sample window",
            x.len()
        )));
    }
    let hop = ((n as f64 * (1.0 - overlap)).round() as usize).max(1);
    let taper = hann(n);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let bins = n / 2 + 1;
    let freqs = (0..bins).map(|k| k as f64 * x.rate() / n as f64).collect();
    let mut times = Vec::new();
    let mut magnitude = Vec::new();
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let samples = x.samples();
    let mut start = 0;
    while start + n <= samples.len() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(samples[start + i] * taper[i], 0.0);
        }
        fft.process(&mut buf);
        magnitude.push(buf[..bins].iter().map(|c| c.norm()).collect());
        times.push(x.start_time() + (start as f64 + n as f64 / 2.0) / x.rate());
        start += hop;
    }
    Ok(Spectrogram {
        times,
        freqs,
        magnitude,
    })
}

/// Renders panels stacked top to bottom, time left to right and frequency
/// increasing upward, each cell `scale` pixels square. Every panel is
/// normalized to its own maximum.
pub fn render_png(panels: &[&Spectrogram], max_freq: Option<f64>, scale: u32, path: &Path) -> Result<()> {
    if panels.is_empty() {
        return Err(Error::InvalidInput("no spectrogram panels".into()));
    }
    let scale = scale.max(1);
    let gap = 2 * scale;
    let rows: Vec<usize> = panels
        .iter()
        .map(|p| match max_freq {
            Some(f) => p.freqs.iter().take_while(|&&v| v <= f + 1e-12).count().max(1),
            None => p.freqs.len(),
        })
        .collect();
    let cols = panels.iter().map(|p| p.times.len()).max().unwrap_or(0).max(1);
    let width = cols as u32 * scale;
    let height = rows.iter().map(|&r| r as u32 * scale).sum::<u32>() + gap * (panels.len() as u32 - 1);
    let mut img = GrayImage::from_pixel(width, height, Luma([255]));
    let mut y0 = 0;
    for (panel, &nrows) in panels.iter().zip(&rows) {
        let peak = panel
            .magnitude
            .iter()
            .flat_map(|r| r[..nrows].iter())
            .fold(0.0f64, |a, &b| a.max(b));
        for (ti, row) in panel.magnitude.iter().enumerate() {
            for (fi, &v) in row[..nrows].iter().enumerate() {
                let level = if peak > 0.0 { v / peak } else { 0.0 };
                let px = Luma([(255.0 * (1.0 - level)).round() as u8]);
                let y_cell = y0 + (nrows - 1 - fi) as u32 * scale;
                for dy in 0..scale {
                    for dx in 0..scale {
                        img.put_pixel(ti as u32 * scale + dx, y_cell + dy, px);
                    }
                }
            }
        }
        y0 += nrows as u32 * scale + gap;
    }
    let mut png = Vec::new();
    img.write_to(&mut std::io::Cursor::new(&mut png), image::ImageFormat::Png)?;
    write_atomic(path, |w| Ok(w.write_all(&png)?))
}
