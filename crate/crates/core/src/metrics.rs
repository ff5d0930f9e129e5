//! Fit scores, sample statistics and spectral estimates.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

/// Best-fit rate `max(1 - sqrt(sum ||y - y_hat||^2 / sum ||y - y_mean||^2), 0)`
/// over vector-valued samples, as a fraction in `[0, 1]`.
pub fn bfr(y: &[Vec<f64>], y_hat: &[Vec<f64>]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::dims("best-fit rate samples", y.len(), y_hat.len()));
    }
    if y.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: y.len() });
    }
    let ny = y[0].len();
    let mut mean = vec![0.0; ny];
    for r in y {
        if r.len() != ny {
            return Err(Error::dims("best-fit rate channels", ny, r.len()));
        }
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= y.len() as f64);
    let mut num = 0.0;
    let mut den = 0.0;
    for (r, h) in y.iter().zip(y_hat) {
        if h.len() != ny {
            return Err(Error::dims("best-fit rate channels", ny, h.len()));
        }
        for j in 0..ny {
            num += (r[j] - h[j]).powi(2);
            den += (r[j] - mean[j]).powi(2);
        }
    }
    if den == 0.0 {
        return Err(Error::DegenerateReference);
    }
    if !num.is_finite() {
        return Err(Error::NonFiniteValue("best-fit rate residuals"));
    }
    Ok((1.0 - (num / den).sqrt()).max(0.0))
}

/// [`bfr`] for scalar series.
pub fn bfr_scalar(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    let wrap = |s: &[f64]| s.iter().map(|&v| vec![v]).collect::<Vec<_>>();
    bfr(&wrap(y), &wrap(y_hat))
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance (divides by `N - 1`).
pub fn sample_variance(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: x.len() });
    }
    let m = mean(x);
    Ok(x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64)
}

/// One-sided power spectral density.
#[derive(Clone, Debug, PartialEq)]
pub struct Psd {
    /// Hz.
    pub freq: Vec<f64>,
    /// units² / Hz.
    pub density: Vec<f64>,
}

impl Psd {
    /// Rectangle-rule integral of the density over `[0, f_max)`.
    pub fn power_below(&self, f_max: f64) -> f64 {
        let df = self.freq.get(1).copied().unwrap_or(0.0);
        self.freq
            .iter()
            .zip(&self.density)
            .filter(|(f, _)| **f < f_max)
            .map(|(_, d)| d * df)
            .sum()
    }

    pub fn total_power(&self) -> f64 {
        self.power_below(f64::INFINITY)
    }
}

/// Welch estimate: Hann-windowed segments of `segment_len` samples with
/// `overlap` shared samples, mean removed per segment, density scaling.
pub fn periodogram(x: &[f64], ts: f64, segment_len: usize, overlap: usize) -> Result<Psd> {
    if segment_len < 2 {
        return Err(Error::Config("periodogram segment length must be at least 2".into()));
    }
    if overlap >= segment_len {
        return Err(Error::Config("periodogram overlap must be shorter than the segment".into()));
    }
    if !(ts > 0.0) {
        return Err(Error::Config(format!("sampling period must be positive, got {ts}")));
    }
    if x.len() < segment_len {
        return Err(Error::TooShort {
            needed: segment_len,
            got: x.len(),
        });
    }
    let l = segment_len;
    let fs = 1.0 / ts;
    let window: Vec<f64> = (0..l)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / l as f64).cos())
        .collect();
    let wss: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(l);
    let nbins = l / 2 + 1;
    let mut acc = vec![0.0; nbins];
    let mut buf = vec![Complex::new(0.0, 0.0); l];
    let step = l - overlap;
    let mut segments = 0;
    let mut start = 0;
    while start + l <= x.len() {
        let seg = &x[start..start + l];
        let m = mean(seg);
        for (b, (&v, &w)) in buf.iter_mut().zip(seg.iter().zip(&window)) {
            *b = Complex::new((v - m) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let scale = 1.0 / (fs * wss * segments as f64);
    let density = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || (l.is_multiple_of(2) && k == l / 2) { 1.0 } else { 2.0 };
            a * scale * one_sided
        })
        .collect();
    let freq = (0..nbins).map(|k| k as f64 * fs / l as f64).collect();
    Ok(Psd { freq, density })
}
