//! Mel-spectrogram frontend.
//!
//! Clips are transformed to log-mel matrices in three steps: a centered
//! short-time Fourier transform with a periodic Hann window and reflect
//! padding, a triangular mel filterbank applied to the power spectrum,
//! and log compression with a small floor.
//!
//! The canonical configuration (window 2024, hop 512, 64 mel bands on a
//! 16 kHz one-second clip) yields a 64x32 matrix. The window length is
//! 2024 — not 2048 — and the DFT length equals the window length.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::synth::AudioClip;

/// STFT and filterbank parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrontendConfig {
    pub window_size: usize,
    pub hop_size: usize,
    pub n_mels: usize,
    pub fmin: f64,
    pub fmax: f64,
    /// Additive floor inside the log.
    pub log_eps: f64,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        FrontendConfig {
            window_size: 2024,
            hop_size: 512,
            n_mels: 64,
            fmin: 0.0,
            fmax: 8000.0,
            log_eps: 1e-10,
        }
    }
}

impl FrontendConfig {
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        if self.window_size == 0 || self.hop_size == 0 || self.n_mels == 0 {
            return Err(Error::InvalidConfig("window, hop, and n_mels must be positive".into()));
        }
        if self.hop_size > self.window_size {
            return Err(Error::InvalidConfig(format!(
                "hop {} exceeds window {}",
                self.hop_size, self.window_size
            )));
        }
        if self.fmax > sample_rate as f64 / 2.0 {
            return Err(Error::InvalidConfig(format!(
                "fmax {} above Nyquist {}",
                self.fmax,
                sample_rate as f64 / 2.0
            )));
        }
        if self.fmin < 0.0 || self.fmin >= self.fmax {
            return Err(Error::InvalidConfig("need 0 <= fmin < fmax".into()));
        }
        if self.log_eps <= 0.0 {
            return Err(Error::InvalidConfig("log_eps must be positive".into()));
        }
        Ok(())
    }

    /// Number of positive-frequency DFT bins, `window_size / 2 + 1`.
    pub fn n_bins(&self) -> usize {
        self.window_size / 2 + 1
    }

    /// Frames for a clip of `len` samples with centered padding:
    /// `floor(len / hop) + 1`.
    pub fn n_frames(&self, len: usize) -> usize {
        len / self.hop_size + 1
    }
}

/// Log-mel matrix for one clip, `n_mels` rows by `n_frames` columns.
#[derive(Debug, Clone)]
pub struct MelSpectrogram {
    pub values: Mat,
    pub n_mels: usize,
    pub n_frames: usize,
    pub source_id: String,
}

/// Mel scale: `2595 * log10(1 + f / 700)`.
pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Periodic Hann window of length `n`.
fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / n as f64).cos()))
        .collect()
}

/// Reflect-pad `x` by `pad` samples on each side (mirror without
/// repeating the edge sample).
fn reflect_pad(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    assert!(pad < n, "reflect pad must be shorter than the signal");
    let mut out = Vec::with_capacity(n + 2 * pad);
    for i in 0..pad {
        out.push(x[pad - i]);
    }
    out.extend_from_slice(x);
    for i in 0..pad {
        out.push(x[n - 2 - i]);
    }
    out
}

/// Centered STFT magnitudes: `(window/2 + 1)` rows by `n_frames` columns.
pub fn stft_magnitude(clip: &AudioClip, cfg: &FrontendConfig) -> Result<Mat> {
    cfg.validate(clip.sample_rate)?;
    let pad = cfg.window_size / 2;
    if pad >= clip.samples.len() {
        return Err(Error::InvalidConfig(format!(
            "window {} too large for a {}-sample clip",
            cfg.window_size,
            clip.samples.len()
        )));
    }
    let padded = reflect_pad(&clip.samples, pad);
    let window = hann(cfg.window_size);
    let n_frames = cfg.n_frames(clip.samples.len());
    let n_bins = cfg.n_bins();

    let fft = FftPlanner::new().plan_fft_forward(cfg.window_size);
    let mut out = Mat::zeros(n_bins, n_frames);
    let mut buf = vec![Complex64::default(); cfg.window_size];
    for t in 0..n_frames {
        let start = t * cfg.hop_size;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(padded[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (k, b) in buf.iter().take(n_bins).enumerate() {
            out.set(k, t, b.norm());
        }
    }
    Ok(out)
}

/// Triangular mel filterbank, `n_mels` rows by `window/2 + 1` columns.
///
/// Peaks are equally spaced on the mel scale between `fmin` and `fmax`
/// and every triangle has peak weight 1.
pub fn mel_filterbank(cfg: &FrontendConfig, sample_rate: u32) -> Result<Mat> {
    cfg.validate(sample_rate)?;
    let n_bins = cfg.n_bins();
    let mel_lo = hz_to_mel(cfg.fmin);
    let mel_hi = hz_to_mel(cfg.fmax);
    let edges: Vec<f64> = (0..cfg.n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (cfg.n_mels + 1) as f64))
        .collect();

    let bin_hz = sample_rate as f64 / cfg.window_size as f64;
    let mut fb = Mat::zeros(cfg.n_mels, n_bins);
    for m in 0..cfg.n_mels {
        let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
        let mut any = false;
        for k in 0..n_bins {
            let f = k as f64 * bin_hz;
            let rise = (f - left) / (center - left);
            let fall = (right - f) / (right - center);
            let w = rise.min(fall).max(0.0);
            if w > 0.0 {
                fb.set(m, k, w);
                any = true;
            }
        }
        if !any {
            return Err(Error::InvalidConfig(format!(
                "mel filter {m} is empty: n_mels {} too large for DFT resolution {:.2} Hz",
                cfg.n_mels, bin_hz
            )));
        }
    }
    Ok(fb)
}

/// Full frontend: `log(eps + filterbank * |STFT|^2)`.
pub fn mel_spectrogram(clip: &AudioClip, cfg: &FrontendConfig) -> Result<MelSpectrogram> {
    let mag = stft_magnitude(clip, cfg)?;
    let fb = mel_filterbank(cfg, clip.sample_rate)?;
    let mut power = mag;
    for v in &mut power.data {
        *v = *v * *v;
    }
    let mut mel = fb.matmul(&power);
    for v in &mut mel.data {
        *v = (cfg.log_eps + *v).ln();
    }
    let (n_mels, n_frames) = (mel.rows, mel.cols);
    Ok(MelSpectrogram { values: mel, n_mels, n_frames, source_id: clip.factors.id() })
}
