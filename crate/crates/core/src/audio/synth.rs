//! Synthetic multi-channel frame generation: far-field multitone sources
//! with exact fractional delays (tones delay by phase shift), plus additive
//! noise mixed at a target SNR.
//!
//! Tone frequencies sit exactly on FFT bins of the analysis front-end so a
//! rectangular-window FFT resolves them without leakage.

use super::geometry::ArrayGeometry;
use crate::error::{CoreError, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToneComponent {
    pub freq_hz: f64,
    pub amplitude: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceDescriptor {
    pub tones: Vec<ToneComponent>,
}

impl SourceDescriptor {
    fn sample(&self, t_s: f64) -> f64 {
        self.tones
            .iter()
            .map(|c| c.amplitude * (2.0 * std::f64::consts::PI * c.freq_hz * t_s + c.phase).sin())
            .sum()
    }
}

/// One captured multi-mic frame.
#[derive(Debug, Clone)]
pub struct MicArrayFrame {
    pub channels: Vec<Vec<f64>>,
    pub sample_rate: f64,
    pub azimuth_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseKind {
    Babble,
    Factory,
}

/// A random 3-6 tone source on exact FFT bins within the analysis band.
/// `bin_hz` is the FFT bin spacing (sample_rate / n_fft).
pub fn random_multitone<R: Rng>(
    bin_hz: f64,
    bin_lo: usize,
    bin_hi: usize,
    rng: &mut R,
) -> SourceDescriptor {
    let count = rng.gen_range(3..=6);
    let mut bins = Vec::with_capacity(count);
    while bins.len() < count {
        let b = rng.gen_range(bin_lo..=bin_hi);
        if !bins.contains(&b) {
            bins.push(b);
        }
    }
    SourceDescriptor {
        tones: bins
            .into_iter()
            .map(|b| ToneComponent {
                freq_hz: b as f64 * bin_hz,
                amplitude: rng.gen_range(0.5..1.0),
                phase: rng.gen_range(0.0..std::f64::consts::TAU),
            })
            .collect(),
    }
}

fn mean_power(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// Per-channel noise waveform. Babble imitates competing speech: a couple of
/// dozen tones confined to the speech band. Factory is wide-band machinery:
/// a dense tone comb with slow amplitude modulation.
fn noise_channel<R: Rng>(
    kind: NoiseKind,
    len: usize,
    sample_rate: f64,
    bin_hz: f64,
    rng: &mut R,
) -> Vec<f64> {
    let (bin_lo, bin_hi, tone_count, am_depth) = match kind {
        NoiseKind::Babble => (18usize, 217usize, 22usize, 0.0),
        NoiseKind::Factory => (18, 511, 60, 0.5),
    };
    let tones: Vec<ToneComponent> = (0..tone_count)
        .map(|_| ToneComponent {
            freq_hz: rng.gen_range(bin_lo..=bin_hi) as f64 * bin_hz,
            amplitude: rng.gen_range(0.3..1.0),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
        })
        .collect();
    let am_rate = rng.gen_range(2.0..8.0);
    let am_phase = rng.gen_range(0.0..std::f64::consts::TAU);
    (0..len)
        .map(|i| {
            let t = i as f64 / sample_rate;
            let carrier: f64 = tones
                .iter()
                .map(|c| c.amplitude * (2.0 * std::f64::consts::PI * c.freq_hz * t + c.phase).sin())
                .sum();
            let envelope =
                1.0 + am_depth * (2.0 * std::f64::consts::PI * am_rate * t + am_phase).sin();
            carrier * envelope
        })
        .collect()
}

/// Render a frame: each mic hears the source delayed by its geometric
/// arrival time (exact for tones via phase shift), optionally plus noise
/// mixed per channel at `snr_db`. Noise draws from `rng` and differs across
/// channels; pass `None` for clean frames.
pub fn synthesize_frame<R: Rng>(
    azimuth_deg: f64,
    source: &SourceDescriptor,
    geometry: &ArrayGeometry,
    sample_rate: f64,
    frame_len: usize,
    noise: Option<(NoiseKind, f64)>,
    rng: &mut R,
) -> Result<MicArrayFrame> {
    geometry.validate()?;
    if frame_len == 0 || sample_rate <= 0.0 {
        return Err(CoreError::Config(
            "frame length and sample rate must be positive".into(),
        ));
    }
    if source.tones.is_empty() {
        return Err(CoreError::Config("source has no tone components".into()));
    }
    let bin_hz = sample_rate / 1024.0; // noise tones reuse the analysis grid
    let mut channels = Vec::with_capacity(geometry.mic_positions.len());
    for mic in 0..geometry.mic_positions.len() {
        let delay = geometry.arrival_delay_s(mic, azimuth_deg);
        let mut x: Vec<f64> = (0..frame_len)
            .map(|i| source.sample(i as f64 / sample_rate - delay))
            .collect();
        if let Some((kind, snr_db)) = noise {
            let n = noise_channel(kind, frame_len, sample_rate, bin_hz, rng);
            let p_sig = mean_power(&x);
            let p_noise = mean_power(&n);
            if p_noise > 0.0 && p_sig > 0.0 {
                let target = p_sig / 10f64.powf(snr_db / 10.0);
                let scale = (target / p_noise).sqrt();
                for (xv, nv) in x.iter_mut().zip(n.iter()) {
                    *xv += scale * nv;
                }
            }
        }
        channels.push(x);
    }
    Ok(MicArrayFrame {
        channels,
        sample_rate,
        azimuth_deg,
    })
}
