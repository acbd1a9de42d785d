//! Multi-tone phase coding: FFT each channel into single-tone components,
//! spike at each tone's first positive peak, and let per-pair coincidence
//! detectors (one per candidate delay) fire when the two channels' peak
//! times differ by that detector's delay. Detector outputs are pooled into
//! log-spaced frequency bands.

use super::geometry::ArrayGeometry;
use super::synth::MicArrayFrame;
use crate::error::{CoreError, Result};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

#[derive(Debug, Clone)]
pub struct MTPCConfig {
    pub n_fft: usize,
    /// Coincidence detectors per pair; odd so the grid is symmetric around
    /// a zero-delay detector.
    pub n_tau: usize,
    /// Frequency bands pooled from the detector outputs.
    pub n_channels: usize,
    pub f_lo: f64,
    pub f_hi: f64,
    /// Detector delays span [-max_delay_s, +max_delay_s].
    pub max_delay_s: f64,
    pub pairs: Vec<(usize, usize)>,
    /// A tone counts only if its magnitude reaches this fraction of the
    /// channel's strongest in-band component.
    pub amplitude_rel_floor: f64,
    /// Channels whose strongest in-band magnitude falls below this are
    /// treated as silent.
    pub silence_floor: f64,
}

impl MTPCConfig {
    /// Standard front-end for an array: detector grid spanning the array's
    /// aperture, speech-to-8k band, 40 channels.
    pub fn for_geometry(geom: &ArrayGeometry) -> MTPCConfig {
        MTPCConfig {
            n_fft: 1024,
            n_tau: 51,
            n_channels: 40,
            f_lo: 280.0,
            f_hi: 8000.0,
            max_delay_s: geom.max_tdoa_s(),
            pairs: geom.pairs.clone(),
            amplitude_rel_floor: 0.1,
            silence_floor: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tau < 3 || self.n_tau % 2 == 0 {
            return Err(CoreError::Config(format!(
                "n_tau must be odd and >= 3, got {}",
                self.n_tau
            )));
        }
        if !(self.f_lo > 0.0 && self.f_lo < self.f_hi) {
            return Err(CoreError::Config(format!(
                "need 0 < f_lo < f_hi, got [{}, {}]",
                self.f_lo, self.f_hi
            )));
        }
        if self.n_fft < 2 || self.n_channels == 0 || self.pairs.is_empty() {
            return Err(CoreError::Config(
                "n_fft >= 2, n_channels >= 1 and at least one pair required".into(),
            ));
        }
        if !(self.max_delay_s > 0.0) {
            return Err(CoreError::Config("max_delay_s must be positive".into()));
        }
        Ok(())
    }

    pub fn delay_step_s(&self) -> f64 {
        2.0 * self.max_delay_s / (self.n_tau - 1) as f64
    }

    pub fn detector_delay_s(&self, idx: usize) -> f64 {
        -self.max_delay_s + idx as f64 * self.delay_step_s()
    }

    /// Log-spaced band index for an in-range frequency.
    pub fn band_of(&self, freq_hz: f64) -> Option<usize> {
        if freq_hz < self.f_lo || freq_hz > self.f_hi {
            return None;
        }
        let frac = (freq_hz / self.f_lo).ln() / (self.f_hi / self.f_lo).ln();
        Some(((frac * self.n_channels as f64) as usize).min(self.n_channels - 1))
    }
}

/// Spike counts indexed by (pair, detector, band).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSpikeMap {
    pub pairs: usize,
    pub n_tau: usize,
    pub n_channels: usize,
    counts: Vec<u8>,
}

impl PhaseSpikeMap {
    pub fn zeros(pairs: usize, n_tau: usize, n_channels: usize) -> PhaseSpikeMap {
        PhaseSpikeMap {
            pairs,
            n_tau,
            n_channels,
            counts: vec![0; pairs * n_tau * n_channels],
        }
    }

    fn index(&self, pair: usize, tau: usize, band: usize) -> usize {
        (pair * self.n_tau + tau) * self.n_channels + band
    }

    pub fn at(&self, pair: usize, tau: usize, band: usize) -> u8 {
        self.counts[self.index(pair, tau, band)]
    }

    pub fn add_spike(&mut self, pair: usize, tau: usize, band: usize) {
        let i = self.index(pair, tau, band);
        self.counts[i] = self.counts[i].saturating_add(1);
    }

    pub fn total_spikes(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Row-major [pair][tau][band] counts as a flat input vector.
    pub fn flatten(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// Wrap a time difference into [-period/2, period/2).
pub fn wrap_delay(dt_s: f64, period_s: f64) -> f64 {
    let mut y = dt_s.rem_euclid(period_s);
    if y >= period_s / 2.0 {
        y -= period_s;
    }
    y
}

struct ChannelTones {
    /// (fft bin, first peak time in seconds) for every accepted component.
    peaks: Vec<(usize, f64)>,
}

fn analyze_channel(
    samples: &[f64],
    sample_rate: f64,
    cfg: &MTPCConfig,
    planner: &mut FftPlanner<f64>,
) -> ChannelTones {
    let n = cfg.n_fft;
    let fft = planner.plan_fft_forward(n);
    let mut buf: Vec<Complex<f64>> = samples[..n]
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .collect();
    fft.process(&mut buf);

    let bin_hz = sample_rate / n as f64;
    let k_lo = (cfg.f_lo / bin_hz).ceil().max(1.0) as usize;
    let k_hi = ((cfg.f_hi / bin_hz).floor() as usize).min(n / 2 - 1);
    if k_lo > k_hi {
        return ChannelTones { peaks: vec![] };
    }
    let mut max_mag = 0.0f64;
    for k in k_lo..=k_hi {
        max_mag = max_mag.max(buf[k].norm());
    }
    if max_mag < cfg.silence_floor {
        return ChannelTones { peaks: vec![] };
    }
    let floor = cfg.amplitude_rel_floor * max_mag;
    let mut peaks = Vec::new();
    for k in k_lo..=k_hi {
        if buf[k].norm() >= floor {
            let freq = k as f64 * bin_hz;
            // component is |X| cos(2 pi f t + phase): first positive peak
            // where the argument hits zero mod 2 pi
            let phase = buf[k].arg();
            let t_peak = (-phase).rem_euclid(TAU) / (TAU * freq);
            peaks.push((k, t_peak));
        }
    }
    ChannelTones { peaks }
}

/// Encode one frame into a phase spike map: FFT, first peaks, coincidence
/// detection, band pooling.
pub fn mtpc_encode(frame: &MicArrayFrame, cfg: &MTPCConfig) -> Result<PhaseSpikeMap> {
    cfg.validate()?;
    if frame.channels.is_empty() {
        return Err(CoreError::Data("frame has no channels".into()));
    }
    let len = frame.channels[0].len();
    if frame.channels.iter().any(|c| c.len() != len) {
        return Err(CoreError::Data("unequal channel lengths".into()));
    }
    if len < cfg.n_fft {
        return Err(CoreError::Data(format!(
            "frame length {len} shorter than FFT size {}",
            cfg.n_fft
        )));
    }
    for &(a, b) in &cfg.pairs {
        if a >= frame.channels.len() || b >= frame.channels.len() {
            return Err(CoreError::Dimension(format!(
                "pair ({a}, {b}) out of range for {} channels",
                frame.channels.len()
            )));
        }
    }

    let mut planner = FftPlanner::new();
    let tones: Vec<ChannelTones> = frame
        .channels
        .iter()
        .map(|c| analyze_channel(c, frame.sample_rate, cfg, &mut planner))
        .collect();

    let bin_hz = frame.sample_rate / cfg.n_fft as f64;
    let step = cfg.delay_step_s();
    let mut map = PhaseSpikeMap::zeros(cfg.pairs.len(), cfg.n_tau, cfg.n_channels);
    for (p, &(a, b)) in cfg.pairs.iter().enumerate() {
        // a tone must be detected on both channels of the pair
        for &(k, t_a) in &tones[a].peaks {
            let Some(&(_, t_b)) = tones[b].peaks.iter().find(|&&(kb, _)| kb == k) else {
                continue;
            };
            let freq = k as f64 * bin_hz;
            let period = 1.0 / freq;
            let dt = wrap_delay(t_b - t_a, period);
            // nearest detector fires if the delay lands within half a step
            let pos = (dt + cfg.max_delay_s) / step;
            let idx = pos.round();
            if idx < 0.0 || idx >= cfg.n_tau as f64 {
                continue;
            }
            let detector = idx as usize;
            if (dt - cfg.detector_delay_s(detector)).abs() <= step / 2.0 + 1e-15 {
                if let Some(band) = cfg.band_of(freq) {
                    map.add_spike(p, detector, band);
                }
            }
        }
    }
    Ok(map)
}
