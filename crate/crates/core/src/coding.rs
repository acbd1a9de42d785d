//! Encoders/decoders for the per-block coding schemes: direct input coding,
//! burst/rate hidden coding descriptors, TTFS and direct output decoding.

use crate::error::{CoreError, Result};
use crate::neurons::{DoubleExpLIFLayer, SpikeTrain};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputScheme {
    Direct,
    /// MTPC phase coding; only meaningful with the audio pipeline.
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenScheme {
    Burst,
    /// Rate coding is burst coding with Gamma = 1.
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputScheme {
    Ttfs,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodingAssignment {
    pub input: InputScheme,
    pub hidden: HiddenScheme,
    pub output: OutputScheme,
}

impl CodingAssignment {
    /// Effective max burst size under this assignment: rate forces Gamma = 1.
    pub fn effective_gamma(&self, gamma: u32) -> u32 {
        match self.hidden {
            HiddenScheme::Burst => gamma,
            HiddenScheme::Rate => 1,
        }
    }

    pub fn validate(&self, audio_task: bool) -> Result<()> {
        if self.input == InputScheme::Phase && !audio_task {
            return Err(CoreError::Config(
                "phase input coding is only valid with the audio pipeline".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a TTFS readout over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct TTFSDecision {
    pub predicted_class: usize,
    /// First-spike timestep in 1..=T; T when nothing fired.
    pub t_f: usize,
    pub potentials_at_tf: Vec<f64>,
    pub fired_any: bool,
}

/// Lowest-index argmax, the deterministic tie rule used everywhere.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Step the LIF output layer through the hidden spike train until the first
/// spike: stop at the first t where any neuron's v >= V_th; among
/// simultaneous firers pick the highest potential; when nothing fires through
/// T, decide at the last timestep by argmax over all neurons. The layer's
/// steps_executed() equals t_f afterwards, making the early exit observable.
pub fn ttfs_decode(
    layer: &mut DoubleExpLIFLayer,
    hidden_train: &SpikeTrain,
    t_window: usize,
) -> Result<TTFSDecision> {
    if hidden_train.window() != t_window {
        return Err(CoreError::Dimension(format!(
            "train window {} vs requested {}",
            hidden_train.window(),
            t_window
        )));
    }
    layer.reset();
    let mut last_v = vec![0.0; layer.classes()];
    for t in 0..t_window {
        let (v, fired) = layer.lif_step(&hidden_train.column(t))?;
        if fired.iter().any(|&f| f) {
            // argmax over the simultaneous firers
            let mut best: Option<usize> = None;
            for (i, &f) in fired.iter().enumerate() {
                if f && best.map_or(true, |b| v[i] > v[b]) {
                    best = Some(i);
                }
            }
            return Ok(TTFSDecision {
                predicted_class: best.expect("at least one firer"),
                t_f: t + 1,
                potentials_at_tf: v,
                fired_any: true,
            });
        }
        last_v = v;
    }
    Ok(TTFSDecision {
        predicted_class: argmax(&last_v),
        t_f: t_window,
        potentials_at_tf: last_v,
        fired_any: false,
    })
}

/// Direct output decoding: y = (1/T) * sum_t W * s(t).
pub fn direct_decode(classifier_weights: &Tensor, hidden_train: &SpikeTrain) -> Result<Vec<f64>> {
    let t_window = hidden_train.window();
    if t_window == 0 {
        return Err(CoreError::Config("direct decode needs T >= 1".into()));
    }
    let mut acc = vec![0.0; classifier_weights.rows()];
    for t in 0..t_window {
        let y = classifier_weights.matvec(&hidden_train.column(t))?;
        for (a, v) in acc.iter_mut().zip(y) {
            *a += v;
        }
    }
    for a in acc.iter_mut() {
        *a /= t_window as f64;
    }
    Ok(acc)
}

/// Direct decoding plus the classifier's bias term, used when comparing
/// against a teacher whose linear classifier carries a bias.
pub fn direct_decode_biased(
    classifier_weights: &Tensor,
    bias: &[f64],
    hidden_train: &SpikeTrain,
) -> Result<Vec<f64>> {
    let mut y = direct_decode(classifier_weights, hidden_train)?;
    for (a, &b) in y.iter_mut().zip(bias.iter()) {
        *a += b;
    }
    Ok(y)
}

/// Direct input coding: the (already normalized) feature vector is the input
/// current, injected as-is.
pub fn direct_encode(features: &[f64]) -> Vec<f64> {
    features.to_vec()
}
