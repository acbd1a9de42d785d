//! Sound-source localization stack: array geometry, multi-tone synthesis,
//! phase-coded spike encoding, metrics, dataset plumbing and the full
//! noise-robustness experiment.

pub mod dataset;
pub mod experiment;
pub mod geometry;
pub mod metrics;
pub mod mtpc;
pub mod synth;

use crate::error::{CoreError, Result};
use crate::neurons::SpikeTrain;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Randomly silence spike-train slots: each (neuron, timestep) entry is
/// zeroed independently with probability `rate`. Mirrors the in-forward
/// deletion applied by `run_window_batch_with`, but as a post-hoc corruption
/// of a recorded train.
pub fn apply_spike_deletion(train: &SpikeTrain, rate: f64, seed: u64) -> Result<SpikeTrain> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(CoreError::Config(format!(
            "deletion rate must lie in [0, 1], got {rate}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = train.clone();
    for n in 0..out.neurons() {
        for t in 0..out.window() {
            if rng.gen::<f64>() < rate {
                out.set_count(n, t, 0);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_train(neurons: usize, window: usize) -> SpikeTrain {
        let mut t = SpikeTrain::new(neurons, window);
        for n in 0..neurons {
            for step in 0..window {
                t.set_count(n, step, ((n + step) % 3 + 1) as u8);
            }
        }
        t
    }

    #[test]
    fn deletion_rate_zero_is_the_identity() {
        let train = dense_train(20, 8);
        let kept = apply_spike_deletion(&train, 0.0, 7).unwrap();
        assert_eq!(kept.counts(), train.counts());
    }

    #[test]
    fn deletion_rate_one_silences_the_train() {
        let train = dense_train(20, 8);
        let gone = apply_spike_deletion(&train, 1.0, 7).unwrap();
        assert_eq!(gone.total_spikes(), 0);
    }

    #[test]
    fn intermediate_rate_deletes_the_expected_fraction() {
        let neurons = 100;
        let window = 100;
        let mut train = SpikeTrain::new(neurons, window);
        for n in 0..neurons {
            for t in 0..window {
                train.set_count(n, t, 1);
            }
        }
        let thinned = apply_spike_deletion(&train, 0.5, 3).unwrap();
        let survived = thinned.total_spikes() as f64 / (neurons * window) as f64;
        assert!(
            (survived - 0.5).abs() < 0.02,
            "survival fraction {survived}"
        );
    }

    #[test]
    fn out_of_range_rate_is_rejected() {
        let train = dense_train(2, 2);
        assert!(apply_spike_deletion(&train, -0.1, 0).is_err());
        assert!(apply_spike_deletion(&train, 1.5, 0).is_err());
    }
}
