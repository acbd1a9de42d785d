//! Spiking neuron layers stepped in discrete time (dt = 1 timestep).
//!
//! BurstingIFLayer: membrane charging v(t) = v(t-1) + W*s_in(t), burst emission
//! s = min(max(floor(v/V_th), 0), Gamma), reset by subtraction v -= s*V_th.
//! Negative membrane potentials persist; only the emitted count is clamped.
//! Rate coding is this model with Gamma = 1.
//!
//! DoubleExpLIFLayer: tempotron-style output neurons driven by per-input
//! synaptic traces m(t) = exp(-1/tau_m)*(m(t-1) + s(t)),
//! I(t) = exp(-1/tau_s)*(I(t-1) + s(t)), PSP kernel K = K_0*(m - I),
//! membrane v = W*K, firing when v >= V_th.
//!
//! The batched runner produces bit-identical spike trains to the per-sample
//! path: both add the same products in the same order (see tensor.rs).

use crate::error::{CoreError, Result};
use crate::tensor::Tensor;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Per-neuron, per-timestep spike counts over a window. Layout [neurons x T].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeTrain {
    neurons: usize,
    window: usize,
    counts: Vec<u8>,
}

impl SpikeTrain {
    pub fn new(neurons: usize, window: usize) -> SpikeTrain {
        assert!(neurons > 0 && window > 0, "empty spike train");
        SpikeTrain {
            neurons,
            window,
            counts: vec![0; neurons * window],
        }
    }

    pub fn from_counts(neurons: usize, window: usize, counts: Vec<u8>) -> Result<SpikeTrain> {
        if counts.len() != neurons * window {
            return Err(CoreError::Dimension(format!(
                "spike train needs {} counts, got {}",
                neurons * window,
                counts.len()
            )));
        }
        Ok(SpikeTrain {
            neurons,
            window,
            counts,
        })
    }

    pub fn neurons(&self) -> usize {
        self.neurons
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn count(&self, neuron: usize, t: usize) -> u8 {
        self.counts[neuron * self.window + t]
    }

    pub fn set_count(&mut self, neuron: usize, t: usize, c: u8) {
        self.counts[neuron * self.window + t] = c;
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    /// Spike counts at timestep t as f64, ready for matvec.
    pub fn column(&self, t: usize) -> Vec<f64> {
        (0..self.neurons).map(|n| self.count(n, t) as f64).collect()
    }

    /// c(T): total count per neuron over the window.
    pub fn totals(&self) -> Vec<u32> {
        (0..self.neurons)
            .map(|n| (0..self.window).map(|t| self.count(n, t) as u32).sum())
            .collect()
    }

    pub fn total_spikes(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn max_count(&self) -> u8 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// Burst emission rule: clamp(floor(v / v_th), 0, gamma).
/// Callers guarantee v is finite.
pub fn burst_fire(v: f64, v_th: f64, gamma: u32) -> u8 {
    let s = (v / v_th).floor();
    if s <= 0.0 {
        0
    } else if s >= gamma as f64 {
        gamma as u8
    } else {
        s as u8
    }
}

#[derive(Debug, Clone)]
pub struct BurstingIFLayer {
    pub weights: Tensor, // [out, in]
    /// Constant current added every timestep (teacher-inherited bias).
    pub bias: Option<Vec<f64>>,
    pub v_th: f64,
    pub gamma: u32,
    /// Membrane potential, one entry per neuron. Single-sample state; the
    /// batched runner keeps its own per-sample state matrix.
    pub v: Vec<f64>,
}

impl BurstingIFLayer {
    pub fn new(
        weights: Tensor,
        bias: Option<Vec<f64>>,
        v_th: f64,
        gamma: u32,
    ) -> Result<BurstingIFLayer> {
        if weights.shape().len() != 2 {
            return Err(CoreError::Dimension("burst layer weights must be 2-d".into()));
        }
        if !(v_th > 0.0 && v_th.is_finite()) {
            return Err(CoreError::Config(format!("v_th must be positive, got {v_th}")));
        }
        if gamma < 1 || gamma > u8::MAX as u32 {
            return Err(CoreError::Config(format!(
                "gamma must be in [1, 255], got {gamma}"
            )));
        }
        let out = weights.rows();
        if let Some(b) = &bias {
            if b.len() != out {
                return Err(CoreError::Dimension(format!(
                    "bias length {} vs {} neurons",
                    b.len(),
                    out
                )));
            }
        }
        Ok(BurstingIFLayer {
            v: vec![0.0; out],
            weights,
            bias,
            v_th,
            gamma,
        })
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn reset(&mut self) {
        self.v.iter_mut().for_each(|v| *v = 0.0);
    }

    /// One charge-fire-reset timestep. `input` is an analog current feature
    /// vector for the first hidden layer (direct coding) or spike counts cast
    /// to f64 for deeper layers.
    pub fn burst_step(&mut self, input: &[f64]) -> Result<Vec<u8>> {
        let mut current = self.weights.matvec(input)?;
        if let Some(b) = &self.bias {
            for (c, &bv) in current.iter_mut().zip(b.iter()) {
                *c += bv;
            }
        }
        let mut spikes = vec![0u8; self.out_dim()];
        for j in 0..self.out_dim() {
            self.v[j] += current[j];
            if !self.v[j].is_finite() {
                return Err(CoreError::Numeric(format!(
                    "non-finite membrane potential at neuron {j}"
                )));
            }
            let s = burst_fire(self.v[j], self.v_th, self.gamma);
            self.v[j] -= s as f64 * self.v_th;
            spikes[j] = s;
        }
        Ok(spikes)
    }
}

/// Peak-normalizing constant of the PSP kernel: K_0 such that
/// max_{t in 1..=t_max} K_0*(exp(-t/tau_m) - exp(-t/tau_s)) == v_th.
pub fn kernel_k0(v_th: f64, tau_m: f64, tau_s: f64, t_max: usize) -> Result<f64> {
    if !(tau_m > tau_s && tau_s > 0.0) {
        return Err(CoreError::Config(format!(
            "need tau_m > tau_s > 0, got tau_m={tau_m} tau_s={tau_s}"
        )));
    }
    if t_max == 0 {
        return Err(CoreError::Config("kernel window must be >= 1".into()));
    }
    let mut peak = 0.0f64;
    for t in 1..=t_max {
        let t = t as f64;
        peak = peak.max((-t / tau_m).exp() - (-t / tau_s).exp());
    }
    Ok(v_th / peak)
}

#[derive(Debug, Clone)]
pub struct DoubleExpLIFLayer {
    pub weights: Tensor, // [classes, hidden]
    pub tau_m: f64,
    pub tau_s: f64,
    pub v_th: f64,
    pub k0: f64,
    /// Synaptic traces, one per input (hidden) neuron.
    pub m: Vec<f64>,
    pub i_syn: Vec<f64>,
    steps: usize,
}

impl DoubleExpLIFLayer {
    pub fn new(
        weights: Tensor,
        tau_m: f64,
        tau_s: f64,
        v_th: f64,
        k0: f64,
    ) -> Result<DoubleExpLIFLayer> {
        if !(tau_m > tau_s && tau_s > 0.0) {
            return Err(CoreError::Config(format!(
                "need tau_m > tau_s > 0, got tau_m={tau_m} tau_s={tau_s}"
            )));
        }
        let fan_in = weights.cols();
        Ok(DoubleExpLIFLayer {
            m: vec![0.0; fan_in],
            i_syn: vec![0.0; fan_in],
            steps: 0,
            weights,
            tau_m,
            tau_s,
            v_th,
            k0,
        })
    }

    pub fn classes(&self) -> usize {
        self.weights.rows()
    }

    pub fn fan_in(&self) -> usize {
        self.weights.cols()
    }

    pub fn reset(&mut self) {
        self.m.iter_mut().for_each(|v| *v = 0.0);
        self.i_syn.iter_mut().for_each(|v| *v = 0.0);
        self.steps = 0;
    }

    /// Number of lif_step calls since the last reset. ttfs_decode exposes this
    /// so its early exit is observable.
    pub fn steps_executed(&self) -> usize {
        self.steps
    }

    /// PSP kernel values K = K_0 * (m - I) at the current state.
    pub fn kernel_trace(&self) -> Vec<f64> {
        self.m
            .iter()
            .zip(self.i_syn.iter())
            .map(|(&m, &i)| self.k0 * (m - i))
            .collect()
    }

    /// One readout timestep: decay-and-add traces, form the kernel,
    /// read out v = W*K, fire where v >= v_th.
    pub fn lif_step(&mut self, input_counts: &[f64]) -> Result<(Vec<f64>, Vec<bool>)> {
        if input_counts.len() != self.fan_in() {
            return Err(CoreError::Dimension(format!(
                "lif input {} vs fan-in {}",
                input_counts.len(),
                self.fan_in()
            )));
        }
        if input_counts.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::Numeric("non-finite lif input".into()));
        }
        let dm = (-1.0 / self.tau_m).exp();
        let ds = (-1.0 / self.tau_s).exp();
        for j in 0..self.fan_in() {
            self.m[j] = dm * (self.m[j] + input_counts[j]);
            self.i_syn[j] = ds * (self.i_syn[j] + input_counts[j]);
        }
        self.steps += 1;
        let k = self.kernel_trace();
        let v = self.weights.matvec(&k)?;
        let fired = v.iter().map(|&x| x >= self.v_th).collect();
        Ok((v, fired))
    }
}

/// Unroll a stack of burst layers over t = 1..=T with direct-coded input:
/// the analog input current is injected identically at every timestep, all
/// state starts at zero. Returns the full spike history, one train per layer.
pub fn run_window(
    layers: &mut [BurstingIFLayer],
    input: &[f64],
    t_window: usize,
) -> Result<Vec<SpikeTrain>> {
    if t_window == 0 {
        return Err(CoreError::Config("window length must be >= 1".into()));
    }
    if layers.is_empty() {
        return Err(CoreError::Config("empty layer stack".into()));
    }
    for l in layers.iter_mut() {
        l.reset();
    }
    let mut trains: Vec<SpikeTrain> = layers
        .iter()
        .map(|l| SpikeTrain::new(l.out_dim(), t_window))
        .collect();
    for t in 0..t_window {
        let mut carry: Vec<f64> = input.to_vec();
        for (li, layer) in layers.iter_mut().enumerate() {
            let spikes = layer.burst_step(&carry)?;
            carry = spikes.iter().map(|&s| s as f64).collect();
            for (n, &s) in spikes.iter().enumerate() {
                trains[li].set_count(n, t, s);
            }
        }
    }
    Ok(trains)
}

/// Spike history of a batched window run: per layer, per timestep, a
/// [batch x neurons] matrix of spike counts stored as f64 (exact small ints).
pub struct BatchHistory {
    pub t_window: usize,
    pub per_layer: Vec<Vec<Tensor>>,
}

impl BatchHistory {
    pub fn layers(&self) -> usize {
        self.per_layer.len()
    }

    /// Extract one sample's train for a layer (for per-sample consumers).
    pub fn train(&self, layer: usize, sample: usize) -> SpikeTrain {
        let steps = &self.per_layer[layer];
        let neurons = steps[0].cols();
        let mut train = SpikeTrain::new(neurons, self.t_window);
        for (t, mat) in steps.iter().enumerate() {
            for n in 0..neurons {
                train.set_count(n, t, mat.at(sample, n) as u8);
            }
        }
        train
    }

    /// c(T)/T firing rates of a layer as a [batch x neurons] tensor.
    pub fn rates(&self, layer: usize) -> Tensor {
        let steps = &self.per_layer[layer];
        let mut acc = Tensor::zeros(&[steps[0].rows(), steps[0].cols()]);
        for mat in steps {
            acc.add_scaled(mat, 1.0);
        }
        acc.scale(1.0 / self.t_window as f64);
        acc
    }
}

/// Batched equivalent of run_window over input rows [batch x features].
/// `deletion` zeroes each (sample, neuron, timestep) output independently with
/// the given probability, modeling neuronal noise during the forward pass.
pub fn run_window_batch_with(
    layers: &[BurstingIFLayer],
    input: &Tensor,
    t_window: usize,
    mut deletion: Option<(f64, &mut ChaCha8Rng)>,
) -> Result<BatchHistory> {
    if t_window == 0 {
        return Err(CoreError::Config("window length must be >= 1".into()));
    }
    if layers.is_empty() {
        return Err(CoreError::Config("empty layer stack".into()));
    }
    let batch = input.rows();
    let wts: Vec<Tensor> = layers.iter().map(|l| l.weights.transpose()).collect();

    // Direct coding: the first layer's input current is the same every
    // timestep, so compute it once.
    let mut static_current = input.matmul(&wts[0])?;
    if let Some(b) = &layers[0].bias {
        for row in 0..batch {
            for (c, &bv) in static_current.row_mut(row).iter_mut().zip(b.iter()) {
                *c += bv;
            }
        }
    }

    let mut states: Vec<Tensor> = layers
        .iter()
        .map(|l| Tensor::zeros(&[batch, l.out_dim()]))
        .collect();
    let mut history: Vec<Vec<Tensor>> = layers.iter().map(|_| Vec::with_capacity(t_window)).collect();

    for _t in 0..t_window {
        let mut carry: Option<Tensor> = None;
        for (li, layer) in layers.iter().enumerate() {
            let current = if li == 0 {
                static_current.clone()
            } else {
                let mut cur = carry
                    .as_ref()
                    .expect("carry set after first layer")
                    .matmul(&wts[li])?;
                if let Some(b) = &layer.bias {
                    for row in 0..batch {
                        for (c, &bv) in cur.row_mut(row).iter_mut().zip(b.iter()) {
                            *c += bv;
                        }
                    }
                }
                cur
            };
            let state = &mut states[li];
            let mut spikes = Tensor::zeros(&[batch, layer.out_dim()]);
            for i in 0..state.len() {
                let v = state.data()[i] + current.data()[i];
                if !v.is_finite() {
                    return Err(CoreError::Numeric("non-finite membrane potential".into()));
                }
                let s = burst_fire(v, layer.v_th, layer.gamma);
                state.data_mut()[i] = v - s as f64 * layer.v_th;
                spikes.data_mut()[i] = s as f64;
            }
            if let Some((rate, rng)) = deletion.as_mut() {
                for sv in spikes.data_mut().iter_mut() {
                    if rng.gen::<f64>() < *rate {
                        *sv = 0.0;
                    }
                }
            }
            history[li].push(spikes.clone());
            carry = Some(spikes);
        }
    }
    Ok(BatchHistory {
        t_window,
        per_layer: history,
    })
}

pub fn run_window_batch(
    layers: &[BurstingIFLayer],
    input: &Tensor,
    t_window: usize,
) -> Result<BatchHistory> {
    run_window_batch_with(layers, input, t_window, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity_layer(n: usize, v_th: f64, gamma: u32) -> BurstingIFLayer {
        let mut w = Tensor::zeros(&[n, n]);
        for i in 0..n {
            *w.at_mut(i, i) = 1.0;
        }
        BurstingIFLayer::new(w, None, v_th, gamma).unwrap()
    }

    #[test]
    fn burst_step_worked_examples() {
        // each case: (v0, input current, expected spikes, expected v after)
        let cases = [
            (0.4, 0.3, 0u8, 0.7),
            (0.2, 3.4, 3, 0.6),
            (0.0, 7.2, 5, 2.2),
            (0.5, -1.0, 0, -0.5),
        ];
        for (v0, i, s_want, v_want) in cases {
            let mut layer = identity_layer(1, 1.0, 5);
            layer.v[0] = v0;
            let s = layer.burst_step(&[i]).unwrap();
            assert_eq!(s[0], s_want, "v0={v0} i={i}");
            assert!((layer.v[0] - v_want).abs() < 1e-12, "v0={v0} i={i} -> v={}", layer.v[0]);
        }
    }

    #[test]
    fn conservation_is_exact_in_floating_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let v0 = (rng.gen::<f64>() - 0.3) * 10.0;
            let i = (rng.gen::<f64>() - 0.5) * 12.0;
            let v_th = 0.25 + rng.gen::<f64>() * 3.0;
            let gamma = rng.gen_range(1..=10u32);
            let mut layer = identity_layer(1, v_th, gamma);
            layer.v[0] = v0;
            let s = layer.burst_step(&[i]).unwrap()[0];
            assert!(s as u32 <= gamma);
            let expect = (v0 + i) - s as f64 * v_th;
            assert_eq!(layer.v[0].to_bits(), expect.to_bits());
        }
    }

    #[test]
    fn lif_single_spike_closed_form() {
        let w = Tensor::from_vec(&[1, 1], vec![1.0]).unwrap();
        let mut lif = DoubleExpLIFLayer::new(w, 2.0, 0.5, 1.0, 1.0).unwrap();
        let (_, _) = lif.lif_step(&[1.0]).unwrap();
        let m1 = (-0.5f64).exp();
        let i1 = (-2.0f64).exp();
        assert!((lif.m[0] - m1).abs() < 1e-12);
        assert!((lif.i_syn[0] - i1).abs() < 1e-12);
        assert!((lif.kernel_trace()[0] - (m1 - i1)).abs() < 1e-12);
        // decay with no further input
        let (v2, _) = lif.lif_step(&[0.0]).unwrap();
        let m2 = (-1.0f64).exp();
        let i2 = (-4.0f64).exp();
        assert!((v2[0] - (m2 - i2)).abs() < 1e-12);
    }

    #[test]
    fn lif_traces_match_direct_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w = Tensor::from_vec(&[1, 3], vec![0.3, -0.2, 0.5]).unwrap();
        let mut lif = DoubleExpLIFLayer::new(w, 2.0, 0.5, 1.0, 1.3).unwrap();
        let t_max = 32;
        let mut inputs = Vec::new();
        for _ in 0..t_max {
            let col: Vec<f64> = (0..3).map(|_| rng.gen_range(0..4) as f64).collect();
            inputs.push(col);
        }
        for (step, col) in inputs.iter().enumerate() {
            lif.lif_step(col).unwrap();
            let t = step + 1;
            for j in 0..3 {
                // m(t) = sum_{t'<=t} exp(-(t - t' + 1)/tau_m) * s(t')
                let oracle: f64 = (1..=t)
                    .map(|tp| (-((t - tp + 1) as f64) / 2.0).exp() * inputs[tp - 1][j])
                    .sum();
                assert!(
                    (lif.m[j] - oracle).abs() < 1e-10,
                    "t={t} j={j}: {} vs {oracle}",
                    lif.m[j]
                );
            }
        }
    }

    #[test]
    fn lif_is_linear_in_input() {
        let w = Tensor::from_vec(&[1, 1], vec![1.0]).unwrap();
        let mut one = DoubleExpLIFLayer::new(w.clone(), 2.0, 0.5, 1.0, 1.0).unwrap();
        let mut two = DoubleExpLIFLayer::new(w, 2.0, 0.5, 1.0, 1.0).unwrap();
        let (v1, _) = one.lif_step(&[1.0]).unwrap();
        let (v2, _) = two.lif_step(&[2.0]).unwrap();
        assert!((v2[0] - 2.0 * v1[0]).abs() < 1e-12);
    }

    #[test]
    fn lif_rejects_bad_taus() {
        let w = Tensor::from_vec(&[1, 1], vec![1.0]).unwrap();
        assert!(DoubleExpLIFLayer::new(w, 0.5, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn k0_default_constants() {
        // tau_m=2, tau_s=0.5: kernel peak is at t=1, value exp(-0.5)-exp(-2)
        let k0 = kernel_k0(1.0, 2.0, 0.5, 8).unwrap();
        let peak = (-0.5f64).exp() - (-2.0f64).exp();
        assert!((k0 - 1.0 / peak).abs() < 1e-12);
        assert!((k0 - 2.12226).abs() < 1e-4);
    }

    #[test]
    fn run_window_t1_is_one_step_per_layer() {
        let mut stack = vec![identity_layer(2, 1.0, 5), identity_layer(2, 1.0, 5)];
        let trains = run_window(&mut stack, &[2.3, 0.4], 1).unwrap();
        assert_eq!(trains.len(), 2);
        assert_eq!(trains[0].count(0, 0), 2);
        assert_eq!(trains[0].count(1, 0), 0);
        assert_eq!(trains[1].count(0, 0), 2);
    }

    #[test]
    fn weak_inputs_make_gamma_irrelevant() {
        // inputs never push v past 2*v_th in a step, so Gamma=1 == Gamma=5
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let w = Tensor::randn(&[3, 3], 0.2, &mut rng);
            let x: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() * 0.8).collect();
            let mut a = vec![BurstingIFLayer::new(w.clone(), None, 1.0, 1).unwrap()];
            let mut b = vec![BurstingIFLayer::new(w.clone(), None, 1.0, 5).unwrap()];
            let ta = run_window(&mut a, &x, 4).unwrap();
            let tb = run_window(&mut b, &x, 4).unwrap();
            assert_eq!(ta[0], tb[0]);
        }
    }

    #[test]
    fn spike_totals_bounded_by_gamma_t() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let w = Tensor::randn(&[4, 4], 2.0, &mut rng);
        let mut stack = vec![BurstingIFLayer::new(w, None, 1.0, 3).unwrap()];
        let x: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() * 5.0).collect();
        let trains = run_window(&mut stack, &x, 6).unwrap();
        for &total in trains[0].totals().iter() {
            assert!(total <= 3 * 6);
        }
        assert!(trains[0].max_count() <= 3);
    }

    #[test]
    fn batched_runner_matches_single_sample_path_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..10 {
            let w1 = Tensor::randn(&[5, 4], 0.8, &mut rng);
            let w2 = Tensor::randn(&[3, 5], 0.8, &mut rng);
            let b1: Vec<f64> = (0..5).map(|_| rng.gen::<f64>() * 0.2).collect();
            let layers = vec![
                BurstingIFLayer::new(w1.clone(), Some(b1.clone()), 1.0, 5).unwrap(),
                BurstingIFLayer::new(w2.clone(), None, 1.0, 5).unwrap(),
            ];
            let batch = 7;
            let mut input = Tensor::zeros(&[batch, 4]);
            for v in input.data_mut() {
                // sprinkle exact zeros to exercise the sparse skip
                *v = if rng.gen::<f64>() < 0.3 {
                    0.0
                } else {
                    rng.gen::<f64>() * 2.0
                };
            }
            let hist = run_window_batch(&layers, &input, 6).unwrap();
            for s in 0..batch {
                let mut single = vec![
                    BurstingIFLayer::new(w1.clone(), Some(b1.clone()), 1.0, 5).unwrap(),
                    BurstingIFLayer::new(w2.clone(), None, 1.0, 5).unwrap(),
                ];
                let trains = run_window(&mut single, input.row(s), 6).unwrap();
                for li in 0..2 {
                    assert_eq!(hist.train(li, s), trains[li], "sample {s} layer {li}");
                }
            }
        }
    }

    #[test]
    fn deletion_rate_one_silences_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let w = Tensor::randn(&[4, 4], 2.0, &mut rng);
        let layers = vec![BurstingIFLayer::new(w, None, 1.0, 5).unwrap()];
        let input = Tensor::from_vec(&[2, 4], vec![3.0; 8]).unwrap();
        let mut noise = ChaCha8Rng::seed_from_u64(1);
        let hist = run_window_batch_with(&layers, &input, 4, Some((1.0, &mut noise))).unwrap();
        for t in 0..4 {
            assert!(hist.per_layer[0][t].data().iter().all(|&v| v == 0.0));
        }
    }
}
