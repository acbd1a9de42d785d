//! Training for the time-to-first-spike output layer. The hidden stack is
//! frozen; only the output weights move. The loss couples a cross-entropy
//! term on the potentials at the first spike time with a depression term
//! that pushes non-target potentials below threshold, weighted by how much
//! accuracy is currently lost by deciding early.

use crate::coding::argmax;
use crate::data::Dataset;
use crate::error::{CoreError, Result};
use crate::neurons::{kernel_k0, run_window_batch, BurstingIFLayer, DoubleExpLIFLayer};
use crate::optim::{LrSchedule, OptimKind, Optimizer};
use crate::tensor::Tensor;
use rand::Rng;

/// Cross-entropy of softmax(potentials) against the target class,
/// computed through log-sum-exp for stability.
pub fn loss_l1(potentials: &[f64], target: usize) -> f64 {
    let max = potentials.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let logsum = max + potentials.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    logsum - potentials[target]
}

/// Depression loss: theta * sum over non-target classes of (v_i - v_th).
/// Terms below threshold are negative by design; they reward margin rather
/// than being clamped away.
pub fn loss_l2(potentials: &[f64], target: usize, theta: f64, v_th: f64) -> f64 {
    let sum: f64 = potentials
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target)
        .map(|(_, &v)| v - v_th)
        .sum();
    theta * sum
}

/// Accuracy bookkeeping for the theta schedule.
#[derive(Debug, Clone, Copy)]
pub struct ThetaState {
    pub acc_tf: f64,
    pub acc_t: f64,
    pub theta: f64,
}

impl ThetaState {
    pub fn initial() -> ThetaState {
        ThetaState {
            acc_tf: 0.0,
            acc_t: 0.0,
            theta: 0.0,
        }
    }
}

/// theta = max(1 - acc_tf / acc_T, 0). A zero last-timestep accuracy is a
/// degenerate classifier; theta collapses to 0 and a warning is emitted.
pub fn update_theta(state: ThetaState, eval_acc_tf: f64, eval_acc_t: f64) -> ThetaState {
    let _ = state;
    let theta = if eval_acc_t > 0.0 {
        (1.0 - eval_acc_tf / eval_acc_t).max(0.0)
    } else {
        eprintln!("warning: last-timestep accuracy is zero, forcing theta to 0");
        0.0
    };
    ThetaState {
        acc_tf: eval_acc_tf,
        acc_t: eval_acc_t,
        theta,
    }
}

/// Frozen hidden spike counts for a whole split, stored as compact u8 slabs
/// (one [samples x neurons] matrix per timestep).
pub struct HiddenCache {
    pub t_window: usize,
    pub neurons: usize,
    pub samples: usize,
    per_t: Vec<Vec<u8>>,
}

impl HiddenCache {
    /// Spike counts for a batch of sample indices, one [batch x neurons]
    /// tensor per timestep.
    pub fn batch_steps(&self, idx: &[usize]) -> Vec<Tensor> {
        let mut steps = Vec::with_capacity(self.t_window);
        for slab in &self.per_t {
            let mut data = Vec::with_capacity(idx.len() * self.neurons);
            for &s in idx {
                let row = &slab[s * self.neurons..(s + 1) * self.neurons];
                data.extend(row.iter().map(|&c| c as f64));
            }
            steps.push(Tensor::from_vec(&[idx.len(), self.neurons], data).expect("shape"));
        }
        steps
    }

    pub fn total_spikes(&self) -> u64 {
        self.per_t
            .iter()
            .map(|slab| slab.iter().map(|&c| c as u64).sum::<u64>())
            .sum()
    }

    /// Build from raw per-timestep count matrices (values must fit in u8).
    pub fn from_steps(steps: &[Tensor]) -> Result<HiddenCache> {
        if steps.is_empty() {
            return Err(CoreError::Data("empty step list".into()));
        }
        let samples = steps[0].rows();
        let neurons = steps[0].cols();
        let mut per_t = Vec::with_capacity(steps.len());
        for s in steps {
            per_t.push(s.data().iter().map(|&v| v as u8).collect());
        }
        Ok(HiddenCache {
            t_window: steps.len(),
            neurons,
            samples,
            per_t,
        })
    }
}

/// Run the frozen hidden stack over a dataset in chunks and keep only the
/// last layer's spike counts.
pub fn cache_hidden_counts(
    stack: &[BurstingIFLayer],
    ds: &Dataset,
    t_window: usize,
    chunk: usize,
) -> Result<HiddenCache> {
    if ds.is_empty() {
        return Err(CoreError::Data("empty dataset".into()));
    }
    let neurons = stack.last().expect("nonempty stack").out_dim();
    let mut per_t: Vec<Vec<u8>> = vec![Vec::with_capacity(ds.len() * neurons); t_window];
    let idx: Vec<usize> = (0..ds.len()).collect();
    for piece in idx.chunks(chunk.max(1)) {
        let (x, _) = ds.batch(piece);
        let history = run_window_batch(stack, &x, t_window)?;
        let last = history.per_layer.last().expect("nonempty history");
        for (t, mat) in last.iter().enumerate() {
            per_t[t].extend(mat.data().iter().map(|&v| v as u8));
        }
    }
    Ok(HiddenCache {
        t_window,
        neurons,
        samples: ds.len(),
        per_t,
    })
}

/// Result of a batched output-layer window pass.
pub struct TTFSForward {
    /// First spike time per sample, 1..=T; T when nothing fired.
    pub t_f: Vec<usize>,
    pub fired_any: Vec<bool>,
    pub v_at_tf: Tensor, // [batch x classes]
    pub k_at_tf: Tensor, // [batch x hidden]
    pub v_at_last: Tensor,
    pub predicted_tf: Vec<usize>,
    pub predicted_last: Vec<usize>,
}

/// Drive the output layer over a window of hidden counts for a whole batch.
/// Matches the per-sample lif_step trajectory bit for bit: the layer has no
/// membrane carry-over, potentials are a pure readout of the input traces.
pub fn ttfs_forward_batch(
    layer: &DoubleExpLIFLayer,
    hidden_steps: &[Tensor],
) -> Result<TTFSForward> {
    if hidden_steps.is_empty() {
        return Err(CoreError::Config("window length must be >= 1".into()));
    }
    let batch = hidden_steps[0].rows();
    let hidden = hidden_steps[0].cols();
    if hidden != layer.fan_in() {
        return Err(CoreError::Dimension(format!(
            "hidden width {hidden} vs layer fan-in {}",
            layer.fan_in()
        )));
    }
    let t_window = hidden_steps.len();
    let classes = layer.classes();
    let wt = layer.weights.transpose();
    let dm = (-1.0 / layer.tau_m).exp();
    let ds = (-1.0 / layer.tau_s).exp();

    let mut m = Tensor::zeros(&[batch, hidden]);
    let mut i_syn = Tensor::zeros(&[batch, hidden]);
    let mut t_f = vec![t_window; batch];
    let mut fired_any = vec![false; batch];
    let mut v_at_tf = Tensor::zeros(&[batch, classes]);
    let mut k_at_tf = Tensor::zeros(&[batch, hidden]);
    let mut v_at_last = Tensor::zeros(&[batch, classes]);

    for (t, s_in) in hidden_steps.iter().enumerate() {
        for ((mv, iv), &sv) in m
            .data_mut()
            .iter_mut()
            .zip(i_syn.data_mut().iter_mut())
            .zip(s_in.data().iter())
        {
            *mv = dm * (*mv + sv);
            *iv = ds * (*iv + sv);
        }
        let mut k = Tensor::zeros(&[batch, hidden]);
        for ((kv, &mv), &iv) in k
            .data_mut()
            .iter_mut()
            .zip(m.data().iter())
            .zip(i_syn.data().iter())
        {
            *kv = layer.k0 * (mv - iv);
        }
        let v = k.matmul(&wt)?;
        for b in 0..batch {
            if !fired_any[b] {
                let row = v.row(b);
                if row.iter().any(|&x| x >= layer.v_th) {
                    fired_any[b] = true;
                    t_f[b] = t + 1;
                    v_at_tf.row_mut(b).copy_from_slice(row);
                    k_at_tf.row_mut(b).copy_from_slice(k.row(b));
                }
            }
        }
        if t + 1 == t_window {
            v_at_last = v.clone();
            for b in 0..batch {
                if !fired_any[b] {
                    v_at_tf.row_mut(b).copy_from_slice(v.row(b));
                    k_at_tf.row_mut(b).copy_from_slice(k.row(b));
                }
            }
        }
    }
    let predicted_tf = (0..batch).map(|b| argmax(v_at_tf.row(b))).collect();
    let predicted_last = (0..batch).map(|b| argmax(v_at_last.row(b))).collect();
    Ok(TTFSForward {
        t_f,
        fired_any,
        v_at_tf,
        k_at_tf,
        v_at_last,
        predicted_tf,
        predicted_last,
    })
}

/// Set v_th to the mean over samples and output neurons of the per-run peak
/// potential, measured with the kernel amplitude normalized to 1, then
/// recompute K_0 from the calibrated threshold.
pub fn calibrate_output_threshold(
    layer: &mut DoubleExpLIFLayer,
    cache: &HiddenCache,
    batch: usize,
) -> Result<f64> {
    let mut probe = layer.clone();
    probe.k0 = 1.0;
    probe.v_th = f64::INFINITY; // never fires during the measurement pass
    let idx: Vec<usize> = (0..cache.samples).collect();
    let mut total = 0.0;
    let mut count = 0usize;
    let mut any_nonzero = false;
    for piece in idx.chunks(batch.max(1)) {
        let steps = cache.batch_steps(piece);
        let maxima = per_sample_peak_potentials(&probe, &steps)?;
        for &v in maxima.data() {
            if v != 0.0 {
                any_nonzero = true;
            }
            total += v;
            count += 1;
        }
    }
    if !any_nonzero {
        return Err(CoreError::Calibration(
            "all output potentials are zero on the calibration set".into(),
        ));
    }
    let v_th = total / count as f64;
    if !(v_th > 0.0) {
        return Err(CoreError::Calibration(format!(
            "mean peak potential {v_th} is not positive"
        )));
    }
    layer.v_th = v_th;
    layer.k0 = kernel_k0(v_th, layer.tau_m, layer.tau_s, cache.t_window)?;
    Ok(v_th)
}

/// Per-sample, per-neuron max over the window of the readout potential for
/// the given layer parameters. [batch x classes].
fn per_sample_peak_potentials(
    layer: &DoubleExpLIFLayer,
    hidden_steps: &[Tensor],
) -> Result<Tensor> {
    let batch = hidden_steps[0].rows();
    let hidden = hidden_steps[0].cols();
    let classes = layer.classes();
    let wt = layer.weights.transpose();
    let dm = (-1.0 / layer.tau_m).exp();
    let ds = (-1.0 / layer.tau_s).exp();
    let mut m = Tensor::zeros(&[batch, hidden]);
    let mut i_syn = Tensor::zeros(&[batch, hidden]);
    let mut peak = Tensor::zeros(&[batch, classes]);
    let mut first = true;
    for s_in in hidden_steps {
        for ((mv, iv), &sv) in m
            .data_mut()
            .iter_mut()
            .zip(i_syn.data_mut().iter_mut())
            .zip(s_in.data().iter())
        {
            *mv = dm * (*mv + sv);
            *iv = ds * (*iv + sv);
        }
        let mut k = Tensor::zeros(&[batch, hidden]);
        for ((kv, &mv), &iv) in k
            .data_mut()
            .iter_mut()
            .zip(m.data().iter())
            .zip(i_syn.data().iter())
        {
            *kv = layer.k0 * (mv - iv);
        }
        let v = k.matmul(&wt)?;
        if first {
            peak = v;
            first = false;
        } else {
            for (pv, &vv) in peak.data_mut().iter_mut().zip(v.data().iter()) {
                if vv > *pv {
                    *pv = vv;
                }
            }
        }
    }
    Ok(peak)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TTFSTrainConfig {
    pub alpha: f64,
    pub beta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub momentum: f64,
    /// Step-decay the learning rate every this many epochs (0 disables).
    pub lr_decay_every: usize,
    pub lr_decay_gamma: f64,
}

impl Default for TTFSTrainConfig {
    fn default() -> Self {
        TTFSTrainConfig {
            alpha: 2.0,
            beta: 2.0,
            epochs: 10,
            batch_size: 128,
            lr: 1e-3,
            momentum: 0.9,
            lr_decay_every: 0,
            lr_decay_gamma: 0.5,
        }
    }
}

impl TTFSTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha + self.beta > 0.0) {
            return Err(CoreError::Config(format!(
                "need alpha, beta >= 0 with alpha + beta > 0, got {} and {}",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

/// Evaluation of the output layer over a cached split.
pub struct TTFSEval {
    pub acc_tf: f64,
    pub acc_t: f64,
    pub mean_tf: f64,
    /// Mean cross-entropy at t_f.
    pub l1_mean: f64,
    /// Mean unscaled depression sum at t_f (multiply by theta for L2).
    pub l2_margin_mean: f64,
    pub t_f: Vec<usize>,
    pub correct_tf: Vec<bool>,
    pub fired_any: Vec<bool>,
    /// Class decided at t_f, one entry per sample.
    pub predicted: Vec<usize>,
}

pub fn evaluate_ttfs(
    layer: &DoubleExpLIFLayer,
    cache: &HiddenCache,
    labels: &[usize],
    batch: usize,
) -> Result<TTFSEval> {
    if labels.len() != cache.samples {
        return Err(CoreError::Dimension(format!(
            "{} labels for {} cached samples",
            labels.len(),
            cache.samples
        )));
    }
    let idx: Vec<usize> = (0..cache.samples).collect();
    let mut t_f = Vec::with_capacity(cache.samples);
    let mut correct_tf = Vec::with_capacity(cache.samples);
    let mut fired_any = Vec::with_capacity(cache.samples);
    let mut predicted = Vec::with_capacity(cache.samples);
    let mut correct_t = 0usize;
    let mut l1_sum = 0.0;
    let mut margin_sum = 0.0;
    for piece in idx.chunks(batch.max(1)) {
        let steps = cache.batch_steps(piece);
        let fwd = ttfs_forward_batch(layer, &steps)?;
        for (bi, &s) in piece.iter().enumerate() {
            let label = labels[s];
            t_f.push(fwd.t_f[bi]);
            fired_any.push(fwd.fired_any[bi]);
            predicted.push(fwd.predicted_tf[bi]);
            correct_tf.push(fwd.predicted_tf[bi] == label);
            if fwd.predicted_last[bi] == label {
                correct_t += 1;
            }
            l1_sum += loss_l1(fwd.v_at_tf.row(bi), label);
            margin_sum += loss_l2(fwd.v_at_tf.row(bi), label, 1.0, layer.v_th);
        }
    }
    let n = cache.samples as f64;
    Ok(TTFSEval {
        acc_tf: correct_tf.iter().filter(|&&c| c).count() as f64 / n,
        acc_t: correct_t as f64 / n,
        mean_tf: t_f.iter().sum::<usize>() as f64 / n,
        l1_mean: l1_sum / n,
        l2_margin_mean: margin_sum / n,
        t_f,
        correct_tf,
        fired_any,
        predicted,
    })
}

/// Gradient of the batch-mean dual loss with respect to the output weights,
/// taken at the fixed first-spike times of the forward pass.
fn output_gradient(
    fwd: &TTFSForward,
    labels: &[usize],
    cfg: &TTFSTrainConfig,
    theta: f64,
    v_th: f64,
) -> Result<(Tensor, f64, f64)> {
    let batch = labels.len();
    let classes = fwd.v_at_tf.cols();
    let mut dldv = Tensor::zeros(&[batch, classes]);
    let mut l1_sum = 0.0;
    let mut l2_sum = 0.0;
    for b in 0..batch {
        let v = fwd.v_at_tf.row(b);
        let label = labels[b];
        l1_sum += loss_l1(v, label);
        l2_sum += loss_l2(v, label, theta, v_th);
        // softmax - onehot
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut exps: Vec<f64> = v.iter().map(|&x| (x - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        for e in exps.iter_mut() {
            *e /= sum;
        }
        let row = dldv.row_mut(b);
        for c in 0..classes {
            let mut g = cfg.alpha * (exps[c] - if c == label { 1.0 } else { 0.0 });
            if c != label {
                g += cfg.beta * theta;
            }
            row[c] = g / batch as f64;
        }
    }
    let d_weights = dldv.matmul_tn(&fwd.k_at_tf)?;
    Ok((d_weights, l1_sum / batch as f64, l2_sum / batch as f64))
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TTFSCurveRow {
    pub epoch: usize,
    pub acc_tf: f64,
    pub acc_t: f64,
    pub mean_tf: f64,
    pub l1: f64,
    pub l2: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TTFSReport {
    pub curves: Vec<TTFSCurveRow>,
    pub final_acc_tf: f64,
    pub final_acc_t: f64,
    pub final_mean_tf: f64,
    pub final_theta: f64,
}

/// Train the output layer on cached hidden spikes. Theta is refreshed once
/// per epoch from the validation split; each curve row is the validation
/// state entering that epoch (the final row is post-training).
pub fn train_output_layer<R: Rng>(
    layer: &mut DoubleExpLIFLayer,
    train_cache: &HiddenCache,
    train_labels: &[usize],
    val_cache: &HiddenCache,
    val_labels: &[usize],
    cfg: &TTFSTrainConfig,
    rng: &mut R,
) -> Result<TTFSReport> {
    cfg.validate()?;
    if train_cache.total_spikes() == 0 {
        return Err(CoreError::Data(
            "hidden stack emits no spikes on any training sample, no decisions possible".into(),
        ));
    }
    let schedule = if cfg.lr_decay_every > 0 {
        LrSchedule::StepDecay {
            every: cfg.lr_decay_every,
            gamma: cfg.lr_decay_gamma,
        }
    } else {
        LrSchedule::Constant
    };
    let mut opt = Optimizer::new(OptimKind::sgd(cfg.momentum), 0.0, layer.weights.shape());
    let mut theta_state = ThetaState::initial();
    let mut curves = Vec::with_capacity(cfg.epochs + 1);

    for epoch in 0..cfg.epochs {
        let val = evaluate_ttfs(layer, val_cache, val_labels, cfg.batch_size)?;
        theta_state = update_theta(theta_state, val.acc_tf, val.acc_t);
        curves.push(TTFSCurveRow {
            epoch,
            acc_tf: val.acc_tf,
            acc_t: val.acc_t,
            mean_tf: val.mean_tf,
            l1: val.l1_mean,
            l2: theta_state.theta * val.l2_margin_mean,
            theta: theta_state.theta,
        });
        let lr = schedule.lr_at(cfg.lr, epoch);
        let order = crate::data::shuffle_indices(train_cache.samples, rng);
        for chunk in order.chunks(cfg.batch_size) {
            let steps = train_cache.batch_steps(chunk);
            let labels: Vec<usize> = chunk.iter().map(|&i| train_labels[i]).collect();
            let fwd = ttfs_forward_batch(layer, &steps)?;
            let (d_weights, _, _) =
                output_gradient(&fwd, &labels, cfg, theta_state.theta, layer.v_th)?;
            opt.step(&mut layer.weights, &d_weights, lr)?;
            if !layer.weights.all_finite() {
                return Err(CoreError::Diverged {
                    epoch,
                    detail: "output weights became non-finite".into(),
                });
            }
        }
    }
    let val = evaluate_ttfs(layer, val_cache, val_labels, cfg.batch_size)?;
    theta_state = update_theta(theta_state, val.acc_tf, val.acc_t);
    curves.push(TTFSCurveRow {
        epoch: cfg.epochs,
        acc_tf: val.acc_tf,
        acc_t: val.acc_t,
        mean_tf: val.mean_tf,
        l1: val.l1_mean,
        l2: theta_state.theta * val.l2_margin_mean,
        theta: theta_state.theta,
    });
    Ok(TTFSReport {
        final_acc_tf: val.acc_tf,
        final_acc_t: val.acc_t,
        final_mean_tf: val.mean_tf,
        final_theta: theta_state.theta,
        curves,
    })
}

/// Accuracy-latency trade-off: (reference accuracy - ttfs accuracy) * mean
/// inference steps. Lower is better on both axes.
pub fn trade_off(reference_acc: f64, ttfs_acc: f64, mean_tf: f64) -> f64 {
    (reference_acc - ttfs_acc) * mean_tf
}

/// Per-timestep decision tallies: (t, decided correct, decided wrong).
pub fn decision_histogram(
    t_f: &[usize],
    correct: &[bool],
    t_window: usize,
) -> Vec<(usize, usize, usize)> {
    let mut rows: Vec<(usize, usize, usize)> = (1..=t_window).map(|t| (t, 0, 0)).collect();
    for (&t, &c) in t_f.iter().zip(correct.iter()) {
        let slot = t.clamp(1, t_window) - 1;
        if c {
            rows[slot].1 += 1;
        } else {
            rows[slot].2 += 1;
        }
    }
    rows
}
