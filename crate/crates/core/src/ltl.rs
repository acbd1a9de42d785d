//! Layer-to-layer distillation for bursting hidden layers. Each student
//! layer is regressed onto the matching teacher activation: the loss compares
//! the teacher's post-ReLU output with r * c(T)/T, where c(T) is the
//! student's accumulated spike count over the window. Gradients flow through
//! the membrane recursion with a unit pseudo-derivative for the spike
//! function, giving one delta per timestep and a rank-1 weight update per
//! (timestep, sample).

use crate::data::Dataset;
use crate::error::{CoreError, Result};
use crate::neurons::{run_window_batch, BatchHistory, BurstingIFLayer};
use crate::optim::{LrSchedule, OptimKind, Optimizer};
use crate::teacher::{TeacherLayer, TeacherNetwork};
use crate::tensor::Tensor;
use rand::Rng;

/// What a layer saw during a window run. Static inputs are injected
/// identically at every timestep (direct coding); per-step inputs are the
/// spike counts of the upstream layer.
#[derive(Debug, Clone)]
pub enum TapeInput {
    Static(Tensor),       // [batch x fan_in]
    PerStep(Vec<Tensor>), // t_window entries of [batch x fan_in]
}

impl TapeInput {
    pub fn at_step(&self, t: usize) -> &Tensor {
        match self {
            TapeInput::Static(x) => x,
            TapeInput::PerStep(steps) => &steps[t],
        }
    }

    pub fn batch(&self) -> usize {
        match self {
            TapeInput::Static(x) => x.rows(),
            TapeInput::PerStep(steps) => steps[0].rows(),
        }
    }
}

/// Everything the backward pass needs from one layer's forward window.
#[derive(Debug, Clone)]
pub struct LayerGradientTape {
    pub input: TapeInput,
    /// Per timestep, the layer's emitted spike counts [batch x neurons].
    pub outputs: Vec<Tensor>,
    pub v_th: f64,
    pub t_window: usize,
}

impl LayerGradientTape {
    /// Mean output rate c(T)/T per sample and neuron.
    pub fn mean_rates(&self) -> Tensor {
        let mut acc = Tensor::zeros(&[self.outputs[0].rows(), self.outputs[0].cols()]);
        for mat in &self.outputs {
            acc.add_scaled(mat, 1.0);
        }
        acc.scale(1.0 / self.t_window as f64);
        acc
    }
}

/// Build the tape for `layer` out of a batched window run. Layer 0 sees the
/// static input features; deeper layers see the upstream spike counts.
pub fn tape_from_history(
    history: &BatchHistory,
    layer: usize,
    features: &Tensor,
    v_th: f64,
) -> LayerGradientTape {
    let input = if layer == 0 {
        TapeInput::Static(features.clone())
    } else {
        TapeInput::PerStep(history.per_layer[layer - 1].clone())
    };
    LayerGradientTape {
        input,
        outputs: history.per_layer[layer].clone(),
        v_th,
        t_window: history.t_window,
    }
}

/// Forward pass with the spike function replaced by its linear surrogate
/// s = v / v_th (no flooring, no burst cap). Reset-by-subtraction then leaves
/// the membrane at exactly zero, so each step's output is just that step's
/// input current scaled by 1/v_th. Used by gradient checks: the distillation
/// backward pass is the exact gradient of this relaxed forward when v_th = 1.
pub fn surrogate_forward(
    weights: &Tensor,
    bias: Option<&[f64]>,
    input: &TapeInput,
    t_window: usize,
    v_th: f64,
) -> Result<LayerGradientTape> {
    if t_window == 0 {
        return Err(CoreError::Config("window length must be >= 1".into()));
    }
    let wt = weights.transpose();
    let mut outputs = Vec::with_capacity(t_window);
    for t in 0..t_window {
        let mut current = input.at_step(t).matmul(&wt)?;
        if let Some(b) = bias {
            for row in 0..current.rows() {
                for (cv, &bv) in current.row_mut(row).iter_mut().zip(b.iter()) {
                    *cv += bv;
                }
            }
        }
        current.scale(1.0 / v_th);
        outputs.push(current);
    }
    Ok(LayerGradientTape {
        input: input.clone(),
        outputs,
        v_th,
        t_window,
    })
}

/// Distillation loss: mean over the batch of the summed squared difference
/// between teacher activations and r * c(T)/T.
pub fn ltl_loss(targets: &Tensor, mean_rates: &Tensor, r: f64) -> Result<f64> {
    if targets.shape() != mean_rates.shape() {
        return Err(CoreError::Dimension(format!(
            "targets {:?} vs rates {:?}",
            targets.shape(),
            mean_rates.shape()
        )));
    }
    let mut total = 0.0;
    for (&y, &c) in targets.data().iter().zip(mean_rates.data().iter()) {
        let d = y - r * c;
        total += d * d;
    }
    Ok(total / targets.rows() as f64)
}

#[derive(Debug, Clone)]
pub struct LTLGrads {
    pub d_weights: Tensor,
    pub d_bias: Vec<f64>,
}

/// Backward pass through the window. The output-side error
/// g = -(2/T)(target - r * c/T), scaled by the batch size (and by r when
/// `scale_delta_by_r`, the chain-rule factor of the rate scaling), seeds a
/// reverse recursion over timesteps:
///   delta(T) = g
///   delta(t) = -v_th * delta(t+1) + g          for t < T
/// and the membrane derivative collapses to
///   dL/dv(T) = delta(T),   dL/dv(t) = delta(t+1) + delta(t)  for t < T.
/// The weight gradient accumulates dL/dv(t) x input(t) over the window.
pub fn ltl_backward(
    tape: &LayerGradientTape,
    targets: &Tensor,
    r: f64,
    scale_delta_by_r: bool,
) -> Result<LTLGrads> {
    let t_window = tape.t_window;
    if tape.outputs.len() != t_window {
        return Err(CoreError::State(format!(
            "tape has {} output steps for window {}",
            tape.outputs.len(),
            t_window
        )));
    }
    let rates = tape.mean_rates();
    if targets.shape() != rates.shape() {
        return Err(CoreError::Dimension(format!(
            "targets {:?} vs layer output {:?}",
            targets.shape(),
            rates.shape()
        )));
    }
    let batch = tape.input.batch();
    let neurons = rates.cols();
    let fan_in = tape.input.at_step(0).cols();

    let mut g = Tensor::zeros(&[batch, neurons]);
    let chain = if scale_delta_by_r { r } else { 1.0 };
    let scale = -2.0 * chain / (t_window as f64 * batch as f64);
    for ((gv, &y), &c) in g
        .data_mut()
        .iter_mut()
        .zip(targets.data().iter())
        .zip(rates.data().iter())
    {
        *gv = scale * (y - r * c);
    }

    // dL/dv per timestep from the reverse recursion. delta_next holds
    // delta(t+1) while processing timestep t.
    let mut dldv: Vec<Tensor> = vec![Tensor::zeros(&[1, 1]); t_window];
    let mut delta_next = g.clone();
    dldv[t_window - 1] = g.clone();
    for t in (0..t_window.saturating_sub(1)).rev() {
        let mut delta_t = delta_next.clone();
        delta_t.scale(-tape.v_th);
        delta_t.add_scaled(&g, 1.0);
        let mut d = delta_next.clone();
        d.add_scaled(&delta_t, 1.0);
        dldv[t] = d;
        delta_next = delta_t;
    }

    let mut d_weights = Tensor::zeros(&[neurons, fan_in]);
    let mut d_bias = vec![0.0; neurons];
    match &tape.input {
        TapeInput::Static(x) => {
            // Same input every step: sum the per-step sensitivities first,
            // then take a single outer-product pass.
            let mut summed = Tensor::zeros(&[batch, neurons]);
            for d in &dldv {
                summed.add_scaled(d, 1.0);
            }
            d_weights = summed.matmul_tn(x)?;
            accumulate_bias(&mut d_bias, &summed);
        }
        TapeInput::PerStep(steps) => {
            for (d, s_in) in dldv.iter().zip(steps.iter()) {
                let dw = d.matmul_tn(s_in)?;
                d_weights.add_scaled(&dw, 1.0);
                accumulate_bias(&mut d_bias, d);
            }
        }
    }
    Ok(LTLGrads { d_weights, d_bias })
}

fn accumulate_bias(acc: &mut [f64], d: &Tensor) {
    for r in 0..d.rows() {
        for (a, &v) in acc.iter_mut().zip(d.row(r).iter()) {
            *a += v;
        }
    }
}

/// Copy a dense teacher into a bursting student stack. Teacher biases become
/// constant input currents. Conv teachers have no spiking counterpart here.
pub fn student_from_teacher(
    teacher: &TeacherNetwork,
    v_th: f64,
    gamma: u32,
) -> Result<Vec<BurstingIFLayer>> {
    let mut stack = Vec::with_capacity(teacher.hidden.len());
    for layer in &teacher.hidden {
        match layer {
            TeacherLayer::Dense { w, b } => {
                stack.push(BurstingIFLayer::new(
                    w.clone(),
                    Some(b.clone()),
                    v_th,
                    gamma,
                )?);
            }
            TeacherLayer::Conv2d { .. } => {
                return Err(CoreError::Config(
                    "spiking student supports dense teacher layers only".into(),
                ));
            }
        }
    }
    Ok(stack)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LTLConfig {
    pub t_window: usize,
    /// Rate scaling factor relating spike rates to activation amplitudes.
    pub r: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Halve the learning rate every this many epochs (0 disables).
    pub lr_halve_every: usize,
    /// Clamp teacher targets at r * gamma, the highest rate a bursting
    /// neuron can express.
    pub clip_targets: bool,
    /// Multiply the output-side delta by r (chain rule through the rate
    /// scaling). Disable to follow the unscaled error signal.
    pub scale_delta_by_r: bool,
    /// How many training samples to use for the per-epoch distillation
    /// error curve (0 disables monitoring).
    pub monitor_samples: usize,
}

impl Default for LTLConfig {
    fn default() -> Self {
        LTLConfig {
            t_window: 8,
            r: 1.0,
            epochs: 4,
            batch_size: 128,
            lr: 1e-4,
            lr_halve_every: 10,
            clip_targets: true,
            scale_delta_by_r: true,
            monitor_samples: 2000,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LTLCurvePoint {
    pub epoch: usize, // 0 = before any update for that layer
    pub layer: usize,
    pub normalized_mse: f64,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LTLReport {
    pub curves: Vec<LTLCurvePoint>,
    /// Final distillation error per layer, normalized by target power.
    pub final_mse: Vec<f64>,
}

fn monitor_mse(
    stack: &[BurstingIFLayer],
    teacher: &TeacherNetwork,
    train: &Dataset,
    layer: usize,
    cfg: &LTLConfig,
) -> Result<f64> {
    let n = cfg.monitor_samples.min(train.len());
    let idx: Vec<usize> = (0..n).collect();
    let mut err = 0.0;
    let mut power = 0.0;
    for chunk in idx.chunks(cfg.batch_size) {
        let (x, _) = train.batch(chunk);
        let snap = teacher.snapshot_activations(&x)?;
        let history = run_window_batch(&stack[..=layer], &x, cfg.t_window)?;
        let rates = history.rates(layer);
        let targets = clip_targets(&snap.activations[layer], cfg, stack[layer].gamma);
        for (&y, &c) in targets.data().iter().zip(rates.data().iter()) {
            let d = y - cfg.r * c;
            err += d * d;
            power += y * y;
        }
    }
    Ok(err / power.max(1e-12))
}

/// The highest rate a bursting neuron can express is gamma spikes per step,
/// so targets above r * gamma are unreachable and only distort the loss.
fn clip_targets(acts: &Tensor, cfg: &LTLConfig, gamma: u32) -> Tensor {
    let mut t = acts.clone();
    if cfg.clip_targets {
        let ceil = cfg.r * gamma as f64;
        for v in t.data_mut() {
            if *v > ceil {
                *v = ceil;
            }
        }
    }
    t
}

/// Train the bursting stack layer by layer against the teacher's
/// activations. Layers are trained shallowest first; each layer's input comes
/// from the already-trained prefix run in spike form.
pub fn train_hidden_stack<R: Rng>(
    stack: &mut [BurstingIFLayer],
    teacher: &TeacherNetwork,
    train: &Dataset,
    cfg: &LTLConfig,
    rng: &mut R,
) -> Result<LTLReport> {
    if stack.len() != teacher.hidden.len() {
        return Err(CoreError::Dimension(format!(
            "student has {} layers, teacher {}",
            stack.len(),
            teacher.hidden.len()
        )));
    }
    if train.is_empty() {
        return Err(CoreError::Data("empty training set".into()));
    }
    let schedule = if cfg.lr_halve_every > 0 {
        LrSchedule::StepDecay {
            every: cfg.lr_halve_every,
            gamma: 0.5,
        }
    } else {
        LrSchedule::Constant
    };

    let mut curves = Vec::new();
    for layer in 0..stack.len() {
        if cfg.monitor_samples > 0 {
            curves.push(LTLCurvePoint {
                epoch: 0,
                layer,
                normalized_mse: monitor_mse(stack, teacher, train, layer, cfg)?,
            });
        }
        let mut w_opt = Optimizer::new(OptimKind::adam(), 0.0, stack[layer].weights.shape());
        let bias_len = stack[layer].out_dim();
        let mut b_opt = Optimizer::new(OptimKind::adam(), 0.0, &[1, bias_len]);
        for epoch in 0..cfg.epochs {
            let lr = schedule.lr_at(cfg.lr, epoch);
            let order = crate::data::shuffle_indices(train.len(), rng);
            for chunk in order.chunks(cfg.batch_size) {
                let (x, _) = train.batch(chunk);
                let snap = teacher.snapshot_activations(&x)?;
                let targets = clip_targets(&snap.activations[layer], cfg, stack[layer].gamma);
                let history = run_window_batch(&stack[..=layer], &x, cfg.t_window)?;
                let tape = tape_from_history(&history, layer, &x, stack[layer].v_th);
                let grads = ltl_backward(&tape, &targets, cfg.r, cfg.scale_delta_by_r)?;
                w_opt.step(&mut stack[layer].weights, &grads.d_weights, lr)?;
                if let Some(bias) = stack[layer].bias.as_mut() {
                    step_bias(&mut b_opt, bias, &grads.d_bias, lr)?;
                }
                if !stack[layer].weights.all_finite() {
                    return Err(CoreError::Diverged {
                        epoch,
                        detail: format!("layer {layer} weights became non-finite"),
                    });
                }
            }
            if cfg.monitor_samples > 0 {
                curves.push(LTLCurvePoint {
                    epoch: epoch + 1,
                    layer,
                    normalized_mse: monitor_mse(stack, teacher, train, layer, cfg)?,
                });
            }
        }
    }
    let mut final_mse = Vec::with_capacity(stack.len());
    for layer in 0..stack.len() {
        final_mse.push(monitor_mse(stack, teacher, train, layer, cfg)?);
    }
    Ok(LTLReport { curves, final_mse })
}

fn step_bias(opt: &mut Optimizer, bias: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
    let mut b = Tensor::from_vec(&[1, bias.len()], bias.to_vec())?;
    let g = Tensor::from_vec(&[1, grad.len()], grad.to_vec())?;
    opt.step(&mut b, &g, lr)?;
    bias.copy_from_slice(b.data());
    Ok(())
}
