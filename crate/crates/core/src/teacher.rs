//! ReLU teacher networks (MLP or small CNN) trained with softmax
//! cross-entropy. The per-layer post-ReLU activations are the distillation
//! targets for LTL; the final linear classifier doubles as the student's
//! direct-decoding readout.

use crate::conv::{conv2d_backward, conv2d_forward, conv_out_dim};
use crate::error::{CoreError, Result};
use crate::optim::{LrSchedule, OptimKind, Optimizer};
use crate::tensor::Tensor;
use rand::Rng;

#[derive(Debug, Clone)]
pub enum TeacherLayer {
    Dense {
        w: Tensor, // [out, in]
        b: Vec<f64>,
    },
    Conv2d {
        kernels: Tensor, // [f, c, kh, kw]
        b: Vec<f64>,     // per output channel
        stride: usize,
        padding: usize,
        in_shape: [usize; 3], // [c, h, w]
    },
}

impl TeacherLayer {
    pub fn out_dim(&self) -> usize {
        match self {
            TeacherLayer::Dense { w, .. } => w.rows(),
            TeacherLayer::Conv2d {
                kernels,
                stride,
                padding,
                in_shape,
                ..
            } => {
                let f = kernels.shape()[0];
                let kh = kernels.shape()[2];
                let kw = kernels.shape()[3];
                let h = conv_out_dim(in_shape[1], kh, *stride, *padding).expect("validated");
                let w = conv_out_dim(in_shape[2], kw, *stride, *padding).expect("validated");
                f * h * w
            }
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            TeacherLayer::Dense { w, .. } => w.cols(),
            TeacherLayer::Conv2d { in_shape, .. } => in_shape.iter().product(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TeacherNetwork {
    pub hidden: Vec<TeacherLayer>,
    pub classifier_w: Tensor, // [classes, last hidden]
    pub classifier_b: Vec<f64>,
    /// Ceiling on every hidden activation (capped ReLU); infinite disables.
    /// Networks without batch normalization have no other handle on their
    /// activation range, and a bounded range is what keeps distillation
    /// targets inside the spiking rate budget Gamma * r.
    pub act_cap: f64,
}

/// Per-layer activations recorded during a forward pass.
#[derive(Debug, Clone)]
pub struct TeacherSnapshot {
    pub activations: Vec<Tensor>, // post-ReLU, [batch x out_dim] per hidden layer
    pub logits: Tensor,           // [batch x classes]
}

impl TeacherNetwork {
    /// He-initialized MLP: input -> hidden dims (ReLU each) -> linear classifier.
    pub fn new_mlp<R: Rng>(
        input_dim: usize,
        hidden_dims: &[usize],
        classes: usize,
        rng: &mut R,
    ) -> TeacherNetwork {
        let mut hidden = Vec::new();
        let mut fan_in = input_dim;
        for &h in hidden_dims {
            let std = (2.0 / fan_in as f64).sqrt();
            hidden.push(TeacherLayer::Dense {
                w: Tensor::randn(&[h, fan_in], std, rng),
                b: vec![0.0; h],
            });
            fan_in = h;
        }
        let std = (2.0 / fan_in as f64).sqrt();
        TeacherNetwork {
            hidden,
            classifier_w: Tensor::randn(&[classes, fan_in], std, rng),
            classifier_b: vec![0.0; classes],
            act_cap: f64::INFINITY,
        }
    }

    pub fn classes(&self) -> usize {
        self.classifier_w.rows()
    }

    fn layer_forward(layer: &TeacherLayer, x: &Tensor) -> Result<Tensor> {
        match layer {
            TeacherLayer::Dense { w, b } => {
                let mut z = x.matmul(&w.transpose())?;
                for row in 0..z.rows() {
                    for (zv, &bv) in z.row_mut(row).iter_mut().zip(b.iter()) {
                        *zv += bv;
                    }
                }
                Ok(z)
            }
            TeacherLayer::Conv2d {
                kernels,
                b,
                stride,
                padding,
                in_shape,
            } => {
                let batch = x.rows();
                let out_dim = layer.out_dim();
                let f = kernels.shape()[0];
                let plane = out_dim / f;
                let mut z = Tensor::zeros(&[batch, out_dim]);
                for s in 0..batch {
                    let img = Tensor::from_vec(in_shape, x.row(s).to_vec())?;
                    let y = conv2d_forward(&img, kernels, *stride, *padding)?;
                    let zr = z.row_mut(s);
                    for (i, &v) in y.data().iter().enumerate() {
                        zr[i] = v + b[i / plane];
                    }
                }
                Ok(z)
            }
        }
    }

    /// Forward pass recording every post-ReLU (and capped) hidden
    /// activation. Side-effect free: snapshotting twice gives identical
    /// tensors.
    pub fn snapshot_activations(&self, batch: &Tensor) -> Result<TeacherSnapshot> {
        let mut activations = Vec::with_capacity(self.hidden.len());
        let mut x = batch.clone();
        for layer in &self.hidden {
            let mut z = Self::layer_forward(layer, &x)?;
            for v in z.data_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                } else if *v > self.act_cap {
                    *v = self.act_cap;
                }
            }
            activations.push(z.clone());
            x = z;
        }
        let mut logits = x.matmul(&self.classifier_w.transpose())?;
        for row in 0..logits.rows() {
            for (lv, &bv) in logits.row_mut(row).iter_mut().zip(self.classifier_b.iter()) {
                *lv += bv;
            }
        }
        Ok(TeacherSnapshot {
            activations,
            logits,
        })
    }

    pub fn logits(&self, batch: &Tensor) -> Result<Tensor> {
        Ok(self.snapshot_activations(batch)?.logits)
    }
}

/// Numerically stable per-row softmax.
pub fn softmax_rows(logits: &Tensor) -> Tensor {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Mean cross-entropy of logits against integer labels.
pub fn cross_entropy_mean(logits: &Tensor, labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for r in 0..logits.rows() {
        let row = logits.row(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let logsum = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += logsum - row[labels[r]];
    }
    total / logits.rows() as f64
}

/// Fraction of rows whose argmax equals the label.
pub fn accuracy(logits: &Tensor, labels: &[usize]) -> f64 {
    let mut correct = 0usize;
    for r in 0..logits.rows() {
        if crate::coding::argmax(logits.row(r)) == labels[r] {
            correct += 1;
        }
    }
    correct as f64 / labels.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeacherConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub optimizer: OptimKind,
    pub weight_decay: f64,
    pub schedule: LrSchedule,
}

impl Default for TeacherConfig {
    fn default() -> Self {
        // SGD with momentum 0.9 and weight decay 5e-4, cosine schedule
        TeacherConfig {
            epochs: 6,
            batch_size: 128,
            lr: 0.1,
            optimizer: OptimKind::sgd(0.9),
            weight_decay: 5e-4,
            schedule: LrSchedule::Cosine { total: 6 },
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TeacherEpochStat {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_acc: Option<f64>,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TeacherReport {
    pub epoch_stats: Vec<TeacherEpochStat>,
    pub final_train_acc: f64,
    pub final_test_acc: Option<f64>,
}

struct LayerGrads {
    weights: Tensor,
    bias: Vec<f64>,
}

fn column_sums(t: &Tensor) -> Vec<f64> {
    let mut s = vec![0.0; t.cols()];
    for r in 0..t.rows() {
        for (acc, &v) in s.iter_mut().zip(t.row(r).iter()) {
            *acc += v;
        }
    }
    s
}

/// One forward/backward pass over a minibatch; returns (loss, correct count,
/// grads per hidden layer, classifier grads).
fn teacher_backward(
    net: &TeacherNetwork,
    x: &Tensor,
    labels: &[usize],
) -> Result<(f64, usize, Vec<LayerGrads>, LayerGrads)> {
    let snap = net.snapshot_activations(x)?;
    let batch = x.rows() as f64;
    let loss = cross_entropy_mean(&snap.logits, labels);
    let correct = (accuracy(&snap.logits, labels) * labels.len() as f64).round() as usize;

    // d loss / d logits = (softmax - onehot) / batch
    let mut dlogits = softmax_rows(&snap.logits);
    for (r, &label) in labels.iter().enumerate() {
        *dlogits.at_mut(r, label) -= 1.0;
    }
    dlogits.scale(1.0 / batch);

    let last_act = snap
        .activations
        .last()
        .cloned()
        .unwrap_or_else(|| x.clone());
    let cls_grads = LayerGrads {
        weights: dlogits.matmul_tn(&last_act)?,
        bias: column_sums(&dlogits),
    };

    let mut dh = dlogits.matmul(&net.classifier_w)?;
    let mut grads: Vec<LayerGrads> = Vec::with_capacity(net.hidden.len());
    for (li, layer) in net.hidden.iter().enumerate().rev() {
        // ReLU gate: gradient passes only through the linear region, so both
        // the zero floor and the cap block it
        let act = &snap.activations[li];
        let mut dz = dh.clone();
        for (g, &a) in dz.data_mut().iter_mut().zip(act.data().iter()) {
            if a <= 0.0 || a >= net.act_cap {
                *g = 0.0;
            }
        }
        let input: &Tensor = if li == 0 { x } else { &snap.activations[li - 1] };
        match layer {
            TeacherLayer::Dense { w, .. } => {
                grads.push(LayerGrads {
                    weights: dz.matmul_tn(input)?,
                    bias: column_sums(&dz),
                });
                if li > 0 {
                    dh = dz.matmul(w)?;
                }
            }
            TeacherLayer::Conv2d {
                kernels,
                stride,
                padding,
                in_shape,
                ..
            } => {
                let f = kernels.shape()[0];
                let out_dim = layer.out_dim();
                let plane = out_dim / f;
                let mut k_grad = Tensor::zeros(kernels.shape());
                let mut bias_grad = vec![0.0; f];
                let mut dx_all = Tensor::zeros(&[x.rows(), layer.in_dim()]);
                for s in 0..x.rows() {
                    let img = Tensor::from_vec(in_shape, input.row(s).to_vec())?;
                    let h_out = plane; // flattened spatial size
                    let d_out = Tensor::from_vec(
                        &[f, h_out / conv_w(layer), conv_w(layer)],
                        dz.row(s).to_vec(),
                    )?;
                    let (dk, dx) = conv2d_backward(&img, kernels, &d_out, *stride, *padding)?;
                    k_grad.add_scaled(&dk, 1.0);
                    for (i, &g) in dz.row(s).iter().enumerate() {
                        bias_grad[i / plane] += g;
                    }
                    dx_all.row_mut(s).copy_from_slice(dx.data());
                }
                grads.push(LayerGrads {
                    weights: k_grad,
                    bias: bias_grad,
                });
                if li > 0 {
                    dh = dx_all;
                }
            }
        }
    }
    grads.reverse();
    Ok((loss, correct, grads, cls_grads))
}

fn conv_w(layer: &TeacherLayer) -> usize {
    match layer {
        TeacherLayer::Conv2d {
            kernels,
            stride,
            padding,
            in_shape,
            ..
        } => conv_out_dim(in_shape[2], kernels.shape()[3], *stride, *padding).expect("validated"),
        _ => unreachable!(),
    }
}

/// Train the teacher with minibatch SGD/Adam. Deterministic under the caller's
/// RNG stream; epoch shuffles and nothing else consume randomness.
pub fn train_teacher<R: Rng>(
    net: &mut TeacherNetwork,
    train: &crate::data::Dataset,
    test: Option<&crate::data::Dataset>,
    cfg: &TeacherConfig,
    rng: &mut R,
) -> Result<TeacherReport> {
    if train.is_empty() {
        return Err(CoreError::Data("empty training set".into()));
    }
    let mut opts: Vec<(Optimizer, Optimizer)> = net
        .hidden
        .iter()
        .map(|l| {
            let (wshape, blen) = match l {
                TeacherLayer::Dense { w, b } => (w.shape().to_vec(), b.len()),
                TeacherLayer::Conv2d { kernels, b, .. } => (kernels.shape().to_vec(), b.len()),
            };
            (
                Optimizer::new(cfg.optimizer, cfg.weight_decay, &wshape),
                Optimizer::new(cfg.optimizer, 0.0, &[1, blen]),
            )
        })
        .collect();
    let mut cls_opt = (
        Optimizer::new(cfg.optimizer, cfg.weight_decay, net.classifier_w.shape()),
        Optimizer::new(cfg.optimizer, 0.0, &[1, net.classifier_b.len()]),
    );

    let mut stats = Vec::new();
    for epoch in 0..cfg.epochs {
        let lr = cfg.schedule.lr_at(cfg.lr, epoch);
        let order = crate::data::shuffle_indices(train.len(), rng);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        let mut correct = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let (x, labels) = train.batch(chunk);
            let (loss, batch_correct, grads, cls_grads) = teacher_backward(net, &x, &labels)?;
            if !loss.is_finite() {
                return Err(CoreError::Diverged {
                    epoch,
                    detail: format!("loss {loss}"),
                });
            }
            loss_sum += loss * labels.len() as f64;
            seen += labels.len();
            correct += batch_correct;
            for ((layer, grad), (w_opt, b_opt)) in
                net.hidden.iter_mut().zip(grads).zip(opts.iter_mut())
            {
                match layer {
                    TeacherLayer::Dense { w, b } => {
                        w_opt.step(w, &grad.weights, lr)?;
                        step_bias(b_opt, b, &grad.bias, lr)?;
                    }
                    TeacherLayer::Conv2d { kernels, b, .. } => {
                        w_opt.step(kernels, &grad.weights, lr)?;
                        step_bias(b_opt, b, &grad.bias, lr)?;
                    }
                }
            }
            cls_opt.0.step(&mut net.classifier_w, &cls_grads.weights, lr)?;
            step_bias(&mut cls_opt.1, &mut net.classifier_b, &cls_grads.bias, lr)?;
        }
        let test_acc = match test {
            Some(t) => Some(evaluate_teacher(net, t)?),
            None => None,
        };
        stats.push(TeacherEpochStat {
            epoch,
            train_loss: loss_sum / seen as f64,
            train_acc: correct as f64 / seen as f64,
            test_acc,
        });
    }
    let final_train_acc = evaluate_teacher(net, train)?;
    let final_test_acc = match test {
        Some(t) => Some(evaluate_teacher(net, t)?),
        None => None,
    };
    Ok(TeacherReport {
        epoch_stats: stats,
        final_train_acc,
        final_test_acc,
    })
}

fn step_bias(opt: &mut Optimizer, bias: &mut [f64], grad: &[f64], lr: f64) -> Result<()> {
    let mut b = Tensor::from_vec(&[1, bias.len()], bias.to_vec())?;
    let g = Tensor::from_vec(&[1, grad.len()], grad.to_vec())?;
    opt.step(&mut b, &g, lr)?;
    bias.copy_from_slice(b.data());
    Ok(())
}

/// Dataset accuracy, evaluated in batches.
pub fn evaluate_teacher(net: &TeacherNetwork, ds: &crate::data::Dataset) -> Result<f64> {
    let mut correct = 0usize;
    let idx: Vec<usize> = (0..ds.len()).collect();
    for chunk in idx.chunks(512) {
        let (x, labels) = ds.batch(chunk);
        let logits = net.logits(&x)?;
        correct += (accuracy(&logits, &labels) * labels.len() as f64).round() as usize;
    }
    Ok(correct as f64 / ds.len() as f64)
}
