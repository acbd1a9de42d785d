//! SGD-with-momentum and Adam, one optimizer instance per parameter tensor,
//! plus the step/cosine learning-rate schedules the training configs name.

use crate::error::{CoreError, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimKind {
    SgdMomentum { momentum: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimKind {
    pub fn sgd(momentum: f64) -> OptimKind {
        OptimKind::SgdMomentum { momentum }
    }

    /// Canonical Adam constants; the training configs name Adam without them.
    pub fn adam() -> OptimKind {
        OptimKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LrSchedule {
    Constant,
    /// lr * gamma^(epoch / every), integer division.
    StepDecay { every: usize, gamma: f64 },
    /// Cosine annealing to zero over `total` epochs.
    Cosine { total: usize },
}

impl LrSchedule {
    pub fn lr_at(&self, base_lr: f64, epoch: usize) -> f64 {
        match *self {
            LrSchedule::Constant => base_lr,
            LrSchedule::StepDecay { every, gamma } => {
                base_lr * gamma.powi((epoch / every.max(1)) as i32)
            }
            LrSchedule::Cosine { total } => {
                let frac = (epoch as f64 / total.max(1) as f64).min(1.0);
                base_lr * 0.5 * (1.0 + (std::f64::consts::PI * frac).cos())
            }
        }
    }
}

/// Optimizer state for a single parameter tensor.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimKind,
    weight_decay: f64,
    step_count: u64,
    m: Tensor,
    v: Option<Tensor>,
}

impl Optimizer {
    pub fn new(kind: OptimKind, weight_decay: f64, param_shape: &[usize]) -> Optimizer {
        let v = match kind {
            OptimKind::Adam { .. } => Some(Tensor::zeros(param_shape)),
            OptimKind::SgdMomentum { .. } => None,
        };
        Optimizer {
            kind,
            weight_decay,
            step_count: 0,
            m: Tensor::zeros(param_shape),
            v,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Apply one update in place. L2 weight decay is coupled (added to the
    /// gradient before the moment updates).
    pub fn step(&mut self, param: &mut Tensor, grad: &Tensor, lr: f64) -> Result<()> {
        if param.shape() != grad.shape() || param.shape() != self.m.shape() {
            return Err(CoreError::Dimension(
                "optimizer buffers, parameter, and gradient must shape-match".into(),
            ));
        }
        self.step_count += 1;
        match self.kind {
            OptimKind::SgdMomentum { momentum } => {
                for i in 0..param.len() {
                    let g = grad.data()[i] + self.weight_decay * param.data()[i];
                    let buf = momentum * self.m.data()[i] + g;
                    self.m.data_mut()[i] = buf;
                    param.data_mut()[i] -= lr * buf;
                }
            }
            OptimKind::Adam { beta1, beta2, eps } => {
                let v = self.v.as_mut().expect("adam second moment");
                let bc1 = 1.0 - beta1.powi(self.step_count as i32);
                let bc2 = 1.0 - beta2.powi(self.step_count as i32);
                for i in 0..param.len() {
                    let g = grad.data()[i] + self.weight_decay * param.data()[i];
                    let m = beta1 * self.m.data()[i] + (1.0 - beta1) * g;
                    let s = beta2 * v.data()[i] + (1.0 - beta2) * g * g;
                    self.m.data_mut()[i] = m;
                    v.data_mut()[i] = s;
                    let m_hat = m / bc1;
                    let s_hat = s / bc2;
                    param.data_mut()[i] -= lr * m_hat / (s_hat.sqrt() + eps);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgd_momentum_hand_sequence() {
        let mut w = Tensor::from_vec(&[1, 1], vec![1.0]).unwrap();
        let g = Tensor::from_vec(&[1, 1], vec![2.0]).unwrap();
        let mut opt = Optimizer::new(OptimKind::sgd(0.5), 0.0, &[1, 1]);
        opt.step(&mut w, &g, 0.1).unwrap();
        // buf = 2, w = 1 - 0.2 = 0.8
        assert!((w.data()[0] - 0.8).abs() < 1e-15);
        opt.step(&mut w, &g, 0.1).unwrap();
        // buf = 0.5*2 + 2 = 3, w = 0.8 - 0.3 = 0.5
        assert!((w.data()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_is_lr_sized() {
        let mut w = Tensor::from_vec(&[1, 1], vec![0.0]).unwrap();
        let g = Tensor::from_vec(&[1, 1], vec![1.0]).unwrap();
        let mut opt = Optimizer::new(OptimKind::adam(), 0.0, &[1, 1]);
        opt.step(&mut w, &g, 0.01).unwrap();
        // bias-corrected m_hat = 1, v_hat = 1 -> step = lr / (1 + eps)
        assert!((w.data()[0] + 0.01).abs() < 1e-9, "w = {}", w.data()[0]);
    }

    #[test]
    fn both_optimizers_descend_a_quadratic() {
        // loss = 0.5 * sum w^2, gradient = w. Momentum rings, so compare
        // windowed losses instead of demanding per-step decrease.
        for kind in [OptimKind::sgd(0.9), OptimKind::adam()] {
            let mut w = Tensor::from_vec(&[1, 3], vec![1.0, -2.0, 0.5]).unwrap();
            let mut opt = Optimizer::new(kind, 0.0, &[1, 3]);
            let loss = |t: &Tensor| 0.5 * t.data().iter().map(|v| v * v).sum::<f64>();
            let initial = loss(&w);
            let mut window_max = Vec::new();
            let mut cur_max = f64::NEG_INFINITY;
            for step in 0..120 {
                let g = w.clone();
                opt.step(&mut w, &g, 0.05).unwrap();
                cur_max = cur_max.max(loss(&w));
                if step % 30 == 29 {
                    window_max.push(cur_max);
                    cur_max = f64::NEG_INFINITY;
                }
            }
            for pair in window_max.windows(2) {
                assert!(pair[1] < pair[0], "{kind:?}: window maxima not shrinking {window_max:?}");
            }
            assert!(loss(&w) < 1e-2, "{kind:?} failed to descend");
            assert!(loss(&w) < 0.05 * initial, "{kind:?} barely moved");
        }
    }

    #[test]
    fn weight_decay_pulls_toward_zero() {
        let mut w = Tensor::from_vec(&[1, 1], vec![4.0]).unwrap();
        let g = Tensor::zeros(&[1, 1]);
        let mut opt = Optimizer::new(OptimKind::sgd(0.0), 0.1, &[1, 1]);
        opt.step(&mut w, &g, 1.0).unwrap();
        assert!((w.data()[0] - 3.6).abs() < 1e-12);
    }

    #[test]
    fn schedules() {
        let step = LrSchedule::StepDecay { every: 10, gamma: 0.5 };
        assert_eq!(step.lr_at(1.0, 0), 1.0);
        assert_eq!(step.lr_at(1.0, 9), 1.0);
        assert_eq!(step.lr_at(1.0, 10), 0.5);
        assert_eq!(step.lr_at(1.0, 25), 0.25);
        let cos = LrSchedule::Cosine { total: 10 };
        assert_eq!(cos.lr_at(2.0, 0), 2.0);
        assert!((cos.lr_at(2.0, 5) - 1.0).abs() < 1e-12);
        assert!(cos.lr_at(2.0, 10) < 1e-12);
    }
}
