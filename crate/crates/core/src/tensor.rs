//! Dense row-major tensors and the handful of linear-algebra kernels the
//! engine needs. All kernels use a fixed accumulation order (ikj loops, p
//! ascending) so results are bit-reproducible run to run; skipping zero
//! left-operands never changes a nonzero sum and lets spike-sparse inputs go
//! fast.

use crate::error::{CoreError, Result};
use rand::Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Tensor {
        assert!(
            !shape.is_empty() && shape.iter().all(|&d| d > 0),
            "tensor dims must be positive"
        );
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Tensor> {
        if shape.is_empty() || shape.iter().any(|&d| d == 0) {
            return Err(CoreError::Dimension(format!(
                "tensor dims must be positive, got {shape:?}"
            )));
        }
        let want: usize = shape.iter().product();
        if want != data.len() {
            return Err(CoreError::Dimension(format!(
                "shape {shape:?} needs {want} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Gaussian init, used for weight matrices (He-style std chosen by callers).
    pub fn randn<R: Rng>(shape: &[usize], std: f64, rng: &mut R) -> Tensor {
        let normal = Normal::new(0.0, std).expect("std must be finite/positive");
        let mut t = Tensor::zeros(shape);
        for v in t.data.iter_mut() {
            *v = normal.sample(rng);
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn expect_2d(&self, ctx: &str) -> Result<(usize, usize)> {
        match self.shape[..] {
            [r, c] => Ok((r, c)),
            _ => Err(CoreError::Dimension(format!(
                "{ctx}: expected 2-d tensor, got shape {:?}",
                self.shape
            ))),
        }
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[self.shape.len() - 1]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert_eq!(self.shape.len(), 2);
        self.data[i * self.shape[1] + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        debug_assert_eq!(self.shape.len(), 2);
        &mut self.data[i * self.shape[1] + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.shape[self.shape.len() - 1];
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.shape[self.shape.len() - 1];
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn transpose(&self) -> Tensor {
        let (r, c) = self.expect_2d("transpose").expect("transpose needs 2-d");
        let mut out = Tensor::zeros(&[c, r]);
        for i in 0..r {
            for j in 0..c {
                out.data[j * r + i] = self.data[i * c + j];
            }
        }
        out
    }

    /// C = A(m x k) * B(k x n). ikj order, p ascending per output element.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        let (m, k) = self.expect_2d("matmul lhs")?;
        let (k2, n) = other.expect_2d("matmul rhs")?;
        if k != k2 {
            return Err(CoreError::Dimension(format!(
                "matmul: inner dims {k} vs {k2}"
            )));
        }
        let mut out = Tensor::zeros(&[m, n]);
        for i in 0..m {
            let arow = &self.data[i * k..(i + 1) * k];
            let crow = &mut out.data[i * n..(i + 1) * n];
            for (p, &av) in arow.iter().enumerate() {
                if av == 0.0 {
                    continue;
                }
                let brow = &other.data[p * n..(p + 1) * n];
                for j in 0..n {
                    crow[j] += av * brow[j];
                }
            }
        }
        Ok(out)
    }

    /// C = A^T * B with A(k x m), B(k x n) -> (m x n). Same accumulation
    /// discipline as matmul; this is the gradient kernel dW = delta^T * input.
    pub fn matmul_tn(&self, other: &Tensor) -> Result<Tensor> {
        let (k, m) = self.expect_2d("matmul_tn lhs")?;
        let (k2, n) = other.expect_2d("matmul_tn rhs")?;
        if k != k2 {
            return Err(CoreError::Dimension(format!(
                "matmul_tn: leading dims {k} vs {k2}"
            )));
        }
        let mut out = Tensor::zeros(&[m, n]);
        for p in 0..k {
            let arow = &self.data[p * m..(p + 1) * m];
            let brow = &other.data[p * n..(p + 1) * n];
            for (i, &av) in arow.iter().enumerate() {
                if av == 0.0 {
                    continue;
                }
                let crow = &mut out.data[i * n..(i + 1) * n];
                for j in 0..n {
                    crow[j] += av * brow[j];
                }
            }
        }
        Ok(out)
    }

    /// y = W * x for W(out x in). Bit-identical to the batched path
    /// matmul(x_row, W^T) because both add x[p]*W[j][p] in ascending p with the
    /// same zero-skip rule.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (out_dim, in_dim) = self.expect_2d("matvec")?;
        if x.len() != in_dim {
            return Err(CoreError::Dimension(format!(
                "matvec: weight fan-in {in_dim}, input {}",
                x.len()
            )));
        }
        let mut y = vec![0.0; out_dim];
        for (p, &xv) in x.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            for j in 0..out_dim {
                y[j] += xv * self.data[j * in_dim + p];
            }
        }
        Ok(y)
    }

    /// self += alpha * other (elementwise).
    pub fn add_scaled(&mut self, other: &Tensor, alpha: f64) {
        assert_eq!(self.shape, other.shape, "add_scaled shape mismatch");
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in self.data.iter_mut() {
            *a *= alpha;
        }
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
