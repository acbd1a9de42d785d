//! 2-D convolution (cross-correlation) forward and backward passes over
//! [C x H x W] inputs and [F x C x kh x kw] kernel banks. Used by conv teacher
//! layers and exercised by the energy audit's architecture math.

use crate::error::{CoreError, Result};
use crate::tensor::Tensor;

/// Output spatial size for one dimension, or an error when non-positive.
pub fn conv_out_dim(input: usize, kernel: usize, stride: usize, padding: usize) -> Result<usize> {
    if stride == 0 {
        return Err(CoreError::Config("conv stride must be >= 1".into()));
    }
    let padded = input + 2 * padding;
    if kernel == 0 || kernel > padded {
        return Err(CoreError::Config(format!(
            "kernel {kernel} does not fit padded dim {padded}"
        )));
    }
    Ok((padded - kernel) / stride + 1)
}

fn expect_chw(t: &Tensor) -> Result<(usize, usize, usize)> {
    match t.shape()[..] {
        [c, h, w] => Ok((c, h, w)),
        _ => Err(CoreError::Dimension(format!(
            "expected [C,H,W] tensor, got {:?}",
            t.shape()
        ))),
    }
}

fn expect_fchw(t: &Tensor) -> Result<(usize, usize, usize, usize)> {
    match t.shape()[..] {
        [f, c, kh, kw] => Ok((f, c, kh, kw)),
        _ => Err(CoreError::Dimension(format!(
            "expected [F,C,kh,kw] kernels, got {:?}",
            t.shape()
        ))),
    }
}

/// Forward convolution: input [C,H,W] with kernels [F,C,kh,kw] -> [F,H',W'].
pub fn conv2d_forward(
    input: &Tensor,
    kernels: &Tensor,
    stride: usize,
    padding: usize,
) -> Result<Tensor> {
    let (c_in, h, w) = expect_chw(input)?;
    let (f_out, kc, kh, kw) = expect_fchw(kernels)?;
    if kc != c_in {
        return Err(CoreError::Dimension(format!(
            "kernel channels {kc} vs input channels {c_in}"
        )));
    }
    let h_out = conv_out_dim(h, kh, stride, padding)?;
    let w_out = conv_out_dim(w, kw, stride, padding)?;

    let mut out = Tensor::zeros(&[f_out, h_out, w_out]);
    let x = input.data();
    let k = kernels.data();
    let o = out.data_mut();
    for f in 0..f_out {
        for oy in 0..h_out {
            for ox in 0..w_out {
                let mut acc = 0.0;
                for c in 0..c_in {
                    for u in 0..kh {
                        let iy = (oy * stride + u) as isize - padding as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for v in 0..kw {
                            let ix = (ox * stride + v) as isize - padding as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            acc += x[(c * h + iy as usize) * w + ix as usize]
                                * k[((f * c_in + c) * kh + u) * kw + v];
                        }
                    }
                }
                o[(f * h_out + oy) * w_out + ox] = acc;
            }
        }
    }
    Ok(out)
}

/// Gradients of a scalar loss through conv2d_forward, given d_out [F,H',W'].
/// Returns (d_kernels, d_input).
pub fn conv2d_backward(
    input: &Tensor,
    kernels: &Tensor,
    d_out: &Tensor,
    stride: usize,
    padding: usize,
) -> Result<(Tensor, Tensor)> {
    let (c_in, h, w) = expect_chw(input)?;
    let (f_out, _, kh, kw) = expect_fchw(kernels)?;
    let h_out = conv_out_dim(h, kh, stride, padding)?;
    let w_out = conv_out_dim(w, kw, stride, padding)?;
    if d_out.shape() != [f_out, h_out, w_out] {
        return Err(CoreError::Dimension(format!(
            "d_out shape {:?} vs expected [{f_out},{h_out},{w_out}]",
            d_out.shape()
        )));
    }

    let mut d_k = Tensor::zeros(kernels.shape());
    let mut d_x = Tensor::zeros(input.shape());
    let x = input.data();
    let k = kernels.data();
    let g = d_out.data();
    for f in 0..f_out {
        for oy in 0..h_out {
            for ox in 0..w_out {
                let gv = g[(f * h_out + oy) * w_out + ox];
                if gv == 0.0 {
                    continue;
                }
                for c in 0..c_in {
                    for u in 0..kh {
                        let iy = (oy * stride + u) as isize - padding as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for v in 0..kw {
                            let ix = (ox * stride + v) as isize - padding as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let xi = (c * h + iy as usize) * w + ix as usize;
                            let ki = ((f * c_in + c) * kh + u) * kw + v;
                            d_k.data_mut()[ki] += gv * x[xi];
                            d_x.data_mut()[xi] += gv * k[ki];
                        }
                    }
                }
            }
        }
    }
    Ok((d_k, d_x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradcheck::check_gradient;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_kernel_scales_input() {
        let input = Tensor::from_vec(&[1, 3, 3], vec![1.0; 9]).unwrap();
        let kernel = Tensor::from_vec(&[1, 1, 1, 1], vec![2.0]).unwrap();
        let out = conv2d_forward(&input, &kernel, 1, 0).unwrap();
        assert_eq!(out.shape(), &[1, 3, 3]);
        assert!(out.data().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn strided_padded_ones_match_sliding_window_oracle() {
        let input = Tensor::from_vec(&[1, 4, 4], vec![1.0; 16]).unwrap();
        let kernel = Tensor::from_vec(&[1, 1, 3, 3], vec![1.0; 9]).unwrap();
        let out = conv2d_forward(&input, &kernel, 2, 1).unwrap();
        assert_eq!(out.shape(), &[1, 2, 2]);
        assert_eq!(out.data(), &[4.0, 6.0, 6.0, 9.0]);
    }

    #[test]
    fn zero_input_zero_output() {
        let input = Tensor::zeros(&[2, 5, 5]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let kernel = Tensor::randn(&[3, 2, 3, 3], 1.0, &mut rng);
        let out = conv2d_forward(&input, &kernel, 1, 1).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_kernel_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let input = Tensor::randn(&[1, 4, 4], 1.0, &mut rng);
        let kernel = Tensor::from_vec(&[1, 1, 1, 1], vec![1.0]).unwrap();
        let out = conv2d_forward(&input, &kernel, 1, 0).unwrap();
        assert_eq!(out.data(), input.data());
    }

    #[test]
    fn nonpositive_output_dims_error() {
        let input = Tensor::zeros(&[1, 2, 2]);
        let kernel = Tensor::zeros(&[1, 1, 5, 5]);
        assert!(matches!(
            conv2d_forward(&input, &kernel, 1, 0),
            Err(CoreError::Config(_))
        ));
    }

    #[test]
    fn kernel_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let input = Tensor::randn(&[2, 5, 5], 1.0, &mut rng);
        let kernels = Tensor::randn(&[3, 2, 3, 3], 0.5, &mut rng);
        // loss = sum of squared outputs
        let loss = |k: &Tensor| -> f64 {
            let y = conv2d_forward(&input, k, 2, 1).unwrap();
            y.data().iter().map(|v| v * v).sum()
        };
        let y = conv2d_forward(&input, &kernels, 2, 1).unwrap();
        let mut d_out = y.clone();
        d_out.scale(2.0);
        let (d_k, _) = conv2d_backward(&input, &kernels, &d_out, 2, 1).unwrap();
        let err = check_gradient(loss, &kernels, &d_k, 1e-5).unwrap();
        assert!(err < 1e-6, "rel err {err}");
    }

    #[test]
    fn input_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let input = Tensor::randn(&[1, 4, 4], 1.0, &mut rng);
        let kernels = Tensor::randn(&[2, 1, 3, 3], 0.5, &mut rng);
        let loss = |x: &Tensor| -> f64 {
            let y = conv2d_forward(x, &kernels, 1, 1).unwrap();
            y.data().iter().map(|v| v * v).sum()
        };
        let y = conv2d_forward(&input, &kernels, 1, 1).unwrap();
        let mut d_out = y.clone();
        d_out.scale(2.0);
        let (_, d_x) = conv2d_backward(&input, &kernels, &d_out, 1, 1).unwrap();
        let err = check_gradient(loss, &input, &d_x, 1e-5).unwrap();
        assert!(err < 1e-6, "rel err {err}");
    }
}
