//! Central-difference gradient verification. This is the reference oracle used
//! by the training-rule tests: analytic gradients must agree with finite
//! differences of the (surrogate) forward computation.

use crate::error::{CoreError, Result};
use crate::tensor::Tensor;

/// Compare `analytic` against central finite differences of `f` at `params`.
///
/// Returns the max over parameters of |analytic - numeric| / max(1, |numeric|).
pub fn check_gradient<F>(mut f: F, params: &Tensor, analytic: &Tensor, eps: f64) -> Result<f64>
where
    F: FnMut(&Tensor) -> f64,
{
    if !(eps > 0.0 && eps <= 1e-2) {
        return Err(CoreError::Config(format!(
            "gradient-check eps must be in (0, 1e-2], got {eps}"
        )));
    }
    if params.shape() != analytic.shape() {
        return Err(CoreError::Dimension(
            "analytic gradient shape must match params".into(),
        ));
    }
    let mut worst = 0.0f64;
    let mut probe = params.clone();
    for idx in 0..params.len() {
        let orig = probe.data()[idx];
        probe.data_mut()[idx] = orig + eps;
        let plus = f(&probe);
        probe.data_mut()[idx] = orig - eps;
        let minus = f(&probe);
        probe.data_mut()[idx] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(CoreError::Numeric(format!(
                "non-finite loss during gradient check at param {idx}"
            )));
        }
        let numeric = (plus - minus) / (2.0 * eps);
        let rel = (analytic.data()[idx] - numeric).abs() / numeric.abs().max(1.0);
        if !rel.is_finite() {
            return Err(CoreError::Numeric(format!(
                "non-finite gradient at param {idx}"
            )));
        }
        worst = worst.max(rel);
    }
    Ok(worst)
}
