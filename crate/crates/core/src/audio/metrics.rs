//! Angular error metrics for azimuth estimation.

use crate::error::{CoreError, Result};

/// Smallest angular distance between two azimuths, in [0, 180].
pub fn circular_error_deg(a_deg: f64, b_deg: f64) -> f64 {
    let d = (a_deg - b_deg).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Snap an azimuth onto the class grid (nearest multiple of `step_deg`,
/// modulo 360).
pub fn round_to_grid(az_deg: f64, step_deg: f64) -> f64 {
    ((az_deg / step_deg).round() * step_deg).rem_euclid(360.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationMetrics {
    pub mae_deg: f64,
    /// Fraction of samples whose grid-rounded error is below eta.
    pub accuracy: f64,
    pub count: usize,
}

pub fn localization_metrics(
    predicted_deg: &[f64],
    true_deg: &[f64],
    eta_deg: f64,
    grid_step_deg: f64,
) -> Result<LocalizationMetrics> {
    if predicted_deg.is_empty() || predicted_deg.len() != true_deg.len() {
        return Err(CoreError::Data(format!(
            "need equal nonempty prediction/truth lists, got {} and {}",
            predicted_deg.len(),
            true_deg.len()
        )));
    }
    let mut err_sum = 0.0;
    let mut hits = 0usize;
    for (&p, &t) in predicted_deg.iter().zip(true_deg) {
        err_sum += circular_error_deg(p, t);
        let snapped = round_to_grid(p, grid_step_deg);
        if circular_error_deg(snapped, t) < eta_deg {
            hits += 1;
        }
    }
    Ok(LocalizationMetrics {
        mae_deg: err_sum / predicted_deg.len() as f64,
        accuracy: hits as f64 / predicted_deg.len() as f64,
        count: predicted_deg.len(),
    })
}
