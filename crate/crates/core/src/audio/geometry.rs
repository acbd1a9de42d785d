//! Planar microphone array geometry and far-field delay model.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

pub const SPEED_OF_SOUND_M_S: f64 = 343.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrayGeometry {
    /// Mic positions in meters, planar coordinates.
    pub mic_positions: Vec<[f64; 2]>,
    /// Ordered mic index pairs; pair delay is arrival(second) - arrival(first).
    pub pairs: Vec<(usize, usize)>,
}

impl ArrayGeometry {
    /// Four mics on the corners of a square with the given side length, all
    /// six pairs.
    pub fn square(side_m: f64) -> Result<ArrayGeometry> {
        let h = side_m / 2.0;
        let geom = ArrayGeometry {
            mic_positions: vec![[h, h], [-h, h], [-h, -h], [h, -h]],
            pairs: vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mic_positions.len() < 2 {
            return Err(CoreError::Config("need at least two microphones".into()));
        }
        for &(a, b) in &self.pairs {
            if a >= self.mic_positions.len() || b >= self.mic_positions.len() || a == b {
                return Err(CoreError::Config(format!("bad mic pair ({a}, {b})")));
            }
            let pa = self.mic_positions[a];
            let pb = self.mic_positions[b];
            let d = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
            if d <= 0.0 {
                return Err(CoreError::Config(format!(
                    "mics {a} and {b} have zero aperture"
                )));
            }
        }
        Ok(())
    }

    /// Plane-wave arrival time at a mic relative to the array origin, in
    /// seconds, for a source at the given azimuth. Mics closer to the source
    /// receive earlier (negative values).
    pub fn arrival_delay_s(&self, mic: usize, azimuth_deg: f64) -> f64 {
        let az = azimuth_deg.to_radians();
        let u = [az.cos(), az.sin()]; // unit vector toward the source
        let p = self.mic_positions[mic];
        -(p[0] * u[0] + p[1] * u[1]) / SPEED_OF_SOUND_M_S
    }

    /// Inter-mic delay for a pair: arrival at the second mic minus arrival
    /// at the first. Positive when the second mic hears the source later.
    pub fn tdoa_s(&self, pair: usize, azimuth_deg: f64) -> f64 {
        let (a, b) = self.pairs[pair];
        self.arrival_delay_s(b, azimuth_deg) - self.arrival_delay_s(a, azimuth_deg)
    }

    /// Largest possible |TDOA| over all pairs and azimuths: the widest
    /// aperture divided by the speed of sound.
    pub fn max_tdoa_s(&self) -> f64 {
        let mut widest = 0.0f64;
        for &(a, b) in &self.pairs {
            let pa = self.mic_positions[a];
            let pb = self.mic_positions[b];
            let d = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
            widest = widest.max(d);
        }
        widest / SPEED_OF_SOUND_M_S
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broadside_pair_has_zero_delay() {
        let geom = ArrayGeometry {
            mic_positions: vec![[0.05, 0.0], [-0.05, 0.0]],
            pairs: vec![(0, 1)],
        };
        // source at 90 degrees is broadside to a pair on the x axis
        assert!(geom.tdoa_s(0, 90.0).abs() < 1e-15);
        assert!(geom.tdoa_s(0, 270.0).abs() < 1e-15);
    }

    #[test]
    fn end_fire_pair_reaches_full_aperture_delay() {
        let geom = ArrayGeometry {
            mic_positions: vec![[0.05, 0.0], [-0.05, 0.0]],
            pairs: vec![(0, 1)],
        };
        // source at 0 degrees: mic 0 (at +x) is closer, mic 1 hears it
        // 0.1 m / c seconds later
        let t = geom.tdoa_s(0, 0.0);
        assert!((t - 0.1 / SPEED_OF_SOUND_M_S).abs() < 1e-12, "tdoa {t}");
        // opposite direction flips the sign
        assert!((geom.tdoa_s(0, 180.0) + 0.1 / SPEED_OF_SOUND_M_S).abs() < 1e-12);
    }

    #[test]
    fn square_array_aperture() {
        let geom = ArrayGeometry::square(0.05).unwrap();
        assert_eq!(geom.mic_positions.len(), 4);
        assert_eq!(geom.pairs.len(), 6);
        // diagonal = side * sqrt(2)
        let expect = 0.05 * 2f64.sqrt() / SPEED_OF_SOUND_M_S;
        assert!((geom.max_tdoa_s() - expect).abs() < 1e-12);
        // every pair's TDOA stays within the aperture bound
        for pair in 0..6 {
            for az in 0..72 {
                let t = geom.tdoa_s(pair, az as f64 * 5.0);
                assert!(t.abs() <= geom.max_tdoa_s() + 1e-15);
            }
        }
    }

    #[test]
    fn degenerate_geometry_is_rejected() {
        let geom = ArrayGeometry {
            mic_positions: vec![[0.0, 0.0], [0.0, 0.0]],
            pairs: vec![(0, 1)],
        };
        assert!(geom.validate().is_err());
        assert!(ArrayGeometry::square(0.0).is_err());
    }
}
