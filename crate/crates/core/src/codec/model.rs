use serde::{Deserialize, Serialize};

use super::dct::{BANDS, ZIGZAG};
use crate::error::{Error, Result};

/// Standard JPEG luminance quantization table, row-major.
pub const JPEG_LUMA_QUANT: [u16; BANDS] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Per-band multipliers applied to latent coefficients before rounding.
///
/// Band `k` is the k-th zig-zag frequency; the same vector is shared by all
/// color channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainVector(Vec<f64>);

impl GainVector {
    pub fn new(gains: Vec<f64>) -> Result<Self> {
        if gains.len() != BANDS {
            return Err(Error::Domain(format!(
                "gain vector needs {BANDS} entries, got {}",
                gains.len()
            )));
        }
        if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::Domain(format!(
                "gain {g} is not a positive finite value"
            )));
        }
        Ok(Self(gains))
    }

    /// `scale * 16 / Q_k` with `Q` the JPEG luminance table in zig-zag order.
    pub fn jpeg_scaled(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!(
                "gain scale {scale} must be positive"
            )));
        }
        Self::new(
            ZIGZAG
                .iter()
                .map(|&i| scale * 16.0 / f64::from(JPEG_LUMA_QUANT[i]))
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// One variable-rate model: a gain vector trained for `beta_train` and the
/// admissible displacement range `[delta_min, delta_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CodecModel {
    model_id: u32,
    beta_train: f64,
    gain: GainVector,
    delta_min: f64,
    delta_max: f64,
}

impl CodecModel {
    pub fn new(
        model_id: u32,
        beta_train: f64,
        gain: GainVector,
        delta_min: f64,
        delta_max: f64,
    ) -> Result<Self> {
        if !(beta_train.is_finite() && beta_train > 0.0) {
            return Err(Error::Domain(format!(
                "beta_train {beta_train} must be positive"
            )));
        }
        if !(delta_min > 0.0 && delta_min <= 1.0 && delta_max >= 1.0 && delta_max.is_finite()) {
            return Err(Error::Domain(format!(
                "delta range [{delta_min}, {delta_max}] must satisfy 0 < min <= 1 <= max"
            )));
        }
        Ok(Self {
            model_id,
            beta_train,
            gain,
            delta_min,
            delta_max,
        })
    }

    pub fn model_id(&self) -> u32 {
        self.model_id
    }

    pub fn beta_train(&self) -> f64 {
        self.beta_train
    }

    pub fn gain(&self) -> &GainVector {
        &self.gain
    }

    pub fn delta_min(&self) -> f64 {
        self.delta_min
    }

    pub fn delta_max(&self) -> f64 {
        self.delta_max
    }

    pub fn beta_min(&self) -> f64 {
        self.beta_train * self.delta_min
    }

    pub fn beta_max(&self) -> f64 {
        self.beta_train * self.delta_max
    }

    /// Displacement for a requested test multiplier.
    pub fn delta_for(&self, beta_test: f64) -> f64 {
        beta_test / self.beta_train
    }
}
