//! A deterministic toy variable-rate codec.
//!
//! The encoder is a blockwise orthonormal DCT; the gain unit multiplies each
//! frequency band by `g_k * delta` before rounding, and the rate is the
//! empirical zeroth-order entropy of each band. Larger `delta` means finer
//! quantization, more bits and lower distortion.

pub mod dct;
mod model;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use self::dct::{BANDS, BLOCK};
pub use self::model::{CodecModel, GainVector, JPEG_LUMA_QUANT};
use crate::cost::Cost;
use crate::error::{Error, Result};
use crate::image::Image;

/// Source and block-grid dimensions shared by latents and their quantized form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Geometry {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub blocks_x: usize,
    pub blocks_y: usize,
}

impl Geometry {
    pub fn of(image: &Image) -> Self {
        Self {
            width: image.width(),
            height: image.height(),
            channels: image.channels(),
            blocks_x: image.width().div_ceil(BLOCK),
            blocks_y: image.height().div_ceil(BLOCK),
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Total coefficient count: blocks × channels × 64.
    pub fn len(&self) -> usize {
        self.blocks_x * self.blocks_y * self.channels * BANDS
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Pre-gain transform coefficients, shape `(blocks_y, blocks_x, channels, 64)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentTensor {
    geometry: Geometry,
    coefficients: Vec<f64>,
}

impl LatentTensor {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Coefficients of one block and channel, in zig-zag band order.
    pub fn block(&self, bx: usize, by: usize, c: usize) -> &[f64] {
        let g = &self.geometry;
        let start = ((by * g.blocks_x + bx) * g.channels + c) * BANDS;
        &self.coefficients[start..start + BANDS]
    }
}

/// Integer symbols produced by the gain unit and rounding; same layout as
/// [`LatentTensor`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedLatent {
    geometry: Geometry,
    symbols: Vec<i32>,
}

impl QuantizedLatent {
    /// Wraps raw symbols laid out as `(blocks_y, blocks_x, channels, 64)`.
    pub fn from_symbols(geometry: Geometry, symbols: Vec<i32>) -> Result<Self> {
        if symbols.len() != geometry.len() {
            return Err(Error::GeometryMismatch(format!(
                "{} symbols for a geometry holding {}",
                symbols.len(),
                geometry.len()
            )));
        }
        Ok(Self { geometry, symbols })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn symbols(&self) -> &[i32] {
        &self.symbols
    }
}

/// One validated operating point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateDistortionPoint {
    pub bpp: f64,
    pub mse: f64,
    /// `+inf` when `mse == 0`.
    pub psnr: f64,
}

impl RateDistortionPoint {
    pub fn new(bpp: f64, mse: f64) -> Self {
        Self {
            bpp,
            mse,
            psnr: crate::bd::quality_psnr(mse).unwrap_or(f64::NAN),
        }
    }
}

/// Runs the analysis transform: edge-replicated padding to a multiple of 8,
/// mean shift by 128 and a per-block, per-channel DCT-II.
///
/// The transform does not depend on the model; the model is accepted so that
/// a latent is always tied to an `(image, model)` pair like a learned encoder.
pub fn encode_latent(image: &Image, _model: &CodecModel) -> Result<LatentTensor> {
    if image.width() < BLOCK || image.height() < BLOCK {
        return Err(Error::DimensionTooSmall {
            width: image.width(),
            height: image.height(),
        });
    }
    let geometry = Geometry::of(image);
    let mut coefficients = vec![0.0; geometry.len()];
    let mut block = [0.0; BANDS];
    let mut offset = 0;
    for by in 0..geometry.blocks_y {
        for bx in 0..geometry.blocks_x {
            for c in 0..geometry.channels {
                for y in 0..BLOCK {
                    let sy = (by * BLOCK + y).min(geometry.height - 1);
                    for x in 0..BLOCK {
                        let sx = (bx * BLOCK + x).min(geometry.width - 1);
                        block[y * BLOCK + x] = f64::from(image.sample(sx, sy, c)) - 128.0;
                    }
                }
                dct::forward(&block, &mut coefficients[offset..offset + BANDS]);
                offset += BANDS;
            }
        }
    }
    Ok(LatentTensor {
        geometry,
        coefficients,
    })
}

/// Applies the gain unit scaled by `delta_beta` and rounds half away from zero.
pub fn quantize(latent: &LatentTensor, gain: &GainVector, delta_beta: f64) -> QuantizedLatent {
    let scales: Vec<f64> = gain.as_slice().iter().map(|g| g * delta_beta).collect();
    let symbols = latent
        .coefficients
        .chunks_exact(BANDS)
        .flat_map(|block| {
            block
                .iter()
                .zip(&scales)
                .map(|(c, s)| (c * s).round() as i32)
        })
        .collect();
    QuantizedLatent {
        geometry: latent.geometry,
        symbols,
    }
}

/// Sum over bands of the empirical Shannon entropy of each band's symbol
/// histogram, divided by `pixel_count`.
pub fn estimate_rate(q: &QuantizedLatent, pixel_count: usize) -> f64 {
    let per_band = q.symbols.len() / BANDS;
    if per_band == 0 || pixel_count == 0 {
        return 0.0;
    }
    let n_total = per_band as f64;
    let term = |n: usize| {
        let n = n as f64;
        n * (n_total / n).log2()
    };
    let mut lo = [i32::MAX; BANDS];
    let mut hi = [i32::MIN; BANDS];
    for block in q.symbols.chunks_exact(BANDS) {
        for k in 0..BANDS {
            lo[k] = lo[k].min(block[k]);
            hi[k] = hi[k].max(block[k]);
        }
    }
    let span = |k: usize| (i64::from(hi[k]) - i64::from(lo[k])) as usize + 1;
    let mut offsets = [usize::MAX; BANDS];
    let mut total = 0;
    for (k, offset) in offsets.iter_mut().enumerate() {
        if span(k) <= COUNTING_SPAN_LIMIT {
            *offset = total;
            total += span(k);
        }
    }
    let mut counts = vec![0u32; total];
    for block in q.symbols.chunks_exact(BANDS) {
        for k in 0..BANDS {
            if offsets[k] != usize::MAX {
                counts[offsets[k] + (block[k] - lo[k]) as usize] += 1;
            }
        }
    }
    let mut bits = 0.0;
    for k in 0..BANDS {
        if offsets[k] != usize::MAX {
            bits += counts[offsets[k]..offsets[k] + span(k)]
                .iter()
                .filter(|&&n| n > 0)
                .map(|&n| term(n as usize))
                .sum::<f64>();
            continue;
        }
        let mut column: Vec<i32> = q.symbols.iter().skip(k).step_by(BANDS).copied().collect();
        column.sort_unstable();
        let mut run_start = 0;
        for i in 1..=column.len() {
            if i == column.len() || column[i] != column[run_start] {
                bits += term(i - run_start);
                run_start = i;
            }
        }
    }
    bits / pixel_count as f64
}

// histogram by direct counting below this symbol span, by sorting above it
const COUNTING_SPAN_LIMIT: usize = 1 << 16;

/// Dequantizes, inverts the transform, re-centers, clamps and crops.
pub fn decode(
    q: &QuantizedLatent,
    gain: &GainVector,
    delta_beta: f64,
    geometry: Geometry,
) -> Result<Image> {
    if q.geometry != geometry {
        return Err(Error::GeometryMismatch(format!(
            "quantized latent is {:?}, requested {:?}",
            q.geometry, geometry
        )));
    }
    let g = geometry;
    let inv: Vec<f64> = gain
        .as_slice()
        .iter()
        .map(|v| 1.0 / (v * delta_beta))
        .collect();
    let mut samples = vec![0u8; g.width * g.height * g.channels];
    let mut bands = [0.0; BANDS];
    let mut block = [0.0; BANDS];
    for (idx, chunk) in q.symbols.chunks_exact(BANDS).enumerate() {
        let c = idx % g.channels;
        let bx = (idx / g.channels) % g.blocks_x;
        let by = idx / (g.channels * g.blocks_x);
        for k in 0..BANDS {
            bands[k] = f64::from(chunk[k]) * inv[k];
        }
        dct::inverse(&bands, &mut block);
        for y in 0..BLOCK {
            let py = by * BLOCK + y;
            if py >= g.height {
                break;
            }
            for x in 0..BLOCK {
                let px = bx * BLOCK + x;
                if px >= g.width {
                    break;
                }
                let v = (block[y * BLOCK + x] + 128.0).clamp(0.0, 255.0).round();
                samples[(py * g.width + px) * g.channels + c] = v as u8;
            }
        }
    }
    Image::new(g.width, g.height, g.channels, samples)
}

/// Rate only: quantize a latent and measure its entropy. No decoder pass.
pub fn rate(latent: &LatentTensor, gain: &GainVector, delta_beta: f64) -> f64 {
    estimate_rate(
        &quantize(latent, gain, delta_beta),
        latent.geometry.pixel_count(),
    )
}

/// Result of a full validation pass through the codec.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub point: RateDistortionPoint,
    pub latent: Arc<LatentTensor>,
    pub cost: Cost,
}

/// Encodes (unless a cached latent is supplied), quantizes, measures the rate,
/// decodes and measures distortion.
///
/// A supplied latent must come from `encode_latent(image, model)`; only its
/// geometry can be checked here.
pub fn evaluate(
    image: &Image,
    model: &CodecModel,
    delta_beta: f64,
    latent: Option<Arc<LatentTensor>>,
) -> Result<Evaluation> {
    if !(delta_beta.is_finite() && delta_beta > 0.0) {
        return Err(Error::Domain(format!(
            "delta_beta {delta_beta} must be positive"
        )));
    }
    let mut cost = Cost::ZERO;
    let latent = match latent {
        Some(l) => {
            if l.geometry != Geometry::of(image) {
                return Err(Error::GeometryMismatch(
                    "cached latent was produced from a different image".into(),
                ));
            }
            l
        }
        None => {
            cost += Cost::encoder();
            Arc::new(encode_latent(image, model)?)
        }
    };
    let q = quantize(&latent, model.gain(), delta_beta);
    let bpp = estimate_rate(&q, image.pixel_count());
    cost += Cost::entropy();
    let recon = decode(&q, model.gain(), delta_beta, latent.geometry)?;
    cost += Cost::decoder();
    let mse = image.mse(&recon)?;
    Ok(Evaluation {
        point: RateDistortionPoint::new(bpp, mse),
        latent,
        cost,
    })
}
