//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use brm_core::codec::{CodecModel, GainVector};
use brm_core::harness::codec_family;
use brm_core::rate::CodecCurve;
use brm_core::Image;

/// A deterministic textured grayscale image.
pub fn texture(width: usize, height: usize) -> Arc<Image> {
    let img = Image::from_fn(width, height, 1, |x, y, _| {
        let (x, y) = (x as f64, y as f64);
        let v = 128.0 + 45.0 * (x * 0.11).sin() * (y * 0.07).cos() + 25.0 * ((x + y) * 0.37).sin();
        v.clamp(0.0, 255.0) as u8
    })
    .expect("valid image");
    Arc::new(img)
}

/// The default four-model family.
pub fn models() -> Vec<CodecModel> {
    [
        (0.002, 0.1, 2.0, 1.0 / 256.0),
        (0.007, 0.3, 1.4, 1.0 / 128.0),
        (0.015, 0.4, 2.0, 1.0 / 64.0),
        (0.05, 0.6, 6.0, 1.0 / 32.0),
    ]
    .iter()
    .enumerate()
    .map(|(i, &(bt, lo, hi, s))| {
        CodecModel::new(i as u32, bt, GainVector::jpeg_scaled(s).unwrap(), lo, hi).unwrap()
    })
    .collect()
}

pub fn family(image: &Arc<Image>, cached: bool) -> Vec<CodecCurve> {
    codec_family(image, &models(), cached)
}
