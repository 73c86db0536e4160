//! 8-bit images and binary Netpbm (P5/P6) I/O.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Minimum width and height accepted by the codec.
pub const MIN_DIMENSION: usize = 8;

/// An 8-bit image with 1 or 3 channels, samples stored row-major and
/// channel-interleaved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<u8>) -> Result<Self> {
        if width < MIN_DIMENSION || height < MIN_DIMENSION {
            return Err(Error::DimensionTooSmall { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!(
                "{channels} channels; only 1 or 3 are supported"
            )));
        }
        if samples.len() != width * height * channels {
            return Err(Error::InvalidImage(format!(
                "expected {} samples for {width}x{height}x{channels}, got {}",
                width * height * channels,
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    /// An image with every sample set to `value`.
    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    /// Builds an image from a per-sample function of `(x, y, channel)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    samples.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    #[inline]
    pub fn sample(&self, x: usize, y: usize, c: usize) -> u8 {
        self.samples[(y * self.width + x) * self.channels + c]
    }

    /// Mean squared error over all samples. Both images must share geometry.
    pub fn mse(&self, other: &Image) -> Result<f64> {
        if (self.width, self.height, self.channels) != (other.width, other.height, other.channels) {
            return Err(Error::GeometryMismatch(format!(
                "{}x{}x{} vs {}x{}x{}",
                self.width, self.height, self.channels, other.width, other.height, other.channels
            )));
        }
        let sum: u64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| {
                let d = i64::from(a) - i64::from(b);
                (d * d) as u64
            })
            .sum();
        Ok(sum as f64 / self.samples.len() as f64)
    }

    pub fn read_pnm(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode_pnm(&bytes)
    }

    /// Parses a binary PGM (P5) or PPM (P6) with maxval 255.
    pub fn decode_pnm(bytes: &[u8]) -> Result<Self> {
        let mut header = HeaderReader { bytes, pos: 0 };
        let channels = match header.magic()? {
            [b'P', b'5'] => 1,
            [b'P', b'6'] => 3,
            m => {
                return Err(Error::Pnm(format!(
                    "unsupported magic {:?}; expected P5 or P6",
                    String::from_utf8_lossy(&m)
                )))
            }
        };
        let width = header.number("width")?;
        let height = header.number("height")?;
        let maxval = header.number("maxval")?;
        if maxval != 255 {
            return Err(Error::Pnm(format!(
                "maxval {maxval}; only 255 is supported"
            )));
        }
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(header.pos) {
            Some(b) if b.is_ascii_whitespace() => header.pos += 1,
            _ => return Err(Error::Pnm("missing whitespace after maxval".into())),
        }
        let len = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| Error::Pnm("raster size overflows".into()))?;
        let raster = bytes
            .get(header.pos..header.pos + len)
            .ok_or_else(|| Error::Pnm(format!("truncated raster: expected {len} bytes")))?;
        Self::new(width, height, channels, raster.to_vec())
    }

    pub fn encode_pnm(&self) -> Vec<u8> {
        let magic = if self.channels == 1 { "P5" } else { "P6" };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.samples);
        out
    }

    pub fn write_pnm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&self.encode_pnm())
            .map_err(|e| Error::io(path, e))
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn magic(&mut self) -> Result<[u8; 2]> {
        let m = self
            .bytes
            .get(0..2)
            .ok_or_else(|| Error::Pnm("file too short".into()))?;
        self.pos = 2;
        Ok([m[0], m[1]])
    }

    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Pnm(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pnm(format!("{what} out of range")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_images() {
        assert!(matches!(
            Image::filled(7, 8, 1, 0),
            Err(Error::DimensionTooSmall {
                width: 7,
                height: 8
            })
        ));
        assert!(Image::filled(8, 8, 1, 0).is_ok());
    }

    #[test]
    fn rejects_two_channel_images() {
        assert!(matches!(
            Image::filled(8, 8, 2, 0),
            Err(Error::InvalidImage(_))
        ));
    }

    #[test]
    fn pnm_header_with_comments() {
        let mut bytes = b"P5\n# a comment\n8 # trailing\n8\n255\n".to_vec();
        bytes.extend((0..64).map(|i| i as u8));
        let img = Image::decode_pnm(&bytes).unwrap();
        assert_eq!((img.width(), img.height(), img.channels()), (8, 8, 1));
        assert_eq!(img.sample(3, 1, 0), 11);
    }

    #[test]
    fn ppm_round_trip() {
        let img = Image::from_fn(9, 10, 3, |x, y, c| (x * 7 + y * 3 + c * 50) as u8).unwrap();
        let back = Image::decode_pnm(&img.encode_pnm()).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn pnm_errors() {
        assert!(Image::decode_pnm(b"P2\n8 8\n255\n").is_err());
        assert!(Image::decode_pnm(b"P5\n8 8\n65535\n").is_err());
        assert!(Image::decode_pnm(b"P5\n8 8\n255\n\x00\x01").is_err());
        assert!(Image::decode_pnm(b"P5\n8\n").is_err());
    }

    #[test]
    fn mse_of_identical_images_is_zero() {
        let a = Image::from_fn(8, 8, 1, |x, y, _| (x + y) as u8).unwrap();
        assert_eq!(a.mse(&a).unwrap(), 0.0);
        let b = Image::filled(8, 8, 1, 0).unwrap();
        let expected = (0..8)
            .flat_map(|y| (0..8).map(move |x| ((x + y) * (x + y)) as f64))
            .sum::<f64>()
            / 64.0;
        assert_eq!(a.mse(&b).unwrap(), expected);
        assert!(a.mse(&Image::filled(9, 8, 1, 0).unwrap()).is_err());
    }
}
