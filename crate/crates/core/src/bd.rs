//! Rate-distortion curves and Bjøntegaard-delta rate.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of trapezoid intervals used to integrate the fitted log-rate gap.
pub const BD_INTEGRATION_STEPS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdPoint {
    pub bpp: f64,
    pub quality_db: f64,
}

/// Points sorted by strictly increasing bpp.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdCurve {
    points: Vec<RdPoint>,
}

impl RdCurve {
    pub fn new(mut points: Vec<RdPoint>) -> Result<Self> {
        if let Some(p) = points
            .iter()
            .find(|p| !(p.bpp.is_finite() && p.bpp > 0.0 && p.quality_db.is_finite()))
        {
            return Err(Error::Domain(format!(
                "RD point ({}, {}) needs positive finite bpp and finite quality",
                p.bpp, p.quality_db
            )));
        }
        points.sort_by(|a, b| a.bpp.total_cmp(&b.bpp));
        if points.windows(2).any(|w| w[0].bpp == w[1].bpp) {
            return Err(Error::Domain("RD curve has duplicate bpp values".into()));
        }
        if points.windows(2).any(|w| w[1].quality_db < w[0].quality_db) {
            log::warn!("RD curve quality decreases with rate somewhere; fitting anyway");
        }
        Ok(Self { points })
    }

    /// Like [`RdCurve::new`] but drops points that repeat an earlier bpp
    /// (keeping the first) or carry an infinite quality.
    pub fn from_points_lossy(points: impl IntoIterator<Item = RdPoint>) -> Result<Self> {
        let mut pts: Vec<RdPoint> = points
            .into_iter()
            .filter(|p| p.bpp.is_finite() && p.bpp > 0.0 && p.quality_db.is_finite())
            .collect();
        pts.sort_by(|a, b| a.bpp.total_cmp(&b.bpp));
        pts.dedup_by(|b, a| a.bpp == b.bpp);
        Self::new(pts)
    }

    pub fn points(&self) -> &[RdPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn quality_range(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.quality_db), hi.max(p.quality_db))
            })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path)?;
        let points = reader
            .deserialize::<RdPoint>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(points)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        for p in &self.points {
            writer.serialize(p)?;
        }
        writer.flush().map_err(|e| Error::io(path.as_ref(), e))?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BdResult {
    pub bd_rate_percent: f64,
    pub overlap: (f64, f64),
}

/// Cubic `log10(bpp) = p(quality)`, fitted in a normalized quality variable.
struct LogRateFit {
    coeffs: [f64; 4],
    center: f64,
    half_width: f64,
}

impl LogRateFit {
    fn new(curve: &RdCurve) -> Result<Self> {
        let (lo, hi) = curve.quality_range();
        let center = 0.5 * (lo + hi);
        let half_width = 0.5 * (hi - lo);
        if half_width <= 0.0 {
            return Err(Error::Domain(
                "RD curve spans a single quality value".into(),
            ));
        }
        let n = curve.len();
        let design = DMatrix::from_fn(n, 4, |i, j| {
            ((curve.points[i].quality_db - center) / half_width).powi(j as i32)
        });
        let rhs = DVector::from_iterator(n, curve.points.iter().map(|p| p.bpp.log10()));
        let solution = design
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::Domain(format!("cubic fit failed: {e}")))?;
        Ok(Self {
            coeffs: [solution[0], solution[1], solution[2], solution[3]],
            center,
            half_width,
        })
    }

    fn eval(&self, quality: f64) -> f64 {
        let t = (quality - self.center) / self.half_width;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

/// Average rate difference of `test` relative to `anchor` at equal quality,
/// in percent. Negative means `test` needs fewer bits.
///
/// Each curve's log10 rate is fitted as a cubic in quality (interpolating for
/// exactly four points, least squares beyond), and the gap is averaged over
/// the overlapping quality interval with a composite trapezoid rule.
pub fn bd_rate(anchor: &RdCurve, test: &RdCurve) -> Result<BdResult> {
    for curve in [anchor, test] {
        if curve.len() < 4 {
            return Err(Error::InsufficientPoints(curve.len()));
        }
    }
    let (a_lo, a_hi) = anchor.quality_range();
    let (t_lo, t_hi) = test.quality_range();
    let lo = a_lo.max(t_lo);
    let hi = a_hi.min(t_hi);
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::EmptyOverlap);
    }
    let fa = LogRateFit::new(anchor)?;
    let ft = LogRateFit::new(test)?;
    let gap = |q: f64| ft.eval(q) - fa.eval(q);
    let h = (hi - lo) / BD_INTEGRATION_STEPS as f64;
    let interior: f64 = (1..BD_INTEGRATION_STEPS)
        .map(|i| gap(lo + i as f64 * h))
        .sum();
    let integral = h * (0.5 * (gap(lo) + gap(hi)) + interior);
    let avg = integral / (hi - lo);
    Ok(BdResult {
        bd_rate_percent: (10f64.powf(avg) - 1.0) * 100.0,
        overlap: (lo, hi),
    })
}

/// PSNR for 8-bit samples; `+inf` for a perfect reconstruction.
pub fn quality_psnr(mse: f64) -> Result<f64> {
    if mse.is_nan() || mse < 0.0 {
        return Err(Error::Domain(format!("mse {mse} must be non-negative")));
    }
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// `100 * |achieved - target| / target`.
pub fn bit_difference(achieved: f64, target: f64) -> f64 {
    100.0 * (achieved - target).abs() / target
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[(f64, f64)]) -> RdCurve {
        RdCurve::new(
            points
                .iter()
                .map(|&(bpp, quality_db)| RdPoint { bpp, quality_db })
                .collect(),
        )
        .unwrap()
    }

    const ANCHOR: [(f64, f64); 4] = [(0.1, 30.0), (0.2, 33.0), (0.4, 36.0), (0.8, 39.0)];

    fn scaled(points: &[(f64, f64)], f: f64) -> RdCurve {
        curve(&points.iter().map(|&(b, q)| (b * f, q)).collect::<Vec<_>>())
    }

    #[test]
    fn identical_curves_give_zero() {
        let a = curve(&ANCHOR);
        let r = bd_rate(&a, &a).unwrap();
        assert!(r.bd_rate_percent.abs() < 1e-9);
        assert_eq!(r.overlap, (30.0, 39.0));
    }

    #[test]
    fn uniform_rate_scaling() {
        let a = curve(&ANCHOR);
        let up = bd_rate(&a, &scaled(&ANCHOR, 1.1)).unwrap().bd_rate_percent;
        assert!((up - 10.0).abs() < 0.1, "{up}");
        let half = bd_rate(&a, &scaled(&ANCHOR, 0.5)).unwrap().bd_rate_percent;
        assert!((half + 50.0).abs() < 0.1, "{half}");
    }

    #[test]
    fn half_rate_matches_direct_integration() {
        // Independent check: the two fits differ by exactly -log10(2), so the
        // closed-form integral of a constant gives 10^(-log10 2) - 1 = -0.5.
        let expected = (10f64.powf(-(2f64.log10())) - 1.0) * 100.0;
        let got = bd_rate(&curve(&ANCHOR), &scaled(&ANCHOR, 0.5))
            .unwrap()
            .bd_rate_percent;
        assert!((got - expected).abs() < 1e-9);
    }

    #[test]
    fn least_squares_with_five_points() {
        let pts = [
            (0.06, 28.0),
            (0.12, 30.5),
            (0.25, 33.2),
            (0.5, 36.1),
            (0.75, 37.6),
        ];
        let a = curve(&pts);
        let r = bd_rate(&a, &scaled(&pts, 1.25)).unwrap();
        assert!((r.bd_rate_percent - 25.0).abs() < 1e-6);
    }

    #[test]
    fn sign_flips_when_swapped() {
        let a = curve(&ANCHOR);
        let b = curve(&[(0.09, 30.5), (0.19, 33.4), (0.37, 36.2), (0.75, 39.5)]);
        let ab = bd_rate(&a, &b).unwrap().bd_rate_percent;
        let ba = bd_rate(&b, &a).unwrap().bd_rate_percent;
        assert!(ab < 0.0 && ba > 0.0, "{ab} {ba}");
    }

    #[test]
    fn bd_errors() {
        let a = curve(&ANCHOR);
        let short = curve(&ANCHOR[..3]);
        assert!(matches!(
            bd_rate(&a, &short),
            Err(Error::InsufficientPoints(3))
        ));
        let far = curve(&[(0.1, 50.0), (0.2, 51.0), (0.4, 52.0), (0.8, 53.0)]);
        assert!(matches!(bd_rate(&a, &far), Err(Error::EmptyOverlap)));
    }

    #[test]
    fn curve_validation() {
        assert!(RdCurve::new(vec![RdPoint {
            bpp: 0.0,
            quality_db: 30.0
        }])
        .is_err());
        assert!(RdCurve::new(vec![
            RdPoint {
                bpp: 0.1,
                quality_db: 30.0
            },
            RdPoint {
                bpp: 0.1,
                quality_db: 31.0
            },
        ])
        .is_err());
        let lossy = RdCurve::from_points_lossy([
            RdPoint {
                bpp: 0.2,
                quality_db: 31.0,
            },
            RdPoint {
                bpp: 0.1,
                quality_db: 30.0,
            },
            RdPoint {
                bpp: 0.2,
                quality_db: 31.5,
            },
            RdPoint {
                bpp: 0.3,
                quality_db: f64::INFINITY,
            },
        ])
        .unwrap();
        assert_eq!(lossy.len(), 2);
        assert_eq!(lossy.points()[0].bpp, 0.1);
    }

    #[test]
    fn psnr_examples() {
        assert_eq!(quality_psnr(255.0 * 255.0).unwrap(), 0.0);
        assert!((quality_psnr(65.025).unwrap() - 30.0).abs() < 1e-12);
        assert_eq!(quality_psnr(0.0).unwrap(), f64::INFINITY);
        assert!(quality_psnr(-1.0).is_err());
    }

    #[test]
    fn bit_difference_examples() {
        assert!((bit_difference(0.26, 0.25) - 4.0).abs() < 1e-12);
        assert_eq!(bit_difference(0.25, 0.25), 0.0);
        let d = bit_difference(0.12 * 1.09, 0.12);
        assert!((d - 9.0).abs() < 1e-9);
        assert!(d <= 10.0);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let a = curve(&ANCHOR);
        a.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("bpp,quality_db\n"));
        assert_eq!(RdCurve::read_csv(&path).unwrap(), a);
    }
}
