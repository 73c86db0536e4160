use std::path::Path;

use super::{check_bounds, Probe, RateCurve};
use crate::cost::Cost;
use crate::error::{Error, Result};

/// A recorded rate curve, interpolated piecewise linearly in
/// `(log beta, log bpp)`. Segments touching a zero rate fall back to linear
/// interpolation in `(log beta, bpp)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedCurve {
    betas: Vec<f64>,
    bpps: Vec<f64>,
    beta_train: f64,
    model_id: u32,
}

impl TabulatedCurve {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain(
                "a tabulated curve needs at least two samples".into(),
            ));
        }
        if samples
            .iter()
            .any(|&(b, r)| !(b.is_finite() && b > 0.0 && r.is_finite() && r >= 0.0))
        {
            return Err(Error::Domain(
                "samples need positive beta and non-negative bpp".into(),
            ));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Domain("beta must be strictly increasing".into()));
        }
        if samples.windows(2).any(|w| w[1].1 < w[0].1) {
            return Err(Error::Domain("bpp must be non-decreasing".into()));
        }
        let (betas, bpps): (Vec<_>, Vec<_>) = samples.into_iter().unzip();
        let beta_train = (betas[0] * betas[betas.len() - 1]).sqrt();
        Ok(Self {
            betas,
            bpps,
            beta_train,
            model_id: 0,
        })
    }

    /// Parses one `beta bpp` pair per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(parse_err(format!(
                    "expected 2 columns, found {}",
                    fields.len()
                )));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| parse_err(format!("{s:?}: {e}")))
            };
            samples.push((num(fields[0])?, num(fields[1])?));
        }
        Self::new(samples)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn with_beta_train(mut self, beta_train: f64) -> Result<Self> {
        self.beta_train = check_bounds(beta_train, self.beta_min(), self.beta_max())?;
        Ok(self)
    }

    pub fn with_model_id(mut self, model_id: u32) -> Self {
        self.model_id = model_id;
        self
    }

    fn interpolate(&self, beta: f64) -> f64 {
        let i = self.betas.partition_point(|&b| b <= beta);
        if i == 0 {
            return self.bpps[0];
        }
        if i == self.betas.len() {
            return self.bpps[i - 1];
        }
        let (b0, b1) = (self.betas[i - 1], self.betas[i]);
        if beta == b0 {
            return self.bpps[i - 1];
        }
        let (r0, r1) = (self.bpps[i - 1], self.bpps[i]);
        let t = (beta.ln() - b0.ln()) / (b1.ln() - b0.ln());
        if r0 > 0.0 && r1 > 0.0 {
            (r0.ln() + t * (r1.ln() - r0.ln())).exp()
        } else {
            r0 + t * (r1 - r0)
        }
    }
}

impl RateCurve for TabulatedCurve {
    fn model_id(&self) -> u32 {
        self.model_id
    }

    fn beta_train(&self) -> f64 {
        self.beta_train
    }

    fn beta_min(&self) -> f64 {
        self.betas[0]
    }

    fn beta_max(&self) -> f64 {
        self.betas[self.betas.len() - 1]
    }

    fn eval_gated(&self, beta: f64, _want_loss: &dyn Fn(f64) -> bool) -> Result<Probe> {
        let beta = check_bounds(beta, self.beta_min(), self.beta_max())?;
        Ok(Probe {
            beta,
            bpp: self.interpolate(beta),
            loss: None,
            cost: Cost::entropy(),
        })
    }
}
