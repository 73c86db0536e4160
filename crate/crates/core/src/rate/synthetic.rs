use serde::{Deserialize, Serialize};

use super::{check_bounds, Probe, RateCurve};
use crate::cost::Cost;
use crate::error::{Error, Result};

pub const MAX_PERTURBATION_AMPLITUDE: f64 = 0.05;
pub const MAX_PERTURBATION_FREQUENCY: f64 = 3.0;

/// `p(t) = amplitude * sin(frequency * t)` added to the log rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinePerturbation {
    pub amplitude: f64,
    pub frequency: f64,
}

impl SinePerturbation {
    fn at(&self, t: f64) -> f64 {
        self.amplitude * (self.frequency * t).sin()
    }
}

/// `log(bpp) = slope * log(beta) + intercept + p(log beta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticLogLinearCurve {
    slope: f64,
    intercept: f64,
    perturbation: Option<SinePerturbation>,
    beta_min: f64,
    beta_max: f64,
    beta_train: f64,
    model_id: u32,
}

impl SyntheticLogLinearCurve {
    /// An exact log-linear curve; `beta_train` defaults to the geometric mean
    /// of the bounds.
    pub fn new(slope: f64, intercept: f64, beta_min: f64, beta_max: f64) -> Result<Self> {
        if !(slope.is_finite() && slope > 0.0) {
            return Err(Error::Domain(format!("slope {slope} must be positive")));
        }
        if !intercept.is_finite() {
            return Err(Error::Domain("intercept must be finite".into()));
        }
        if !(beta_min > 0.0 && beta_max > beta_min && beta_max.is_finite()) {
            return Err(Error::Domain(format!(
                "beta bounds [{beta_min}, {beta_max}] must be positive and increasing"
            )));
        }
        Ok(Self {
            slope,
            intercept,
            perturbation: None,
            beta_min,
            beta_max,
            beta_train: (beta_min * beta_max).sqrt(),
            model_id: 0,
        })
    }

    /// Adds a sinusoidal deviation. Amplitude is capped at 0.05, frequency at
    /// 3, and `amplitude * frequency < slope` keeps the curve increasing.
    pub fn with_perturbation(mut self, amplitude: f64, frequency: f64) -> Result<Self> {
        if !(0.0..=MAX_PERTURBATION_AMPLITUDE).contains(&amplitude) {
            return Err(Error::Domain(format!(
                "perturbation amplitude {amplitude} outside [0, {MAX_PERTURBATION_AMPLITUDE}]"
            )));
        }
        if !(0.0..=MAX_PERTURBATION_FREQUENCY).contains(&frequency) {
            return Err(Error::Domain(format!(
                "perturbation frequency {frequency} outside [0, {MAX_PERTURBATION_FREQUENCY}]"
            )));
        }
        if amplitude * frequency >= self.slope {
            return Err(Error::Domain(format!(
                "perturbation slope {} would make the curve non-increasing (slope {})",
                amplitude * frequency,
                self.slope
            )));
        }
        self.perturbation = Some(SinePerturbation {
            amplitude,
            frequency,
        });
        Ok(self)
    }

    pub fn with_beta_train(mut self, beta_train: f64) -> Result<Self> {
        check_bounds(beta_train, self.beta_min, self.beta_max)?;
        self.beta_train = beta_train;
        Ok(self)
    }

    pub fn with_model_id(mut self, model_id: u32) -> Self {
        self.model_id = model_id;
        self
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn perturbation(&self) -> Option<SinePerturbation> {
        self.perturbation
    }

    /// The beta at which the unperturbed line reaches `bpp`.
    pub fn exact_beta_for(&self, bpp: f64) -> f64 {
        ((bpp.ln() - self.intercept) / self.slope).exp()
    }
}

pub fn synthetic_eval(curve: &SyntheticLogLinearCurve, beta: f64) -> Result<f64> {
    let beta = check_bounds(beta, curve.beta_min, curve.beta_max)?;
    let t = beta.ln();
    let p = curve.perturbation.map_or(0.0, |p| p.at(t));
    Ok((curve.slope * t + curve.intercept + p).exp())
}

impl RateCurve for SyntheticLogLinearCurve {
    fn model_id(&self) -> u32 {
        self.model_id
    }

    fn beta_train(&self) -> f64 {
        self.beta_train
    }

    fn beta_min(&self) -> f64 {
        self.beta_min
    }

    fn beta_max(&self) -> f64 {
        self.beta_max
    }

    fn eval_gated(&self, beta: f64, _want_loss: &dyn Fn(f64) -> bool) -> Result<Probe> {
        Ok(Probe {
            beta,
            bpp: synthetic_eval(self, beta)?,
            loss: None,
            cost: Cost::entropy(),
        })
    }
}
