//! Bit rate matching for variable-rate image codecs.
//!
//! * [`codec`]: a deterministic block-DCT codec with a per-band gain unit whose
//!   rate responds monotonically to the displacement `delta = beta / beta_train`.
//! * [`rate`]: the [`rate::RateCurve`] abstraction over codec-backed, synthetic
//!   log-linear and tabulated curves.
//! * [`brm`]: model selection, `beta` searches and the two end-to-end pipelines.
//! * [`bd`]: RD curves and Bjøntegaard-delta rate.
//! * [`harness`]: corpus experiments, sweeps and reports.

pub mod bd;
pub mod brm;
pub mod codec;
pub mod cost;
pub mod error;
pub mod harness;
pub mod image;
pub mod rate;

pub use crate::brm::{run_brm, BrmConfig, BrmResult, Method, SearchTrace, TargetSpec};
pub use crate::codec::{CodecModel, GainVector, LatentTensor, RateDistortionPoint};
pub use crate::cost::Cost;
pub use crate::error::{Error, Result};
pub use crate::image::Image;
pub use crate::rate::{Probe, RateCurve};
