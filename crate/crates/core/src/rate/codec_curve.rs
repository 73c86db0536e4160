use std::sync::{Arc, OnceLock};

use super::{check_bounds, Probe, RateCurve};
use crate::codec::{self, CodecModel, LatentTensor};
use crate::cost::Cost;
use crate::error::Result;
use crate::image::Image;

/// Where a codec-backed curve keeps the unmodified latent between probes.
///
/// `Shared` handles are cheap to clone and may be read from several threads;
/// the first evaluation through any clone fills the slot.
#[derive(Clone, Debug, Default)]
pub enum LatentCache {
    /// Re-run the encoder on every evaluation.
    #[default]
    Disabled,
    Shared(Arc<OnceLock<Arc<LatentTensor>>>),
}

impl LatentCache {
    pub fn shared() -> Self {
        LatentCache::Shared(Arc::default())
    }

    pub fn is_filled(&self) -> bool {
        matches!(self, LatentCache::Shared(slot) if slot.get().is_some())
    }
}

/// A rate curve backed by the toy codec for one `(image, model)` pair.
#[derive(Clone, Debug)]
pub struct CodecCurve {
    image: Arc<Image>,
    model: CodecModel,
    cache: LatentCache,
}

pub fn make_codec_curve(image: Arc<Image>, model: CodecModel, cache: LatentCache) -> CodecCurve {
    CodecCurve {
        image,
        model,
        cache,
    }
}

impl CodecCurve {
    pub fn model(&self) -> &CodecModel {
        &self.model
    }

    pub fn image(&self) -> &Image {
        &self.image
    }

    pub fn cache(&self) -> &LatentCache {
        &self.cache
    }

    fn latent(&self, cost: &mut Cost) -> Result<Arc<LatentTensor>> {
        match &self.cache {
            LatentCache::Disabled => {
                *cost += Cost::encoder();
                Ok(Arc::new(codec::encode_latent(&self.image, &self.model)?))
            }
            LatentCache::Shared(slot) => {
                if let Some(latent) = slot.get() {
                    return Ok(latent.clone());
                }
                let latent = Arc::new(codec::encode_latent(&self.image, &self.model)?);
                *cost += Cost::encoder();
                // a concurrent fill wins; its latent is bit-identical
                Ok(slot.get_or_init(|| latent).clone())
            }
        }
    }
}

impl RateCurve for CodecCurve {
    fn model_id(&self) -> u32 {
        self.model.model_id()
    }

    fn beta_train(&self) -> f64 {
        self.model.beta_train()
    }

    fn beta_min(&self) -> f64 {
        self.model.beta_min()
    }

    fn beta_max(&self) -> f64 {
        self.model.beta_max()
    }

    fn eval_gated(&self, beta: f64, want_loss: &dyn Fn(f64) -> bool) -> Result<Probe> {
        let beta = check_bounds(beta, self.beta_min(), self.beta_max())?;
        let delta = self.model.delta_for(beta);
        let mut cost = Cost::ZERO;
        let latent = self.latent(&mut cost)?;
        let q = codec::quantize(&latent, self.model.gain(), delta);
        let bpp = codec::estimate_rate(&q, self.image.pixel_count());
        cost += Cost::entropy();
        let loss = if want_loss(bpp) {
            let recon = codec::decode(&q, self.model.gain(), delta, latent.geometry())?;
            cost += Cost::decoder();
            Some(self.image.mse(&recon)?)
        } else {
            None
        };
        Ok(Probe {
            beta,
            bpp,
            loss,
            cost,
        })
    }
}
