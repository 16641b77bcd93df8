//! The trainable residual network `U`, its optimizer and training loops.

mod adam;
mod checkpoint;
mod head;
mod lipschitz;
mod network;
mod tensor;
mod train;

pub use adam::{Adam, LrSchedule};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CheckpointMeta};
pub use head::{IdentityHead, NullspaceHead, OutputHead, SaturationHead};
pub use lipschitz::{lipschitz_estimate, LipschitzEstimate};
pub use network::{Architecture, ForwardCache, Network, PoolAxes};
pub use train::{
    loss_and_gradient, train, train_ladder, Dataset, LadderRung, Sample, TrainConfig, TrainReport, TrainingScheme,
};

use crate::consistency::LipschitzMap;
use crate::error::Result;
use crate::scalar::Scalar;

/// A network bound to a grid shape so it can act on flat vectors, optionally on rescaled
/// values: `u ↦ s·U(u/s)`.
#[derive(Debug, Clone)]
pub struct GridNet<T> {
    pub net: Network<T>,
    pub h: usize,
    pub w: usize,
    pub scale: f64,
}

impl<T: Scalar> GridNet<T> {
    pub fn new(net: Network<T>, h: usize, w: usize) -> Result<Self> {
        net.architecture().check_grid(h, w)?;
        Ok(Self { net, h, w, scale: 1.0 })
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(crate::error::Error::Config(format!("network scale must be positive, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }
}

impl<T: Scalar> LipschitzMap<T> for GridNet<T> {
    fn eval(&self, u: &[T]) -> Result<Vec<T>> {
        if self.scale == 1.0 {
            return self.net.forward(u, self.h, self.w);
        }
        let s = T::of(self.scale);
        let scaled: Vec<T> = u.iter().map(|&v| v / s).collect();
        Ok(self.net.forward(&scaled, self.h, self.w)?.into_iter().map(|v| v * s).collect())
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.net.lipschitz_upper_bound())
    }
}
