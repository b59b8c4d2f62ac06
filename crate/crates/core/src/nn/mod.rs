//! A small deterministic CNN engine: tensors, convolution, pooling, dense
//! layers, softmax cross-entropy with L2 and Adam.

mod adam;
pub(crate) mod gemm;
pub mod init;
pub mod layers;
mod model;
mod tensor;

pub use adam::{adam_step, Adam, AdamState};
pub use layers::{conv2d_forward, maxpool_forward};
pub use model::{
    batch_from_images, softmax_cross_entropy, Architecture, ConvStage, FilterShape, ModelConfig,
    Network, Param, ParamSet,
};
pub use tensor::Tensor;

/// Optimization settings for one training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub optimizer: Adam,
    pub seed: u64,
    pub init_std: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 100,
            epochs: 200,
            optimizer: Adam::default(),
            seed: 0,
            init_std: 0.05,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(crate::error::invalid!("batch size and epochs must be at least 1"));
        }
        if self.init_std <= 0.0 || self.optimizer.learning_rate <= 0.0 {
            return Err(crate::error::invalid!("init std and learning rate must be positive"));
        }
        Ok(())
    }
}
