//! Image experiments: data loading, model files, completion scoring and
//! the end-to-end training pipeline.

pub mod completion;
pub mod dataset;
pub mod model_file;

pub use completion::{
    bar_world, complete_and_score, masked_mse, nn_baseline, CompletionReport, CompletionTask,
    ImageCompletion, Side,
};
pub use dataset::{load_dataset, ConstantPolicy, ImageDataset, ImageFormat, Normalization};
pub use model_file::ModelFile;

use crate::error::Result;
use crate::learning::{train, TrainConfig, TrainOutcome};
use crate::structure::{generate_image_spn, init_gaussian_leaves, ImageArchConfig};

/// Generates the image architecture for `data`, initializes its leaves
/// from the data and trains its weights.
pub fn train_image_model(
    data: &ImageDataset,
    arch: &ImageArchConfig,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    let arch = ImageArchConfig { width: data.width, height: data.height, ..arch.clone() };
    let leaves = init_gaussian_leaves(&data.images, data.pixels(), arch.k_components)?;
    let spn = generate_image_spn(&arch, &leaves)?;
    train(spn, &data.evidence(), config)
}
