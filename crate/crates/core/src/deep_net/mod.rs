//! Fully connected ReLU network trained by minibatch SGD, with the MNIST
//! and Gaussian-noise input ensembles.

mod mlp;
mod mnist;
mod train;

pub use mlp::{
    accuracy, backward, cost_and_gradient, dataset_cost, forward_cost, init_params, Batch, Layer, MlpArchitecture,
    MlpParams,
};
pub use mnist::{
    encode_idx_images, encode_idx_labels, load_mnist_idx, make_noise_inputs, parse_idx_images, parse_idx_labels,
    subsample, subsample_indices, InputSource, MnistDataset, IDX_IMAGE_MAGIC, IDX_LABEL_MAGIC, MNIST_PIXELS,
};
pub use train::{sgd_train_halting, CostSource, SgdConfig, StoppingRule, TrainResult, TrainStatus};
