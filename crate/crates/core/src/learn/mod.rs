//! Training data from noisy trajectories and two learned model families: a
//! small tanh network and a dense Gaussian process.

mod dataset;
mod gp;
mod mlp;

pub use dataset::{make_dataset, Dataset, DatasetError};
pub use gp::{fit_gp, fit_gp_grid, GpError, GpHyper, GpModel};
pub use mlp::{train_mlp, MlpConfig, MlpModel, TrainError, Trained};
