//! Domain adaptation with a shallow domain-adversarial neural network.
//!
//! The library trains a one-hidden-layer classifier whose hidden
//! representation is simultaneously pushed, through an adversarial domain
//! regressor, to carry no information about whether an input came from the
//! labeled source domain or the unlabeled target domain. Around that core
//! it provides everything needed to study representations at desk scale:
//!
//! - [`tensor`]: dense/sparse vector types, a seeded deterministic RNG.
//! - [`net`]: the adversarial network, per-example SGD, early stopping,
//!   model serialization.
//! - [`svm`]: a subgradient-trained linear SVM baseline.
//! - [`divergence`]: empirical H-divergence and the proxy A-distance (PAD)
//!   measured by a linear discriminator.
//! - [`msda`]: a closed-form marginalized stacked denoising autoencoder
//!   front-end.
//! - [`data`]: the rotated inter-twinning moons problem, a sparse text
//!   format, task splits, and a synthetic high-dimensional shift benchmark.
//! - [`analysis`]: decision-surface grids, PCA of hidden representations,
//!   and hidden-neuron level sets as CSV-friendly numbers.
//! - [`harness`]: grid search with target-validation selection, PAD sweeps,
//!   and the end-to-end moons pipeline.
//!
//! Start with the runnable examples (`cargo run --example moons_experiment`)
//! or the `dann` binary, which exposes the same flows as subcommands.

pub mod analysis;
pub mod data;
pub mod divergence;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod msda;
pub mod net;
pub mod rng;
pub mod svm;
pub mod tensor;

pub use error::{Error, Result};
pub use net::{DannParams, TrainConfig, TrainMode, TrainReport};
pub use rng::Rng;
pub use tensor::{DenseMat, DenseVec, SparseVec};
