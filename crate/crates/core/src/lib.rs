//! Autoencoder epoch-latent augmentation for one-class anomaly detection.
//!
//! The pipeline trains a small undercomplete autoencoder on normal data,
//! collects the bottleneck activations produced at the end of each of the
//! last few training epochs, and uses the concatenation as an enlarged
//! training set for one-class detectors (LOF, Gaussian KDE, Isolation
//! Forest). SMOTE, ADASYN, Gaussian noise and plain single-epoch latents are
//! provided as baselines, along with the ranking metrics and statistics used
//! to compare them.

pub mod augment;
pub mod autoencoder;
pub mod data;
pub mod error;
pub mod experiment;
mod knn;
pub mod metrics;
pub mod occ;
mod rng;

pub use error::{Error, Result};
