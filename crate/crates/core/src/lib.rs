//! Calibration-attack laboratory.
//!
//! Small dense ReLU networks with exact reverse-mode gradients, three
//! L∞-bounded perturbation generators (the inverse adversarial attack that
//! drives predictions towards underconfidence, PGD for overconfidence, and
//! uniform noise), signed calibration metrics, and the training loop that
//! folds those perturbations back into training.

pub mod attacks;
pub mod calibration;
pub mod checkpoint;
pub mod data;
mod error;
pub mod nn;
mod parallel;
pub mod rng;
pub mod tensor;
pub mod training;

pub use attacks::{AttackConfig, AttackOutcome, Method};
pub use calibration::{CalibrationReport, PredictionRecord};
pub use data::Dataset;
pub use error::{Error, Result};
pub use nn::{LossTarget, Model, ProbVector};
pub use tensor::Tensor;
pub use training::{Strategy, TrainConfig, TrainHistory};
