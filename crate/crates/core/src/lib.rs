//! Simulation and training of a single-qudit variational classifier.
//!
//! Inputs are encoded as phases on an N-level state (N = number of classes),
//! rotated by a fully parameterized SU(N) unitary, and classified by the most
//! probable computational-basis outcome. Training minimizes the per-class
//! ensemble ("single-shot") error by plain gradient descent.

pub mod classifier;
pub mod dataset;
pub mod error;
pub mod euler;
pub mod fcnn;
pub mod linalg;
pub mod qunit;
pub mod trainer;

pub use classifier::{ClassEnsemble, ForwardReport, ParameterState, QuditClassifier};
pub use dataset::{balanced_split, load_csv, DatasetRegistryEntry, LabeledDataset, SplitSpec};
pub use error::{Error, Result};
pub use euler::{AngleVector, EulerParameterization};
pub use fcnn::{fcnn_evaluate, fcnn_train, fcnn_train_logged, parameter_counts, FcnnEpoch, FcnnConfig, FcnnModel, OutputKind};
pub use linalg::{CMatrix, DensityMatrix, StateVector, UnitaryMatrix};
pub use trainer::{Evaluation, GradientMode, InitScheme, TrainConfig, TrainLog};
