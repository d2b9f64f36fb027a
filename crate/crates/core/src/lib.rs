//! Quantum fidelity kernels with a bandwidth knob: statevector simulation,
//! Gram matrices, Mercer spectra, a self-consistent generalization-error
//! predictor and the learners used to check it.

pub mod datasets;
pub mod error;
pub mod featuremaps;
pub mod gentheory;
pub mod kernels;
pub mod learners;
pub mod linalg;
pub mod rng;
pub mod simcore;
pub mod spectral;

pub use error::{Error, Result};
pub use featuremaps::{FeatureMapFamily, FeatureMapSpec};
pub use kernels::GramMatrix;
pub use simcore::Statevector;
