//! Kernel ridge regression, SVM on precomputed Grams, learning curves and
//! cross-validated bandwidth selection.

mod curves;
mod krr;
mod svm;
mod tuning;

pub use curves::*;
pub use krr::*;
pub use svm::*;
pub use tuning::*;

/// Ridge applied when λ = 0 is requested.
pub const MIN_RIDGE: f64 = 1e-10;
