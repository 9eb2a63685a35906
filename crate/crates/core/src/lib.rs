//! Compressive sensing of signals that are sparse in the discrete Hermite
//! transform domain.
//!
//! The crate builds the Hermite basis on the roots of `H_M`, models how
//! randomly missing samples perturb the Hermite coefficients, derives
//! detection thresholds and misdetection probabilities from that model, and
//! reconstructs sparse signals in a single thresholding pass followed by a
//! least-squares solve on the detected support.
//!
//! ```
//! use hermite_cs::{basis::build_basis, sampling::*, detect::reconstruct};
//!
//! let basis = build_basis(64).unwrap();
//! let spec = SparseSignalSpec::new(64, vec![(3, 1.0), (11, -0.8)]).unwrap();
//! let signal = synthesize(&spec, &basis).unwrap();
//! let mask = random_mask(64, 64, 1).unwrap();
//! let meas = measure(&signal, &mask).unwrap();
//! let result = reconstruct(&meas, &basis, 0.99).unwrap();
//! assert_eq!(result.support, vec![3, 11]);
//! ```

pub mod basis;
pub mod detect;
pub mod error;
pub mod harness;
pub mod integrate;
pub mod sampling;
pub mod special;
pub mod stats;
pub mod transform;

pub use basis::{build_basis, HermiteBasis};
pub use error::{Error, Result};
pub use transform::{CoefficientVector, SampleVector};
