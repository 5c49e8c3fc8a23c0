//! Covariance-matrix simulator for teleporting a two-mode squeezed state
//! through a four-mode resource built from two parametric amplifiers and
//! balanced beam splitters.
//!
//! * [`gaussian`]: covariance matrices, amplifier states, physicality.
//! * [`transforms`]: the protocol's beam splitters, read-out selector and
//!   feed-forward, applied by congruence.
//! * [`protocol`]: the end-to-end pipeline, closed forms and limit checks.
//! * [`metrics`]: symplectic spectra, logarithmic negativity, fidelity.
//! * [`verification`]: independent oracles and the acceptance suite.
//! * [`sweep`]: (q, r) parameter grids and their CSV output.

// `!(x > 0.0)` is how the guards reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod gaussian;
pub mod metrics;
pub mod precision;
pub mod protocol;
pub mod sweep;
pub mod transforms;
pub mod verification;

pub use error::{Error, Result};
pub use gaussian::{AmplifierSpec, CovarianceMatrix, SourceSpec};
pub use protocol::{teleport, ProtocolConfig, TeleportReport};
pub use transforms::{GainConvention, LinearTransform};
