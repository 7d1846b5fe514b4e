//! Wire-mediated coupling of parametrically driven trapped electrons and
//! trapped ions.
//!
//! * [`mathieu`]: Floquet exponent, Fourier coefficients and Wronskian of the
//!   driven electron, and the inverse solve for a working point.
//! * [`coupling`]: equivalent-circuit coupling constants and rates.
//! * [`sweep`]: stability and coupling-strength maps.
//! * [`quantum`]: closed-form single-excitation dynamics of the
//!   ion-electron-ion system.
//! * [`dynamics`]: classical three-oscillator equations of motion, integrated
//!   in native or double-double precision.
//! * [`ensemble`]: Monte-Carlo exchange-cooling runs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod dd;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod mathieu;
pub mod model;
pub mod presets;
pub mod quantum;
pub mod scalar;
pub mod sweep;

pub use dd::DoubleDouble;
pub use error::{Error, Result};
pub use mathieu::{FloquetSolution, MathieuParams};
pub use scalar::Real;

/// Extended-precision scalar (about 106 significand bits).
pub type Extended = DoubleDouble;
