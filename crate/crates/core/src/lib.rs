//! Numerical laboratory for the energy-critical exponential NLS in two dimensions.

pub mod acceptance;
pub mod bessel;
pub mod error;
pub mod evolution;
pub(crate) mod fft;
pub mod field;
pub mod grid;
pub mod harness;
pub mod io;
pub mod nonlinearity;
pub mod orlicz;
pub mod profiles;
pub mod quadrature;
pub mod radial;
pub mod rearrangement;
pub mod scattering;

pub use error::{Result, XnlsError};
pub use field::Field2D;
pub use grid::GridSpec;
