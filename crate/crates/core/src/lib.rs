//! Numerical laboratory for self-similar vortex filaments and the cubic NLS.

mod dop853_tableau;

pub mod binormal;
pub mod error;
pub mod frames;
pub mod geometry;
pub mod io;
pub mod nls;
pub mod ode;
pub mod oscillatory;
pub mod profile;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
