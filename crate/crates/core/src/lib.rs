//! Numerical laboratory for the radially homogeneous 1D SQG model
//!
//! ```text
//! ∂t f + ∂α S f = 2 (Sf)(∂α f) − f (∂α S f)
//! ```
//!
//! on `m`-fold symmetric, mean-zero periodic functions.
//!
//! * [`spectral`]: truncated spectra, the symbols of `S` and `∂α S`, the
//!   dealiased nonlinearity and Sobolev norms.
//! * [`resonance`]: exact rational search for small denominators
//!   `λ(n₁) + … + λ(n_p)`.
//! * [`multilinear`]: multilinear forms and the normal-form operators used to
//!   build corrected energies.
//! * [`evolve`]: integrating-factor RK4 time stepping with energy diagnostics.
//! * [`waves`]: travelling waves by Newton continuation from `cos mα`.

pub mod error;
pub mod evolve;
pub mod fit;
pub mod multilinear;
pub mod resonance;
pub mod spectral;
pub mod waves;

pub use error::{Error, Result};
pub use spectral::SpectralField;
