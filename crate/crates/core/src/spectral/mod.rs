//! Truncated spectra of admissible functions and the operators acting on them.

pub mod field;
pub mod kernel;
pub mod multiplier;
pub mod ops;
pub mod transform;

pub use field::SpectralField;
pub use kernel::{kernel_fourier_coefficient, kernel_s};
pub use multiplier::{bifurcation_speed, lambda, lambda_f64, sigma, sigma_f64};
pub use ops::{
    apply_s, bilinear, d_alpha, d_alpha_s, energy, hs_norm, inner_product, nonlinearity,
    nonlinearity_direct, sobolev_weight,
};
pub use transform::{analyze, synthesize};
