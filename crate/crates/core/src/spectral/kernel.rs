//! The convolution kernel `S(α) = −(1/8π)(1 + 3 cos 2α) log(1 − cos α)`.

use std::f64::consts::{LN_2, PI, TAU};

use crate::error::{Error, Result};

/// Closed-form kernel value. `log(1 − cos α)` is evaluated as
/// `ln 2 + 2 ln|sin(α/2)|` to avoid cancellation near the singularity.
pub fn kernel_s(alpha: f64) -> Result<f64> {
    let reduced = alpha.rem_euclid(TAU);
    let half_sin = (0.5 * alpha).sin().abs();
    if reduced == 0.0 || half_sin == 0.0 || !alpha.is_finite() {
        return Err(Error::KernelSingularity(alpha));
    }
    let log_term = LN_2 + 2.0 * half_sin.ln();
    Ok(-(1.0 + 3.0 * (2.0 * alpha).cos()) * log_term / (8.0 * PI))
}

/// `(1/2π) ∫₀^{2π} S(α) e^{−inα} dα` by double-exponential quadrature.
///
/// `S` is even about `π`, so the integral is folded onto `(0, π)` and split
/// into panels; the logarithmic endpoint singularity sits at `α = 0` only.
/// Returns the coefficient and the accumulated error estimate.
pub fn kernel_fourier_coefficient(n: i64, target_error: f64) -> (f64, f64) {
    const PANELS: usize = 8;
    let width = PI / PANELS as f64;
    let integrand = |a: f64| match kernel_s(a) {
        Ok(s) => s * (n as f64 * a).cos(),
        Err(_) => 0.0,
    };
    let mut total = 0.0;
    let mut err = 0.0;
    for k in 0..PANELS {
        let out = quadrature::integrate(
            integrand,
            k as f64 * width,
            (k + 1) as f64 * width,
            target_error / PANELS as f64,
        );
        total += out.integral;
        err += out.error_estimate;
    }
    (total / PI, err / PI)
}
