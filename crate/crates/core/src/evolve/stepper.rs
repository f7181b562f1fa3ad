//! Integrating-factor (Lawson) RK4.
//!
//! Writing `f̂(n, t) = e^{−iλ(n)t} v̂(n, t)` removes the linear term, and the
//! classical RK4 scheme is applied to the equation for `v`. With
//! `E = e^{−iλ dt/2}` one step reads
//!
//! ```text
//! k₁ = N(u)
//! k₂ = N(E(u + dt/2·k₁))
//! k₃ = N(Eu + dt/2·k₂)
//! k₄ = N(E²u + dt·E k₃)
//! u⁺ = E²u + dt/6·(E²k₁ + 2E k₂ + 2E k₃ + k₄)
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::multiplier::lambda_unchecked;
use crate::spectral::{bilinear, SpectralField};

/// Precomputed phase factors for a fixed step size and truncation.
#[derive(Clone, Debug)]
pub struct Stepper {
    dt: f64,
    m: usize,
    n_max: usize,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    linear_only: bool,
}

/// Result of one step: the new field and the change of its mean.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub field: SpectralField,
    pub mean_increment: f64,
}

impl Stepper {
    pub fn new(m: usize, n_max: usize, dt: f64, linear_only: bool) -> Result<Self> {
        let template = SpectralField::zeros(m, n_max)?;
        let phase = |t: f64| -> Vec<Complex64> {
            template
                .modes()
                .map(|(n, _)| Complex64::from_polar(1.0, -lambda_unchecked(n) * t))
                .collect()
        };
        Ok(Self {
            dt,
            m,
            n_max,
            half: phase(0.5 * dt),
            full: phase(dt),
            linear_only,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, u: &SpectralField) -> Result<StepOutput> {
        if u.m() != self.m || u.n_max() != self.n_max {
            return Err(Error::MismatchedTruncation(
                self.m,
                self.n_max,
                u.m(),
                u.n_max(),
            ));
        }
        let out = if self.linear_only {
            StepOutput {
                field: rotate(u, &self.full),
                mean_increment: 0.0,
            }
        } else {
            self.nonlinear_step(u)?
        };
        if !out.field.is_finite() || !out.mean_increment.is_finite() {
            return Err(Error::Instability {
                t: self.dt,
                reason: "non-finite coefficient".to_owned(),
            });
        }
        Ok(out)
    }

    fn nonlinear_step(&self, u: &SpectralField) -> Result<StepOutput> {
        let dt = self.dt;
        let eval = |f: &SpectralField| bilinear(f, f);

        let (k1, m1) = eval(u)?;
        let eu = rotate(u, &self.half);
        let (k2, m2) = eval(&rotate(&u.add_scaled(&k1, 0.5 * dt)?, &self.half))?;
        let (k3, m3) = eval(&eu.add_scaled(&k2, 0.5 * dt)?)?;
        let e2u = rotate(u, &self.full);
        let (k4, m4) = eval(&e2u.add_scaled(&rotate(&k3, &self.half), dt)?)?;

        let mut next = e2u;
        let c = dt / 6.0;
        for (i, slot) in next.coeffs_mut().iter_mut().enumerate() {
            let h = self.half[i];
            *slot += c
                * (self.full[i] * k1.coeffs()[i]
                    + 2.0 * h * (k2.coeffs()[i] + k3.coeffs()[i])
                    + k4.coeffs()[i]);
        }
        Ok(StepOutput {
            field: next,
            mean_increment: c * (m1 + 2.0 * m2 + 2.0 * m3 + m4),
        })
    }
}

fn rotate(f: &SpectralField, phases: &[Complex64]) -> SpectralField {
    let mut out = f.clone();
    for (c, p) in out.coeffs_mut().iter_mut().zip(phases) {
        *c *= p;
    }
    out
}

/// One step of size `dt` (negative steps integrate backwards).
pub fn step(f: &SpectralField, dt: f64) -> Result<SpectralField> {
    Ok(Stepper::new(f.m(), f.n_max(), dt, false)?.step(f)?.field)
}

/// The exact linear flow `f̂(n, t) = e^{−iλ(n)t} f̂(n, 0)`.
pub fn linear_flow(f: &SpectralField, t: f64) -> SpectralField {
    f.map_symbol(|n| Complex64::from_polar(1.0, -lambda_unchecked(n) * t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smooth(m: usize, n_max: usize, eps: f64) -> SpectralField {
        let coeffs = (1..=n_max / m)
            .map(|k| Complex64::from_polar(eps / (k * k * k) as f64, 0.7 * k as f64))
            .collect();
        SpectralField::from_coeffs(m, coeffs).unwrap()
    }

    fn integrate(f: &SpectralField, dt: f64, steps: usize) -> SpectralField {
        let st = Stepper::new(f.m(), f.n_max(), dt, false).unwrap();
        (0..steps).fold(f.clone(), |g, _| st.step(&g).unwrap().field)
    }

    #[test]
    fn zero_stays_zero() {
        let z = SpectralField::zeros(3, 24).unwrap();
        let out = step(&z, 0.1).unwrap();
        assert!(out.coeffs().iter().all(|c| *c == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn linear_mode_is_exact() {
        let f = smooth(3, 24, 1.0);
        let st = Stepper::new(3, 24, 0.37, true).unwrap();
        let mut g = f.clone();
        for _ in 0..100 {
            g = st.step(&g).unwrap().field;
        }
        let exact = linear_flow(&f, 37.0);
        assert!(g.max_abs_diff(&exact).unwrap() < 1e-13);
    }

    #[test]
    fn fourth_order_self_convergence() {
        let f = smooth(3, 24, 0.5);
        let t = 1.0;
        let reference = integrate(&f, t / 400.0, 400);
        let coarse = integrate(&f, t / 25.0, 25)
            .max_abs_diff(&reference)
            .unwrap();
        let fine = integrate(&f, t / 50.0, 50)
            .max_abs_diff(&reference)
            .unwrap();
        let ratio = coarse / fine;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn time_reversal() {
        let f = smooth(4, 24, 0.2);
        let dt = 0.02;
        let fwd = integrate(&f, dt, 100);
        let back = integrate(&fwd, -dt, 100);
        assert!(back.max_abs_diff(&f).unwrap() < 1e-9);
    }
}
