//! Point values on the uniform grid `α_j = 2πj/N` and back.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::field::{check_lattice, SpectralField};
use crate::error::{Error, Result};

/// Relative size of off-lattice content tolerated by [`analyze`].
const SYMMETRY_TOL: f64 = 1e-10;

fn check_grid(grid: usize, n_max: usize) -> Result<()> {
    let need = 2 * n_max + 1;
    if grid < need {
        return Err(Error::GridTooSmall { grid, n_max, need });
    }
    Ok(())
}

/// Samples `f(α_j)`, `j = 0..grid_size`.
pub fn synthesize(f: &SpectralField, grid_size: usize) -> Result<Vec<f64>> {
    check_grid(grid_size, f.n_max())?;
    let mut buf = vec![Complex64::new(0.0, 0.0); grid_size];
    for (n, c) in f.modes() {
        let n = n as usize;
        buf[n] = c;
        buf[grid_size - n] = c.conj();
    }
    FftPlanner::new()
        .plan_fft_inverse(grid_size)
        .process(&mut buf);
    Ok(buf.into_iter().map(|z| z.re).collect())
}

/// Fourier coefficients of real samples, projected to modes `|n| <= n_max`.
///
/// Fails if the samples carry a mean or content off the lattice `mℤ`.
pub fn analyze(samples: &[f64], m: usize, n_max: usize) -> Result<SpectralField> {
    check_lattice(m, n_max)?;
    let grid = samples.len();
    check_grid(grid, n_max)?;
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    let inv = 1.0 / grid as f64;
    for z in buf.iter_mut() {
        *z *= inv;
    }

    let scale = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = SYMMETRY_TOL * scale + 1e-300;
    if buf[0].norm() > tol {
        return Err(Error::NonzeroMean(buf[0].re));
    }
    let off_lattice = (1..=grid / 2)
        .filter(|n| n % m != 0)
        .map(|n| buf[n].norm())
        .fold(0.0, f64::max);
    if off_lattice > tol {
        return Err(Error::SymmetryViolation {
            m,
            residual: off_lattice / scale,
        });
    }

    let mut f = SpectralField::zeros(m, n_max)?;
    for (slot, c) in f.coeffs_mut().iter_mut().enumerate() {
        *c = buf[(slot + 1) * m];
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    #[test]
    fn cos3_on_64_points() {
        let samples: Vec<f64> = (0..64)
            .map(|j| (3.0 * TAU * j as f64 / 64.0).cos())
            .collect();
        let f = analyze(&samples, 3, 24).unwrap();
        assert!((f.coeff(3) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((f.coeff(-3) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        for n in (6..=24).step_by(3) {
            assert!(f.coeff(n).norm() < 1e-15);
        }
    }

    #[test]
    fn synthesize_matches_pointwise_sum() {
        let f = SpectralField::from_modes(
            4,
            16,
            &[
                (4, Complex64::new(0.3, -0.2)),
                (12, Complex64::new(-0.1, 0.05)),
            ],
        )
        .unwrap();
        let samples = synthesize(&f, 40).unwrap();
        for (j, &v) in samples.iter().enumerate() {
            let a = TAU * j as f64 / 40.0;
            let direct: f64 = f
                .modes()
                .map(|(n, c)| 2.0 * (c * Complex64::from_polar(1.0, n as f64 * a)).re)
                .sum();
            assert!((v - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_small_grid_and_asymmetric_samples() {
        let f = SpectralField::cosine(3, 12, 3, 1.0).unwrap();
        assert!(matches!(
            synthesize(&f, 24),
            Err(Error::GridTooSmall { .. })
        ));
        let samples: Vec<f64> = (0..64)
            .map(|j| (4.0 * TAU * j as f64 / 64.0).cos())
            .collect();
        assert!(matches!(
            analyze(&samples, 3, 24),
            Err(Error::SymmetryViolation { .. })
        ));
        let shifted: Vec<f64> = (0..64)
            .map(|j| 1.0 + (3.0 * TAU * j as f64 / 64.0).cos())
            .collect();
        assert!(matches!(
            analyze(&shifted, 3, 24),
            Err(Error::NonzeroMean(_))
        ));
    }

    proptest! {
        #[test]
        fn round_trip(
            m in 3usize..7,
            k in 1usize..10,
            seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 10),
            extra in 0usize..20,
        ) {
            let coeffs = seed[..k].iter().map(|&(a, b)| Complex64::new(a, b)).collect();
            let f = SpectralField::from_coeffs(m, coeffs).unwrap();
            let grid = 2 * f.n_max() + 1 + extra;
            let g = analyze(&synthesize(&f, grid).unwrap(), m, f.n_max()).unwrap();
            let scale = f.coeffs().iter().map(|c| c.norm()).fold(1e-300, f64::max);
            prop_assert!(f.max_abs_diff(&g).unwrap() <= 1e-13 * scale);
        }
    }
}
