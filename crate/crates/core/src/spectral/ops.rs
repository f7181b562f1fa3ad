use std::cell::RefCell;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::field::SpectralField;
use super::multiplier::{lambda_unchecked, sigma_unchecked};
use crate::error::Result;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `Sf`: multiplies `f̂(n)` by `sigma(n)`.
pub fn apply_s(f: &SpectralField) -> SpectralField {
    f.map_symbol(|n| Complex64::new(sigma_unchecked(n), 0.0))
}

/// `∂α f`: multiplies `f̂(n)` by `in`.
pub fn d_alpha(f: &SpectralField) -> SpectralField {
    f.map_symbol(|n| Complex64::new(0.0, n as f64))
}

/// `∂α S f`: multiplies `f̂(n)` by `i·lambda(n)`.
pub fn d_alpha_s(f: &SpectralField) -> SpectralField {
    f.map_symbol(|n| Complex64::new(0.0, lambda_unchecked(n)))
}

/// `‖f‖_{H^s} = (Σ_n (1 + n²)^s |f̂(n)|²)^{1/2}`, summed over positive and
/// negative modes.
pub fn hs_norm(f: &SpectralField, s: f64) -> f64 {
    (2.0 * f
        .modes()
        .map(|(n, c)| sobolev_weight(n, s) * c.norm_sqr())
        .sum::<f64>())
    .sqrt()
}

/// `E_s(f) = ½‖f‖²_{H^s}`.
pub fn energy(f: &SpectralField, s: f64) -> f64 {
    f.modes()
        .map(|(n, c)| sobolev_weight(n, s) * c.norm_sqr())
        .sum()
}

/// `(1 + n²)^s`, the squared Sobolev weight.
#[inline]
pub fn sobolev_weight(n: i64, s: f64) -> f64 {
    (1.0 + (n as f64) * (n as f64)).powf(s)
}

/// Real L² pairing `∫₀^{2π} u v dα`.
pub fn inner_product(u: &SpectralField, v: &SpectralField) -> Result<f64> {
    u.same_lattice(v)?;
    Ok(2.0
        * TAU
        * u.coeffs()
            .iter()
            .zip(v.coeffs())
            .map(|(a, b)| (a * b.conj()).re)
            .sum::<f64>())
}

/// The quadratic nonlinearity `N(f) = 2(Sf)(∂α f) − f(∂α S f)`, Galerkin
/// truncated to `|n| <= n_max`.
pub fn nonlinearity(f: &SpectralField) -> SpectralField {
    bilinear(f, f).expect("a field shares its own lattice").0
}

/// `B(a, b) = 2(Sa)(∂α b) − a(∂α S b)`, so that `N(f) = B(f, f)` and the
/// derivative of `N` at `u` in direction `w` is `B(u, w) + B(w, u)`.
///
/// Products are evaluated pseudo-spectrally on a zero-padded grid (3/2 rule),
/// which is alias-free for quadratic terms. Returns the truncated product and
/// its mean (the `n = 0` coefficient), which the caller may discard.
pub fn bilinear(a: &SpectralField, b: &SpectralField) -> Result<(SpectralField, f64)> {
    a.same_lattice(b)?;
    let m = a.m() as i64;
    let modes = a.num_modes();
    // Work in β = mα: a function with modes k·m, |k| <= K, is 2π-periodic in β
    // with modes |k| <= K.
    let grid = product_grid_size(modes);

    let s_a = to_grid(apply_s(a).coeffs(), grid);
    let a_vals = to_grid(a.coeffs(), grid);
    let db = to_grid(d_alpha(b).coeffs(), grid);
    let dsb = to_grid(d_alpha_s(b).coeffs(), grid);

    let mut prod: Vec<Complex64> = (0..grid)
        .map(|j| Complex64::new(2.0 * s_a[j] * db[j] - a_vals[j] * dsb[j], 0.0))
        .collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(grid).process(&mut prod));

    let inv = 1.0 / grid as f64;
    let coeffs = (1..=modes).map(|k| prod[k] * inv).collect();
    let out = SpectralField::from_coeffs(a.m(), coeffs)?;
    debug_assert_eq!(out.n_max() as i64, modes as i64 * m);
    Ok((out, prod[0].re * inv))
}

/// Smallest grid that keeps products of two `K`-mode signals alias-free on
/// modes `|k| <= K`, rounded up to a power of two.
pub(crate) fn product_grid_size(modes: usize) -> usize {
    (3 * modes + 1).next_power_of_two()
}

/// Real samples `Σ_{|k|<=K} c_k e^{ikβ_j}` at `β_j = 2πj/grid` from the
/// positive coefficients `c_1..c_K`.
fn to_grid(coeffs: &[Complex64], grid: usize) -> Vec<f64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); grid];
    for (i, &c) in coeffs.iter().enumerate() {
        let k = i + 1;
        buf[k] = c;
        buf[grid - k] = c.conj();
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(grid).process(&mut buf));
    buf.into_iter().map(|z| z.re).collect()
}

/// Direct `O(K²)` mode-space evaluation of `N(f)`, including the mean.
/// Slow; kept as an independent check of the pseudo-spectral path.
pub fn nonlinearity_direct(f: &SpectralField) -> (SpectralField, Complex64) {
    let m = f.m() as i64;
    let k_max = f.num_modes() as i64;
    let mut out = SpectralField::zeros(f.m(), f.n_max()).expect("valid lattice");
    let mut mean = Complex64::new(0.0, 0.0);
    for k in 0..=k_max {
        let n = k * m;
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in -k_max..=k_max {
            let k2 = k - k1;
            if k1 == 0 || k2 == 0 || k2.abs() > k_max {
                continue;
            }
            let (n1, n2) = (k1 * m, k2 * m);
            let c = I * (2.0 * n2 as f64 * sigma_unchecked(n1) - lambda_unchecked(n2));
            acc += c * f.coeff(n1) * f.coeff(n2);
        }
        if k == 0 {
            mean = acc;
        } else {
            out.set_coeff(n, acc).expect("admissible mode");
        }
    }
    (out, mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::transform::synthesize;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(rng: &mut ChaCha8Rng, m: usize, n_max: usize) -> SpectralField {
        let coeffs = (0..n_max / m)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SpectralField::from_coeffs(m, coeffs).unwrap()
    }

    #[test]
    fn s_on_cos3() {
        let f = SpectralField::cosine(3, 12, 3, 1.0).unwrap();
        let sf = apply_s(&f);
        let expected = SpectralField::cosine(3, 12, 3, 8.0 / 15.0).unwrap();
        assert!(sf.max_abs_diff(&expected).unwrap() < 1e-16);
        let zero = SpectralField::zeros(3, 12).unwrap();
        assert_eq!(apply_s(&zero), zero);
    }

    #[test]
    fn derivative_examples() {
        let f = SpectralField::cosine(3, 12, 3, 1.0).unwrap();
        let expected = SpectralField::sine(3, 12, 3, -3.0).unwrap();
        assert!(d_alpha(&f).max_abs_diff(&expected).unwrap() < 1e-15);
        let g = SpectralField::sine(3, 12, 6, 1.0).unwrap();
        let expected = SpectralField::cosine(3, 12, 6, 6.0).unwrap();
        assert!(d_alpha(&g).max_abs_diff(&expected).unwrap() < 1e-15);
        let zero = SpectralField::zeros(3, 12).unwrap();
        assert_eq!(d_alpha(&zero), zero);
    }

    #[test]
    fn s_then_derivative_on_cos_m() {
        for m in 3..8usize {
            let f = SpectralField::cosine(m, 2 * m, m as i64, 1.0).unwrap();
            let lam = lambda_unchecked(m as i64);
            let expected = SpectralField::sine(m, 2 * m, m as i64, -lam).unwrap();
            assert!(d_alpha(&apply_s(&f)).max_abs_diff(&expected).unwrap() < 1e-15);
            assert!(d_alpha_s(&f).max_abs_diff(&expected).unwrap() < 1e-15);
        }
    }

    #[test]
    fn s_and_derivative_commute_and_ds_is_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = random_field(&mut rng, 3, 24);
            let a = apply_s(&d_alpha(&f));
            let b = d_alpha(&apply_s(&f));
            assert!(a.max_abs_diff(&b).unwrap() < 1e-13);
            let pairing = inner_product(&d_alpha_s(&f), &f).unwrap();
            assert!(pairing.abs() < 1e-12, "{pairing}");
        }
    }

    #[test]
    fn hs_norm_examples() {
        let f = SpectralField::cosine(3, 12, 3, 1.0).unwrap();
        assert!((hs_norm(&f, 0.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((hs_norm(&f, 1.0) - 5f64.sqrt()).abs() < 1e-14);
        let zero = SpectralField::zeros(3, 12).unwrap();
        assert_eq!(hs_norm(&zero, 2.5), 0.0);
        assert!((energy(&f, 1.0) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn nonlinearity_of_single_mode() {
        // N(ε cos 3α) = −(4/5) ε² sin 6α, i.e. f̂(6) = 2iε²/5.
        let eps = 0.3;
        let f = SpectralField::cosine(3, 12, 3, eps).unwrap();
        let n = nonlinearity(&f);
        let expected = Complex64::new(0.0, 0.4 * eps * eps);
        assert!((n.coeff(6) - expected).norm() < 1e-15);
        assert!(n.coeff(3).norm() < 1e-16);
        assert!(n.coeff(9).norm() < 1e-16);
        let zero = SpectralField::zeros(3, 12).unwrap();
        assert_eq!(nonlinearity(&zero).max_abs_diff(&zero).unwrap(), 0.0);
    }

    #[test]
    fn nonlinearity_matches_direct_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (m, n_max) in [(3, 24), (4, 24), (5, 20), (3, 6), (6, 24)] {
            for _ in 0..5 {
                let f = random_field(&mut rng, m, n_max);
                let (fast, mean) = bilinear(&f, &f).unwrap();
                let (slow, slow_mean) = nonlinearity_direct(&f);
                let scale = slow.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
                assert!(fast.max_abs_diff(&slow).unwrap() <= 1e-12 * scale);
                assert!(mean.abs() < 1e-13 * scale);
                assert!(slow_mean.norm() < 1e-13 * scale);
            }
        }
    }

    #[test]
    fn even_profile_gives_odd_nonlinearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let coeffs = (0..8)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect();
        let f = SpectralField::from_coeffs(3, coeffs).unwrap();
        let n = nonlinearity(&f);
        let samples = synthesize(&n, 64).unwrap();
        for j in 1..32 {
            let (a, b) = (samples[j], samples[64 - j]);
            assert!((a + b).abs() < 1e-12, "N(f) not odd at sample {j}");
        }
    }
}
