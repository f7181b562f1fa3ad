//! Fourier symbols of `S` and `∂α S`.
//!
//! For `|n| >= 3` the operator `S` acts on `e^{inα}` by the factor
//! `sigma(n) = (n² - 1) / (|n|³ - 4|n|)` and `∂α S` by `i·lambda(n)` with
//! `lambda(n) = sgn(n) (n² - 1) / (n² - 4)`. Exact values are big rationals;
//! the floating views are derived from the same closed forms.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

fn check_mode(n: i64) -> Result<()> {
    if n.abs() <= 2 {
        return Err(Error::ExcludedMode(n));
    }
    Ok(())
}

/// Dispersion symbol `sgn(n)(n² − 1)/(n² − 4)`.
pub fn lambda(n: i64) -> Result<BigRational> {
    check_mode(n)?;
    let n2 = BigInt::from(n) * BigInt::from(n);
    let value = BigRational::new(&n2 - 1, &n2 - 4);
    Ok(if n < 0 { -value } else { value })
}

/// Symbol of `S`, `(n² − 1)/(|n|³ − 4|n|)`.
pub fn sigma(n: i64) -> Result<BigRational> {
    check_mode(n)?;
    let a = BigInt::from(n.abs());
    let n2 = &a * &a;
    Ok(BigRational::new(&n2 - 1, &a * (&n2 - 4)))
}

pub fn lambda_f64(n: i64) -> Result<f64> {
    check_mode(n)?;
    Ok(lambda_unchecked(n))
}

pub fn sigma_f64(n: i64) -> Result<f64> {
    check_mode(n)?;
    Ok(sigma_unchecked(n))
}

/// Linear wave speed `lambda(m)/m` of the mode-`m` travelling wave.
pub fn bifurcation_speed(m: i64) -> Result<BigRational> {
    Ok(lambda(m)? / BigRational::from_integer(BigInt::from(m)))
}

// Hot-path versions; callers guarantee |n| >= 3.
#[inline]
pub(crate) fn lambda_unchecked(n: i64) -> f64 {
    let n2 = (n as f64) * (n as f64);
    let v = 1.0 + 3.0 / (n2 - 4.0);
    if n < 0 {
        -v
    } else {
        v
    }
}

#[inline]
pub(crate) fn sigma_unchecked(n: i64) -> f64 {
    let a = n.unsigned_abs() as f64;
    (a * a - 1.0) / (a * (a * a - 4.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, ToPrimitive};

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda(3).unwrap(), q(8, 5));
        assert_eq!(lambda(-3).unwrap(), q(-8, 5));
        assert_eq!(lambda(7).unwrap(), q(16, 15));
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(3).unwrap(), q(8, 15));
        assert_eq!(sigma(-3).unwrap(), q(8, 15));
        // sigma(n) ~ 1/|n|
        let n = 100_000i64;
        let ratio = sigma_f64(n).unwrap() * n as f64;
        assert!((ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn low_modes_rejected() {
        for n in -2..=2 {
            assert!(matches!(lambda(n), Err(Error::ExcludedMode(_))));
            assert!(matches!(sigma(n), Err(Error::ExcludedMode(_))));
            assert!(lambda_f64(n).is_err());
        }
    }

    #[test]
    fn float_views_agree_with_exact() {
        for n in (-300..=300).filter(|n: &i64| n.abs() >= 3) {
            let l = lambda(n).unwrap().to_f64().unwrap();
            let s = sigma(n).unwrap().to_f64().unwrap();
            assert!((l - lambda_f64(n).unwrap()).abs() <= 1e-15 * l.abs());
            assert!((s - sigma_f64(n).unwrap()).abs() <= 1e-15 * s.abs());
        }
    }

    #[test]
    fn lambda_decreases_to_one() {
        let mut prev = lambda(3).unwrap();
        assert_eq!(prev, q(8, 5));
        for n in 4..2000 {
            let cur = lambda(n).unwrap();
            assert!(cur < prev);
            assert!(cur > BigRational::one());
            prev = cur;
        }
    }

    #[test]
    fn bifurcation_speeds() {
        assert_eq!(bifurcation_speed(3).unwrap(), q(8, 15));
        assert_eq!(bifurcation_speed(4).unwrap(), q(5, 16));
        assert_eq!(bifurcation_speed(5).unwrap(), q(8, 35));
    }
}
