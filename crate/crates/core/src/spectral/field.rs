use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated spectrum of a real, mean-zero, `m`-fold symmetric function on
/// the circle, `f(α) = Σ f̂(n) e^{inα}`.
///
/// Only the modes `n = k·m`, `k = 1..=n_max/m` are stored; negative modes
/// follow from reality, `f̂(−n) = conj f̂(n)`, and every other mode is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr", into = "FieldRepr")]
pub struct SpectralField {
    m: usize,
    n_max: usize,
    coeffs: Vec<Complex64>,
}

pub(crate) fn check_lattice(m: usize, n_max: usize) -> Result<()> {
    if m < 3 {
        return Err(Error::InvalidSymmetryOrder(m));
    }
    if n_max == 0 || !n_max.is_multiple_of(m) {
        return Err(Error::InvalidTruncation { m, n_max });
    }
    Ok(())
}

impl SpectralField {
    pub fn zeros(m: usize, n_max: usize) -> Result<Self> {
        check_lattice(m, n_max)?;
        Ok(Self {
            m,
            n_max,
            coeffs: vec![Complex64::new(0.0, 0.0); n_max / m],
        })
    }

    /// Builds a field from `(n, f̂(n))` pairs; negative `n` are stored through
    /// their conjugate partner.
    pub fn from_modes(m: usize, n_max: usize, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(m, n_max)?;
        for &(n, c) in modes {
            f.set_coeff(n, c)?;
        }
        Ok(f)
    }

    /// Builds a field from the positive-mode coefficients `f̂(m), f̂(2m), …`.
    pub fn from_coeffs(m: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let n_max = coeffs.len() * m;
        check_lattice(m, n_max)?;
        Ok(Self { m, n_max, coeffs })
    }

    /// `amplitude · cos(nα)`.
    pub fn cosine(m: usize, n_max: usize, n: i64, amplitude: f64) -> Result<Self> {
        Self::from_modes(m, n_max, &[(n.abs(), Complex64::new(0.5 * amplitude, 0.0))])
    }

    /// `amplitude · sin(nα)`.
    pub fn sine(m: usize, n_max: usize, n: i64, amplitude: f64) -> Result<Self> {
        let c = Complex64::new(0.0, -0.5 * amplitude * n.signum() as f64);
        Self::from_modes(m, n_max, &[(n.abs(), c)])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of stored positive modes, `n_max / m`.
    pub fn num_modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    fn slot(&self, n: i64) -> Option<usize> {
        let a = n.unsigned_abs() as usize;
        if a == 0 || a > self.n_max || !a.is_multiple_of(self.m) {
            return None;
        }
        Some(a / self.m - 1)
    }

    pub fn is_admissible(&self, n: i64) -> bool {
        self.slot(n).is_some()
    }

    /// `f̂(n)`; zero for any mode outside the lattice.
    pub fn coeff(&self, n: i64) -> Complex64 {
        match self.slot(n) {
            Some(i) if n > 0 => self.coeffs[i],
            Some(i) => self.coeffs[i].conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn set_coeff(&mut self, n: i64, c: Complex64) -> Result<()> {
        let i = self.slot(n).ok_or(Error::ModeOutOfLattice {
            n,
            m: self.m,
            n_max: self.n_max,
        })?;
        self.coeffs[i] = if n > 0 { c } else { c.conj() };
        Ok(())
    }

    /// Positive modes with their coefficients.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let m = self.m as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| ((i as i64 + 1) * m, c))
    }

    pub fn same_lattice(&self, other: &Self) -> Result<()> {
        if self.m != other.m || self.n_max != other.n_max {
            return Err(Error::MismatchedTruncation(
                self.m,
                self.n_max,
                other.m,
                other.n_max,
            ));
        }
        Ok(())
    }

    /// Multiplies each `f̂(n)` (n > 0) by `symbol(n)`. The symbol must respect
    /// reality, i.e. `symbol(−n) = conj symbol(n)`.
    pub fn map_symbol(&self, symbol: impl Fn(i64) -> Complex64) -> Self {
        let coeffs = self.modes().map(|(n, c)| c * symbol(n)).collect();
        Self {
            m: self.m,
            n_max: self.n_max,
            coeffs,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            m: self.m,
            n_max: self.n_max,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `self + a·other`.
    pub fn add_scaled(&self, other: &Self, a: f64) -> Result<Self> {
        self.same_lattice(other)?;
        Ok(Self {
            m: self.m,
            n_max: self.n_max,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x + y * a)
                .collect(),
        })
    }

    /// Largest coefficient difference, `max_n |f̂(n) − ĝ(n)|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_lattice(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest stored coefficient off the lattice `mℤ`. The storage only
    /// holds multiples of `m`, so this is identically zero.
    pub fn symmetry_residual(&self) -> f64 {
        0.0
    }

    /// Same field viewed with a different truncation (zero-padded or cut).
    pub fn retruncate(&self, n_max: usize) -> Result<Self> {
        let mut out = Self::zeros(self.m, n_max)?;
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if let Some(&v) = self.coeffs.get(i) {
                *c = v;
            }
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    m: usize,
    n_max: usize,
    modes: Vec<(i64, f64, f64)>,
}

impl From<SpectralField> for FieldRepr {
    fn from(f: SpectralField) -> Self {
        let modes = f.modes().map(|(n, c)| (n, c.re, c.im)).collect();
        FieldRepr {
            m: f.m,
            n_max: f.n_max,
            modes,
        }
    }
}

impl TryFrom<FieldRepr> for SpectralField {
    type Error = Error;

    fn try_from(r: FieldRepr) -> Result<Self> {
        let mut f = SpectralField::zeros(r.m, r.n_max)?;
        for (n, re, im) in r.modes {
            if n <= 0 {
                return Err(Error::ModeOutOfLattice {
                    n,
                    m: r.m,
                    n_max: r.n_max,
                });
            }
            f.set_coeff(n, Complex64::new(re, im))?;
        }
        Ok(f)
    }
}
