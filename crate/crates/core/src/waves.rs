//! Travelling waves `f(α, t) = u(α − vt)` bifurcating from `cos mα`.
//!
//! A wave profile is an even `m`-fold symmetric function, stored as cosine
//! coefficients `a_k` of `cos(kmα)` for `k = 1..K`. The travelling-wave
//! equation
//!
//! ```text
//! R(u, v) = −S u′ + v u′ + 2 u′ Su − u S u′ = 0
//! ```
//!
//! maps such profiles to odd functions, so residuals are sine coefficients
//! `b_k` of `sin(kmα)`. All products are evaluated exactly in this real
//! cosine/sine basis and truncated to `k ≤ K`, which is the same Galerkin
//! truncation used by the time stepper with `n_max = Km`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::fit_slope;
use crate::spectral::multiplier::{lambda_unchecked, sigma_unchecked};
use crate::spectral::SpectralField;

/// Coefficients below this magnitude are ignored by [`decay_rate`].
pub const NOISE_FLOOR: f64 = 1e-14;

/// Default number of retained harmonics for symmetry order `m`.
pub fn default_modes(m: usize) -> usize {
    (64 / m).max(4)
}

/// `v_m = λ(m)/m`, the speed at which `cos mα` solves the linearized
/// equation.
pub fn linear_speed(m: usize) -> f64 {
    lambda_unchecked(m as i64) / m as f64
}

/// Sine series of `(Σ c_i cos iβ)(Σ s_j sin jβ)`, truncated to `K` terms.
/// Slices are indexed by `k − 1`.
fn cos_times_sin(c: &[f64], s: &[f64]) -> Vec<f64> {
    let k_max = c.len();
    let mut out = vec![0.0; k_max];
    for (i, &ci) in c.iter().enumerate() {
        if ci == 0.0 {
            continue;
        }
        let i = i + 1;
        for (j, &sj) in s.iter().enumerate() {
            let j = j + 1;
            let half = 0.5 * ci * sj;
            if i + j <= k_max {
                out[i + j - 1] += half;
            }
            if j > i {
                out[j - i - 1] += half;
            } else if i > j {
                out[i - j - 1] -= half;
            }
        }
    }
    out
}

struct Derived {
    /// Sine coefficients of `u′`.
    du: Vec<f64>,
    /// Cosine coefficients of `Su`.
    su: Vec<f64>,
    /// Sine coefficients of `Su′`.
    sdu: Vec<f64>,
}

fn derived(m: usize, a: &[f64]) -> Derived {
    let modes = |k: usize| ((k + 1) * m) as i64;
    Derived {
        du: a
            .iter()
            .enumerate()
            .map(|(k, &x)| -(modes(k) as f64) * x)
            .collect(),
        su: a
            .iter()
            .enumerate()
            .map(|(k, &x)| sigma_unchecked(modes(k)) * x)
            .collect(),
        sdu: a
            .iter()
            .enumerate()
            .map(|(k, &x)| -lambda_unchecked(modes(k)) * x)
            .collect(),
    }
}

/// `2 a′ S b − a S b′` as sine coefficients.
fn quadratic(m: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let da = derived(m, a);
    let db = derived(m, b);
    let first = cos_times_sin(&db.su, &da.du);
    let second = cos_times_sin(a, &db.sdu);
    first
        .iter()
        .zip(&second)
        .map(|(x, y)| 2.0 * x - y)
        .collect()
}

/// Sine coefficients of `−S w′ + v w′`.
fn linear_part(m: usize, w: &[f64], v: f64) -> Vec<f64> {
    w.iter()
        .enumerate()
        .map(|(k, &x)| {
            let n = ((k + 1) * m) as i64;
            (lambda_unchecked(n) - v * n as f64) * x
        })
        .collect()
}

fn check_input(m: usize, a: &[f64]) -> Result<()> {
    if m < 3 {
        return Err(Error::InvalidSymmetryOrder(m));
    }
    if a.is_empty() {
        return Err(Error::InvalidInput(
            "wave profile needs at least one mode".to_owned(),
        ));
    }
    Ok(())
}

/// Sine coefficients of `R(u, v)` for `u = Σ a_k cos(kmα)`.
pub fn residual(m: usize, a: &[f64], v: f64) -> Result<Vec<f64>> {
    check_input(m, a)?;
    let lin = linear_part(m, a, v);
    let quad = quadratic(m, a, a);
    Ok(lin.iter().zip(&quad).map(|(x, y)| x + y).collect())
}

/// Directional derivative of `R` in `u` along the cosine perturbation `w`:
/// `−Sw′ + vw′ + 2w′Su + 2u′Sw − wSu′ − uSw′`.
pub fn jacobian_apply(m: usize, a: &[f64], v: f64, w: &[f64]) -> Result<Vec<f64>> {
    check_input(m, a)?;
    if w.len() != a.len() {
        return Err(Error::InvalidInput(format!(
            "perturbation has {} modes, profile has {}",
            w.len(),
            a.len()
        )));
    }
    let lin = linear_part(m, w, v);
    let q1 = quadratic(m, a, w);
    let q2 = quadratic(m, w, a);
    Ok((0..a.len()).map(|k| lin[k] + q1[k] + q2[k]).collect())
}

/// Matrix of [`jacobian_apply`] on the cosine basis.
pub fn linearized_operator(m: usize, a: &[f64], v: f64) -> Result<DMatrix<f64>> {
    let k = a.len();
    let mut mat = DMatrix::zeros(k, k);
    let mut e = vec![0.0; k];
    for j in 0..k {
        e[j] = 1.0;
        let col = jacobian_apply(m, a, v, &e)?;
        mat.set_column(j, &DVector::from_vec(col));
        e[j] = 0.0;
    }
    Ok(mat)
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// One solution on a branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavePoint {
    pub m: usize,
    pub xi: f64,
    pub v: f64,
    /// `a_k` for `cos(kmα)`, `k = 1..K`; `a_1 = ξ`.
    pub cosine_coeffs: Vec<f64>,
    /// `ℓ²` norm of the sine coefficients of `R(u, v)`.
    pub residual_norm: f64,
}

impl WavePoint {
    pub fn num_modes(&self) -> usize {
        self.cosine_coeffs.len()
    }

    /// The profile as a spectral field with `n_max = Km`.
    pub fn to_field(&self) -> Result<SpectralField> {
        SpectralField::from_coeffs(
            self.m,
            self.cosine_coeffs
                .iter()
                .map(|&a| Complex64::new(0.5 * a, 0.0))
                .collect(),
        )
    }

    /// `û(n)·e^{−invt}`, the profile translated by `vt`.
    pub fn translated(&self, t: f64) -> Result<SpectralField> {
        let v = self.v;
        Ok(self
            .to_field()?
            .map_symbol(|n| Complex64::from_polar(1.0, -(n as f64) * v * t)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 50,
        }
    }
}

/// Initial guess for [`newton_solve`]: shape `a_k/ξ` and speed.
#[derive(Clone, Debug, PartialEq)]
pub struct Guess {
    pub shape: Vec<f64>,
    pub v: f64,
}

impl Guess {
    /// `cos mα` at the bifurcation speed.
    pub fn linear(m: usize, k_modes: usize) -> Self {
        let mut shape = vec![0.0; k_modes];
        shape[0] = 1.0;
        Self {
            shape,
            v: linear_speed(m),
        }
    }

    pub fn from_point(p: &WavePoint) -> Self {
        if p.xi == 0.0 {
            return Self::linear(p.m, p.num_modes());
        }
        Self {
            shape: p.cosine_coeffs.iter().map(|a| a / p.xi).collect(),
            v: p.v,
        }
    }
}

/// Solves `R(u, v) = 0` with `a_1 = ξ` pinned, for `(a_2, …, a_K, v)`.
///
/// The unknowns are scaled as `u = ξ w` with `w = cos mα + Σ_{k≥2} c_k
/// cos(kmα)`, which keeps the problem regular at small `ξ`. Newton steps are
/// halved until the residual decreases.
pub fn newton_solve(m: usize, xi: f64, guess: &Guess, opts: &NewtonOptions) -> Result<WavePoint> {
    let k_modes = guess.shape.len();
    check_input(m, &guess.shape)?;
    if !xi.is_finite() {
        return Err(Error::InvalidInput(format!(
            "amplitude must be finite, got {xi}"
        )));
    }
    if xi == 0.0 {
        return Ok(WavePoint {
            m,
            xi,
            v: linear_speed(m),
            cosine_coeffs: vec![0.0; k_modes],
            residual_norm: 0.0,
        });
    }

    let scaled = |w: &[f64], v: f64| -> Vec<f64> {
        let lin = linear_part(m, w, v);
        let quad = quadratic(m, w, w);
        lin.iter().zip(&quad).map(|(a, b)| a + xi * b).collect()
    };
    let mut w = guess.shape.clone();
    w[0] = 1.0;
    let mut v = guess.v;
    let mut g = scaled(&w, v);
    let mut res = xi.abs() * l2(&g);

    for _ in 0..opts.max_iter {
        if res <= 1e-3 * opts.tol {
            break;
        }
        // Columns: ∂/∂c_k for k = 2..K, then ∂/∂v.
        let mut jac = DMatrix::zeros(k_modes, k_modes);
        let mut e = vec![0.0; k_modes];
        for j in 1..k_modes {
            e[j] = 1.0;
            let lin = linear_part(m, &e, v);
            let q1 = quadratic(m, &w, &e);
            let q2 = quadratic(m, &e, &w);
            for k in 0..k_modes {
                jac[(k, j - 1)] = lin[k] + xi * (q1[k] + q2[k]);
            }
            e[j] = 0.0;
        }
        for k in 0..k_modes {
            jac[(k, k_modes - 1)] = -(((k + 1) * m) as f64) * w[k];
        }
        let rhs = -DVector::from_vec(g.clone());
        let Some(delta) = jac.lu().solve(&rhs) else {
            break;
        };

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut w_try = w.clone();
            for j in 1..k_modes {
                w_try[j] += step * delta[j - 1];
            }
            let v_try = v + step * delta[k_modes - 1];
            let g_try = scaled(&w_try, v_try);
            let res_try = xi.abs() * l2(&g_try);
            if res_try < res {
                w = w_try;
                v = v_try;
                g = g_try;
                res = res_try;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    if res.is_nan() || res > opts.tol || !v.is_finite() {
        return Err(Error::NewtonFailure { xi, residual: res });
    }
    let mut coeffs: Vec<f64> = w.iter().map(|c| xi * c).collect();
    coeffs[0] = xi;
    let residual_norm = l2(&residual(m, &coeffs, v)?);
    Ok(WavePoint {
        m,
        xi,
        v,
        cosine_coeffs: coeffs,
        residual_norm,
    })
}

/// Where and why continuation stopped early.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Termination {
    pub xi: f64,
    pub residual: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSettings {
    pub xi_max: f64,
    pub steps: usize,
    pub k_modes: usize,
    pub newton: NewtonOptions,
}

/// Solutions ordered by `ξ`, starting from the first step away from zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveBranch {
    pub m: usize,
    pub settings: BranchSettings,
    pub points: Vec<WavePoint>,
    pub termination: Option<Termination>,
}

impl WaveBranch {
    /// CSV with columns `xi,v,residual,decay_c,a_1,…,a_K`; `decay_c` is
    /// `NaN` where too few coefficients are resolved.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        write!(out, "xi,v,residual,decay_c")?;
        for k in 1..=self.settings.k_modes {
            write!(out, ",a_{k}")?;
        }
        writeln!(out)?;
        for p in &self.points {
            let c = decay_rate(p).unwrap_or(f64::NAN);
            write!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                p.xi, p.v, p.residual_norm, c
            )?;
            for a in &p.cosine_coeffs {
                write!(out, ",{a:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Marches `ξ_i = ξ_max·i/steps`, `i = 1..steps`, predicting each point by
/// linear extrapolation of the previous two. Stops at the first Newton
/// failure and returns the partial branch.
pub fn continue_branch(
    m: usize,
    xi_max: f64,
    steps: usize,
    k_modes: usize,
    newton: &NewtonOptions,
) -> Result<WaveBranch> {
    if m < 3 {
        return Err(Error::InvalidSymmetryOrder(m));
    }
    if steps == 0 || k_modes < 2 || !xi_max.is_finite() || xi_max == 0.0 {
        return Err(Error::InvalidInput(format!(
            "need steps >= 1, K >= 2 and nonzero finite xi_max (got {steps}, {k_modes}, {xi_max})"
        )));
    }
    let mut branch = WaveBranch {
        m,
        settings: BranchSettings {
            xi_max,
            steps,
            k_modes,
            newton: *newton,
        },
        points: Vec::with_capacity(steps),
        termination: None,
    };
    for i in 1..=steps {
        let xi = xi_max * i as f64 / steps as f64;
        let guess = match branch.points.as_slice() {
            [] => Guess::linear(m, k_modes),
            [p] => Guess::from_point(p),
            [.., p, q] => {
                let (gp, gq) = (Guess::from_point(p), Guess::from_point(q));
                let r = (xi - q.xi) / (q.xi - p.xi);
                Guess {
                    shape: gq
                        .shape
                        .iter()
                        .zip(&gp.shape)
                        .map(|(b, a)| b + r * (b - a))
                        .collect(),
                    v: gq.v + r * (gq.v - gp.v),
                }
            }
        };
        match newton_solve(m, xi, &guess, newton) {
            Ok(p) => branch.points.push(p),
            Err(Error::NewtonFailure { xi, residual }) => {
                branch.termination = Some(Termination {
                    xi,
                    residual,
                    reason: "Newton iteration did not converge".to_owned(),
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(branch)
}

/// Independent branches for several symmetry orders, computed in parallel.
pub fn continue_branches(
    ms: &[usize],
    xi_max: f64,
    steps: usize,
    newton: &NewtonOptions,
) -> Result<Vec<WaveBranch>> {
    ms.par_iter()
        .map(|&m| continue_branch(m, xi_max, steps, default_modes(m), newton))
        .collect()
}

/// Least-squares slope `c` of `−log|a_k|` against the mode `km`, over
/// coefficients above [`NOISE_FLOOR`]: the width of the strip in which the
/// Fourier series decays like `e^{−c|n|}`.
pub fn decay_rate(p: &WavePoint) -> Result<f64> {
    let pts: Vec<(f64, f64)> = p
        .cosine_coeffs
        .iter()
        .enumerate()
        .filter(|(_, a)| a.abs() > NOISE_FLOOR)
        .map(|(k, a)| (((k + 1) * p.m) as f64, -a.abs().ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientModes(pts.len()));
    }
    fit_slope(&pts).ok_or(Error::InsufficientModes(pts.len()))
}
