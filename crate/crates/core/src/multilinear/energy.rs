//! The Sobolev energy, its cubic derivative form and the corrected energies.

use num_complex::Complex64;
use serde::Serialize;

use super::form::{MultilinearForm, Parity};
use super::operators::{degenerate_projection, insert_nonlinearity, resonant_division};
use crate::error::{Error, Result};
use crate::spectral::multiplier::{lambda_unchecked, sigma_unchecked};
use crate::spectral::{d_alpha_s, energy, nonlinearity, sobolev_weight, SpectralField};

/// The trilinear form `M₃` with `d/dt E_s(f) = M₃(f, f, f)` along the
/// nonlinear flow, where `E_s = ½‖f‖²_{H^s}`.
///
/// Slot 1 carries `S`, slot 2 the derivative and slot 3 the `H^s` pairing.
pub fn build_energy_derivative_form(s: f64, m: usize, n_max: usize) -> Result<MultilinearForm> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::InvalidInput(format!(
            "Sobolev index must be >= 0, got {s}"
        )));
    }
    let raw = MultilinearForm::from_fn(m, n_max, 3, Parity::Odd, "M3", |n| {
        let w = sobolev_weight(n[2], s);
        Complex64::new(
            0.0,
            w * (2.0 * n[1] as f64 * sigma_unchecked(n[0]) - lambda_unchecked(n[1])),
        )
    })?;
    Ok(raw.symmetrized())
}

/// Which step of the normal-form chain a form belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStage {
    M3,
    M3Prime,
    M4,
    M4Prime,
    M5,
    M5Prime,
}

impl ChainStage {
    pub const ALL: [ChainStage; 6] = [
        ChainStage::M3,
        ChainStage::M3Prime,
        ChainStage::M4,
        ChainStage::M4Prime,
        ChainStage::M5,
        ChainStage::M5Prime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChainStage::M3 => "m3",
            ChainStage::M3Prime => "m3_prime",
            ChainStage::M4 => "m4",
            ChainStage::M4Prime => "m4_prime",
            ChainStage::M5 => "m5",
            ChainStage::M5Prime => "m5_prime",
        }
    }
}

/// `E_s` together with its successive normal-form corrections.
#[derive(Clone, Debug)]
pub struct CorrectedEnergy {
    s: f64,
    m3: MultilinearForm,
    m3_prime: MultilinearForm,
    m4: MultilinearForm,
    m4_prime: MultilinearForm,
    m5: MultilinearForm,
    m5_prime: MultilinearForm,
}

/// The four energies `E_s`, `E_s − M₃′`, `E_s − M₃′ − M₄′`,
/// `E_s − M₃′ − M₄′ − M₅′`, or their time derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyLadder {
    pub base: f64,
    pub cubic: f64,
    pub quartic: f64,
    pub quintic: f64,
}

impl EnergyLadder {
    pub fn as_array(&self) -> [f64; 4] {
        [self.base, self.cubic, self.quartic, self.quintic]
    }
}

fn times_i(form: &MultilinearForm) -> MultilinearForm {
    form.scaled(Complex64::i())
}

/// Builds `M₃′ = iL(M₃)`, `M₄ = −(2N₂ − N₁)(M₃′)`, `M₄′ = iL(M₄ − P(M₄))`,
/// `M₅ = −(2N₂ − N₁)(M₄′)` and `M₅′ = iL(M₅)`.
pub fn build_chain(s: f64, m: usize, n_max: usize) -> Result<CorrectedEnergy> {
    let m3 = build_energy_derivative_form(s, m, n_max)?;
    build_chain_from(s, m3, |_, f| f)
}

/// Chain construction with a hook that may substitute each stage (for
/// example from a cache) before it is used further.
pub(crate) fn build_chain_from(
    s: f64,
    m3: MultilinearForm,
    mut hook: impl FnMut(ChainStage, MultilinearForm) -> MultilinearForm,
) -> Result<CorrectedEnergy> {
    let m3 = hook(ChainStage::M3, m3);
    let m3_prime = hook(
        ChainStage::M3Prime,
        times_i(&resonant_division(&m3)?).with_label("M3'"),
    );
    let m4 = hook(
        ChainStage::M4,
        insert_nonlinearity(&m3_prime)?
            .scaled(Complex64::new(-1.0, 0.0))
            .with_label("M4"),
    );
    let degenerate = degenerate_projection(&m4)?;
    let nondegenerate = m4.combine(
        Complex64::new(1.0, 0.0),
        &degenerate,
        Complex64::new(-1.0, 0.0),
    )?;
    let m4_prime = hook(
        ChainStage::M4Prime,
        times_i(&resonant_division(&nondegenerate)?)
            .with_parity(m4.parity().flipped())
            .with_label("M4'"),
    );
    let m5 = hook(
        ChainStage::M5,
        insert_nonlinearity(&m4_prime)?
            .scaled(Complex64::new(-1.0, 0.0))
            .with_label("M5"),
    );
    let m5_prime = hook(
        ChainStage::M5Prime,
        times_i(&resonant_division(&m5)?).with_label("M5'"),
    );
    Ok(CorrectedEnergy {
        s,
        m3,
        m3_prime,
        m4,
        m4_prime,
        m5,
        m5_prime,
    })
}

impl CorrectedEnergy {
    /// Reassembles a chain from its six stages in [`ChainStage::ALL`] order.
    pub(crate) fn from_stages(s: f64, stages: Vec<MultilinearForm>) -> Result<Self> {
        let [m3, m3_prime, m4, m4_prime, m5, m5_prime]: [MultilinearForm; 6] =
            stages.try_into().map_err(|v: Vec<MultilinearForm>| {
                Error::InvalidInput(format!("expected 6 chain stages, got {}", v.len()))
            })?;
        for (form, arity) in [
            (&m3, 3),
            (&m3_prime, 3),
            (&m4, 4),
            (&m4_prime, 4),
            (&m5, 5),
            (&m5_prime, 5),
        ] {
            if form.arity() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    got: form.arity(),
                });
            }
        }
        Ok(Self {
            s,
            m3,
            m3_prime,
            m4,
            m4_prime,
            m5,
            m5_prime,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn m(&self) -> usize {
        self.m3.m()
    }

    pub fn n_max(&self) -> usize {
        self.m3.n_max()
    }

    pub fn form(&self, stage: ChainStage) -> &MultilinearForm {
        match stage {
            ChainStage::M3 => &self.m3,
            ChainStage::M3Prime => &self.m3_prime,
            ChainStage::M4 => &self.m4,
            ChainStage::M4Prime => &self.m4_prime,
            ChainStage::M5 => &self.m5,
            ChainStage::M5Prime => &self.m5_prime,
        }
    }

    /// The corrections `M₃′, M₄′, M₅′`.
    pub fn corrections(&self) -> [&MultilinearForm; 3] {
        [&self.m3_prime, &self.m4_prime, &self.m5_prime]
    }

    /// Largest imaginary part seen when evaluating the corrections at `f`.
    pub fn imaginary_defect(&self, f: &SpectralField) -> Result<f64> {
        let mut worst = 0.0f64;
        for form in self.corrections() {
            worst = worst.max(form.evaluate_diagonal(f)?.im.abs());
        }
        Ok(worst)
    }

    pub fn values(&self, f: &SpectralField) -> Result<EnergyLadder> {
        let base = energy(f, self.s);
        let c3 = self.m3_prime.evaluate_diagonal(f)?.re;
        let c4 = self.m4_prime.evaluate_diagonal(f)?.re;
        let c5 = self.m5_prime.evaluate_diagonal(f)?.re;
        Ok(EnergyLadder {
            base,
            cubic: base - c3,
            quartic: base - c3 - c4,
            quintic: base - c3 - c4 - c5,
        })
    }

    /// Exact time derivatives of [`CorrectedEnergy::values`] when `f` moves
    /// with velocity `f_t`: each symmetric `p`-form contributes
    /// `p·M(f_t, f, …, f)`.
    pub fn derivatives(&self, f: &SpectralField, f_t: &SpectralField) -> Result<EnergyLadder> {
        let weighted: Vec<(i64, Complex64)> = f
            .modes()
            .map(|(n, c)| (n, c * sobolev_weight(n, self.s)))
            .collect();
        let base = 2.0
            * weighted
                .iter()
                .zip(f_t.coeffs())
                .map(|((_, a), b)| (a.conj() * b).re)
                .sum::<f64>();
        let d3 = 3.0 * self.m3_prime.evaluate_one_slot(f_t, f)?.re;
        let d4 = 4.0 * self.m4_prime.evaluate_one_slot(f_t, f)?.re;
        let d5 = 5.0 * self.m5_prime.evaluate_one_slot(f_t, f)?.re;
        Ok(EnergyLadder {
            base,
            cubic: base - d3,
            quartic: base - d3 - d4,
            quintic: base - d3 - d4 - d5,
        })
    }

    /// Derivatives along the truncated flow `f_t = −∂α S f + N(f)`.
    pub fn derivatives_along_flow(&self, f: &SpectralField) -> Result<EnergyLadder> {
        let f_t = nonlinearity(f).add_scaled(&d_alpha_s(f), -1.0)?;
        self.derivatives(f, &f_t)
    }

    /// The remainders predicted by the chain: `M₃(f,f,f)`, `M₄(f,…,f)`,
    /// `P(M₄)(f,…,f) + M₅(f,…,f)` and `M₆(f) = −5·M₅′(N(f), f, f, f, f)`.
    pub fn remainders(&self, f: &SpectralField) -> Result<EnergyLadder> {
        let n = nonlinearity(f);
        let p4 = degenerate_projection(&self.m4)?.evaluate_diagonal(f)?.re;
        Ok(EnergyLadder {
            base: self.m3.evaluate_diagonal(f)?.re,
            cubic: self.m4.evaluate_diagonal(f)?.re,
            quartic: p4 + self.m5.evaluate_diagonal(f)?.re,
            quintic: -5.0 * self.m5_prime.evaluate_one_slot(&n, f)?.re,
        })
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn random_field(seed: u64, m: usize, n_max: usize, scale: f64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (1..=n_max / m)
            .map(|k| {
                let amp = scale / (k * k) as f64;
                Complex64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp))
            })
            .collect();
        SpectralField::from_coeffs(m, coeffs).unwrap()
    }

    #[test]
    fn m3_is_energy_derivative() {
        let s = 2.0;
        let m3 = build_energy_derivative_form(s, 3, 24).unwrap();
        assert!(m3.declared_parity_defect() <= 1e-14 * m3.max_abs());
        let f = random_field(1, 3, 24, 0.1);
        let v = m3.evaluate_diagonal(&f).unwrap();
        assert!(v.im.abs() < 1e-12 * v.norm().max(1e-300) + 1e-18);
        let n = nonlinearity(&f);
        let weighted: f64 = 2.0
            * f.coeffs()
                .iter()
                .zip(n.coeffs())
                .enumerate()
                .map(|(i, (a, b))| sobolev_weight(3 * (i as i64 + 1), s) * (a.conj() * b).re)
                .sum::<f64>();
        assert!((v.re - weighted).abs() < 1e-12 * weighted.abs().max(1e-12));
    }

    #[test]
    fn chain_remainders_match_derivatives() {
        let chain = build_chain(1.0, 3, 12).unwrap();
        assert_eq!(chain.form(ChainStage::M4).parity(), Parity::Odd);
        let m4 = chain.form(ChainStage::M4);
        assert!(m4.declared_parity_defect() <= 1e-13 * m4.max_abs());
        for seed in 0..3 {
            let f = random_field(seed, 3, 12, 0.05);
            let d = chain.derivatives_along_flow(&f).unwrap();
            let r = chain.remainders(&f).unwrap();
            for (a, b) in d.as_array().into_iter().zip(r.as_array()) {
                assert!((a - b).abs() < 1e-9 * a.abs().max(1e-14), "{a} vs {b}");
            }
            assert!(chain.imaginary_defect(&f).unwrap() < 1e-12);
        }
    }
}
