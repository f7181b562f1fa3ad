use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::space::TupleSpace;
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Behaviour of a multiplier under `n⃗ ↦ −n⃗`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    pub fn flipped(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
            Parity::None => Parity::None,
        }
    }

    fn sign(self) -> Option<f64> {
        match self {
            Parity::Even => Some(1.0),
            Parity::Odd => Some(-1.0),
            Parity::None => None,
        }
    }
}

/// A `p`-linear form
///
/// ```text
/// M(u₁, …, u_p) = Σ_{n₁+…+n_p = 0} m(n₁, …, n_p) û₁(n₁) ⋯ û_p(n_p)
/// ```
///
/// over the modes of an `m`-fold symmetric truncation, stored as a dense table
/// over [`TupleSpace`].
#[derive(Clone, Debug)]
pub struct MultilinearForm {
    space: Arc<TupleSpace>,
    values: Vec<Complex64>,
    parity: Parity,
    label: String,
}

impl MultilinearForm {
    pub fn zero(m: usize, n_max: usize, arity: usize, label: impl Into<String>) -> Result<Self> {
        let space = TupleSpace::shared(m, n_max, arity)?;
        let values = vec![Complex64::new(0.0, 0.0); space.len()];
        Ok(Self {
            space,
            values,
            parity: Parity::Even,
            label: label.into(),
        })
    }

    /// Tabulates `multiplier` over every admissible tuple. The table is not
    /// symmetrized; see [`MultilinearForm::symmetrized`].
    pub fn from_fn<F>(
        m: usize,
        n_max: usize,
        arity: usize,
        parity: Parity,
        label: impl Into<String>,
        multiplier: F,
    ) -> Result<Self>
    where
        F: Fn(&[i64]) -> Complex64 + Sync,
    {
        let space = TupleSpace::shared(m, n_max, arity)?;
        let values = (0..space.len())
            .into_par_iter()
            .map(|id| multiplier(&space.modes(id)))
            .collect();
        Ok(Self {
            space,
            values,
            parity,
            label: label.into(),
        })
    }

    pub(crate) fn from_parts(
        space: Arc<TupleSpace>,
        values: Vec<Complex64>,
        parity: Parity,
        label: String,
    ) -> Self {
        debug_assert_eq!(space.len(), values.len());
        Self {
            space,
            values,
            parity,
            label,
        }
    }

    pub fn arity(&self) -> usize {
        self.space.arity()
    }

    pub fn m(&self) -> usize {
        self.space.m()
    }

    pub fn n_max(&self) -> usize {
        self.space.n_max()
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn space(&self) -> &Arc<TupleSpace> {
        &self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    /// Multiplier at a tuple; zero off the admissible set.
    pub fn multiplier(&self, modes: &[i64]) -> Complex64 {
        self.space
            .id_of(modes)
            .map_or(Complex64::new(0.0, 0.0), |id| self.values[id])
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.space, &other.space) {
            if self.arity() != other.arity() {
                return Err(Error::ArityMismatch {
                    expected: self.arity(),
                    got: other.arity(),
                });
            }
            return Err(Error::MismatchedTruncation(
                self.m(),
                self.n_max(),
                other.m(),
                other.n_max(),
            ));
        }
        Ok(())
    }

    /// `a·self + b·other`; parity is kept only when both agree.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        self.same_space(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let parity = if self.parity == other.parity {
            self.parity
        } else {
            Parity::None
        };
        Ok(Self::from_parts(
            self.space.clone(),
            values,
            parity,
            format!("({}) + ({})", self.label, other.label),
        ))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_parts(
            self.space.clone(),
            self.values.iter().map(|v| v * c).collect(),
            self.parity,
            self.label.clone(),
        )
    }

    /// Average of the multiplier over all `p!` slot permutations.
    pub fn symmetrized(&self) -> Self {
        let space = &self.space;
        let p = space.arity();
        let perms = permutations(p);
        let scale = 1.0 / perms.len() as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        let mut ids = Vec::with_capacity(perms.len());
        let mut pos = [0u8; 6];
        for id in 0..space.len() {
            let base = space.positions(id);
            if base.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            ids.clear();
            let mut acc = Complex64::new(0.0, 0.0);
            for perm in &perms {
                for (slot, &src) in pos.iter_mut().zip(perm) {
                    *slot = base[src];
                }
                let pid = space
                    .id_of_positions(&pos[..p])
                    .expect("permutations stay admissible");
                acc += self.values[pid];
                ids.push(pid);
            }
            let avg = acc * scale;
            for &pid in &ids {
                out[pid] = avg;
            }
        }
        Self::from_parts(space.clone(), out, self.parity, self.label.clone())
    }

    /// Largest `|m(n⃗)|`.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|m(σn⃗) − m(n⃗)|` over tuples and permutations.
    pub fn symmetry_defect(&self) -> f64 {
        let sym = self.symmetrized();
        self.values
            .iter()
            .zip(&sym.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|m(−n⃗) ∓ m(n⃗)|` for the given parity.
    pub fn parity_defect(&self, parity: Parity) -> f64 {
        let Some(sign) = parity.sign() else {
            return 0.0;
        };
        (0..self.space.len())
            .map(|id| (self.values[self.space.negated_id(id)] - self.values[id] * sign).norm())
            .fold(0.0, f64::max)
    }

    /// Largest parity defect against the declared parity.
    pub fn declared_parity_defect(&self) -> f64 {
        self.parity_defect(self.parity)
    }

    fn check_fields(&self, fields: &[&SpectralField]) -> Result<()> {
        if fields.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                got: fields.len(),
            });
        }
        for f in fields {
            if f.m() != self.m() || f.n_max() != self.n_max() {
                return Err(Error::MismatchedTruncation(
                    self.m(),
                    self.n_max(),
                    f.m(),
                    f.n_max(),
                ));
            }
        }
        Ok(())
    }

    /// `M(u₁, …, u_p)` by direct summation over the tuple table.
    pub fn evaluate(&self, fields: &[&SpectralField]) -> Result<Complex64> {
        self.check_fields(fields)?;
        let alphabet = self.space.alphabet();
        let tables: Vec<Vec<Complex64>> = fields
            .iter()
            .map(|f| alphabet.iter().map(|&n| f.coeff(n)).collect())
            .collect();
        let p = self.arity();
        let (mut re, mut im) = (CompensatedSum::default(), CompensatedSum::default());
        for (id, &v) in self.values.iter().enumerate() {
            if v.re == 0.0 && v.im == 0.0 {
                continue;
            }
            let pos = self.space.positions(id);
            let mut prod = v;
            for j in 0..p {
                prod *= tables[j][pos[j] as usize];
            }
            re.add(prod.re);
            im.add(prod.im);
        }
        Ok(Complex64::new(re.value(), im.value()))
    }

    /// `M(f, …, f)`.
    pub fn evaluate_diagonal(&self, f: &SpectralField) -> Result<Complex64> {
        let fields = vec![f; self.arity()];
        self.evaluate(&fields)
    }

    /// `M(g, f, …, f)`; for a symmetric form, `d/dt M(f, …, f) = p·M(∂t f, f, …, f)`.
    pub fn evaluate_one_slot(&self, g: &SpectralField, f: &SpectralField) -> Result<Complex64> {
        let mut fields = vec![f; self.arity()];
        fields[0] = g;
        self.evaluate(&fields)
    }
}

/// Neumaier summation. Evaluations of divided forms cancel heavily, and a
/// plain running sum loses several digits over tens of thousands of tuples.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// All permutations of `0..p`, as index maps.
pub(crate) fn permutations(p: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(p), &mut vec![false; p], &mut out);
    out
}

/// A symmetric random form with the requested parity, for testing.
pub fn random_form(
    m: usize,
    n_max: usize,
    arity: usize,
    parity: Parity,
    seed: u64,
) -> Result<MultilinearForm> {
    let space = TupleSpace::shared(m, n_max, arity)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Complex64> = (0..space.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let values = match parity.sign() {
        None => raw,
        Some(sign) => (0..space.len())
            .map(|id| 0.5 * (raw[id] + raw[space.negated_id(id)] * sign))
            .collect(),
    };
    Ok(MultilinearForm::from_parts(space, values, parity, format!("random({seed})")).symmetrized())
}
