//! Normal-form operators on multilinear forms.

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use super::form::MultilinearForm;
use super::space::TupleSpace;
use crate::error::{Error, Result};
use crate::resonance::{is_totally_degenerate, lambda_sum, to_f64, Tuple};
use crate::spectral::multiplier::{lambda_unchecked, sigma_unchecked};

/// Denominators below this magnitude are re-evaluated in exact arithmetic.
const EXACT_CHECK: f64 = 1e-6;

/// Divides the multiplier by `λ(n₁) + … + λ(n_p)`.
///
/// A tuple with an exactly vanishing denominator is accepted only if the
/// multiplier is exactly zero there (it stays zero); otherwise the tuple is
/// reported as a resonance.
pub fn resonant_division(form: &MultilinearForm) -> Result<MultilinearForm> {
    let space = form.space().clone();
    let values = form
        .values()
        .par_iter()
        .enumerate()
        .map(|(id, &v)| {
            let modes = space.modes(id);
            let mut denom: f64 = modes.iter().map(|&n| lambda_unchecked(n)).sum();
            if denom.abs() < EXACT_CHECK {
                let exact = lambda_sum(&Tuple::new(modes.clone())?);
                if exact.is_zero() {
                    return if v.is_zero() {
                        Ok(v)
                    } else {
                        Err(Error::Resonance(modes))
                    };
                }
                denom = to_f64(&exact);
            }
            Ok(v / denom)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultilinearForm::from_parts(
        space,
        values,
        form.parity().flipped(),
        format!("L({})", form.label()),
    ))
}

/// Restriction of the multiplier to totally degenerate tuples.
pub fn degenerate_projection(form: &MultilinearForm) -> Result<MultilinearForm> {
    if form.arity() % 2 == 1 {
        return Err(Error::OddArity(form.arity()));
    }
    let space = form.space().clone();
    let values = form
        .values()
        .iter()
        .enumerate()
        .map(|(id, &v)| {
            if is_totally_degenerate(&space.modes(id)) {
                v
            } else {
                Complex64::zero()
            }
        })
        .collect();
    Ok(MultilinearForm::from_parts(
        space,
        values,
        form.parity(),
        format!("P({})", form.label()),
    ))
}

/// Raises the arity by one, merging each adjacent pair of slots `(j, j+1)`
/// through `pair(n_j, n_{j+1})` and summing over `j`; the result is
/// symmetrized.
fn insert_pair<F>(form: &MultilinearForm, pair: F, label: String) -> Result<MultilinearForm>
where
    F: Fn(i64, i64) -> Complex64 + Sync,
{
    let p = form.arity();
    if p + 1 > 6 {
        return Err(Error::UnsupportedArity(p + 1));
    }
    let inner = form.space();
    let outer = TupleSpace::shared(form.m(), form.n_max(), p + 1)?;
    let values = (0..outer.len())
        .into_par_iter()
        .map(|id| {
            let pos = outer.positions(id);
            let modes = outer.modes(id);
            let mut acc = Complex64::zero();
            let mut merged = [0u8; 6];
            for j in 0..p {
                let Some(joint) = inner.position_of(modes[j] + modes[j + 1]) else {
                    continue;
                };
                merged[..j].copy_from_slice(&pos[..j]);
                merged[j] = joint;
                merged[j + 1..p].copy_from_slice(&pos[j + 2..]);
                let target = inner
                    .id_of_positions(&merged[..p])
                    .expect("merged tuple sums to zero");
                acc += form.values()[target] * pair(modes[j], modes[j + 1]);
            }
            acc
        })
        .collect();
    Ok(MultilinearForm::from_parts(outer, values, form.parity().flipped(), label).symmetrized())
}

/// `Σ_j M(u₁, …, u_j ∂α S u_{j+1}, …, u_{p+1})`, symmetrized.
pub fn insert_product_with_ds(form: &MultilinearForm) -> Result<MultilinearForm> {
    insert_pair(
        form,
        |_, b| Complex64::new(0.0, lambda_unchecked(b)),
        format!("N1({})", form.label()),
    )
}

/// `Σ_j M(u₁, …, (∂α u_j)(S u_{j+1}), …, u_{p+1})`, symmetrized.
pub fn insert_derivative_product(form: &MultilinearForm) -> Result<MultilinearForm> {
    insert_pair(
        form,
        |a, b| Complex64::new(0.0, a as f64 * sigma_unchecked(b)),
        format!("N2({})", form.label()),
    )
}

/// `(2 N₂ − N₁)(M)`: on equal arguments this inserts the nonlinearity
/// `N(f)` into every slot of `M` in turn.
pub fn insert_nonlinearity(form: &MultilinearForm) -> Result<MultilinearForm> {
    let n1 = insert_product_with_ds(form)?;
    let n2 = insert_derivative_product(form)?;
    Ok(n2
        .combine(Complex64::new(2.0, 0.0), &n1, Complex64::new(-1.0, 0.0))?
        .with_parity(form.parity().flipped())
        .with_label(format!("(2N2-N1)({})", form.label())))
}
