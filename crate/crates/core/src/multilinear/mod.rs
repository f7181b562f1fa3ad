//! Multilinear forms on truncated spectra and the normal-form chain that
//! produces corrected energies.

pub mod cache;
pub mod energy;
pub mod form;
pub mod operators;
pub mod space;

pub use cache::{read_form, write_form, FormCache};
pub use energy::{
    build_chain, build_energy_derivative_form, ChainStage, CorrectedEnergy, EnergyLadder,
};
pub use form::{random_form, MultilinearForm, Parity};
pub use operators::{
    degenerate_projection, insert_derivative_product, insert_nonlinearity, insert_product_with_ds,
    resonant_division,
};
pub use space::TupleSpace;
