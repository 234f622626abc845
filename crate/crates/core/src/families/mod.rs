//! Generators for the explicit polynomial families: the one-parameter
//! family `F_d`, the hypercube product `P_n` with its first-order data, the
//! hypercube family `F_n` with its sparse reformulation, the cone `R_n`, and
//! the existential formulas built from them.

mod formula;
mod hypercube;
mod paradigm_one;
mod paradigm_two;

use thiserror::Error;

use crate::poly::ExpandError;

pub use formula::{phi_constraints, phi_formula, sample_gamma, PhiFormula, PhiSidecar, PhiVariant};
pub use hypercube::{
    fn_closed_form, fn_product_part, fn_slp, gtilde_system, rn_closed_form, rn_slp, GTildeSystem,
    HypercubeFamily,
};
pub use paradigm_one::{fd_closed_form, fd_slp, omega_d};
pub use paradigm_two::{
    ell_matrix, ell_matrix_mod, hypercube_monomial, pn_first_order, pn_first_order_printed,
    pn_roots, pn_slp, pn_specialized, EllMatrix, FirstOrder, EXACT_ELL_LIMIT, MOD_ELL_LIMIT,
    SPECIALIZED_LIMIT,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("{what}: n = {n} exceeds the supported maximum {max}")]
    SizeLimit { what: &'static str, n: u32, max: u32 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Expand(#[from] ExpandError),
}

/// Names `prefix_1, ..., prefix_n`.
pub(crate) fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}
