//! Independent numerical checks of the closed-form guessing probabilities:
//! Helstrøm discrimination for BB84 and the square-root measurement on
//! pyramid states for the `(d+1)`-bases family.

mod eig;
mod helstrom;
mod matrix;
mod srm;

pub use eig::{symmetric_eig, trace_norm, Eigen, MAX_SWEEPS, OFF_DIAGONAL_TOL};
pub use helstrom::{
    build_eve_states_bb84, eve_states_from_channel, f_of_v, helstrom_pguess, maximize_f_over_v,
    EnsembleBb84, V_TOLERANCE,
};
pub use matrix::{HermitianMatrix, MAX_DIM};
pub use srm::{pyramid_gram, srm_eta_closed, srm_numeric, srm_pguess_numeric, SrmEta, SrmOverlaps};
