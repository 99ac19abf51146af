//! Truncated symmetric Fock space over a finite set of modes.

mod basis;
pub mod dump;
mod mode_system;
mod operator;
mod vector;
mod weyl;

pub use basis::{sector_dimension, truncated_dimension, FockBasis, Sector, DEFAULT_CAPACITY};
pub use mode_system::{hermitian_defect, Dispersion, Geometry, ModeSystem, PairPotential};
pub use operator::{
    build_hamiltonian, field_apply, field_apply_into, ladder_apply, ladder_apply_into, ladder_operator,
    ladder_operator_with_rule, ladder_target, number_operator, pair_interaction_diagonal, second_quantize,
    sector_project, Ladder, SparseOperator,
};
pub use vector::FockVector;
pub use weyl::{headroom, weyl_apply, Displaced};
