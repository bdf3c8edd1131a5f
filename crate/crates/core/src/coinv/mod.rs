//! Coinvariants of the trigonometric and orbifold out-algebras, the
//! singular-vector reduction at a non-dominant node, factorization and the
//! invariance of the canonical element.

pub mod checks;
pub mod problem;

pub use checks::{
    factorization_check, hat_iota_invariance_check, integrable_marked, node_weights, singular_vector_reduce,
    FactorizationReport, FactorizationTerm, HatIotaReport, ReduceReport,
};
pub use problem::{CcReport, CoinvProblem, LevelDim, Location, Model, Site};
