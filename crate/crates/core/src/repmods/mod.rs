//! Degree-truncated highest-weight and Weyl modules, their invariant
//! pairings and irreducible quotients, and the Sugawara operator.

pub mod engine;
pub mod module;
pub mod sugawara;

pub use engine::{Base, Engine, Gen, Structure, Vect};
pub use module::{
    ad_beta_coords, chevalley_zero, contravariant_form, ef_power_direct, ef_power_scalar, integrable_quotient,
    irreducible_node, pairing_suite, Coords, FormQuotient, GradedModule, ModuleKind, NodePairing, PairingSuiteReport,
    Quot, SparseGram,
};
pub use sugawara::{dual_bases, gram_json, module_json, sugawara_lminus1, trace_dual};
