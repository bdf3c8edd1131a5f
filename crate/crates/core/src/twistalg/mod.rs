//! sl_N with its twist data, loop algebras with central extensions, and
//! affine weights.

pub mod loops;
pub mod mat;
pub mod weights;

pub use loops::{bracket, cocycle, phi0, phiinf, AlgTag, ChevKind, LoopElement};
pub use mat::{ad, dual_j, inner, j_basis, j_indices, make_twist_pair, EBasis, GMat};
pub use weights::{is_dominant_integral, tensor_weights, weight_tilde, AffineWeight, FinRep, Side};
