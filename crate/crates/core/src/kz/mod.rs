//! The trigonometric and elliptic r-matrices, the trigonometric KZ
//! connection and numerical transport of flat sections.

pub mod rmatrix;
pub mod system;
pub mod transport;

pub use rmatrix::{cybe_residual, degeneration, embed3, to_cmat, CMat, RMatrix, RTerm, Spectral};
pub use system::{rep_matrix, KzSystem};
pub use transport::{transport, CVec, TransportReport};
