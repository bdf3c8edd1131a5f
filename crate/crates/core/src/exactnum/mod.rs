//! Exact arithmetic over the cyclotomic field Q(ε_N) and the polynomial,
//! rational-function and q-series layers built on it.

pub mod cyc;
pub mod poly;
pub mod qseries;
pub mod ratfunc;

pub use cyc::CycNum;
pub use poly::{Laurent, Poly};
pub use qseries::{QSeries, Subst};
pub use ratfunc::{LocalSeries, Point, RatFunc};
