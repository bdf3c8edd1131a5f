//! Exact and numerical tools for the trigonometric degeneration of the
//! orbifold twisted WZW model on sl_N.

pub mod cli;
pub mod coinv;
pub mod error;
pub mod exactnum;
pub mod kz;
pub mod linalg;
pub mod repmods;
pub mod twistalg;
pub mod wfun;

pub use error::{Error, Result};
