//! Orthogonal polynomial ensembles on the unit circle: Verblunsky
//! coefficients, CMV/GGT operators, exact sampling, and cumulants of
//! mesoscopic linear statistics.

pub mod config;
pub mod cumulants;
pub mod error;
pub mod io;
pub mod linalg;
pub mod linstat;
pub mod measures;
pub mod operators;
pub mod quadrature;
pub mod sampler;
pub mod szego;
pub mod wienerhopf;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
