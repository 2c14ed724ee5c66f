//! Three-factor uncertainty products on compact manifolds.
//!
//! The crate discretizes compact manifolds ([`grid`]), maps them into
//! Euclidean space and estimates the admissibility constants of the map
//! ([`embed`]), evaluates the uncertainty functionals ([`ucp`]) and runs the
//! reproducible experiments built on top of them ([`lab`]).

pub mod embed;
pub mod error;
pub mod grid;
pub mod lab;
pub mod spectral;
pub mod ucp;

pub use error::{Error, Result};
