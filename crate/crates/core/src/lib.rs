//! Nonlinear potentials, discrete nonlocal p-Laplacian solvers with measure
//! data, Lane-Emden iterations and the numerical checks built on them.

pub mod error;
pub mod params;
pub mod quadrature;
pub mod special;
pub mod kernel;
pub mod geometry;
pub mod measure;
pub mod potential;
pub mod grid;
pub mod solver;
pub mod estimate;
pub mod capacity;
pub mod acceptance;
pub mod io;
pub mod cli;

pub use error::{Error, Result};
pub use kernel::KernelSpec;
pub use measure::Measure;
pub use params::Params;
pub use special::ReactionSpec;
