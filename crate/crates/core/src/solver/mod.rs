//! Discrete Dirichlet solves, the approximation pipeline for measure data,
//! and monotone iterations for Lane-Emden type problems.

mod dirichlet;
mod lane_emden;
mod sola;

pub use dirichlet::{compare, solve_dirichlet, CompareReport, DirichletSolver, SolveConfig, SolveOutcome};
pub use lane_emden::{
    lane_emden_exponential, lane_emden_power, scalar_recursion, LaneEmdenConfig, LaneEmdenReport, Recursion,
};
pub use sola::{sola_solve, SolaReport, SolaStage};
