//! Radial solver and asymptotics classifier for coupled k-Hessian systems
//! with gradient terms.

pub mod classify;
pub mod cli;
pub mod config;
pub mod expr;
pub mod hessian;
pub mod iteration;
pub mod kernels;
pub mod limits;
pub mod output;
pub mod problem;
pub mod quadrature;

pub use expr::{parse, Expr};
pub use problem::ProblemSpec;
