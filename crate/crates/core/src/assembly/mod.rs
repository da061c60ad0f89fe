//! Degrees of freedom, the penalized symmetric bilinear form, the load vector
//! with the enrichment shift, and Dirichlet handling.

mod data;
mod dofs;
mod system;

pub use data::{ExactSolution, Field, GammaMode, GradField, PenaltyParams, ProblemData, SchemeConfig};
pub use dofs::{build_dofs, node_keys, DofMap};
pub use system::{apply_dirichlet, Discretization, ElementSpace, GlobalSystem, Solution};
