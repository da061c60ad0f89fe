//! Enriched immersed finite element method for two-dimensional elliptic
//! interface problems with nonhomogeneous jump conditions.
//!
//! The crate covers the full pipeline on interface-independent triangular
//! meshes of `(-1, 1)²`:
//!
//! - [`geometry`]: uniform meshes, level-set interfaces (lines and circles),
//!   element classification and fictitious elements.
//! - [`polybasis`]: degree-`p` Lagrange bases in a scaled monomial frame.
//! - [`quadrature`]: rules on triangles, curved cut regions, edges and arcs.
//! - [`localife`]: per-element Cauchy mappings, enrichment functions and local
//!   conditioning.
//! - [`assembly`]: degrees of freedom, the penalized bilinear form, the load
//!   vector and Dirichlet handling.
//! - [`solve`]: sparse Cholesky, dense round-off variants, extreme eigenvalue
//!   estimation and condition numbers.
//! - [`analysis`]: error norms and convergence-rate fitting.
//! - [`experiment`]: configuration-driven runners for the numerical studies.
//!
//! A typical solve:
//!
//! ```no_run
//! use ife::prelude::*;
//!
//! // disk interior on the minus side, carrying the larger coefficient
//! let iface = Interface::circle(0.0, 0.0, std::f64::consts::FRAC_PI_4).unwrap().flipped();
//! let beta = Coefficients::new(1.0, 2.0).unwrap();
//! let exact = ExactSolution::example2(beta, Side::Minus);
//! let config = SchemeConfig::new(2);
//! let disc = Discretization::build(20, iface, beta, &config, &exact.problem_data(&iface, beta)).unwrap();
//! let sol = disc.solve().unwrap();
//! let err = error_norms(&disc, &sol, &exact).unwrap();
//! println!("L2 error {:.3e}", err.l2);
//! ```

// NaN-rejecting checks are written as negated comparisons on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod localife;
pub mod polybasis;
pub mod quadrature;
pub mod solve;

pub use error::{Error, Result};

/// Points and vectors in the plane.
pub type Point = nalgebra::Vector2<f64>;

/// Commonly used items.
pub mod prelude {
    pub use crate::analysis::{error_norms, fit_rates, ErrorReport, RateTable};
    pub use crate::assembly::{
        Discretization, ExactSolution, GammaMode, PenaltyParams, ProblemData, SchemeConfig,
        Solution,
    };
    pub use crate::error::{Error, Result};
    pub use crate::geometry::{build_mesh, classify, Interface, Mesh, Side};
    pub use crate::localife::Coefficients;
    pub use crate::solve::{extreme_eigs, scaled_condition, EigenMethod};
    pub use crate::Point;
}
