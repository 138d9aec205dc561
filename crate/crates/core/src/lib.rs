//! Maximum-entropy reconstruction of non-negative densities on `[0, 1]` from
//! a finite set of power or shifted-Chebyshev moments.
//!
//! The density is discretized on a Gauss–Legendre grid and the convex dual of
//! the entropy problem is minimized by a damped Newton method:
//!
//! ```
//! use maxent_core::{build_basis_matrix, build_gauss_legendre, solve, BasisKind, SolverConfig, TestFunction};
//!
//! let rule = build_gauss_legendre(96).unwrap();
//! let matrix = build_basis_matrix(BasisKind::ShiftedChebyshev, 20, &rule).unwrap();
//! let mu = TestFunction::Sqrt.analytic_moments(20).unwrap();
//! let recon = solve(&mu, &matrix, &rule, &SolverConfig::default()).unwrap();
//! assert!(recon.delta1_achieved < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod corpus;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod logistic;
pub mod quadrature;
pub mod solver;

pub use basis::{
    build_basis_matrix, compute_moments, eval_shifted_chebyshev, BasisKind, BasisMatrix,
    MomentVector,
};
pub use corpus::TestFunction;
pub use diagnostics::{
    delta1, delta2, diagnose, entropy_of, estimate_gap, kl_and_variation, kullback_bound,
    DiagnosticsReport, GapEstimate,
};
pub use error::{Error, Result};
pub use logistic::{generate_histogram, generate_map_moments, HistogramDensity, LogisticConfig};
pub use quadrature::{build_gauss_legendre, QuadratureRule};
pub use solver::{
    dual_gradient, dual_objective, solve, Reconstruction, SolverConfig, StepStrategy,
};
