//! Self-contained dense numerical kernels: linear solves, a two-phase
//! simplex, symmetric eigenvalues and exact cone-constrained quadratic
//! maximization. No external solver dependencies; everything is
//! deterministic for identical input.

pub mod conequad;
pub mod dense;
pub mod eig;
pub mod kkt;
pub mod simplex;

pub use conequad::{max_quad_over_cone, ConeQuadError, ConeQuadResult};
pub use dense::{dot, norm2, norm_inf, normalize, Mat};
pub use eig::{jacobi_eigen, max_eig, min_eig};
pub use kkt::{solve_kkt, KktError};
pub use simplex::{
    solve_lp, LinearProgram, LpError, LpSolution, LpStatus, RowSense, VarBound,
};
