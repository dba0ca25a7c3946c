//! Certification toolkit for calm local minimax points of smooth
//! minimax problems with coupled constraints.
//!
//! Given a problem `min over x in X, max over y in Y(x) of f(x,y)` with
//! inequality/equality constraint systems and a candidate point
//! `(xbar, ybar)`, the library decides whether the first-order and
//! second-order optimality conditions for a calm local minimax point
//! hold, producing auditable certificates (multipliers, critical
//! directions, quadratic-form values) and cross-checking them against
//! brute-force value-function oracles on a grid.

pub mod autodiff;
pub mod cli;
pub mod cones;
pub mod config;
pub mod first_order;
pub mod expr;
pub mod ext;
pub mod multipliers;
pub mod numlin;
pub mod oracle;
pub mod problem;
pub mod report;
pub mod second_order;
pub mod verdict;
