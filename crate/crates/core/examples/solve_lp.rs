//! Solve a small linear program with the built-in two-phase simplex.
//!
//! Run with: cargo run --example solve_lp

use minimax_cert::numlin::{solve_lp, LinearProgram, RowSense, VarBound};

fn main() {
    // maximize x + 2y over x + y <= 4, x + 3y <= 6, x, y >= 0
    // (the solver minimizes, so negate the objective)
    let lp = LinearProgram {
        objective: vec![-1.0, -2.0],
        rows: vec![vec![1.0, 1.0], vec![1.0, 3.0]],
        senses: vec![RowSense::Le, RowSense::Le],
        rhs: vec![4.0, 6.0],
        bounds: vec![VarBound::NonNeg, VarBound::NonNeg],
    };
    let sol = solve_lp(&lp).unwrap();
    println!("status : {:?}", sol.status);
    println!("point  : {:?}", sol.point);
    println!("value  : {} (maximum {})", sol.value, -sol.value);
    println!("basis  : {:?}", sol.basis);
    println!("residual: {:.3e}", lp.residual(&sol.point));
}
