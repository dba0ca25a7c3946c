//! Parse an expression, evaluate it, and take exact derivatives.
//!
//! Run with: cargo run --example parse_and_differentiate

use minimax_cert::autodiff::eval_jet;
use minimax_cert::expr::parse_expression;

fn main() {
    let e = parse_expression("x1*y1 - 0.5*y1^2 + exp(x1)", 1, 1).unwrap();
    println!("parsed      : {e}");

    let x = [0.3];
    let y = [-0.7];
    let jet = eval_jet(&e, &x, &y).unwrap();
    println!("value       : {:.6}", jet.val);
    println!("gradient    : {:?}", jet.grad);
    println!("hessian     : {:?}", jet.hess);

    // the canonical serialization round-trips structurally
    let again = parse_expression(&e.to_string(), 1, 1).unwrap();
    assert_eq!(e, again);
    println!("round-trip  : ok");
}
