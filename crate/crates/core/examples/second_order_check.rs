//! Second-order analysis of the unconstrained saddle: critical
//! directions, the closed-form maximizer of the Lagrangian quadratic
//! form, and the strong directional sufficient condition.
//!
//! Run with: cargo run --example second_order_check

use minimax_cert::cones::active_sets;
use minimax_cert::config::RunConfig;
use minimax_cert::first_order::first_order_certificate;
use minimax_cert::multipliers::MultiplierVector;
use minimax_cert::problem::{load_problem, CandidatePoint};
use minimax_cert::second_order::{
    hstar, reduced_hessian_value, second_order_certificate, ssosc_u_check,
};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/p_saddle.prob");
    let loaded = load_problem(path).unwrap();
    let spec = loaded.spec;
    let p = CandidatePoint::new(&spec, &[0.0], &[0.0]).unwrap();
    let act = active_sets(&spec, &p, 1e-7).unwrap();
    let cfg = RunConfig::default();

    // closed-form maximizer along u = 1 with the (empty) multiplier pair
    let empty = MultiplierVector {
        alpha_ineq: vec![],
        alpha_eq: vec![],
        beta_ineq: vec![],
        beta_eq: vec![],
    };
    let h = hstar(&spec, &p, &act, &empty, &[1.0]).unwrap();
    println!("h*             : {:?}", h.h_star);
    println!("attained value : {:.6}", h.attained_value);
    let schur = reduced_hessian_value(&spec, &p, &empty, &[1.0]).unwrap();
    println!("Schur value    : {schur:.6} (must match)");

    let ssosc = ssosc_u_check(&spec, &p, &act, &[1.0], &cfg).unwrap();
    println!(
        "SSOSC at u = 1 : {} (worst curvature {:?})",
        if ssosc.pass { "holds" } else { "fails" },
        ssosc.worst_value
    );

    let first = first_order_certificate(&spec, &p, &cfg).unwrap();
    let cert = second_order_certificate(&spec, &p, &first, &cfg).unwrap();
    println!("overall        : {}", cert.overall);
    for d in cert.directions.iter().filter(|d| d.critical) {
        println!(
            "critical u = {:?}: value {:?} at h = {:?}",
            d.u, d.lower, d.best_h
        );
    }
}
