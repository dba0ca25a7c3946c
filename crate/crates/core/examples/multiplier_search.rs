//! Find inner and full multiplier vectors and evaluate the directional
//! multiplier LP whose optimum is the directional derivative of the
//! localized value function.
//!
//! Run with: cargo run --example multiplier_search

use minimax_cert::cones::active_sets;
use minimax_cert::multipliers::{
    full_multiplier_find, kkt_residual, lambda2_max, lambda_max_find,
};
use minimax_cert::problem::{load_problem, CandidatePoint};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/p2.prob");
    let loaded = load_problem(path).unwrap();
    let spec = loaded.spec;
    let p = CandidatePoint::new(&spec, &[0.0], &[0.0]).unwrap();
    let act = active_sets(&spec, &p, 1e-7).unwrap();

    let beta = lambda_max_find(&spec, &p, &act).unwrap().unwrap();
    println!("inner multiplier beta  : {:?}", beta.beta_ineq);

    let pair = full_multiplier_find(&spec, &p, &act).unwrap().unwrap();
    println!("full pair alpha        : {:?}", pair.alpha_ineq);
    println!("full pair beta         : {:?}", pair.beta_ineq);

    let report = kkt_residual(&spec, &p, &pair);
    println!(
        "KKT residual           : stationarity {:.3e}, sign {:.3e}, compl {:.3e} -> {}",
        report.stationarity,
        report.worst_sign,
        report.worst_complementarity,
        if report.pass { "pass" } else { "fail" }
    );

    for u in [1.0, 2.0, 0.5] {
        let r = lambda2_max(&spec, &p, &act, &[u]).unwrap();
        println!("directional value at u = {u}: {}", r.value);
    }
}
