//! Run the first-order certificate on a fixture: constraint
//! qualifications, strong duality per direction, and dual multiplier
//! existence.
//!
//! Run with: cargo run --example first_order_check

use minimax_cert::config::RunConfig;
use minimax_cert::first_order::first_order_certificate;
use minimax_cert::problem::{load_problem, CandidatePoint};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/p2.prob");
    let loaded = load_problem(path).unwrap();
    let spec = loaded.spec;
    let x = loaded.point_x.unwrap();
    let y = loaded.point_y.unwrap();
    let p = CandidatePoint::new(&spec, &x, &y).unwrap();

    let cert = first_order_certificate(&spec, &p, &RunConfig::default()).unwrap();
    println!("verdict        : {:?}", cert.overall);
    println!("inner value    : {}", cert.inner_value);
    println!(
        "MFCQ           : {} (witness w = {:?}, margin {:?})",
        cert.cq.mfcq.pass, cert.cq.mfcq.witness, cert.cq.mfcq.margin
    );
    for d in &cert.directions {
        println!(
            "direction u = {:?}: primal {}, dual {}, gap {:.3e}",
            d.u, d.primal, d.dual, d.gap
        );
    }
    if let Some(w) = &cert.witness {
        println!(
            "witness        : alpha = {:?}, beta = {:?}",
            w.alpha_ineq, w.beta_ineq
        );
    }
}
