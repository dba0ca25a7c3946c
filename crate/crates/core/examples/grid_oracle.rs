//! Brute-force grid verification: the localized value function, the
//! defining inequalities of a calm local minimax point, and the
//! two-sided growth estimate.
//!
//! Run with: cargo run --example grid_oracle

use minimax_cert::oracle::{localized_value, verify_calm_definition, verify_growth, GridSpec};
use minimax_cert::problem::{load_problem, CandidatePoint};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/p_saddle.prob");
    let loaded = load_problem(path).unwrap();
    let spec = loaded.spec;
    let p = CandidatePoint::new(&spec, &[0.0], &[0.0]).unwrap();
    let grid = GridSpec {
        delta: 0.2,
        kappa: 2.0,
        resolution: 41,
        feas_tol: 1e-9,
    };

    // V(x) = x^2/4 for this saddle; check the grid approximation
    for x in [0.1, 0.2, 0.4] {
        let v = localized_value(&spec, &[x], &p.y, grid.kappa * x, &grid).unwrap();
        println!("V_hat({x}) = {v} (analytic {})", x * x / 4.0);
    }

    let calm = verify_calm_definition(&spec, &p, &grid, &[0.2, 0.1, 0.05]).unwrap();
    println!(
        "defining inequalities: inner {}, outer {}",
        calm.inner_pass, calm.outer_pass
    );

    let growth = verify_growth(&spec, &p, &grid, 0.2).unwrap();
    println!(
        "growth: eps_hat = {:.4} (analytic 1), mu_hat = {:.4} (analytic 0.25) -> {:?}",
        growth.eps_hat, growth.mu_hat, growth.verdict
    );
}
