//! Cross-check the analytic directional derivatives of the localized
//! value function against Richardson-extrapolated finite differences on
//! refining grids.
//!
//! Run with: cargo run --example fd_derivative_check

use minimax_cert::cones::active_sets;
use minimax_cert::oracle::{fd_directional_derivative, fd_second_directional, GridSpec};
use minimax_cert::problem::{load_problem, CandidatePoint};

fn main() {
    for fixture in ["p_saddle.prob", "p2.prob"] {
        let path = format!("{}/fixtures/{fixture}", env!("CARGO_MANIFEST_DIR"));
        let loaded = load_problem(&path).unwrap();
        let spec = loaded.spec;
        let x = loaded.point_x.unwrap();
        let y = loaded.point_y.unwrap();
        let p = CandidatePoint::new(&spec, &x, &y).unwrap();
        let act = active_sets(&spec, &p, 1e-7).unwrap();
        let grid = GridSpec {
            delta: 0.2,
            kappa: 2.0,
            resolution: 41,
            feas_tol: 1e-9,
        };
        let steps = [0.2, 0.1, 0.05];

        let first = fd_directional_derivative(&spec, &p, &act, &[1.0], &grid, &steps).unwrap();
        println!(
            "{fixture}: V' estimate {:?} vs analytic {} (diff {:?})",
            first.estimate, first.analytic, first.diff
        );
        let second = fd_second_directional(&spec, &p, &act, &[1.0], &grid, &steps).unwrap();
        println!(
            "{fixture}: V'' estimate {:?} vs lower bound {:?} -> {}",
            second.estimate,
            second.lower_bound,
            if second.pass { "consistent" } else { "violated" }
        );
    }
}
