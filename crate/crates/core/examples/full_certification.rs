//! The whole pipeline on one fixture: first-order, second-order,
//! strong-regularity diagnostic, grid oracle, and the JSON report.
//!
//! Run with: cargo run --example full_certification

use std::path::Path;

use minimax_cert::cli::run_certify;
use minimax_cert::config::RunConfig;
use minimax_cert::report::to_json;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/p_saddle.prob");
    let report = run_certify(Path::new(path), None, None, &RunConfig::default()).unwrap();

    println!("overall verdict: {}", report.overall);
    println!("exit code      : {}", report.overall.exit_code());
    if let Some(second) = &report.second_order {
        println!("growth claimed : {}", second.growth_claimed);
    }
    if let Some(oracle) = &report.oracle {
        for g in &oracle.growth {
            println!(
                "oracle growth at {:.2}: eps_hat {:.3}, mu_hat {:.3}",
                g.delta, g.eps_hat, g.mu_hat
            );
        }
    }

    let json = to_json(&report).unwrap();
    println!("JSON report ({} bytes), first 120:", json.len());
    println!("{}", &json[..120.min(json.len())]);
}
