//! Build the linearization cones of a problem and enumerate extreme
//! rays and sample directions.
//!
//! Run with: cargo run --example cones_and_rays

use minimax_cert::cones::{
    active_sets, critical_set_c, linearization_cone_x, linearization_cone_y, sample_directions,
};
use minimax_cert::problem::{load_problem, CandidatePoint};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/p2.prob");
    let loaded = load_problem(path).unwrap();
    let spec = loaded.spec;
    let p = CandidatePoint::new(&spec, &[0.0], &[0.0]).unwrap();
    let act = active_sets(&spec, &p, 1e-7).unwrap();
    println!("active outer   : {:?}", act.i_phi);
    println!("active coupled : {:?}", act.i_varphi);

    let outer = linearization_cone_x(&spec, &p, &act);
    println!("outer cone rows: {:?} (u-space)", outer.a_ineq);
    println!("extreme rays   : {:?}", outer.extreme_rays().unwrap());

    let sample = sample_directions(&outer, 8, 0);
    println!("sampled dirs   : {:?}", sample.dirs);

    // the h-section of the coupled linearization cone at u = 1
    let section = linearization_cone_y(&spec, &p, &act, &[1.0]);
    println!("section rows   : {:?} <= {:?}", section.a_ineq, section.b_ineq);
    for h in [[1.0], [0.0], [1.5]] {
        println!("  h = {h:?} member: {}", section.contains(&h, 1e-9));
    }

    let critical = critical_set_c(&spec, &p, &act, &[1.0]);
    println!("critical section at u=1 contains 0: {}", critical.contains(&[0.0], 1e-9));
}
