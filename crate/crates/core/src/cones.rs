//! Active sets and the polyhedral cones of the certification pipeline:
//! the outer linearization cone in `u`, the coupled linearization
//! section in `h` for a fixed `u`, the inner critical cone, and the
//! critical section that carries the second-order quadratic tests.
//!
//! Cones are stored in half-space form `{d | A_ineq d <= b_ineq,
//! A_eq d = b_eq}`. Homogeneous cones (`b = 0`) additionally support
//! extreme-ray enumeration (double description) and deterministic
//! direction sampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::numlin::dense::{axpy, dot, norm2, normalize, scale, Mat};
use crate::problem::{CandidatePoint, ProblemSpec};

pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Indices of active inequality constraints at the candidate point.
#[derive(Clone, Debug, PartialEq)]
pub struct ActiveSets {
    pub i_phi: Vec<usize>,
    pub i_varphi: Vec<usize>,
    pub eps_act: f64,
}

#[derive(Debug, Error)]
pub enum ConeError {
    #[error("candidate point violates constraints: {0}")]
    InfeasiblePoint(String),
    #[error("dimension {0} too large for exact ray enumeration")]
    DimensionTooLarge(usize),
}

/// Default activation tolerance: scales with the largest constraint value.
pub fn default_eps_act(p: &CandidatePoint) -> f64 {
    let mut scale = 0.0f64;
    for c in p
        .phi_ineq
        .iter()
        .chain(&p.phi_eq)
        .chain(&p.varphi_ineq)
        .chain(&p.varphi_eq)
    {
        scale = scale.max(c.val.abs());
    }
    1e-7 * (1.0 + scale)
}

/// Classify the inequality constraints as active/inactive at `p` and
/// verify feasibility within `eps_act`.
pub fn active_sets(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    eps_act: f64,
) -> Result<ActiveSets, ConeError> {
    let mut violations = Vec::new();
    let mut i_phi = Vec::new();
    for (i, c) in p.phi_ineq.iter().enumerate() {
        if c.val > eps_act {
            violations.push(format!("phi_ineq[{}] = {:.3e} > 0", i + 1, c.val));
        } else if c.val.abs() <= eps_act {
            i_phi.push(i);
        }
    }
    for (i, c) in p.phi_eq.iter().enumerate() {
        if c.val.abs() > eps_act {
            violations.push(format!("phi_eq[{}] = {:.3e} != 0", i + 1, c.val));
        }
    }
    let mut i_varphi = Vec::new();
    for (i, c) in p.varphi_ineq.iter().enumerate() {
        if c.val > eps_act {
            violations.push(format!("varphi_ineq[{}] = {:.3e} > 0", i + 1, c.val));
        } else if c.val.abs() <= eps_act {
            i_varphi.push(i);
        }
    }
    for (i, c) in p.varphi_eq.iter().enumerate() {
        if c.val.abs() > eps_act {
            violations.push(format!("varphi_eq[{}] = {:.3e} != 0", i + 1, c.val));
        }
    }
    if !violations.is_empty() {
        return Err(ConeError::InfeasiblePoint(violations.join("; ")));
    }
    let _ = spec;
    Ok(ActiveSets {
        i_phi,
        i_varphi,
        eps_act,
    })
}

/// Polyhedron `{d | A_ineq d <= b_ineq, A_eq d = b_eq}`. A zero offset
/// vector makes it a genuine cone.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyhedralCone {
    pub dim: usize,
    pub a_ineq: Vec<Vec<f64>>,
    pub b_ineq: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

impl PolyhedralCone {
    pub fn full_space(dim: usize) -> PolyhedralCone {
        PolyhedralCone {
            dim,
            a_ineq: Vec::new(),
            b_ineq: Vec::new(),
            a_eq: Vec::new(),
            b_eq: Vec::new(),
        }
    }

    pub fn push_ineq(&mut self, row: Vec<f64>, offset: f64) {
        debug_assert_eq!(row.len(), self.dim);
        self.a_ineq.push(row);
        self.b_ineq.push(offset);
    }

    pub fn push_eq(&mut self, row: Vec<f64>, offset: f64) {
        debug_assert_eq!(row.len(), self.dim);
        self.a_eq.push(row);
        self.b_eq.push(offset);
    }

    pub fn is_homogeneous(&self) -> bool {
        self.b_ineq.iter().chain(&self.b_eq).all(|b| *b == 0.0)
    }

    pub fn contains(&self, d: &[f64], tol: f64) -> bool {
        debug_assert_eq!(d.len(), self.dim);
        for (row, b) in self.a_ineq.iter().zip(&self.b_ineq) {
            if dot(row, d) > b + tol {
                return false;
            }
        }
        for (row, b) in self.a_eq.iter().zip(&self.b_eq) {
            if (dot(row, d) - b).abs() > tol {
                return false;
            }
        }
        true
    }

    /// The recession cone: same rows with zero offsets.
    pub fn recession(&self) -> PolyhedralCone {
        PolyhedralCone {
            dim: self.dim,
            a_ineq: self.a_ineq.clone(),
            b_ineq: vec![0.0; self.a_ineq.len()],
            a_eq: self.a_eq.clone(),
            b_eq: vec![0.0; self.a_eq.len()],
        }
    }

    /// Basis of the lineality space `{d | A_ineq d = 0, A_eq d = 0}`.
    pub fn lineality_basis(&self) -> Vec<Vec<f64>> {
        if self.dim == 0 {
            return Vec::new();
        }
        let mut rows: Vec<Vec<f64>> = self.a_ineq.clone();
        rows.extend(self.a_eq.clone());
        if rows.is_empty() {
            return (0..self.dim)
                .map(|i| {
                    let mut e = vec![0.0; self.dim];
                    e[i] = 1.0;
                    e
                })
                .collect();
        }
        Mat::from_rows(rows).nullspace(1e-10)
    }

    /// Extreme rays of a homogeneous cone by double description.
    /// Rays are unit length, deduplicated and lexicographically sorted.
    /// Lineality directions are not included; see [`Self::lineality_basis`].
    pub fn extreme_rays(&self) -> Result<Vec<Vec<f64>>, ConeError> {
        assert!(self.is_homogeneous(), "extreme rays need a homogeneous cone");
        if self.dim > 6 || self.a_ineq.len() > 20 {
            return Err(ConeError::DimensionTooLarge(self.dim));
        }
        Ok(double_description(self))
    }
}

// -------------------- double description --------------------

fn double_description(cone: &PolyhedralCone) -> Vec<Vec<f64>> {
    let dim = cone.dim;
    let tol = 1e-10;
    // start from the whole space as lineality
    let mut lineality: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut rays: Vec<Vec<f64>> = Vec::new();

    // equalities first: restrict both lineality and rays to the hyperplane
    for row in &cone.a_eq {
        cut_with_hyperplane(&mut lineality, &mut rays, row, tol);
    }
    for row in &cone.a_ineq {
        cut_with_halfspace(&mut lineality, &mut rays, row, tol);
    }

    // extremality filter: a ray is extreme iff its active rows span a
    // subspace of dimension dim - lineality_dim - 1
    let lin_dim = lineality.len();
    let needed = dim.saturating_sub(lin_dim + 1);
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for r in &rays {
        let Some(unit) = normalize(r) else { continue };
        let mut active: Vec<Vec<f64>> = cone.a_eq.clone();
        for row in &cone.a_ineq {
            if dot(row, &unit).abs() <= 1e-8 {
                active.push(row.clone());
            }
        }
        let rank = if active.is_empty() {
            0
        } else {
            Mat::from_rows(active).rank(1e-10)
        };
        if rank >= needed && cone.contains(&unit, MEMBERSHIP_TOL) {
            kept.push(unit);
        }
    }
    dedup_dirs(&mut kept);
    kept.sort_by(|a, b| a.partial_cmp(b).unwrap());
    kept
}

fn cut_with_hyperplane(lineality: &mut Vec<Vec<f64>>, rays: &mut Vec<Vec<f64>>, row: &[f64], tol: f64) {
    let pierced = lineality
        .iter()
        .position(|l| dot(row, l).abs() > tol);
    if let Some(idx) = pierced {
        let l0 = lineality.remove(idx);
        let a0 = dot(row, &l0);
        for l in lineality.iter_mut() {
            let c = dot(row, l) / a0;
            *l = axpy(-c, &l0, l);
        }
        for r in rays.iter_mut() {
            let c = dot(row, r) / a0;
            *r = axpy(-c, &l0, r);
        }
        // l0 itself is cut away entirely by the equality
        rays.retain(|r| norm2(r) > tol);
    } else {
        // combine rays across the hyperplane
        let mut zeros = Vec::new();
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for r in rays.drain(..) {
            let v = dot(row, &r);
            if v > tol {
                plus.push((v, r));
            } else if v < -tol {
                minus.push((v, r));
            } else {
                zeros.push(r);
            }
        }
        let mut new_rays = zeros;
        for (vp, rp) in &plus {
            for (vm, rm) in &minus {
                let combo = axpy(*vp / (vp - vm), rm, &scale(rp, -*vm / (vp - vm)));
                if norm2(&combo) > tol {
                    new_rays.push(combo);
                }
            }
        }
        *rays = new_rays;
    }
}

fn cut_with_halfspace(lineality: &mut Vec<Vec<f64>>, rays: &mut Vec<Vec<f64>>, row: &[f64], tol: f64) {
    let pierced = lineality
        .iter()
        .position(|l| dot(row, l).abs() > tol);
    if let Some(idx) = pierced {
        let mut l0 = lineality.remove(idx);
        if dot(row, &l0) > 0.0 {
            l0 = scale(&l0, -1.0);
        }
        let a0 = dot(row, &l0);
        for l in lineality.iter_mut() {
            let c = dot(row, l) / a0;
            *l = axpy(-c, &l0, l);
        }
        for r in rays.iter_mut() {
            let c = dot(row, r) / a0;
            *r = axpy(-c, &l0, r);
        }
        rays.push(l0);
    } else {
        let mut zeros = Vec::new();
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for r in rays.drain(..) {
            let v = dot(row, &r);
            if v > tol {
                plus.push((v, r));
            } else if v < -tol {
                minus.push((v, r));
            } else {
                zeros.push(r);
            }
        }
        let mut new_rays = zeros;
        for (_, rm) in &minus {
            new_rays.push(rm.clone());
        }
        for (vp, rp) in &plus {
            for (vm, rm) in &minus {
                // positive combination lying on the hyperplane
                let combo = axpy(*vp, rm, &scale(rp, -*vm));
                if norm2(&combo) > tol {
                    new_rays.push(combo);
                }
            }
        }
        *rays = new_rays;
    }
}

fn dedup_dirs(dirs: &mut Vec<Vec<f64>>) {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for d in dirs.drain(..) {
        let dup = out.iter().any(|e| {
            let c = dot(e, &d);
            c > 1.0 - 1e-9
        });
        if !dup {
            out.push(d);
        }
    }
    *dirs = out;
}

// -------------------- cone constructors --------------------

/// Outer linearization cone in `u`-space: active outer inequality
/// gradients as `<= 0` rows, all outer equality gradients as `= 0` rows.
pub fn linearization_cone_x(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
) -> PolyhedralCone {
    let mut cone = PolyhedralCone::full_space(spec.n);
    for &i in &act.i_phi {
        cone.push_ineq(p.grad_x(&p.phi_ineq[i]).to_vec(), 0.0);
    }
    for c in &p.phi_eq {
        cone.push_eq(p.grad_x(c).to_vec(), 0.0);
    }
    cone
}

/// Section of the coupled linearization cone at direction `u`, over `h`:
/// rows are the y-gradients, offsets absorb the `u`-part.
pub fn linearization_cone_y(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    u: &[f64],
) -> PolyhedralCone {
    debug_assert_eq!(u.len(), spec.n);
    let mut cone = PolyhedralCone::full_space(spec.m);
    for &i in &act.i_varphi {
        let c = &p.varphi_ineq[i];
        cone.push_ineq(p.grad_y(c).to_vec(), -dot(p.grad_x(c), u));
    }
    for c in &p.varphi_eq {
        cone.push_eq(p.grad_y(c).to_vec(), -dot(p.grad_x(c), u));
    }
    cone
}

/// Critical cone of the inner maximization: the `u = 0` linearization
/// intersected with the zero level set of the inner objective gradient.
pub fn critical_cone_max(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
) -> PolyhedralCone {
    let zero_u = vec![0.0; spec.n];
    let mut cone = linearization_cone_y(spec, p, act, &zero_u);
    cone.push_eq(p.grad_y(&p.f).to_vec(), 0.0);
    cone
}

/// The critical section `C(xbar, ybar; u)`: linearization section at `u`
/// intersected with `{h | grad f . (u, h) = 0}`.
pub fn critical_set_c(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    u: &[f64],
) -> PolyhedralCone {
    let mut cone = linearization_cone_y(spec, p, act, u);
    cone.push_eq(p.grad_y(&p.f).to_vec(), -dot(p.grad_x(&p.f), u));
    cone
}

// -------------------- direction sampling --------------------

/// Deterministic unit directions inside a homogeneous cone: all extreme
/// rays, a signed lineality basis, then seeded quasi-uniform sphere
/// points filtered by membership, up to `budget` in total.
///
/// `sampled_only` is true when the dimension exceeds the exact
/// enumeration limit and only sphere sampling was used.
#[derive(Clone, Debug)]
pub struct DirectionSample {
    pub dirs: Vec<Vec<f64>>,
    pub sampled_only: bool,
}

pub fn sample_directions(cone: &PolyhedralCone, budget: usize, seed: u64) -> DirectionSample {
    assert!(cone.is_homogeneous(), "direction sampling needs a cone");
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    let mut sampled_only = false;

    if cone.dim == 0 {
        return DirectionSample {
            dirs,
            sampled_only,
        };
    }

    match cone.extreme_rays() {
        Ok(rays) => {
            dirs.extend(rays);
            for l in cone.lineality_basis() {
                if let Some(unit) = normalize(&l) {
                    dirs.push(unit.clone());
                    dirs.push(scale(&unit, -1.0));
                }
            }
        }
        Err(ConeError::DimensionTooLarge(_)) => sampled_only = true,
        Err(_) => sampled_only = true,
    }
    dedup_dirs(&mut dirs);

    // quasi-uniform filler: sample on the sphere of the equality-feasible
    // subspace so that lower-dimensional cones still get hits
    let span: Vec<Vec<f64>> = if cone.a_eq.is_empty() {
        (0..cone.dim)
            .map(|i| {
                let mut e = vec![0.0; cone.dim];
                e[i] = 1.0;
                e
            })
            .collect()
    } else {
        Mat::from_rows(cone.a_eq.clone()).nullspace(1e-10)
    };
    if !span.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut attempts = 0usize;
        let max_attempts = budget.saturating_mul(200) + 200;
        while dirs.len() < budget && attempts < max_attempts {
            attempts += 1;
            let coeffs: Vec<f64> = (0..span.len())
                .map(|_| standard_normal(&mut rng))
                .collect();
            let mut cand = vec![0.0; cone.dim];
            for (c, basis) in coeffs.iter().zip(&span) {
                cand = axpy(*c, basis, &cand);
            }
            let Some(unit) = normalize(&cand) else { continue };
            if !cone.contains(&unit, MEMBERSHIP_TOL) {
                continue;
            }
            let dup = dirs.iter().any(|e| dot(e, &unit) > 1.0 - 1e-9);
            if !dup {
                dirs.push(unit);
            }
        }
    }
    DirectionSample { dirs, sampled_only }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on two uniform draws
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::parse_problem;

    const P2: &str = "n = 1\nm = 1\nf = y1\nphi_ineq = -x1\nvarphi_ineq = y1 - x1\n";
    const P_SADDLE: &str = "n = 1\nm = 1\nf = x1*y1 - y1^2\n";

    fn point(text: &str, x: &[f64], y: &[f64]) -> (ProblemSpec, CandidatePoint) {
        let spec = parse_problem(text).unwrap().spec;
        let p = CandidatePoint::new(&spec, x, y).unwrap();
        (spec, p)
    }

    #[test]
    fn p2_active_sets_at_origin() {
        let (spec, p) = point(P2, &[0.0], &[0.0]);
        let act = active_sets(&spec, &p, 0.0).unwrap();
        assert_eq!(act.i_phi, vec![0]);
        assert_eq!(act.i_varphi, vec![0]);
    }

    #[test]
    fn p2_inactive_away_from_origin() {
        let (spec, p) = point(P2, &[1.0], &[0.5]);
        let act = active_sets(&spec, &p, 1e-7).unwrap();
        assert!(act.i_phi.is_empty());
        assert!(act.i_varphi.is_empty());
    }

    #[test]
    fn unconstrained_sets_empty() {
        let (spec, p) = point(P_SADDLE, &[0.0], &[0.0]);
        let act = active_sets(&spec, &p, 1e-7).unwrap();
        assert!(act.i_phi.is_empty() && act.i_varphi.is_empty());
    }

    #[test]
    fn infeasible_point_rejected() {
        let (spec, p) = point(P2, &[-1.0], &[0.0]);
        assert!(matches!(
            active_sets(&spec, &p, 1e-7),
            Err(ConeError::InfeasiblePoint(_))
        ));
    }

    #[test]
    fn p2_linearization_cone_x() {
        let (spec, p) = point(P2, &[0.0], &[0.0]);
        let act = active_sets(&spec, &p, 0.0).unwrap();
        let cone = linearization_cone_x(&spec, &p, &act);
        // {u | -u <= 0} = [0, inf)
        assert!(cone.contains(&[1.0], 1e-12));
        assert!(!cone.contains(&[-1.0], 1e-9));
    }

    #[test]
    fn p2_linearization_sections() {
        let (spec, p) = point(P2, &[0.0], &[0.0]);
        let act = active_sets(&spec, &p, 0.0).unwrap();
        let at_one = linearization_cone_y(&spec, &p, &act, &[1.0]);
        // grad varphi = (-1, 1): {h | h - 1 <= 0}
        assert!(at_one.contains(&[1.0], 1e-12));
        assert!(at_one.contains(&[-5.0], 1e-12));
        assert!(!at_one.contains(&[1.1], 1e-9));
        let at_zero = linearization_cone_y(&spec, &p, &act, &[0.0]);
        assert!(at_zero.contains(&[0.0], 1e-12));
        assert!(!at_zero.contains(&[0.1], 1e-9));
    }

    #[test]
    fn p2_critical_cone_max_is_origin() {
        let (spec, p) = point(P2, &[0.0], &[0.0]);
        let act = active_sets(&spec, &p, 0.0).unwrap();
        let cone = critical_cone_max(&spec, &p, &act);
        assert!(cone.contains(&[0.0], 1e-12));
        assert!(!cone.contains(&[-0.5], 1e-9)); // grad_y f = 1 forces h = 0
    }

    #[test]
    fn saddle_critical_cone_max_is_line() {
        let (spec, p) = point(P_SADDLE, &[0.0], &[0.0]);
        let act = active_sets(&spec, &p, 1e-7).unwrap();
        let cone = critical_cone_max(&spec, &p, &act);
        assert!(cone.contains(&[3.0], 1e-12));
        assert!(cone.contains(&[-3.0], 1e-12));
    }

    #[test]
    fn p2_critical_set_is_origin_at_u_one() {
        let (spec, p) = point(P2, &[0.0], &[0.0]);
        let act = active_sets(&spec, &p, 0.0).unwrap();
        let c = critical_set_c(&spec, &p, &act, &[1.0]);
        assert!(c.contains(&[0.0], 1e-12));
        assert!(!c.contains(&[0.5], 1e-9));
        assert!(!c.contains(&[-0.5], 1e-9));
    }

    #[test]
    fn saddle_critical_set_is_everything() {
        let (spec, p) = point(P_SADDLE, &[0.0], &[0.0]);
        let act = active_sets(&spec, &p, 1e-7).unwrap();
        let c = critical_set_c(&spec, &p, &act, &[1.0]);
        assert!(c.contains(&[7.0], 1e-12));
        assert!(c.contains(&[-7.0], 1e-12));
    }

    #[test]
    fn half_line_sampling() {
        let mut cone = PolyhedralCone::full_space(1);
        cone.push_ineq(vec![-1.0], 0.0); // -d <= 0, i.e. d >= 0
        let s = sample_directions(&cone, 8, 0);
        assert_eq!(s.dirs, vec![vec![1.0]]);
    }

    #[test]
    fn full_line_sampling() {
        let cone = PolyhedralCone::full_space(1);
        let s = sample_directions(&cone, 8, 0);
        assert_eq!(s.dirs.len(), 2);
        assert!(s.dirs.contains(&vec![1.0]));
        assert!(s.dirs.contains(&vec![-1.0]));
    }

    #[test]
    fn halfspace_sampling_members_only() {
        let mut cone = PolyhedralCone::full_space(2);
        cone.push_ineq(vec![0.0, 1.0], 0.0); // u2 <= 0
        let budget = 16;
        let s = sample_directions(&cone, budget, 0);
        assert_eq!(s.dirs.len(), budget);
        for d in &s.dirs {
            assert!(cone.contains(d, MEMBERSHIP_TOL));
            assert!((norm2(d) - 1.0).abs() < 1e-12);
        }
        assert!(!s.sampled_only);
    }

    #[test]
    fn orthant_extreme_rays() {
        // {d in R^2 | -d <= 0} has extreme rays e1, e2
        let mut cone = PolyhedralCone::full_space(2);
        cone.push_ineq(vec![-1.0, 0.0], 0.0);
        cone.push_ineq(vec![0.0, -1.0], 0.0);
        let rays = cone.extreme_rays().unwrap();
        assert_eq!(rays.len(), 2);
        assert!(rays.contains(&vec![0.0, 1.0]));
        assert!(rays.contains(&vec![1.0, 0.0]));
    }

    #[test]
    fn pointed_cone_in_three_dims() {
        // x >= 0, y >= 0, z = x + y: rays (1,0,1) and (0,1,1)
        let mut cone = PolyhedralCone::full_space(3);
        cone.push_ineq(vec![-1.0, 0.0, 0.0], 0.0);
        cone.push_ineq(vec![0.0, -1.0, 0.0], 0.0);
        cone.push_eq(vec![1.0, 1.0, -1.0], 0.0);
        let rays = cone.extreme_rays().unwrap();
        assert_eq!(rays.len(), 2);
        let r2 = 1.0 / 2f64.sqrt();
        for ray in &rays {
            let expected_a = (ray[0] - r2).abs() < 1e-9 && ray[1].abs() < 1e-9;
            let expected_b = (ray[1] - r2).abs() < 1e-9 && ray[0].abs() < 1e-9;
            assert!(expected_a || expected_b, "unexpected ray {ray:?}");
        }
    }

    #[test]
    fn sampling_respects_homogeneous_scaling() {
        let mut cone = PolyhedralCone::full_space(2);
        cone.push_ineq(vec![1.0, 1.0], 0.0);
        let s = sample_directions(&cone, 12, 0);
        for d in &s.dirs {
            for lambda in [0.5, 2.0, 10.0] {
                assert!(cone.contains(&scale(d, lambda), 1e-9));
            }
        }
    }
}
