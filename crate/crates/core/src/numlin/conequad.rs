//! Exact maximization of a quadratic over a polyhedral set by face
//! enumeration.
//!
//! Every subset of inequality rows is turned into equalities, the
//! stationary point of the restriction is computed on the face's
//! nullspace, and feasible candidates compete for the maximum. The sup
//! of a quadratic over a polyhedron is attained at such a stationary
//! point whenever it is finite (Frank-Wolfe), so the enumeration is
//! exact at this scale.
//!
//! Unboundedness detection is exact for concave and affine restrictions
//! (the pipeline's main path: negative-definite inner Hessians and
//! affine constraints). For genuinely indefinite quadratics the
//! positive-curvature probes (face eigenvectors, recession extreme rays,
//! seeded recession samples) are used; this cannot be complete in
//! general, which is acceptable for the desk-scale cones handled here.

use thiserror::Error;

use super::dense::{axpy, dot, norm_inf, normalize, Mat};
use super::eig::jacobi_eigen;
use super::simplex::{solve_lp, LinearProgram, LpError, LpStatus, RowSense, VarBound};
use crate::cones::{sample_directions, PolyhedralCone};

#[derive(Clone, Debug)]
pub struct ConeQuadResult {
    /// True when the supremum is +infinity; `arg` then holds a feasible
    /// ray along which the quadratic grows without bound.
    pub unbounded: bool,
    pub value: f64,
    pub arg: Vec<f64>,
    /// Inequality rows active at the maximizer (tolerance 1e-9).
    pub active_face: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum ConeQuadError {
    #[error("face budget exceeded: {0} inequality rows")]
    FaceBudgetExceeded(usize),
    #[error("feasible set is empty")]
    EmptyFeasibleSet,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Maximize `1/2 d'Hd + g'd` over the polyhedron described by `cone`.
pub fn max_quad_over_cone(
    h: &Mat,
    g: &[f64],
    cone: &PolyhedralCone,
) -> Result<ConeQuadResult, ConeQuadError> {
    let dim = cone.dim;
    assert_eq!(h.nrows(), dim);
    assert_eq!(h.ncols(), dim);
    assert_eq!(g.len(), dim);
    if dim == 0 {
        return Ok(ConeQuadResult {
            unbounded: false,
            value: 0.0,
            arg: Vec::new(),
            active_face: Vec::new(),
        });
    }
    let k = cone.a_ineq.len();
    if k > 20 {
        return Err(ConeQuadError::FaceBudgetExceeded(k));
    }

    let feas = feasible_point(cone)?;
    let Some(d_feas) = feas else {
        return Err(ConeQuadError::EmptyFeasibleSet);
    };

    let h_norm = h.norm_inf();
    let tol_curv = 1e-9 * (1.0 + h_norm);
    let tol_slope = 1e-9 * (1.0 + norm_inf(g) + h_norm * (1.0 + norm_inf(&d_feas)));
    let grad_at_feas = {
        let mut v = h.matvec(&d_feas);
        for i in 0..dim {
            v[i] += g[i];
        }
        v
    };

    // recession-direction probes
    let recession = cone.recession();
    let mut probes: Vec<Vec<f64>> = Vec::new();
    if let Ok(rays) = recession.extreme_rays() {
        probes.extend(rays);
    }
    probes.extend(sample_directions(&recession, 32, 0).dirs);
    for v in &probes {
        let curv = dot(v, &h.matvec(v));
        if curv > tol_curv {
            return Ok(unbounded_along(v));
        }
        if curv.abs() <= tol_curv && dot(&grad_at_feas, v) > tol_slope {
            return Ok(unbounded_along(v));
        }
    }

    let eq_rows = cone.a_eq.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    'faces: for mask in 0u32..(1u32 << k) {
        // face system: all equalities plus the selected inequality rows
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(eq_rows + k);
        let mut rhs: Vec<f64> = Vec::with_capacity(eq_rows + k);
        for (row, b) in cone.a_eq.iter().zip(&cone.b_eq) {
            rows.push(row.clone());
            rhs.push(*b);
        }
        for i in 0..k {
            if mask & (1 << i) != 0 {
                rows.push(cone.a_ineq[i].clone());
                rhs.push(cone.b_ineq[i]);
            }
        }

        let (d0, null) = if rows.is_empty() {
            (vec![0.0; dim], identity_basis(dim))
        } else {
            let a = Mat::from_rows(rows);
            let Some(d0) = a.solve_consistent(&rhs, 1e-10) else {
                continue; // inconsistent face
            };
            (d0, a.nullspace(1e-10))
        };

        if null.is_empty() {
            // vertex of the face system
            consider(&mut best, h, g, cone, &d0);
            continue;
        }

        // reduced quadratic on the face: 1/2 w'(Z'HZ)w + (Z'(g + H d0))'w
        let z = Mat::from_rows(null.clone()).transpose();
        let hz = h.matmul(&z);
        let hr = z.transpose().matmul(&hz);
        let mut gr = vec![0.0; null.len()];
        let g_shift = {
            let mut v = h.matvec(&d0);
            for i in 0..dim {
                v[i] += g[i];
            }
            v
        };
        for (j, basis) in null.iter().enumerate() {
            gr[j] = dot(basis, &g_shift);
        }

        // positive curvature on the face: probe lifted eigenvectors
        let (evals, evecs) = jacobi_eigen(&hr);
        for (idx, &lambda) in evals.iter().enumerate() {
            if lambda > tol_curv {
                let w: Vec<f64> = (0..null.len()).map(|r| evecs[(r, idx)]).collect();
                let v = lift(&z, &w);
                for cand in [v.clone(), neg(&v)] {
                    if recession_feasible(cone, &cand) {
                        return Ok(unbounded_along(&cand));
                    }
                }
            }
        }

        let neg_gr: Vec<f64> = gr.iter().map(|v| -v).collect();
        let hr_mat = hr.clone();
        let w = match hr_mat.solve(&neg_gr) {
            Ok(w) => w,
            Err(_) => {
                match hr_mat.solve_consistent(&neg_gr, 1e-10) {
                    Some(w) => w,
                    None => {
                        // linear growth along a kernel direction of the
                        // reduced Hessian; unbounded when that direction
                        // is recession-feasible
                        for basis in hr_mat.nullspace(1e-10) {
                            let slope = dot(&basis, &gr);
                            if slope.abs() <= tol_slope {
                                continue;
                            }
                            let mut w_dir = basis;
                            if slope < 0.0 {
                                w_dir = neg(&w_dir);
                            }
                            let v = lift(&z, &w_dir);
                            if recession_feasible(cone, &v) {
                                return Ok(unbounded_along(&v));
                            }
                        }
                        continue 'faces;
                    }
                }
            }
        };
        let d_star = {
            let mut d = d0.clone();
            for (j, basis) in null.iter().enumerate() {
                d = axpy(w[j], basis, &d);
            }
            d
        };
        consider(&mut best, h, g, cone, &d_star);
    }

    let (value, arg) = match best {
        Some(b) => b,
        None => (quad_value(h, g, &d_feas), d_feas),
    };
    let active_face = cone
        .a_ineq
        .iter()
        .zip(&cone.b_ineq)
        .enumerate()
        .filter(|(_, (row, b))| (dot(row, &arg) - **b).abs() <= 1e-9)
        .map(|(i, _)| i)
        .collect();
    Ok(ConeQuadResult {
        unbounded: false,
        value,
        arg,
        active_face,
    })
}

fn quad_value(h: &Mat, g: &[f64], d: &[f64]) -> f64 {
    0.5 * dot(d, &h.matvec(d)) + dot(g, d)
}

fn consider(best: &mut Option<(f64, Vec<f64>)>, h: &Mat, g: &[f64], cone: &PolyhedralCone, d: &[f64]) {
    if !cone.contains(d, 1e-9 * (1.0 + norm_inf(d))) {
        return;
    }
    let v = quad_value(h, g, d);
    match best {
        None => *best = Some((v, d.to_vec())),
        Some((bv, _)) => {
            if v > *bv + 1e-12 {
                *best = Some((v, d.to_vec()));
            }
        }
    }
}

fn unbounded_along(v: &[f64]) -> ConeQuadResult {
    ConeQuadResult {
        unbounded: true,
        value: f64::INFINITY,
        arg: normalize(v).unwrap_or_else(|| v.to_vec()),
        active_face: Vec::new(),
    }
}

fn recession_feasible(cone: &PolyhedralCone, v: &[f64]) -> bool {
    let tol = 1e-9;
    cone.a_ineq.iter().all(|row| dot(row, v) <= tol)
        && cone.a_eq.iter().all(|row| dot(row, v).abs() <= tol)
}

fn lift(z: &Mat, w: &[f64]) -> Vec<f64> {
    z.matvec(w)
}

fn neg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}

fn identity_basis(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect()
}

/// Any point of the polyhedron, or `None` when it is empty.
fn feasible_point(cone: &PolyhedralCone) -> Result<Option<Vec<f64>>, LpError> {
    if cone.dim == 0 {
        return Ok(Some(Vec::new()));
    }
    if cone.is_homogeneous() {
        return Ok(Some(vec![0.0; cone.dim]));
    }
    let mut rows = Vec::new();
    let mut senses = Vec::new();
    let mut rhs = Vec::new();
    for (row, b) in cone.a_ineq.iter().zip(&cone.b_ineq) {
        rows.push(row.clone());
        senses.push(RowSense::Le);
        rhs.push(*b);
    }
    for (row, b) in cone.a_eq.iter().zip(&cone.b_eq) {
        rows.push(row.clone());
        senses.push(RowSense::Eq);
        rhs.push(*b);
    }
    let lp = LinearProgram {
        objective: vec![0.0; cone.dim],
        rows,
        senses,
        rhs,
        bounds: vec![VarBound::Free; cone.dim],
    };
    let sol = solve_lp(&lp)?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(sol.point),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_cross_term_over_free_line() {
        // maximize 2h - 2h^2 over h in R: H = -4, g = 2, max 0.5 at 0.5
        let h = Mat::from_rows(vec![vec![-4.0]]);
        let cone = PolyhedralCone::full_space(1);
        let r = max_quad_over_cone(&h, &[2.0], &cone).unwrap();
        assert!(!r.unbounded);
        assert!((r.value - 0.5).abs() < 1e-10);
        assert!((r.arg[0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn positive_curvature_ray_unbounded() {
        // H = +1 over {h >= 0}
        let h = Mat::from_rows(vec![vec![1.0]]);
        let mut cone = PolyhedralCone::full_space(1);
        cone.push_ineq(vec![-1.0], 0.0);
        let r = max_quad_over_cone(&h, &[0.0], &cone).unwrap();
        assert!(r.unbounded);
    }

    #[test]
    fn negative_definite_maximum_at_origin() {
        let h = Mat::from_rows(vec![vec![-1.0, 0.0], vec![0.0, -1.0]]);
        let mut cone = PolyhedralCone::full_space(2);
        cone.push_ineq(vec![-1.0, 0.0], 0.0);
        let r = max_quad_over_cone(&h, &[0.0, 0.0], &cone).unwrap();
        assert!(!r.unbounded);
        assert!(r.value.abs() < 1e-12);
        assert!(norm_inf(&r.arg) < 1e-9);
    }

    #[test]
    fn zero_cone_gives_zero() {
        let h = Mat::from_rows(vec![vec![5.0]]);
        let mut cone = PolyhedralCone::full_space(1);
        cone.push_eq(vec![1.0], 0.0);
        let r = max_quad_over_cone(&h, &[3.0], &cone).unwrap();
        assert!(!r.unbounded);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn linear_growth_along_lineality_unbounded() {
        // H = 0, g = (1, 0) over {d | d_2 = 0}: grows along +e1
        let h = Mat::zeros(2, 2);
        let mut cone = PolyhedralCone::full_space(2);
        cone.push_eq(vec![0.0, 1.0], 0.0);
        let r = max_quad_over_cone(&h, &[1.0, 0.0], &cone).unwrap();
        assert!(r.unbounded);
    }

    #[test]
    fn bounded_section_with_offsets() {
        // maximize -h^2 + h over {h <= 1} (offset row): interior max 0.25 at 0.5
        let h = Mat::from_rows(vec![vec![-2.0]]);
        let mut cone = PolyhedralCone::full_space(1);
        cone.push_ineq(vec![1.0], 1.0);
        let r = max_quad_over_cone(&h, &[1.0], &cone).unwrap();
        assert!(!r.unbounded);
        assert!((r.value - 0.25).abs() < 1e-10);
        assert!((r.arg[0] - 0.5).abs() < 1e-10);
        assert!(r.active_face.is_empty());

        // flip the sign of the linear term pushes the max to the boundary
        let r = max_quad_over_cone(&h, &[3.0], &cone).unwrap();
        assert!((r.arg[0] - 1.0).abs() < 1e-10);
        assert_eq!(r.active_face, vec![0]);
    }

    #[test]
    fn empty_section_detected() {
        // h <= -1 and h >= 1 simultaneously
        let h = Mat::from_rows(vec![vec![-1.0]]);
        let mut cone = PolyhedralCone::full_space(1);
        cone.push_ineq(vec![1.0], -1.0);
        cone.push_ineq(vec![-1.0], -1.0);
        assert!(matches!(
            max_quad_over_cone(&h, &[0.0], &cone),
            Err(ConeQuadError::EmptyFeasibleSet)
        ));
    }

    #[test]
    fn concave_matches_unconstrained_kkt() {
        // H < 0 over the full space agrees with -H^{-1} g
        let h = Mat::from_rows(vec![vec![-3.0, 0.5], vec![0.5, -2.0]]);
        let g = [1.0, -1.0];
        let cone = PolyhedralCone::full_space(2);
        let r = max_quad_over_cone(&h, &g, &cone).unwrap();
        let d = h.solve(&[-g[0], -g[1]]).unwrap();
        assert!((r.arg[0] - d[0]).abs() < 1e-9);
        assert!((r.arg[1] - d[1]).abs() < 1e-9);
    }
}
