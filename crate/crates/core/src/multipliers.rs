//! Multiplier sets of the minimax problem and their certification.
//!
//! Three polyhedra drive the pipeline, all expressed over the stacked
//! multiplier vector `beta` of the coupled constraints (inequalities
//! then equalities) and, for the full set, `alpha` of the outer
//! constraints:
//!
//! * the inner multiplier set: `beta` with stationarity of the inner
//!   Lagrangian in `y`, nonnegative on active inequalities, zero on
//!   inactive ones;
//! * the full multiplier set: `(alpha, beta)` with stationarity of the
//!   minimax Lagrangian `f + phi'alpha - varphi'beta` in `(x, y)`;
//! * the directional argmin face: the subset of inner multipliers
//!   minimizing the directional outer derivative, whose optimal value
//!   equals the primal directional derivative of the localized value
//!   function by strong duality.
//!
//! Complementarity is built into the polyhedra as hard zeros for
//! inactive inequality multipliers, keeping every set exactly
//! polyhedral.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::{ActiveSets, ConeError};
use crate::ext::ExtVal;
use crate::numlin::dense::{dot, norm2, Mat};
use crate::numlin::eig::max_eig;
use crate::numlin::simplex::{
    solve_lp, LinearProgram, LpError, LpStatus, RowSense, VarBound,
};
use crate::problem::{CandidatePoint, ProblemSpec};

/// Multiplier blocks `(alpha, beta)`; inequality blocks are sign
/// constrained, equality blocks are free.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierVector {
    pub alpha_ineq: Vec<f64>,
    pub alpha_eq: Vec<f64>,
    pub beta_ineq: Vec<f64>,
    pub beta_eq: Vec<f64>,
}

impl MultiplierVector {
    pub fn beta_only(beta_ineq: Vec<f64>, beta_eq: Vec<f64>) -> MultiplierVector {
        MultiplierVector {
            alpha_ineq: Vec::new(),
            alpha_eq: Vec::new(),
            beta_ineq,
            beta_eq,
        }
    }

    /// Stacked beta in constraint order (inequalities then equalities).
    pub fn beta_stacked(&self) -> Vec<f64> {
        let mut v = self.beta_ineq.clone();
        v.extend_from_slice(&self.beta_eq);
        v
    }
}

#[derive(Debug, Error)]
pub enum MultiplierError {
    #[error("inner multiplier set is empty at tolerance")]
    LambdaMaxEmpty,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

// -------------------- beta variable layout --------------------

// Variables of the inner multiplier polyhedron: one per active
// inequality (nonneg) and one per equality (free). Inactive inequality
// multipliers are pinned to zero and excluded.
struct BetaLayout {
    // (constraint index within beta_ineq) for each nonneg variable
    active: Vec<usize>,
    q1: usize,
    q2: usize,
}

impl BetaLayout {
    fn new(spec: &ProblemSpec, act: &ActiveSets) -> BetaLayout {
        BetaLayout {
            active: act.i_varphi.clone(),
            q1: spec.q1(),
            q2: spec.q2(),
        }
    }

    fn num_vars(&self) -> usize {
        self.active.len() + self.q2
    }

    fn bounds(&self) -> Vec<VarBound> {
        let mut b = vec![VarBound::NonNeg; self.active.len()];
        b.extend(vec![VarBound::Free; self.q2]);
        b
    }

    /// Constraint cache for variable `j` (active inequalities first,
    /// then equalities).
    fn cache<'a>(&self, p: &'a CandidatePoint, j: usize) -> &'a crate::problem::EvalCache {
        if j < self.active.len() {
            &p.varphi_ineq[self.active[j]]
        } else {
            &p.varphi_eq[j - self.active.len()]
        }
    }

    fn expand(&self, vars: &[f64]) -> MultiplierVector {
        let mut beta_ineq = vec![0.0; self.q1];
        for (j, &idx) in self.active.iter().enumerate() {
            beta_ineq[idx] = vars[j];
        }
        let beta_eq = vars[self.active.len()..].to_vec();
        MultiplierVector::beta_only(beta_ineq, beta_eq)
    }

    /// Rows of inner stationarity: `sum_j beta_j grad_y varphi_j = grad_y f`.
    fn stationarity_rows(&self, p: &CandidatePoint) -> (Vec<Vec<f64>>, Vec<f64>) {
        let m = p.m();
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for r in 0..m {
            let mut row = Vec::with_capacity(self.num_vars());
            for j in 0..self.num_vars() {
                row.push(p.grad_y(self.cache(p, j))[r]);
            }
            rows.push(row);
            rhs.push(p.grad_y(&p.f)[r]);
        }
        (rows, rhs)
    }

    /// Objective coefficients of the directional LP for direction `u`:
    /// minimizing `grad_x f . u - (grad_x varphi' beta) . u` over the set
    /// reduces to these per-variable coefficients plus the constant.
    fn directional_costs(&self, p: &CandidatePoint, u: &[f64]) -> Vec<f64> {
        (0..self.num_vars())
            .map(|j| -dot(p.grad_x(self.cache(p, j)), u))
            .collect()
    }
}

/// One element of the inner multiplier set, or `None` when it is empty.
/// The witness is canonical: it minimizes the sum of the sign-constrained
/// entries, with deterministic pivoting below that.
pub fn lambda_max_find(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
) -> Result<Option<MultiplierVector>, MultiplierError> {
    let layout = BetaLayout::new(spec, act);
    let (rows, rhs) = layout.stationarity_rows(p);
    let mut objective = vec![1.0; layout.active.len()];
    objective.extend(vec![0.0; layout.q2]);
    let lp = LinearProgram {
        objective,
        senses: vec![RowSense::Eq; rows.len()],
        rows,
        rhs,
        bounds: layout.bounds(),
    };
    let sol = solve_lp(&lp)?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(layout.expand(&sol.point)),
        _ => None,
    })
}

/// One element of the full multiplier set `(alpha, beta)`, or `None`.
pub fn full_multiplier_find(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
) -> Result<Option<MultiplierVector>, MultiplierError> {
    let layout = BetaLayout::new(spec, act);
    let n = spec.n;
    let m = spec.m;
    // alpha variables: active outer inequalities (nonneg), outer equalities (free)
    let alpha_active = act.i_phi.clone();
    let num_alpha = alpha_active.len() + spec.p2();
    let num_beta = layout.num_vars();
    let alpha_cache = |j: usize| -> &crate::problem::EvalCache {
        if j < alpha_active.len() {
            &p.phi_ineq[alpha_active[j]]
        } else {
            &p.phi_eq[j - alpha_active.len()]
        }
    };

    let mut rows = Vec::with_capacity(n + m);
    let mut rhs = Vec::with_capacity(n + m);
    // x-stationarity: grad_x phi' alpha - grad_x varphi' beta = -grad_x f
    for r in 0..n {
        let mut row = Vec::with_capacity(num_alpha + num_beta);
        for j in 0..num_alpha {
            row.push(p.grad_x(alpha_cache(j))[r]);
        }
        for j in 0..num_beta {
            row.push(-p.grad_x(layout.cache(p, j))[r]);
        }
        rows.push(row);
        rhs.push(-p.grad_x(&p.f)[r]);
    }
    // y-stationarity: grad_y varphi' beta = grad_y f
    for r in 0..m {
        let mut row = vec![0.0; num_alpha];
        for j in 0..num_beta {
            row.push(p.grad_y(layout.cache(p, j))[r]);
        }
        rows.push(row);
        rhs.push(p.grad_y(&p.f)[r]);
    }

    let mut bounds = vec![VarBound::NonNeg; alpha_active.len()];
    bounds.extend(vec![VarBound::Free; spec.p2()]);
    bounds.extend(layout.bounds());
    let mut objective = vec![1.0; alpha_active.len()];
    objective.extend(vec![0.0; spec.p2()]);
    objective.extend(vec![1.0; layout.active.len()]);
    objective.extend(vec![0.0; layout.q2]);

    let lp = LinearProgram {
        objective,
        rows,
        senses: vec![RowSense::Eq; n + m],
        rhs,
        bounds,
    };
    let sol = solve_lp(&lp)?;
    Ok(match sol.status {
        LpStatus::Optimal => {
            let mut alpha_ineq = vec![0.0; spec.p1()];
            for (j, &idx) in alpha_active.iter().enumerate() {
                alpha_ineq[idx] = sol.point[j];
            }
            let alpha_eq = sol.point[alpha_active.len()..num_alpha].to_vec();
            let beta = layout.expand(&sol.point[num_alpha..]);
            Some(MultiplierVector {
                alpha_ineq,
                alpha_eq,
                beta_ineq: beta.beta_ineq,
                beta_eq: beta.beta_eq,
            })
        }
        _ => None,
    })
}

/// Outcome of the directional multiplier LP.
#[derive(Clone, Debug)]
pub struct Lambda2Result {
    /// The minimum of the directional outer derivative over the inner
    /// multiplier set; equals the primal directional derivative of the
    /// localized value function under strong duality.
    pub value: ExtVal,
    /// Minimizing multiplier (absent when the LP is unbounded).
    pub witness: Option<MultiplierVector>,
    /// Indices of sign-constrained variables at zero in the witness,
    /// identifying the optimal face of the multiplier polyhedron.
    pub active_face: Vec<usize>,
}

/// Minimize the `u`-directional outer derivative over the inner
/// multiplier set. Errors with `LambdaMaxEmpty` when the set is empty.
pub fn lambda2_max(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    u: &[f64],
) -> Result<Lambda2Result, MultiplierError> {
    let layout = BetaLayout::new(spec, act);
    let (rows, rhs) = layout.stationarity_rows(p);
    let lp = LinearProgram {
        objective: layout.directional_costs(p, u),
        senses: vec![RowSense::Eq; rows.len()],
        rows,
        rhs,
        bounds: layout.bounds(),
    };
    let sol = solve_lp(&lp)?;
    let constant = dot(p.grad_x(&p.f), u);
    match sol.status {
        LpStatus::Infeasible => Err(MultiplierError::LambdaMaxEmpty),
        LpStatus::Unbounded => Ok(Lambda2Result {
            value: ExtVal::MinusInf,
            witness: None,
            active_face: Vec::new(),
        }),
        LpStatus::Optimal => {
            let active_face = sol
                .point
                .iter()
                .take(layout.active.len())
                .enumerate()
                .filter(|(_, v)| v.abs() <= 1e-9)
                .map(|(j, _)| j)
                .collect();
            Ok(Lambda2Result {
                value: ExtVal::Finite(constant + sol.value),
                witness: Some(layout.expand(&sol.point)),
                active_face,
            })
        }
    }
}

/// Enumerated representatives of the optimal face of the directional
/// multiplier LP: its vertices when the face is pointed and small, or a
/// witness sample flagged `sampled_only` otherwise.
#[derive(Clone, Debug)]
pub struct Lambda2Face {
    pub value: ExtVal,
    pub representatives: Vec<MultiplierVector>,
    pub sampled_only: bool,
}

const VERTEX_ENUM_CAP: usize = 1 << 12;

pub fn lambda2_face(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    u: &[f64],
) -> Result<Lambda2Face, MultiplierError> {
    let base = lambda2_max(spec, p, act, u)?;
    let ExtVal::Finite(total_value) = base.value else {
        return Ok(Lambda2Face {
            value: base.value,
            representatives: Vec::new(),
            sampled_only: true,
        });
    };
    let layout = BetaLayout::new(spec, act);
    let (mut rows, mut rhs) = layout.stationarity_rows(p);
    let costs = layout.directional_costs(p, u);
    rows.push(costs);
    rhs.push(total_value - dot(p.grad_x(&p.f), u));

    let num_vars = layout.num_vars();
    let num_free = layout.q2;
    let num_nonneg = layout.active.len();
    let e = Mat::from_rows(rows.clone());
    let rank = e.rank(1e-10);

    let witness = base.witness.clone().expect("finite LP has a witness");
    if num_free > rank || binomial_exceeds(num_nonneg, rank.saturating_sub(num_free)) {
        // face contains lines or is too large to enumerate: fall back to
        // the witness (plus nothing else) and flag it
        return Ok(Lambda2Face {
            value: base.value,
            representatives: vec![witness],
            sampled_only: true,
        });
    }

    let basic_nonneg = rank - num_free;
    let mut reps: Vec<Vec<f64>> = Vec::new();
    let mut combos = 0usize;
    let nonneg_indices: Vec<usize> = (0..num_nonneg).collect();
    for subset in subsets_of_size(&nonneg_indices, basic_nonneg) {
        combos += 1;
        if combos > VERTEX_ENUM_CAP {
            break;
        }
        // basis columns: chosen nonneg variables plus all free variables
        let mut cols: Vec<usize> = subset.clone();
        cols.extend(num_nonneg..num_vars);
        let mut sub = Mat::zeros(rows.len(), cols.len());
        for (ri, row) in rows.iter().enumerate() {
            for (ci, &c) in cols.iter().enumerate() {
                sub[(ri, ci)] = row[c];
            }
        }
        let Some(vals) = sub.solve_consistent(&rhs, 1e-10) else {
            continue;
        };
        // verify the basic solution actually solves the full system
        let residual: f64 = rows
            .iter()
            .zip(&rhs)
            .map(|(row, b)| {
                let lhs: f64 = cols.iter().zip(&vals).map(|(&c, v)| row[c] * v).sum();
                (lhs - b).abs()
            })
            .fold(0.0, f64::max);
        if residual > 1e-8 {
            continue;
        }
        if vals.iter().take(basic_nonneg).any(|v| *v < -1e-9) {
            continue;
        }
        let mut full = vec![0.0; num_vars];
        for (ci, &c) in cols.iter().enumerate() {
            full[c] = vals[ci];
        }
        if !reps
            .iter()
            .any(|r| r.iter().zip(&full).all(|(a, b)| (a - b).abs() <= 1e-9))
        {
            reps.push(full);
        }
    }
    let sampled_only = combos > VERTEX_ENUM_CAP;
    let mut representatives: Vec<MultiplierVector> =
        reps.iter().map(|v| layout.expand(v)).collect();
    if representatives.is_empty() {
        representatives.push(witness);
    }
    Ok(Lambda2Face {
        value: base.value,
        representatives,
        sampled_only,
    })
}

fn binomial_exceeds(n: usize, k: usize) -> bool {
    if k > n {
        return false;
    }
    let mut acc: u64 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul((n - i) as u64) / (i as u64 + 1);
        if acc > VERTEX_ENUM_CAP as u64 {
            return true;
        }
    }
    false
}

fn subsets_of_size(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size > items.len() {
        return out;
    }
    let mut indices: Vec<usize> = (0..size).collect();
    loop {
        out.push(indices.iter().map(|&i| items[i]).collect());
        // next combination in lexicographic order
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if indices[i] != i + items.len() - size {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        indices[i] += 1;
        for j in (i + 1)..size {
            indices[j] = indices[j - 1] + 1;
        }
        if out.len() > VERTEX_ENUM_CAP {
            return out;
        }
    }
}

// -------------------- KKT residual --------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// Euclidean norm of the stacked Lagrangian gradient.
    pub stationarity: f64,
    /// Most negative sign-constrained multiplier entry (0 when none).
    pub worst_sign: f64,
    /// Largest complementarity product magnitude.
    pub worst_complementarity: f64,
    pub pass: bool,
}

pub const TOL_STATIONARITY: f64 = 1e-7;
pub const TOL_SIGN: f64 = 1e-9;
pub const TOL_COMPLEMENTARITY: f64 = 1e-7;

/// Evaluate stationarity, sign and complementarity of a candidate
/// multiplier pair at the point.
pub fn kkt_residual(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    mult: &MultiplierVector,
) -> KktReport {
    let n = spec.n;
    let m = spec.m;
    let mut grad_l = vec![0.0; n + m];
    grad_l[..n + m].copy_from_slice(&p.f.grad);
    for (i, c) in p.phi_ineq.iter().enumerate() {
        for r in 0..n {
            grad_l[r] += mult.alpha_ineq[i] * c.grad[r];
        }
    }
    for (i, c) in p.phi_eq.iter().enumerate() {
        for r in 0..n {
            grad_l[r] += mult.alpha_eq[i] * c.grad[r];
        }
    }
    for (i, c) in p.varphi_ineq.iter().enumerate() {
        for r in 0..n + m {
            grad_l[r] -= mult.beta_ineq[i] * c.grad[r];
        }
    }
    for (i, c) in p.varphi_eq.iter().enumerate() {
        for r in 0..n + m {
            grad_l[r] -= mult.beta_eq[i] * c.grad[r];
        }
    }
    let stationarity = norm2(&grad_l);

    let worst_sign = mult
        .alpha_ineq
        .iter()
        .chain(&mult.beta_ineq)
        .fold(0.0f64, |acc, v| acc.min(*v));

    let mut worst_complementarity = 0.0f64;
    for (i, c) in p.phi_ineq.iter().enumerate() {
        worst_complementarity = worst_complementarity.max((mult.alpha_ineq[i] * c.val).abs());
    }
    for (i, c) in p.varphi_ineq.iter().enumerate() {
        worst_complementarity = worst_complementarity.max((mult.beta_ineq[i] * c.val).abs());
    }

    let pass = stationarity <= TOL_STATIONARITY
        && worst_sign >= -TOL_SIGN
        && worst_complementarity <= TOL_COMPLEMENTARITY;
    KktReport {
        stationarity,
        worst_sign,
        worst_complementarity,
        pass,
    }
}

// -------------------- Jacobian uniqueness diagnostic --------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianUniquenessReport {
    pub licq: bool,
    pub licq_rank: usize,
    pub licq_count: usize,
    pub kkt: bool,
    pub strict_complementarity: bool,
    pub sosc: bool,
    pub overall: bool,
    pub notes: Vec<String>,
}

/// Check the classical strong regularity package for the inner
/// maximization: LICQ, KKT, strict complementarity and the second-order
/// sufficient condition on the active-constraint nullspace.
pub fn jacobian_uniqueness_check(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
) -> Result<JacobianUniquenessReport, MultiplierError> {
    let m = spec.m;
    let mut notes = Vec::new();

    // LICQ: active inequality + equality y-gradients linearly independent
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for &i in &act.i_varphi {
        rows.push(p.grad_y(&p.varphi_ineq[i]).to_vec());
    }
    for c in &p.varphi_eq {
        rows.push(p.grad_y(c).to_vec());
    }
    let count = rows.len();
    let rank = if rows.is_empty() {
        0
    } else {
        Mat::from_rows(rows.clone()).rank(1e-10)
    };
    let licq = rank == count;
    if !licq {
        notes.push(format!(
            "active inner gradients have rank {rank} < count {count}"
        ));
    }

    let witness = lambda_max_find(spec, p, act)?;
    let kkt = witness.is_some();
    if !kkt {
        notes.push("no inner multiplier exists".into());
    }

    let strict_complementarity = match &witness {
        Some(w) => act.i_varphi.iter().all(|&i| w.beta_ineq[i] >= 1e-7),
        None => false,
    };
    if kkt && !strict_complementarity {
        notes.push("an active inequality has zero multiplier".into());
    }

    // SOSC: inner Lagrangian Hessian negative definite on the nullspace
    // of the active gradients
    let sosc = match &witness {
        Some(w) => {
            let h_yy = inner_hessian_yy(spec, p, w);
            let null = if rows.is_empty() {
                identity_rows(m)
            } else {
                Mat::from_rows(rows).nullspace(1e-10)
            };
            if null.is_empty() {
                true // nullspace {0}: vacuous
            } else {
                let z = Mat::from_rows(null).transpose();
                let reduced = z.transpose().matmul(&h_yy.matmul(&z));
                max_eig(&reduced) < -1e-9 * (1.0 + reduced.norm_inf())
            }
        }
        None => false,
    };
    if kkt && !sosc {
        notes.push("inner Hessian not negative definite on the active nullspace".into());
    }

    let overall = licq && kkt && strict_complementarity && sosc;
    Ok(JacobianUniquenessReport {
        licq,
        licq_rank: rank,
        licq_count: count,
        kkt,
        strict_complementarity,
        sosc,
        overall,
        notes,
    })
}

/// The `yy` block of the inner Lagrangian Hessian
/// `hess_yy f - sum_i beta_i hess_yy varphi_i`.
pub fn inner_hessian_yy(spec: &ProblemSpec, p: &CandidatePoint, mult: &MultiplierVector) -> Mat {
    let n = spec.n;
    let m = spec.m;
    let k = n + m;
    let mut h = Mat::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            let mut v = p.f.hess[(n + r) * k + (n + c)];
            for (i, cache) in p.varphi_ineq.iter().enumerate() {
                v -= mult.beta_ineq[i] * cache.hess[(n + r) * k + (n + c)];
            }
            for (i, cache) in p.varphi_eq.iter().enumerate() {
                v -= mult.beta_eq[i] * cache.hess[(n + r) * k + (n + c)];
            }
            h[(r, c)] = v;
        }
    }
    h
}

fn identity_rows(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::active_sets;
    use crate::problem::parse_problem;

    const P2: &str = "n = 1\nm = 1\nf = y1\nphi_ineq = -x1\nvarphi_ineq = y1 - x1\n";
    const P_SADDLE: &str = "n = 1\nm = 1\nf = x1*y1 - y1^2\n";

    fn setup(text: &str, x: &[f64], y: &[f64]) -> (ProblemSpec, CandidatePoint, ActiveSets) {
        let spec = parse_problem(text).unwrap().spec;
        let p = CandidatePoint::new(&spec, x, y).unwrap();
        let act = active_sets(&spec, &p, 1e-7).unwrap();
        (spec, p, act)
    }

    #[test]
    fn p2_inner_multiplier_is_one() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let w = lambda_max_find(&spec, &p, &act).unwrap().unwrap();
        assert!((w.beta_ineq[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unconstrained_inner_multiplier() {
        // stationary: empty beta is feasible
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[0.0]);
        let w = lambda_max_find(&spec, &p, &act).unwrap();
        assert!(w.is_some());
        // non-stationary: no multiplier can exist
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[1.0]);
        // grad_y f = x - 2y = -2 != 0 and no constraints
        let w = lambda_max_find(&spec, &p, &act).unwrap();
        assert!(w.is_none());
    }

    #[test]
    fn p2_full_multiplier_is_one_one() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let w = full_multiplier_find(&spec, &p, &act).unwrap().unwrap();
        assert!((w.alpha_ineq[0] - 1.0).abs() < 1e-9);
        assert!((w.beta_ineq[0] - 1.0).abs() < 1e-9);
        let report = kkt_residual(&spec, &p, &w);
        assert!(report.pass);
        assert!(report.stationarity <= 1e-12);
    }

    #[test]
    fn saddle_full_multiplier_empty_blocks() {
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[0.0]);
        let w = full_multiplier_find(&spec, &p, &act).unwrap().unwrap();
        assert!(w.alpha_ineq.is_empty() && w.beta_ineq.is_empty());
        assert!(kkt_residual(&spec, &p, &w).pass);
    }

    #[test]
    fn no_multiplier_when_gradient_nonzero() {
        let (spec, p, act) = setup(P_SADDLE, &[0.5], &[0.0]);
        // grad f = (y, x - 2y) = (0, 0.5) != 0, no constraints
        assert!(full_multiplier_find(&spec, &p, &act).unwrap().is_none());
    }

    #[test]
    fn p2_directional_value() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let r = lambda2_max(&spec, &p, &act, &[1.0]).unwrap();
        assert_eq!(r.value, ExtVal::Finite(1.0));
        let w = r.witness.unwrap();
        assert!((w.beta_ineq[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn directional_value_at_zero_direction() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let r = lambda2_max(&spec, &p, &act, &[0.0]).unwrap();
        assert_eq!(r.value, ExtVal::Finite(0.0));
    }

    #[test]
    fn saddle_directional_value_zero() {
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[0.0]);
        let r = lambda2_max(&spec, &p, &act, &[1.0]).unwrap();
        assert_eq!(r.value, ExtVal::Finite(0.0));
    }

    #[test]
    fn directional_value_positively_homogeneous() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let base = lambda2_max(&spec, &p, &act, &[1.0])
            .unwrap()
            .value
            .finite()
            .unwrap();
        for lambda in [0.5, 2.0, 7.5] {
            let v = lambda2_max(&spec, &p, &act, &[lambda])
                .unwrap()
                .value
                .finite()
                .unwrap();
            assert!((v - lambda * base).abs() < 1e-9);
        }
    }

    #[test]
    fn kkt_residual_rejects_wrong_multiplier() {
        let (spec, p, _) = setup(P2, &[0.0], &[0.0]);
        let bad = MultiplierVector {
            alpha_ineq: vec![0.0],
            alpha_eq: vec![],
            beta_ineq: vec![1.0],
            beta_eq: vec![],
        };
        let report = kkt_residual(&spec, &p, &bad);
        assert!(!report.pass);
        assert!((report.stationarity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lambda2_face_is_singleton_for_p2() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let face = lambda2_face(&spec, &p, &act, &[1.0]).unwrap();
        assert_eq!(face.representatives.len(), 1);
        assert!(!face.sampled_only);
        assert!((face.representatives[0].beta_ineq[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn jacobian_uniqueness_p2() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let r = jacobian_uniqueness_check(&spec, &p, &act).unwrap();
        assert!(r.licq && r.kkt && r.strict_complementarity && r.sosc && r.overall);
    }

    #[test]
    fn jacobian_uniqueness_saddle() {
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[0.0]);
        let r = jacobian_uniqueness_check(&spec, &p, &act).unwrap();
        assert!(r.overall);
    }

    #[test]
    fn jacobian_uniqueness_fails_on_duplicate_rows() {
        let text = "n = 1\nm = 1\nf = y1\nvarphi_ineq = y1 - x1\nvarphi_ineq = y1 - x1\n";
        let (spec, p, act) = setup(text, &[0.0], &[0.0]);
        let r = jacobian_uniqueness_check(&spec, &p, &act).unwrap();
        assert!(!r.licq);
        assert!(!r.overall);
    }
}
