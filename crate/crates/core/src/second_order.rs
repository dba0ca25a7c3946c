//! Second-order certificate: the inner necessary curvature check, the
//! strong directional sufficient condition, the closed-form inner
//! direction, and the quadratic-form tests over the critical section.
//!
//! For a critical direction `u` the pipeline enumerates the minimizing
//! multiplier face, extends each `beta` to a full pair `(alpha, beta)`,
//! and maximizes the Lagrangian quadratic form over the critical
//! section in `h`. The maximizer has a closed form through the KKT
//! system when the inner Hessian block is negative definite; the cone
//! QP handles every other case by face enumeration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::{
    active_sets, critical_cone_max, critical_set_c, default_eps_act, linearization_cone_x,
    sample_directions, ActiveSets, ConeError,
};
use crate::config::RunConfig;
use crate::ext::ExtVal;
use crate::first_order::{FirstOrderCertificate, FirstOrderVerdict};
use crate::multipliers::{
    lambda2_face, lambda2_max, lambda_max_find, MultiplierError, MultiplierVector,
};
use crate::numlin::conequad::{max_quad_over_cone, ConeQuadError};
use crate::numlin::dense::{dot, norm2, Mat};
use crate::numlin::eig::min_eig;
use crate::numlin::simplex::{solve_lp, LinearProgram, LpStatus, RowSense, VarBound};
use crate::problem::{CandidatePoint, ProblemSpec};
use crate::verdict::Verdict;

#[derive(Debug, Error)]
pub enum SecondOrderError {
    #[error("inner Lagrangian Hessian is not negative definite (min eig {0:.3e})")]
    NotNegativeDefinite(f64),
    #[error("critical section is empty for this direction")]
    EmptyCriticalSet,
    #[error(transparent)]
    Multiplier(#[from] MultiplierError),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    ConeQuad(#[from] ConeQuadError),
}

/// Full Lagrangian Hessian `hess f + sum alpha_i hess phi_i - sum
/// beta_i hess varphi_i` over the stacked `(x, y)` space.
pub fn lagrangian_hessian(spec: &ProblemSpec, p: &CandidatePoint, mult: &MultiplierVector) -> Mat {
    let k = spec.n + spec.m;
    let mut h = Mat::from_slice(k, k, &p.f.hess);
    for (i, c) in p.phi_ineq.iter().enumerate() {
        for r in 0..k {
            for s in 0..k {
                h[(r, s)] += mult.alpha_ineq[i] * c.hess[r * k + s];
            }
        }
    }
    for (i, c) in p.phi_eq.iter().enumerate() {
        for r in 0..k {
            for s in 0..k {
                h[(r, s)] += mult.alpha_eq[i] * c.hess[r * k + s];
            }
        }
    }
    for (i, c) in p.varphi_ineq.iter().enumerate() {
        for r in 0..k {
            for s in 0..k {
                h[(r, s)] -= mult.beta_ineq[i] * c.hess[r * k + s];
            }
        }
    }
    for (i, c) in p.varphi_eq.iter().enumerate() {
        for r in 0..k {
            for s in 0..k {
                h[(r, s)] -= mult.beta_eq[i] * c.hess[r * k + s];
            }
        }
    }
    h
}

/// Quadratic form of the full Hessian at the stacked direction `(u, h)`.
fn full_form(hess: &Mat, u: &[f64], h: &[f64]) -> f64 {
    let mut d = u.to_vec();
    d.extend_from_slice(h);
    dot(&d, &hess.matvec(&d))
}

// -------------------- inner curvature checks --------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerSoncReport {
    pub pass: bool,
    /// Worst (largest) minimized curvature over the sampled directions;
    /// `None` when no direction was sampled or every minimum was -inf.
    pub worst_value: Option<f64>,
    pub worst_h: Vec<f64>,
    pub sampled: usize,
}

/// Second-order necessary check for the inner maximization: for every
/// sampled critical direction `h` some inner multiplier must give
/// nonpositive curvature. The minimization over the multiplier set is
/// an LP because the form is linear in `beta`.
pub fn inner_sonc_check(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    cfg: &RunConfig,
) -> Result<InnerSoncReport, SecondOrderError> {
    let cone = critical_cone_max(spec, p, act);
    let dirs = sample_directions(&cone, cfg.budget, cfg.seed);
    let mut worst_value: Option<f64> = None;
    let mut worst_h = Vec::new();
    for h in &dirs.dirs {
        let min = min_inner_curvature_over_lambda_max(spec, p, act, h, None)?;
        let ExtVal::Finite(value) = min else {
            continue; // -inf minimum trivially satisfies the bound
        };
        if worst_value.map_or(true, |w| value > w) {
            worst_value = Some(value);
            worst_h = h.clone();
        }
    }
    let pass = worst_value.map_or(true, |w| w <= cfg.tol_stationarity);
    Ok(InnerSoncReport {
        pass,
        worst_value,
        worst_h,
        sampled: dirs.dirs.len(),
    })
}

/// Minimize `h' hess_yy L_max(beta) h` over the inner multiplier set,
/// optionally restricted to the optimal face of the directional LP for
/// `u` (the argmin face).
fn min_inner_curvature_over_lambda_max(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    h: &[f64],
    face_for_u: Option<&[f64]>,
) -> Result<ExtVal, SecondOrderError> {
    let n = spec.n;
    let m = spec.m;
    let k = n + m;
    // constant part: h' hess_yy f h
    let mut constant = 0.0;
    for r in 0..m {
        for c in 0..m {
            constant += h[r] * p.f.hess[(n + r) * k + (n + c)] * h[c];
        }
    }
    // variables follow the beta layout: active inequalities then equalities
    let active = &act.i_varphi;
    let num_vars = active.len() + spec.q2();
    let cache = |j: usize| -> &crate::problem::EvalCache {
        if j < active.len() {
            &p.varphi_ineq[active[j]]
        } else {
            &p.varphi_eq[j - active.len()]
        }
    };
    let mut objective = Vec::with_capacity(num_vars);
    for j in 0..num_vars {
        let hess = &cache(j).hess;
        let mut q = 0.0;
        for r in 0..m {
            for c in 0..m {
                q += h[r] * hess[(n + r) * k + (n + c)] * h[c];
            }
        }
        objective.push(-q);
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for r in 0..m {
        let mut row = Vec::with_capacity(num_vars);
        for j in 0..num_vars {
            row.push(p.grad_y(cache(j))[r]);
        }
        rows.push(row);
        rhs.push(p.grad_y(&p.f)[r]);
    }
    let mut senses = vec![RowSense::Eq; rows.len()];
    if let Some(u) = face_for_u {
        // restrict to the argmin face of the directional LP
        let r = lambda2_max(spec, p, act, u)?;
        let ExtVal::Finite(total) = r.value else {
            return Ok(ExtVal::MinusInf);
        };
        let costs: Vec<f64> = (0..num_vars)
            .map(|j| -dot(p.grad_x(cache(j)), u))
            .collect();
        rows.push(costs);
        senses.push(RowSense::Eq);
        rhs.push(total - dot(p.grad_x(&p.f), u));
    }
    let mut bounds = vec![VarBound::NonNeg; active.len()];
    bounds.extend(vec![VarBound::Free; spec.q2()]);
    let sol = solve_lp(&LinearProgram {
        objective,
        rows,
        senses,
        rhs,
        bounds,
    })
    .map_err(MultiplierError::from)?;
    Ok(match sol.status {
        LpStatus::Optimal => ExtVal::Finite(constant + sol.value),
        LpStatus::Unbounded => ExtVal::MinusInf,
        LpStatus::Infeasible => return Err(MultiplierError::LambdaMaxEmpty.into()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsoscReport {
    pub pass: bool,
    /// Worst (largest) infimum across sampled inner critical directions;
    /// `None` when vacuous or every infimum was -inf.
    pub worst_value: Option<f64>,
    pub sampled: usize,
    pub vacuous: bool,
}

/// Strong second-order sufficient condition in direction `u`: along
/// every sampled nonzero inner critical direction, the infimum of the
/// inner curvature over the argmin multiplier face must be strictly
/// negative.
pub fn ssosc_u_check(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    u: &[f64],
    cfg: &RunConfig,
) -> Result<SsoscReport, SecondOrderError> {
    let cone = critical_cone_max(spec, p, act);
    let dirs = sample_directions(&cone, cfg.budget, cfg.seed);
    if dirs.dirs.is_empty() {
        return Ok(SsoscReport {
            pass: true,
            worst_value: None,
            sampled: 0,
            vacuous: true,
        });
    }
    let mut worst: Option<f64> = None;
    for h in &dirs.dirs {
        let ExtVal::Finite(value) =
            min_inner_curvature_over_lambda_max(spec, p, act, h, Some(u))?
        else {
            continue; // -inf infimum is strictly negative
        };
        if worst.map_or(true, |w| value > w) {
            worst = Some(value);
        }
    }
    Ok(SsoscReport {
        pass: worst.map_or(true, |w| w <= -cfg.tol_stationarity),
        worst_value: worst,
        sampled: dirs.dirs.len(),
        vacuous: false,
    })
}

// -------------------- closed-form inner direction --------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HStarResult {
    pub h_star: Vec<f64>,
    pub attained_value: f64,
    /// Active rows of the critical section at the maximizer.
    pub active_face: Vec<usize>,
}

/// Maximize the Lagrangian quadratic form over the critical section in
/// `h` for fixed `u`. Requires a negative definite inner Hessian block;
/// on the unconstrained face the maximizer is the closed-form
/// `-(hess_yy L)^-1 hess_yx L u`.
pub fn hstar(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    mult: &MultiplierVector,
    u: &[f64],
) -> Result<HStarResult, SecondOrderError> {
    let hess = lagrangian_hessian(spec, p, mult);
    let n = spec.n;
    let m = spec.m;
    let h_yy = hess.block(n, n + m, n, n + m);
    let lam = min_eig(&h_yy);
    if lam >= -1e-9 {
        return Err(SecondOrderError::NotNegativeDefinite(lam));
    }
    let cone = critical_set_c(spec, p, act, u);
    let r = sup_form_over_section(&hess, n, m, u, &cone)?;
    match r {
        SupResult::Unbounded(_) => {
            // impossible with a negative definite inner block; treat as
            // numerical breakdown of the section
            Err(SecondOrderError::EmptyCriticalSet)
        }
        SupResult::Finite {
            value,
            arg,
            active_face,
        } => Ok(HStarResult {
            h_star: arg,
            attained_value: value,
            active_face,
        }),
    }
}

enum SupResult {
    Finite {
        value: f64,
        arg: Vec<f64>,
        active_face: Vec<usize>,
    },
    Unbounded(Vec<f64>),
}

/// Supremum of the full quadratic form `(u, h)' H (u, h)` over the
/// critical section in `h`.
fn sup_form_over_section(
    hess: &Mat,
    n: usize,
    m: usize,
    u: &[f64],
    cone: &crate::cones::PolyhedralCone,
) -> Result<SupResult, SecondOrderError> {
    // (u,h)'H(u,h) = u'H_xx u + 2 u'H_xy h + h'H_yy h
    // cast as 1/2 h'(2 H_yy)h + (2 H_yx u)'h + const
    let h_yy = hess.block(n, n + m, n, n + m);
    let h_yx = hess.block(n, n + m, 0, n);
    let h_xx = hess.block(0, n, 0, n);
    let mut qp_h = Mat::zeros(m, m);
    for r in 0..m {
        for c in 0..m {
            qp_h[(r, c)] = 2.0 * h_yy[(r, c)];
        }
    }
    let hyx_u = h_yx.matvec(u);
    let qp_g: Vec<f64> = hyx_u.iter().map(|v| 2.0 * v).collect();
    let constant = dot(u, &h_xx.matvec(u));
    match max_quad_over_cone(&qp_h, &qp_g, cone) {
        Ok(r) if r.unbounded => Ok(SupResult::Unbounded(r.arg)),
        Ok(r) => Ok(SupResult::Finite {
            value: constant + r.value,
            arg: r.arg,
            active_face: r.active_face,
        }),
        Err(ConeQuadError::EmptyFeasibleSet) => Err(SecondOrderError::EmptyCriticalSet),
        Err(e) => Err(e.into()),
    }
}

/// Schur-complement value of the form at the closed-form maximizer on
/// the interior face: `u'[H_xx - H_xy H_yy^-1 H_yx]u`.
pub fn reduced_hessian_value(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    mult: &MultiplierVector,
    u: &[f64],
) -> Result<f64, SecondOrderError> {
    reduced_hessian_value_with_correction(spec, p, mult, u, None)
}

/// The expanded representation including the aggregate active-face
/// correction `w` (the multiplier combination of active constraint
/// gradients appearing in the KKT system of the maximizer):
/// `u'[H_xx - H_xy H_yy^-1 H_yx]u - w'H_yy^-1 H_yx u
///  + (w' + u'H_xy) H_yy^-1 w`.
pub fn reduced_hessian_value_with_correction(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    mult: &MultiplierVector,
    u: &[f64],
    correction: Option<&[f64]>,
) -> Result<f64, SecondOrderError> {
    let hess = lagrangian_hessian(spec, p, mult);
    let n = spec.n;
    let m = spec.m;
    let h_yy = hess.block(n, n + m, n, n + m);
    let lam = min_eig(&h_yy);
    if lam >= -1e-9 {
        return Err(SecondOrderError::NotNegativeDefinite(lam));
    }
    let h_yx = hess.block(n, n + m, 0, n);
    let h_xx = hess.block(0, n, 0, n);
    let hyx_u = h_yx.matvec(u);
    let v = h_yy
        .solve(&hyx_u)
        .expect("negative definite block is invertible");
    let schur = dot(u, &h_xx.matvec(u)) - dot(&hyx_u, &v);
    let Some(w) = correction else {
        return Ok(schur);
    };
    let hyy_inv_w = h_yy.solve(w).expect("negative definite block is invertible");
    let t2 = -dot(w, &v);
    let t3 = dot(w, &hyy_inv_w) + dot(&hyx_u, &hyy_inv_w);
    Ok(schur + t2 + t3)
}

// -------------------- per-direction records and certificate --------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionRecord {
    pub u: Vec<f64>,
    pub dual_value: ExtVal,
    pub critical: bool,
    pub ssosc: Option<SsoscReport>,
    /// Best certified value of `sup_h min_beta` over candidate maximizers.
    pub lower: Option<f64>,
    /// `min_beta sup_h`, an upper bound on the certifiable value.
    pub upper: Option<ExtVal>,
    pub best_h: Vec<f64>,
    pub multipliers_enumerated: usize,
    pub sampled_only: bool,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderCertificate {
    pub lambda_max_nonempty: bool,
    pub inner_sonc: Option<InnerSoncReport>,
    pub directions: Vec<DirectionRecord>,
    pub critical_count: usize,
    pub overall: Verdict,
    /// True when the sufficient conditions certified a second-order
    /// growth separation on both sides.
    pub growth_claimed: bool,
    pub sampled_only: bool,
    pub notes: Vec<String>,
}

/// Extend a fixed `beta` to a full pair by solving the x-stationarity
/// system in `alpha` (canonical minimal witness).
pub fn extend_alpha(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    beta: &MultiplierVector,
) -> Result<Option<MultiplierVector>, MultiplierError> {
    let n = spec.n;
    let alpha_active = act.i_phi.clone();
    let num_alpha = alpha_active.len() + spec.p2();
    let cache = |j: usize| -> &crate::problem::EvalCache {
        if j < alpha_active.len() {
            &p.phi_ineq[alpha_active[j]]
        } else {
            &p.phi_eq[j - alpha_active.len()]
        }
    };
    let mut rows = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    for r in 0..n {
        let mut row = Vec::with_capacity(num_alpha);
        for j in 0..num_alpha {
            row.push(p.grad_x(cache(j))[r]);
        }
        rows.push(row);
        let mut b = -p.grad_x(&p.f)[r];
        for (i, c) in p.varphi_ineq.iter().enumerate() {
            b += beta.beta_ineq[i] * p.grad_x(c)[r];
        }
        for (i, c) in p.varphi_eq.iter().enumerate() {
            b += beta.beta_eq[i] * p.grad_x(c)[r];
        }
        rhs.push(b);
    }
    let mut bounds = vec![VarBound::NonNeg; alpha_active.len()];
    bounds.extend(vec![VarBound::Free; spec.p2()]);
    let mut objective = vec![1.0; alpha_active.len()];
    objective.extend(vec![0.0; spec.p2()]);
    let sol = solve_lp(&LinearProgram {
        objective,
        rows,
        senses: vec![RowSense::Eq; n],
        rhs,
        bounds,
    })?;
    Ok(match sol.status {
        LpStatus::Optimal => {
            let mut alpha_ineq = vec![0.0; spec.p1()];
            for (j, &idx) in alpha_active.iter().enumerate() {
                alpha_ineq[idx] = sol.point[j];
            }
            Some(MultiplierVector {
                alpha_ineq,
                alpha_eq: sol.point[alpha_active.len()..].to_vec(),
                beta_ineq: beta.beta_ineq.clone(),
                beta_eq: beta.beta_eq.clone(),
            })
        }
        _ => None,
    })
}

/// Assemble the second-order certificate. The first-order certificate
/// gates the verdict: without it the theorems' hypotheses fail and the
/// result is at most inconclusive.
pub fn second_order_certificate(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    first: &FirstOrderCertificate,
    cfg: &RunConfig,
) -> Result<SecondOrderCertificate, SecondOrderError> {
    let eps_act = cfg.eps_act.unwrap_or_else(|| default_eps_act(p));
    let mut notes = Vec::new();
    let act = match active_sets(spec, p, eps_act) {
        Ok(act) => act,
        Err(ConeError::InfeasiblePoint(msg)) => {
            return Ok(SecondOrderCertificate {
                lambda_max_nonempty: false,
                inner_sonc: None,
                directions: Vec::new(),
                critical_count: 0,
                overall: Verdict::Refuted,
                growth_claimed: false,
                sampled_only: false,
                notes: vec![format!("candidate point is infeasible: {msg}")],
            });
        }
        Err(e) => return Err(e.into()),
    };

    let lambda_max_nonempty = lambda_max_find(spec, p, &act)?.is_some();
    if !lambda_max_nonempty {
        return Ok(SecondOrderCertificate {
            lambda_max_nonempty,
            inner_sonc: None,
            directions: Vec::new(),
            critical_count: 0,
            overall: Verdict::Inconclusive,
            growth_claimed: false,
            sampled_only: false,
            notes: vec!["inner multiplier set is empty; second-order machinery unavailable".into()],
        });
    }

    let inner_sonc = inner_sonc_check(spec, p, &act, cfg)?;
    let mut sampled_only = false;

    let outer_cone = linearization_cone_x(spec, p, &act);
    let dirs = sample_directions(&outer_cone, cfg.budget, cfg.seed);
    sampled_only |= dirs.sampled_only;

    let mut directions = Vec::new();
    let mut critical_count = 0;
    for u in &dirs.dirs {
        let record = evaluate_direction(spec, p, &act, u, cfg)?;
        if record.critical {
            critical_count += 1;
        }
        sampled_only |= record.sampled_only;
        directions.push(record);
    }

    let gate_ok = first.overall == FirstOrderVerdict::Certified;
    if !gate_ok {
        notes.push("first-order certificate is not certified; verdict capped at inconclusive".into());
    }

    let mut overall = if !inner_sonc.pass {
        notes.push(format!(
            "inner second-order necessary condition fails: curvature {:?} along h = {:?}",
            inner_sonc.worst_value, inner_sonc.worst_h
        ));
        Verdict::Refuted
    } else {
        let crit: Vec<&DirectionRecord> = directions.iter().filter(|d| d.critical).collect();
        if crit.iter().any(|d| d.verdict == Verdict::Refuted) {
            Verdict::Refuted
        } else if crit.iter().any(|d| d.verdict == Verdict::Inconclusive) {
            Verdict::Inconclusive
        } else if crit.is_empty() {
            notes.push("no critical directions: sufficient conditions hold vacuously".into());
            Verdict::SufficientCertified
        } else if crit
            .iter()
            .all(|d| d.verdict == Verdict::SufficientCertified)
        {
            Verdict::SufficientCertified
        } else {
            Verdict::NecessaryConsistent
        }
    };
    if !gate_ok && overall > Verdict::Inconclusive {
        overall = Verdict::Inconclusive;
    }
    let growth_claimed = gate_ok && overall == Verdict::SufficientCertified;

    Ok(SecondOrderCertificate {
        lambda_max_nonempty,
        inner_sonc: Some(inner_sonc),
        directions,
        critical_count,
        overall,
        growth_claimed,
        sampled_only,
        notes,
    })
}

fn evaluate_direction(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    u: &[f64],
    cfg: &RunConfig,
) -> Result<DirectionRecord, SecondOrderError> {
    let mut notes = Vec::new();
    let dual = lambda2_max(spec, p, act, u)?;
    let critical = match dual.value {
        ExtVal::Finite(v) => v.abs() <= cfg.critical_threshold * norm2(u).max(1.0),
        _ => false,
    };
    if !critical {
        return Ok(DirectionRecord {
            u: u.to_vec(),
            dual_value: dual.value,
            critical,
            ssosc: None,
            lower: None,
            upper: None,
            best_h: Vec::new(),
            multipliers_enumerated: 0,
            sampled_only: false,
            verdict: Verdict::SufficientCertified, // not quantified over
            notes,
        });
    }

    let face = lambda2_face(spec, p, act, u)?;
    let mut pairs: Vec<MultiplierVector> = Vec::new();
    let mut extension_failed = false;
    for beta in &face.representatives {
        match extend_alpha(spec, p, act, beta)? {
            Some(pair) => pairs.push(pair),
            None => {
                extension_failed = true;
                notes.push("a minimizing multiplier admits no outer extension".into());
                break;
            }
        }
    }

    let ssosc = ssosc_u_check(spec, p, act, u, cfg)?;

    if extension_failed || pairs.is_empty() {
        return Ok(DirectionRecord {
            u: u.to_vec(),
            dual_value: dual.value,
            critical,
            ssosc: Some(ssosc),
            lower: None,
            upper: Some(ExtVal::MinusInf),
            best_h: Vec::new(),
            multipliers_enumerated: face.representatives.len(),
            sampled_only: face.sampled_only,
            verdict: Verdict::Refuted,
            notes,
        });
    }

    // candidate maximizers: the attaining h of each multiplier's cone QP
    let cone = critical_set_c(spec, p, act, u);
    let hessians: Vec<Mat> = pairs
        .iter()
        .map(|m| lagrangian_hessian(spec, p, m))
        .collect();
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let mut upper = ExtVal::PlusInf;
    for hess in &hessians {
        match sup_form_over_section(hess, spec.n, spec.m, u, &cone) {
            Ok(SupResult::Finite { value, arg, .. }) => {
                candidates.push(arg);
                upper = match upper {
                    ExtVal::PlusInf => ExtVal::Finite(value),
                    ExtVal::Finite(cur) => ExtVal::Finite(cur.min(value)),
                    ExtVal::MinusInf => ExtVal::MinusInf,
                };
            }
            Ok(SupResult::Unbounded(_)) => {
                // sup over h is +inf for this multiplier: it never caps
            }
            Err(SecondOrderError::EmptyCriticalSet) => {
                notes.push("critical section is empty".into());
                return Ok(DirectionRecord {
                    u: u.to_vec(),
                    dual_value: dual.value,
                    critical,
                    ssosc: Some(ssosc),
                    lower: None,
                    upper: None,
                    best_h: Vec::new(),
                    multipliers_enumerated: pairs.len(),
                    sampled_only: face.sampled_only,
                    verdict: Verdict::Inconclusive,
                    notes,
                });
            }
            Err(e) => return Err(e),
        }
    }
    if cone.contains(&vec![0.0; spec.m], 1e-9) {
        candidates.push(vec![0.0; spec.m]);
    }

    // lower bound: best common h across the enumerated multipliers
    let mut lower: Option<f64> = None;
    let mut best_h = vec![0.0; spec.m];
    for h in &candidates {
        if !cone.contains(h, 1e-8 * (1.0 + norm2(h))) {
            continue;
        }
        let min_over_pairs = hessians
            .iter()
            .map(|hess| full_form(hess, u, h))
            .fold(f64::INFINITY, f64::min);
        if lower.map_or(true, |l| min_over_pairs > l) {
            lower = Some(min_over_pairs);
            best_h = h.clone();
        }
    }
    if lower.is_none() {
        notes.push("no feasible candidate maximizer found".into());
    }

    let verdict = match upper {
        ExtVal::Finite(up) if up < -cfg.margin => Verdict::Refuted,
        _ => match lower {
            Some(l) if ssosc.pass && l > cfg.margin => Verdict::SufficientCertified,
            Some(l) if l >= -cfg.margin => Verdict::NecessaryConsistent,
            _ => Verdict::Inconclusive,
        },
    };

    Ok(DirectionRecord {
        u: u.to_vec(),
        dual_value: dual.value,
        critical,
        ssosc: Some(ssosc),
        lower,
        upper: Some(upper),
        best_h,
        multipliers_enumerated: pairs.len(),
        sampled_only: face.sampled_only,
        verdict,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::first_order::first_order_certificate;
    use crate::problem::parse_problem;

    const P2: &str = "n = 1\nm = 1\nf = y1\nphi_ineq = -x1\nvarphi_ineq = y1 - x1\n";
    const P_SADDLE: &str = "n = 1\nm = 1\nf = x1*y1 - y1^2\n";
    const P_SADDLE_FLIPPED: &str = "n = 1\nm = 1\nf = x1*y1 + y1^2\n";

    fn setup(text: &str, x: &[f64], y: &[f64]) -> (ProblemSpec, CandidatePoint, ActiveSets) {
        let spec = parse_problem(text).unwrap().spec;
        let p = CandidatePoint::new(&spec, x, y).unwrap();
        let act = active_sets(&spec, &p, 1e-7).unwrap();
        (spec, p, act)
    }

    fn empty_mult() -> MultiplierVector {
        MultiplierVector {
            alpha_ineq: vec![],
            alpha_eq: vec![],
            beta_ineq: vec![],
            beta_eq: vec![],
        }
    }

    #[test]
    fn saddle_lagrangian_hessian() {
        let (spec, p, _) = setup(P_SADDLE, &[0.0], &[0.0]);
        let h = lagrangian_hessian(&spec, &p, &empty_mult());
        assert_eq!(h[(0, 0)], 0.0);
        assert_eq!(h[(0, 1)], 1.0);
        assert_eq!(h[(1, 0)], 1.0);
        assert_eq!(h[(1, 1)], -2.0);
    }

    #[test]
    fn p2_lagrangian_hessian_vanishes() {
        let (spec, p, _) = setup(P2, &[0.0], &[0.0]);
        let m = MultiplierVector {
            alpha_ineq: vec![1.0],
            alpha_eq: vec![],
            beta_ineq: vec![1.0],
            beta_eq: vec![],
        };
        let h = lagrangian_hessian(&spec, &p, &m);
        assert_eq!(h.norm_inf(), 0.0);
    }

    #[test]
    fn saddle_inner_sonc_passes() {
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[0.0]);
        let r = inner_sonc_check(&spec, &p, &act, &RunConfig::default()).unwrap();
        assert!(r.pass);
        assert!((r.worst_value.unwrap() + 2.0).abs() < 1e-9);
    }

    #[test]
    fn p2_inner_sonc_vacuous() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let r = inner_sonc_check(&spec, &p, &act, &RunConfig::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.sampled, 0);
    }

    #[test]
    fn convex_inner_objective_fails_sonc() {
        let text = "n = 1\nm = 1\nf = y1^2 + x1\n";
        let (spec, p, act) = setup(text, &[0.0], &[0.0]);
        let r = inner_sonc_check(&spec, &p, &act, &RunConfig::default()).unwrap();
        assert!(!r.pass);
        assert!((r.worst_value.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn saddle_ssosc_passes() {
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[0.0]);
        let r = ssosc_u_check(&spec, &p, &act, &[1.0], &RunConfig::default()).unwrap();
        assert!(r.pass);
        assert!((r.worst_value.unwrap() + 2.0).abs() < 1e-9);
    }

    #[test]
    fn p2_ssosc_vacuous() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let r = ssosc_u_check(&spec, &p, &act, &[1.0], &RunConfig::default()).unwrap();
        assert!(r.pass && r.vacuous);
    }

    #[test]
    fn bilinear_inner_block_fails_ssosc() {
        let text = "n = 1\nm = 1\nf = x1*y1\n";
        let (spec, p, act) = setup(text, &[0.0], &[0.0]);
        let r = ssosc_u_check(&spec, &p, &act, &[1.0], &RunConfig::default()).unwrap();
        assert!(!r.pass);
        assert!(r.worst_value.unwrap().abs() < 1e-9);
    }

    #[test]
    fn saddle_hstar_closed_form() {
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[0.0]);
        let r = hstar(&spec, &p, &act, &empty_mult(), &[1.0]).unwrap();
        assert!((r.h_star[0] - 0.5).abs() < 1e-9);
        assert!((r.attained_value - 0.5).abs() < 1e-9);
        assert!(r.active_face.is_empty());
    }

    #[test]
    fn hstar_at_zero_direction() {
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[0.0]);
        let r = hstar(&spec, &p, &act, &empty_mult(), &[0.0]).unwrap();
        assert!(r.h_star[0].abs() < 1e-9);
        assert!(r.attained_value.abs() < 1e-12);
    }

    #[test]
    fn p2_hstar_rejected_without_curvature() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let m = MultiplierVector {
            alpha_ineq: vec![1.0],
            alpha_eq: vec![],
            beta_ineq: vec![1.0],
            beta_eq: vec![],
        };
        assert!(matches!(
            hstar(&spec, &p, &act, &m, &[1.0]),
            Err(SecondOrderError::NotNegativeDefinite(_))
        ));
    }

    #[test]
    fn saddle_reduced_hessian_matches_hstar() {
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[0.0]);
        let h = hstar(&spec, &p, &act, &empty_mult(), &[1.0]).unwrap();
        let v = reduced_hessian_value(&spec, &p, &empty_mult(), &[1.0]).unwrap();
        assert!((h.attained_value - v).abs() < 1e-10);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reduced_hessian_zero_cross_term() {
        // f = -y^2 + x^2: H_xy = 0, value = u' H_xx u = 2
        let text = "n = 1\nm = 1\nf = x1^2 - y1^2\n";
        let (spec, p, _) = setup(text, &[0.0], &[0.0]);
        let v = reduced_hessian_value(&spec, &p, &empty_mult(), &[1.0]).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn saddle_certificate_sufficient() {
        let (spec, p, _) = setup(P_SADDLE, &[0.0], &[0.0]);
        let cfg = RunConfig::default();
        let first = first_order_certificate(&spec, &p, &cfg).unwrap();
        let cert = second_order_certificate(&spec, &p, &first, &cfg).unwrap();
        assert_eq!(cert.overall, Verdict::SufficientCertified);
        assert!(cert.growth_claimed);
        assert_eq!(cert.critical_count, 2); // u = +1 and u = -1
        for d in cert.directions.iter().filter(|d| d.critical) {
            let lower = d.lower.unwrap();
            assert!((lower - 0.5).abs() < 1e-8, "lower = {lower}");
            assert!((d.best_h[0].abs() - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn p2_certificate_sufficient_vacuously() {
        let (spec, p, _) = setup(P2, &[0.0], &[0.0]);
        let cfg = RunConfig::default();
        let first = first_order_certificate(&spec, &p, &cfg).unwrap();
        let cert = second_order_certificate(&spec, &p, &first, &cfg).unwrap();
        assert_eq!(cert.overall, Verdict::SufficientCertified);
        assert_eq!(cert.critical_count, 0);
        assert!(cert.notes.iter().any(|n| n.contains("no critical directions")));
    }

    #[test]
    fn flipped_saddle_refuted_at_inner_stage() {
        let (spec, p, _) = setup(P_SADDLE_FLIPPED, &[0.0], &[0.0]);
        let cfg = RunConfig::default();
        let first = first_order_certificate(&spec, &p, &cfg).unwrap();
        let cert = second_order_certificate(&spec, &p, &first, &cfg).unwrap();
        assert_eq!(cert.overall, Verdict::Refuted);
        assert!(!cert.inner_sonc.as_ref().unwrap().pass);
    }

    #[test]
    fn hstar_scaling_in_u() {
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[0.0]);
        let base = hstar(&spec, &p, &act, &empty_mult(), &[1.0]).unwrap();
        for lambda in [0.5, 2.0, 4.0] {
            let r = hstar(&spec, &p, &act, &empty_mult(), &[lambda]).unwrap();
            assert!((r.h_star[0] - lambda * base.h_star[0]).abs() < 1e-9);
            assert!(
                (r.attained_value - lambda * lambda * base.attained_value).abs()
                    < 1e-8 * lambda * lambda
            );
        }
    }
}
