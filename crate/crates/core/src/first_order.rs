//! First-order certificate: constraint qualifications, the strong
//! duality identity per direction, the primal inner/outer directional
//! tests and dual multiplier existence.
//!
//! Verdict semantics: the first-order conditions are necessary only
//! under the constraint qualifications, so a failed test refutes the
//! point only when the CQ gate holds; without the gate the certificate
//! is inconclusive and names the missing hypothesis.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::eval_jet;
use crate::cones::{
    active_sets, default_eps_act, linearization_cone_x, linearization_cone_y, sample_directions,
    ActiveSets,
};
use crate::config::RunConfig;
use crate::ext::ExtVal;
use crate::multipliers::{
    full_multiplier_find, kkt_residual, lambda2_max, KktReport, MultiplierError, MultiplierVector,
};
use crate::numlin::dense::{dot, Mat};
use crate::numlin::simplex::{solve_lp, LinearProgram, LpStatus, RowSense, VarBound};
use crate::problem::{CandidatePoint, ProblemSpec};

pub const MFCQ_MARGIN: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MfcqReport {
    pub pass: bool,
    pub rank_ok: bool,
    /// Interior direction for the active inequalities (zero when vacuous).
    pub witness: Vec<f64>,
    /// Achieved margin `s` in `grad varphi_i . w <= -s`; `None` when the
    /// check is vacuous.
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcrcqReport {
    pub pass: bool,
    pub samples: usize,
    /// Sample point where a rank changed, with the offending subset.
    pub witness: Option<(Vec<f64>, Vec<usize>)>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CqReport {
    pub mfcq: MfcqReport,
    pub licq: bool,
    pub licq_rank: usize,
    pub rcrcq: RcrcqReport,
    /// Coupled constraints detected affine in `y` with constant y-gradient.
    pub linear_cq: bool,
    /// Outer system qualification: affine outer constraints or outer MFCQ.
    pub outer_cq: bool,
    pub inner_cq: bool,
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstOrderVerdict {
    Certified,
    Refuted,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalDual {
    pub u: Vec<f64>,
    pub primal: ExtVal,
    pub dual: ExtVal,
    pub gap: f64,
    /// Primal and dual disagree structurally (one-sided infinity).
    pub structural: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderCertificate {
    /// Max of the inner objective gradient over the box-truncated
    /// inner linearization cone; stationarity requires <= tolerance.
    pub inner_value: ExtVal,
    pub inner_pass: bool,
    pub directions: Vec<DirectionalDual>,
    pub outer_pass: bool,
    pub witness: Option<MultiplierVector>,
    pub witness_kkt: Option<KktReport>,
    pub cq: CqReport,
    pub overall: FirstOrderVerdict,
    pub sampled_only: bool,
    pub notes: Vec<String>,
}

/// MFCQ for the coupled system at the candidate point: equality
/// y-gradients of full rank plus an interior direction for the active
/// inequalities, found by maximizing the margin over the unit box.
pub fn mfcq_check(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
) -> Result<MfcqReport, MultiplierError> {
    let m = spec.m;
    let eq_rows: Vec<Vec<f64>> = p.varphi_eq.iter().map(|c| p.grad_y(c).to_vec()).collect();
    let rank_ok = if eq_rows.is_empty() {
        true
    } else {
        Mat::from_rows(eq_rows.clone()).rank(1e-10) == spec.q2()
    };
    if act.i_varphi.is_empty() && eq_rows.is_empty() {
        return Ok(MfcqReport {
            pass: true,
            rank_ok: true,
            witness: vec![0.0; m],
            margin: None,
        });
    }
    // variables: w (free, m) and the margin s (nonneg); maximize s
    let mut rows = Vec::new();
    let mut senses = Vec::new();
    let mut rhs = Vec::new();
    for row in &eq_rows {
        let mut r = row.clone();
        r.push(0.0);
        rows.push(r);
        senses.push(RowSense::Eq);
        rhs.push(0.0);
    }
    for &i in &act.i_varphi {
        let mut r = p.grad_y(&p.varphi_ineq[i]).to_vec();
        r.push(1.0); // grad . w + s <= 0
        rows.push(r);
        senses.push(RowSense::Le);
        rhs.push(0.0);
    }
    for j in 0..m {
        let mut r = vec![0.0; m + 1];
        r[j] = 1.0;
        rows.push(r.clone());
        senses.push(RowSense::Le);
        rhs.push(1.0);
        r[j] = -1.0;
        rows.push(r);
        senses.push(RowSense::Le);
        rhs.push(1.0);
    }
    // cap s so the LP stays bounded when no inequality is active
    let mut cap = vec![0.0; m + 1];
    cap[m] = 1.0;
    rows.push(cap);
    senses.push(RowSense::Le);
    rhs.push(2.0);

    let mut objective = vec![0.0; m + 1];
    objective[m] = -1.0;
    let mut bounds = vec![VarBound::Free; m];
    bounds.push(VarBound::NonNeg);
    let sol = solve_lp(&LinearProgram {
        objective,
        rows,
        senses,
        rhs,
        bounds,
    })?;
    let (witness, margin) = match sol.status {
        LpStatus::Optimal => (sol.point[..m].to_vec(), sol.point[m]),
        _ => (vec![0.0; m], 0.0),
    };
    Ok(MfcqReport {
        pass: rank_ok && margin > MFCQ_MARGIN,
        rank_ok,
        witness,
        margin: Some(margin),
    })
}

/// Sampled relaxed-constant-rank check: for every subset of the active
/// inequalities, the rank of the chosen y-gradients must match the base
/// rank at nearby sample points.
pub fn rcrcq_check(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    n_samples: usize,
    radius: f64,
    seed: u64,
) -> RcrcqReport {
    if act.i_varphi.len() > 10 {
        return RcrcqReport {
            pass: false,
            samples: 0,
            witness: None,
            note: Some(format!(
                "{} active inequalities exceed the subset budget",
                act.i_varphi.len()
            )),
        };
    }
    if act.i_varphi.is_empty() && spec.q2() == 0 {
        return RcrcqReport {
            pass: true,
            samples: 0,
            witness: None,
            note: Some("no coupled constraints: vacuous".into()),
        };
    }

    let grad_rows_at = |x: &[f64], y: &[f64], subset: &[usize]| -> Option<Vec<Vec<f64>>> {
        let mut rows = Vec::new();
        for c in &spec.varphi_eq {
            let jet = eval_jet(c, x, y).ok()?;
            rows.push(jet.grad[spec.n..].to_vec());
        }
        for &i in subset {
            let jet = eval_jet(&spec.varphi_ineq[i], x, y).ok()?;
            rows.push(jet.grad[spec.n..].to_vec());
        }
        Some(rows)
    };

    let subsets = power_set(&act.i_varphi);
    let mut base_ranks = Vec::with_capacity(subsets.len());
    for subset in &subsets {
        let rows = grad_rows_at(&p.x, &p.y, subset).expect("base point evaluable");
        let rank = if rows.is_empty() {
            0
        } else {
            Mat::from_rows(rows).rank(1e-10)
        };
        base_ranks.push(rank);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5243_5243);
    let dim = spec.n + spec.m;
    let mut checked = 0;
    for _ in 0..n_samples {
        let dir: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let norm = dot(&dir, &dir).sqrt();
        if norm < 1e-9 {
            continue;
        }
        let x: Vec<f64> = (0..spec.n)
            .map(|i| p.x[i] + radius * dir[i] / norm)
            .collect();
        let y: Vec<f64> = (0..spec.m)
            .map(|j| p.y[j] + radius * dir[spec.n + j] / norm)
            .collect();
        checked += 1;
        for (subset, &base_rank) in subsets.iter().zip(&base_ranks) {
            let Some(rows) = grad_rows_at(&x, &y, subset) else {
                continue;
            };
            let rank = if rows.is_empty() {
                0
            } else {
                Mat::from_rows(rows).rank(1e-10)
            };
            if rank != base_rank {
                let mut point = x.clone();
                point.extend_from_slice(&y);
                return RcrcqReport {
                    pass: false,
                    samples: checked,
                    witness: Some((point, subset.clone())),
                    note: None,
                };
            }
        }
    }
    RcrcqReport {
        pass: true,
        samples: checked,
        witness: None,
        note: Some("pass (sampled)".into()),
    }
}

fn power_set(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(1 << items.len());
    for mask in 0u32..(1u32 << items.len()) {
        out.push(
            items
                .iter()
                .enumerate()
                .filter(|(j, _)| mask & (1 << j) != 0)
                .map(|(_, &i)| i)
                .collect(),
        );
    }
    out
}

/// Sampled detection of constant gradients: evaluates the gradient at
/// seeded points near the candidate and checks it never moves.
fn gradients_constant(exprs: &[crate::expr::Expr], p: &CandidatePoint, seed: u64) -> bool {
    if exprs.is_empty() {
        return true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xAFF1_AFF1);
    let n = p.n();
    let m = p.m();
    let mut points = vec![(p.x.clone(), p.y.clone())];
    for _ in 0..4 {
        let x: Vec<f64> = (0..n)
            .map(|i| p.x[i] + rng.random::<f64>() - 0.5)
            .collect();
        let y: Vec<f64> = (0..m)
            .map(|j| p.y[j] + rng.random::<f64>() - 0.5)
            .collect();
        points.push((x, y));
    }
    for e in exprs {
        let mut first: Option<Vec<f64>> = None;
        for (x, y) in &points {
            let Ok(jet) = eval_jet(e, x, y) else {
                return false;
            };
            match &first {
                None => first = Some(jet.grad),
                Some(g) => {
                    if g.iter().zip(&jet.grad).any(|(a, b)| (a - b).abs() > 1e-9) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Primal/dual pair of the directional derivative of the localized value
/// function: primal maximizes `grad f . (u, h)` over the linearization
/// section, dual minimizes over the inner multiplier set.
pub fn duality_gap(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    u: &[f64],
) -> Result<DirectionalDual, MultiplierError> {
    let cone = linearization_cone_y(spec, p, act, u);
    let grad_fy = p.grad_y(&p.f);
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
    let sol = solve_lp(&LinearProgram {
        objective: grad_fy.iter().map(|v| -v).collect(),
        rows,
        senses,
        rhs,
        bounds: vec![VarBound::Free; spec.m],
    })?;
    let constant = dot(p.grad_x(&p.f), u);
    let primal = match sol.status {
        LpStatus::Optimal => ExtVal::Finite(constant - sol.value),
        LpStatus::Unbounded => ExtVal::PlusInf,
        LpStatus::Infeasible => ExtVal::MinusInf,
    };
    let dual = match lambda2_max(spec, p, act, u) {
        Ok(r) => r.value,
        Err(MultiplierError::LambdaMaxEmpty) => ExtVal::PlusInf,
        Err(e) => return Err(e),
    };
    let gap = primal.gap(dual);
    Ok(DirectionalDual {
        u: u.to_vec(),
        primal,
        dual,
        structural: !gap.is_finite(),
        gap,
    })
}

/// Assemble the first-order certificate.
pub fn first_order_certificate(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    cfg: &RunConfig,
) -> Result<FirstOrderCertificate, MultiplierError> {
    let eps_act = cfg.eps_act.unwrap_or_else(|| default_eps_act(p));
    let mut notes = Vec::new();

    let act = match active_sets(spec, p, eps_act) {
        Ok(act) => act,
        Err(crate::cones::ConeError::InfeasiblePoint(msg)) => {
            return Ok(FirstOrderCertificate {
                inner_value: ExtVal::Finite(0.0),
                inner_pass: false,
                directions: Vec::new(),
                outer_pass: false,
                witness: None,
                witness_kkt: None,
                cq: empty_cq(spec.m),
                overall: FirstOrderVerdict::Refuted,
                sampled_only: false,
                notes: vec![format!("candidate point is infeasible: {msg}")],
            });
        }
        Err(e) => return Err(e.into()),
    };

    // (a) inner stationarity: max grad_y f . h over the u = 0 section,
    // truncated to the unit box so the value is finite
    let inner_cone = linearization_cone_y(spec, p, &act, &vec![0.0; spec.n]);
    let inner_value = {
        let mut rows = Vec::new();
        let mut senses = Vec::new();
        let mut rhs = Vec::new();
        for (row, b) in inner_cone.a_ineq.iter().zip(&inner_cone.b_ineq) {
            rows.push(row.clone());
            senses.push(RowSense::Le);
            rhs.push(*b);
        }
        for (row, b) in inner_cone.a_eq.iter().zip(&inner_cone.b_eq) {
            rows.push(row.clone());
            senses.push(RowSense::Eq);
            rhs.push(*b);
        }
        for j in 0..spec.m {
            let mut r = vec![0.0; spec.m];
            r[j] = 1.0;
            rows.push(r.clone());
            senses.push(RowSense::Le);
            rhs.push(1.0);
            r[j] = -1.0;
            rows.push(r);
            senses.push(RowSense::Le);
            rhs.push(1.0);
        }
        let sol = solve_lp(&LinearProgram {
            objective: p.grad_y(&p.f).iter().map(|v| -v).collect(),
            rows,
            senses,
            rhs,
            bounds: vec![VarBound::Free; spec.m],
        })?;
        match sol.status {
            LpStatus::Optimal => ExtVal::Finite(-sol.value),
            _ => ExtVal::PlusInf,
        }
    };
    let inner_pass = match inner_value {
        ExtVal::Finite(v) => v <= cfg.tol_stationarity,
        _ => false,
    };

    // (b) outer directional duals over the sampled outer cone
    let outer_cone = linearization_cone_x(spec, p, &act);
    let dirs = sample_directions(&outer_cone, cfg.budget, cfg.seed);
    let mut directions = Vec::with_capacity(dirs.dirs.len());
    let mut outer_pass = true;
    for u in &dirs.dirs {
        let d = duality_gap(spec, p, &act, u)?;
        let ok = match d.dual {
            ExtVal::Finite(v) => v >= -cfg.tol_duality,
            ExtVal::PlusInf => true,
            ExtVal::MinusInf => false,
        };
        if !ok {
            outer_pass = false;
        }
        directions.push(d);
    }

    // (c) dual existence
    let witness = full_multiplier_find(spec, p, &act)?;
    let witness_kkt = witness.as_ref().map(|w| kkt_residual(spec, p, w));
    let dual_pass = witness_kkt.as_ref().map(|r| r.pass).unwrap_or(false);
    if witness.is_some() && !dual_pass {
        notes.push("multiplier witness failed the KKT residual check".into());
    }

    // (d) constraint qualification gates
    let mfcq = mfcq_check(spec, p, &act)?;
    let licq_rows: Vec<Vec<f64>> = act
        .i_varphi
        .iter()
        .map(|&i| p.grad_y(&p.varphi_ineq[i]).to_vec())
        .chain(p.varphi_eq.iter().map(|c| p.grad_y(c).to_vec()))
        .collect();
    let licq_count = licq_rows.len();
    let licq_rank = if licq_rows.is_empty() {
        0
    } else {
        Mat::from_rows(licq_rows).rank(1e-10)
    };
    let licq = licq_rank == licq_count;
    let rcrcq = rcrcq_check(spec, p, &act, cfg.rcrcq_samples, cfg.rcrcq_radius, cfg.seed);
    let all_varphi: Vec<crate::expr::Expr> = spec.varphi_all().cloned().collect();
    let linear_cq = gradients_constant(&all_varphi, p, cfg.seed);

    let outer_affine = {
        let outer: Vec<crate::expr::Expr> = spec
            .phi_ineq
            .iter()
            .chain(&spec.phi_eq)
            .cloned()
            .collect();
        gradients_constant(&outer, p, cfg.seed)
    };
    let outer_mfcq = outer_mfcq_check(spec, p, &act)?;
    let outer_cq = outer_affine || outer_mfcq;
    let inner_cq = mfcq.pass || rcrcq.pass || linear_cq;
    if !inner_cq {
        notes.push("no inner constraint qualification established (MFCQ/RCRCQ/affine)".into());
    }
    if !outer_cq {
        notes.push("no outer constraint qualification established (affine/MFCQ)".into());
    }
    let cq = CqReport {
        mfcq,
        licq,
        licq_rank,
        rcrcq,
        linear_cq,
        outer_cq,
        inner_cq,
        notes: Vec::new(),
    };

    let tests_pass = inner_pass && outer_pass && dual_pass;
    let overall = if inner_cq && outer_cq {
        if tests_pass {
            FirstOrderVerdict::Certified
        } else {
            FirstOrderVerdict::Refuted
        }
    } else {
        notes.push(
            "first-order conditions are only necessary under the constraint qualifications"
                .into(),
        );
        FirstOrderVerdict::Inconclusive
    };
    if overall == FirstOrderVerdict::Refuted {
        if !inner_pass {
            notes.push(format!(
                "inner stationarity fails: improving inner value {inner_value}"
            ));
        }
        if !outer_pass {
            for d in &directions {
                let bad = match d.dual {
                    ExtVal::Finite(v) => v < -cfg.tol_duality,
                    ExtVal::MinusInf => true,
                    ExtVal::PlusInf => false,
                };
                if bad {
                    notes.push(format!(
                        "outer directional derivative negative along u = {:?}: {}",
                        d.u, d.dual
                    ));
                    break;
                }
            }
        }
        if !dual_pass {
            notes.push("no multiplier pair satisfies the stationarity system".into());
        }
    }

    Ok(FirstOrderCertificate {
        inner_value,
        inner_pass,
        directions,
        outer_pass,
        witness,
        witness_kkt,
        cq,
        overall,
        sampled_only: dirs.sampled_only,
        notes,
    })
}

/// MFCQ analogue for the outer system in `x` at the candidate point.
fn outer_mfcq_check(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
) -> Result<bool, MultiplierError> {
    let n = spec.n;
    let eq_rows: Vec<Vec<f64>> = p.phi_eq.iter().map(|c| p.grad_x(c).to_vec()).collect();
    let rank_ok = if eq_rows.is_empty() {
        true
    } else {
        Mat::from_rows(eq_rows.clone()).rank(1e-10) == spec.p2()
    };
    if !rank_ok {
        return Ok(false);
    }
    if act.i_phi.is_empty() && eq_rows.is_empty() {
        return Ok(true);
    }
    let mut rows = Vec::new();
    let mut senses = Vec::new();
    let mut rhs = Vec::new();
    for row in &eq_rows {
        let mut r = row.clone();
        r.push(0.0);
        rows.push(r);
        senses.push(RowSense::Eq);
        rhs.push(0.0);
    }
    for &i in &act.i_phi {
        let mut r = p.grad_x(&p.phi_ineq[i]).to_vec();
        r.push(1.0);
        rows.push(r);
        senses.push(RowSense::Le);
        rhs.push(0.0);
    }
    for j in 0..n {
        let mut r = vec![0.0; n + 1];
        r[j] = 1.0;
        rows.push(r.clone());
        senses.push(RowSense::Le);
        rhs.push(1.0);
        r[j] = -1.0;
        rows.push(r);
        senses.push(RowSense::Le);
        rhs.push(1.0);
    }
    let mut cap = vec![0.0; n + 1];
    cap[n] = 1.0;
    rows.push(cap);
    senses.push(RowSense::Le);
    rhs.push(2.0);
    let mut objective = vec![0.0; n + 1];
    objective[n] = -1.0;
    let mut bounds = vec![VarBound::Free; n];
    bounds.push(VarBound::NonNeg);
    let sol = solve_lp(&LinearProgram {
        objective,
        rows,
        senses,
        rhs,
        bounds,
    })?;
    Ok(match sol.status {
        LpStatus::Optimal => sol.point[n] > MFCQ_MARGIN,
        _ => false,
    })
}

fn empty_cq(m: usize) -> CqReport {
    CqReport {
        mfcq: MfcqReport {
            pass: false,
            rank_ok: false,
            witness: vec![0.0; m],
            margin: None,
        },
        licq: false,
        licq_rank: 0,
        rcrcq: RcrcqReport {
            pass: false,
            samples: 0,
            witness: None,
            note: None,
        },
        linear_cq: false,
        outer_cq: false,
        inner_cq: false,
        notes: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn p2_mfcq_witness_is_minus_one() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let r = mfcq_check(&spec, &p, &act).unwrap();
        assert!(r.pass);
        assert!((r.witness[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn mfcq_vacuous_without_coupled_constraints() {
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[0.0]);
        let r = mfcq_check(&spec, &p, &act).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn mfcq_rank_fails_on_duplicate_equalities() {
        let text = "n = 1\nm = 2\nf = y1\nvarphi_eq = y1 + y2\nvarphi_eq = y1 + y2\n";
        let (spec, p, act) = setup(text, &[0.0], &[0.0, 0.0]);
        let r = mfcq_check(&spec, &p, &act).unwrap();
        assert!(!r.rank_ok);
        assert!(!r.pass);
    }

    #[test]
    fn rcrcq_constant_gradients_pass() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let r = rcrcq_check(&spec, &p, &act, 8, 1e-3, 0);
        assert!(r.pass);
    }

    #[test]
    fn rcrcq_detects_rank_drop() {
        // grad_y (y^2 - x) = 2y: rank 0 at the origin, rank 1 nearby
        let text = "n = 1\nm = 1\nf = y1\nvarphi_ineq = y1^2 - x1\n";
        let (spec, p, act) = setup(text, &[0.0], &[0.0]);
        let r = rcrcq_check(&spec, &p, &act, 8, 1e-3, 0);
        assert!(!r.pass);
        assert!(r.witness.is_some());
    }

    #[test]
    fn p2_duality_gap_closed() {
        let (spec, p, act) = setup(P2, &[0.0], &[0.0]);
        let d = duality_gap(&spec, &p, &act, &[1.0]).unwrap();
        assert_eq!(d.primal, ExtVal::Finite(1.0));
        assert_eq!(d.dual, ExtVal::Finite(1.0));
        assert!(d.gap <= 1e-9);
        let d0 = duality_gap(&spec, &p, &act, &[0.0]).unwrap();
        assert_eq!(d0.primal, ExtVal::Finite(0.0));
        assert_eq!(d0.dual, ExtVal::Finite(0.0));
    }

    #[test]
    fn saddle_duality_gap_zero() {
        let (spec, p, act) = setup(P_SADDLE, &[0.0], &[0.0]);
        let d = duality_gap(&spec, &p, &act, &[1.0]).unwrap();
        assert_eq!(d.primal, ExtVal::Finite(0.0));
        assert_eq!(d.dual, ExtVal::Finite(0.0));
    }

    #[test]
    fn p2_certificate_certified() {
        let (spec, p, _) = setup(P2, &[0.0], &[0.0]);
        let cert = first_order_certificate(&spec, &p, &RunConfig::default()).unwrap();
        assert_eq!(cert.overall, FirstOrderVerdict::Certified);
        let w = cert.witness.unwrap();
        assert!((w.alpha_ineq[0] - 1.0).abs() < 1e-9);
        assert!((w.beta_ineq[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn saddle_certificate_certified_with_empty_multipliers() {
        let (spec, p, _) = setup(P_SADDLE, &[0.0], &[0.0]);
        let cert = first_order_certificate(&spec, &p, &RunConfig::default()).unwrap();
        assert_eq!(cert.overall, FirstOrderVerdict::Certified);
        let w = cert.witness.unwrap();
        assert!(w.alpha_ineq.is_empty() && w.beta_ineq.is_empty());
    }

    #[test]
    fn p2_feasible_noncritical_point_refuted() {
        // (1, 1): coupled constraint active, outer inactive; x-stationarity
        // cannot hold with alpha forced to zero
        let (spec, p, _) = setup(P2, &[1.0], &[1.0]);
        let cert = first_order_certificate(&spec, &p, &RunConfig::default()).unwrap();
        assert_eq!(cert.overall, FirstOrderVerdict::Refuted);
        assert!(cert.witness.is_none());
    }

    #[test]
    fn saddle_off_point_refuted() {
        let (spec, p, _) = setup(P_SADDLE, &[0.5], &[0.25]);
        let cert = first_order_certificate(&spec, &p, &RunConfig::default()).unwrap();
        assert_eq!(cert.overall, FirstOrderVerdict::Refuted);
    }

    #[test]
    fn infeasible_point_refuted_with_note() {
        let (spec, _, _) = setup(P2, &[0.0], &[0.0]);
        let p = CandidatePoint::new(&spec, &[-1.0], &[0.0]).unwrap();
        let cert = first_order_certificate(&spec, &p, &RunConfig::default()).unwrap();
        assert_eq!(cert.overall, FirstOrderVerdict::Refuted);
        assert!(cert.notes.iter().any(|n| n.contains("infeasible")));
    }

    #[test]
    fn certificate_invariant_under_row_rescaling() {
        let scaled = "n = 1\nm = 1\nf = y1\nphi_ineq = -3*x1\nvarphi_ineq = 2*y1 - 2*x1\n";
        let (spec_a, pa, _) = setup(P2, &[0.0], &[0.0]);
        let (spec_b, pb, _) = setup(scaled, &[0.0], &[0.0]);
        let ca = first_order_certificate(&spec_a, &pa, &RunConfig::default()).unwrap();
        let cb = first_order_certificate(&spec_b, &pb, &RunConfig::default()).unwrap();
        assert_eq!(ca.overall, cb.overall);
    }
}
