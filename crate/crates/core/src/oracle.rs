//! Derivative-free verification on grids: the localized value function,
//! the defining inequalities of a calm local minimax point, finite
//! difference directional derivatives of the value function against the
//! certifier's analytic values, and the two-sided quadratic growth
//! estimate.
//!
//! Grids are axis-aligned and uniform with the candidate point as a grid
//! node (the defining inequalities pivot on it), so resolutions are
//! forced odd internally. An empty localized feasible set is reported as
//! a degenerate outcome, never silently skipped.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::{active_sets, critical_set_c, default_eps_act, ActiveSets};
use crate::config::RunConfig;
use crate::expr::DomainError;
use crate::ext::ExtVal;
use crate::first_order::duality_gap;
use crate::multipliers::{lambda2_face, MultiplierError, MultiplierVector};
use crate::numlin::conequad::{max_quad_over_cone, ConeQuadError};
use crate::numlin::dense::{dot, norm2, Mat};
use crate::problem::{CandidatePoint, ProblemSpec};
use crate::second_order::SecondOrderError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Localization radius.
    pub delta: f64,
    /// Calmness modulus candidate.
    pub kappa: f64,
    /// Points per axis (forced odd internally).
    pub resolution: usize,
    /// Feasibility tolerance for grid points.
    pub feas_tol: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.resolution < 3 {
            return Err(OracleError::BadGrid(format!(
                "resolution must be >= 3, got {}",
                self.resolution
            )));
        }
        if !(self.delta > 0.0) {
            return Err(OracleError::BadGrid(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if !(self.kappa > 0.0) {
            return Err(OracleError::BadGrid(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("grid budget exceeded: {0} points")]
    GridBudget(usize),
    #[error(transparent)]
    Eval(#[from] DomainError),
    #[error(transparent)]
    Multiplier(#[from] MultiplierError),
    #[error(transparent)]
    SecondOrder(#[from] SecondOrderError),
    #[error(transparent)]
    ConeQuad(#[from] ConeQuadError),
}

const GRID_BUDGET: usize = 4_000_000;

/// Uniform symmetric offsets with 0 as the middle node.
fn grid_offsets(radius: f64, resolution: usize) -> Vec<f64> {
    if radius == 0.0 {
        return vec![0.0];
    }
    let res = resolution | 1;
    let half = (res / 2) as i64;
    (-half..=half)
        .map(|k| radius * k as f64 / half as f64)
        .collect()
}

/// Iterate the cartesian grid around `center`, calling `visit` with each
/// point inside the euclidean ball of `radius`.
fn for_each_grid_point(
    center: &[f64],
    radius: f64,
    resolution: usize,
    mut visit: impl FnMut(&[f64]),
) -> Result<(), OracleError> {
    let dim = center.len();
    if dim == 0 {
        visit(&[]);
        return Ok(());
    }
    let offsets = grid_offsets(radius, resolution);
    let total = offsets.len().checked_pow(dim as u32).unwrap_or(usize::MAX);
    if total > GRID_BUDGET {
        return Err(OracleError::GridBudget(total));
    }
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    loop {
        let mut norm_sq = 0.0;
        for d in 0..dim {
            let off = offsets[idx[d]];
            point[d] = center[d] + off;
            norm_sq += off * off;
        }
        if norm_sq <= radius * radius * (1.0 + 1e-12) {
            visit(&point);
        }
        // advance the multi-index
        let mut d = 0;
        loop {
            idx[d] += 1;
            if idx[d] < offsets.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
            if d == dim {
                return Ok(());
            }
        }
    }
}

fn x_feasible(spec: &ProblemSpec, x: &[f64], feas_tol: f64) -> bool {
    let y_dummy: Vec<f64> = vec![0.0; 0];
    for c in &spec.phi_ineq {
        match c.eval(x, &y_dummy) {
            Ok(v) if v <= feas_tol => {}
            _ => return false,
        }
    }
    for c in &spec.phi_eq {
        match c.eval(x, &y_dummy) {
            Ok(v) if v.abs() <= feas_tol => {}
            _ => return false,
        }
    }
    true
}

fn y_feasible(spec: &ProblemSpec, x: &[f64], y: &[f64], feas_tol: f64) -> bool {
    for c in &spec.varphi_ineq {
        match c.eval(x, y) {
            Ok(v) if v <= feas_tol => {}
            _ => return false,
        }
    }
    for c in &spec.varphi_eq {
        match c.eval(x, y) {
            Ok(v) if v.abs() <= feas_tol => {}
            _ => return false,
        }
    }
    true
}

/// Grid maximum of `f(x, .)` over the feasible ball around `center_y`.
/// Returns `-inf` when no grid point is feasible.
pub fn localized_value(
    spec: &ProblemSpec,
    x: &[f64],
    center_y: &[f64],
    radius: f64,
    grid: &GridSpec,
) -> Result<ExtVal, OracleError> {
    grid.validate()?;
    let mut best: Option<f64> = None;
    let mut eval_error: Option<DomainError> = None;
    for_each_grid_point(center_y, radius, grid.resolution, |y| {
        if eval_error.is_some() {
            return;
        }
        if !y_feasible(spec, x, y, grid.feas_tol) {
            return;
        }
        match spec.f.eval(x, y) {
            Ok(v) => {
                best = Some(match best {
                    None => v,
                    Some(b) => b.max(v),
                });
            }
            Err(e) => eval_error = Some(e),
        }
    })?;
    if let Some(e) = eval_error {
        return Err(e.into());
    }
    Ok(match best {
        Some(v) => ExtVal::Finite(v),
        None => ExtVal::MinusInf,
    })
}

// -------------------- calm definition check --------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalmWitness {
    pub point: Vec<f64>,
    pub violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalmReport {
    pub inner_pass: bool,
    pub outer_pass: bool,
    /// Some localized value was `-inf` (monitored standing assumption).
    pub degenerate: bool,
    pub worst_inner: Option<CalmWitness>,
    pub worst_outer: Option<CalmWitness>,
    pub deltas: Vec<f64>,
    pub notes: Vec<String>,
}

/// Check the two defining inequalities of a calm local minimax point on
/// grids: `f(xbar, y) <= f(xbar, ybar) <= V_{kappa delta}(x)` for grid
/// `x` near `xbar` in X and grid `y` near `ybar` in `Y(xbar)`.
pub fn verify_calm_definition(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    grid: &GridSpec,
    delta_list: &[f64],
) -> Result<CalmReport, OracleError> {
    grid.validate()?;
    let f_bar = p.f.val;
    let slack = 1e-9 * (1.0 + f_bar.abs());
    let mut report = CalmReport {
        inner_pass: true,
        outer_pass: true,
        degenerate: false,
        worst_inner: None,
        worst_outer: None,
        deltas: delta_list.to_vec(),
        notes: Vec::new(),
    };
    if delta_list.is_empty() {
        report.notes.push("empty delta list: vacuous pass".into());
        return Ok(report);
    }
    for &delta in delta_list {
        // inner: f(xbar, y) <= f(xbar, ybar) over feasible y near ybar
        let mut inner_worst: Option<CalmWitness> = None;
        let mut eval_error: Option<DomainError> = None;
        for_each_grid_point(&p.y, delta, grid.resolution, |y| {
            if eval_error.is_some() || !y_feasible(spec, &p.x, y, grid.feas_tol) {
                return;
            }
            match spec.f.eval(&p.x, y) {
                Ok(v) => {
                    let violation = v - f_bar;
                    if violation > inner_worst.as_ref().map_or(slack, |w| w.violation) {
                        inner_worst = Some(CalmWitness {
                            point: y.to_vec(),
                            violation,
                        });
                    }
                }
                Err(e) => eval_error = Some(e),
            }
        })?;
        if let Some(e) = eval_error {
            return Err(e.into());
        }
        if let Some(w) = inner_worst {
            report.inner_pass = false;
            let replace = report
                .worst_inner
                .as_ref()
                .map_or(true, |cur| w.violation > cur.violation);
            if replace {
                report.worst_inner = Some(w);
            }
        }

        // outer: f(xbar, ybar) <= V_{kappa delta}(x) over feasible x
        let mut xs: Vec<Vec<f64>> = Vec::new();
        for_each_grid_point(&p.x, delta, grid.resolution, |x| {
            if x_feasible(spec, x, grid.feas_tol) {
                xs.push(x.to_vec());
            }
        })?;
        for x in xs {
            let v = localized_value(spec, &x, &p.y, grid.kappa * delta, grid)?;
            match v {
                ExtVal::MinusInf => {
                    report.degenerate = true;
                    report.notes.push(format!(
                        "localized feasible set empty at x = {x:?} (delta {delta})"
                    ));
                }
                ExtVal::Finite(v) => {
                    let violation = f_bar - v;
                    if violation > slack {
                        report.outer_pass = false;
                        let replace = report
                            .worst_outer
                            .as_ref()
                            .map_or(true, |cur| violation > cur.violation);
                        if replace {
                            report.worst_outer = Some(CalmWitness {
                                point: x.clone(),
                                violation,
                            });
                        }
                    }
                }
                ExtVal::PlusInf => unreachable!("grid maxima are finite"),
            }
        }
    }
    Ok(report)
}

// -------------------- finite-difference derivative checks --------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdFirstReport {
    pub u: Vec<f64>,
    /// `None` when a localization was empty (degenerate).
    pub estimate: Option<f64>,
    pub analytic: ExtVal,
    /// `None` when estimate and analytic value are not comparable.
    pub diff: Option<f64>,
    pub degenerate: bool,
}

/// One-sided Richardson-extrapolated difference quotient of the
/// localized value function along `u`, against the analytic directional
/// value from the dual LP. `steps` must decrease geometrically by 2.
pub fn fd_directional_derivative(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    u: &[f64],
    grid: &GridSpec,
    steps: &[f64],
) -> Result<FdFirstReport, OracleError> {
    grid.validate()?;
    let analytic = duality_gap(spec, p, act, u)?.dual;
    if norm2(u) == 0.0 {
        return Ok(FdFirstReport {
            u: u.to_vec(),
            estimate: Some(0.0),
            analytic,
            diff: analytic.finite().map(f64::abs),
            degenerate: false,
        });
    }
    let mut quotients = Vec::with_capacity(steps.len());
    let mut degenerate = false;
    for &t in steps {
        let x: Vec<f64> = p.x.iter().zip(u).map(|(xi, ui)| xi + t * ui).collect();
        match localized_value(spec, &x, &p.y, grid.kappa * t, grid)? {
            ExtVal::Finite(v) => quotients.push((v - p.f.val) / t),
            _ => {
                degenerate = true;
                break;
            }
        }
    }
    let estimate = if degenerate || quotients.is_empty() {
        None
    } else {
        Some(richardson(&quotients))
    };
    let diff = match (estimate, analytic) {
        (Some(e), ExtVal::Finite(v)) => Some((e - v).abs()),
        _ => None,
    };
    Ok(FdFirstReport {
        u: u.to_vec(),
        estimate,
        analytic,
        diff,
        degenerate,
    })
}

/// Richardson extrapolation for quotients with O(t) leading error and
/// steps halving between entries.
fn richardson(values: &[f64]) -> f64 {
    let mut table = values.to_vec();
    let mut factor = 2.0;
    while table.len() > 1 {
        let mut next = Vec::with_capacity(table.len() - 1);
        for i in 0..table.len() - 1 {
            next.push((factor * table[i + 1] - table[i]) / (factor - 1.0));
        }
        table = next;
        factor *= 2.0;
    }
    table[0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdSecondReport {
    pub u: Vec<f64>,
    pub estimate: Option<f64>,
    pub lower_bound: Option<f64>,
    pub tol_fd: f64,
    pub pass: bool,
    pub degenerate: bool,
}

/// Second difference quotient of the localized value function against
/// the analytic curvature lower bound: the max-min of the inner
/// Lagrangian quadratic form over the critical section and the argmin
/// multiplier face.
pub fn fd_second_directional(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    u: &[f64],
    grid: &GridSpec,
    steps: &[f64],
) -> Result<FdSecondReport, OracleError> {
    grid.validate()?;
    if norm2(u) == 0.0 {
        return Ok(FdSecondReport {
            u: u.to_vec(),
            estimate: Some(0.0),
            lower_bound: Some(0.0),
            tol_fd: 0.0,
            pass: true,
            degenerate: false,
        });
    }
    let ExtVal::Finite(v_prime) = duality_gap(spec, p, act, u)?.dual else {
        return Ok(FdSecondReport {
            u: u.to_vec(),
            estimate: None,
            lower_bound: None,
            tol_fd: 0.0,
            pass: false,
            degenerate: true,
        });
    };
    let mut quotients = Vec::with_capacity(steps.len());
    let mut degenerate = false;
    for &t in steps {
        let x: Vec<f64> = p.x.iter().zip(u).map(|(xi, ui)| xi + t * ui).collect();
        match localized_value(spec, &x, &p.y, grid.kappa * t, grid)? {
            ExtVal::Finite(v) => quotients.push(2.0 * (v - p.f.val - t * v_prime) / (t * t)),
            _ => {
                degenerate = true;
                break;
            }
        }
    }
    let estimate = if degenerate || quotients.is_empty() {
        None
    } else {
        Some(richardson(&quotients))
    };
    let lower_bound = inner_maxmin_curvature(spec, p, act, u)?;
    let curvature = estimate
        .map(f64::abs)
        .unwrap_or(0.0)
        .max(lower_bound.map(f64::abs).unwrap_or(0.0))
        .max(1.0);
    let min_step = steps.iter().cloned().fold(f64::INFINITY, f64::min);
    let grid_ratio = 2.0 * grid.kappa / ((grid.resolution | 1) - 1) as f64;
    let tol_fd = 10.0 * (grid_ratio * grid_ratio * curvature + min_step * curvature * 0.1 + 1e-9);
    let pass = match (estimate, lower_bound) {
        (Some(e), Some(b)) => e >= b - tol_fd,
        _ => false,
    };
    Ok(FdSecondReport {
        u: u.to_vec(),
        estimate,
        lower_bound,
        tol_fd,
        pass,
        degenerate,
    })
}

/// `max over h in the critical section of min over the argmin multiplier
/// face of the inner Lagrangian quadratic form at (u, h)`.
fn inner_maxmin_curvature(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    act: &ActiveSets,
    u: &[f64],
) -> Result<Option<f64>, OracleError> {
    let face = lambda2_face(spec, p, act, u)?;
    if face.representatives.is_empty() {
        return Ok(None);
    }
    let cone = critical_set_c(spec, p, act, u);
    let n = spec.n;
    let m = spec.m;
    let hessians: Vec<Mat> = face
        .representatives
        .iter()
        .map(|beta| lmax_hessian(spec, p, beta))
        .collect();
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for hess in &hessians {
        let h_yy = hess.block(n, n + m, n, n + m);
        let h_yx = hess.block(n, n + m, 0, n);
        let mut qp_h = Mat::zeros(m, m);
        for r in 0..m {
            for c in 0..m {
                qp_h[(r, c)] = 2.0 * h_yy[(r, c)];
            }
        }
        let qp_g: Vec<f64> = h_yx.matvec(u).iter().map(|v| 2.0 * v).collect();
        match max_quad_over_cone(&qp_h, &qp_g, &cone) {
            Ok(r) if !r.unbounded => candidates.push(r.arg),
            Ok(_) => {}
            Err(ConeQuadError::EmptyFeasibleSet) => return Ok(None),
            Err(e) => return Err(e.into()),
        }
    }
    if cone.contains(&vec![0.0; m], 1e-9) {
        candidates.push(vec![0.0; m]);
    }
    let mut best: Option<f64> = None;
    for h in &candidates {
        if !cone.contains(h, 1e-8 * (1.0 + norm2(h))) {
            continue;
        }
        let mut d = u.to_vec();
        d.extend_from_slice(h);
        let min_over = hessians
            .iter()
            .map(|hess| dot(&d, &hess.matvec(&d)))
            .fold(f64::INFINITY, f64::min);
        if best.map_or(true, |b| min_over > b) {
            best = Some(min_over);
        }
    }
    Ok(best)
}

/// Hessian of the inner Lagrangian `f - varphi' beta` over `(x, y)`.
fn lmax_hessian(spec: &ProblemSpec, p: &CandidatePoint, beta: &MultiplierVector) -> Mat {
    let k = spec.n + spec.m;
    let mut h = Mat::from_slice(k, k, &p.f.hess);
    for (i, c) in p.varphi_ineq.iter().enumerate() {
        for r in 0..k {
            for s in 0..k {
                h[(r, s)] -= beta.beta_ineq[i] * c.hess[r * k + s];
            }
        }
    }
    for (i, c) in p.varphi_eq.iter().enumerate() {
        for r in 0..k {
            for s in 0..k {
                h[(r, s)] -= beta.beta_eq[i] * c.hess[r * k + s];
            }
        }
    }
    h
}

// -------------------- growth estimate --------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthVerdict {
    Pass,
    Fail,
    BoundaryDegenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub delta: f64,
    /// Estimated inner growth constant `inf (f(xbar,ybar) - f(xbar,y)) / |y - ybar|^2`.
    pub eps_hat: f64,
    /// Estimated outer growth constant via the localized value function.
    pub mu_hat: f64,
    /// Constants re-estimated at half radius; instability marks the
    /// estimate as boundary-dominated rather than curvature-dominated.
    pub eps_hat_half: f64,
    pub mu_hat_half: f64,
    pub inner_degenerate: bool,
    pub outer_degenerate: bool,
    pub minus_inf: bool,
    pub verdict: GrowthVerdict,
    pub worst_inner: Option<Vec<f64>>,
    pub worst_outer: Option<Vec<f64>>,
    pub notes: Vec<String>,
}

/// Two-sided quadratic growth estimate at radius `delta`. The headline
/// constants come from the full radius; a second pass at half radius
/// guards against boundary-dominated estimates (the constant must be
/// stable under radius refinement to count as genuine curvature).
pub fn verify_growth(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    grid: &GridSpec,
    delta: f64,
) -> Result<GrowthReport, OracleError> {
    grid.validate()?;
    let (eps_hat, worst_inner) = inner_growth(spec, p, grid, delta)?;
    let (eps_hat_half, _) = inner_growth(spec, p, grid, delta / 2.0)?;
    let (mu_hat, mu_minus_inf, worst_outer) = outer_growth(spec, p, grid, delta)?;
    let (mu_hat_half, half_minus_inf, _) = outer_growth(spec, p, grid, delta / 2.0)?;
    let minus_inf = mu_minus_inf || half_minus_inf;

    let stable = |a: f64, b: f64| -> bool {
        if !(a > 0.0) || !(b > 0.0) {
            return true; // instability only meaningful for positive pairs
        }
        let ratio = if a > b { a / b } else { b / a };
        ratio <= 1.5
    };
    let inner_degenerate = eps_hat > 0.0 && eps_hat_half > 0.0 && !stable(eps_hat, eps_hat_half);
    let outer_degenerate = mu_hat > 0.0 && mu_hat_half > 0.0 && !stable(mu_hat, mu_hat_half);

    let mut notes = Vec::new();
    if inner_degenerate {
        notes.push(format!(
            "inner growth constant unstable under radius refinement ({eps_hat:.3e} vs {eps_hat_half:.3e}): boundary-dominated"
        ));
    }
    if outer_degenerate {
        notes.push(format!(
            "outer growth constant unstable under radius refinement ({mu_hat:.3e} vs {mu_hat_half:.3e}): boundary-dominated"
        ));
    }
    if minus_inf {
        notes.push("localized feasible set empty at some grid x".into());
    }

    let verdict = if eps_hat <= 0.0 || mu_hat <= 0.0 {
        GrowthVerdict::Fail
    } else if inner_degenerate || outer_degenerate || minus_inf {
        GrowthVerdict::BoundaryDegenerate
    } else {
        GrowthVerdict::Pass
    };
    Ok(GrowthReport {
        delta,
        eps_hat,
        mu_hat,
        eps_hat_half,
        mu_hat_half,
        inner_degenerate,
        outer_degenerate,
        minus_inf,
        verdict,
        worst_inner,
        worst_outer,
        notes,
    })
}

fn inner_growth(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    grid: &GridSpec,
    delta: f64,
) -> Result<(f64, Option<Vec<f64>>), OracleError> {
    let res = grid.resolution | 1;
    let step = 2.0 * delta / (res - 1) as f64;
    let mut eps = f64::INFINITY;
    let mut worst = None;
    let mut eval_error: Option<DomainError> = None;
    for_each_grid_point(&p.y, delta, grid.resolution, |y| {
        if eval_error.is_some() || !y_feasible(spec, &p.x, y, grid.feas_tol) {
            return;
        }
        let dist = {
            let mut s = 0.0;
            for (a, b) in y.iter().zip(&p.y) {
                s += (a - b) * (a - b);
            }
            s.sqrt()
        };
        if dist < step * (1.0 - 1e-12) {
            return;
        }
        match spec.f.eval(&p.x, y) {
            Ok(v) => {
                let ratio = (p.f.val - v) / (dist * dist);
                if ratio < eps {
                    eps = ratio;
                    worst = Some(y.to_vec());
                }
            }
            Err(e) => eval_error = Some(e),
        }
    })?;
    if let Some(e) = eval_error {
        return Err(e.into());
    }
    if eps == f64::INFINITY {
        // no eligible sample: report neutral zero (resolution too coarse)
        return Ok((0.0, None));
    }
    Ok((eps, worst))
}

fn outer_growth(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    grid: &GridSpec,
    delta: f64,
) -> Result<(f64, bool, Option<Vec<f64>>), OracleError> {
    let res = grid.resolution | 1;
    let step = 2.0 * delta / (res - 1) as f64;
    let mut xs: Vec<(Vec<f64>, f64)> = Vec::new();
    for_each_grid_point(&p.x, delta, grid.resolution, |x| {
        if !x_feasible(spec, x, grid.feas_tol) {
            return;
        }
        let mut s = 0.0;
        for (a, b) in x.iter().zip(&p.x) {
            s += (a - b) * (a - b);
        }
        let dist = s.sqrt();
        if dist >= step * (1.0 - 1e-12) {
            xs.push((x.to_vec(), dist));
        }
    })?;
    let mut mu = f64::INFINITY;
    let mut minus_inf = false;
    let mut worst = None;
    for (x, dist) in xs {
        let radius = (grid.kappa * dist).max(step);
        match localized_value(spec, &x, &p.y, radius, grid)? {
            ExtVal::Finite(v) => {
                let ratio = (v - p.f.val) / (dist * dist);
                if ratio < mu {
                    mu = ratio;
                    worst = Some(x);
                }
            }
            _ => minus_inf = true,
        }
    }
    if mu == f64::INFINITY {
        return Ok((0.0, minus_inf, None));
    }
    Ok((mu, minus_inf, worst))
}

// -------------------- aggregated oracle stage --------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub kappa: f64,
    pub calm: CalmReport,
    pub growth: Vec<GrowthReport>,
    pub fd_first: Vec<FdFirstReport>,
    pub fd_second: Vec<FdSecondReport>,
    pub overall: crate::verdict::Verdict,
    pub notes: Vec<String>,
}

/// Run the full oracle stage: calm-definition inequalities for every
/// delta, growth estimates per delta, and finite-difference derivative
/// consistency along sampled outer directions.
pub fn oracle_stage(
    spec: &ProblemSpec,
    p: &CandidatePoint,
    cfg: &RunConfig,
    kappa: f64,
) -> Result<OracleReport, OracleError> {
    use crate::cones::{linearization_cone_x, sample_directions};
    use crate::verdict::Verdict;

    let eps_act = cfg.eps_act.unwrap_or_else(|| default_eps_act(p));
    let act = match active_sets(spec, p, eps_act) {
        Ok(a) => a,
        Err(crate::cones::ConeError::InfeasiblePoint(msg)) => {
            return Ok(OracleReport {
                kappa,
                calm: CalmReport {
                    inner_pass: false,
                    outer_pass: false,
                    degenerate: false,
                    worst_inner: None,
                    worst_outer: None,
                    deltas: cfg.deltas.clone(),
                    notes: vec![format!("candidate point is infeasible: {msg}")],
                },
                growth: Vec::new(),
                fd_first: Vec::new(),
                fd_second: Vec::new(),
                overall: Verdict::Refuted,
                notes: vec![format!("candidate point is infeasible: {msg}")],
            });
        }
        Err(e) => return Err(OracleError::Multiplier(e.into())),
    };

    let grid = GridSpec {
        delta: cfg.deltas.first().copied().unwrap_or(0.1),
        kappa,
        resolution: cfg.resolution,
        feas_tol: cfg.feas_tol,
    };
    let calm = verify_calm_definition(spec, p, &grid, &cfg.deltas)?;
    let mut growth = Vec::new();
    for &delta in &cfg.deltas {
        growth.push(verify_growth(spec, p, &grid, delta)?);
    }

    // derivative checks along a few outer directions
    let outer = linearization_cone_x(spec, p, &act);
    let dirs = sample_directions(&outer, 4, cfg.seed);
    let steps: Vec<f64> = cfg.deltas.clone();
    let mut fd_first = Vec::new();
    let mut fd_second = Vec::new();
    for u in dirs.dirs.iter().take(4) {
        fd_first.push(fd_directional_derivative(spec, p, &act, u, &grid, &steps)?);
        fd_second.push(fd_second_directional(spec, p, &act, u, &grid, &steps)?);
    }

    let mut notes = Vec::new();
    let calm_ok = calm.inner_pass && calm.outer_pass && !calm.degenerate;
    let growth_fail = growth.iter().any(|g| g.verdict == GrowthVerdict::Fail);
    let growth_degenerate = growth
        .iter()
        .any(|g| g.verdict == GrowthVerdict::BoundaryDegenerate);
    let fd_fail = fd_first
        .iter()
        .map(|r| r.degenerate)
        .chain(fd_second.iter().map(|r| r.degenerate || !r.pass))
        .any(|bad| bad);

    let overall = if !calm.inner_pass || !calm.outer_pass || growth_fail {
        notes.push("a defining inequality or growth bound fails on the grid".into());
        Verdict::Refuted
    } else if calm.degenerate || growth_degenerate || fd_fail {
        notes.push("degenerate oracle outcome (boundary-dominated or empty localizations)".into());
        Verdict::Inconclusive
    } else if calm_ok {
        Verdict::SufficientCertified
    } else {
        Verdict::Inconclusive
    };

    Ok(OracleReport {
        kappa,
        calm,
        growth,
        fd_first,
        fd_second,
        overall,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::parse_problem;

    const P2: &str = "n = 1\nm = 1\nf = y1\nphi_ineq = -x1\nvarphi_ineq = y1 - x1\n";
    const P_SADDLE: &str = "n = 1\nm = 1\nf = x1*y1 - y1^2\n";

    fn grid(kappa: f64) -> GridSpec {
        GridSpec {
            delta: 0.2,
            kappa,
            resolution: 41,
            feas_tol: 1e-9,
        }
    }

    fn setup(text: &str, x: &[f64], y: &[f64]) -> (ProblemSpec, CandidatePoint) {
        let spec = parse_problem(text).unwrap().spec;
        let p = CandidatePoint::new(&spec, x, y).unwrap();
        (spec, p)
    }

    #[test]
    fn p2_localized_value() {
        let (spec, _) = setup(P2, &[0.0], &[0.0]);
        // feasible y in [-1, 0.5], max of f = y at 0.5
        let v = localized_value(&spec, &[0.5], &[0.0], 1.0, &grid(1.0)).unwrap();
        let v = v.finite().unwrap();
        assert!((v - 0.5).abs() < 0.06);
    }

    #[test]
    fn saddle_localized_value_quarter() {
        let (spec, _) = setup(P_SADDLE, &[0.0], &[0.0]);
        let v = localized_value(&spec, &[1.0], &[0.0], 1.0, &grid(1.0)).unwrap();
        let v = v.finite().unwrap();
        assert!((v - 0.25).abs() < 0.01);
    }

    #[test]
    fn empty_ball_flags_minus_inf() {
        let (spec, _) = setup(P2, &[0.0], &[0.0]);
        // center y = 1 infeasible for x = 0 (needs y <= 0), radius 0
        let v = localized_value(&spec, &[0.0], &[1.0], 0.0, &grid(1.0)).unwrap();
        assert_eq!(v, ExtVal::MinusInf);
    }

    #[test]
    fn localized_value_monotone_in_radius() {
        let (spec, _) = setup(P_SADDLE, &[0.4], &[0.0]);
        let g = grid(1.0);
        let mut prev = f64::NEG_INFINITY;
        for radius in [0.05, 0.1, 0.2, 0.4] {
            let v = localized_value(&spec, &[0.4], &[0.0], radius, &g)
                .unwrap()
                .finite()
                .unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn saddle_calm_definition_passes() {
        let (spec, p) = setup(P_SADDLE, &[0.0], &[0.0]);
        let r = verify_calm_definition(&spec, &p, &grid(2.0), &[0.1, 0.05]).unwrap();
        assert!(r.inner_pass && r.outer_pass && !r.degenerate);
    }

    #[test]
    fn saddle_off_point_fails_calm() {
        let (spec, p) = setup(P_SADDLE, &[0.5], &[0.25]);
        let r = verify_calm_definition(&spec, &p, &grid(2.0), &[0.1, 0.05]).unwrap();
        assert!(!r.outer_pass);
        assert!(r.worst_outer.is_some());
    }

    #[test]
    fn empty_delta_list_vacuous() {
        let (spec, p) = setup(P_SADDLE, &[0.0], &[0.0]);
        let r = verify_calm_definition(&spec, &p, &grid(2.0), &[]).unwrap();
        assert!(r.inner_pass && r.outer_pass);
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn saddle_growth_constants() {
        let (spec, p) = setup(P_SADDLE, &[0.0], &[0.0]);
        let r = verify_growth(&spec, &p, &grid(2.0), 0.2).unwrap();
        assert_eq!(r.verdict, GrowthVerdict::Pass);
        assert!((r.eps_hat - 1.0).abs() < 0.2, "eps_hat = {}", r.eps_hat);
        assert!((r.mu_hat - 0.25).abs() < 0.05, "mu_hat = {}", r.mu_hat);
    }

    #[test]
    fn strict_quadratic_saddle_growth() {
        let (spec, p) = setup("n = 1\nm = 1\nf = x1^2 - y1^2\n", &[0.0], &[0.0]);
        let r = verify_growth(&spec, &p, &grid(2.0), 0.2).unwrap();
        assert_eq!(r.verdict, GrowthVerdict::Pass);
        assert!((r.eps_hat - 1.0).abs() < 0.2);
        assert!((r.mu_hat - 1.0).abs() < 0.2);
    }

    #[test]
    fn p2_growth_boundary_degenerate() {
        let (spec, p) = setup(P2, &[0.0], &[0.0]);
        let r = verify_growth(&spec, &p, &grid(2.0), 0.2).unwrap();
        assert_eq!(r.verdict, GrowthVerdict::BoundaryDegenerate);
        assert!(r.inner_degenerate);
        assert!(r.eps_hat > 0.0);
    }

    #[test]
    fn saddle_fd_first_matches_analytic_zero() {
        let (spec, p) = setup(P_SADDLE, &[0.0], &[0.0]);
        let act = active_sets(&spec, &p, 1e-7).unwrap();
        let r = fd_directional_derivative(
            &spec,
            &p,
            &act,
            &[1.0],
            &grid(2.0),
            &[0.2, 0.1, 0.05],
        )
        .unwrap();
        assert_eq!(r.analytic, ExtVal::Finite(0.0));
        assert!(r.diff.unwrap() < 1e-2, "diff = {:?}", r.diff);
    }

    #[test]
    fn p2_fd_first_matches_analytic_one() {
        let (spec, p) = setup(P2, &[0.0], &[0.0]);
        let act = active_sets(&spec, &p, 1e-7).unwrap();
        let r = fd_directional_derivative(
            &spec,
            &p,
            &act,
            &[1.0],
            &grid(2.0),
            &[0.2, 0.1, 0.05],
        )
        .unwrap();
        assert_eq!(r.analytic, ExtVal::Finite(1.0));
        assert!(r.diff.unwrap() < 1e-9, "diff = {:?}", r.diff);
    }

    #[test]
    fn saddle_fd_second_matches_half() {
        let (spec, p) = setup(P_SADDLE, &[0.0], &[0.0]);
        let act = active_sets(&spec, &p, 1e-7).unwrap();
        let r =
            fd_second_directional(&spec, &p, &act, &[1.0], &grid(2.0), &[0.2, 0.1, 0.05]).unwrap();
        assert!((r.lower_bound.unwrap() - 0.5).abs() < 1e-9);
        assert!(
            r.pass,
            "estimate {:?} vs bound {:?}",
            r.estimate, r.lower_bound
        );
        assert!((r.estimate.unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn fd_zero_direction_trivial() {
        let (spec, p) = setup(P2, &[0.0], &[0.0]);
        let act = active_sets(&spec, &p, 1e-7).unwrap();
        let r =
            fd_second_directional(&spec, &p, &act, &[0.0], &grid(2.0), &[0.2, 0.1]).unwrap();
        assert!(r.pass);
    }
}
