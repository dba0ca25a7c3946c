//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Built for the tiny, dense LPs produced by the certification pipeline
//! (multiplier feasibility, directional duals, direction search). The
//! pivot rule is pure Bland on both phases, which makes every solve
//! deterministic for identical input.

use thiserror::Error;

use super::dense::{dot, norm_inf};

pub const PIVOT_TOL: f64 = 1e-10;
pub const BREAKDOWN_TOL: f64 = 1e-12;
pub const FEAS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarBound {
    Free,
    NonNeg,
}

/// `minimize objective . z` subject to `rows[i] . z (sense_i) rhs[i]`
/// and the per-variable bound (free or `z_j >= 0`).
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub senses: Vec<RowSense>,
    pub rhs: Vec<f64>,
    pub bounds: Vec<VarBound>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point in the original variables (empty unless `Optimal`).
    pub point: Vec<f64>,
    pub value: f64,
    /// Basic column identifiers of the final tableau, sorted. Stable for
    /// identical input; usable as an opaque basis fingerprint.
    pub basis: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    BadInput(String),
    #[error("numerical breakdown: pivot magnitude below {BREAKDOWN_TOL} in {0} phase")]
    NumericalBreakdown(&'static str),
    #[error("simplex did not terminate within the iteration budget")]
    IterationLimit,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::BadInput("bounds length != objective length".into()));
        }
        if self.rows.len() != self.senses.len() || self.rows.len() != self.rhs.len() {
            return Err(LpError::BadInput("row/sense/rhs length mismatch".into()));
        }
        for row in &self.rows {
            if row.len() != n {
                return Err(LpError::BadInput("row length != objective length".into()));
            }
        }
        let all = self
            .objective
            .iter()
            .chain(self.rhs.iter())
            .chain(self.rows.iter().flatten());
        for v in all {
            if !v.is_finite() {
                return Err(LpError::BadInput("non-finite entry".into()));
            }
        }
        Ok(())
    }

    /// Maximum residual of an optimal solution against rows and bounds.
    pub fn residual(&self, z: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for ((row, sense), &b) in self.rows.iter().zip(&self.senses).zip(&self.rhs) {
            let lhs = dot(row, z);
            let viol = match sense {
                RowSense::Le => (lhs - b).max(0.0),
                RowSense::Ge => (b - lhs).max(0.0),
                RowSense::Eq => (lhs - b).abs(),
            };
            worst = worst.max(viol);
        }
        for (zj, bound) in z.iter().zip(&self.bounds) {
            if *bound == VarBound::NonNeg {
                worst = worst.max(-zj);
            }
        }
        worst
    }
}

// Internal column bookkeeping after free-variable splitting.
#[derive(Clone, Copy, Debug)]
enum Col {
    Var { orig: usize, sign: f64 },
    Slack,
    Artificial,
}

struct Tableau {
    table: Vec<Vec<f64>>, // m x ncols
    rhs: Vec<f64>,        // m
    basis: Vec<usize>,    // m, column basic in each row
    cols: Vec<Col>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let lead = self.table[row][col];
        let ncols = self.cols.len();
        for j in 0..ncols {
            self.table[row][j] /= lead;
        }
        self.rhs[row] /= lead;
        for i in 0..self.table.len() {
            if i == row {
                continue;
            }
            let factor = self.table[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..ncols {
                self.table[i][j] -= factor * self.table[row][j];
            }
            self.rhs[i] -= factor * self.rhs[row];
        }
        self.basis[row] = col;
    }

    /// One simplex phase minimizing `cost` over the allowed columns.
    /// Returns the objective value, or `Unbounded`.
    fn run(
        &mut self,
        cost: &[f64],
        allowed: &[bool],
        phase: &'static str,
    ) -> Result<Option<f64>, LpError> {
        let ncols = self.cols.len();
        let m = self.table.len();
        let max_iters = 2000 * (ncols + m + 1);
        for _ in 0..max_iters {
            // reduced costs: c_j - c_B . B^-1 A_j  (computed fresh; the
            // tableau is kept in B^-1 A form, so this is a dot product)
            let mut entering = None;
            for j in 0..ncols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut red = cost[j];
                for (i, &bcol) in self.basis.iter().enumerate() {
                    red -= cost[bcol] * self.table[i][j];
                }
                if red < -PIVOT_TOL {
                    entering = Some(j); // Bland: first improving index
                    break;
                }
            }
            let Some(col) = entering else {
                let mut value = 0.0;
                for (i, &bcol) in self.basis.iter().enumerate() {
                    value += cost[bcol] * self.rhs[i];
                }
                return Ok(Some(value));
            };
            // ratio test, Bland tie-break by smallest basic column index
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.table[i][col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[i] / a;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((best_i, best_r)) => {
                            if ratio < best_r - 1e-12
                                || (ratio < best_r + 1e-12
                                    && self.basis[i] < self.basis[best_i])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Ok(None); // unbounded in this phase
            };
            if self.table[row][col].abs() < BREAKDOWN_TOL {
                return Err(LpError::NumericalBreakdown(phase));
            }
            self.pivot(row, col);
        }
        Err(LpError::IterationLimit)
    }
}

/// Solve a linear program with the two-phase dense simplex method.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.check()?;
    let n = lp.num_vars();
    let m = lp.rows.len();

    // column layout: split vars, then slacks/surplus, then artificials
    let mut cols: Vec<Col> = Vec::new();
    let mut var_cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, bound) in lp.bounds.iter().enumerate() {
        var_cols[j].push(cols.len());
        cols.push(Col::Var { orig: j, sign: 1.0 });
        if *bound == VarBound::Free {
            var_cols[j].push(cols.len());
            cols.push(Col::Var { orig: j, sign: -1.0 });
        }
    }

    // normalized rows with rhs >= 0
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut senses: Vec<RowSense> = Vec::with_capacity(m);
    let mut rhs: Vec<f64> = Vec::with_capacity(m);
    for i in 0..m {
        let flip = lp.rhs[i] < 0.0;
        let mut coeffs = Vec::with_capacity(cols.len());
        for col in &cols {
            let v = match col {
                Col::Var { orig, sign } => lp.rows[i][*orig] * sign,
                _ => unreachable!(),
            };
            coeffs.push(if flip { -v } else { v });
        }
        rows.push(coeffs);
        rhs.push(if flip { -lp.rhs[i] } else { lp.rhs[i] });
        senses.push(match (lp.senses[i], flip) {
            (RowSense::Le, false) | (RowSense::Ge, true) => RowSense::Le,
            (RowSense::Ge, false) | (RowSense::Le, true) => RowSense::Ge,
            (RowSense::Eq, _) => RowSense::Eq,
        });
    }

    // slack / surplus columns
    for (i, sense) in senses.iter().enumerate() {
        match sense {
            RowSense::Le => {
                for (r, row) in rows.iter_mut().enumerate() {
                    row.push(if r == i { 1.0 } else { 0.0 });
                }
                cols.push(Col::Slack);
            }
            RowSense::Ge => {
                for (r, row) in rows.iter_mut().enumerate() {
                    row.push(if r == i { -1.0 } else { 0.0 });
                }
                cols.push(Col::Slack);
            }
            RowSense::Eq => {}
        }
    }

    // artificials: for >= and = rows (and for <= rows they are the slacks)
    let artificial_start = cols.len();
    let mut basis = vec![usize::MAX; m];
    {
        let mut slack_cursor = 0;
        for (i, sense) in senses.iter().enumerate() {
            match sense {
                RowSense::Le => {
                    // slack is the initial basic column for this row
                    let col = var_splits_slack_index(&cols, slack_cursor);
                    basis[i] = col;
                    slack_cursor += 1;
                }
                RowSense::Ge => {
                    slack_cursor += 1; // surplus exists but can't start basic
                    for (r, row) in rows.iter_mut().enumerate() {
                        row.push(if r == i { 1.0 } else { 0.0 });
                    }
                    basis[i] = cols.len();
                    cols.push(Col::Artificial);
                }
                RowSense::Eq => {
                    for (r, row) in rows.iter_mut().enumerate() {
                        row.push(if r == i { 1.0 } else { 0.0 });
                    }
                    basis[i] = cols.len();
                    cols.push(Col::Artificial);
                }
            }
        }
    }
    let ncols = cols.len();
    for row in &mut rows {
        debug_assert_eq!(row.len(), ncols);
    }

    let mut tab = Tableau {
        table: rows,
        rhs,
        basis,
        cols,
    };

    // phase 1: minimize the artificial sum
    if artificial_start < ncols {
        let mut cost1 = vec![0.0; ncols];
        for c in cost1.iter_mut().skip(artificial_start) {
            *c = 1.0;
        }
        let allowed = vec![true; ncols];
        let value = tab
            .run(&cost1, &allowed, "phase-1")?
            .ok_or(LpError::NumericalBreakdown("phase-1"))?;
        let scale = 1.0 + norm_inf(&lp.rhs);
        if value > FEAS_TOL * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                point: Vec::new(),
                value: f64::INFINITY,
                basis: Vec::new(),
            });
        }
        // drive remaining artificials out of the basis; redundant rows
        // keep their artificial at value zero and are dropped
        let mut drop_rows = Vec::new();
        for i in 0..m {
            if tab.basis[i] < artificial_start {
                continue;
            }
            let mut pivot_col = None;
            for j in 0..artificial_start {
                if tab.table[i][j].abs() > PIVOT_TOL {
                    pivot_col = Some(j);
                    break;
                }
            }
            match pivot_col {
                Some(j) => tab.pivot(i, j),
                None => drop_rows.push(i),
            }
        }
        for &i in drop_rows.iter().rev() {
            tab.table.remove(i);
            tab.rhs.remove(i);
            tab.basis.remove(i);
        }
    }

    // phase 2: original objective, artificial columns locked out
    let mut cost2 = vec![0.0; ncols];
    for (j, col) in tab.cols.iter().enumerate() {
        if let Col::Var { orig, sign } = col {
            cost2[j] = lp.objective[*orig] * sign;
        }
    }
    let allowed: Vec<bool> = (0..ncols).map(|j| j < artificial_start).collect();
    let Some(value) = tab.run(&cost2, &allowed, "phase-2")? else {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            point: Vec::new(),
            value: f64::NEG_INFINITY,
            basis: Vec::new(),
        });
    };

    let mut point = vec![0.0; n];
    for (i, &bcol) in tab.basis.iter().enumerate() {
        if let Col::Var { orig, sign } = tab.cols[bcol] {
            point[orig] += sign * tab.rhs[i];
        }
    }
    let mut basis_id = tab.basis.clone();
    basis_id.sort_unstable();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        point,
        value,
        basis: basis_id,
    })
}

// index of the k-th slack column (they follow the variable columns in order)
fn var_splits_slack_index(cols: &[Col], k: usize) -> usize {
    let mut seen = 0;
    for (j, c) in cols.iter().enumerate() {
        if matches!(c, Col::Slack) {
            if seen == k {
                return j;
            }
            seen += 1;
        }
    }
    unreachable!("slack column {k} missing");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(
        objective: Vec<f64>,
        rows: Vec<Vec<f64>>,
        senses: Vec<RowSense>,
        rhs: Vec<f64>,
        bounds: Vec<VarBound>,
    ) -> LinearProgram {
        LinearProgram {
            objective,
            rows,
            senses,
            rhs,
            bounds,
        }
    }

    #[test]
    fn trivial_minimum_at_zero() {
        // min z s.t. z >= 0
        let p = lp(vec![1.0], vec![], vec![], vec![], vec![VarBound::NonNeg]);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.value, 0.0);
        assert_eq!(s.point, vec![0.0]);
    }

    #[test]
    fn unbounded_ray() {
        // min -z s.t. z >= 0
        let p = lp(vec![-1.0], vec![], vec![], vec![], vec![VarBound::NonNeg]);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible_detected() {
        // z >= 0, z <= -1
        let p = lp(
            vec![1.0],
            vec![vec![1.0]],
            vec![RowSense::Le],
            vec![-1.0],
            vec![VarBound::NonNeg],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn equality_with_free_variable() {
        // min x + y s.t. x + 2y = 4, x free, y >= 0
        // substituting x = 4 - 2y gives obj = 4 - y with y >= 0: unbounded.
        let p = lp(
            vec![1.0, 1.0],
            vec![vec![1.0, 2.0]],
            vec![RowSense::Eq],
            vec![4.0],
            vec![VarBound::Free, VarBound::NonNeg],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);

        // flipping the y cost makes it bounded: min x + 3y -> y = 0, x = 4
        let p = lp(
            vec![1.0, 3.0],
            vec![vec![1.0, 2.0]],
            vec![RowSense::Eq],
            vec![4.0],
            vec![VarBound::Free, VarBound::NonNeg],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 4.0).abs() < 1e-9);
        assert!((s.point[0] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn free_variable_unboundedness_found() {
        // min x s.t. x free -> unbounded
        let p = lp(vec![1.0], vec![], vec![], vec![], vec![VarBound::Free]);
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn small_dense_optimum() {
        // min -x - 2y s.t. x + y <= 4, x + 3y <= 6, x,y >= 0 -> (3,1), -5
        let p = lp(
            vec![-1.0, -2.0],
            vec![vec![1.0, 1.0], vec![1.0, 3.0]],
            vec![RowSense::Le, RowSense::Le],
            vec![4.0, 6.0],
            vec![VarBound::NonNeg, VarBound::NonNeg],
        );
        let s = solve_lp(&p).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value + 5.0).abs() < 1e-9);
        assert!((s.point[0] - 3.0).abs() < 1e-9);
        assert!((s.point[1] - 1.0).abs() < 1e-9);
        assert!(p.residual(&s.point) <= FEAS_TOL * (1.0 + norm_inf(&p.rhs)));
    }

    #[test]
    fn deterministic_given_identical_input() {
        let p = lp(
            vec![-1.0, -2.0, 0.5],
            vec![vec![1.0, 1.0, 1.0], vec![1.0, 3.0, -1.0]],
            vec![RowSense::Le, RowSense::Le],
            vec![4.0, 6.0],
            vec![VarBound::NonNeg, VarBound::NonNeg, VarBound::Free],
        );
        let a = solve_lp(&p).unwrap();
        let b = solve_lp(&p).unwrap();
        assert_eq!(a.status, b.status);
        assert_eq!(a.point, b.point);
        assert_eq!(a.basis, b.basis);
    }
}
