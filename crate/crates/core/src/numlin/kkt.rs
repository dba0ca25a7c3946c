//! Equality-constrained quadratic stationarity solves.

use thiserror::Error;

use super::dense::{dot, Mat};

#[derive(Debug, Error)]
pub enum KktError {
    #[error("singular KKT system: rank {rank} of {dim}")]
    Singular { rank: usize, dim: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Stationary point of `1/2 d'Hd + g'd` subject to `A_eq d = 0`.
///
/// Solves the saddle system `[[H, A'],[A, 0]] (d, nu) = (-g, 0)` via
/// pivoted LU. With `H` negative definite on the nullspace of `A_eq`
/// the returned `d` is the maximizer.
pub fn solve_kkt(h: &Mat, g: &[f64], a_eq: &Mat) -> Result<Vec<f64>, KktError> {
    let dim = h.nrows();
    if h.ncols() != dim {
        return Err(KktError::Shape("H must be square".into()));
    }
    if g.len() != dim {
        return Err(KktError::Shape("g length mismatch".into()));
    }
    let k = a_eq.nrows();
    if k > 0 && a_eq.ncols() != dim {
        return Err(KktError::Shape("A_eq column count mismatch".into()));
    }
    let total = dim + k;
    let mut m = Mat::zeros(total, total);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = h[(i, j)];
        }
    }
    for r in 0..k {
        for j in 0..dim {
            m[(dim + r, j)] = a_eq[(r, j)];
            m[(j, dim + r)] = a_eq[(r, j)];
        }
    }
    let mut rhs = vec![0.0; total];
    for i in 0..dim {
        rhs[i] = -g[i];
    }
    let sol = m.solve(&rhs).map_err(|e| match e {
        super::dense::LinearError::Singular { rank, dim } => KktError::Singular { rank, dim },
        super::dense::LinearError::Shape(s) => KktError::Shape(s),
    })?;
    Ok(sol[..dim].to_vec())
}

/// Residual of the KKT stationarity: `|| P_null (H d + g) ||_inf` where
/// `P_null` projects onto the nullspace of `A_eq`, plus `||A_eq d||_inf`.
pub fn kkt_residual(h: &Mat, g: &[f64], a_eq: &Mat, d: &[f64]) -> f64 {
    let dim = h.nrows();
    let mut grad = h.matvec(d);
    for i in 0..dim {
        grad[i] += g[i];
    }
    let mut worst = 0.0f64;
    if a_eq.nrows() == 0 {
        for v in &grad {
            worst = worst.max(v.abs());
        }
        return worst;
    }
    for basis in a_eq.nullspace(1e-12) {
        worst = worst.max(dot(&basis, &grad).abs());
    }
    for r in 0..a_eq.nrows() {
        worst = worst.max(dot(a_eq.row(r), d).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_scalar() {
        let h = Mat::from_rows(vec![vec![-2.0]]);
        let d = solve_kkt(&h, &[1.0], &Mat::zeros(0, 1)).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pinned_second_coordinate() {
        let h = Mat::from_rows(vec![vec![-1.0, 0.0], vec![0.0, -1.0]]);
        let a = Mat::from_rows(vec![vec![0.0, 1.0]]);
        let d = solve_kkt(&h, &[1.0, 0.0], &a).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12);
        assert!(d[1].abs() < 1e-12);
    }

    #[test]
    fn singular_reported() {
        let h = Mat::zeros(2, 2);
        let a = Mat::zeros(0, 2);
        assert!(matches!(
            solve_kkt(&h, &[1.0, 0.0], &a),
            Err(KktError::Singular { .. })
        ));
    }

    #[test]
    fn residual_small_on_random_negdef() {
        // fixed pseudo-random instances; residual oracle per contract
        let cases = [
            (vec![-3.0, 0.5, 0.5, -2.0], vec![1.0, -1.0]),
            (vec![-1.5, -0.2, -0.2, -4.0], vec![0.3, 2.0]),
        ];
        for (hd, g) in cases {
            let h = Mat::from_slice(2, 2, &hd);
            let a = Mat::from_rows(vec![vec![1.0, 1.0]]);
            let d = solve_kkt(&h, &g, &a).unwrap();
            assert!(kkt_residual(&h, &g, &a, &d) < 1e-8);
        }
    }
}
