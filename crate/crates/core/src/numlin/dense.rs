//! Minimal dense matrix kernels: LU solves, reduced row echelon form,
//! rank and nullspace. Everything is deterministic; pivoting always
//! picks the largest magnitude candidate, ties broken by lowest index.

use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("singular system: rank {rank} of {dim}")]
    Singular { rank: usize, dim: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Mat {
        let mut m = Mat::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Build from a row-major slice.
    pub fn from_slice(rows: usize, cols: usize, data: &[f64]) -> Mat {
        assert_eq!(rows * cols, data.len());
        Mat {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Extract the block with the given row and column ranges.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Mat {
        let mut out = Mat::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                out[(i - r0, j - c0)] = self[(i, j)];
            }
        }
        out
    }

    /// Solve the square system `self * x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinearError> {
        if self.rows != self.cols {
            return Err(LinearError::Shape(format!(
                "solve needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if b.len() != self.rows {
            return Err(LinearError::Shape("rhs length mismatch".into()));
        }
        let dim = self.rows;
        let mut a = self.clone();
        let mut x = b.to_vec();
        let scale = self.norm_inf().max(1.0);
        let mut rank = 0;
        for col in 0..dim {
            let mut piv = col;
            for r in (col + 1)..dim {
                if a[(r, col)].abs() > a[(piv, col)].abs() {
                    piv = r;
                }
            }
            if a[(piv, col)].abs() <= 1e-13 * scale {
                return Err(LinearError::Singular { rank, dim });
            }
            if piv != col {
                for j in 0..dim {
                    let tmp = a[(col, j)];
                    a[(col, j)] = a[(piv, j)];
                    a[(piv, j)] = tmp;
                }
                x.swap(col, piv);
            }
            rank += 1;
            for r in (col + 1)..dim {
                let factor = a[(r, col)] / a[(col, col)];
                if factor == 0.0 {
                    continue;
                }
                for j in col..dim {
                    a[(r, j)] -= factor * a[(col, j)];
                }
                x[r] -= factor * x[col];
            }
        }
        for col in (0..dim).rev() {
            x[col] /= a[(col, col)];
            for r in 0..col {
                x[r] -= a[(r, col)] * x[col];
            }
        }
        Ok(x)
    }

    /// Reduced row echelon form with the given absolute pivot tolerance.
    /// Returns the transformed matrix and the pivot column of each step.
    pub fn rref(&self, tol: f64) -> (Mat, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..a.cols {
            if r >= a.rows {
                break;
            }
            let mut piv = r;
            for i in (r + 1)..a.rows {
                if a[(i, col)].abs() > a[(piv, col)].abs() {
                    piv = i;
                }
            }
            if a[(piv, col)].abs() <= tol {
                continue;
            }
            if piv != r {
                for j in 0..a.cols {
                    let tmp = a[(r, j)];
                    a[(r, j)] = a[(piv, j)];
                    a[(piv, j)] = tmp;
                }
            }
            let lead = a[(r, col)];
            for j in 0..a.cols {
                a[(r, j)] /= lead;
            }
            for i in 0..a.rows {
                if i == r {
                    continue;
                }
                let factor = a[(i, col)];
                if factor == 0.0 {
                    continue;
                }
                for j in 0..a.cols {
                    a[(i, j)] -= factor * a[(r, j)];
                }
            }
            pivots.push(col);
            r += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.rref(tol).1.len()
    }

    /// Orthogonal-ish nullspace basis from the RREF free columns.
    /// Each basis vector has a 1 in its free coordinate.
    pub fn nullspace(&self, tol: f64) -> Vec<Vec<f64>> {
        let (r, pivots) = self.rref(tol);
        let mut basis = Vec::new();
        let pivot_set: Vec<bool> = {
            let mut v = vec![false; self.cols];
            for &p in &pivots {
                v[p] = true;
            }
            v
        };
        for free in 0..self.cols {
            if pivot_set[free] {
                continue;
            }
            let mut v = vec![0.0; self.cols];
            v[free] = 1.0;
            for (row, &pcol) in pivots.iter().enumerate() {
                v[pcol] = -r[(row, free)];
            }
            basis.push(v);
        }
        basis
    }

    /// A particular solution of `self * x = b` when consistent (free
    /// variables set to zero), or `None` when the system is inconsistent
    /// at tolerance `tol`.
    pub fn solve_consistent(&self, b: &[f64], tol: f64) -> Option<Vec<f64>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Mat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, self.cols)] = b[i];
        }
        let (r, pivots) = aug.rref(tol);
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![0.0; self.cols];
        for (row, &pcol) in pivots.iter().enumerate() {
            x[pcol] = r[(row, self.cols)];
        }
        Some(x)
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|v| v * s).collect()
}

pub fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| alpha * a + b).collect()
}

/// Unit-normalize; returns `None` for (numerically) zero vectors.
pub fn normalize(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm2(a);
    if n <= 1e-14 {
        None
    } else {
        Some(scale(a, 1.0 / n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a = Mat::from_rows(vec![vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = a.solve(&[5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_detected() {
        let a = Mat::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(
            a.solve(&[1.0, 2.0]),
            Err(LinearError::Singular { rank: 1, dim: 2 })
        ));
    }

    #[test]
    fn rank_and_nullspace() {
        let a = Mat::from_rows(vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]]);
        assert_eq!(a.rank(1e-10), 1);
        let ns = a.nullspace(1e-10);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot(a.row(0), v).abs() < 1e-12);
        }
    }

    #[test]
    fn consistent_solve() {
        let a = Mat::from_rows(vec![vec![1.0, 1.0], vec![2.0, 2.0]]);
        let x = a.solve_consistent(&[3.0, 6.0], 1e-10).unwrap();
        assert!((x[0] + x[1] - 3.0).abs() < 1e-12);
        assert!(a.solve_consistent(&[3.0, 7.0], 1e-10).is_none());
    }
}
