//! Symmetric eigenvalues via cyclic Jacobi rotations.

use super::dense::Mat;

/// Eigen-decomposition of a symmetric matrix. Eigenvalues are returned
/// in ascending order with matching eigenvector columns.
pub fn jacobi_eigen(h: &Mat) -> (Vec<f64>, Mat) {
    assert_eq!(h.nrows(), h.ncols(), "jacobi needs a square matrix");
    let dim = h.nrows();
    let mut a = h.clone();
    let mut v = Mat::identity(dim);
    if dim <= 1 {
        let vals = if dim == 1 { vec![a[(0, 0)]] } else { vec![] };
        return (vals, v);
    }
    let scale = a.norm_inf().max(1.0);
    let stop = 1e-14 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off = off.max(a[(p, q)].abs());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[(p, q)];
                if apq.abs() <= stop {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..dim {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = Mat::zeros(dim, dim);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..dim {
            vecs[(r, new_col)] = v[(r, old_col)];
        }
    }
    (vals, vecs)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eig(h: &Mat) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    jacobi_eigen(h).0[0]
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eig(h: &Mat) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    *jacobi_eigen(h).0.last().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::dense::dot;

    #[test]
    fn diagonal_matrix() {
        let h = Mat::from_rows(vec![vec![-2.0, 0.0], vec![0.0, -1.0]]);
        assert!((min_eig(&h) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let h = Mat::zeros(3, 3);
        assert_eq!(min_eig(&h), 0.0);
    }

    #[test]
    fn known_two_by_two() {
        // [[0,1],[1,-2]] has eigenvalues -1 +- sqrt(2)
        let h = Mat::from_rows(vec![vec![0.0, 1.0], vec![1.0, -2.0]]);
        let (vals, vecs) = jacobi_eigen(&h);
        assert!((vals[0] - (-1.0 - 2f64.sqrt())).abs() < 1e-12);
        assert!((vals[1] - (-1.0 + 2f64.sqrt())).abs() < 1e-12);
        // residual ||Hv - lambda v||
        for (k, &lambda) in vals.iter().enumerate() {
            let v: Vec<f64> = (0..2).map(|r| vecs[(r, k)]).collect();
            let hv = h.matvec(&v);
            for r in 0..2 {
                assert!((hv[r] - lambda * v[r]).abs() < 1e-10);
            }
            assert!((dot(&v, &v) - 1.0).abs() < 1e-10);
        }
    }
}
