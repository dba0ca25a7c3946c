//! Forward-mode automatic differentiation carrying value, gradient and
//! Hessian through expression trees in one pass.
//!
//! Derivatives are exact up to floating-point rounding: the chain rules
//! below propagate closed-form first and second derivatives, never
//! finite differences.

use crate::expr::{DomainError, Expr, Func, VarRef};

/// Second-order jet over `k` variables: value, gradient of length `k`,
/// and dense symmetric Hessian stored row-major (`k*k`).
#[derive(Clone, Debug)]
pub struct Jet {
    pub val: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet {
    fn constant(v: f64, k: usize) -> Jet {
        Jet {
            val: v,
            grad: vec![0.0; k],
            hess: vec![0.0; k * k],
        }
    }

    fn variable(v: f64, index: usize, k: usize) -> Jet {
        let mut j = Jet::constant(v, k);
        j.grad[index] = 1.0;
        j
    }

    fn dim(&self) -> usize {
        self.grad.len()
    }

    fn add(&self, other: &Jet) -> Jet {
        Jet {
            val: self.val + other.val,
            grad: zip(&self.grad, &other.grad, |a, b| a + b),
            hess: zip(&self.hess, &other.hess, |a, b| a + b),
        }
    }

    fn sub(&self, other: &Jet) -> Jet {
        Jet {
            val: self.val - other.val,
            grad: zip(&self.grad, &other.grad, |a, b| a - b),
            hess: zip(&self.hess, &other.hess, |a, b| a - b),
        }
    }

    fn neg(&self) -> Jet {
        Jet {
            val: -self.val,
            grad: self.grad.iter().map(|v| -v).collect(),
            hess: self.hess.iter().map(|v| -v).collect(),
        }
    }

    // d2(uv) = u d2v + v d2u + du dv' + dv du'
    fn mul(&self, other: &Jet) -> Jet {
        let k = self.dim();
        let mut hess = vec![0.0; k * k];
        for r in 0..k {
            for c in 0..k {
                hess[r * k + c] = self.val * other.hess[r * k + c]
                    + other.val * self.hess[r * k + c]
                    + self.grad[r] * other.grad[c]
                    + other.grad[r] * self.grad[c];
            }
        }
        Jet {
            val: self.val * other.val,
            grad: (0..k)
                .map(|i| self.val * other.grad[i] + other.val * self.grad[i])
                .collect(),
            hess,
        }
    }

    /// Composition with a scalar map `g`: needs g(v), g'(v), g''(v).
    fn compose(&self, g0: f64, g1: f64, g2: f64) -> Jet {
        let k = self.dim();
        let mut hess = vec![0.0; k * k];
        for r in 0..k {
            for c in 0..k {
                hess[r * k + c] =
                    g1 * self.hess[r * k + c] + g2 * self.grad[r] * self.grad[c];
            }
        }
        Jet {
            val: g0,
            grad: self.grad.iter().map(|d| g1 * d).collect(),
            hess,
        }
    }
}

fn zip(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

/// Evaluate `e` together with its gradient and Hessian with respect to
/// the stacked variable vector `(x, y)` of length `n + m`.
pub fn eval_jet(e: &Expr, x: &[f64], y: &[f64]) -> Result<Jet, DomainError> {
    let k = x.len() + y.len();
    eval_rec(e, x, y, k)
}

fn eval_rec(e: &Expr, x: &[f64], y: &[f64], k: usize) -> Result<Jet, DomainError> {
    match e {
        Expr::Const(v) => Ok(Jet::constant(*v, k)),
        Expr::Var(VarRef::X(i)) => Ok(Jet::variable(x[*i], *i, k)),
        Expr::Var(VarRef::Y(j)) => Ok(Jet::variable(y[*j], x.len() + *j, k)),
        Expr::Add(a, b) => Ok(eval_rec(a, x, y, k)?.add(&eval_rec(b, x, y, k)?)),
        Expr::Sub(a, b) => Ok(eval_rec(a, x, y, k)?.sub(&eval_rec(b, x, y, k)?)),
        Expr::Mul(a, b) => Ok(eval_rec(a, x, y, k)?.mul(&eval_rec(b, x, y, k)?)),
        Expr::Div(a, b) => {
            let num = eval_rec(a, x, y, k)?;
            let den = eval_rec(b, x, y, k)?;
            if den.val == 0.0 {
                return Err(DomainError::DivisionByZero(e.to_string()));
            }
            // u/v = u * v^-1
            let inv = den.compose(1.0 / den.val, -1.0 / (den.val * den.val), 2.0 / (den.val * den.val * den.val));
            Ok(num.mul(&inv))
        }
        Expr::Pow(a, kk) => {
            let base = eval_rec(a, x, y, k)?;
            let p = *kk;
            if base.val == 0.0 && p < 0 {
                return Err(DomainError::ZeroToNegativePower(e.to_string()));
            }
            let g0 = base.val.powi(p);
            let g1 = if p == 0 {
                0.0
            } else {
                f64::from(p) * base.val.powi(p - 1)
            };
            let g2 = if p == 0 || p == 1 {
                0.0
            } else {
                f64::from(p) * f64::from(p - 1) * base.val.powi(p - 2)
            };
            Ok(base.compose(g0, g1, g2))
        }
        Expr::Neg(a) => Ok(eval_rec(a, x, y, k)?.neg()),
        Expr::Func(func, a) => {
            let arg = eval_rec(a, x, y, k)?;
            let v = arg.val;
            match func {
                Func::Sin => Ok(arg.compose(v.sin(), v.cos(), -v.sin())),
                Func::Cos => Ok(arg.compose(v.cos(), -v.sin(), -v.cos())),
                Func::Exp => {
                    let ev = v.exp();
                    Ok(arg.compose(ev, ev, ev))
                }
                Func::Log => {
                    if v <= 0.0 {
                        Err(DomainError::LogNonPositive(e.to_string()))
                    } else {
                        Ok(arg.compose(v.ln(), 1.0 / v, -1.0 / (v * v)))
                    }
                }
                Func::Sqrt => {
                    if v < 0.0 {
                        Err(DomainError::SqrtNegative(e.to_string()))
                    } else if v == 0.0 {
                        Err(DomainError::SqrtDerivativeAtZero(e.to_string()))
                    } else {
                        let s = v.sqrt();
                        Ok(arg.compose(s, 0.5 / s, -0.25 / (s * v)))
                    }
                }
            }
        }
    }
}

/// Exact gradient of `e` at `(x, y)`, length `n + m`.
pub fn gradient(e: &Expr, x: &[f64], y: &[f64]) -> Result<Vec<f64>, DomainError> {
    Ok(eval_jet(e, x, y)?.grad)
}

/// Exact Hessian of `e` at `(x, y)`, row-major `(n+m) x (n+m)`.
pub fn hessian(e: &Expr, x: &[f64], y: &[f64]) -> Result<Vec<f64>, DomainError> {
    Ok(eval_jet(e, x, y)?.hess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    #[test]
    fn polynomial_gradient() {
        let e = parse_expression("x1^2", 1, 0).unwrap();
        assert_eq!(gradient(&e, &[3.0], &[]).unwrap(), vec![6.0]);
    }

    #[test]
    fn bilinear_gradient() {
        let e = parse_expression("x1*y1", 1, 1).unwrap();
        assert_eq!(gradient(&e, &[2.0], &[5.0]).unwrap(), vec![5.0, 2.0]);
    }

    #[test]
    fn saddle_hessian() {
        let e = parse_expression("x1*y1 - 0.5*y1^2", 1, 1).unwrap();
        let h = hessian(&e, &[0.3], &[-0.7]).unwrap();
        assert_eq!(h, vec![0.0, 1.0, 1.0, -1.0]);
    }

    #[test]
    fn sphere_hessian_is_twice_identity() {
        let e = parse_expression("x1^2 + y1^2", 1, 1).unwrap();
        let h = hessian(&e, &[0.4], &[1.2]).unwrap();
        assert_eq!(h, vec![2.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn hessian_is_symmetric() {
        let e = parse_expression("exp(x1*y1) + sin(x1)/(2 + cos(y1))", 1, 1).unwrap();
        let h = hessian(&e, &[0.3], &[0.9]).unwrap();
        assert!((h[1] - h[2]).abs() < 1e-15);
    }

    #[test]
    fn quotient_rule() {
        // d/dx (x/ (1+x)) = 1/(1+x)^2 ; second derivative -2/(1+x)^3
        let e = parse_expression("x1/(1 + x1)", 1, 0).unwrap();
        let j = eval_jet(&e, &[1.0], &[]).unwrap();
        assert!((j.grad[0] - 0.25).abs() < 1e-15);
        assert!((j.hess[0] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn domain_error_propagates() {
        let e = parse_expression("sqrt(x1)", 1, 0).unwrap();
        assert!(eval_jet(&e, &[0.0], &[]).is_err());
        assert!(eval_jet(&e, &[-1.0], &[]).is_err());
    }
}
