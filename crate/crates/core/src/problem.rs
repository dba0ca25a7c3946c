//! Problem definition and candidate points.
//!
//! A problem is `min over x in X, max over y in Y(x) of f(x,y)` with
//! `X = {x | phi_ineq(x) <= 0, phi_eq(x) = 0}` and
//! `Y(x) = {y | varphi_ineq(x,y) <= 0, varphi_eq(x,y) = 0}`. The outer
//! constraints may reference only `x` variables; the coupled constraints
//! may reference both.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::autodiff::eval_jet;
use crate::expr::{parse_expression, DomainError, Expr, ParseExprError};

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub n: usize,
    pub m: usize,
    pub f: Expr,
    pub phi_ineq: Vec<Expr>,
    pub phi_eq: Vec<Expr>,
    pub varphi_ineq: Vec<Expr>,
    pub varphi_eq: Vec<Expr>,
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("i/o error reading `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("parse error at line {line}: {source}")]
    Expr {
        line: usize,
        source: ParseExprError,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("point not evaluable: {0}")]
    Eval(#[from] DomainError),
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.n < 1 || self.m < 1 {
            return Err(ProblemError::Validation(format!(
                "dimensions must satisfy n >= 1, m >= 1 (got n={}, m={})",
                self.n, self.m
            )));
        }
        for (i, e) in self.phi_ineq.iter().chain(self.phi_eq.iter()).enumerate() {
            if e.uses_y() {
                return Err(ProblemError::Validation(format!(
                    "outer constraint #{} references an inner variable: {e}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn p1(&self) -> usize {
        self.phi_ineq.len()
    }

    pub fn p2(&self) -> usize {
        self.phi_eq.len()
    }

    pub fn q1(&self) -> usize {
        self.varphi_ineq.len()
    }

    pub fn q2(&self) -> usize {
        self.varphi_eq.len()
    }

    /// All coupled constraints, inequalities first. This ordering fixes
    /// the layout of the multiplier vector `beta`.
    pub fn varphi_all(&self) -> impl Iterator<Item = &Expr> {
        self.varphi_ineq.iter().chain(self.varphi_eq.iter())
    }

    /// Canonical text form; reparsing yields a structurally identical spec.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "m = {}", self.m);
        let _ = writeln!(out, "f = {}", self.f);
        for e in &self.phi_ineq {
            let _ = writeln!(out, "phi_ineq = {e}");
        }
        for e in &self.phi_eq {
            let _ = writeln!(out, "phi_eq = {e}");
        }
        for e in &self.varphi_ineq {
            let _ = writeln!(out, "varphi_ineq = {e}");
        }
        for e in &self.varphi_eq {
            let _ = writeln!(out, "varphi_eq = {e}");
        }
        out
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical().as_bytes());
        let bytes = hasher.finalize();
        let mut s = String::with_capacity(64);
        for b in bytes {
            let _ = write!(s, "{b:02x}");
        }
        s
    }
}

/// A problem file together with an optional candidate point embedded in it.
#[derive(Clone, Debug)]
pub struct LoadedProblem {
    pub spec: ProblemSpec,
    pub point_x: Option<Vec<f64>>,
    pub point_y: Option<Vec<f64>>,
}

/// Load a line-oriented `key = value` problem file.
///
/// Keys: `n`, `m` (integers), `f`, repeated `phi_ineq`, `phi_eq`,
/// `varphi_ineq`, `varphi_eq` (expressions), optional `point_x`,
/// `point_y` (comma-separated reals). `#` starts a comment.
pub fn load_problem(path: impl AsRef<Path>) -> Result<LoadedProblem, ProblemError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_problem(&text)
}

pub fn parse_problem(text: &str) -> Result<LoadedProblem, ProblemError> {
    let mut n: Option<usize> = None;
    let mut m: Option<usize> = None;
    let mut f_text: Option<(usize, String)> = None;
    let mut phi_ineq = Vec::new();
    let mut phi_eq = Vec::new();
    let mut varphi_ineq = Vec::new();
    let mut varphi_eq = Vec::new();
    let mut point_x = None;
    let mut point_y = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ProblemError::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ProblemError::Parse {
                line: line_no,
                message: format!("empty value for key `{key}`"),
            });
        }
        match key {
            "n" | "m" => {
                let v: usize = value.parse().map_err(|_| ProblemError::Parse {
                    line: line_no,
                    message: format!("`{key}` must be a positive integer, got `{value}`"),
                })?;
                let slot = if key == "n" { &mut n } else { &mut m };
                if slot.is_some() {
                    return Err(ProblemError::Parse {
                        line: line_no,
                        message: format!("duplicate key `{key}`"),
                    });
                }
                *slot = Some(v);
            }
            "f" => {
                if f_text.is_some() {
                    return Err(ProblemError::Parse {
                        line: line_no,
                        message: "duplicate key `f`".into(),
                    });
                }
                f_text = Some((line_no, value.to_string()));
            }
            "phi_ineq" => phi_ineq.push((line_no, value.to_string())),
            "phi_eq" => phi_eq.push((line_no, value.to_string())),
            "varphi_ineq" => varphi_ineq.push((line_no, value.to_string())),
            "varphi_eq" => varphi_eq.push((line_no, value.to_string())),
            "point_x" => point_x = Some(parse_csv(value, line_no)?),
            "point_y" => point_y = Some(parse_csv(value, line_no)?),
            _ => {
                return Err(ProblemError::Parse {
                    line: line_no,
                    message: format!("unknown key `{key}`"),
                })
            }
        }
    }

    let n = n.ok_or(ProblemError::Parse {
        line: 0,
        message: "missing key `n`".into(),
    })?;
    let m = m.ok_or(ProblemError::Parse {
        line: 0,
        message: "missing key `m`".into(),
    })?;
    let (f_line, f_text) = f_text.ok_or(ProblemError::Parse {
        line: 0,
        message: "missing key `f`".into(),
    })?;

    let parse = |texts: Vec<(usize, String)>| -> Result<Vec<Expr>, ProblemError> {
        texts
            .into_iter()
            .map(|(line, t)| {
                parse_expression(&t, n, m).map_err(|source| ProblemError::Expr { line, source })
            })
            .collect()
    };

    let spec = ProblemSpec {
        n,
        m,
        f: parse_expression(&f_text, n, m)
            .map_err(|source| ProblemError::Expr { line: f_line, source })?,
        phi_ineq: parse(phi_ineq)?,
        phi_eq: parse(phi_eq)?,
        varphi_ineq: parse(varphi_ineq)?,
        varphi_eq: parse(varphi_eq)?,
    };
    spec.validate()?;
    Ok(LoadedProblem {
        spec,
        point_x,
        point_y,
    })
}

fn parse_csv(value: &str, line: usize) -> Result<Vec<f64>, ProblemError> {
    value
        .split(',')
        .map(|part| {
            part.trim().parse::<f64>().map_err(|_| ProblemError::Parse {
                line,
                message: format!("`{part}` is not a number"),
            })
        })
        .collect()
}

/// Value, gradient and Hessian of one expression at the candidate point.
/// Gradients live in the stacked `(x, y)` space of length `n + m`.
#[derive(Clone, Debug)]
pub struct EvalCache {
    pub val: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

/// The pair `(x, y)` under test, with all derivative data of `f` and the
/// constraints evaluated once up front.
#[derive(Clone, Debug)]
pub struct CandidatePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f: EvalCache,
    pub phi_ineq: Vec<EvalCache>,
    pub phi_eq: Vec<EvalCache>,
    pub varphi_ineq: Vec<EvalCache>,
    pub varphi_eq: Vec<EvalCache>,
}

impl CandidatePoint {
    pub fn new(spec: &ProblemSpec, x: &[f64], y: &[f64]) -> Result<CandidatePoint, ProblemError> {
        if x.len() != spec.n || y.len() != spec.m {
            return Err(ProblemError::Dimension(format!(
                "point has dimensions ({}, {}), problem declares ({}, {})",
                x.len(),
                y.len(),
                spec.n,
                spec.m
            )));
        }
        let cache = |e: &Expr| -> Result<EvalCache, ProblemError> {
            let jet = eval_jet(e, x, y)?;
            Ok(EvalCache {
                val: jet.val,
                grad: jet.grad,
                hess: jet.hess,
            })
        };
        Ok(CandidatePoint {
            x: x.to_vec(),
            y: y.to_vec(),
            f: cache(&spec.f)?,
            phi_ineq: spec.phi_ineq.iter().map(&cache).collect::<Result<_, _>>()?,
            phi_eq: spec.phi_eq.iter().map(&cache).collect::<Result<_, _>>()?,
            varphi_ineq: spec
                .varphi_ineq
                .iter()
                .map(&cache)
                .collect::<Result<_, _>>()?,
            varphi_eq: spec.varphi_eq.iter().map(&cache).collect::<Result<_, _>>()?,
        })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn m(&self) -> usize {
        self.y.len()
    }

    /// Gradients of all coupled constraints (inequalities then equalities).
    pub fn varphi_all(&self) -> impl Iterator<Item = &EvalCache> {
        self.varphi_ineq.iter().chain(self.varphi_eq.iter())
    }

    /// x-part of a stacked gradient.
    pub fn grad_x<'a>(&self, cache: &'a EvalCache) -> &'a [f64] {
        &cache.grad[..self.n()]
    }

    /// y-part of a stacked gradient.
    pub fn grad_y<'a>(&self, cache: &'a EvalCache) -> &'a [f64] {
        &cache.grad[self.n()..]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const P2: &str = "\
# linear test problem
n = 1
m = 1
f = y1
phi_ineq = -x1
varphi_ineq = y1 - x1
";

    #[test]
    fn loads_p2_fixture() {
        let loaded = parse_problem(P2).unwrap();
        let spec = &loaded.spec;
        assert_eq!((spec.n, spec.m), (1, 1));
        assert_eq!((spec.p1(), spec.p2(), spec.q1(), spec.q2()), (1, 0, 1, 0));
    }

    #[test]
    fn rejects_phi_with_inner_variable() {
        let text = "n = 1\nm = 1\nf = y1\nphi_ineq = y1\n";
        match parse_problem(text) {
            Err(ProblemError::Validation(msg)) => assert!(msg.contains("inner variable")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_key_reports_line() {
        let text = "n = 1\nm = 1\nf = y1\nbogus_key = 3\n";
        match parse_problem(text) {
            Err(ProblemError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn candidate_point_caches_derivatives() {
        let loaded = parse_problem(P2).unwrap();
        let p = CandidatePoint::new(&loaded.spec, &[0.0], &[0.0]).unwrap();
        assert_eq!(p.f.val, 0.0);
        assert_eq!(p.f.grad, vec![0.0, 1.0]);
        assert_eq!(p.varphi_ineq[0].grad, vec![-1.0, 1.0]);
        assert_eq!(p.phi_ineq[0].grad, vec![-1.0, 0.0]);
    }

    #[test]
    fn canonical_round_trips_and_digest_is_stable() {
        let loaded = parse_problem(P2).unwrap();
        let canon = loaded.spec.canonical();
        let again = parse_problem(&canon).unwrap();
        assert_eq!(loaded.spec.digest(), again.spec.digest());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let loaded = parse_problem(P2).unwrap();
        assert!(CandidatePoint::new(&loaded.spec, &[0.0, 1.0], &[0.0]).is_err());
    }
}
