//! Expression trees for objectives and constraints.
//!
//! Expressions are built over the outer variables `x1..xn`, the inner
//! variables `y1..ym`, real literals, the arithmetic operators
//! `+ - * / ^` (integer exponent), unary minus, and the functions
//! `sin cos exp log sqrt`. The canonical text form produced by
//! [`Expr::to_string`] re-parses to a structurally identical tree.

use std::fmt;

use thiserror::Error;

/// Reference to a problem variable. Indices are 0-based internally;
/// the surface syntax `x1`, `y3` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarRef {
    X(usize),
    Y(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

/// Expression AST. Constants are non-negative by construction (negative
/// values are represented as `Neg(Const(..))`) so that the canonical
/// serialization round-trips structurally.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(VarRef),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power of the base expression.
    Pow(Box<Expr>, i32),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseExprError {
    #[error("syntax error at byte {pos}: expected {expected}")]
    Syntax { pos: usize, expected: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("variable `{name}` out of range at byte {pos}: declared n={n}, m={m}")]
    IndexOutOfRange {
        name: String,
        pos: usize,
        n: usize,
        m: usize,
    },
}

/// Evaluation failure. Carries the canonical text of the offending
/// subexpression so reports can point at it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("log of non-positive argument in `{0}`")]
    LogNonPositive(String),
    #[error("sqrt of negative argument in `{0}`")]
    SqrtNegative(String),
    #[error("zero raised to negative power in `{0}`")]
    ZeroToNegativePower(String),
    #[error("derivative of sqrt at zero in `{0}`")]
    SqrtDerivativeAtZero(String),
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        if v < 0.0 {
            Expr::Neg(Box::new(Expr::Const(-v)))
        } else {
            Expr::Const(v)
        }
    }

    pub fn var_x(i: usize) -> Expr {
        Expr::Var(VarRef::X(i))
    }

    pub fn var_y(j: usize) -> Expr {
        Expr::Var(VarRef::Y(j))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, k: i32) -> Expr {
        Expr::Pow(Box::new(a), k)
    }

    /// True if the expression references any inner (`y`) variable.
    pub fn uses_y(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(VarRef::X(_)) => false,
            Expr::Var(VarRef::Y(_)) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.uses_y() || b.uses_y()
            }
            Expr::Pow(a, _) | Expr::Neg(a) | Expr::Func(_, a) => a.uses_y(),
        }
    }

    /// IEEE double evaluation. Domain violations (division by zero,
    /// log/sqrt outside their domains) are fatal errors, not NaNs.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64, DomainError> {
        match self {
            Expr::Const(v) => Ok(*v),
            Expr::Var(VarRef::X(i)) => Ok(x[*i]),
            Expr::Var(VarRef::Y(j)) => Ok(y[*j]),
            Expr::Add(a, b) => Ok(a.eval(x, y)? + b.eval(x, y)?),
            Expr::Sub(a, b) => Ok(a.eval(x, y)? - b.eval(x, y)?),
            Expr::Mul(a, b) => Ok(a.eval(x, y)? * b.eval(x, y)?),
            Expr::Div(a, b) => {
                let num = a.eval(x, y)?;
                let den = b.eval(x, y)?;
                if den == 0.0 {
                    Err(DomainError::DivisionByZero(self.to_string()))
                } else {
                    Ok(num / den)
                }
            }
            Expr::Pow(a, k) => {
                let base = a.eval(x, y)?;
                if base == 0.0 && *k < 0 {
                    Err(DomainError::ZeroToNegativePower(self.to_string()))
                } else {
                    Ok(base.powi(*k))
                }
            }
            Expr::Neg(a) => Ok(-a.eval(x, y)?),
            Expr::Func(f, a) => {
                let v = a.eval(x, y)?;
                match f {
                    Func::Sin => Ok(v.sin()),
                    Func::Cos => Ok(v.cos()),
                    Func::Exp => Ok(v.exp()),
                    Func::Log => {
                        if v <= 0.0 {
                            Err(DomainError::LogNonPositive(self.to_string()))
                        } else {
                            Ok(v.ln())
                        }
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            Err(DomainError::SqrtNegative(self.to_string()))
                        } else {
                            Ok(v.sqrt())
                        }
                    }
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(_) | Expr::Var(_) | Expr::Func(..) => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    /// Canonical serialization: minimal parentheses under the grammar's
    /// precedence and associativity rules.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Var(VarRef::X(i)) => write!(f, "x{}", i + 1),
            Expr::Var(VarRef::Y(j)) => write!(f, "y{}", j + 1),
            Expr::Add(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " + ")?;
                write_child(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " - ")?;
                write_child(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "*")?;
                write_child(f, b, 3)
            }
            Expr::Div(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "/")?;
                write_child(f, b, 3)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, 3)
            }
            Expr::Pow(a, k) => {
                write_child(f, a, 5)?;
                if *k < 0 {
                    write!(f, "^({k})")
                } else {
                    write!(f, "^{k}")
                }
            }
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<Option<(usize, Token)>, ParseExprError> {
        self.skip_ws();
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.bytes[self.pos];
        let tok = match c {
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => {
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.')
                {
                    self.pos += 1;
                }
                // optional exponent part
                if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
                    let mut probe = self.pos + 1;
                    if probe < self.bytes.len() && matches!(self.bytes[probe], b'+' | b'-') {
                        probe += 1;
                    }
                    if probe < self.bytes.len() && self.bytes[probe].is_ascii_digit() {
                        self.pos = probe;
                        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit()
                        {
                            self.pos += 1;
                        }
                    }
                }
                let text = &self.src[start..self.pos];
                let v = text.parse::<f64>().map_err(|_| ParseExprError::Syntax {
                    pos: start,
                    expected: "number".into(),
                })?;
                return Ok(Some((start, Token::Number(v))));
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                return Ok(Some((
                    start,
                    Token::Ident(self.src[start..self.pos].to_string()),
                )));
            }
            _ => {
                return Err(ParseExprError::Syntax {
                    pos: start,
                    expected: "operator, number, identifier or parenthesis".into(),
                })
            }
        };
        self.pos += 1;
        Ok(Some((start, tok)))
    }
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
    end: usize,
    n: usize,
    m: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Token)> {
        self.tokens.get(self.cursor)
    }

    fn bump(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.cursor).cloned();
        if t.is_some() {
            self.cursor += 1;
        }
        t
    }

    fn err_here(&self, expected: &str) -> ParseExprError {
        let pos = self
            .peek()
            .map(|(p, _)| *p)
            .unwrap_or(self.end);
        ParseExprError::Syntax {
            pos,
            expected: expected.to_string(),
        }
    }

    // expr := term {("+"|"-") term}
    fn expr(&mut self) -> Result<Expr, ParseExprError> {
        let mut acc = self.term()?;
        while let Some((_, tok)) = self.peek() {
            match tok {
                Token::Plus => {
                    self.bump();
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.bump();
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    // term := factor {("*"|"/") factor}
    fn term(&mut self) -> Result<Expr, ParseExprError> {
        let mut acc = self.factor()?;
        while let Some((_, tok)) = self.peek() {
            match tok {
                Token::Star => {
                    self.bump();
                    acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
                }
                Token::Slash => {
                    self.bump();
                    acc = Expr::Div(Box::new(acc), Box::new(self.factor()?));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    // factor := base ["^" integer]; ^ binds tighter than unary minus,
    // so "-x^2" parses as Neg(Pow(x,2)).
    fn factor(&mut self) -> Result<Expr, ParseExprError> {
        if let Some((_, Token::Minus)) = self.peek() {
            self.bump();
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        let base = self.base()?;
        if let Some((_, Token::Caret)) = self.peek() {
            self.bump();
            let k = self.integer_exponent()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn integer_exponent(&mut self) -> Result<i32, ParseExprError> {
        // accepts `2`, `-2`, or `(-2)`
        let mut negate = false;
        let mut parens = false;
        if let Some((_, Token::LParen)) = self.peek() {
            self.bump();
            parens = true;
        }
        if let Some((_, Token::Minus)) = self.peek() {
            self.bump();
            negate = true;
        }
        let (pos, tok) = self.bump().ok_or_else(|| self.err_here("integer exponent"))?;
        let v = match tok {
            Token::Number(v) => v,
            _ => {
                return Err(ParseExprError::Syntax {
                    pos,
                    expected: "integer exponent".into(),
                })
            }
        };
        if v.fract() != 0.0 || v.abs() > i32::MAX as f64 {
            return Err(ParseExprError::Syntax {
                pos,
                expected: "integer exponent".into(),
            });
        }
        if parens {
            match self.bump() {
                Some((_, Token::RParen)) => {}
                _ => return Err(self.err_here("closing parenthesis after exponent")),
            }
        }
        let k = v as i32;
        Ok(if negate { -k } else { k })
    }

    // base := number | ident | "(" expr ")" | func "(" expr ")"
    fn base(&mut self) -> Result<Expr, ParseExprError> {
        let (pos, tok) = self
            .bump()
            .ok_or_else(|| self.err_here("number, identifier or parenthesis"))?;
        match tok {
            Token::Number(v) => Ok(Expr::Const(v)),
            Token::LParen => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((_, Token::RParen)) => Ok(inner),
                    _ => Err(self.err_here("closing parenthesis")),
                }
            }
            Token::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    match self.bump() {
                        Some((_, Token::LParen)) => {}
                        _ => return Err(self.err_here("opening parenthesis after function")),
                    }
                    let arg = self.expr()?;
                    match self.bump() {
                        Some((_, Token::RParen)) => Ok(Expr::Func(func, Box::new(arg))),
                        _ => Err(self.err_here("closing parenthesis")),
                    }
                } else {
                    self.variable(&name, pos)
                }
            }
            _ => Err(ParseExprError::Syntax {
                pos,
                expected: "number, identifier or parenthesis".into(),
            }),
        }
    }

    fn variable(&self, name: &str, pos: usize) -> Result<Expr, ParseExprError> {
        let (kind, digits) = name.split_at(1);
        let index: usize = match digits.parse() {
            Ok(i) => i,
            Err(_) => {
                return Err(ParseExprError::UnknownIdentifier {
                    name: name.to_string(),
                    pos,
                })
            }
        };
        let limit = match kind {
            "x" => self.n,
            "y" => self.m,
            _ => {
                return Err(ParseExprError::UnknownIdentifier {
                    name: name.to_string(),
                    pos,
                })
            }
        };
        if index == 0 || index > limit {
            return Err(ParseExprError::IndexOutOfRange {
                name: name.to_string(),
                pos,
                n: self.n,
                m: self.m,
            });
        }
        Ok(match kind {
            "x" => Expr::Var(VarRef::X(index - 1)),
            _ => Expr::Var(VarRef::Y(index - 1)),
        })
    }
}

/// Parse `text` against declared dimensions `n`, `m`.
pub fn parse_expression(text: &str, n: usize, m: usize) -> Result<Expr, ParseExprError> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    while let Some(t) = lexer.next()? {
        tokens.push(t);
    }
    if tokens.is_empty() {
        return Err(ParseExprError::Syntax {
            pos: 0,
            expected: "non-empty expression".into(),
        });
    }
    let mut parser = Parser {
        tokens,
        cursor: 0,
        end: text.len(),
        n,
        m,
    };
    let e = parser.expr()?;
    if parser.cursor != parser.tokens.len() {
        return Err(parser.err_here("end of expression"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bilinear_minus_quadratic() {
        let e = parse_expression("x1*y1 - 0.5*y1^2", 1, 1).unwrap();
        let expected = Expr::sub(
            Expr::mul(Expr::var_x(0), Expr::var_y(0)),
            Expr::mul(Expr::Const(0.5), Expr::pow(Expr::var_y(0), 2)),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn index_out_of_range() {
        let err = parse_expression("x3", 2, 1).unwrap_err();
        assert!(matches!(err, ParseExprError::IndexOutOfRange { .. }));
        let err = parse_expression("x0", 2, 1).unwrap_err();
        assert!(matches!(err, ParseExprError::IndexOutOfRange { .. }));
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_expression("tan(x1)", 1, 1).unwrap_err();
        assert!(matches!(err, ParseExprError::UnknownIdentifier { .. }));
    }

    #[test]
    fn syntax_error_carries_position() {
        match parse_expression("x1 + ", 1, 1) {
            Err(ParseExprError::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn eval_basics() {
        let e = parse_expression("x1*y1 - 0.5*y1^2", 1, 1).unwrap();
        assert_eq!(e.eval(&[1.0], &[1.0]).unwrap(), 0.5);
    }

    #[test]
    fn eval_domain_errors() {
        let e = parse_expression("log(x1)", 1, 1).unwrap();
        assert!(matches!(
            e.eval(&[-1.0], &[]),
            Err(DomainError::LogNonPositive(_))
        ));
        let e = parse_expression("1/x1", 1, 1).unwrap();
        assert!(matches!(
            e.eval(&[0.0], &[]),
            Err(DomainError::DivisionByZero(_))
        ));
        let e = parse_expression("sqrt(x1)", 1, 1).unwrap();
        assert!(matches!(
            e.eval(&[-0.5], &[]),
            Err(DomainError::SqrtNegative(_))
        ));
    }

    #[test]
    fn serialization_round_trips() {
        let cases = [
            "exp(x1) + sin(y1)",
            "x1*y1 - 0.5*y1^2",
            "-x1^2",
            "(-x1)^2",
            "x1 - (y1 - x2)",
            "x1/(x2*y1)",
            "sqrt(x1 + 2)^3",
            "x1^(-2)",
        ];
        for text in cases {
            let e = parse_expression(text, 2, 1).unwrap();
            let canon = e.to_string();
            let again = parse_expression(&canon, 2, 1).unwrap();
            assert_eq!(e, again, "round-trip failed for `{text}` -> `{canon}`");
        }
    }

    #[test]
    fn precedence_pow_over_neg() {
        // ^ binds tighter than unary minus
        let e = parse_expression("-x1^2", 1, 0).unwrap();
        assert_eq!(e, Expr::Neg(Box::new(Expr::pow(Expr::var_x(0), 2))));
        assert_eq!(e.eval(&[3.0], &[]).unwrap(), -9.0);
    }

    #[test]
    fn pow_is_integer_only() {
        assert!(parse_expression("x1^0.5", 1, 0).is_err());
    }
}
