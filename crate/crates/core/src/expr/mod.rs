//! Symbolic scalar expressions over the chart variables `t`, `x1..xn`,
//! `y1..yn`.
//!
//! Expressions are immutable trees with shared (`Arc`) children, so cloning is
//! cheap and values can be evaluated from many threads at once. The text
//! grammar accepted by [`parse`] is the same one produced by the `Display`
//! implementation:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 't' | 'x'<i> | 'y'<i> | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | log | sqrt
//! ```
//!
//! `^` is right-associative and binds tighter than a unary minus applied to
//! its base, so `-x1^2` is `-(x1^2)`. A minus sign directly in front of a
//! numeric literal (and not followed by `^`) is folded into a negative
//! constant.

mod diff;
mod eval;
mod parse;
mod simplify;

use std::fmt;
use std::sync::Arc;

pub use eval::{DomainErrorKind, EvalError};
pub use parse::{parse, ParseError};

/// A chart coordinate. Indices are zero-based; `X(0)` prints as `x1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T,
    X(usize),
    Y(usize),
}

impl Var {
    /// Position in the flat coordinate list `(t, x1..xn, y1..yn)`.
    pub fn chart_index(self, n: usize) -> usize {
        match self {
            Var::T => 0,
            Var::X(i) => 1 + i,
            Var::Y(i) => 1 + n + i,
        }
    }

    pub fn from_chart_index(index: usize, n: usize) -> Var {
        assert!(index < 2 * n + 1, "chart index {index} out of range for n = {n}");
        if index == 0 {
            Var::T
        } else if index <= n {
            Var::X(index - 1)
        } else {
            Var::Y(index - 1 - n)
        }
    }

    /// All `2n + 1` chart variables in chart order.
    pub fn all(n: usize) -> impl Iterator<Item = Var> {
        (0..2 * n + 1).map(move |i| Var::from_chart_index(i, n))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T => write!(f, "t"),
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Y(i) => write!(f, "y{}", i + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl UnaryOp {
    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Expression tree node.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
}

impl Expr {
    pub const ZERO: Expr = Expr::Const(0.0);
    pub const ONE: Expr = Expr::Const(1.0);

    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn t() -> Expr {
        Expr::Var(Var::T)
    }

    pub fn x(i: usize) -> Expr {
        Expr::Var(Var::X(i))
    }

    pub fn y(i: usize) -> Expr {
        Expr::Var(Var::Y(i))
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        Expr::Unary(op, Arc::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Arc::new(a), Arc::new(b))
    }

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::binary(BinaryOp::Pow, self, exponent)
    }

    pub fn sin(self) -> Expr {
        Expr::unary(UnaryOp::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::unary(UnaryOp::Cos, self)
    }

    pub fn exp(self) -> Expr {
        Expr::unary(UnaryOp::Exp, self)
    }

    pub fn log(self) -> Expr {
        Expr::unary(UnaryOp::Log, self)
    }

    pub fn sqrt(self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    pub fn contains_var(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Unary(_, a) => a.contains_var(v),
            Expr::Binary(_, a, b) => a.contains_var(v) || b.contains_var(v),
        }
    }

    /// Largest zero-based variable index used by `X`/`Y` nodes, if any.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            Expr::Const(_) | Expr::Var(Var::T) => None,
            Expr::Var(Var::X(i)) | Expr::Var(Var::Y(i)) => Some(*i),
            Expr::Unary(_, a) => a.max_index(),
            Expr::Binary(_, a, b) => match (a.max_index(), b.max_index()) {
                (Some(p), Some(q)) => Some(p.max(q)),
                (p, q) => p.or(q),
            },
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(c) if c.is_sign_negative() => 3,
            Expr::Const(_) | Expr::Var(_) => 5,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Unary(..) => 5,
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Binary(BinaryOp::Pow, ..) => 4,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() >= min_prec {
        write!(f, "{e}")
    } else {
        write!(f, "({e})")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Unary(UnaryOp::Neg, a) => {
                // `-(2)` keeps the node a negation instead of folding into a literal.
                if matches!(**a, Expr::Const(_)) {
                    write!(f, "-({a})")
                } else {
                    write!(f, "-")?;
                    write_child(f, a, 3)
                }
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => {
                let (sym, left, right) = match op {
                    BinaryOp::Add => (" + ", 1, 2),
                    BinaryOp::Sub => (" - ", 1, 2),
                    BinaryOp::Mul => ("*", 2, 3),
                    BinaryOp::Div => ("/", 2, 3),
                    BinaryOp::Pow => ("^", 5, 3),
                };
                write_child(f, a, left)?;
                write!(f, "{sym}")?;
                write_child(f, b, right)
            }
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Add, self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Sub, self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Mul, self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::binary(BinaryOp::Div, self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

impl From<f64> for Expr {
    fn from(value: f64) -> Self {
        Expr::Const(value)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::Var(v)
    }
}

/// A point `(t, x, y)` of the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl ChartPoint {
    pub fn new(t: f64, x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len(), "x and y must have the same dimension");
        ChartPoint { t, x, y }
    }

    pub fn origin(n: usize) -> Self {
        ChartPoint::new(0.0, vec![0.0; n], vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Value of a chart variable, `None` when its index exceeds the dimension.
    pub fn get(&self, v: Var) -> Option<f64> {
        match v {
            Var::T => Some(self.t),
            Var::X(i) => self.x.get(i).copied(),
            Var::Y(i) => self.y.get(i).copied(),
        }
    }

    /// Flat coordinates `(t, x1..xn, y1..yn)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(2 * self.dim() + 1);
        c.push(self.t);
        c.extend_from_slice(&self.x);
        c.extend_from_slice(&self.y);
        c
    }

    pub fn from_coords(n: usize, coords: &[f64]) -> Self {
        assert_eq!(coords.len(), 2 * n + 1);
        ChartPoint::new(coords[0], coords[1..=n].to_vec(), coords[n + 1..].to_vec())
    }

    /// Copy of the point with chart coordinate `index` shifted by `delta`.
    pub fn shifted(&self, index: usize, delta: f64) -> Self {
        let mut p = self.clone();
        let n = self.dim();
        match Var::from_chart_index(index, n) {
            Var::T => p.t += delta,
            Var::X(i) => p.x[i] += delta,
            Var::Y(i) => p.y[i] += delta,
        }
        p
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }
}

/// Central finite difference of `e` along `v` at `p` with step `h`.
pub fn central_difference(e: &Expr, v: Var, p: &ChartPoint, h: f64) -> Result<f64, EvalError> {
    let n = p.dim();
    let idx = v.chart_index(n);
    let plus = e.evaluate(&p.shifted(idx, h))?;
    let minus = e.evaluate(&p.shifted(idx, -h))?;
    Ok((plus - minus) / (2.0 * h))
}
