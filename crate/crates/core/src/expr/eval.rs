use thiserror::Error;

use super::{BinaryOp, ChartPoint, Expr, UnaryOp, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainErrorKind {
    DivisionByZero,
    LogOfNonPositive,
    SqrtOfNegative,
    ZeroToNegativePower,
    NegativeBaseFractionalPower,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error ({kind:?}) in `{subexpr}`")]
    Domain { kind: DomainErrorKind, subexpr: String },
    #[error("variable {var} is not defined at a point of dimension {n}")]
    UnboundVariable { var: Var, n: usize },
}

impl EvalError {
    fn domain(kind: DomainErrorKind, e: &Expr) -> Self {
        EvalError::Domain { kind, subexpr: e.to_string() }
    }
}

/// Applies a unary op to a value; errors outside its real domain.
pub(super) fn apply_unary(op: UnaryOp, a: f64) -> Result<f64, DomainErrorKind> {
    Ok(match op {
        UnaryOp::Neg => -a,
        UnaryOp::Sin => a.sin(),
        UnaryOp::Cos => a.cos(),
        UnaryOp::Exp => a.exp(),
        UnaryOp::Log => {
            if a <= 0.0 {
                return Err(DomainErrorKind::LogOfNonPositive);
            }
            a.ln()
        }
        UnaryOp::Sqrt => {
            if a < 0.0 {
                return Err(DomainErrorKind::SqrtOfNegative);
            }
            a.sqrt()
        }
    })
}

pub(super) fn apply_binary(op: BinaryOp, a: f64, b: f64) -> Result<f64, DomainErrorKind> {
    Ok(match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => {
            if b == 0.0 {
                return Err(DomainErrorKind::DivisionByZero);
            }
            a / b
        }
        BinaryOp::Pow => {
            if a == 0.0 && b < 0.0 {
                return Err(DomainErrorKind::ZeroToNegativePower);
            }
            if a < 0.0 && b.fract() != 0.0 {
                return Err(DomainErrorKind::NegativeBaseFractionalPower);
            }
            if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
                a.powi(b as i32)
            } else {
                a.powf(b)
            }
        }
    })
}

impl Expr {
    /// Evaluates the expression at a chart point.
    pub fn evaluate(&self, p: &ChartPoint) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => p.get(*v).ok_or(EvalError::UnboundVariable { var: *v, n: p.dim() })?,
            Expr::Unary(op, a) => {
                let a = a.evaluate(p)?;
                apply_unary(*op, a).map_err(|k| EvalError::domain(k, self))?
            }
            Expr::Binary(op, a, b) => {
                let a = a.evaluate(p)?;
                let b = b.evaluate(p)?;
                apply_binary(*op, a, b).map_err(|k| EvalError::domain(k, self))?
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::domain(DomainErrorKind::NonFinite, self))
        }
    }
}
