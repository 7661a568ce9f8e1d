//! Local algebraic rewrites. Guaranteed: `0+e → e`, `0*e → 0`, `1*e → e`,
//! `e^1 → e` and constant folding. The result is not canonical.

use super::eval::{apply_binary, apply_unary};
use super::{BinaryOp, Expr, UnaryOp};

fn fold_unary(op: UnaryOp, c: f64) -> Option<Expr> {
    apply_unary(op, c).ok().filter(|v| v.is_finite()).map(Expr::Const)
}

fn fold_binary(op: BinaryOp, a: f64, b: f64) -> Option<Expr> {
    apply_binary(op, a, b).ok().filter(|v| v.is_finite()).map(Expr::Const)
}

impl Expr {
    /// Negation with local rewrites.
    pub fn neg_s(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Unary(UnaryOp::Neg, inner) => (*inner).clone(),
            Expr::Binary(BinaryOp::Sub, p, q) => Expr::Binary(BinaryOp::Sub, q, p),
            other => Expr::unary(UnaryOp::Neg, other),
        }
    }

    pub fn unary_s(op: UnaryOp, a: Expr) -> Expr {
        if op == UnaryOp::Neg {
            return Expr::neg_s(a);
        }
        if let Expr::Const(c) = a {
            if let Some(folded) = fold_unary(op, c) {
                return folded;
            }
        }
        Expr::unary(op, a)
    }

    pub fn add_s(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(p), Expr::Const(q)) => {
                if let Some(f) = fold_binary(BinaryOp::Add, *p, *q) {
                    return f;
                }
            }
            _ if a.is_zero() => return b,
            _ if b.is_zero() => return a,
            (_, Expr::Unary(UnaryOp::Neg, q)) => return Expr::sub_s(a.clone(), (**q).clone()),
            (Expr::Unary(UnaryOp::Neg, p), _) => return Expr::sub_s(b.clone(), (**p).clone()),
            (_, Expr::Const(q)) if *q < 0.0 => return Expr::sub_s(a.clone(), Expr::Const(-q)),
            _ if a == b => return Expr::mul_s(Expr::Const(2.0), a),
            _ => {}
        }
        Expr::binary(BinaryOp::Add, a, b)
    }

    pub fn sub_s(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(p), Expr::Const(q)) => {
                if let Some(f) = fold_binary(BinaryOp::Sub, *p, *q) {
                    return f;
                }
            }
            _ if b.is_zero() => return a,
            _ if a.is_zero() => return Expr::neg_s(b),
            _ if a == b => return Expr::ZERO,
            (_, Expr::Unary(UnaryOp::Neg, q)) => return Expr::add_s(a.clone(), (**q).clone()),
            _ => {}
        }
        Expr::binary(BinaryOp::Sub, a, b)
    }

    pub fn mul_s(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(p), Expr::Const(q)) => {
                if let Some(f) = fold_binary(BinaryOp::Mul, *p, *q) {
                    return f;
                }
            }
            _ if a.is_zero() || b.is_zero() => return Expr::ZERO,
            _ if a.is_one() => return b,
            _ if b.is_one() => return a,
            (Expr::Const(p), _) if *p == -1.0 => return Expr::neg_s(b),
            (_, Expr::Const(_)) => return Expr::mul_s(b, a),
            (Expr::Const(p), Expr::Binary(BinaryOp::Mul, l, r)) => {
                if let Expr::Const(q) = **l {
                    return Expr::mul_s(Expr::Const(p * q), (**r).clone());
                }
            }
            (Expr::Unary(UnaryOp::Neg, p), _) => return Expr::neg_s(Expr::mul_s((**p).clone(), b)),
            (_, Expr::Unary(UnaryOp::Neg, q)) => return Expr::neg_s(Expr::mul_s(a, (**q).clone())),
            _ => {}
        }
        Expr::binary(BinaryOp::Mul, a, b)
    }

    pub fn div_s(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(p), Expr::Const(q)) => {
                if let Some(f) = fold_binary(BinaryOp::Div, *p, *q) {
                    return f;
                }
            }
            _ if b.is_one() => return a,
            _ if a.is_zero() && !b.is_zero() => return Expr::ZERO,
            _ => {}
        }
        Expr::binary(BinaryOp::Div, a, b)
    }

    pub fn pow_s(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(p), Expr::Const(q)) => {
                if let Some(f) = fold_binary(BinaryOp::Pow, *p, *q) {
                    return f;
                }
            }
            _ if b.is_zero() => return Expr::ONE,
            _ if b.is_one() => return a,
            _ if a.is_one() => return Expr::ONE,
            _ => {}
        }
        Expr::binary(BinaryOp::Pow, a, b)
    }

    pub fn binary_s(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinaryOp::Add => Expr::add_s(a, b),
            BinaryOp::Sub => Expr::sub_s(a, b),
            BinaryOp::Mul => Expr::mul_s(a, b),
            BinaryOp::Div => Expr::div_s(a, b),
            BinaryOp::Pow => Expr::pow_s(a, b),
        }
    }

    /// Bottom-up application of the local rewrites.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => Expr::unary_s(*op, a.simplify()),
            Expr::Binary(op, a, b) => Expr::binary_s(*op, a.simplify(), b.simplify()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ChartPoint};

    fn s(src: &str) -> Expr {
        parse(src, 2).unwrap().simplify()
    }

    #[test]
    fn annihilator_and_identities() {
        assert_eq!(s("0*y1 + x1"), Expr::x(0));
        assert_eq!(s("1*x1 + 0"), Expr::x(0));
        assert_eq!(s("x1^1"), Expr::x(0));
        assert_eq!(s("x1^0"), Expr::ONE);
        assert_eq!(s("x1 - x1"), Expr::ZERO);
        assert_eq!(s("--y2"), Expr::y(1));
    }

    #[test]
    fn constant_folding() {
        assert_eq!(s("2+3"), Expr::Const(5.0));
        assert_eq!(s("2*(3*x1)"), Expr::Const(6.0) * Expr::x(0));
        assert_eq!(s("exp(0)*t"), Expr::t());
        // log(-1) has no real value, so it is left in place
        assert_eq!(s("log(-1)"), Expr::Const(-1.0).log());
    }

    #[test]
    fn trig_identity_is_not_rewritten() {
        let src = "sin(x1)^2 + cos(x1)^2";
        assert_eq!(s(src), parse(src, 2).unwrap());
    }

    #[test]
    fn simplify_preserves_values() {
        let e = parse("(0*x1 + 1*y1)*(x2 - -y2) + -(t*-1) - (x1 - x1)^1", 2).unwrap();
        let simplified = e.simplify();
        assert!(simplified.size() < e.size());
        let p = ChartPoint::new(0.3, vec![0.7, -1.1], vec![0.2, 1.9]);
        let a = e.evaluate(&p).unwrap();
        let b = simplified.evaluate(&p).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}
