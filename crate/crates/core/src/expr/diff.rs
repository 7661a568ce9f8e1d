use super::{BinaryOp, Expr, UnaryOp, Var};

impl Expr {
    /// Exact partial derivative with respect to `v`, simplified.
    pub fn differentiate(&self, v: Var) -> Expr {
        self.derive(v).simplify()
    }

    /// Iterated partial derivative, e.g. `[Y(0), Y(1)]` for `∂²/∂y1∂y2`.
    pub fn differentiate_many(&self, vars: &[Var]) -> Expr {
        vars.iter().fold(self.clone(), |acc, v| acc.differentiate(*v))
    }

    fn derive(&self, v: Var) -> Expr {
        if !self.contains_var(v) {
            return Expr::ZERO;
        }
        match self {
            Expr::Const(_) => Expr::ZERO,
            Expr::Var(w) => {
                if *w == v {
                    Expr::ONE
                } else {
                    Expr::ZERO
                }
            }
            Expr::Unary(op, a) => {
                let a = (**a).clone();
                let da = a.derive(v);
                let outer = match op {
                    UnaryOp::Neg => return Expr::neg_s(da),
                    UnaryOp::Sin => Expr::unary_s(UnaryOp::Cos, a),
                    UnaryOp::Cos => Expr::neg_s(Expr::unary_s(UnaryOp::Sin, a)),
                    UnaryOp::Exp => self.clone(),
                    UnaryOp::Log => return Expr::div_s(da, a),
                    UnaryOp::Sqrt => return Expr::div_s(da, Expr::mul_s(Expr::Const(2.0), self.clone())),
                };
                Expr::mul_s(outer, da)
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinaryOp::Add => Expr::add_s(a.derive(v), b.derive(v)),
                    BinaryOp::Sub => Expr::sub_s(a.derive(v), b.derive(v)),
                    BinaryOp::Mul => {
                        let da = a.derive(v);
                        let db = b.derive(v);
                        Expr::add_s(Expr::mul_s(da, b), Expr::mul_s(a, db))
                    }
                    BinaryOp::Div => {
                        let da = a.derive(v);
                        let db = b.derive(v);
                        let num = Expr::sub_s(Expr::mul_s(da, b.clone()), Expr::mul_s(a, db));
                        Expr::div_s(num, Expr::pow_s(b, Expr::Const(2.0)))
                    }
                    BinaryOp::Pow => {
                        if !b.contains_var(v) {
                            // b * a^(b-1) * a'
                            let lowered = match b.as_const() {
                                Some(c) => Expr::Const(c - 1.0),
                                None => Expr::sub_s(b.clone(), Expr::ONE),
                            };
                            let da = a.derive(v);
                            Expr::mul_s(b, Expr::mul_s(Expr::pow_s(a, lowered), da))
                        } else {
                            // a^b * (b' log a + b a'/a)
                            let da = a.derive(v);
                            let db = b.derive(v);
                            let log_term = Expr::mul_s(db, Expr::unary_s(UnaryOp::Log, a.clone()));
                            let ratio = Expr::mul_s(b, Expr::div_s(da, a));
                            Expr::mul_s(self.clone(), Expr::add_s(log_term, ratio))
                        }
                    }
                }
            }
        }
    }
}
