#![allow(dead_code)]

use galilean_core::expr::{BinaryOp, UnaryOp};
use galilean_core::{ChartPoint, Expr, NormalizationChoice, SecondOrderSystem, Var};
use nalgebra::DMatrix;
use proptest::prelude::*;

pub fn var(n: usize) -> impl Strategy<Value = Var> {
    (0..2 * n + 1).prop_map(move |i| Var::from_chart_index(i, n))
}

/// Smooth expressions over the chart: no division, logs or roots, and only
/// small integer powers, so every point of the unit box is in the domain.
pub fn smooth_expr(n: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i32..=3).prop_map(|c| Expr::Const(c as f64 * 0.5)),
        var(n).prop_map(Expr::Var),
        var(n).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Mul, a, b)),
            (inner.clone(), 2i32..=3).prop_map(|(a, k)| Expr::binary(BinaryOp::Pow, a, Expr::Const(k as f64))),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Sin, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Cos, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Neg, a)),
        ]
    })
}

/// Shallow smooth expressions, small enough for symbolic curvature.
pub fn small_expr(n: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i32..=3).prop_map(|c| Expr::Const(c as f64 * 0.5)),
        var(n).prop_map(Expr::Var),
        var(n).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Mul, a, b)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Sin, a)),
        ]
    })
}

/// Expressions that may leave their domain somewhere.
pub fn any_expr(n: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(-4i32..=4).prop_map(|c| Expr::Const(c as f64 * 0.25)), var(n).prop_map(Expr::Var)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Mul, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Div, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Pow, a, b)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Sin, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Exp, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Log, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Sqrt, a)),
            inner.clone().prop_map(|a| Expr::unary(UnaryOp::Neg, a)),
        ]
    })
}

pub fn point(n: usize, half_width: f64) -> impl Strategy<Value = ChartPoint> {
    proptest::collection::vec(-half_width..=half_width, 2 * n + 1).prop_map(move |c| ChartPoint::from_coords(n, &c))
}

/// `n` smooth Γ components.
pub fn gamma(n: usize) -> impl Strategy<Value = Vec<Expr>> {
    proptest::collection::vec(small_expr(n), n)
}

/// Γ together with its dimension, for `n` in `1..=max_n`.
pub fn system(max_n: usize) -> impl Strategy<Value = SecondOrderSystem> {
    (1..=max_n).prop_flat_map(gamma).prop_map(|g| SecondOrderSystem::new(g).unwrap())
}

/// A normalization with arbitrary `D` and symmetric `Qsym`.
pub fn normalization(n: usize) -> impl Strategy<Value = NormalizationChoice> {
    let d = proptest::collection::vec(proptest::collection::vec(small_expr(n), n), n);
    let q = proptest::collection::vec(small_expr(n), n * n * n);
    (d, q).prop_map(move |(d, q)| {
        let mut qsym = vec![vec![vec![Expr::ZERO; n]; n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (a, b) = (j.min(k), j.max(k));
                    qsym[i][j][k] = q[(i * n + a) * n + b].clone();
                }
            }
        }
        NormalizationChoice::new(d, qsym).unwrap()
    })
}

/// An invertible matrix near the identity.
pub fn gauge_matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-0.3..0.3f64, n * n)
        .prop_map(move |v| DMatrix::identity(n, n) + DMatrix::from_vec(n, n, v))
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
