//! Nonlinear connections on `TJ¹(ℝ, ℝⁿ)` and the affine covariant
//! derivative they carry.
//!
//! A semispray `Γ` and horizontal coefficients `N` give the adapted frame
//!
//! ```text
//! d/dt = ∂t + yʲ ∂xⱼ − Γʲ ∂yⱼ
//! δₖ   = ∂xₖ − Nʲₖ ∂yⱼ
//! ∂yₖ
//! ```
//!
//! and a covariant derivative `∇` defined on frame fields by a fixed table
//! with coefficients `N` and `Γˡⱼₖ`. Its torsion and the frame commutators
//! are computed symbolically.

use std::fmt;

use crate::connection::{GalileanConnection, SecondOrderSystem};
use crate::expr::{ChartPoint, EvalError, Expr, Var};

/// `Γ`, `N` and the symmetric coefficients `Γˡⱼₖ` used by `∇`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearConnection {
    n: usize,
    gamma: Vec<Expr>,
    nfield: Vec<Vec<Expr>>,
    affine: Vec<Vec<Vec<Expr>>>,
}

impl NonlinearConnection {
    /// # Panics
    /// If the shapes are inconsistent.
    pub fn new(gamma: Vec<Expr>, nfield: Vec<Vec<Expr>>, affine: Vec<Vec<Vec<Expr>>>) -> Self {
        let n = gamma.len();
        assert!(nfield.len() == n && nfield.iter().all(|r| r.len() == n), "N must be n×n");
        assert!(
            affine.len() == n && affine.iter().all(|b| b.len() == n && b.iter().all(|r| r.len() == n)),
            "Γˡⱼₖ must be n×n×n"
        );
        NonlinearConnection { n, gamma, nfield, affine }
    }

    /// `N = ½ ∂Γ/∂y`, `Γˡⱼₖ = ½ ∂²Γˡ/∂yʲ∂yᵏ`.
    pub fn chern(sys: &SecondOrderSystem) -> Self {
        let n = sys.dim();
        let half = Expr::Const(0.5);
        let g = sys.gamma();
        let nfield = (0..n)
            .map(|i| (0..n).map(|j| Expr::mul_s(half.clone(), g[i].differentiate(Var::Y(j)))).collect())
            .collect();
        let affine = (0..n)
            .map(|l| {
                (0..n)
                    .map(|j| {
                        (0..n)
                            .map(|k| Expr::mul_s(half.clone(), g[l].differentiate_many(&[Var::Y(j), Var::Y(k)])))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        NonlinearConnection { n, gamma: g.to_vec(), nfield, affine }
    }

    /// Reads `Γ`, `N` and `Γˡⱼₖ` off a Cartan connection built on the
    /// canonical section.
    pub fn from_galilean(conn: &GalileanConnection) -> Self {
        NonlinearConnection::new(conn.system().gamma().to_vec(), conn.n_matrix().to_vec(), conn.affine().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> &[Expr] {
        &self.gamma
    }

    pub fn nfield(&self) -> &[Vec<Expr>] {
        &self.nfield
    }

    pub fn affine(&self) -> &[Vec<Vec<Expr>>] {
        &self.affine
    }
}

/// A member of the adapted frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrameIndex {
    /// `d/dt`.
    Time,
    /// `δₖ`, 0-based.
    Horizontal(usize),
    /// `∂yₖ`, 0-based.
    Vertical(usize),
}

impl FrameIndex {
    pub fn all(n: usize) -> impl Iterator<Item = FrameIndex> {
        std::iter::once(FrameIndex::Time)
            .chain((0..n).map(FrameIndex::Horizontal))
            .chain((0..n).map(FrameIndex::Vertical))
    }
}

impl fmt::Display for FrameIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameIndex::Time => write!(f, "d/dt"),
            FrameIndex::Horizontal(k) => write!(f, "δ/δx{}", k + 1),
            FrameIndex::Vertical(k) => write!(f, "∂/∂y{}", k + 1),
        }
    }
}

/// `a d/dt + bʲ δⱼ + eʲ ∂yⱼ`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedVectorField {
    pub time: Expr,
    pub horizontal: Vec<Expr>,
    pub vertical: Vec<Expr>,
}

/// `c_t ∂t + c_xʲ ∂xⱼ + c_yʲ ∂yⱼ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateVectorField {
    pub t: Expr,
    pub x: Vec<Expr>,
    pub y: Vec<Expr>,
}

fn eval_all(es: &[Expr], p: &ChartPoint) -> Result<Vec<f64>, EvalError> {
    es.iter().map(|e| e.evaluate(p)).collect()
}

impl AdaptedVectorField {
    pub fn zero(n: usize) -> Self {
        AdaptedVectorField { time: Expr::ZERO, horizontal: vec![Expr::ZERO; n], vertical: vec![Expr::ZERO; n] }
    }

    /// # Panics
    /// If the frame index is out of range.
    pub fn basis(n: usize, index: FrameIndex) -> Self {
        let mut v = AdaptedVectorField::zero(n);
        match index {
            FrameIndex::Time => v.time = Expr::ONE,
            FrameIndex::Horizontal(k) => v.horizontal[k] = Expr::ONE,
            FrameIndex::Vertical(k) => v.vertical[k] = Expr::ONE,
        }
        v
    }

    pub fn dim(&self) -> usize {
        self.horizontal.len()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Expr, Expr) -> Expr) -> Self {
        let pair = |a: &[Expr], b: &[Expr]| a.iter().zip(b).map(|(x, y)| f(x.clone(), y.clone())).collect();
        AdaptedVectorField {
            time: f(self.time.clone(), other.time.clone()),
            horizontal: pair(&self.horizontal, &other.horizontal),
            vertical: pair(&self.vertical, &other.vertical),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, Expr::add_s)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, Expr::sub_s)
    }

    pub fn scale(&self, f: &Expr) -> Self {
        let s = |e: &Expr| Expr::mul_s(f.clone(), e.clone());
        AdaptedVectorField {
            time: s(&self.time),
            horizontal: self.horizontal.iter().map(s).collect(),
            vertical: self.vertical.iter().map(s).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.time.is_zero() && self.horizontal.iter().chain(&self.vertical).all(Expr::is_zero)
    }

    /// `[a, b¹..bⁿ, e¹..eⁿ]` at `p`.
    pub fn evaluate(&self, p: &ChartPoint) -> Result<Vec<f64>, EvalError> {
        let mut out = vec![self.time.evaluate(p)?];
        out.extend(eval_all(&self.horizontal, p)?);
        out.extend(eval_all(&self.vertical, p)?);
        Ok(out)
    }
}

impl CoordinateVectorField {
    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `V(f) = Vᵃ ∂ₐ f`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut acc = Expr::mul_s(self.t.clone(), f.differentiate(Var::T));
        for (i, (cx, cy)) in self.x.iter().zip(&self.y).enumerate() {
            acc = Expr::add_s(acc, Expr::mul_s(cx.clone(), f.differentiate(Var::X(i))));
            acc = Expr::add_s(acc, Expr::mul_s(cy.clone(), f.differentiate(Var::Y(i))));
        }
        acc
    }

    /// `[U, V]ᵃ = U(Vᵃ) − V(Uᵃ)`.
    pub fn bracket(&self, other: &Self) -> Self {
        let comp = |a: &Expr, b: &Expr| Expr::sub_s(self.apply(b), other.apply(a));
        CoordinateVectorField {
            t: comp(&self.t, &other.t),
            x: self.x.iter().zip(&other.x).map(|(a, b)| comp(a, b)).collect(),
            y: self.y.iter().zip(&other.y).map(|(a, b)| comp(a, b)).collect(),
        }
    }

    /// `[c_t, c_x.., c_y..]` at `p`.
    pub fn evaluate(&self, p: &ChartPoint) -> Result<Vec<f64>, EvalError> {
        let mut out = vec![self.t.evaluate(p)?];
        out.extend(eval_all(&self.x, p)?);
        out.extend(eval_all(&self.y, p)?);
        Ok(out)
    }
}

/// `a ∂t + (a yʲ + bʲ) ∂xⱼ + (eʲ − aΓʲ − Nʲₖbᵏ) ∂yⱼ`.
pub fn to_coordinate_frame(v: &AdaptedVectorField, conn: &NonlinearConnection) -> CoordinateVectorField {
    let n = conn.dim();
    let a = v.time.clone();
    let x = (0..n).map(|j| Expr::add_s(Expr::mul_s(a.clone(), Expr::y(j)), v.horizontal[j].clone())).collect();
    let y = (0..n)
        .map(|j| {
            let mut c = Expr::sub_s(v.vertical[j].clone(), Expr::mul_s(a.clone(), conn.gamma[j].clone()));
            for k in 0..n {
                c = Expr::sub_s(c, Expr::mul_s(conn.nfield[j][k].clone(), v.horizontal[k].clone()));
            }
            c
        })
        .collect();
    CoordinateVectorField { t: a, x, y }
}

/// Inverse of [`to_coordinate_frame`]: `a = c_t`, `bʲ = c_xʲ − a yʲ`,
/// `eᵏ = c_yᵏ + aΓᵏ + Nᵏⱼbʲ`.
pub fn from_coordinate_frame(c: &CoordinateVectorField, conn: &NonlinearConnection) -> AdaptedVectorField {
    let n = conn.dim();
    let a = c.t.clone();
    let b: Vec<Expr> = (0..n).map(|j| Expr::sub_s(c.x[j].clone(), Expr::mul_s(a.clone(), Expr::y(j)))).collect();
    let e = (0..n)
        .map(|k| {
            let mut acc = Expr::add_s(c.y[k].clone(), Expr::mul_s(a.clone(), conn.gamma[k].clone()));
            for (j, bj) in b.iter().enumerate() {
                acc = Expr::add_s(acc, Expr::mul_s(conn.nfield[k][j].clone(), bj.clone()));
            }
            acc
        })
        .collect();
    AdaptedVectorField { time: a, horizontal: b, vertical: e }
}

/// Lie bracket of two adapted fields, returned in the adapted frame.
pub fn commutator(u: &AdaptedVectorField, v: &AdaptedVectorField, conn: &NonlinearConnection) -> AdaptedVectorField {
    let cu = to_coordinate_frame(u, conn);
    let cv = to_coordinate_frame(v, conn);
    from_coordinate_frame(&cu.bracket(&cv), conn)
}

/// `∇_X Y` for frame fields `X`, `Y`:
///
/// ```text
/// ∇_X d/dt = 0
/// ∇_{d/dt} δₖ = Nʲₖ δⱼ        ∇_{d/dt} ∂yₖ = Nʲₖ ∂yⱼ
/// ∇_{δⱼ} δₖ  = Γˡⱼₖ δₗ        ∇_{δⱼ} ∂yₖ  = 0
/// ∇_{∂yₖ} δⱼ = 0              ∇_{∂yⱼ} ∂yₖ = Γˡⱼₖ ∂yₗ
/// ```
pub fn covariant_derivative(x: FrameIndex, y: FrameIndex, conn: &NonlinearConnection) -> AdaptedVectorField {
    use FrameIndex::*;
    let n = conn.dim();
    let mut out = AdaptedVectorField::zero(n);
    match (x, y) {
        (_, Time) | (Vertical(_), Horizontal(_)) | (Horizontal(_), Vertical(_)) => {}
        (Time, Horizontal(k)) => out.horizontal = (0..n).map(|j| conn.nfield[j][k].clone()).collect(),
        (Time, Vertical(k)) => out.vertical = (0..n).map(|j| conn.nfield[j][k].clone()).collect(),
        (Horizontal(j), Horizontal(k)) => out.horizontal = (0..n).map(|l| conn.affine[l][j][k].clone()).collect(),
        (Vertical(j), Vertical(k)) => out.vertical = (0..n).map(|l| conn.affine[l][j][k].clone()).collect(),
    }
    out
}

/// `T(X, Y) = ∇_X Y − ∇_Y X − [X, Y]`.
pub fn torsion(x: FrameIndex, y: FrameIndex, conn: &NonlinearConnection) -> AdaptedVectorField {
    let n = conn.dim();
    let bracket = commutator(&AdaptedVectorField::basis(n, x), &AdaptedVectorField::basis(n, y), conn);
    covariant_derivative(x, y, conn).sub(&covariant_derivative(y, x, conn)).sub(&bracket)
}

/// `−δₖ + (∂Γʲ/∂yᵏ − 2Nʲₖ) ∂yⱼ`, the closed form of `T(∂yₖ, d/dt)`.
pub fn vertical_time_torsion_formula(k: usize, conn: &NonlinearConnection) -> AdaptedVectorField {
    let n = conn.dim();
    let mut out = AdaptedVectorField::zero(n);
    out.horizontal[k] = Expr::Const(-1.0);
    out.vertical = (0..n)
        .map(|j| {
            Expr::sub_s(
                conn.gamma[j].differentiate(Var::Y(k)),
                Expr::mul_s(Expr::Const(2.0), conn.nfield[j][k].clone()),
            )
        })
        .collect();
    out
}

/// Pointwise comparison of the adapted-frame torsion with the Cartan side.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AppendixReport {
    pub points_checked: usize,
    /// `T(∂yₖ, d/dt)` against its closed form.
    pub formula_residual: f64,
    /// Largest vertical component of `T(∂yₖ, d/dt)`; zero iff `N = ½∂Γ/∂y`.
    pub vertical_torsion: f64,
    /// `T(δⱼ, δₖ)` against the torsion tensor extracted from the curvature.
    pub horizontal_torsion_residual: f64,
    /// Largest component among the frame commutators.
    pub max_commutator: f64,
    /// Points where evaluation failed, with the reason.
    pub skipped: Vec<(ChartPoint, String)>,
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Evaluates torsion and commutators of the frame of `conn` at `points`
/// and compares them with the invariants of the Cartan connection.
pub fn appendix_check(conn: &GalileanConnection, points: &[ChartPoint]) -> AppendixReport {
    let nl = NonlinearConnection::from_galilean(conn);
    let n = nl.dim();
    let frame: Vec<FrameIndex> = FrameIndex::all(n).collect();
    let brackets: Vec<AdaptedVectorField> = frame
        .iter()
        .enumerate()
        .flat_map(|(i, x)| frame[i + 1..].iter().map(move |y| (*x, *y)))
        .map(|(x, y)| commutator(&AdaptedVectorField::basis(n, x), &AdaptedVectorField::basis(n, y), &nl))
        .collect();
    let vt: Vec<(AdaptedVectorField, AdaptedVectorField)> = (0..n)
        .map(|k| (torsion(FrameIndex::Vertical(k), FrameIndex::Time, &nl), vertical_time_torsion_formula(k, &nl)))
        .collect();
    let hh: Vec<(usize, usize, AdaptedVectorField)> = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .map(|(j, k)| (j, k, torsion(FrameIndex::Horizontal(j), FrameIndex::Horizontal(k), &nl)))
        .collect();

    let mut report = AppendixReport::default();
    for p in points {
        let step = || -> Result<(f64, f64, f64, f64), String> {
            let mut formula: f64 = 0.0;
            let mut vertical: f64 = 0.0;
            for (t, f) in &vt {
                let tv = t.evaluate(p).map_err(|e| e.to_string())?;
                let fv = f.evaluate(p).map_err(|e| e.to_string())?;
                formula = formula.max(max_abs(&tv.iter().zip(&fv).map(|(a, b)| a - b).collect::<Vec<_>>()));
                vertical = vertical.max(max_abs(&tv[1 + n..]));
            }
            let inv = crate::connection::extract_invariants(conn, p).map_err(|e| e.to_string())?;
            let mut horizontal: f64 = 0.0;
            for (j, k, t) in &hh {
                let tv = t.evaluate(p).map_err(|e| e.to_string())?;
                let expected: Vec<f64> = (0..n).map(|l| inv.torsion[l][(*j, *k)]).collect();
                horizontal = horizontal.max(max_abs(&tv[..1 + n]));
                horizontal =
                    horizontal.max(max_abs(&tv[1 + n..].iter().zip(&expected).map(|(a, b)| a - b).collect::<Vec<_>>()));
            }
            let mut comm: f64 = 0.0;
            for b in &brackets {
                comm = comm.max(max_abs(&b.evaluate(p).map_err(|e| e.to_string())?));
            }
            Ok((formula, vertical, horizontal, comm))
        };
        match step() {
            Ok((f, v, h, c)) => {
                report.points_checked += 1;
                report.formula_residual = report.formula_residual.max(f);
                report.vertical_torsion = report.vertical_torsion.max(v);
                report.horizontal_torsion_residual = report.horizontal_torsion_residual.max(h);
                report.max_commutator = report.max_commutator.max(c);
            }
            Err(e) => report.skipped.push((p.clone(), e)),
        }
    }
    report
}
