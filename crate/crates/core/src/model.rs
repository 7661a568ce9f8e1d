//! The flat model: the matrix group `Galₙ`, its Lie algebra, the
//! Maurer–Cartan form and the model space `J¹(ℝ, ℝⁿ) ≅ Galₙ/H`.
//!
//! Group elements are `(n+2)×(n+2)` matrices laid out as
//!
//! ```text
//! | 1  0  0 |
//! | t  1  0 |
//! | x  y  A |
//! ```
//!
//! and `H` is the subgroup with `t = 0`, `x = y = 0`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Condition number above which the `A` block is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("the GL block is numerically singular (condition estimate {condition:e})")]
    SingularBlock { condition: f64 },
    #[error("matrix does not have the Galilean block structure: {0}")]
    BlockStructure(String),
    #[error("a straight-line test needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample parameters must be strictly increasing (at sample {0})")]
    NonIncreasing(usize),
}

fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    let sv = a.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// An element of `Galₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct GalileanElement {
    matrix: DMatrix<f64>,
}

impl GalileanElement {
    pub fn identity(n: usize) -> Self {
        GalileanElement { matrix: DMatrix::identity(n + 2, n + 2) }
    }

    pub fn from_parts(t: f64, x: &DVector<f64>, y: &DVector<f64>, a: &DMatrix<f64>) -> Self {
        let n = x.len();
        assert!(y.len() == n && a.nrows() == n && a.ncols() == n, "inconsistent block sizes");
        let mut m = DMatrix::zeros(n + 2, n + 2);
        m[(0, 0)] = 1.0;
        m[(1, 0)] = t;
        m[(1, 1)] = 1.0;
        m.view_mut((2, 0), (n, 1)).copy_from(x);
        m.view_mut((2, 1), (n, 1)).copy_from(y);
        m.view_mut((2, 2), (n, n)).copy_from(a);
        GalileanElement { matrix: m }
    }

    /// An element of `H`.
    pub fn from_gl(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        GalileanElement::from_parts(0.0, &DVector::zeros(n), &DVector::zeros(n), a)
    }

    /// Wraps a matrix after checking the block pattern exactly.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self, ModelError> {
        check_pattern(&matrix, true)?;
        Ok(GalileanElement { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn t(&self) -> f64 {
        self.matrix[(1, 0)]
    }

    pub fn x(&self) -> DVector<f64> {
        self.matrix.column(0).rows(2, self.dim()).into_owned()
    }

    pub fn y(&self) -> DVector<f64> {
        self.matrix.column(1).rows(2, self.dim()).into_owned()
    }

    pub fn a(&self) -> DMatrix<f64> {
        let n = self.dim();
        self.matrix.view((2, 2), (n, n)).into_owned()
    }

    pub fn compose(&self, other: &GalileanElement) -> GalileanElement {
        GalileanElement { matrix: &self.matrix * &other.matrix }
    }

    /// `(t, x, y, A)⁻¹ = (−t, −A⁻¹(x − yt), −A⁻¹y, A⁻¹)`.
    pub fn inverse(&self) -> Result<GalileanElement, ModelError> {
        let a = self.a();
        let condition = condition_estimate(&a);
        if condition > MAX_CONDITION {
            return Err(ModelError::SingularBlock { condition });
        }
        let a_inv = a.try_inverse().ok_or(ModelError::SingularBlock { condition })?;
        let t = self.t();
        let x = self.x();
        let y = self.y();
        let new_x = -(&a_inv * (x - &y * t));
        let new_y = -(&a_inv * y);
        Ok(GalileanElement::from_parts(-t, &new_x, &new_y, &a_inv))
    }

    /// Largest deviation of the fixed entries (first row, `(2,2)` and the
    /// rest of the second row) from their required values.
    pub fn structure_drift(&self) -> f64 {
        pattern_drift(&self.matrix, true)
    }

    /// Resets the fixed entries to their exact values.
    pub fn snap(&mut self) {
        let size = self.matrix.ncols();
        for j in 0..size {
            self.matrix[(0, j)] = if j == 0 { 1.0 } else { 0.0 };
            if j >= 1 {
                self.matrix[(1, j)] = if j == 1 { 1.0 } else { 0.0 };
            }
        }
    }

    /// Snaps an arbitrary square matrix onto the group pattern, returning the
    /// element and the drift that was removed (infinite for nonfinite input).
    pub fn snapped(matrix: DMatrix<f64>) -> (GalileanElement, f64) {
        let drift = if matrix.iter().all(|v| v.is_finite()) { pattern_drift(&matrix, true) } else { f64::INFINITY };
        let mut g = GalileanElement { matrix };
        g.snap();
        (g, drift)
    }

    pub fn project(&self) -> ModelPoint {
        project_to_model(self)
    }
}

fn pattern_drift(m: &DMatrix<f64>, group: bool) -> f64 {
    let size = m.ncols();
    let mut drift: f64 = 0.0;
    for j in 0..size {
        let first = if group && j == 0 { 1.0 } else { 0.0 };
        drift = drift.max((m[(0, j)] - first).abs());
        if j >= 1 {
            let second = if group && j == 1 { 1.0 } else { 0.0 };
            drift = drift.max((m[(1, j)] - second).abs());
        }
    }
    drift
}

fn check_pattern(m: &DMatrix<f64>, group: bool) -> Result<(), ModelError> {
    if m.nrows() != m.ncols() || m.nrows() < 3 {
        return Err(ModelError::BlockStructure(format!("shape {}×{}", m.nrows(), m.ncols())));
    }
    let drift = pattern_drift(m, group);
    if drift != 0.0 {
        return Err(ModelError::BlockStructure(format!("fixed entries off by {drift:e}")));
    }
    Ok(())
}

/// An element of `𝔤𝔞𝔩ₙ`: the matrix with zero first row, `τ` in slot
/// `(2,1)` and `(ω | φ | Π)` in the lower block.
#[derive(Clone, Debug, PartialEq)]
pub struct GalileanAlgebraElement {
    pub t: f64,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub a: DMatrix<f64>,
}

impl GalileanAlgebraElement {
    pub fn zero(n: usize) -> Self {
        GalileanAlgebraElement { t: 0.0, x: DVector::zeros(n), y: DVector::zeros(n), a: DMatrix::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n + 2, n + 2);
        m[(1, 0)] = self.t;
        m.view_mut((2, 0), (n, 1)).copy_from(&self.x);
        m.view_mut((2, 1), (n, 1)).copy_from(&self.y);
        m.view_mut((2, 2), (n, n)).copy_from(&self.a);
        m
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self, ModelError> {
        check_pattern(m, false)?;
        let n = m.nrows() - 2;
        Ok(GalileanAlgebraElement {
            t: m[(1, 0)],
            x: m.view((2, 0), (n, 1)).column(0).into_owned(),
            y: m.view((2, 1), (n, 1)).column(0).into_owned(),
            a: m.view((2, 2), (n, n)).into_owned(),
        })
    }

    /// `Ad(B⁻¹)ξ = B⁻¹ ξ B` for `B = diag(1, 1, b) ∈ H`.
    pub fn conjugate_by_gl(&self, b: &DMatrix<f64>, b_inv: &DMatrix<f64>) -> Self {
        GalileanAlgebraElement { t: self.t, x: b_inv * &self.x, y: b_inv * &self.y, a: b_inv * &self.a * b }
    }
}

/// A point `(t, x, y)` of `J¹(ℝ, ℝⁿ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPoint {
    pub t: f64,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
}

impl ModelPoint {
    pub fn origin(n: usize) -> Self {
        ModelPoint { t: 0.0, x: DVector::zeros(n), y: DVector::zeros(n) }
    }

    pub fn max_abs_difference(&self, other: &ModelPoint) -> f64 {
        let mut d = (self.t - other.t).abs();
        d = d.max((&self.x - &other.x).amax());
        d.max((&self.y - &other.y).amax())
    }
}

pub fn compose(g: &GalileanElement, h: &GalileanElement) -> GalileanElement {
    g.compose(h)
}

pub fn inverse(g: &GalileanElement) -> Result<GalileanElement, ModelError> {
    g.inverse()
}

/// Left Maurer–Cartan form `g⁻¹·ġ` for a tangent `ġ` at `g`.
pub fn maurer_cartan(g: &GalileanElement, gdot: &DMatrix<f64>) -> Result<GalileanAlgebraElement, ModelError> {
    check_pattern(gdot, false)?;
    let product = g.inverse()?.matrix() * gdot;
    GalileanAlgebraElement::from_matrix(&{
        // the product has the algebra pattern in exact arithmetic; clear
        // round-off in the fixed slots before repackaging
        let mut m = product;
        let size = m.ncols();
        for j in 0..size {
            m[(0, j)] = 0.0;
            if j >= 1 {
                m[(1, j)] = 0.0;
            }
        }
        m
    })
}

/// Reads the `(t, x, y)` slots, i.e. the coset `gH`.
pub fn project_to_model(g: &GalileanElement) -> ModelPoint {
    ModelPoint { t: g.t(), x: g.x(), y: g.y() }
}

/// Outcome of [`is_straight_line`].
#[derive(Clone, Debug, PartialEq)]
pub struct StraightLineVerdict {
    pub straight: bool,
    /// Largest of `|Δx − ȳΔt| / (1 + |Δt|)` and `|Δy|` over consecutive pairs.
    pub max_violation: f64,
    /// Smallest `|Δt|` over consecutive pairs.
    pub min_dt: f64,
}

impl StraightLineVerdict {
    pub fn degenerate(&self, tol: f64) -> bool {
        self.min_dt < tol
    }
}

/// Tests whether sampled model points pull back `dx − y dt` and `dy` to zero
/// while `dt` stays nonzero.
pub fn is_straight_line(samples: &[(f64, ModelPoint)], tol: f64) -> Result<StraightLineVerdict, ModelError> {
    if samples.len() < 3 {
        return Err(ModelError::TooFewSamples(samples.len()));
    }
    let mut max_violation: f64 = 0.0;
    let mut min_dt = f64::INFINITY;
    for (k, pair) in samples.windows(2).enumerate() {
        let (s0, p0) = &pair[0];
        let (s1, p1) = &pair[1];
        if s1 <= s0 {
            return Err(ModelError::NonIncreasing(k + 1));
        }
        let dt = p1.t - p0.t;
        let dx = &p1.x - &p0.x;
        let dy = &p1.y - &p0.y;
        let y_mid = (&p0.y + &p1.y) * 0.5;
        let contact = (dx - y_mid * dt).amax() / (1.0 + dt.abs());
        max_violation = max_violation.max(contact).max(dy.amax());
        min_dt = min_dt.min(dt.abs());
    }
    let straight = max_violation <= tol && min_dt >= tol;
    Ok(StraightLineVerdict { straight, max_violation, min_dt })
}
