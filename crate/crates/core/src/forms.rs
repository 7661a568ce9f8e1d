//! Differential forms on the `(2n+1)`-dimensional chart `(t, x, y)`.
//!
//! Forms are stored over the coordinate coframe `dt, dx1..dxn, dy1..dyn`
//! (chart indices `0..2n+1`, see [`Var::chart_index`]) as a map from strictly
//! increasing index tuples to [`Expr`] coefficients. Conversion to an adapted
//! coframe happens pointwise only, through [`to_adapted_basis`].

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::expr::{ChartPoint, EvalError, Expr, Var};

pub const MAX_DEGREE: usize = 3;

/// Pivot ratio below which a pointwise coframe is reported singular.
pub const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("wedge of degrees {left} and {right} exceeds the maximum degree {MAX_DEGREE}")]
    DegreeOverflow { left: usize, right: usize },
    #[error("expected a form of degree {expected}, got degree {actual}")]
    WrongDegree { expected: usize, actual: usize },
    #[error("adapted coframe is singular at the point (pivot ratio {pivot_ratio:e})")]
    SingularCoframe { pivot_ratio: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A tangent vector `(v_t, v_x, v_y)` at a chart point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentVector {
    pub fn new(t: f64, x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        TangentVector { t, x, y }
    }

    pub fn zero(n: usize) -> Self {
        TangentVector::new(0.0, vec![0.0; n], vec![0.0; n])
    }

    /// The coordinate vector `∂/∂z_index`.
    pub fn coordinate(n: usize, index: usize) -> Self {
        let mut c = vec![0.0; 2 * n + 1];
        c[index] = 1.0;
        TangentVector::from_components(n, &c)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn components(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(2 * self.dim() + 1);
        c.push(self.t);
        c.extend_from_slice(&self.x);
        c.extend_from_slice(&self.y);
        c
    }

    pub fn from_components(n: usize, c: &[f64]) -> Self {
        assert_eq!(c.len(), 2 * n + 1);
        TangentVector::new(c[0], c[1..=n].to_vec(), c[n + 1..].to_vec())
    }

    /// `p + s·v` in chart coordinates.
    pub fn displace(&self, p: &ChartPoint, s: f64) -> ChartPoint {
        let coords: Vec<f64> = p.coords().iter().zip(self.components()).map(|(a, b)| a + s * b).collect();
        ChartPoint::from_coords(p.dim(), &coords)
    }
}

/// Sign of the permutation sorting `seq` (distinct entries), or `None` on repeats.
fn sort_sign(seq: &mut [usize]) -> Option<i32> {
    let mut sign = 1;
    for i in 1..seq.len() {
        let mut j = i;
        while j > 0 && seq[j - 1] > seq[j] {
            seq.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if seq.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// A differential form of degree `0..=3` with symbolic coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialForm {
    n: usize,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

impl DifferentialForm {
    pub fn zero(n: usize, degree: usize) -> Self {
        assert!(degree <= MAX_DEGREE);
        DifferentialForm { n, degree, terms: BTreeMap::new() }
    }

    /// The 0-form `f`.
    pub fn function(n: usize, f: Expr) -> Self {
        DifferentialForm::monomial(n, vec![], f)
    }

    /// `coefficient · dz_{i1} ∧ … ∧ dz_{ik}`; indices in any order.
    pub fn monomial(n: usize, mut indices: Vec<usize>, coefficient: Expr) -> Self {
        assert!(indices.len() <= MAX_DEGREE);
        assert!(indices.iter().all(|&i| i < 2 * n + 1), "coframe index out of range");
        let mut form = DifferentialForm::zero(n, indices.len());
        if let Some(sign) = sort_sign(&mut indices) {
            let c = if sign < 0 { Expr::neg_s(coefficient) } else { coefficient };
            form.insert(indices, c);
        }
        form
    }

    /// The coordinate one-form `dz_index`.
    pub fn coordinate(n: usize, index: usize) -> Self {
        DifferentialForm::monomial(n, vec![index], Expr::ONE)
    }

    pub fn d_of(n: usize, v: Var) -> Self {
        DifferentialForm::coordinate(n, v.chart_index(n))
    }

    pub fn dt(n: usize) -> Self {
        DifferentialForm::d_of(n, Var::T)
    }

    pub fn dx(n: usize, i: usize) -> Self {
        DifferentialForm::d_of(n, Var::X(i))
    }

    pub fn dy(n: usize, i: usize) -> Self {
        DifferentialForm::d_of(n, Var::Y(i))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Expr)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn coefficient(&self, key: &[usize]) -> Expr {
        self.terms.get(key).cloned().unwrap_or(Expr::ZERO)
    }

    /// True when no coefficient survives simplification.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, key: Vec<usize>, c: Expr) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&key) {
            Some(prev) => {
                let sum = Expr::add_s(prev, c);
                if !sum.is_zero() {
                    self.terms.insert(key, sum);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    fn check_same_shape(&self, other: &DifferentialForm) {
        assert_eq!(self.n, other.n, "forms live on charts of different dimension");
        assert_eq!(self.degree, other.degree, "cannot add forms of different degree");
    }

    pub fn add(&self, other: &DifferentialForm) -> DifferentialForm {
        self.check_same_shape(other);
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &DifferentialForm) -> DifferentialForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DifferentialForm {
        self.map_coefficients(|c| Expr::neg_s(c.clone()))
    }

    /// Multiplies every coefficient by the function `f`.
    pub fn scale(&self, f: &Expr) -> DifferentialForm {
        self.map_coefficients(|c| Expr::mul_s(f.clone(), c.clone()))
    }

    pub fn scale_const(&self, s: f64) -> DifferentialForm {
        self.scale(&Expr::Const(s))
    }

    pub fn map_coefficients(&self, f: impl Fn(&Expr) -> Expr) -> DifferentialForm {
        let mut out = DifferentialForm::zero(self.n, self.degree);
        for (k, c) in &self.terms {
            out.insert(k.clone(), f(c));
        }
        out
    }

    pub fn simplify(&self) -> DifferentialForm {
        self.map_coefficients(Expr::simplify)
    }

    /// Graded-antisymmetric exterior product.
    pub fn wedge(&self, other: &DifferentialForm) -> Result<DifferentialForm, FormError> {
        assert_eq!(self.n, other.n, "forms live on charts of different dimension");
        let degree = self.degree + other.degree;
        if degree > MAX_DEGREE {
            return Err(FormError::DegreeOverflow { left: self.degree, right: other.degree });
        }
        let mut out = DifferentialForm::zero(self.n, degree);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut key: Vec<usize> = ka.iter().chain(kb).copied().collect();
                if let Some(sign) = sort_sign(&mut key) {
                    let mut c = Expr::mul_s(ca.clone(), cb.clone());
                    if sign < 0 {
                        c = Expr::neg_s(c);
                    }
                    out.insert(key, c);
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative assembled from symbolic partials of the
    /// coefficients: `d(f dz_I) = Σ_c ∂f/∂z_c dz_c ∧ dz_I`.
    pub fn exterior_derivative(&self) -> Result<DifferentialForm, FormError> {
        if self.degree >= MAX_DEGREE {
            return Err(FormError::DegreeOverflow { left: 1, right: self.degree });
        }
        let mut out = DifferentialForm::zero(self.n, self.degree + 1);
        for (key, f) in &self.terms {
            for v in Var::all(self.n) {
                let c = v.chart_index(self.n);
                if key.contains(&c) {
                    continue;
                }
                let partial = f.differentiate(v);
                if partial.is_zero() {
                    continue;
                }
                let mut k = Vec::with_capacity(key.len() + 1);
                k.push(c);
                k.extend_from_slice(key);
                let sign = sort_sign(&mut k).expect("indices are distinct");
                out.insert(k, if sign < 0 { Expr::neg_s(partial) } else { partial });
            }
        }
        Ok(out)
    }

    /// Numeric coefficients at `p`, keyed like [`terms`](Self::terms).
    pub fn coefficient_values(&self, p: &ChartPoint) -> Result<Vec<(Vec<usize>, f64)>, EvalError> {
        self.terms.iter().map(|(k, c)| Ok((k.clone(), c.evaluate(p)?))).collect()
    }

    /// `max |coefficient|` at `p` (0 for the zero form).
    pub fn max_abs_coefficient(&self, p: &ChartPoint) -> Result<f64, EvalError> {
        let mut m: f64 = 0.0;
        for c in self.terms.values() {
            m = m.max(c.evaluate(p)?.abs());
        }
        Ok(m)
    }

    /// Evaluates the form at `p` on `degree` tangent vectors.
    pub fn evaluate(&self, p: &ChartPoint, vectors: &[&TangentVector]) -> Result<f64, FormError> {
        if vectors.len() != self.degree {
            return Err(FormError::WrongDegree { expected: vectors.len(), actual: self.degree });
        }
        let comps: Vec<Vec<f64>> = vectors.iter().map(|v| v.components()).collect();
        let mut total = 0.0;
        for (key, c) in &self.terms {
            let coefficient = c.evaluate(p)?;
            total += coefficient * minor_determinant(&comps, key);
        }
        Ok(total)
    }

    pub fn evaluate_one_form(&self, p: &ChartPoint, u: &TangentVector) -> Result<f64, FormError> {
        self.evaluate(p, &[u])
    }

    /// `a(u, v)` for a 2-form `a`.
    pub fn evaluate_two_form(&self, p: &ChartPoint, u: &TangentVector, v: &TangentVector) -> Result<f64, FormError> {
        self.evaluate(p, &[u, v])
    }

    /// Components of a 1-form at `p` as a row over the coordinate coframe.
    pub fn one_form_row(&self, p: &ChartPoint) -> Result<Vec<f64>, FormError> {
        if self.degree != 1 {
            return Err(FormError::WrongDegree { expected: 1, actual: self.degree });
        }
        let mut row = vec![0.0; 2 * self.n + 1];
        for (k, c) in &self.terms {
            row[k[0]] = c.evaluate(p)?;
        }
        Ok(row)
    }

    /// The antisymmetric coefficient matrix `A` of a 2-form at `p`, with
    /// `a(u, v) = uᵀ A v`.
    pub fn two_form_matrix(&self, p: &ChartPoint) -> Result<DMatrix<f64>, FormError> {
        if self.degree != 2 {
            return Err(FormError::WrongDegree { expected: 2, actual: self.degree });
        }
        let m = 2 * self.n + 1;
        let mut a = DMatrix::zeros(m, m);
        for (k, c) in &self.terms {
            let value = c.evaluate(p)?;
            a[(k[0], k[1])] = value;
            a[(k[1], k[0])] = -value;
        }
        Ok(a)
    }
}

fn minor_determinant(comps: &[Vec<f64>], key: &[usize]) -> f64 {
    match key.len() {
        0 => 1.0,
        1 => comps[0][key[0]],
        2 => comps[0][key[0]] * comps[1][key[1]] - comps[0][key[1]] * comps[1][key[0]],
        3 => {
            let m = |r: usize, c: usize| comps[r][key[c]];
            m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
        }
        _ => unreachable!("degree capped at {MAX_DEGREE}"),
    }
}

impl fmt::Display for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (key, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (j, idx) in key.iter().enumerate() {
                let sep = if j == 0 { " " } else { "∧" };
                write!(f, "{sep}d{}", Var::from_chart_index(*idx, self.n))?;
            }
        }
        Ok(())
    }
}

/// Inverts a square matrix by Gauss–Jordan elimination with partial
/// pivoting. Fails when the smallest pivot falls below
/// [`SINGULAR_PIVOT_RATIO`] times the largest entry.
pub fn invert_with_pivoting(m: &DMatrix<f64>) -> Result<DMatrix<f64>, FormError> {
    let size = m.nrows();
    assert_eq!(size, m.ncols());
    let scale = m.amax();
    if scale == 0.0 {
        return Err(FormError::SingularCoframe { pivot_ratio: 0.0 });
    }
    let mut a = m.clone();
    let mut inv = DMatrix::identity(size, size);
    for col in 0..size {
        let (pivot_row, pivot) =
            (col..size).map(|r| (r, a[(r, col)].abs())).max_by(|p, q| p.1.total_cmp(&q.1)).expect("non-empty range");
        if pivot < SINGULAR_PIVOT_RATIO * scale {
            return Err(FormError::SingularCoframe { pivot_ratio: pivot / scale });
        }
        a.swap_rows(col, pivot_row);
        inv.swap_rows(col, pivot_row);
        let d = a[(col, col)];
        for j in 0..size {
            a[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for r in 0..size {
            if r != col {
                let factor = a[(r, col)];
                if factor != 0.0 {
                    for j in 0..size {
                        a[(r, j)] -= factor * a[(col, j)];
                        inv[(r, j)] -= factor * inv[(col, j)];
                    }
                }
            }
        }
    }
    Ok(inv)
}

/// Coefficients of a 2-form over the basis `θᵃ ∧ θᵇ` of an adapted coframe
/// `θ = (τ, ω¹..ωⁿ, φ¹..φⁿ)` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedTwoForm {
    n: usize,
    /// Antisymmetric; entry `(a, b)` with `a < b` is the `θᵃ∧θᵇ` slot.
    slots: DMatrix<f64>,
}

impl AdaptedTwoForm {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.slots
    }

    pub fn tau_omega(&self, j: usize) -> f64 {
        self.slots[(0, 1 + j)]
    }

    pub fn tau_phi(&self, j: usize) -> f64 {
        self.slots[(0, 1 + self.n + j)]
    }

    /// Slot of `ωʲ ∧ ωᵏ`; antisymmetric in `(j, k)`.
    pub fn omega_omega(&self, j: usize, k: usize) -> f64 {
        self.slots[(1 + j, 1 + k)]
    }

    pub fn omega_phi(&self, j: usize, k: usize) -> f64 {
        self.slots[(1 + j, 1 + self.n + k)]
    }

    pub fn phi_phi(&self, j: usize, k: usize) -> f64 {
        self.slots[(1 + self.n + j, 1 + self.n + k)]
    }

    /// Largest `|φʲ∧φᵏ|` slot.
    pub fn max_phi_phi(&self) -> f64 {
        let mut m: f64 = 0.0;
        for j in 0..self.n {
            for k in 0..self.n {
                m = m.max(self.phi_phi(j, k).abs());
            }
        }
        m
    }

    /// Evaluates `Σ_{a<b} slot_ab θᵃ∧θᵇ` on `(u, v)` using the coframe rows
    /// (one row per adapted one-form, over the coordinate coframe).
    pub fn reconstruct(&self, coframe_rows: &DMatrix<f64>, u: &TangentVector, v: &TangentVector) -> f64 {
        let tu = coframe_rows * nalgebra::DVector::from_vec(u.components());
        let tv = coframe_rows * nalgebra::DVector::from_vec(v.components());
        let m = self.slots.nrows();
        let mut total = 0.0;
        for a in 0..m {
            for b in a + 1..m {
                total += self.slots[(a, b)] * (tu[a] * tv[b] - tu[b] * tv[a]);
            }
        }
        total
    }
}

/// Rows of the adapted coframe at `p`: row `a` holds the coordinate
/// components of the one-form `θᵃ`.
pub fn coframe_matrix(coframe: &[DifferentialForm], p: &ChartPoint) -> Result<DMatrix<f64>, FormError> {
    let n = p.dim();
    let m = 2 * n + 1;
    assert_eq!(coframe.len(), m, "an adapted coframe has 2n+1 one-forms");
    let mut rows = DMatrix::zeros(m, m);
    for (a, theta) in coframe.iter().enumerate() {
        for (b, value) in theta.one_form_row(p)?.into_iter().enumerate() {
            rows[(a, b)] = value;
        }
    }
    Ok(rows)
}

/// Rewrites the 2-form `a` at `p` over the adapted basis built from the
/// one-forms `coframe = [τ, ω¹..ωⁿ, φ¹..φⁿ]`.
pub fn to_adapted_basis(
    a: &DifferentialForm,
    coframe: &[DifferentialForm],
    p: &ChartPoint,
) -> Result<AdaptedTwoForm, FormError> {
    let rows = coframe_matrix(coframe, p)?;
    // columns of the inverse are the dual frame vectors e_a with θᵇ(e_a) = δ
    let frame = invert_with_pivoting(&rows)?;
    let coords = a.two_form_matrix(p)?;
    let slots = frame.transpose() * coords * &frame;
    Ok(AdaptedTwoForm { n: a.dim(), slots })
}

/// `da(u, v)` for a 1-form `a` by central differences with constant
/// extensions of `u` and `v`: `D_u(a(v)) − D_v(a(u))`.
pub fn finite_difference_d(
    a: &DifferentialForm,
    p: &ChartPoint,
    u: &TangentVector,
    v: &TangentVector,
    h: f64,
) -> Result<f64, FormError> {
    let directional = |dir: &TangentVector, arg: &TangentVector| -> Result<f64, FormError> {
        let plus = a.evaluate_one_form(&dir.displace(p, h), arg)?;
        let minus = a.evaluate_one_form(&dir.displace(p, -h), arg)?;
        Ok((plus - minus) / (2.0 * h))
    };
    Ok(directional(u, v)? - directional(v, u)?)
}
