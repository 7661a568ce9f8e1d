//! The Galilean Cartan connection attached to a second-order system, built
//! on the section `A = I` of the normal-coordinate chart.
//!
//! For `ẍⁱ + Γⁱ(t, x, ẋ) = 0` and a normalization `(D, Q₍ⱼₖ₎)` the
//! connection forms are
//!
//! ```text
//! τ    = dt
//! ωⁱ   = dxⁱ − yⁱ dt
//! φⁱ   = dyⁱ + Γⁱ dt + Nⁱₖ ωᵏ
//! Πⁱⱼ  = Nⁱⱼ dt + Γⁱⱼₖ ωᵏ
//! ```
//!
//! with `N = ½(∂Γ/∂y + D)` and
//! `Γⁱⱼₖ = Qⁱ₍ⱼₖ₎ + ½ ∂²Γⁱ/∂yʲ∂yᵏ + ¼(∂Dⁱⱼ/∂yᵏ + ∂Dⁱₖ/∂yʲ)`.

mod curvature;
mod verify;

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::expr::{parse, ChartPoint, Expr, ParseError, Var};
use crate::forms::{DifferentialForm, FormError, TangentVector};
use crate::model::GalileanAlgebraElement;
use crate::sampling::{PointSampler, SamplingError};

pub use curvature::{extract_invariants, gauge_transform, CurvatureForms, CurvatureInvariants};
pub use verify::{verify_structure_equations, StructureReport, ORACLE_STEP};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConnectionError {
    #[error("parse error in {field}: {source}")]
    Parse { field: String, source: ParseError },
    #[error("{what} has the wrong shape: expected {expected}, got {actual}")]
    Shape { what: &'static str, expected: usize, actual: usize },
    #[error("expression uses variable index {index} but n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("symmetry violation at ({i},{j},{k})")]
    Asymmetric { i: usize, j: usize, k: usize },
    #[error("gauge matrix is singular")]
    SingularGauge,
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

fn check_indices(e: &Expr, n: usize) -> Result<(), ConnectionError> {
    match e.max_index() {
        Some(i) if i >= n => Err(ConnectionError::IndexOutOfRange { index: i + 1, n }),
        _ => Ok(()),
    }
}

/// `ẍⁱ + Γⁱ(t, x, ẋ) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderSystem {
    n: usize,
    gamma: Vec<Expr>,
}

impl SecondOrderSystem {
    pub fn new(gamma: Vec<Expr>) -> Result<Self, ConnectionError> {
        let n = gamma.len();
        if n == 0 {
            return Err(ConnectionError::Shape { what: "gamma", expected: 1, actual: 0 });
        }
        for g in &gamma {
            check_indices(g, n)?;
        }
        Ok(SecondOrderSystem { n, gamma })
    }

    pub fn parse(sources: &[&str]) -> Result<Self, ConnectionError> {
        let n = sources.len();
        let gamma = sources
            .iter()
            .enumerate()
            .map(|(i, s)| {
                parse(s, n).map_err(|source| ConnectionError::Parse { field: format!("gamma[{}]", i + 1), source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        SecondOrderSystem::new(gamma)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> &[Expr] {
        &self.gamma
    }
}

/// The free data `(D, Q₍ⱼₖ₎)` selecting one normal geometry per system.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationChoice {
    d: Vec<Vec<Expr>>,
    qsym: Vec<Vec<Vec<Expr>>>,
}

impl NormalizationChoice {
    pub fn zero(n: usize) -> Self {
        NormalizationChoice { d: vec![vec![Expr::ZERO; n]; n], qsym: vec![vec![vec![Expr::ZERO; n]; n]; n] }
    }

    /// Checks shapes, indices and structural symmetry of `qsym[i][j][k]` in
    /// `(j, k)`.
    pub fn new(d: Vec<Vec<Expr>>, qsym: Vec<Vec<Vec<Expr>>>) -> Result<Self, ConnectionError> {
        let n = d.len();
        for row in &d {
            if row.len() != n {
                return Err(ConnectionError::Shape { what: "D row", expected: n, actual: row.len() });
            }
            for e in row {
                check_indices(e, n)?;
            }
        }
        if qsym.len() != n {
            return Err(ConnectionError::Shape { what: "Qsym", expected: n, actual: qsym.len() });
        }
        for (i, block) in qsym.iter().enumerate() {
            if block.len() != n {
                return Err(ConnectionError::Shape { what: "Qsym block", expected: n, actual: block.len() });
            }
            for (j, row) in block.iter().enumerate() {
                if row.len() != n {
                    return Err(ConnectionError::Shape { what: "Qsym row", expected: n, actual: row.len() });
                }
                for (k, e) in row.iter().enumerate() {
                    check_indices(e, n)?;
                    if *e != block[k][j] {
                        return Err(ConnectionError::Asymmetric { i: i + 1, j: j + 1, k: k + 1 });
                    }
                }
            }
        }
        Ok(NormalizationChoice { d, qsym })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[Vec<Expr>] {
        &self.d
    }

    pub fn qsym(&self) -> &[Vec<Vec<Expr>>] {
        &self.qsym
    }

    pub fn d_at(&self, p: &ChartPoint) -> Result<DMatrix<f64>, ConnectionError> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.d[i][j].evaluate(p).map_err(FormError::from)?;
            }
        }
        Ok(m)
    }

    /// `qsym[i]` evaluated at `p`, as matrices over `(j, k)`.
    pub fn qsym_at(&self, p: &ChartPoint) -> Result<Vec<DMatrix<f64>>, ConnectionError> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut m = DMatrix::zeros(n, n);
                for j in 0..n {
                    for k in 0..n {
                        m[(j, k)] = self.qsym[i][j][k].evaluate(p).map_err(FormError::from)?;
                    }
                }
                Ok(m)
            })
            .collect()
    }
}

/// The connection forms `(τ, ωⁱ, φⁱ, Πⁱⱼ)` together with the data that
/// generated them.
///
/// `n_matrix` and `affine` always refer to the canonical section; forms
/// obtained through [`in_constant_gauge`](Self::in_constant_gauge) are the
/// pullbacks along the translated section `h·A`.
#[derive(Debug)]
pub struct GalileanConnection {
    n: usize,
    system: SecondOrderSystem,
    normalization: NormalizationChoice,
    n_matrix: Vec<Vec<Expr>>,
    affine: Vec<Vec<Vec<Expr>>>,
    tau: DifferentialForm,
    omega: Vec<DifferentialForm>,
    phi: Vec<DifferentialForm>,
    pi: Vec<Vec<DifferentialForm>>,
    gauge: DMatrix<f64>,
    curvature: OnceLock<CurvatureForms>,
}

impl Clone for GalileanConnection {
    fn clone(&self) -> Self {
        GalileanConnection {
            n: self.n,
            system: self.system.clone(),
            normalization: self.normalization.clone(),
            n_matrix: self.n_matrix.clone(),
            affine: self.affine.clone(),
            tau: self.tau.clone(),
            omega: self.omega.clone(),
            phi: self.phi.clone(),
            pi: self.pi.clone(),
            gauge: self.gauge.clone(),
            curvature: self.curvature.clone(),
        }
    }
}

/// Builds the normal Galilean connection with geodesics `sys` and
/// normalization `norm`, in the gauge `A = I`.
pub fn build_connection(
    sys: &SecondOrderSystem,
    norm: &NormalizationChoice,
) -> Result<GalileanConnection, ConnectionError> {
    let n = sys.dim();
    if norm.dim() != n {
        return Err(ConnectionError::Shape { what: "normalization", expected: n, actual: norm.dim() });
    }
    let gamma = sys.gamma();
    let half = Expr::Const(0.5);
    let quarter = Expr::Const(0.25);

    let n_matrix: Vec<Vec<Expr>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let dgamma = gamma[i].differentiate(Var::Y(j));
                    Expr::mul_s(half.clone(), Expr::add_s(dgamma, norm.d[i][j].clone()))
                })
                .collect()
        })
        .collect();

    let mut affine = vec![vec![vec![Expr::ZERO; n]; n]; n];
    for (l, block) in affine.iter_mut().enumerate() {
        for r in 0..n {
            for s in r..n {
                let second = gamma[l].differentiate_many(&[Var::Y(r), Var::Y(s)]);
                let d_sym = Expr::add_s(norm.d[l][r].differentiate(Var::Y(s)), norm.d[l][s].differentiate(Var::Y(r)));
                let value = Expr::add_s(
                    norm.qsym[l][r][s].clone(),
                    Expr::add_s(Expr::mul_s(half.clone(), second), Expr::mul_s(quarter.clone(), d_sym)),
                );
                block[r][s] = value.clone();
                block[s][r] = value;
            }
        }
    }

    let dt = DifferentialForm::dt(n);
    let omega: Vec<DifferentialForm> = (0..n).map(|i| DifferentialForm::dx(n, i).sub(&dt.scale(&Expr::y(i)))).collect();
    let phi: Vec<DifferentialForm> = (0..n)
        .map(|i| {
            let mut f = DifferentialForm::dy(n, i).add(&dt.scale(&gamma[i]));
            for (k, om) in omega.iter().enumerate() {
                f = f.add(&om.scale(&n_matrix[i][k]));
            }
            f
        })
        .collect();
    let pi: Vec<Vec<DifferentialForm>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut f = dt.scale(&n_matrix[i][j]);
                    for (k, om) in omega.iter().enumerate() {
                        f = f.add(&om.scale(&affine[i][j][k]));
                    }
                    f
                })
                .collect()
        })
        .collect();

    Ok(GalileanConnection {
        n,
        system: sys.clone(),
        normalization: norm.clone(),
        n_matrix,
        affine,
        tau: dt,
        omega,
        phi,
        pi,
        gauge: DMatrix::identity(n, n),
        curvature: OnceLock::new(),
    })
}

/// The connection with `D = 0` and `Q₍ⱼₖ₎ = 0`, for which `Φ ≡ 0 mod ω`.
pub fn chern_connection(sys: &SecondOrderSystem) -> Result<GalileanConnection, ConnectionError> {
    build_connection(sys, &NormalizationChoice::zero(sys.dim()))
}

impl GalileanConnection {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn system(&self) -> &SecondOrderSystem {
        &self.system
    }

    pub fn normalization(&self) -> &NormalizationChoice {
        &self.normalization
    }

    /// `Nⁱⱼ` on the canonical section.
    pub fn n_matrix(&self) -> &[Vec<Expr>] {
        &self.n_matrix
    }

    /// `Γⁱⱼₖ`, symmetric in `(j, k)`.
    pub fn affine(&self) -> &[Vec<Vec<Expr>>] {
        &self.affine
    }

    pub fn tau(&self) -> &DifferentialForm {
        &self.tau
    }

    pub fn omega(&self) -> &[DifferentialForm] {
        &self.omega
    }

    pub fn phi(&self) -> &[DifferentialForm] {
        &self.phi
    }

    pub fn pi(&self) -> &[Vec<DifferentialForm>] {
        &self.pi
    }

    /// The constant `GLₙ` element the section has been translated by.
    pub fn gauge(&self) -> &DMatrix<f64> {
        &self.gauge
    }

    /// `[τ, ω¹..ωⁿ, φ¹..φⁿ]`.
    pub fn adapted_coframe(&self) -> Vec<DifferentialForm> {
        let mut cf = Vec::with_capacity(2 * self.n + 1);
        cf.push(self.tau.clone());
        cf.extend(self.omega.iter().cloned());
        cf.extend(self.phi.iter().cloned());
        cf
    }

    /// Pulls the connection back along the section `h·A` for a constant
    /// invertible `A`: `ω ↦ A⁻¹ω`, `φ ↦ A⁻¹φ`, `Π ↦ A⁻¹ΠA`.
    pub fn in_constant_gauge(&self, a: &DMatrix<f64>) -> Result<GalileanConnection, ConnectionError> {
        let n = self.n;
        if a.nrows() != n || a.ncols() != n {
            return Err(ConnectionError::Shape { what: "gauge", expected: n, actual: a.nrows() });
        }
        let a_inv = a.clone().try_inverse().ok_or(ConnectionError::SingularGauge)?;
        let combine = |forms: &[DifferentialForm], weights: &dyn Fn(usize) -> f64| {
            forms.iter().enumerate().fold(DifferentialForm::zero(n, 1), |acc, (k, f)| {
                let w = weights(k);
                if w == 0.0 {
                    acc
                } else {
                    acc.add(&f.scale_const(w))
                }
            })
        };
        let omega: Vec<_> = (0..n).map(|i| combine(&self.omega, &|k| a_inv[(i, k)])).collect();
        let phi: Vec<_> = (0..n).map(|i| combine(&self.phi, &|k| a_inv[(i, k)])).collect();
        let pi: Vec<Vec<_>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let mut f = DifferentialForm::zero(n, 1);
                        for k in 0..n {
                            for l in 0..n {
                                let w = a_inv[(i, k)] * a[(l, j)];
                                if w != 0.0 {
                                    f = f.add(&self.pi[k][l].scale_const(w));
                                }
                            }
                        }
                        f
                    })
                    .collect()
            })
            .collect();
        Ok(GalileanConnection { omega, phi, pi, gauge: &self.gauge * a, curvature: OnceLock::new(), ..self.clone() })
    }

    /// Copy with replaced `φ` and `Π` forms; used to probe the verifier
    /// with connections that violate the structure equations.
    pub fn with_replaced_forms(&self, phi: Vec<DifferentialForm>, pi: Vec<Vec<DifferentialForm>>) -> Self {
        assert_eq!(phi.len(), self.n);
        assert_eq!(pi.len(), self.n);
        GalileanConnection { phi, pi, curvature: OnceLock::new(), ..self.clone() }
    }

    /// Curvature forms, computed once and cached.
    pub fn curvature(&self) -> &CurvatureForms {
        self.curvature.get_or_init(|| curvature::compute(self))
    }

    /// `(τ(v), ω(v), φ(v), Π(v))` packed as an element of `𝔤𝔞𝔩ₙ`.
    pub fn algebra_value(&self, p: &ChartPoint, v: &TangentVector) -> Result<GalileanAlgebraElement, FormError> {
        let n = self.n;
        let mut x = DVector::zeros(n);
        let mut y = DVector::zeros(n);
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            x[i] = self.omega[i].evaluate_one_form(p, v)?;
            y[i] = self.phi[i].evaluate_one_form(p, v)?;
            for j in 0..n {
                a[(i, j)] = self.pi[i][j].evaluate_one_form(p, v)?;
            }
        }
        Ok(GalileanAlgebraElement { t: self.tau.evaluate_one_form(p, v)?, x, y, a })
    }

    /// True when every connection and curvature coefficient evaluates at `p`.
    pub fn evaluable_at(&self, p: &ChartPoint) -> bool {
        let curv = self.curvature();
        let forms = std::iter::once(&self.tau)
            .chain(&self.omega)
            .chain(&self.phi)
            .chain(self.pi.iter().flatten())
            .chain(std::iter::once(&curv.torsion))
            .chain(&curv.omega)
            .chain(&curv.phi)
            .chain(curv.r.iter().flatten());
        let mut ok = true;
        for f in forms {
            if f.max_abs_coefficient(p).is_err() {
                ok = false;
                break;
            }
        }
        ok && self.normalization.d_at(p).is_ok() && self.normalization.qsym_at(p).is_ok()
    }

    /// `count` seeded points in `|coords| ≤ half_width` where everything
    /// evaluates.
    pub fn sample_points(&self, count: usize, seed: u64, half_width: f64) -> Result<Vec<ChartPoint>, ConnectionError> {
        let mut sampler = PointSampler::new(self.n, seed, half_width);
        Ok(sampler.sample(count, |p| self.evaluable_at(p))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn sys(src: &[&str]) -> SecondOrderSystem {
        SecondOrderSystem::parse(src).unwrap()
    }

    fn p1(t: f64, x: f64, y: f64) -> ChartPoint {
        ChartPoint::new(t, vec![x], vec![y])
    }

    fn assert_form_eq(a: &DifferentialForm, b: &DifferentialForm, points: &[ChartPoint]) {
        for p in points {
            let diff = a.sub(b);
            assert!(diff.max_abs_coefficient(p).unwrap() < 1e-14, "{a} vs {b}");
        }
    }

    fn test_points() -> Vec<ChartPoint> {
        vec![p1(0.0, 0.0, 0.0), p1(0.3, -0.7, 0.4), p1(-1.0, 0.9, -0.2)]
    }

    #[test]
    fn free_particle() {
        let conn = chern_connection(&sys(&["0"])).unwrap();
        assert!(conn.n_matrix()[0][0].is_zero());
        assert!(conn.affine()[0][0][0].is_zero());
        assert_eq!(conn.phi()[0], DifferentialForm::dy(1, 0));
        assert!(conn.pi()[0][0].is_zero());
    }

    #[test]
    fn quadratic_drag() {
        // N = y1, Γ¹₁₁ = 1, φ = dy + y dx, Π = dx
        let conn = chern_connection(&sys(&["y1^2"])).unwrap();
        let pts = test_points();
        for p in &pts {
            assert_eq!(conn.n_matrix()[0][0].evaluate(p).unwrap(), p.y[0]);
            assert_eq!(conn.affine()[0][0][0].evaluate(p).unwrap(), 1.0);
        }
        let expected_phi = DifferentialForm::dy(1, 0).add(&DifferentialForm::dx(1, 0).scale(&Expr::y(0)));
        assert_form_eq(&conn.phi()[0], &expected_phi, &pts);
        assert_form_eq(&conn.pi()[0][0], &DifferentialForm::dx(1, 0), &pts);
    }

    #[test]
    fn harmonic_oscillator() {
        let conn = chern_connection(&sys(&["x1"])).unwrap();
        assert!(conn.n_matrix()[0][0].is_zero());
        assert!(conn.affine()[0][0][0].is_zero());
        let expected = DifferentialForm::dy(1, 0).add(&DifferentialForm::dt(1).scale(&Expr::x(0)));
        assert_eq!(conn.phi()[0], expected);
        assert!(conn.pi()[0][0].is_zero());
    }

    #[test]
    fn chern_examples() {
        let conn = chern_connection(&sys(&["x1*y1"])).unwrap();
        for p in test_points() {
            assert_eq!(conn.n_matrix()[0][0].evaluate(&p).unwrap(), p.x[0] / 2.0);
            assert_eq!(conn.affine()[0][0][0].evaluate(&p).unwrap(), 0.0);
        }
        let conn = chern_connection(&sys(&["2*y1 + x1"])).unwrap();
        assert_eq!(conn.n_matrix()[0][0], Expr::ONE);
        assert!(conn.affine()[0][0][0].is_zero());
    }

    #[test]
    fn affine_part_is_structurally_symmetric() {
        let s = sys(&["y1*y2*x1 + sin(y2)", "y1^2*y2"]);
        let d = vec![vec![parse("y2*y1", 2).unwrap(), Expr::ZERO], vec![Expr::ZERO, parse("y1^2", 2).unwrap()]];
        let norm = NormalizationChoice::new(d, vec![vec![vec![Expr::ZERO; 2]; 2]; 2]).unwrap();
        let conn = build_connection(&s, &norm).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert_eq!(conn.affine()[i][j][k], conn.affine()[i][k][j]);
                }
            }
        }
    }

    #[test]
    fn qsym_asymmetry_is_rejected() {
        let mut q = vec![vec![vec![Expr::ZERO; 2]; 2]; 2];
        q[1][0][1] = Expr::x(0);
        let err = NormalizationChoice::new(vec![vec![Expr::ZERO; 2]; 2], q).unwrap_err();
        assert_eq!(err, ConnectionError::Asymmetric { i: 2, j: 1, k: 2 });
        assert_eq!(err.to_string(), "symmetry violation at (2,1,2)");
    }

    #[test]
    fn out_of_range_variables_are_rejected() {
        let e = parse("x2", 2).unwrap();
        assert!(matches!(SecondOrderSystem::new(vec![e]), Err(ConnectionError::IndexOutOfRange { .. })));
    }

    #[test]
    fn constant_gauge_round_trip() {
        let conn = chern_connection(&sys(&["sin(x1)*y2", "x2*y1^2"])).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[1.5, 0.3, -0.2, 0.8]);
        let back = conn.in_constant_gauge(&a).unwrap().in_constant_gauge(&a.clone().try_inverse().unwrap()).unwrap();
        let p = ChartPoint::new(0.2, vec![0.4, -0.1], vec![0.7, 0.3]);
        for i in 0..2 {
            assert!(back.phi()[i].sub(&conn.phi()[i]).max_abs_coefficient(&p).unwrap() < 1e-14);
            for j in 0..2 {
                assert!(back.pi()[i][j].sub(&conn.pi()[i][j]).max_abs_coefficient(&p).unwrap() < 1e-14);
            }
        }
        assert!((back.gauge() - DMatrix::identity(2, 2)).amax() < 1e-15);
    }
}
