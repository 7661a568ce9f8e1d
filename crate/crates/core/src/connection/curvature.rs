use nalgebra::DMatrix;

use super::{ConnectionError, GalileanConnection};
use crate::expr::ChartPoint;
use crate::forms::{to_adapted_basis, DifferentialForm, FormError};

/// `T = dτ`, `Ωⁱ = dωⁱ + Πⁱⱼ∧ωʲ + φⁱ∧τ`, `Φⁱ = dφⁱ + Πⁱⱼ∧φʲ`,
/// `Rⁱⱼ = dΠⁱⱼ + Πⁱₖ∧Πᵏⱼ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureForms {
    pub torsion: DifferentialForm,
    pub omega: Vec<DifferentialForm>,
    pub phi: Vec<DifferentialForm>,
    pub r: Vec<Vec<DifferentialForm>>,
}

// Degrees are fixed at one for every input here, so wedge and d cannot fail.
fn wedge(a: &DifferentialForm, b: &DifferentialForm) -> DifferentialForm {
    a.wedge(b).expect("wedge of one-forms")
}

fn d(a: &DifferentialForm) -> DifferentialForm {
    a.exterior_derivative().expect("d of a one-form")
}

pub(super) fn compute(conn: &GalileanConnection) -> CurvatureForms {
    let n = conn.dim();
    let (tau, omega, phi, pi) = (conn.tau(), conn.omega(), conn.phi(), conn.pi());
    let torsion = d(tau).simplify();
    let omega_curv = (0..n)
        .map(|i| {
            let mut f = d(&omega[i]).add(&wedge(&phi[i], tau));
            for j in 0..n {
                f = f.add(&wedge(&pi[i][j], &omega[j]));
            }
            f.simplify()
        })
        .collect();
    let phi_curv = (0..n)
        .map(|i| {
            let mut f = d(&phi[i]);
            for j in 0..n {
                f = f.add(&wedge(&pi[i][j], &phi[j]));
            }
            f.simplify()
        })
        .collect();
    let r = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut f = d(&pi[i][j]);
                    for k in 0..n {
                        f = f.add(&wedge(&pi[i][k], &pi[k][j]));
                    }
                    f.simplify()
                })
                .collect()
        })
        .collect();
    CurvatureForms { torsion, omega: omega_curv, phi: phi_curv, r }
}

/// Pointwise coefficients of
/// `Φⁱ = Dⁱⱼ τ∧φʲ + Qⁱⱼₖ ωʲ∧φᵏ + Pⁱⱼ τ∧ωʲ + ½ Tⁱⱼₖ ωʲ∧ωᵏ`.
///
/// `q[i]` and `torsion[i]` are `n×n` matrices over the lower indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureInvariants {
    pub d: DMatrix<f64>,
    pub q: Vec<DMatrix<f64>>,
    pub p: DMatrix<f64>,
    pub torsion: Vec<DMatrix<f64>>,
    /// Largest `φʲ∧φᵏ` slot over all `Φⁱ`; zero up to roundoff.
    pub phi_phi_max: f64,
}

impl CurvatureInvariants {
    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    /// `Qⁱ₍ⱼₖ₎`.
    pub fn q_symmetric(&self) -> Vec<DMatrix<f64>> {
        self.q.iter().map(|m| (m + m.transpose()) * 0.5).collect()
    }

    /// `Qⁱ₍[jk]₎`.
    pub fn q_antisymmetric(&self) -> Vec<DMatrix<f64>> {
        self.q.iter().map(|m| (m - m.transpose()) * 0.5).collect()
    }

    /// Largest absolute difference over all four tensors.
    pub fn max_abs_difference(&self, other: &CurvatureInvariants) -> f64 {
        let mut m = (&self.d - &other.d).amax().max((&self.p - &other.p).amax());
        for (a, b) in self.q.iter().zip(&other.q).chain(self.torsion.iter().zip(&other.torsion)) {
            m = m.max((a - b).amax());
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        let finite = |m: &DMatrix<f64>| m.iter().all(|v| v.is_finite());
        finite(&self.d) && finite(&self.p) && self.q.iter().all(finite) && self.torsion.iter().all(finite)
    }
}

/// Decomposes each `Φⁱ` over the adapted coframe `(τ, ω, φ)` at `p`.
pub fn extract_invariants(conn: &GalileanConnection, p: &ChartPoint) -> Result<CurvatureInvariants, FormError> {
    let n = conn.dim();
    let coframe = conn.adapted_coframe();
    let mut d = DMatrix::zeros(n, n);
    let mut pm = DMatrix::zeros(n, n);
    let mut q = vec![DMatrix::zeros(n, n); n];
    let mut torsion = vec![DMatrix::zeros(n, n); n];
    let mut phi_phi_max: f64 = 0.0;
    for (i, big_phi) in conn.curvature().phi.iter().enumerate() {
        let slots = to_adapted_basis(big_phi, &coframe, p)?;
        for j in 0..n {
            d[(i, j)] = slots.tau_phi(j);
            pm[(i, j)] = slots.tau_omega(j);
            for k in 0..n {
                q[i][(j, k)] = slots.omega_phi(j, k);
                torsion[i][(j, k)] = slots.omega_omega(j, k);
            }
        }
        phi_phi_max = phi_phi_max.max(slots.max_phi_phi());
    }
    Ok(CurvatureInvariants { d, q, p: pm, torsion, phi_phi_max })
}

fn dress_three_index(t: &[DMatrix<f64>], a: &DMatrix<f64>, a_inv: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    let n = t.len();
    let lowered: Vec<DMatrix<f64>> = t.iter().map(|m| a.transpose() * m * a).collect();
    (0..n)
        .map(|i| {
            let mut out = DMatrix::zeros(n, n);
            for (l, m) in lowered.iter().enumerate() {
                out += m * a_inv[(i, l)];
            }
            out
        })
        .collect()
}

/// Re-expresses invariants computed on the section `A = I` in the frame
/// translated by the constant `A`: `D ↦ A⁻¹DA`, `P ↦ A⁻¹PA`,
/// `Qⁱⱼₖ ↦ (A⁻¹)ⁱₗ Qˡₘₚ Aᵐⱼ Aᵖₖ`, and likewise for the torsion.
pub fn gauge_transform(inv: &CurvatureInvariants, a: &DMatrix<f64>) -> Result<CurvatureInvariants, ConnectionError> {
    let n = inv.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(ConnectionError::Shape { what: "gauge", expected: n, actual: a.nrows() });
    }
    let a_inv = a.clone().try_inverse().ok_or(ConnectionError::SingularGauge)?;
    Ok(CurvatureInvariants {
        d: &a_inv * &inv.d * a,
        p: &a_inv * &inv.p * a,
        q: dress_three_index(&inv.q, a, &a_inv),
        torsion: dress_three_index(&inv.torsion, a, &a_inv),
        phi_phi_max: inv.phi_phi_max,
    })
}
