use nalgebra::DMatrix;
use rayon::prelude::*;

use super::GalileanConnection;
use crate::expr::ChartPoint;
use crate::forms::{DifferentialForm, FormError};

/// Step of the central-difference exterior-derivative oracle.
pub const ORACLE_STEP: f64 = 1e-5;

/// Largest residuals of the structure equations over a point set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StructureReport {
    pub tol: f64,
    pub points_checked: usize,
    /// `‖dτ‖∞`.
    pub dtau: f64,
    /// `‖Ω‖∞`, symbolic.
    pub omega: f64,
    /// `Ω` recomputed with the finite-difference `d`.
    pub omega_oracle: f64,
    /// Symbolic `Φ` against `Φ` with the finite-difference `d`.
    pub phi_oracle: f64,
    /// Largest `φ∧φ` slot of `Φ`.
    pub phi_phi: f64,
    /// Points where evaluation failed, with the reason.
    pub skipped: Vec<(ChartPoint, String)>,
}

impl StructureReport {
    pub fn max_residual(&self) -> f64 {
        self.dtau.max(self.omega).max(self.omega_oracle).max(self.phi_oracle).max(self.phi_phi)
    }

    pub fn passed(&self) -> bool {
        self.points_checked > 0 && self.max_residual() <= self.tol
    }

    fn merge(mut self, other: StructureReport) -> StructureReport {
        self.points_checked += other.points_checked;
        self.dtau = self.dtau.max(other.dtau);
        self.omega = self.omega.max(other.omega);
        self.omega_oracle = self.omega_oracle.max(other.omega_oracle);
        self.phi_oracle = self.phi_oracle.max(other.phi_oracle);
        self.phi_phi = self.phi_phi.max(other.phi_phi);
        self.skipped.extend(other.skipped);
        self
    }
}

/// `(da)(e_a, e_b)` on coordinate vectors by central differences of the
/// component row of `a`.
fn fd_exterior_derivative(a: &DifferentialForm, p: &ChartPoint, h: f64) -> Result<DMatrix<f64>, FormError> {
    let m = 2 * p.dim() + 1;
    let mut jac = DMatrix::zeros(m, m);
    for c in 0..m {
        let (hi, lo) = (p.shifted(c, h), p.shifted(c, -h));
        // the representable step, so linear coefficients differentiate exactly
        let step = hi.coords()[c] - lo.coords()[c];
        let plus = a.one_form_row(&hi)?;
        let minus = a.one_form_row(&lo)?;
        for b in 0..m {
            // ∂_c a_b
            jac[(c, b)] = (plus[b] - minus[b]) / step;
        }
    }
    Ok(&jac - jac.transpose())
}

/// `(α∧β)` on coordinate vectors for one-form rows `α`, `β`.
fn wedge_rows(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let m = alpha.len();
    DMatrix::from_fn(m, m, |a, b| alpha[a] * beta[b] - alpha[b] * beta[a])
}

fn check_point(conn: &GalileanConnection, p: &ChartPoint, h: f64) -> Result<StructureReport, FormError> {
    let n = conn.dim();
    let curv = conn.curvature();
    let tau = conn.tau().one_form_row(p)?;
    let omega: Vec<Vec<f64>> = conn.omega().iter().map(|f| f.one_form_row(p)).collect::<Result<_, _>>()?;
    let phi: Vec<Vec<f64>> = conn.phi().iter().map(|f| f.one_form_row(p)).collect::<Result<_, _>>()?;
    let pi: Vec<Vec<Vec<f64>>> = conn
        .pi()
        .iter()
        .map(|row| row.iter().map(|f| f.one_form_row(p)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;

    let mut r = StructureReport { points_checked: 1, ..Default::default() };
    r.dtau = curv.torsion.two_form_matrix(p)?.amax();
    for i in 0..n {
        r.omega = r.omega.max(curv.omega[i].two_form_matrix(p)?.amax());

        let mut omega_fd = fd_exterior_derivative(&conn.omega()[i], p, h)? + wedge_rows(&phi[i], &tau);
        let mut phi_fd = fd_exterior_derivative(&conn.phi()[i], p, h)?;
        for j in 0..n {
            omega_fd += wedge_rows(&pi[i][j], &omega[j]);
            phi_fd += wedge_rows(&pi[i][j], &phi[j]);
        }
        r.omega_oracle = r.omega_oracle.max(omega_fd.amax());
        r.phi_oracle = r.phi_oracle.max((phi_fd - curv.phi[i].two_form_matrix(p)?).amax());
    }
    r.phi_phi = super::extract_invariants(conn, p)?.phi_phi_max;
    Ok(r)
}

/// Checks `dτ = 0`, `Ω = 0`, the symbolic `Φ` against a finite-difference
/// oracle, and the absence of `φ∧φ` terms at every point. Points where
/// evaluation fails are listed in the report and otherwise ignored.
pub fn verify_structure_equations(conn: &GalileanConnection, points: &[ChartPoint], tol: f64) -> StructureReport {
    conn.curvature();
    let report = points
        .par_iter()
        .map(|p| match check_point(conn, p, ORACLE_STEP) {
            Ok(r) => r,
            Err(e) => StructureReport { skipped: vec![(p.clone(), e.to_string())], ..Default::default() },
        })
        .reduce(StructureReport::default, StructureReport::merge);
    StructureReport { tol, ..report }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{chern_connection, SecondOrderSystem};
    use crate::Expr;

    fn chern(src: &[&str]) -> GalileanConnection {
        chern_connection(&SecondOrderSystem::parse(src).unwrap()).unwrap()
    }

    #[test]
    fn flat_residuals_vanish() {
        let c = chern(&["0"]);
        let pts = c.sample_points(10, 1, 1.0).unwrap();
        let r = verify_structure_equations(&c, &pts, 1e-14);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.points_checked, 10);
    }

    #[test]
    fn trig_quadratic_system_passes() {
        let c = chern(&["sin(x1)*y1^2"]);
        let pts = c.sample_points(100, 7, 1.0).unwrap();
        let r = verify_structure_equations(&c, &pts, 1e-6);
        assert!(r.passed(), "{r:?}");
        assert!(r.omega <= 1e-10 && r.dtau == 0.0);
    }

    #[test]
    fn perturbed_n_is_detected() {
        let c = chern(&["sin(x1)*y1^2"]);
        let n = 1;
        let dt = DifferentialForm::dt(n);
        let pi = vec![vec![c.pi()[0][0].add(&dt.scale(&Expr::Const(0.1)))]];
        let bad = c.with_replaced_forms(c.phi().to_vec(), pi);
        let pts = c.sample_points(20, 3, 1.0).unwrap();
        let r = verify_structure_equations(&bad, &pts, 1e-6);
        assert!(!r.passed());
        assert!(r.omega >= 0.05 && r.omega_oracle >= 0.05, "{r:?}");
    }

    #[test]
    fn domain_errors_are_recorded() {
        let c = chern(&["sqrt(x1)"]);
        let pts = vec![ChartPoint::new(0.0, vec![0.5], vec![0.1]), ChartPoint::new(0.0, vec![-0.5], vec![0.1])];
        let r = verify_structure_equations(&c, &pts, 1e-6);
        assert_eq!(r.points_checked, 1);
        assert_eq!(r.skipped.len(), 1);
        assert!(r.passed());
    }
}
