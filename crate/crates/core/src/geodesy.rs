//! Geodesic integration and developments of curves into `Galₙ`.
//!
//! Curves are described by a [`CurveField`], a vector field on the chart
//! whose integral curve through the initial point is the curve. Sampling
//! and development both use the classical fourth-order Runge–Kutta method,
//! so the development sees the exact tangent at every stage instead of a
//! difference quotient of the samples.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::connection::{GalileanConnection, SecondOrderSystem};
use crate::expr::{parse, ChartPoint, EvalError, Expr, ParseError, Var};
use crate::forms::{FormError, TangentVector};
use crate::model::{
    is_straight_line, GalileanAlgebraElement, GalileanElement, ModelError, ModelPoint, StraightLineVerdict,
};

/// Largest drift of the fixed group entries tolerated before a development
/// is aborted.
pub const MAX_GROUP_DRIFT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesyError {
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("parameter range must be nonnegative and finite, got {0}")]
    BadRange(f64),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("a curve needs at least {needed} samples, got {actual}")]
    TooFewSamples { needed: usize, actual: usize },
    #[error("evaluation failed at s = {s}: {source}")]
    Evaluation { s: f64, source: FormError },
    #[error("group structure drifted by {drift:e} at s = {s}")]
    Drift { s: f64, drift: f64 },
    #[error("parametric curve may only depend on t: {0}")]
    NotParametric(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A vector field on the chart generating a curve.
pub trait CurveField: Send + Sync {
    fn dim(&self) -> usize;

    /// Tangent at parameter `s` (elapsed from the start) and point `p`.
    fn velocity(&self, s: f64, p: &ChartPoint) -> Result<TangentVector, EvalError>;

    /// `dt/ds` along the curve, a constant.
    fn time_rate(&self) -> f64 {
        1.0
    }
}

/// `(1, y, −Γ(t, x, y))`.
#[derive(Clone, Debug)]
pub struct GeodesicField {
    pub system: SecondOrderSystem,
}

impl CurveField for GeodesicField {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn velocity(&self, _s: f64, p: &ChartPoint) -> Result<TangentVector, EvalError> {
        let accel = self.system.gamma().iter().map(|g| g.evaluate(p).map(|v| -v)).collect::<Result<_, _>>()?;
        Ok(TangentVector::new(1.0, p.y.clone(), accel))
    }
}

/// The one-jet `(t, x(t), x'(t))` of an explicit curve `x(t)`.
#[derive(Clone, Debug)]
pub struct ParametricCurve {
    position: Vec<Expr>,
    velocity: Vec<Expr>,
    acceleration: Vec<Expr>,
}

impl ParametricCurve {
    pub fn new(position: Vec<Expr>) -> Result<Self, GeodesyError> {
        for e in &position {
            if let Some(v) = Var::all(position.len()).find(|v| *v != Var::T && e.contains_var(*v)) {
                return Err(GeodesyError::NotParametric(format!("{e} uses {v}")));
            }
        }
        let velocity: Vec<Expr> = position.iter().map(|e| e.differentiate(Var::T)).collect();
        let acceleration = velocity.iter().map(|e| e.differentiate(Var::T)).collect();
        Ok(ParametricCurve { position, velocity, acceleration })
    }

    pub fn parse(sources: &[&str]) -> Result<Self, GeodesyError> {
        let n = sources.len();
        let position = sources.iter().map(|s| parse(s, n)).collect::<Result<_, _>>()?;
        ParametricCurve::new(position)
    }

    /// The jet of the curve at time `t`.
    pub fn point_at(&self, t: f64) -> Result<ChartPoint, EvalError> {
        let at = ChartPoint::new(t, vec![0.0; self.dim()], vec![0.0; self.dim()]);
        let eval = |es: &[Expr]| es.iter().map(|e| e.evaluate(&at)).collect::<Result<Vec<_>, _>>();
        Ok(ChartPoint::new(t, eval(&self.position)?, eval(&self.velocity)?))
    }
}

impl CurveField for ParametricCurve {
    fn dim(&self) -> usize {
        self.position.len()
    }

    fn velocity(&self, _s: f64, p: &ChartPoint) -> Result<TangentVector, EvalError> {
        let at = ChartPoint::new(p.t, vec![0.0; self.dim()], vec![0.0; self.dim()]);
        let eval = |es: &[Expr]| es.iter().map(|e| e.evaluate(&at)).collect::<Result<Vec<_>, _>>();
        Ok(TangentVector::new(1.0, eval(&self.velocity)?, eval(&self.acceleration)?))
    }
}

/// The constant curve.
#[derive(Clone, Copy, Debug)]
pub struct Stationary {
    pub n: usize,
}

impl CurveField for Stationary {
    fn dim(&self) -> usize {
        self.n
    }

    fn velocity(&self, _s: f64, _p: &ChartPoint) -> Result<TangentVector, EvalError> {
        Ok(TangentVector::zero(self.n))
    }

    fn time_rate(&self) -> f64 {
        0.0
    }
}

/// Why sampling stopped before the requested end.
#[derive(Clone, Debug, PartialEq)]
pub enum Truncation {
    /// The next step would leave the domain of the field; the last sample
    /// is the last good one.
    DomainError { s: f64, message: String },
    /// The state became nonfinite.
    BlowUp { s: f64 },
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::DomainError { s, message } => write!(f, "domain error after s = {s}: {message}"),
            Truncation::BlowUp { s } => write!(f, "blow-up after s = {s}"),
        }
    }
}

/// Uniformly spaced samples `(s, p)` of a curve, `s` counted from the start.
#[derive(Clone)]
pub struct CurveSamples {
    pub h: f64,
    pub samples: Vec<(f64, ChartPoint)>,
    pub truncation: Option<Truncation>,
    pub field: Arc<dyn CurveField>,
}

impl fmt::Debug for CurveSamples {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CurveSamples")
            .field("h", &self.h)
            .field("samples", &self.samples)
            .field("truncation", &self.truncation)
            .finish_non_exhaustive()
    }
}

impl CurveSamples {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncation.is_some()
    }

    pub fn last(&self) -> &(f64, ChartPoint) {
        self.samples.last().expect("a curve has at least its initial sample")
    }
}

fn eval_err(s: f64, e: EvalError) -> GeodesyError {
    GeodesyError::Evaluation { s, source: FormError::Eval(e) }
}

/// Number of steps and the step that lands exactly on `s_end`.
fn step_plan(s_end: f64, h: f64) -> Result<(usize, f64), GeodesyError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(GeodesyError::BadStep(h));
    }
    if !(s_end >= 0.0 && s_end.is_finite()) {
        return Err(GeodesyError::BadRange(s_end));
    }
    let steps = (s_end / h).ceil() as usize;
    if steps == 0 {
        return Ok((0, h));
    }
    Ok((steps, s_end / steps as f64))
}

fn rk4_point(field: &dyn CurveField, s: f64, p: &ChartPoint, h: f64) -> Result<ChartPoint, EvalError> {
    let k1 = field.velocity(s, p)?;
    let k2 = field.velocity(s + h / 2.0, &k1.displace(p, h / 2.0))?;
    let k3 = field.velocity(s + h / 2.0, &k2.displace(p, h / 2.0))?;
    let k4 = field.velocity(s + h, &k3.displace(p, h))?;
    let (c1, c2, c3, c4) = (k1.components(), k2.components(), k3.components(), k4.components());
    let c: Vec<f64> =
        p.coords().iter().enumerate().map(|(i, x)| x + h / 6.0 * (c1[i] + 2.0 * c2[i] + 2.0 * c3[i] + c4[i])).collect();
    Ok(ChartPoint::from_coords(p.dim(), &c))
}

/// Integrates `field` from `init` over `s ∈ [0, s_end]`.
///
/// The step actually taken is `s_end / ⌈s_end / h⌉`, so the last sample
/// lands on `s_end`; the time coordinate of sample `k` is set to
/// `init.t + k·h·rate` rather than accumulated.
pub fn sample_curve(
    field: Arc<dyn CurveField>,
    init: &ChartPoint,
    s_end: f64,
    h: f64,
) -> Result<CurveSamples, GeodesyError> {
    if init.dim() != field.dim() {
        return Err(GeodesyError::Dimension { expected: field.dim(), actual: init.dim() });
    }
    let (steps, h) = step_plan(s_end, h)?;
    let rate = field.time_rate();
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, init.clone()));
    let mut truncation = None;
    for k in 0..steps {
        let (s, p) = samples.last().expect("nonempty");
        let s = *s;
        match rk4_point(field.as_ref(), s, p, h) {
            Err(e) => {
                truncation = Some(Truncation::DomainError { s, message: e.to_string() });
                break;
            }
            Ok(mut next) => {
                if !next.is_finite() {
                    truncation = Some(Truncation::BlowUp { s });
                    break;
                }
                let s_next = (k + 1) as f64 * h;
                next.t = init.t + s_next * rate;
                samples.push((s_next, next));
            }
        }
    }
    Ok(CurveSamples { h, samples, truncation, field })
}

/// Solves `ẍ + Γ(t, x, ẋ) = 0` from `init`; `s` is elapsed time.
pub fn integrate_geodesic(
    sys: &SecondOrderSystem,
    init: &ChartPoint,
    s_end: f64,
    h: f64,
) -> Result<CurveSamples, GeodesyError> {
    sample_curve(Arc::new(GeodesicField { system: sys.clone() }), init, s_end, h)
}

/// One sample of a development.
#[derive(Clone, Debug, PartialEq)]
pub struct DevelopedSample {
    pub s: f64,
    pub element: GalileanElement,
    pub point: ModelPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DevelopmentResult {
    pub samples: Vec<DevelopedSample>,
    /// Largest group drift seen before snapping.
    pub max_drift: f64,
}

impl DevelopmentResult {
    pub fn projected(&self) -> Vec<(f64, ModelPoint)> {
        self.samples.iter().map(|d| (d.s, d.point.clone())).collect()
    }

    pub fn last(&self) -> &DevelopedSample {
        self.samples.last().expect("a development has at least one sample")
    }
}

/// A section of the principal bundle along the curve, relative to the
/// section the connection was built on: `s ↦ diag(1, 1, A(s))`.
#[derive(Clone, Debug, PartialEq)]
pub enum Lift {
    Constant(DMatrix<f64>),
    /// `A(s) = I + s·M`.
    Linear(DMatrix<f64>),
}

impl Lift {
    fn at(&self, s: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        match self {
            Lift::Constant(a) => (a.clone(), DMatrix::zeros(a.nrows(), a.ncols())),
            Lift::Linear(m) => (DMatrix::identity(m.nrows(), m.ncols()) + m * s, m.clone()),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Lift::Constant(a) | Lift::Linear(a) => a.nrows(),
        }
    }
}

/// `ξ` pulled back along the lifted curve at `(s, p)` with tangent `v`.
fn lifted_xi(
    conn: &GalileanConnection,
    lift: Option<&Lift>,
    s: f64,
    p: &ChartPoint,
    v: &TangentVector,
) -> Result<DMatrix<f64>, GeodesyError> {
    let xi = conn.algebra_value(p, v).map_err(|source| GeodesyError::Evaluation { s, source })?;
    let Some(lift) = lift else {
        return Ok(xi.to_matrix());
    };
    // ξ_A = Ad(A⁻¹)ξ + A⁻¹A'
    let (a, a_dot) = lift.at(s);
    let a_inv = a.clone().try_inverse().ok_or(ModelError::SingularBlock { condition: f64::INFINITY })?;
    let mut gauged = xi.conjugate_by_gl(&a, &a_inv);
    gauged.a += &a_inv * a_dot;
    Ok(gauged.to_matrix())
}

fn develop_impl(
    conn: &GalileanConnection,
    curve: &CurveSamples,
    lift: Option<&Lift>,
) -> Result<DevelopmentResult, GeodesyError> {
    let n = conn.dim();
    if curve.field.dim() != n {
        return Err(GeodesyError::Dimension { expected: n, actual: curve.field.dim() });
    }
    if let Some(l) = lift {
        if l.dim() != n {
            return Err(GeodesyError::Dimension { expected: n, actual: l.dim() });
        }
    }
    let field = curve.field.as_ref();
    let h = curve.h;
    let mut g = match lift {
        None => GalileanElement::identity(n),
        Some(l) => GalileanElement::from_gl(&l.at(0.0).0),
    };
    let mut out = Vec::with_capacity(curve.len());
    let mut max_drift: f64 = 0.0;
    out.push(DevelopedSample { s: curve.samples[0].0, point: g.project(), element: g.clone() });

    for pair in curve.samples.windows(2) {
        let (s, p) = (pair[0].0, &pair[0].1);
        let stage = |ds: f64, q: &ChartPoint| -> Result<(TangentVector, DMatrix<f64>), GeodesyError> {
            let v = field.velocity(s + ds, q).map_err(|e| eval_err(s + ds, e))?;
            let xi = lifted_xi(conn, lift, s + ds, q, &v)?;
            Ok((v, xi))
        };
        let g0 = g.matrix();
        let (v1, xi1) = stage(0.0, p)?;
        let k1 = g0 * &xi1;
        let p2 = v1.displace(p, h / 2.0);
        let (v2, xi2) = stage(h / 2.0, &p2)?;
        let k2 = (g0 + &k1 * (h / 2.0)) * &xi2;
        let p3 = v2.displace(p, h / 2.0);
        let (v3, xi3) = stage(h / 2.0, &p3)?;
        let k3 = (g0 + &k2 * (h / 2.0)) * &xi3;
        let p4 = v3.displace(p, h);
        let (_, xi4) = stage(h, &p4)?;
        let k4 = (g0 + &k3 * h) * &xi4;
        let next = g0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);

        // the fixed rows only ever combine zeros and ones, so drift there
        // means corruption rather than truncation error
        let s_next = pair[1].0;
        let (snapped, drift) = GalileanElement::snapped(next);
        if drift.is_nan() || drift > MAX_GROUP_DRIFT {
            return Err(GeodesyError::Drift { s: s_next, drift });
        }
        max_drift = max_drift.max(drift);
        g = snapped;
        out.push(DevelopedSample { s: s_next, point: g.project(), element: g.clone() });
    }
    Ok(DevelopmentResult { samples: out, max_drift })
}

/// Solves `ρ̃' = ρ̃·ξ`, `ρ̃(s₀) = e`, with `ξ = (τ, ω, φ, Π)(σ̇)` along the
/// section the connection is expressed in.
pub fn develop(conn: &GalileanConnection, curve: &CurveSamples) -> Result<DevelopmentResult, GeodesyError> {
    develop_impl(conn, curve, None)
}

/// Development along the lift `σ·A(s)` of the curve, started at `A(0)` so
/// that it differs from [`develop`] by right multiplication with `A(s)`.
/// The projections to the model agree.
pub fn develop_along_lift(
    conn: &GalileanConnection,
    curve: &CurveSamples,
    lift: &Lift,
) -> Result<DevelopmentResult, GeodesyError> {
    develop_impl(conn, curve, Some(lift))
}

/// Outcome of [`check_geodesic_development`].
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicVerdict {
    pub straight: StraightLineVerdict,
    /// Largest `|ω(σ̇)|` with `σ̇` differentiated from the samples.
    pub max_omega_pullback: f64,
    /// Largest `|φ(σ̇)|` with `σ̇` differentiated from the samples.
    pub max_phi_pullback: f64,
    pub samples: usize,
    pub truncation: Option<Truncation>,
    pub tol: f64,
}

impl GeodesicVerdict {
    pub fn holds(&self) -> bool {
        self.truncation.is_none()
            && self.straight.straight
            && self.max_omega_pullback <= self.tol
            && self.max_phi_pullback <= self.tol
    }
}

/// Fourth-order finite-difference tangents of uniformly spaced samples.
pub fn sampled_tangents(curve: &CurveSamples) -> Result<Vec<TangentVector>, GeodesyError> {
    let m = curve.len();
    if m < 5 {
        return Err(GeodesyError::TooFewSamples { needed: 5, actual: m });
    }
    let n = curve.samples[0].1.dim();
    let coords: Vec<Vec<f64>> = curve.samples.iter().map(|(_, p)| p.coords()).collect();
    let h = curve.h;
    // forward one-sided weights for the first two samples; the last two
    // use the mirrored stencil
    const EDGE: [[f64; 5]; 2] = [[-25.0, 48.0, -36.0, 16.0, -3.0], [-3.0, -10.0, 18.0, -6.0, 1.0]];
    const CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
    Ok((0..m)
        .map(|k| {
            let comps: Vec<f64> = (0..2 * n + 1)
                .map(|c| {
                    let f = |i: usize| coords[i][c];
                    let sum = |w: &[f64; 5], idx: &dyn Fn(usize) -> usize| -> f64 {
                        w.iter().enumerate().map(|(i, wi)| wi * f(idx(i))).sum()
                    };
                    let d = if k < 2 {
                        sum(&EDGE[k], &|i| i)
                    } else if k + 2 >= m {
                        -sum(&EDGE[m - 1 - k], &|i| m - 1 - i)
                    } else {
                        sum(&CENTRAL, &|i| k - 2 + i)
                    };
                    d / (12.0 * h)
                })
                .collect();
            TangentVector::from_components(n, &comps)
        })
        .collect())
}

/// Integrates the geodesic from `init`, develops it and checks both that
/// the projected development is a straight line and that `ω` and `φ` pull
/// back to zero along the sampled curve.
pub fn check_geodesic_development(
    conn: &GalileanConnection,
    init: &ChartPoint,
    s_end: f64,
    h: f64,
    tol: f64,
) -> Result<GeodesicVerdict, GeodesyError> {
    let curve = integrate_geodesic(conn.system(), init, s_end, h)?;
    let dev = develop(conn, &curve)?;
    let straight = is_straight_line(&dev.projected(), tol)?;
    let tangents = sampled_tangents(&curve)?;
    let mut max_omega: f64 = 0.0;
    let mut max_phi: f64 = 0.0;
    for ((s, p), v) in curve.samples.iter().zip(&tangents) {
        let xi = conn.algebra_value(p, v).map_err(|source| GeodesyError::Evaluation { s: *s, source })?;
        max_omega = max_omega.max(xi.x.amax());
        max_phi = max_phi.max(xi.y.amax());
    }
    Ok(GeodesicVerdict {
        straight,
        max_omega_pullback: max_omega,
        max_phi_pullback: max_phi,
        samples: curve.len(),
        truncation: curve.truncation,
        tol,
    })
}

/// Pullback of the connection along the curve at a sample, using the
/// generating field's tangent.
pub fn pullback_at(
    conn: &GalileanConnection,
    curve: &CurveSamples,
    k: usize,
) -> Result<GalileanAlgebraElement, GeodesyError> {
    let (s, p) = &curve.samples[k];
    let v = curve.field.velocity(*s, p).map_err(|e| eval_err(*s, e))?;
    conn.algebra_value(p, &v).map_err(|source| GeodesyError::Evaluation { s: *s, source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::chern_connection;
    use std::f64::consts::FRAC_PI_2;

    fn sys(src: &[&str]) -> SecondOrderSystem {
        SecondOrderSystem::parse(src).unwrap()
    }

    fn p1(t: f64, x: f64, y: f64) -> ChartPoint {
        ChartPoint::new(t, vec![x], vec![y])
    }

    #[test]
    fn free_particle_is_exact() {
        let c = integrate_geodesic(&sys(&["0"]), &p1(0.0, 0.0, 1.0), 1.0, 0.1).unwrap();
        assert_eq!(c.len(), 11);
        for (k, (s, p)) in c.samples.iter().enumerate() {
            assert_eq!(p.t, k as f64 * 0.1);
            assert!((p.x[0] - s).abs() < 1e-15);
            assert_eq!(p.y[0], 1.0);
        }
    }

    #[test]
    fn oscillator_reaches_one() {
        let c = integrate_geodesic(&sys(&["x1"]), &p1(0.0, 0.0, 1.0), FRAC_PI_2, 1e-3).unwrap();
        let (s, p) = c.last();
        assert!((s - FRAC_PI_2).abs() < 1e-12);
        assert!((p.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quadratic_drag_closed_form() {
        let c = integrate_geodesic(&sys(&["y1^2"]), &p1(0.0, 0.0, 1.0), 2.0, 1e-3).unwrap();
        for (s, p) in &c.samples {
            assert!((p.y[0] - 1.0 / (1.0 + s)).abs() < 1e-6);
            assert!((p.x[0] - (1.0 + s).ln()).abs() < 1e-6);
        }
    }

    #[test]
    fn blow_up_is_flagged() {
        // ẏ = y² from y = 1 blows up at s = 1
        let c = integrate_geodesic(&sys(&["-y1^2"]), &p1(0.0, 0.0, 1.0), 2.0, 0.01).unwrap();
        assert!(matches!(c.truncation, Some(Truncation::BlowUp { .. }) | Some(Truncation::DomainError { .. })));
        assert!(c.last().0 < 1.1);
        assert!(c.samples.iter().all(|(_, p)| p.is_finite()));
    }

    #[test]
    fn domain_error_keeps_last_good_sample() {
        // x(s) = 1 − s reaches the branch point of sqrt at s = 1
        let c = integrate_geodesic(&sys(&["sqrt(x1) - sqrt(x1)"]), &p1(0.0, 1.0, -1.0), 2.0, 0.1).unwrap();
        assert!(matches!(c.truncation, Some(Truncation::DomainError { .. })));
        assert!(c.last().1.x[0] >= 0.0);
    }

    #[test]
    fn bad_steps_are_rejected() {
        let s = sys(&["0"]);
        assert_eq!(integrate_geodesic(&s, &p1(0.0, 0.0, 0.0), 1.0, 0.0).unwrap_err(), GeodesyError::BadStep(0.0));
        assert!(integrate_geodesic(&s, &p1(0.0, 0.0, 0.0), -1.0, 0.1).is_err());
    }

    #[test]
    fn flat_geodesic_develops_along_time_axis() {
        let s = sys(&["0"]);
        let conn = chern_connection(&s).unwrap();
        let c = integrate_geodesic(&s, &p1(0.0, 0.3, 0.7), 1.0, 0.1).unwrap();
        let dev = develop(&conn, &c).unwrap();
        assert_eq!(dev.samples[0].element, GalileanElement::identity(1));
        assert_eq!(dev.samples[0].point, ModelPoint::origin(1));
        for d in &dev.samples {
            assert!((d.point.t - d.s).abs() < 1e-14);
            assert!(d.point.x.amax() < 1e-14 && d.point.y.amax() < 1e-14);
        }
    }

    #[test]
    fn parabola_is_not_straight() {
        let conn = chern_connection(&sys(&["0"])).unwrap();
        let curve = ParametricCurve::parse(&["t^2"]).unwrap();
        let init = curve.point_at(0.0).unwrap();
        let c = sample_curve(Arc::new(curve), &init, 1.0, 0.01).unwrap();
        let dev = develop(&conn, &c).unwrap();
        // φ(σ̇) = 2, so the developed velocity grows linearly
        assert!((dev.last().point.y[0] - 2.0).abs() < 1e-12);
        let verdict = is_straight_line(&dev.projected(), 1e-6).unwrap();
        assert!(!verdict.straight);
    }

    #[test]
    fn stationary_curve_develops_to_identity() {
        let conn = chern_connection(&sys(&["x1*y1"])).unwrap();
        let c = sample_curve(Arc::new(Stationary { n: 1 }), &p1(0.2, 0.5, -0.4), 1.0, 0.1).unwrap();
        assert!(c.samples.iter().all(|(_, p)| *p == p1(0.2, 0.5, -0.4)));
        let dev = develop(&conn, &c).unwrap();
        assert!(dev.samples.iter().all(|d| d.element == GalileanElement::identity(1)));
        assert!(is_straight_line(&dev.projected(), 1e-6).unwrap().degenerate(1e-6));
    }

    #[test]
    fn oscillator_geodesic_checks_out() {
        let conn = chern_connection(&sys(&["x1"])).unwrap();
        let v = check_geodesic_development(&conn, &p1(0.0, 0.0, 1.0), 1.0, 1e-3, 1e-5).unwrap();
        assert!(v.holds(), "{v:?}");
    }

    #[test]
    fn sampled_tangents_are_fourth_order() {
        let curve = ParametricCurve::parse(&["sin(t)"]).unwrap();
        let c = sample_curve(Arc::new(curve.clone()), &curve.point_at(0.0).unwrap(), 1.0, 0.01).unwrap();
        let tangents = sampled_tangents(&c).unwrap();
        for ((s, _), v) in c.samples.iter().zip(&tangents) {
            assert!((v.t - 1.0).abs() < 1e-12);
            assert!((v.x[0] - s.cos()).abs() < 1e-8, "{s}");
            assert!((v.y[0] + s.sin()).abs() < 1e-8, "{s}");
        }
    }

    #[test]
    fn lift_does_not_change_projection() {
        let conn = chern_connection(&sys(&["sin(x1)*y2 + t", "x2*y1^2"])).unwrap();
        let init = ChartPoint::new(0.0, vec![0.2, -0.3], vec![0.5, 0.4]);
        let c = integrate_geodesic(conn.system(), &init, 1.0, 0.01).unwrap();
        let base = develop(&conn, &c).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[0.3, -0.2, 0.1, 0.4]);
        for lift in [Lift::Constant(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, -0.3, 1.2])), Lift::Linear(m)] {
            let other = develop_along_lift(&conn, &c, &lift).unwrap();
            for (a, b) in base.samples.iter().zip(&other.samples) {
                assert!(a.point.max_abs_difference(&b.point) < 1e-8);
            }
        }
    }
}
