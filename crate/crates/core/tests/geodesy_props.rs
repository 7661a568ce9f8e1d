mod common;

use common::{gauge_matrix, point, system};
use galilean_core::connection::chern_connection;
use galilean_core::geodesy::{
    check_geodesic_development, develop, develop_along_lift, integrate_geodesic, pullback_at, Lift,
};
use galilean_core::model::{GalileanElement, ModelPoint};
use galilean_core::{ChartPoint, SecondOrderSystem};
use proptest::prelude::*;

fn system_and_init() -> impl Strategy<Value = (SecondOrderSystem, ChartPoint)> {
    system(3).prop_flat_map(|s| {
        let n = s.dim();
        (Just(s), point(n, 0.5))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn development_starts_at_identity((sys, init) in system_and_init()) {
        let conn = chern_connection(&sys).unwrap();
        let curve = integrate_geodesic(&sys, &init, 0.1, 1e-2).unwrap();
        let dev = develop(&conn, &curve).unwrap();
        let n = sys.dim();
        prop_assert_eq!(&dev.samples[0].element, &GalileanElement::identity(n));
        prop_assert_eq!(&dev.samples[0].point, &ModelPoint::origin(n));
    }

    #[test]
    fn geodesics_pull_back_to_the_time_direction((sys, init) in system_and_init()) {
        let conn = chern_connection(&sys).unwrap();
        let curve = integrate_geodesic(&sys, &init, 0.5, 1e-2).unwrap();
        for k in 0..curve.len() {
            let xi = pullback_at(&conn, &curve, k).unwrap();
            prop_assert!(xi.x.amax() <= 1e-14 && xi.y.amax() <= 1e-12, "{xi:?}");
        }
    }

    #[test]
    fn geodesics_develop_to_straight_lines((sys, init) in system_and_init()) {
        let conn = chern_connection(&sys).unwrap();
        let verdict = check_geodesic_development(&conn, &init, 1.0, 1e-3, 1e-5).unwrap();
        prop_assume!(verdict.truncation.is_none());
        prop_assert!(verdict.holds(), "{verdict:?}");
    }

    #[test]
    fn projection_ignores_the_lift(
        ((sys, init), a, m) in system_and_init().prop_flat_map(|(s, p)| {
            let n = s.dim();
            (Just((s, p)), gauge_matrix(n), gauge_matrix(n))
        })
    ) {
        let conn = chern_connection(&sys).unwrap();
        let curve = integrate_geodesic(&sys, &init, 0.5, 1e-3).unwrap();
        prop_assume!(!curve.is_truncated());
        let base = develop(&conn, &curve).unwrap().projected();
        let n = sys.dim();
        let m = m - nalgebra::DMatrix::identity(n, n);
        for lift in [Lift::Constant(a), Lift::Linear(m)] {
            let other = develop_along_lift(&conn, &curve, &lift).unwrap().projected();
            let gap = base.iter().zip(&other).map(|(p, q)| p.1.max_abs_difference(&q.1)).fold(0.0, f64::max);
            prop_assert!(gap <= 1e-8, "{lift:?}: {gap}");
        }
    }
}
