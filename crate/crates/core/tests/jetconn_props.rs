mod common;

use common::{normalization, point, small_expr, system};
use galilean_core::connection::{build_connection, chern_connection, extract_invariants};
use galilean_core::jetconn::{
    appendix_check, commutator, from_coordinate_frame, to_coordinate_frame, torsion, AdaptedVectorField, FrameIndex,
    NonlinearConnection,
};
use galilean_core::{ChartPoint, NormalizationChoice, SecondOrderSystem};
use proptest::prelude::*;

fn frame_index(n: usize) -> impl Strategy<Value = FrameIndex> {
    prop_oneof![Just(FrameIndex::Time), (0..n).prop_map(FrameIndex::Horizontal), (0..n).prop_map(FrameIndex::Vertical),]
}

fn adapted_field(n: usize) -> impl Strategy<Value = AdaptedVectorField> {
    (small_expr(n), proptest::collection::vec(small_expr(n), n), proptest::collection::vec(small_expr(n), n))
        .prop_map(|(time, horizontal, vertical)| AdaptedVectorField { time, horizontal, vertical })
}

fn sys_point(max_n: usize) -> impl Strategy<Value = (SecondOrderSystem, ChartPoint)> {
    system(max_n).prop_flat_map(|s| {
        let n = s.dim();
        (Just(s), point(n, 1.0))
    })
}

fn sys_norm_points() -> impl Strategy<Value = (SecondOrderSystem, NormalizationChoice, Vec<ChartPoint>)> {
    system(2).prop_flat_map(|s| {
        let n = s.dim();
        (Just(s), normalization(n), proptest::collection::vec(point(n, 1.0), 5))
    })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn scale(a: &[f64]) -> f64 {
    1.0 + a.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frame_change_round_trips(
        ((sys, p), v) in sys_point(3).prop_flat_map(|(s, p)| { let n = s.dim(); (Just((s, p)), adapted_field(n)) })
    ) {
        let nl = NonlinearConnection::chern(&sys);
        let back = from_coordinate_frame(&to_coordinate_frame(&v, &nl), &nl);
        let (a, b) = (v.evaluate(&p).unwrap(), back.evaluate(&p).unwrap());
        prop_assert!(max_diff(&a, &b) <= 1e-12 * scale(&a));
    }

    #[test]
    fn torsion_is_antisymmetric(
        ((sys, p), x, y) in sys_point(3).prop_flat_map(|(s, p)| {
            let n = s.dim();
            (Just((s, p)), frame_index(n), frame_index(n))
        })
    ) {
        let nl = NonlinearConnection::chern(&sys);
        let a = torsion(x, y, &nl).evaluate(&p).unwrap();
        let b = torsion(y, x, &nl).evaluate(&p).unwrap();
        let neg_b: Vec<f64> = b.iter().map(|v| -v).collect();
        prop_assert!(max_diff(&a, &neg_b) <= 1e-12 * scale(&a));
    }

    #[test]
    fn bracket_satisfies_jacobi(
        ((sys, p), u, v, w) in sys_point(2).prop_flat_map(|(s, p)| {
            let n = s.dim();
            (Just((s, p)), adapted_field(n), adapted_field(n), adapted_field(n))
        })
    ) {
        let nl = NonlinearConnection::chern(&sys);
        let br = |a: &AdaptedVectorField, b: &AdaptedVectorField| commutator(a, b, &nl);
        let total = br(&u, &br(&v, &w)).add(&br(&v, &br(&w, &u))).add(&br(&w, &br(&u, &v)));
        let terms = [br(&u, &br(&v, &w)), br(&v, &br(&w, &u)), br(&w, &br(&u, &v))];
        let size = terms.iter().map(|t| scale(&t.evaluate(&p).unwrap())).fold(1.0, f64::max);
        let residual = total.evaluate(&p).unwrap();
        prop_assert!(scale(&residual) - 1.0 <= 1e-10 * size);
    }

    #[test]
    fn chern_field_matches_cartan_side((sys, p) in sys_point(3)) {
        let from_cartan = NonlinearConnection::from_galilean(&chern_connection(&sys).unwrap());
        let direct = NonlinearConnection::chern(&sys);
        for (r1, r2) in from_cartan.nfield().iter().zip(direct.nfield()) {
            for (a, b) in r1.iter().zip(r2) {
                prop_assert!((a.evaluate(&p).unwrap() - b.evaluate(&p).unwrap()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn vertical_torsion_tracks_the_normalization((sys, norm, points) in sys_norm_points()) {
        let chern = appendix_check(&chern_connection(&sys).unwrap(), &points);
        prop_assert!(chern.skipped.is_empty());
        prop_assert!(chern.vertical_torsion <= 1e-12);
        prop_assert!(chern.formula_residual <= 1e-12);

        let conn = build_connection(&sys, &norm).unwrap();
        let report = appendix_check(&conn, &points);
        let d_max = points.iter().map(|p| norm.d_at(p).unwrap().amax()).fold(0.0, f64::max);
        prop_assert!((report.vertical_torsion - d_max).abs() <= 1e-12 * (1.0 + d_max));
        prop_assert!(report.formula_residual <= 1e-12 * (1.0 + d_max));
        let t_max = points
            .iter()
            .map(|p| extract_invariants(&conn, p).unwrap().torsion.iter().map(|m| m.amax()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        prop_assert!(report.horizontal_torsion_residual <= 1e-10 * (1.0 + t_max));
    }
}
