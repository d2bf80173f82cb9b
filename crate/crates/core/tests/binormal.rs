use std::f64::consts::PI;
use std::sync::Arc;

use filament_core::binormal::{
    axis_switch_check, corner_count, evolve, evolve_with, init_circle, init_polygon, momentum,
    momentum_drift, momentum_series, CurveState, EvolveOptions, Laplacian, TalbotTime,
};
use filament_core::geometry::{SampledCurve, Topology, Vec3};
use filament_core::profile::{ProfileEvaluator, ProfileOptions};
use filament_core::Error;

fn talbot_run(n: usize) -> (CurveState, Vec<CurveState>) {
    let s0 = init_polygon(3, n).unwrap();
    let h = s0.h();
    let t13 = TalbotTime::new(3, 1, 3).unwrap().value;
    let snaps = evolve(&s0, PI / 9.0, 0.2 * h * h, &[t13]).unwrap();
    (s0, snaps)
}

#[test]
fn square_has_four_corners_and_quarter_sides() {
    let s = init_polygon(4, 256).unwrap();
    assert_eq!(corner_count(&s, 5.0).count, 4);
    let t = s.tangents();
    // Tangent turns by the exterior angle at each corner.
    for j in 0..4 {
        let a = t[j * 64];
        let b = t[((j + 1) * 64) % 256];
        assert!((a.dot(&b).acos() - PI / 2.0).abs() < 1e-12);
    }
    let p = &s.curve.points;
    // Nodes 0 and 63 lie on the first side at distance 63h.
    assert!(((p[63] - p[0]).norm() - 63.0 * s.h()).abs() < 1e-12);
    assert!(s.curve.centroid().norm() < 1e-12);
    assert!(p.iter().all(|q| q.z == 0.0));
    assert!((s.h() * 256.0 - 2.0 * PI).abs() < 1e-12);
    // Corners sit half a cell outside the first and last node of a side.
    let v0 = p[0] - t[0] * (0.5 * s.h());
    let v1 = p[63] + t[0] * (0.5 * s.h());
    assert!(((v1 - v0).norm() - PI / 2.0).abs() < 1e-12);
}

#[test]
fn polygon_needs_a_compatible_node_count() {
    assert!(init_polygon(3, 100).is_err());
    assert!(init_polygon(2, 64).is_err());
    assert!(init_polygon(3, 99).is_err());
}

#[test]
fn polygon_momentum_is_twice_the_enclosed_area() {
    let s = init_polygon(3, 768).unwrap();
    let side = 2.0 * PI / 3.0;
    let area = 3f64.sqrt() / 4.0 * side * side;
    let m = momentum(&s);
    assert!((m.z - 2.0 * area).abs() < 1e-4 * 2.0 * area, "{m:?}");
    assert!(m.x.abs() < 1e-12 && m.y.abs() < 1e-12);
}

#[test]
fn circle_translates_rigidly_at_unit_speed() {
    let s0 = init_circle(128).unwrap();
    let h = s0.h();
    let out = evolve(&s0, 1.0, 0.2 * h * h, &[0.0, 0.5]).unwrap();
    assert_eq!(out.len(), 3);
    // Discrete curvature of the sampled circle is exactly one, so the speed is one.
    for st in &out {
        assert!(
            (st.curve.centroid() - Vec3::z() * st.t).norm() < 1e-10,
            "t = {}",
            st.t
        );
        for (p, q) in st.curve.points.iter().zip(&out[0].curve.points) {
            let want = q + Vec3::z() * st.t;
            assert!(
                (p - want).norm() < 1e-6,
                "t = {}: {:.3e}",
                st.t,
                (p - want).norm()
            );
        }
        for (a, b) in st.tangents().iter().zip(s0.tangents()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
    assert_eq!(corner_count(&out[2], 5.0).count, 0);
}

#[test]
fn straight_line_is_stationary() {
    let n = 101;
    let s: Vec<f64> = (0..n).map(|i| -1.0 + 0.02 * i as f64).collect();
    let p: Vec<Vec3> = s.iter().map(|&x| Vec3::new(x, 0.0, 0.0)).collect();
    let t = vec![Vec3::x(); n];
    let st = CurveState::new(
        0.0,
        SampledCurve::new(Topology::OpenTruncated, s, p.clone(), Some(t)).unwrap(),
    )
    .unwrap();
    let mut o = EvolveOptions::new(1e-4);
    o.laplacian = Laplacian::SecondDifference;
    o.boundary = Some(Arc::new(|_, _| Vec3::x()));
    let out = evolve_with(&st, 0.1, &o, &[]).unwrap();
    for (a, b) in out[0].curve.points.iter().zip(&p) {
        assert!((a - b).norm() < 1e-14);
    }
}

fn selfsimilar_error(n: usize) -> f64 {
    let a = 0.5;
    let ev = Arc::new(ProfileEvaluator::new(a, 16.0, 0.5, &ProfileOptions::default()).unwrap());
    let l = 10.0;
    let h = 2.0 * l / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| -l + i as f64 * h).collect();
    let exact = |t: f64| -> (Vec<Vec3>, Vec<Vec3>) {
        let rt = t.sqrt();
        xs.iter()
            .map(|x| {
                let (g, gp) = ev.eval(x / rt).unwrap();
                (g * rt, gp)
            })
            .unzip()
    };
    let (p0, t0) = exact(0.5);
    let curve = SampledCurve::new(Topology::OpenTruncated, xs.clone(), p0, Some(t0)).unwrap();
    let st = CurveState::new(0.5, curve).unwrap();
    let bc = ev.clone();
    let mut o = EvolveOptions::new(0.2 * h * h);
    o.laplacian = Laplacian::SecondDifference;
    o.boundary = Some(Arc::new(move |t: f64, s: f64| {
        bc.eval(s / t.sqrt()).unwrap().1
    }));
    let out = evolve_with(&st, 1.0, &o, &[]).unwrap();
    let (p1, _) = exact(1.0);
    xs.iter()
        .zip(out[0].curve.points.iter().zip(&p1))
        .filter(|(x, _)| x.abs() <= 5.0)
        .map(|(_, (p, q))| (p - q).norm())
        .fold(0.0, f64::max)
}

#[test]
fn truncated_selfsimilar_curve_follows_the_exact_family_at_second_order() {
    let e1 = selfsimilar_error(501);
    let e2 = selfsimilar_error(1001);
    assert!(e2 < 1e-3, "{e2:.3e}");
    let rate = (e1 / e2).log2();
    assert!((rate - 2.0).abs() < 0.2, "observed order {rate}");
}

#[test]
fn open_curves_need_boundary_data_and_second_differences() {
    let s: Vec<f64> = (0..16).map(|i| i as f64 * 0.1).collect();
    let p: Vec<Vec3> = s.iter().map(|&x| Vec3::new(x, 0.0, 0.0)).collect();
    let st = CurveState::new(
        0.0,
        SampledCurve::new(Topology::OpenTruncated, s, p, Some(vec![Vec3::x(); 16])).unwrap(),
    )
    .unwrap();
    assert!(evolve(&st, 0.1, 1e-3, &[]).is_err());
    let mut o = EvolveOptions::new(1e-3);
    o.laplacian = Laplacian::SecondDifference;
    assert!(evolve_with(&st, 0.1, &o, &[]).is_err());
}

#[test]
fn oversized_time_step_trips_the_cfl_detector() {
    let s0 = init_polygon(3, 96).unwrap();
    let h = s0.h();
    match evolve(&s0, 0.01, 2.0 * h * h, &[]) {
        Err(Error::Tolerance(msg)) => assert!(msg.contains("CFL")),
        other => panic!("expected a CFL failure, got {other:?}"),
    }
}

#[test]
fn snapshots_must_lie_inside_the_run() {
    let s0 = init_circle(32).unwrap();
    assert!(evolve(&s0, 0.1, 1e-4, &[0.2]).is_err());
    assert!(evolve(&s0, 0.1, 1e-4, &[0.05, 0.01]).is_err());
}

#[test]
fn evolving_forward_and_back_recovers_the_tangents() {
    let s0 = init_polygon(3, 96).unwrap();
    let h = s0.h();
    let err = |fac: f64| {
        let fwd = evolve(&s0, 0.02, fac * h * h, &[]).unwrap().pop().unwrap();
        let back = evolve(&fwd, 0.0, fac * h * h, &[]).unwrap().pop().unwrap();
        back.tangents()
            .iter()
            .zip(s0.tangents())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.05), err(0.025));
    assert!(e1 < 1e-3, "{e1:.3e}");
    assert!(e1 / e2 > 16.0, "{e1:.3e} -> {e2:.3e}");
}

#[test]
fn triangle_shows_nine_corners_at_the_first_third_of_the_period() {
    for n in [384, 768] {
        let (s0, snaps) = talbot_run(n);
        assert_eq!(corner_count(&s0, 5.0).count, 3);
        let c = corner_count(&snaps[0], 5.0);
        assert_eq!(c.count, 9, "n = {n}: {c:?}");
        assert!(!c.ambiguous);
        assert_eq!(corner_count(&snaps[1], 5.0).count, 3, "n = {n}");
        let ax = axis_switch_check(&snaps[1], &s0, 3).unwrap();
        assert!(ax.residual < 1e-2 * ax.diameter, "n = {n}: {ax:?}");
        // Measured switch: half the symmetry angle.
        assert!(
            (ax.angle_mod_symmetry - PI / 3.0).abs() < 1e-2,
            "n = {n}: {ax:?}"
        );
        for s in &snaps {
            assert!(s.curve.tangent_norm_defect() < 1e-12);
        }
    }
}

#[test]
fn square_realigns_at_half_period() {
    let s0 = init_polygon(4, 512).unwrap();
    let h = s0.h();
    let snaps = evolve(&s0, PI / 16.0, 0.2 * h * h, &[]).unwrap();
    assert_eq!(corner_count(&snaps[0], 5.0).count, 4);
    let ax = axis_switch_check(&snaps[0], &s0, 4).unwrap();
    assert!(ax.residual < 1e-2 * ax.diameter, "{ax:?}");
    assert!((ax.angle_mod_symmetry - PI / 4.0).abs() < 1e-2, "{ax:?}");
}

#[test]
fn initial_polygon_aligns_with_itself() {
    let s0 = init_polygon(3, 96).unwrap();
    let ax = axis_switch_check(&s0, &s0, 3).unwrap();
    assert!(
        ax.angle_mod_symmetry < 1e-12 && ax.residual < 1e-12,
        "{ax:?}"
    );
}

#[test]
fn momentum_drift_shrinks_with_the_time_step() {
    let s0 = init_polygon(3, 192).unwrap();
    let h = s0.h();
    let t13 = 2.0 * PI / 27.0;
    let drift = |fac: f64| {
        let mut snaps = vec![s0.clone()];
        snaps.extend(evolve(&s0, t13, fac * h * h, &[]).unwrap());
        momentum_drift(&momentum_series(&snaps).unwrap())
    };
    let (d1, d2) = (drift(0.2), drift(0.05));
    assert!(d2 < d1, "{d1:.3e} -> {d2:.3e}");
}

#[test]
fn momentum_series_rejects_mixed_topologies() {
    let c = init_circle(16).unwrap();
    let s: Vec<f64> = (0..16).map(|i| i as f64).collect();
    let p: Vec<Vec3> = s.iter().map(|&x| Vec3::new(x, 0.0, 0.0)).collect();
    let o = CurveState::new(
        0.0,
        SampledCurve::new(Topology::OpenTruncated, s, p, Some(vec![Vec3::x(); 16])).unwrap(),
    )
    .unwrap();
    assert!(momentum_series(&[c, o]).is_err());
}

#[test]
fn truncated_selfsimilar_momentum_matches_endpoint_form() {
    let a = 0.5;
    let ev = ProfileEvaluator::new(a, 40.0, 0.5, &ProfileOptions::default()).unwrap();
    let l = 10.0;
    let n = 4001;
    for t in [0.1, 0.5, 1.0] {
        let rt: f64 = f64::sqrt(t);
        let xs: Vec<f64> = (0..n)
            .map(|i| -l + 2.0 * l * i as f64 / (n - 1) as f64)
            .collect();
        let (p, tg): (Vec<Vec3>, Vec<Vec3>) = xs
            .iter()
            .map(|x| {
                let (g, gp) = ev.eval(x / rt).unwrap();
                (g * rt, gp)
            })
            .unzip();
        let st = CurveState::new(
            t,
            SampledCurve::new(Topology::OpenTruncated, xs, p, Some(tg)).unwrap(),
        )
        .unwrap();
        let m = momentum(&st);
        let gp_plus = ev.eval(l / rt).unwrap().1;
        let gp_minus = ev.eval(-l / rt).unwrap().1;
        let want = (gp_plus - gp_minus) * (t / ev.kappa);
        assert!((m - want).norm() < 1e-3, "t = {t}: {m:?} vs {want:?}");
    }
}
