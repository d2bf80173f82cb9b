use filament_core::frames::{
    decay_exponent, hasimoto_transport, hasimoto_transport_fn, modulate, psi_selfsimilar,
    reflect_continuation, schrodinger_map_residual, schrodinger_map_residual_signed,
    selfsimilar_frame_field, selfsimilar_limits, trace_system_solve_with, FHat, SelfSimilarLimits,
    TraceOptions,
};
use filament_core::geometry::{axis_angle, cnorm, re_im, OrthoFrame, Vec3};
use filament_core::profile::{ProfileEvaluator, ProfileOptions};
use nalgebra::Matrix3;
use num_complex::Complex64;

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn evaluator(a: f64, s: f64) -> ProfileEvaluator {
    ProfileEvaluator::new(a, s, 0.5, &ProfileOptions::default()).unwrap()
}

fn limits(a: f64) -> SelfSimilarLimits {
    selfsimilar_limits(&evaluator(a, 200.0), 200.0).unwrap()
}

#[test]
fn transport_of_selfsimilar_psi_reproduces_profile_tangent() {
    let a = 0.5;
    let ev = evaluator(a, 12.0);
    let grid = uniform(-10.0, 10.0, 2001);
    let psi = |x: f64| psi_selfsimilar(a, ev.kappa, 1.0, x);
    let field = hasimoto_transport_fn(psi, &grid, 1.0, &OrthoFrame::identity(), 0.0, 2).unwrap();
    let mut err = 0.0_f64;
    for (x, f) in grid.iter().zip(&field.frames) {
        let (_, gp) = ev.eval(*x).unwrap();
        err = err.max((f.t - gp).norm());
    }
    assert!(err < 1e-6, "tangent mismatch {err:.3e}");
    assert!(field.drift_before_projection < 1e-12);
    assert!(field.first_row_defect() < 1e-8);
}

#[test]
fn sampled_transport_converges_to_profile_tangent() {
    let a = 0.5;
    let ev = evaluator(a, 6.0);
    let err = |n: usize| {
        let grid = uniform(-5.0, 5.0, n);
        let psi: Vec<Complex64> = grid
            .iter()
            .map(|&x| psi_selfsimilar(a, ev.kappa, 1.0, x))
            .collect();
        let field =
            hasimoto_transport(&psi, &grid, 1.0, &OrthoFrame::identity(), grid[(n - 1) / 2])
                .unwrap();
        grid.iter()
            .zip(&field.frames)
            .map(|(x, f)| (f.t - ev.eval(*x).unwrap().1).norm())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(501), err(1001));
    let rate = (e1 / e2).log2();
    assert!(rate > 1.8 && rate < 2.2, "observed order {rate}");
    assert!(err(8001) < 1e-6);
}

#[test]
fn transport_rejects_non_finite_samples_and_off_grid_origin() {
    let grid = uniform(0.0, 1.0, 5);
    let mut psi = vec![Complex64::new(1.0, 0.0); 5];
    assert!(hasimoto_transport(&psi, &grid, 1.0, &OrthoFrame::identity(), 0.3).is_err());
    psi[2] = Complex64::new(f64::NAN, 0.0);
    assert!(hasimoto_transport(&psi, &grid, 1.0, &OrthoFrame::identity(), 0.0).is_err());
}

#[test]
fn modulated_field_limits_orthogonality_and_decay() {
    let a = 0.5;
    let ev = evaluator(a, 64.0);
    let grid = uniform(-60.0, 60.0, 12001);
    let field = selfsimilar_frame_field(&ev, 1.0, &grid).unwrap();
    let m = modulate(&field, a, 1e-2).unwrap();
    assert_eq!(m.base.len(), grid.len() - 1);
    for n in &m.n_tilde {
        let (re, im) = re_im(n);
        assert!((re.norm() - 1.0).abs() < 1e-9 && (im.norm() - 1.0).abs() < 1e-9);
        assert!(re.dot(&im).abs() < 1e-8);
    }
    let (re, im) = re_im(&m.n_inf_plus);
    assert!(
        re.dot(&im).abs() < 1e-6,
        "Re N+ . Im N+ = {:.3e}",
        re.dot(&im)
    );
    let p = m.decay_exponent_n().unwrap();
    assert!((-1.3..=-0.8).contains(&p), "g_N decay exponent {p}");
    let q = m.decay_exponent_t().unwrap();
    assert!(q <= -0.8, "g_T decay exponent {q}");
    let b1 = m.n_inf_plus.x.norm_sqr();
    let want = 1.0 - (-std::f64::consts::PI * a * a).exp();
    assert!(
        (4.0 * b1 - 4.0 * want).abs() < 1e-2 * 4.0 * want,
        "4|B1|^2 = {}",
        4.0 * b1
    );
}

#[test]
fn quadrature_limits_agree_with_node_windows_and_corner_law() {
    let a = 0.5;
    let l = limits(a);
    let a1 = (-std::f64::consts::PI * a * a / 2.0).exp();
    assert!((l.a_plus.x - a1).abs() < 1e-4 * a1);
    assert!((l.b_plus.x.norm_sqr() - (1.0 - a1 * a1)).abs() < 1e-4);
    assert!(l.frame_plus().orthonormality_error() < 1e-12);
    let (re, im) = re_im(&l.b_minus);
    assert!(re.dot(&im).abs() < 1e-5);
}

#[test]
fn decay_fit_recovers_power_law() {
    let x = uniform(0.5, 100.0, 40000);
    let g: Vec<f64> = x
        .iter()
        .map(|x| 3.0 * x.powf(-1.1) * (1.0 + 0.2 * (40.0 * x).cos()))
        .collect();
    let p = decay_exponent(&x, &g).unwrap();
    assert!((p + 1.1).abs() < 0.05, "{p}");
}

#[test]
fn schrodinger_map_residual_vanishes_for_straight_line() {
    let ev = evaluator(0.0, 10.0);
    let r = schrodinger_map_residual(&ev, &[0.9, 1.0, 1.1], &uniform(-5.0, 5.0, 101)).unwrap();
    assert!(r < 1e-12, "{r:.3e}");
}

#[test]
fn schrodinger_map_residual_converges_at_second_order() {
    let ev = evaluator(0.5, 10.0);
    let run = |h: f64| {
        let n = (10.0 / h).round() as usize + 1;
        schrodinger_map_residual(&ev, &[1.0 - h, 1.0, 1.0 + h], &uniform(-5.0, 5.0, n)).unwrap()
    };
    let (r1, r2) = (run(0.05), run(0.025));
    let ratio = r1 / r2;
    assert!((ratio - 4.0).abs() < 0.8, "refinement ratio {ratio}");
    let wrong =
        schrodinger_map_residual_signed(&ev, &[0.975, 1.0, 1.025], &uniform(-5.0, 5.0, 401), -1.0)
            .unwrap();
    let wrong_fine = schrodinger_map_residual_signed(
        &ev,
        &[0.9875, 1.0, 1.0125],
        &uniform(-5.0, 5.0, 801),
        -1.0,
    )
    .unwrap();
    assert!(
        wrong > 0.1 && wrong_fine > 0.9 * wrong,
        "{wrong} {wrong_fine}"
    );
}

#[test]
fn schrodinger_map_residual_needs_three_times() {
    let ev = evaluator(0.5, 10.0);
    assert!(schrodinger_map_residual(&ev, &[1.0, 1.1], &uniform(-1.0, 1.0, 11)).is_err());
}

#[test]
fn zero_trace_data_gives_pure_corner() {
    let l = limits(0.5);
    let r = axis_angle(&Vec3::new(1.0, 2.0, 3.0), 0.7);
    let tr = trace_system_solve_with(&FHat::zero(), &l, &r, 10.0, 1e-3, &TraceOptions::default())
        .unwrap();
    let (ap, am) = (r * l.frame_plus().t, r * l.frame_minus().t);
    for (x, t) in tr.x_grid.iter().zip(&tr.t0) {
        let want = if *x > 0.0 { ap } else { am };
        assert!((t - want).norm() < 1e-12);
    }
    assert!(tr.max_orthonormality_error() < 1e-12);
}

#[test]
fn small_trace_data_obeys_linear_bound() {
    let l = limits(0.5);
    let f = FHat::gaussian(0.05, 1.0);
    let tr = trace_system_solve_with(
        &f,
        &l,
        &Matrix3::identity(),
        20.0,
        1e-3,
        &TraceOptions::default(),
    )
    .unwrap();
    let bound = f.trace_l1(20.0);
    let mut dev = 0.0_f64;
    for (x, t) in tr.x_grid.iter().zip(&tr.t0) {
        let base = if *x > 0.0 {
            l.frame_plus().t
        } else {
            l.frame_minus().t
        };
        dev = dev.max((t - base).norm());
    }
    assert!(dev > 0.0 && dev <= bound, "deviation {dev} bound {bound}");
    assert!(tr.max_orthonormality_error() < 1e-12);
}

#[test]
fn halving_eps0_changes_solution_by_order_eps0() {
    let l = limits(0.5);
    let f = FHat::gaussian(0.3, 1.0);
    let opts = TraceOptions::default();
    let eps0 = 1e-2;
    let t1 = trace_system_solve_with(&f, &l, &Matrix3::identity(), 5.0, eps0, &opts).unwrap();
    let t2 = trace_system_solve_with(&f, &l, &Matrix3::identity(), 5.0, eps0 / 2.0, &opts).unwrap();
    for x in [-4.0, -1.0, 0.5, 3.0] {
        let (ta, na) = t1.interpolate(x).unwrap();
        let (tb, nb) = t2.interpolate(x).unwrap();
        let d = (ta - tb).norm().max(cnorm(&(na - nb)));
        assert!(d <= 0.3 * eps0, "x = {x}: change {d:.3e}");
    }
}

#[test]
fn reflection_is_an_involution_preserving_the_jump() {
    let l = limits(0.5);
    let f = FHat::bump(0.2, 3.0);
    let tr = trace_system_solve_with(
        &f,
        &l,
        &Matrix3::identity(),
        8.0,
        1e-3,
        &TraceOptions::default(),
    )
    .unwrap();
    let rf = reflect_continuation(&tr);
    let rr = reflect_continuation(&rf);
    for k in 0..tr.x_grid.len() {
        assert_eq!(rr.x_grid[k], tr.x_grid[k]);
        assert!((rr.t0[k] - tr.t0[k]).norm() < 1e-15);
        assert!(cnorm(&(rr.n0_tilde[k] - tr.n0_tilde[k])) < 1e-15);
    }
    let ((tm, _), (tp, _)) = tr.inner_values();
    let ((sm, _), (sp, _)) = rf.inner_values();
    assert!(((tp - tm).norm() - (sp - sm).norm()).abs() < 1e-14);
    assert!(rf.max_orthonormality_error() < 1e-12);
    let x = 1.7;
    let (t, n) = rf.interpolate(x).unwrap();
    let h = 1e-4;
    let (t2, n2) = rf.interpolate(x + h).unwrap();
    let (t1, n1) = rf.interpolate(x - h).unwrap();
    let tx = (t2 - t1) / (2.0 * h);
    let nx = (n2 - n1) / Complex64::new(2.0 * h, 0.0);
    let phi = rf.phi(x);
    let tx_want = n.map(|z| (phi.conj() * z).re);
    let nx_want = t.map(|v| -phi * v);
    assert!((tx - tx_want).norm() < 1e-3 && cnorm(&(nx - nx_want)) < 1e-3);
}

#[test]
fn reflected_pure_corner_is_negated_swapped_corner() {
    let l = limits(0.5);
    let r = axis_angle(&Vec3::new(0.0, 1.0, 1.0), 0.4);
    let tr = trace_system_solve_with(&FHat::zero(), &l, &r, 4.0, 1e-3, &TraceOptions::default())
        .unwrap();
    let rf = reflect_continuation(&tr);
    let ((tm, _), (tp, _)) = rf.inner_values();
    assert!((tp + r * l.frame_minus().t).norm() < 1e-12);
    assert!((tm + r * l.frame_plus().t).norm() < 1e-12);
}
