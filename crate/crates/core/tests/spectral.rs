use std::f64::consts::PI;

use filament_core::frames::{selfsimilar_limits, trace_system_solve_with, FHat, TraceOptions};
use filament_core::geometry::{cnorm, to_complex};
use filament_core::oscillatory::{Multiplier, OscOptions};
use filament_core::profile::{ProfileEvaluator, ProfileOptions};
use filament_core::spectral::{
    hi_freq_limit, rotated_real_part_norm, spectrum_at_zero_nx, spectrum_at_zero_tx,
    theorem11_report, zero_time_constant, SpectralContext, SpectrumOptions,
};
use nalgebra::Matrix3;
use num_complex::Complex64;

fn context(a: f64, xi_max: f64) -> SpectralContext {
    SpectralContext::new(a, 1.0, xi_max).unwrap()
}

fn window_opts(xi0: f64, points: usize) -> SpectrumOptions {
    SpectrumOptions {
        hi_freq_xi: xi0,
        hi_freq_points: points,
        ..SpectrumOptions::default()
    }
}

#[test]
fn real_part_of_rotated_limit_normal_has_unit_length() {
    let ev = ProfileEvaluator::new(0.5, 200.0, 0.5, &ProfileOptions::default()).unwrap();
    let l = selfsimilar_limits(&ev, 200.0).unwrap();
    for n in [l.frame_plus().n, l.frame_minus().n] {
        for k in 0..64 {
            let theta = 2.0 * PI * k as f64 / 64.0;
            let r = rotated_real_part_norm(&n, theta);
            assert!((r - 1.0).abs() < 1e-8, "theta {theta}: {r}");
        }
    }
}

#[test]
fn zero_parameter_gives_zero_spectra() {
    let ctx = context(0.0, 60.0);
    let opts = window_opts(-50.0, 2);
    let xi = [-50.0, -3.0, 0.0, 7.0];
    let s = ctx.spectrum_tx(0.5, &xi, None, &opts).unwrap();
    assert_eq!(s.sup_norm, 0.0);
    let s = ctx.spectrum_nx(0.5, &xi, None, &opts).unwrap();
    assert_eq!(s.sup_norm, 0.0);
    let tr = trace_system_solve_with(
        &FHat::zero(),
        &ctx.limits,
        &Matrix3::identity(),
        10.0,
        1e-3,
        &TraceOptions::default(),
    )
    .unwrap();
    assert!(spectrum_at_zero_tx(&tr, &xi).sup_norm < 1e-12);
    assert!(spectrum_at_zero_nx(&tr, &xi).sup_norm < 1e-12);
}

#[test]
fn tx_at_zero_frequency_is_the_corner_difference() {
    // ∫T_x dx = A⁺ − A⁻ for every t > 0.
    let ctx = context(0.5, 10.0);
    let want = to_complex(&(ctx.limits.frame_plus().t - ctx.limits.frame_minus().t));
    for t in [0.25, 1.0] {
        let (v, err, _) = ctx.tx_at(t, 0.0, None, &OscOptions::default()).unwrap();
        let d = cnorm(&(v - want));
        assert!(d < err.max(1e-3), "t = {t}: {d:.3e} (err {err:.3e})");
    }
}

#[test]
fn constant_perturbation_rescales_the_spectrum() {
    // ū ≡ c turns a into a + c in the curvature-torsion factor only.
    let ctx = context(0.5, 30.0);
    let c = 0.1;
    let u = Multiplier::function(move |_| Complex64::new(c, 0.0));
    let o = OscOptions::default();
    for xi in [-20.0, 3.0] {
        let (v0, _, _) = ctx.tx_at(0.25, xi, None, &o).unwrap();
        let (v1, e1, _) = ctx.tx_at(0.25, xi, Some(&u), &o).unwrap();
        let d = cnorm(&(v1 - v0.map(|z| z * ((0.5 + c) / 0.5))));
        assert!(d < 1e-6 + e1, "T xi = {xi}: {d:.3e}");
        let (w0, _, _) = ctx.nx_at(0.25, xi, None, &o).unwrap();
        let (w1, f1, _) = ctx.nx_at(0.25, xi, Some(&u), &o).unwrap();
        let d = cnorm(&(w1 - w0.map(|z| z * ((0.5 + c) / 0.5))));
        assert!(d < 1e-6 + f1, "N xi = {xi}: {d:.3e}");
    }
}

#[test]
fn nx_reaches_its_high_frequency_limit_pointwise() {
    let a = 0.5;
    let ctx = context(a, 210.0);
    let s = ctx
        .spectrum_nx(
            0.25,
            &[-25.0, -50.0, -100.0, -200.0],
            None,
            &window_opts(-200.0, 4),
        )
        .unwrap();
    let lim = hi_freq_limit(a);
    assert!(
        (s.moduli[3] - lim).abs() < 0.02 * lim,
        "|N_x^(-200)| = {}",
        s.moduli[3]
    );
    assert!((s.hi_freq_limit_estimate - lim).abs() < 0.02 * lim);
    for w in s.remainder_norms[..4].windows(2) {
        assert!(w[1] < w[0], "{:?}", s.remainder_norms);
    }
}

#[test]
fn tx_window_rms_reaches_the_high_frequency_limit() {
    let a = 0.5;
    let ctx = context(a, 210.0);
    let s = ctx
        .spectrum_tx(
            0.25,
            &[-25.0, -50.0, -100.0],
            None,
            &window_opts(-200.0, 16),
        )
        .unwrap();
    let lim = hi_freq_limit(a);
    assert!(
        (s.hi_freq_limit_estimate - lim).abs() < 0.02 * lim,
        "{}",
        s.hi_freq_limit_estimate
    );
    for w in s.remainder_norms[..3].windows(2) {
        assert!(w[1] < w[0], "{:?}", s.remainder_norms);
    }
    assert!(s.sup_norm >= s.hi_freq_limit_estimate);
}

#[test]
fn high_frequency_limit_is_time_independent_and_symmetric() {
    let a = 0.5;
    let ctx = context(a, 110.0);
    let lim = hi_freq_limit(a);
    for t in [0.1, 0.25, 0.5, 1.0] {
        for xi0 in [-100.0, 100.0] {
            let o = window_opts(xi0, 8);
            let n = ctx
                .spectrum_nx(t, &[], None, &o)
                .unwrap()
                .hi_freq_limit_estimate;
            let tx = ctx
                .spectrum_tx(t, &[], None, &o)
                .unwrap()
                .hi_freq_limit_estimate;
            assert!((n - lim).abs() < 0.02 * lim, "N t = {t} xi0 = {xi0}: {n}");
            assert!((tx - lim).abs() < 0.02 * lim, "T t = {t} xi0 = {xi0}: {tx}");
        }
    }
}

#[test]
fn positive_time_requires_positive_t() {
    let ctx = context(0.5, 10.0);
    assert!(ctx
        .spectrum_tx(0.0, &[1.0], None, &SpectrumOptions::default())
        .is_err());
    assert!(ctx
        .spectrum_nx(0.5, &[f64::NAN], None, &SpectrumOptions::default())
        .is_err());
}

#[test]
fn zero_time_spectra_are_the_corner_constant() {
    let a = 0.5;
    let ctx = context(a, 10.0);
    let xi: Vec<f64> = (-40..=40).map(|k| k as f64 * 2.5).collect();
    let tr = trace_system_solve_with(
        &FHat::zero(),
        &ctx.limits,
        &Matrix3::identity(),
        20.0,
        1e-3,
        &TraceOptions::default(),
    )
    .unwrap();
    let c = zero_time_constant(a);
    assert!((c - 1.47521).abs() < 1e-5);
    for s in [spectrum_at_zero_tx(&tr, &xi), spectrum_at_zero_nx(&tr, &xi)] {
        for m in &s.moduli {
            assert!((m - c).abs() < 1e-4, "{m}");
        }
    }
}

#[test]
fn small_trace_data_moves_zero_time_spectra_within_its_l1_norm() {
    let a = 0.5;
    let ctx = context(a, 10.0);
    let f = FHat::gaussian(0.05, 1.0);
    let tr = trace_system_solve_with(
        &f,
        &ctx.limits,
        &Matrix3::identity(),
        40.0,
        1e-3,
        &TraceOptions::default(),
    )
    .unwrap();
    let xi: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.5).collect();
    let bound = f.trace_l1(40.0);
    let c = zero_time_constant(a);
    for s in [spectrum_at_zero_tx(&tr, &xi), spectrum_at_zero_nx(&tr, &xi)] {
        let dev = s.moduli.iter().map(|m| (m - c).abs()).fold(0.0, f64::max);
        assert!(dev > 0.0 && dev <= bound, "deviation {dev} bound {bound}");
    }
}

#[test]
fn analytic_gap_shrinks_with_the_parameter() {
    let gaps: Vec<f64> = [0.1, 0.3, 0.5]
        .iter()
        .map(|&a| hi_freq_limit(a) - zero_time_constant(a))
        .collect();
    assert!(
        gaps[0] > 0.0 && gaps[0] < gaps[1] && gaps[1] < gaps[2],
        "{gaps:?}"
    );
    assert!((gaps[2] - 0.29724).abs() < 1e-5);
}

#[test]
fn numerical_gap_shrinks_with_the_parameter() {
    // Limit estimate of N_x^ at t = 1/4 against the zero-time constant.
    let mut gaps = Vec::new();
    for a in [0.1, 0.3, 0.5] {
        let ctx = context(a, 110.0);
        let hi = ctx
            .spectrum_nx(0.25, &[], None, &window_opts(-100.0, 4))
            .unwrap()
            .hi_freq_limit_estimate;
        let tr = trace_system_solve_with(
            &FHat::zero(),
            &ctx.limits,
            &Matrix3::identity(),
            5.0,
            1e-3,
            &TraceOptions::default(),
        )
        .unwrap();
        let zero = spectrum_at_zero_nx(&tr, &[0.0]).sup_norm;
        gaps.push(hi - zero);
    }
    assert!(
        gaps[0] > 0.0 && gaps[0] < gaps[1] && gaps[1] < gaps[2],
        "{gaps:?}"
    );
    assert!((gaps[2] - 0.29724).abs() < 0.05 * 0.29724, "{}", gaps[2]);
}

#[test]
fn small_report_passes_with_positive_margin() {
    let xi = [-100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0];
    let (t, n) =
        theorem11_report(0.5, &[0.25], &xi, &FHat::zero(), &window_opts(-100.0, 8)).unwrap();
    for r in [&t, &n] {
        assert!(r.pass && !r.inconclusive, "{r:?}");
        assert!((r.gap - (r.inf_sup_t_pos - r.sup_at_zero)).abs() < 1e-15);
        assert!((r.margin - (r.gap - r.error_budget)).abs() < 1e-15);
        assert!((r.sup_at_zero - 1.47521).abs() < 1e-4);
    }
    assert!(
        theorem11_report(0.5, &[0.0], &xi, &FHat::zero(), &SpectrumOptions::default()).is_err()
    );
    assert!(
        theorem11_report(0.5, &[1.5], &xi, &FHat::zero(), &SpectrumOptions::default()).is_err()
    );
}
