//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Checks marked as known gaps print their measured values but do not fail
//! the run; each of them has a literal `#[ignore]`d counterpart in
//! `tests/known_gaps.rs`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use filament_core::binormal::{
    axis_switch_check, corner_count, evolve, evolve_with, init_polygon, momentum_drift,
    momentum_series, CurveState, EvolveOptions, Laplacian, TalbotTime,
};
use filament_core::frames::{
    hasimoto_transport_fn, psi_selfsimilar, schrodinger_map_residual, FHat,
};
use filament_core::geometry::{OrthoFrame, SampledCurve, Topology, Vec3};
use filament_core::nls::{
    evolve_u, residual_eq4, residual_record_taus, scattering_extract, scattering_extract_with,
    singular_limit_error, ModulatedField, NlsGrid, NlsSign,
};
use filament_core::oscillatory::{
    decay_sweep, eval_chirped, eval_i, eval_i_tilde, fitted_decay_exponent, fresnel_full,
    Multiplier, OscKernel, OscOptions, SampledField,
};
use filament_core::profile::{
    extract_corner_vectors, momentum_selfsimilar, solve_profile_with, Normalization,
    ProfileEvaluator, ProfileOptions,
};
use filament_core::spectral::{
    default_xi_grid, hi_freq_limit, zero_time_constant, PositiveTimeScans, SpectrumOptions,
};
use num_complex::Complex64;

type Res<T> = Result<T, Box<dyn std::error::Error>>;

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
    known_gap: bool,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: &'static str, pass: bool, detail: String) {
        self.0.push(Check {
            name,
            pass,
            detail,
            known_gap: false,
        });
    }

    fn known_gap(&mut self, name: &'static str, pass: bool, detail: String) {
        self.0.push(Check {
            name,
            pass,
            detail,
            known_gap: true,
        });
    }
}

struct Criterion {
    id: u8,
    title: &'static str,
    budget_s: f64,
    run: fn(&mut Checks) -> Res<()>,
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    fitted_decay_exponent(x, y)
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn as_printed() -> ProfileOptions {
    ProfileOptions {
        normalization: Normalization::AsPrinted,
        ..ProfileOptions::default()
    }
}

fn corner_law(c: &mut Checks) -> Res<()> {
    for a in [0.3, 0.5, 0.8] {
        let sol = solve_profile_with(a, 200.0, &ProfileOptions::default())?;
        let (ap, am) = extract_corner_vectors(&sol)?;
        let want = 4.0 * (1.0 - (-PI * a * a).exp());
        let gap = ((ap - am).norm_squared() - want).abs() / want;
        c.add(
            "|A+ - A-|^2 rel err < 1e-3",
            gap < 1e-3,
            format!("a = {a}: {gap:.2e}"),
        );
        let a1 = (-PI * a * a / 2.0).exp();
        let e1 = (ap.x - a1).abs() / a1;
        c.add("A1 rel err < 1e-3", e1 < 1e-3, format!("a = {a}: {e1:.2e}"));
    }
    Ok(())
}

fn ode_fidelity(c: &mut Checks) -> Res<()> {
    let a = 0.5;
    let sol = solve_profile_with(a, 200.0, &as_printed())?;
    c.add(
        "residual sup < 1e-7",
        sol.residual_sup < 1e-7,
        format!("{:.2e}", sol.residual_sup),
    );
    let cross = (sol.cross_norm - a).abs() + sol.cross_norm_drift;
    c.add("|G x G'| = a to 1e-8", cross < 1e-8, format!("{cross:.2e}"));
    c.add(
        "G.G' = s to 1e-8",
        sol.dot_drift < 1e-8,
        format!("{:.2e}", sol.dot_drift),
    );
    let flow = solve_profile_with(a, 200.0, &ProfileOptions::default())?;
    let cross = (flow.cross_norm - 2.0 * a).abs() + flow.cross_norm_drift;
    c.add(
        "flow form: |G x G'| = 2a, G.G' = s",
        cross < 1e-8 && flow.dot_drift < 1e-8 && flow.residual_sup < 1e-7,
        format!(
            "{cross:.2e}, {:.2e}, residual {:.2e}",
            flow.dot_drift, flow.residual_sup
        ),
    );
    Ok(())
}

fn momentum_identity(c: &mut Checks) -> Res<()> {
    let a = 0.5;
    let sol = solve_profile_with(a, 200.0, &ProfileOptions::default())?;
    let mut worst = 0.0_f64;
    for (t, l) in [(1.0, 100.0), (0.25, 50.0), (-0.5, 20.0), (0.01, 10.0)] {
        let m = momentum_selfsimilar(&sol, t, l)?;
        worst = worst.max((m.finite - m.quadrature).norm());
    }
    c.add(
        "endpoint form = quadrature to 1e-10",
        worst < 1e-10,
        format!("{worst:.2e}"),
    );

    let reach = [12.0, 24.0, 48.0, 96.0];
    let env: Vec<f64> = reach
        .iter()
        .map(|&r| {
            (0..16)
                .map(|k| {
                    let m = momentum_selfsimilar(&sol, 1.0, r + k as f64 * 0.5).unwrap();
                    (m.finite - m.limit).norm()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let p = slope(&reach, &env);
    c.add(
        "truncation error ~ sqrt(t)/L",
        (p + 1.0).abs() < 0.15,
        format!("slope {p:.3}"),
    );

    let small: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&t| momentum_selfsimilar(&sol, t, 1.0).unwrap().finite.norm())
        .collect();
    let decreasing = small.windows(2).all(|w| w[1] < w[0]);
    c.add(
        "momentum -> 0 as t -> 0",
        decreasing && small[3] < 1e-3,
        format!("{:.2e} at t = 1e-4", small[3]),
    );

    let closed = 2.0 * (1.0 - (-PI * a * a).exp()).sqrt();
    let mut ratios = Vec::new();
    for t in [1.0, 0.25, 0.04] {
        ratios.push(momentum_selfsimilar(&sol, t, 1.0)?.limit.norm() / (t * closed));
    }
    let ok = ratios.iter().all(|r| (r - 1.0).abs() < 1e-3);
    c.known_gap(
        "modulus = |t| 2 sqrt(1 - e^{-pi a^2})",
        ok,
        format!("measured / closed form = {ratios:.6?}"),
    );
    Ok(())
}

fn fresnel(c: &mut Checks) -> Res<()> {
    let opts = OscOptions {
        levels: 7,
        ..OscOptions::default()
    };
    let r = eval_chirped::<1, _>(
        0.0,
        0.25,
        false,
        0.0,
        &|_| [Complex64::new(1.0, 0.0)],
        &opts,
    )?;
    let err = (r.value[0] / 2.0 - fresnel_full()).norm();
    let exact = Complex64::from_polar(PI.sqrt(), -PI / 4.0);
    c.add(
        "regularized oracle to 1e-8",
        err < 1e-8,
        format!("{err:.2e}"),
    );
    c.add(
        "constant is sqrt(pi) e^{-i pi/4}",
        (fresnel_full() - exact).norm() < 1e-15,
        format!("{:.2e}", (fresnel_full() - exact).norm()),
    );
    Ok(())
}

fn oscillatory_limits(c: &mut Checks) -> Res<()> {
    let xi = [-25.0, -50.0, -100.0, -200.0];
    let k = OscKernel::new(0.5, 0.25, true, Multiplier::One)?;
    let rows = decay_sweep(&k, &xi)?;
    let d: Vec<f64> = rows.iter().map(|r| r.abs_diff).collect();
    c.add(
        "m = 1: distance to reference decreases",
        d.windows(2).all(|w| w[1] < w[0]),
        sci(&d),
    );
    c.add(
        "m = 1: distance < 0.05 at xi = -200",
        d[3] < 0.05,
        format!("{:.3e}", d[3]),
    );

    let sampled = Multiplier::Sampled(SampledField::from_fn(-400.0, 400.0, 160_001, |x| {
        Complex64::new((-(x * x) / 4.0).exp(), 0.0)
    })?);
    let k = OscKernel::new(0.5, 0.25, true, sampled)?;
    let v: Vec<f64> = xi
        .iter()
        .map(|&x| eval_i(&k, x).map(|r| r.value.norm()))
        .collect::<Result<_, _>>()?;
    let p = slope(&xi, &v);
    c.add(
        "decaying m (log phase): exponent <= -0.8",
        p <= -0.8,
        format!("{p:.3}"),
    );

    let m = Multiplier::function(|x| Complex64::new(1.0 / (1.0 + x * x), 0.0));
    let k = OscKernel::new(0.5, 0.25, false, m)?;
    let v: Vec<f64> = xi
        .iter()
        .map(|&x| eval_i_tilde(&k, x).map(|r| r.value.norm()))
        .collect::<Result<_, _>>()?;
    let p = slope(&xi, &v);
    c.add(
        "decaying m (no log phase): exponent <= -0.8",
        p <= -0.8,
        format!("{p:.3}"),
    );
    Ok(())
}

fn sup_norm_gap(c: &mut Checks) -> Res<()> {
    let a = 0.5;
    let scans = PositiveTimeScans::compute(
        a,
        &[0.1, 0.25, 0.5, 1.0],
        &default_xi_grid(),
        &SpectrumOptions::default(),
    )?;
    let target = hi_freq_limit(a);
    let zero = zero_time_constant(a);
    c.add(
        "t = 0 constant 2 sqrt(1 - e^{-pi/4})",
        (zero - 1.4752).abs() < 1e-4,
        format!("{zero:.5}"),
    );
    for (label, f) in [
        ("f+ = 0", FHat::zero()),
        ("Gaussian f+, sup 0.05", FHat::gaussian(0.05, 1.0)),
    ] {
        let (tx, nx) = scans.report(&f)?;
        for r in [&tx, &nx] {
            let worst = r
                .hi_freq_limits
                .iter()
                .map(|h| (h - target).abs() / target)
                .fold(0.0, f64::max);
            c.add(
                "hi-frequency limits within 2% of 2 sqrt(pi) a",
                worst < 0.02,
                format!("{label}, {:?}: {worst:.2e}", r.kind),
            );
            c.add(
                "inf sup(t > 0) > sup(t = 0), margin > error budget",
                r.pass && r.inf_sup_t_pos > r.sup_at_zero && r.margin > 0.0,
                format!(
                    "{label}, {:?}: inf sup {:.5}, zero {:.5}, margin {:.3e}, budget {:.1e}",
                    r.kind, r.inf_sup_t_pos, r.sup_at_zero, r.margin, r.error_budget
                ),
            );
        }
    }
    Ok(())
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn schrodinger_map(c: &mut Checks) -> Res<()> {
    let ev = ProfileEvaluator::new(0.5, 10.0, 0.5, &ProfileOptions::default())?;
    let run = |h: f64| {
        let n = (10.0 / h).round() as usize + 1;
        schrodinger_map_residual(&ev, &[1.0 - h, 1.0, 1.0 + h], &uniform(-5.0, 5.0, n))
    };
    let r = [run(0.05)?, run(0.025)?, run(0.0125)?];
    let orders: Vec<f64> = r.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    c.add(
        "refinement order 2 +- 0.2",
        orders.iter().all(|o| (o - 2.0).abs() <= 0.2),
        format!("residuals {}, orders {orders:.3?}", sci(&r)),
    );
    Ok(())
}

fn talbot(c: &mut Checks) -> Res<()> {
    let s0 = init_polygon(3, 768)?;
    let h = s0.h();
    let t13 = TalbotTime::new(3, 1, 3)?.value;
    let half = PI / 9.0;
    let period = 2.0 * PI / 9.0;
    let snaps = evolve(&s0, period, 0.01 * h * h, &[t13, half])?;
    let cc = corner_count(&snaps[0], 5.0);
    c.add(
        "9 corners at 2 pi/27",
        cc.count == 9 && !cc.ambiguous,
        format!("{} (ambiguous: {})", cc.count, cc.ambiguous),
    );
    let ax = axis_switch_check(&snaps[1], &s0, 3)?;
    c.add(
        "aligns at pi/9 with residual < 1e-2 diameter",
        ax.residual < 1e-2 * ax.diameter,
        format!("{:.2e}", ax.residual / ax.diameter),
    );
    let sym = 2.0 * PI / 3.0;
    let target = (2.0 * PI / 3.0).rem_euclid(sym);
    let d = (ax.angle_mod_symmetry - target).rem_euclid(sym);
    let dist = d.min(sym - d);
    c.known_gap(
        "in-plane rotation = 2 pi/3 mod symmetry",
        dist < 1e-2,
        format!(
            "angle {:.6}, mod symmetry {:.6}",
            ax.angle, ax.angle_mod_symmetry
        ),
    );
    let mut all = vec![s0.clone()];
    all.extend(snaps.iter().cloned());
    let series = momentum_series(&all)?;
    let drift = momentum_drift(&series);
    let size = series[0].vector().norm();
    c.known_gap(
        "momentum drift < 1e-4 over the period",
        drift < 1e-4,
        format!("absolute {drift:.3e}, relative {:.3e}", drift / size),
    );
    Ok(())
}

fn long_run(sign: NlsSign) -> Res<filament_core::nls::Trajectory> {
    let grid = NlsGrid::new(2048.0, 16384)?;
    let u1 = ModulatedField::gaussian(0.5, sign, grid, 0.01, 1.0);
    let mut rec = vec![25.0, 50.0];
    rec.extend((0..10).map(|k| 10.0 * 10f64.powf(k as f64 / 10.0)));
    Ok(evolve_u(&u1, 100.0, 0.05, &rec)?)
}

fn perturbed_nls(c: &mut Checks) -> Res<()> {
    let grid = NlsGrid::new(64.0, 1024)?;
    let t_list = [0.8, 0.6];
    let zero = ModulatedField::zero(0.5, NlsSign::Focusing, grid);
    let traj = evolve_u(&zero, 2.0, 0.01, &residual_record_taus(&t_list, 0.01))?;
    let r0 = residual_eq4(&traj, &t_list)?;
    let stays = traj.snapshots.iter().all(|s| s.sup() == 0.0);
    c.add(
        "u = 0 is a fixed point",
        stays && r0 < 1e-12,
        format!("residual {r0:.2e}"),
    );

    for sign in [NlsSign::Focusing, NlsSign::Defocusing] {
        let mut r = Vec::new();
        for step in [0.02, 0.01, 0.005] {
            let u1 = ModulatedField::gaussian(0.5, sign, grid, 0.1, 1.0);
            let traj = evolve_u(&u1, 2.0, step, &residual_record_taus(&t_list, step))?;
            r.push(residual_eq4(&traj, &t_list)?);
        }
        let orders: Vec<f64> = r.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        c.add(
            "residual converges at order 2",
            orders.iter().all(|o| (o - 2.0).abs() < 0.3),
            format!("{sign:?}: orders {orders:.3?}"),
        );
    }

    let taus = [25.0, 50.0, 100.0];
    for sign in [NlsSign::Focusing, NlsSign::Defocusing] {
        let traj = long_run(sign)?;
        let corrected = scattering_extract(&traj, &taus)?;
        let plain = scattering_extract_with(&traj, &taus, false)?;
        c.add(
            "corrected Cauchy gap decreases",
            corrected.decreasing,
            format!("{sign:?}: {}", sci(&corrected.gaps)),
        );
        c.add(
            "uncorrected gap stalls",
            plain.decay_exponent < 0.5 * corrected.decay_exponent
                && plain.cauchy_gap > corrected.cauchy_gap,
            format!(
                "{sign:?}: decay exponents {:.3} (plain) vs {:.3}",
                plain.decay_exponent, corrected.decay_exponent
            ),
        );
        let t_list: Vec<f64> = (0..=10)
            .map(|k| 0.01 * 10f64.powf(k as f64 / 10.0))
            .collect();
        let table = singular_limit_error(&traj, &corrected, &t_list)?;
        c.add(
            "singular-limit slope >= 0.2",
            table.slope >= 0.2,
            format!("{sign:?}: {:.3}", table.slope),
        );
    }
    Ok(())
}

fn selfsimilar_flow_error(n: usize) -> Res<f64> {
    let a = 0.5;
    let ev = Arc::new(ProfileEvaluator::new(
        a,
        16.0,
        0.5,
        &ProfileOptions::default(),
    )?);
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
    let st = CurveState::new(
        0.5,
        SampledCurve::new(Topology::OpenTruncated, xs.clone(), p0, Some(t0))?,
    )?;
    let bc = ev.clone();
    let mut o = EvolveOptions::new(0.2 * h * h);
    o.laplacian = Laplacian::SecondDifference;
    o.boundary = Some(Arc::new(move |t: f64, s: f64| {
        bc.eval(s / t.sqrt()).unwrap().1
    }));
    let out = evolve_with(&st, 1.0, &o, &[])?;
    let (p1, _) = exact(1.0);
    Ok(xs
        .iter()
        .zip(out[0].curve.points.iter().zip(&p1))
        .filter(|(x, _)| x.abs() <= 5.0)
        .map(|(_, (p, q))| (p - q).norm())
        .fold(0.0, f64::max))
}

fn cross_module(c: &mut Checks) -> Res<()> {
    let a = 0.5;
    let ev = ProfileEvaluator::new(a, 12.0, 0.5, &ProfileOptions::default())?;
    let grid = uniform(-10.0, 10.0, 2001);
    let psi = |x: f64| psi_selfsimilar(a, ev.kappa, 1.0, x);
    let field = hasimoto_transport_fn(psi, &grid, 1.0, &OrthoFrame::identity(), 0.0, 2)?;
    let mut err = 0.0_f64;
    for (x, f) in grid.iter().zip(&field.frames) {
        err = err.max((f.t - ev.eval(*x)?.1).norm());
    }
    c.add(
        "transport reproduces G' to 1e-6",
        err < 1e-6,
        format!("{err:.2e}"),
    );

    let e1 = selfsimilar_flow_error(501)?;
    let e2 = selfsimilar_flow_error(1001)?;
    let order = (e1 / e2).log2();
    c.add(
        "binormal flow matches exact family to 1e-3",
        e2 < 1e-3,
        format!("{e2:.2e}"),
    );
    c.add(
        "binormal flow converges at order 2",
        (order - 2.0).abs() < 0.2,
        format!("{order:.3}"),
    );
    Ok(())
}

const CRITERIA: [Criterion; 10] = [
    Criterion {
        id: 1,
        title: "corner-vector law",
        budget_s: 30.0,
        run: corner_law,
    },
    Criterion {
        id: 2,
        title: "profile ODE fidelity",
        budget_s: f64::INFINITY,
        run: ode_fidelity,
    },
    Criterion {
        id: 3,
        title: "momentum identity",
        budget_s: 10.0,
        run: momentum_identity,
    },
    Criterion {
        id: 4,
        title: "Fresnel reference",
        budget_s: f64::INFINITY,
        run: fresnel,
    },
    Criterion {
        id: 5,
        title: "oscillatory integral limits",
        budget_s: 120.0,
        run: oscillatory_limits,
    },
    Criterion {
        id: 6,
        title: "sup-norm gap",
        budget_s: 300.0,
        run: sup_norm_gap,
    },
    Criterion {
        id: 7,
        title: "Schrodinger map residual",
        budget_s: f64::INFINITY,
        run: schrodinger_map,
    },
    Criterion {
        id: 8,
        title: "Talbot phenomenology",
        budget_s: 600.0,
        run: talbot,
    },
    Criterion {
        id: 9,
        title: "perturbed NLS",
        budget_s: 600.0,
        run: perturbed_nls,
    },
    Criterion {
        id: 10,
        title: "cross-module oracle",
        budget_s: f64::INFINITY,
        run: cross_module,
    },
];

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    if args.iter().any(|a| a == "--ignored")
        || (!filters.is_empty() && !filters.iter().any(|f| "acceptance".contains(f.as_str())))
    {
        return ExitCode::SUCCESS;
    }

    let mut unexpected = 0;
    for cr in &CRITERIA {
        let mut checks = Checks::default();
        let start = Instant::now();
        let outcome = (cr.run)(&mut checks);
        let secs = start.elapsed().as_secs_f64();
        if let Err(e) = outcome {
            checks.add("run completes", false, e.to_string());
        }
        if cr.budget_s.is_finite() {
            checks.add(
                "runtime within budget",
                secs < cr.budget_s,
                format!("{secs:.1} s of {} s", cr.budget_s),
            );
        }
        let failed: Vec<&Check> = checks.0.iter().filter(|c| !c.pass).collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {:>2}: {} ({secs:.1} s)",
            cr.id, cr.title
        );
        for ch in &checks.0 {
            let mark = match (ch.pass, ch.known_gap) {
                (true, _) => "ok  ",
                (false, true) => "gap ",
                (false, false) => "FAIL",
            };
            println!("      {mark} {}: {}", ch.name, ch.detail);
        }
        unexpected += failed.iter().filter(|c| !c.known_gap).count();
    }
    if unexpected > 0 {
        println!("{unexpected} check(s) failed outside the known gaps");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
