//! Self-similar profiles of the binormal flow and their corner asymptotics.
//!
//! A self-similar filament `χ(t, x) = √t G(x/√t)` has a profile solving
//! `κ(G − sG′) = G′ ∧ G″`, equivalently `G″ = κ G ∧ G′` once `|G′| = 1`.
//! With `κ = 1/2` ([`Normalization::Flow`]) the filament solves
//! `χ_t = χ_x ∧ χ_xx`: its curvature is `a` and its torsion `s/2`, so the
//! filament function is `a e^{ix²/4t}/√t`. With `κ = 1`
//! ([`Normalization::AsPrinted`]) the profile equation reads
//! `G − sG′ = G′ ∧ G″` verbatim; `|G ∧ G′| = a` and the torsion is `s`.
//! The two are related by `G_flow(s) = √2 G_printed(s/√2)` with
//! `a_printed = √2 a_flow`.
//!
//! Initial data `G(0) = (a/κ) e₃`, `G′(0) = e₁` (hence `G″(0) = a e₂`).
//! Useful exact invariants along solutions: `|G′| = 1`, `|G ∧ G′| = a/κ` and
//! `G·G′ = s`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{complexify, CVec3, SampledCurve, Topology, Vec3};
use crate::ode::Dop853;

/// Which constant multiplies the left-hand side of the profile equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `(G − sG′)/2 = G′ ∧ G″`: profiles of `χ_t = χ_x ∧ χ_xx` with curvature `a`.
    #[default]
    Flow,
    /// `G − sG′ = G′ ∧ G″` taken literally.
    AsPrinted,
}

impl Normalization {
    /// The constant `κ` in `κ(G − sG′) = G′ ∧ G″`.
    pub fn kappa(self) -> f64 {
        match self {
            Normalization::Flow => 0.5,
            Normalization::AsPrinted => 1.0,
        }
    }
}

/// Integrator settings for profile solves.
#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    pub normalization: Normalization,
    /// Relative tolerance handed to the integrator.
    pub tol: f64,
    /// Spacing of the uniform output grid.
    pub ds: f64,
    /// Largest acceptable spread between the two extraction windows.
    pub extraction_tol: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            normalization: Normalization::Flow,
            tol: 1e-13,
            ds: 0.02,
            extraction_tol: 1e-3,
        }
    }
}

/// Values carried by the profile integrator at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub s: f64,
    pub g: Vec3,
    pub gp: Vec3,
    /// `∫₀ˢ σ G′(σ) dσ`.
    pub weighted: Vec3,
    /// `∫₀ˢ G ∧ G′ dσ`.
    pub cross_integral: Vec3,
}

/// Corner vectors with their extraction diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerVectors {
    pub a_plus: [f64; 3],
    pub a_minus: [f64; 3],
    /// Window-to-window spread (`|A_W1 − A_W2|/3`) on each side.
    pub spread_plus: f64,
    pub spread_minus: f64,
}

impl CornerVectors {
    pub fn plus(&self) -> Vec3 {
        Vec3::from(self.a_plus)
    }
    pub fn minus(&self) -> Vec3 {
        Vec3::from(self.a_minus)
    }
    pub fn spread(&self) -> f64 {
        self.spread_plus.max(self.spread_minus)
    }
}

/// Sampled profile with its asymptotic corner vectors.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub a: f64,
    pub half_width: f64,
    pub options: ProfileOptions,
    pub s_grid: Vec<f64>,
    pub g: Vec<Vec3>,
    pub gp: Vec<Vec3>,
    pub gpp: Vec<Vec3>,
    pub a_plus: Vec3,
    pub a_minus: Vec3,
    /// Curvature `|G″| = κ|G ∧ G′|` (equals `a`).
    pub curvature: f64,
    /// Conserved `|G ∧ G′|` (equals `a/κ`).
    pub cross_norm: f64,
    /// `sup |κ(G − sG′) − G′ ∧ G″|` on the output grid.
    pub residual_sup: f64,
    /// `sup ||G ∧ G′| − a/κ|`.
    pub cross_norm_drift: f64,
    /// `sup |G·G′ − s|`.
    pub dot_drift: f64,
    /// `sup ||G′| − 1|`.
    pub unit_drift: f64,
    pub corners: CornerVectors,
}

fn cross_rhs(kappa: f64, g: &Vec3, gp: &Vec3, inv_one_plus_eps: f64) -> Vec3 {
    g.cross(gp) * (kappa * inv_one_plus_eps)
}

fn unpack(y: &[f64]) -> (Vec3, Vec3) {
    (Vec3::new(y[0], y[1], y[2]), Vec3::new(y[3], y[4], y[5]))
}

fn renormalize_gp<const N: usize>(y: &mut [f64; N]) {
    let n = (y[3] * y[3] + y[4] * y[4] + y[5] * y[5]).sqrt();
    for v in &mut y[3..6] {
        *v /= n;
    }
}

/// Integrate `G″ = κ G∧G′/(1+ε)` from `s = 0` to each requested abscissa.
///
/// State layout: `G, G′, ∫σG′, ∫G∧G′, ∫ε′G′` (15 components). The returned
/// vector follows the order of `s_values`.
fn integrate_general<E>(
    kappa: f64,
    g0: Vec3,
    t0: Vec3,
    eps: E,
    tol: f64,
    s_values: &[f64],
) -> Result<Vec<[f64; 15]>>
where
    E: Fn(f64) -> (f64, f64),
{
    let mut y0 = [0.0; 15];
    y0[..3].copy_from_slice(g0.as_slice());
    y0[3..6].copy_from_slice(t0.as_slice());
    let rhs = |s: f64, y: &[f64; 15]| {
        let (g, gp) = unpack(y);
        let (e, de) = eps(s);
        let gpp = cross_rhs(kappa, &g, &gp, 1.0 / (1.0 + e));
        let c = g.cross(&gp);
        [
            gp.x,
            gp.y,
            gp.z,
            gpp.x,
            gpp.y,
            gpp.z,
            s * gp.x,
            s * gp.y,
            s * gp.z,
            c.x,
            c.y,
            c.z,
            de * gp.x,
            de * gp.y,
            de * gp.z,
        ]
    };
    let solver = Dop853::with_tol(tol, tol * 0.1);
    let mut out = vec![[0.0; 15]; s_values.len()];
    for dir in [1.0, -1.0] {
        let mut idx: Vec<usize> = (0..s_values.len())
            .filter(|&i| s_values[i] * dir > 0.0 || (dir > 0.0 && s_values[i] == 0.0))
            .collect();
        idx.sort_by(|&i, &j| {
            (s_values[i] * dir)
                .partial_cmp(&(s_values[j] * dir))
                .unwrap()
        });
        if idx.is_empty() {
            continue;
        }
        let targets: Vec<f64> = idx.iter().map(|&i| s_values[i]).collect();
        let (ys, _) = solver.integrate(rhs, 0.0, y0, &targets, 0.01, renormalize_gp)?;
        for (k, &i) in idx.iter().enumerate() {
            out[i] = ys[k];
        }
    }
    Ok(out)
}

fn initial_position(a: f64, kappa: f64) -> Vec3 {
    Vec3::new(0.0, 0.0, a / kappa)
}

/// Evaluate the profile of parameter `a` at arbitrary abscissas.
///
/// Each call re-integrates from `s = 0`, so values are consistent with
/// [`solve_profile`] to integrator tolerance.
pub fn sample_profile(
    a: f64,
    options: &ProfileOptions,
    s_values: &[f64],
) -> Result<Vec<ProfilePoint>> {
    if !(a >= 0.0) {
        return Err(Error::Invalid(format!(
            "profile parameter must be >= 0, got {a}"
        )));
    }
    let kappa = options.normalization.kappa();
    let raw = integrate_general(
        kappa,
        initial_position(a, kappa),
        Vec3::x(),
        |_| (0.0, 0.0),
        options.tol,
        s_values,
    )?;
    Ok(raw
        .iter()
        .zip(s_values)
        .map(|(y, &s)| ProfilePoint {
            s,
            g: Vec3::new(y[0], y[1], y[2]),
            gp: Vec3::new(y[3], y[4], y[5]),
            weighted: Vec3::new(y[6], y[7], y[8]),
            cross_integral: Vec3::new(y[9], y[10], y[11]),
        })
        .collect())
}

/// Largest `s ≤ target` (in modulus) at which the leading phase `κs²/2` is a
/// multiple of `2π`.
fn phase_aligned(target: f64, kappa: f64) -> f64 {
    let k = (kappa * target * target / (4.0 * std::f64::consts::PI)).floor();
    if k < 1.0 {
        return target;
    }
    (4.0 * std::f64::consts::PI * k / kappa).sqrt()
}

/// Phase-aligned window edges `s₀ ≈ S/4 < s₁ ≈ S/2 < s₂ ≈ S` (positive side).
fn window_edges(half_width: f64, kappa: f64) -> [f64; 3] {
    [
        phase_aligned(half_width / 4.0, kappa),
        phase_aligned(half_width / 2.0, kappa),
        phase_aligned(half_width, kappa),
    ]
}

/// Weighted window average of `G′` from the running integral `∫σG′`.
fn window_average(q_lo: Vec3, q_hi: Vec3, s_lo: f64, s_hi: f64) -> Vec3 {
    (q_hi - q_lo) / ((s_hi * s_hi - s_lo * s_lo) / 2.0)
}

/// Richardson-combined limit from two dyadic windows, and its spread.
fn richardson(w_far: Vec3, w_near: Vec3) -> (Vec3, f64) {
    let est = (w_far * 4.0 - w_near) / 3.0;
    let spread = (w_far - w_near).norm() / 3.0;
    (est.normalize(), spread)
}

fn corners_from_weighted<F>(half_width: f64, kappa: f64, weighted_at: F) -> Result<CornerVectors>
where
    F: Fn(&[f64]) -> Result<Vec<Vec3>>,
{
    let e = window_edges(half_width, kappa);
    let s = [e[0], e[1], e[2], -e[0], -e[1], -e[2]];
    let q = weighted_at(&s)?;
    let plus_far = window_average(q[1], q[2], e[1], e[2]);
    let plus_near = window_average(q[0], q[1], e[0], e[1]);
    let minus_far = window_average(q[4], q[5], -e[1], -e[2]);
    let minus_near = window_average(q[3], q[4], -e[0], -e[1]);
    let (ap, sp) = richardson(plus_far, plus_near);
    let (am, sm) = richardson(minus_far, minus_near);
    Ok(CornerVectors {
        a_plus: [ap.x, ap.y, ap.z],
        a_minus: [am.x, am.y, am.z],
        spread_plus: sp,
        spread_minus: sm,
    })
}

/// Extract `A±` for the profile of parameter `a` on `[−S, S]`.
///
/// `G′` is averaged with weight `|s|` over the phase-aligned windows
/// `[S/2, S]` and `[S/4, S/2]` (and their mirrors); the two averages are
/// combined by Richardson extrapolation assuming an `O(S⁻²)` bias.
pub fn extract_corner_vectors_raw(
    a: f64,
    half_width: f64,
    options: &ProfileOptions,
) -> Result<CornerVectors> {
    let kappa = options.normalization.kappa();
    corners_from_weighted(half_width, kappa, |s| {
        Ok(sample_profile(a, options, s)?
            .iter()
            .map(|p| p.weighted)
            .collect())
    })
}

/// Extraction from a solved profile; fails with [`Error::NonConvergence`] when
/// the two windows disagree by more than the configured tolerance.
pub fn extract_corner_vectors(sol: &ProfileSolution) -> Result<(Vec3, Vec3)> {
    let c = extract_corner_vectors_raw(sol.a, sol.half_width, &sol.options)?;
    if c.spread() > sol.options.extraction_tol {
        return Err(Error::NonConvergence(format!(
            "corner windows disagree by {:.3e}",
            c.spread()
        )));
    }
    Ok((c.plus(), c.minus()))
}

/// Solve the profile equation on `[−S, S]` with the default options.
pub fn solve_profile(a: f64, half_width: f64, tol: f64) -> Result<ProfileSolution> {
    solve_profile_with(
        a,
        half_width,
        &ProfileOptions {
            tol,
            ..ProfileOptions::default()
        },
    )
}

/// Solve the profile equation on `[−S, S]`, sample it on a uniform grid and
/// extract the corner vectors.
pub fn solve_profile_with(
    a: f64,
    half_width: f64,
    options: &ProfileOptions,
) -> Result<ProfileSolution> {
    if !(half_width > 0.0) || !(options.ds > 0.0) {
        return Err(Error::Invalid("S and ds must be positive".into()));
    }
    let kappa = options.normalization.kappa();
    let m = (half_width / options.ds).round() as usize;
    let ds = half_width / m as f64;
    let s_grid: Vec<f64> = (0..=2 * m).map(|i| -half_width + i as f64 * ds).collect();
    let pts = sample_profile(a, options, &s_grid)?;
    let g: Vec<Vec3> = pts.iter().map(|p| p.g).collect();
    let gp: Vec<Vec3> = pts.iter().map(|p| p.gp).collect();
    let gpp: Vec<Vec3> = g
        .iter()
        .zip(&gp)
        .map(|(x, y)| cross_rhs(kappa, x, y, 1.0))
        .collect();
    let target_cross = a / kappa;
    let mut residual_sup = 0.0_f64;
    let mut cross_norm_drift = 0.0_f64;
    let mut dot_drift = 0.0_f64;
    let mut unit_drift = 0.0_f64;
    for i in 0..s_grid.len() {
        let s = s_grid[i];
        let r = (g[i] - gp[i] * s) * kappa - gp[i].cross(&gpp[i]);
        residual_sup = residual_sup.max(r.norm());
        cross_norm_drift = cross_norm_drift.max((g[i].cross(&gp[i]).norm() - target_cross).abs());
        dot_drift = dot_drift.max((g[i].dot(&gp[i]) - s).abs());
        unit_drift = unit_drift.max((gp[i].norm() - 1.0).abs());
    }
    let limit = 10.0 * 1e-8_f64.max(options.tol * 1e3);
    if cross_norm_drift > limit || dot_drift > limit || unit_drift > limit {
        return Err(Error::Tolerance(format!(
            "profile invariants drifted: |GxG'| {cross_norm_drift:.2e}, G.G' {dot_drift:.2e}, |G'| {unit_drift:.2e}"
        )));
    }
    let corners = extract_corner_vectors_raw(a, half_width, options)?;
    Ok(ProfileSolution {
        a,
        half_width,
        options: *options,
        s_grid,
        g,
        gp,
        gpp,
        a_plus: corners.plus(),
        a_minus: corners.minus(),
        curvature: kappa * target_cross,
        cross_norm: target_cross,
        residual_sup,
        cross_norm_drift,
        dot_drift,
        unit_drift,
        corners,
    })
}

impl ProfileSolution {
    /// `κ` of the normalization used.
    pub fn kappa(&self) -> f64 {
        self.options.normalization.kappa()
    }

    /// Re-integrate the profile at arbitrary abscissas.
    pub fn sample(&self, s_values: &[f64]) -> Result<Vec<ProfilePoint>> {
        sample_profile(self.a, &self.options, s_values)
    }

    /// Residual of the profile equation with `G″` taken from second
    /// differences of the sampled `G` on the output grid (accurate to O(ds²)).
    pub fn residual_fd(&self) -> Result<f64> {
        use crate::geometry::{finite_diff, DiffOrder};
        let d2 = finite_diff(
            &self.g,
            &self.s_grid,
            DiffOrder::Second,
            Topology::OpenTruncated,
        )?;
        let kappa = self.kappa();
        let mut r = 0.0_f64;
        for i in 1..self.s_grid.len() - 1 {
            let s = self.s_grid[i];
            let v = (self.g[i] - self.gp[i] * s) * kappa - self.gp[i].cross(&d2[i]);
            r = r.max(v.norm());
        }
        Ok(r)
    }
}

/// Self-similar filament `χ_a(t, ·)` sampled with `n` nodes on `[−L, L]`.
///
/// `χ(t, x) = √t G(x/√t)` for `t > 0` and `χ(t, x) = χ(−t, −x)` for `t < 0`.
pub fn selfsimilar_curve(
    sol: &ProfileSolution,
    t: f64,
    half_length: f64,
    n: usize,
) -> Result<SampledCurve> {
    if t == 0.0 {
        return Err(Error::Invalid("t must be non-zero".into()));
    }
    if n < 2 {
        return Err(Error::Invalid("need at least two nodes".into()));
    }
    let rt = t.abs().sqrt();
    if half_length / rt > sol.half_width * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "L/sqrt|t| = {} exceeds profile half-width {}",
            half_length / rt,
            sol.half_width
        )));
    }
    let xs: Vec<f64> = (0..n)
        .map(|i| -half_length + 2.0 * half_length * i as f64 / (n - 1) as f64)
        .collect();
    let sign = t.signum();
    let s_vals: Vec<f64> = xs.iter().map(|x| sign * x / rt).collect();
    let pts = sol.sample(&s_vals)?;
    let points = pts.iter().map(|p| p.g * rt).collect();
    let tangents = pts.iter().map(|p| p.gp * sign).collect();
    SampledCurve::new(Topology::OpenTruncated, xs, points, Some(tangents))
}

/// Linear momentum `∫_{−L}^{L} χ ∧ χ_x dx` of the self-similar filament.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumSelfSimilar {
    /// Endpoint form `sign(t)(|t|/κ)(G′(L/√|t|) − G′(−L/√|t|))`.
    pub finite: Vec3,
    /// Direct quadrature of `∫χ∧χ_x` carried by the integrator.
    pub quadrature: Vec3,
    /// `sign(t)(|t|/κ)(A⁺ − A⁻)`.
    pub limit: Vec3,
}

/// Momentum of the truncated self-similar filament at time `t`.
///
/// For `κ = 1` the endpoint form is `t(G′(L/√t) − G′(−L/√t))`. The reflection
/// `χ(t, x) = χ(−t, −x)` flips the sign of the momentum for `t < 0`.
pub fn momentum_selfsimilar(
    sol: &ProfileSolution,
    t: f64,
    half_length: f64,
) -> Result<MomentumSelfSimilar> {
    if t == 0.0 {
        return Ok(MomentumSelfSimilar {
            finite: Vec3::zeros(),
            quadrature: Vec3::zeros(),
            limit: Vec3::zeros(),
        });
    }
    let rt = t.abs().sqrt();
    let smax = half_length / rt;
    if smax > sol.half_width * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "L/sqrt|t| = {smax} exceeds profile half-width {}",
            sol.half_width
        )));
    }
    let pts = sol.sample(&[smax, -smax])?;
    let factor = t.signum() * t.abs() / sol.kappa();
    let finite = (pts[0].gp - pts[1].gp) * factor;
    let quadrature = (pts[0].cross_integral - pts[1].cross_integral) * (t.signum() * t.abs());
    let limit = (sol.a_plus - sol.a_minus) * factor;
    Ok(MomentumSelfSimilar {
        finite,
        quadrature,
        limit,
    })
}

/// Fast evaluation of a profile at arbitrary abscissas.
///
/// The state `(G, G′)` is stored at uniformly spaced checkpoints; a query
/// re-integrates from the nearest checkpoint, so each evaluation costs a few
/// integrator steps and carries the accuracy of a full solve.
#[derive(Debug, Clone)]
pub struct ProfileEvaluator {
    pub a: f64,
    pub kappa: f64,
    pub half_width: f64,
    spacing: f64,
    tol: f64,
    /// Checkpoints at `s = k·spacing`, `k ≥ 0`.
    forward: Vec<[f64; 6]>,
    /// Checkpoints at `s = −k·spacing`, `k ≥ 0`.
    backward: Vec<[f64; 6]>,
}

fn profile_rhs6(kappa: f64) -> impl Fn(f64, &[f64; 6]) -> [f64; 6] {
    move |_, y| {
        let (g, gp) = unpack(y);
        let gpp = g.cross(&gp) * kappa;
        [gp.x, gp.y, gp.z, gpp.x, gpp.y, gpp.z]
    }
}

impl ProfileEvaluator {
    /// Build checkpoints on `[−S, S]` with the given spacing.
    pub fn new(a: f64, half_width: f64, spacing: f64, options: &ProfileOptions) -> Result<Self> {
        if !(a >= 0.0) || !(half_width > 0.0) || !(spacing > 0.0) {
            return Err(Error::Invalid(
                "evaluator needs a >= 0, S > 0, spacing > 0".into(),
            ));
        }
        let kappa = options.normalization.kappa();
        let k = (half_width / spacing).ceil() as usize + 1;
        let fwd: Vec<f64> = (0..=k).map(|i| i as f64 * spacing).collect();
        let bwd: Vec<f64> = (0..=k).map(|i| -(i as f64) * spacing).collect();
        let mut y0 = [0.0; 6];
        y0[2] = a / kappa;
        y0[3] = 1.0;
        let solver = Dop853::with_tol(options.tol, options.tol * 0.1);
        let (forward, _) =
            solver.integrate(profile_rhs6(kappa), 0.0, y0, &fwd, 0.01, renormalize_gp)?;
        let (backward, _) =
            solver.integrate(profile_rhs6(kappa), 0.0, y0, &bwd, 0.01, renormalize_gp)?;
        Ok(Self {
            a,
            kappa,
            half_width: k as f64 * spacing,
            spacing,
            tol: options.tol,
            forward,
            backward,
        })
    }

    /// `(G(s), G′(s))`.
    pub fn eval(&self, s: f64) -> Result<(Vec3, Vec3)> {
        if s.abs() > self.half_width {
            return Err(Error::Domain(format!(
                "s = {s} outside evaluator range {}",
                self.half_width
            )));
        }
        let k = (s.abs() / self.spacing).round() as usize;
        let (store, s0) = if s >= 0.0 {
            (&self.forward, k as f64 * self.spacing)
        } else {
            (&self.backward, -(k as f64) * self.spacing)
        };
        let y0 = store[k];
        if s == s0 {
            let (g, gp) = unpack(&y0);
            return Ok((g, gp));
        }
        let solver = Dop853::with_tol(self.tol, self.tol * 0.1);
        let (ys, _) = solver.integrate(
            profile_rhs6(self.kappa),
            s0,
            y0,
            &[s],
            (s - s0).abs(),
            renormalize_gp,
        )?;
        let (g, gp) = unpack(&ys[0]);
        Ok((g, gp))
    }

    /// Hasimoto frame `(T, N)` at `s` (time one), with
    /// `N = (n + ib) e^{iκs²/2}` so that `T′ = Re(ψ̄N)`, `N′ = −ψT` for
    /// `ψ = a e^{iκs²/2}`. For `a = 0` the frame is constant.
    pub fn frame(&self, s: f64) -> Result<(Vec3, CVec3)> {
        let (g, gp) = self.eval(s)?;
        Ok(frame_from_state(self.a, self.kappa, s, &g, &gp))
    }

    /// Modulated normal `Ñ = N e^{i a² log|s|}` at time one (`s ≠ 0`).
    pub fn n_tilde(&self, s: f64) -> Result<CVec3> {
        let (_, n) = self.frame(s)?;
        Ok(modulate_normal(self.a, s, &n))
    }
}

fn frame_from_state(a: f64, kappa: f64, s: f64, g: &Vec3, gp: &Vec3) -> (Vec3, CVec3) {
    if a == 0.0 {
        return (*gp, complexify(&Vec3::y(), &Vec3::z()));
    }
    let n = g.cross(gp) * (kappa / a);
    let n = (n - gp * gp.dot(&n)).normalize();
    let b = gp.cross(&n);
    let phase = Complex64::from_polar(1.0, kappa * s * s / 2.0);
    (*gp, complexify(&n, &b).map(|z| z * phase))
}

fn modulate_normal(a: f64, s: f64, n: &CVec3) -> CVec3 {
    let phase = Complex64::from_polar(1.0, a * a * s.abs().ln());
    n.map(|z| z * phase)
}

/// Anything that yields the self-similar frame at time one.
pub trait FrameSource {
    fn a(&self) -> f64;
    fn kappa(&self) -> f64;
    /// Largest `|s|` served.
    fn reach(&self) -> f64;
    fn frame(&self, s: f64) -> Result<(Vec3, CVec3)>;
}

impl FrameSource for ProfileEvaluator {
    fn a(&self) -> f64 {
        self.a
    }
    fn kappa(&self) -> f64 {
        self.kappa
    }
    fn reach(&self) -> f64 {
        self.half_width
    }
    fn frame(&self, s: f64) -> Result<(Vec3, CVec3)> {
        ProfileEvaluator::frame(self, s)
    }
}

/// The self-similar frame `(T, N)` at time one tabulated on a uniform grid
/// of `[−S, S]` with its exact derivatives `T′ = Re(ψ̄N)`, `N′ = −ψT`, and
/// evaluated by cubic Hermite interpolation. Beyond `S` the tangent returns
/// `A±` and the modulated normal returns the supplied limits `B±`.
#[derive(Debug, Clone)]
pub struct FrameTable {
    pub a: f64,
    pub kappa: f64,
    pub half_width: f64,
    pub spacing: f64,
    /// Per node: `T, T′, Re N, Im N, Re N′, Im N′` (18 numbers); index `k`
    /// is `s = k·spacing` on `forward` and `s = −k·spacing` on `backward`.
    forward: Vec<[f64; 18]>,
    backward: Vec<[f64; 18]>,
    /// Far-field values `(A+, A−, B+, B−)` used beyond the table.
    pub far: Option<(Vec3, Vec3, CVec3, CVec3)>,
}

impl FrameTable {
    pub fn new(a: f64, half_width: f64, spacing: f64, options: &ProfileOptions) -> Result<Self> {
        if !(a >= 0.0) || !(half_width > 0.0) || !(spacing > 0.0) {
            return Err(Error::Invalid(
                "frame table needs a >= 0, S > 0, spacing > 0".into(),
            ));
        }
        let kappa = options.normalization.kappa();
        let k = (half_width / spacing).ceil() as usize;
        let mut y0 = [0.0; 6];
        y0[2] = a / kappa;
        y0[3] = 1.0;
        let solver = Dop853::with_tol(options.tol, options.tol * 0.1);
        let mut sides = Vec::with_capacity(2);
        for dir in [1.0, -1.0] {
            let targets: Vec<f64> = (0..=k).map(|i| dir * i as f64 * spacing).collect();
            let (ys, _) = solver.integrate(
                profile_rhs6(kappa),
                0.0,
                y0,
                &targets,
                spacing,
                renormalize_gp,
            )?;
            let rows = ys
                .iter()
                .zip(&targets)
                .map(|(y, &s)| {
                    let (g, gp) = unpack(y);
                    let (t, n) = frame_from_state(a, kappa, s, &g, &gp);
                    let psi = Complex64::from_polar(a, kappa * s * s / 2.0);
                    let tp = n.map(|z| (psi.conj() * z).re);
                    let np = t.map(|v| -psi * v);
                    let mut r = [0.0; 18];
                    for i in 0..3 {
                        r[i] = t[i];
                        r[3 + i] = tp[i];
                        r[6 + i] = n[i].re;
                        r[9 + i] = n[i].im;
                        r[12 + i] = np[i].re;
                        r[15 + i] = np[i].im;
                    }
                    r
                })
                .collect::<Vec<_>>();
            sides.push(rows);
        }
        let backward = sides.pop().expect("two sides");
        let forward = sides.pop().expect("two sides");
        Ok(Self {
            a,
            kappa,
            half_width: k as f64 * spacing,
            spacing,
            forward,
            backward,
            far: None,
        })
    }

    /// Attach the far-field values served beyond the table.
    pub fn with_far_field(
        mut self,
        a_plus: Vec3,
        a_minus: Vec3,
        b_plus: CVec3,
        b_minus: CVec3,
    ) -> Self {
        self.far = Some((a_plus, a_minus, b_plus, b_minus));
        self
    }

    fn hermite(&self, s: f64) -> Option<[f64; 9]> {
        if s.abs() > self.half_width {
            return None;
        }
        let (store, u) = if s >= 0.0 {
            (&self.forward, s)
        } else {
            (&self.backward, -s)
        };
        let dir = if s >= 0.0 { 1.0 } else { -1.0 };
        let pos = u / self.spacing;
        let i = (pos.floor() as usize).min(store.len() - 2);
        let w = pos - i as f64;
        let (p, q) = (&store[i], &store[i + 1]);
        let h = self.spacing * dir;
        let h00 = (1.0 + 2.0 * w) * (1.0 - w) * (1.0 - w);
        let h10 = w * (1.0 - w) * (1.0 - w);
        let h01 = w * w * (3.0 - 2.0 * w);
        let h11 = w * w * (w - 1.0);
        let mut out = [0.0; 9];
        // Values: T (0..3), Re N (6..9), Im N (9..12); derivatives follow each block by 3 or 6.
        let blocks = [(0usize, 3usize), (6, 12), (9, 15)];
        for (b, (vi, di)) in blocks.iter().enumerate() {
            for c in 0..3 {
                out[3 * b + c] =
                    h00 * p[vi + c] + h10 * h * p[di + c] + h01 * q[vi + c] + h11 * h * q[di + c];
            }
        }
        Some(out)
    }

    /// Tangent `T(1, s)`.
    pub fn tangent(&self, s: f64) -> Result<Vec3> {
        match self.hermite(s) {
            Some(v) => Ok(Vec3::new(v[0], v[1], v[2])),
            None => match self.far {
                Some((ap, am, _, _)) => Ok(if s > 0.0 { ap } else { am }),
                None => Err(Error::Domain(format!("s = {s} beyond frame table"))),
            },
        }
    }

    /// Modulated normal `Ñ(1, s)`.
    pub fn n_tilde(&self, s: f64) -> Result<CVec3> {
        match self.hermite(s) {
            Some(v) => {
                let n = complexify(&Vec3::new(v[3], v[4], v[5]), &Vec3::new(v[6], v[7], v[8]));
                Ok(modulate_normal(self.a, s, &n))
            }
            None => match self.far {
                Some((_, _, bp, bm)) => Ok(if s > 0.0 { bp } else { bm }),
                None => Err(Error::Domain(format!("s = {s} beyond frame table"))),
            },
        }
    }
}

impl FrameSource for FrameTable {
    fn a(&self) -> f64 {
        self.a
    }
    fn kappa(&self) -> f64 {
        self.kappa
    }
    fn reach(&self) -> f64 {
        self.half_width
    }
    fn frame(&self, s: f64) -> Result<(Vec3, CVec3)> {
        let v = self
            .hermite(s)
            .ok_or_else(|| Error::Domain(format!("s = {s} beyond frame table")))?;
        Ok((
            Vec3::new(v[0], v[1], v[2]),
            complexify(&Vec3::new(v[3], v[4], v[5]), &Vec3::new(v[6], v[7], v[8])),
        ))
    }
}

/// Smooth perturbation `ε` of the profile equation, given with its derivative.
pub struct Epsilon {
    f: Box<dyn Fn(f64) -> (f64, f64) + Send + Sync>,
    /// Human-readable description recorded in artifacts.
    pub label: String,
}

impl Epsilon {
    pub fn zero() -> Self {
        Self {
            f: Box::new(|_| (0.0, 0.0)),
            label: "zero".into(),
        }
    }

    /// `ε(s) = amp·exp(−s²/w²)`.
    pub fn gaussian(amp: f64, width: f64) -> Self {
        Self {
            f: Box::new(move |s| {
                let e = amp * (-(s / width).powi(2)).exp();
                (e, -2.0 * s / (width * width) * e)
            }),
            label: format!("gaussian(amp={amp}, width={width})"),
        }
    }

    /// Arbitrary `ε` with its derivative.
    pub fn custom<F>(label: &str, f: F) -> Self
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        Self {
            f: Box::new(f),
            label: label.into(),
        }
    }

    pub fn eval(&self, s: f64) -> (f64, f64) {
        (self.f)(s)
    }
}

/// Profile of the perturbed equation `κ(G − sG′) = (1+ε) G′ ∧ G″`.
#[derive(Debug, Clone)]
pub struct PerturbedProfile {
    pub half_width: f64,
    pub kappa: f64,
    pub s_grid: Vec<f64>,
    pub eps: Vec<f64>,
    pub g: Vec<Vec3>,
    pub gp: Vec<Vec3>,
    /// Limits of `G′` at `±∞`.
    pub g_plus: Vec3,
    pub g_minus: Vec3,
    pub limit_spread: f64,
    /// `sup ||G′|² − |G′(0)|²|`.
    pub unit_drift: f64,
    /// `∫_{−S}^{S} ε′ G′ ds`.
    pub eps_prime_integral: Vec3,
    /// `∫_{−S}^{S} G ∧ G′ ds = κ⁻¹∫(1+ε)G″ ds`.
    pub cross_integral: Vec3,
    /// `G′(S) − G′(−S)`.
    pub endpoint_jump: Vec3,
    /// `max |ε|` on the domain edges (decay record).
    pub eps_edge: f64,
}

/// Integrate the perturbed profile equation on `[−S, S]`.
pub fn solve_perturbed_profile(
    eps: &Epsilon,
    g0: Vec3,
    t0: Vec3,
    half_width: f64,
    options: &ProfileOptions,
) -> Result<PerturbedProfile> {
    if ((t0.norm() - 1.0).abs()) > 1e-12 {
        return Err(Error::Invalid(
            "initial tangent must be a unit vector".into(),
        ));
    }
    let m = (half_width / options.ds).round().max(2.0) as usize;
    let ds = half_width / m as f64;
    let s_grid: Vec<f64> = (0..=2 * m).map(|i| -half_width + i as f64 * ds).collect();
    let eps_vals: Vec<f64> = s_grid.iter().map(|&s| eps.eval(s).0).collect();
    if eps_vals.iter().any(|&e| e <= -0.5 || e >= 0.5) {
        return Err(Error::Invalid("|eps| must stay below 1/2".into()));
    }
    let kappa = options.normalization.kappa();
    let e = window_edges(half_width, kappa);
    let mut all = s_grid.clone();
    all.extend_from_slice(&[e[0], e[1], e[2], -e[0], -e[1], -e[2]]);
    let raw = integrate_general(kappa, g0, t0, |s| eps.eval(s), options.tol, &all)?;
    let n = s_grid.len();
    let g: Vec<Vec3> = raw[..n]
        .iter()
        .map(|y| Vec3::new(y[0], y[1], y[2]))
        .collect();
    let gp: Vec<Vec3> = raw[..n]
        .iter()
        .map(|y| Vec3::new(y[3], y[4], y[5]))
        .collect();
    let unit_drift = gp
        .iter()
        .fold(0.0_f64, |acc, v| acc.max((v.norm_squared() - 1.0).abs()));
    if unit_drift > 1e-8 {
        return Err(Error::Tolerance(format!(
            "|G'|^2 drifted by {unit_drift:.2e}"
        )));
    }
    let q: Vec<Vec3> = raw[n..]
        .iter()
        .map(|y| Vec3::new(y[6], y[7], y[8]))
        .collect();
    let corners = corners_from_weighted(half_width, kappa, |_| Ok(q.clone()))?;
    let last = &raw[n - 1];
    let first = &raw[0];
    let eps_prime_integral = Vec3::new(
        last[12] - first[12],
        last[13] - first[13],
        last[14] - first[14],
    );
    let cross_integral = Vec3::new(
        last[9] - first[9],
        last[10] - first[10],
        last[11] - first[11],
    );
    Ok(PerturbedProfile {
        half_width,
        kappa,
        eps_edge: eps_vals[0].abs().max(eps_vals[n - 1].abs()),
        s_grid,
        eps: eps_vals,
        g_plus: corners.plus(),
        g_minus: corners.minus(),
        limit_spread: corners.spread(),
        unit_drift,
        eps_prime_integral,
        cross_integral,
        endpoint_jump: gp[n - 1] - gp[0],
        g,
        gp,
    })
}

/// Momentum of a perturbed profile by two routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedMomentum {
    /// `G⁺ − G⁻ − ∫ε′G′` with extracted limits.
    pub momentum: Vec3,
    /// `G′(S) − G′(−S) − ∫ε′G′` on the truncated domain.
    pub by_parts: Vec3,
    /// `∫(1+ε)G″` on the truncated domain by direct quadrature.
    pub direct: Vec3,
    /// `|G′(±S) − G±|` summed: size of the truncation tail.
    pub tail: f64,
}

/// Momentum `G⁺ − G⁻ − ∫ε′G′` of a perturbed profile, cross-checked against
/// direct quadrature of `∫(1+ε)G″`.
pub fn momentum_perturbed(p: &PerturbedProfile) -> Result<PerturbedMomentum> {
    if !(p.limit_spread.is_finite()) || p.limit_spread > 1e-2 {
        return Err(Error::NonConvergence("limits of G' not extracted".into()));
    }
    let by_parts = p.endpoint_jump - p.eps_prime_integral;
    let direct = p.cross_integral * p.kappa;
    let n = p.gp.len();
    let tail = (p.gp[n - 1] - p.g_plus).norm() + (p.gp[0] - p.g_minus).norm();
    Ok(PerturbedMomentum {
        momentum: p.g_plus - p.g_minus - p.eps_prime_integral,
        by_parts,
        direct,
        tail,
    })
}
