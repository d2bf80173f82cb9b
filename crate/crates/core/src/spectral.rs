//! Fourier transforms of `T_x` and `N_x` for the self-similar family and at
//! the singular time, and the strict inequalities between their sup-norms.
//!
//! For `t > 0` with `ψ = (a/√t) e^{ix²/4t}` (flow normalization):
//!
//! * `ψ̄N = (a/√t) e^{−ix²/4t} e^{−ia² log(|x|/√t)} Ñ`, so
//!   `F̂(ξ) := (ψ̄N)^(ξ) = a (L I_ξ[1] − I_ξ[L − Ñ])` for any constant `L`;
//!   `L` is the limit of `Ñ` on the side of the stationary point
//!   `x* = −2tξ`, which makes the remainder decay.
//!   `T_x = Re(ψ̄N)` gives `T̂ₓ(ξ) = (F̂(ξ) + conj F̂(−ξ))/2`.
//! * `N_x = −ψT` gives `N̂ₓ(ξ) = −a conj(Ĩ_{−ξ}[T])`, decomposed in the same
//!   way with the limit of `T` on the side of `x* = 2tξ`.
//!
//! At `t = 0` the transforms are the analytic jump of the trace at the origin
//! plus a Filon-trapezoid integral of the smooth part on each branch.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{selfsimilar_limits, FHat, SelfSimilarLimits, TraceField, TraceOptions};
use crate::geometry::{cnorm, to_complex, CVec3, Vec3};
use crate::oscillatory::{eval_chirped, Multiplier, OscOptions};
use crate::profile::{FrameTable, Normalization, ProfileOptions};
use crate::quadrature::filon_trapezoid;

/// Which transform a scan holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Tx,
    Nx,
}

/// Controls for spectra at positive times.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumOptions {
    /// Centre of the high-frequency window used for the limit estimate.
    pub hi_freq_xi: f64,
    /// Number of window points, spread evenly over one period of the
    /// interference phase `2tξ²`.
    pub hi_freq_points: usize,
    pub osc: OscOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            hi_freq_xi: -200.0,
            hi_freq_points: 16,
            osc: OscOptions::default(),
        }
    }
}

/// Transform samples over a frequency grid.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumScan {
    pub kind: SpectrumKind,
    pub t: f64,
    /// Requested grid followed by the high-frequency window points.
    pub xi_grid: Vec<f64>,
    /// Number of leading entries of `xi_grid` that came from the request.
    pub requested: usize,
    #[serde(skip)]
    pub values: Vec<CVec3>,
    pub moduli: Vec<f64>,
    pub err_estimates: Vec<f64>,
    /// Size of the decaying remainder terms per frequency.
    pub remainder_norms: Vec<f64>,
    pub sup_norm: f64,
    /// Root-mean-square modulus over the high-frequency window.
    pub hi_freq_limit_estimate: f64,
}

impl SpectrumScan {
    fn finish(
        kind: SpectrumKind,
        t: f64,
        xi: Vec<f64>,
        requested: usize,
        values: Vec<CVec3>,
        err: Vec<f64>,
        rem: Vec<f64>,
    ) -> Self {
        let moduli: Vec<f64> = values.iter().map(cnorm).collect();
        let sup_norm = moduli.iter().cloned().fold(0.0, f64::max);
        let window = &moduli[requested..];
        let hi = if window.is_empty() {
            moduli.last().copied().unwrap_or(0.0)
        } else {
            (window.iter().map(|m| m * m).sum::<f64>() / window.len() as f64).sqrt()
        };
        Self {
            kind,
            t,
            xi_grid: xi,
            requested,
            values,
            moduli,
            err_estimates: err,
            remainder_norms: rem,
            sup_norm,
            hi_freq_limit_estimate: hi,
        }
    }

    /// Largest error estimate over the scan.
    pub fn max_err(&self) -> f64 {
        self.err_estimates.iter().cloned().fold(0.0, f64::max)
    }
}

/// Self-similar frame data shared by all positive-time spectra of one `a`.
#[derive(Debug, Clone)]
pub struct SpectralContext {
    pub a: f64,
    pub table: FrameTable,
    pub limits: SelfSimilarLimits,
}

impl SpectralContext {
    /// Tabulate the frame far enough to contain the stationary point
    /// `σ* = 2√t|ξ|` of every requested `(t, ξ)`.
    pub fn new(a: f64, t_max: f64, xi_max: f64) -> Result<Self> {
        if !(a >= 0.0) {
            return Err(Error::Invalid(format!("a must be >= 0, got {a}")));
        }
        let opts = ProfileOptions {
            normalization: Normalization::Flow,
            ..ProfileOptions::default()
        };
        let reach = (2.0 * t_max.sqrt() * xi_max.abs() + 60.0).max(220.0);
        let table = FrameTable::new(a, reach, 0.004, &opts)?;
        let limits = selfsimilar_limits(&table, 200.0)?;
        let lp = limits.frame_plus();
        let lm = limits.frame_minus();
        let table = table.with_far_field(lp.t, lm.t, lp.n, lm.n);
        Ok(Self { a, table, limits })
    }

    fn check(&self, t: f64, xi: &[f64]) -> Result<()> {
        if !(t > 0.0) {
            return Err(Error::Invalid(format!(
                "spectra at positive time need t > 0, got {t}"
            )));
        }
        if let Some(x) = xi.iter().find(|x| !x.is_finite()) {
            return Err(Error::Invalid(format!("non-finite frequency {x}")));
        }
        Ok(())
    }

    /// `F̂(ξ) = (ψ̄N)^(ξ)` with an optional perturbation `u` (so that the
    /// curvature-torsion field is `(a + ū) e^{ix²/4t}/√t`).
    /// Returns `(value, error estimate, remainder size)`.
    fn f_hat(
        &self,
        t: f64,
        xi: f64,
        u: Option<&Multiplier>,
        opts: &OscOptions,
    ) -> Result<(CVec3, f64, f64)> {
        let a = self.a;
        let rt = t.sqrt();
        let l = if -2.0 * t * xi >= 0.0 {
            self.limits.frame_plus().n
        } else {
            self.limits.frame_minus().n
        };
        let table = &self.table;
        let rem = |x: f64| -> [Complex64; 3] {
            let n = table.n_tilde(x / rt).unwrap_or(l);
            let d = l - n;
            [d[0], d[1], d[2]]
        };
        let one = |_: f64| [Complex64::new(1.0, 0.0)];
        let i1 = eval_chirped::<1, _>(a, t, true, xi, &one, opts)?;
        let ir = eval_chirped::<3, _>(a, t, true, xi, &rem, opts)?;
        let lead = l.map(|z| z * i1.value[0]);
        let remainder = CVec3::new(ir.value[0], ir.value[1], ir.value[2]);
        let mut value = (lead - remainder).map(|z| z * a);
        let mut err = a * (cnorm(&l) * i1.err_estimate + ir.err_estimate);
        let mut rem_norm = a * cnorm(&remainder);
        if let Some(u) = u {
            let ub = |x: f64| [u.eval(x).conj()];
            let ubr = |x: f64| {
                let c = u.eval(x).conj();
                let r = rem(x);
                [c * r[0], c * r[1], c * r[2]]
            };
            let iu = eval_chirped::<1, _>(a, t, true, xi, &ub, opts)?;
            let iur = eval_chirped::<3, _>(a, t, true, xi, &ubr, opts)?;
            let extra =
                l.map(|z| z * iu.value[0]) - CVec3::new(iur.value[0], iur.value[1], iur.value[2]);
            value += extra;
            err += cnorm(&l) * iu.err_estimate + iur.err_estimate;
            rem_norm += cnorm(&extra);
        }
        Ok((value, err, rem_norm))
    }

    /// `T̂ₓ(t, ξ)` at one frequency.
    pub fn tx_at(
        &self,
        t: f64,
        xi: f64,
        u: Option<&Multiplier>,
        opts: &OscOptions,
    ) -> Result<(CVec3, f64, f64)> {
        let (p, ep, rp) = self.f_hat(t, xi, u, opts)?;
        let (m, em, rm) = self.f_hat(t, -xi, u, opts)?;
        let v = (p + m.map(|z| z.conj())).map(|z| z * 0.5);
        Ok((v, 0.5 * (ep + em), 0.5 * (rp + rm)))
    }

    /// `N̂ₓ(t, ξ)` at one frequency.
    pub fn nx_at(
        &self,
        t: f64,
        xi: f64,
        u: Option<&Multiplier>,
        opts: &OscOptions,
    ) -> Result<(CVec3, f64, f64)> {
        let a = self.a;
        let rt = t.sqrt();
        // Ĩ_{−ξ}[T]: stationary point at x = 2tξ.
        let l = if 2.0 * t * xi >= 0.0 {
            self.limits.frame_plus().t
        } else {
            self.limits.frame_minus().t
        };
        let table = &self.table;
        let rem = |x: f64| -> [Complex64; 3] {
            let tt = table.tangent(x / rt).unwrap_or(l);
            let d = l - tt;
            [d[0].into(), d[1].into(), d[2].into()]
        };
        let one = |_: f64| [Complex64::new(1.0, 0.0)];
        let i1 = eval_chirped::<1, _>(a, t, false, -xi, &one, opts)?;
        let ir = eval_chirped::<3, _>(a, t, false, -xi, &rem, opts)?;
        let lc = to_complex(&l);
        let remainder = CVec3::new(ir.value[0], ir.value[1], ir.value[2]);
        let mut g = (lc.map(|z| z * i1.value[0]) - remainder).map(|z| z * a);
        let mut err = a * (i1.err_estimate + ir.err_estimate);
        let mut rem_norm = a * cnorm(&remainder);
        if let Some(u) = u {
            let uf = |x: f64| [u.eval(x)];
            let ur = |x: f64| {
                let c = u.eval(x);
                let r = rem(x);
                [c * r[0], c * r[1], c * r[2]]
            };
            let iu = eval_chirped::<1, _>(a, t, false, -xi, &uf, opts)?;
            let iur = eval_chirped::<3, _>(a, t, false, -xi, &ur, opts)?;
            let extra =
                lc.map(|z| z * iu.value[0]) - CVec3::new(iur.value[0], iur.value[1], iur.value[2]);
            g += extra;
            err += iu.err_estimate + iur.err_estimate;
            rem_norm += cnorm(&extra);
        }
        Ok((g.map(|z| -z.conj()), err, rem_norm))
    }

    fn scan<F>(
        &self,
        kind: SpectrumKind,
        t: f64,
        xi_grid: &[f64],
        opts: &SpectrumOptions,
        at: F,
    ) -> Result<SpectrumScan>
    where
        F: Fn(f64) -> Result<(CVec3, f64, f64)>,
    {
        self.check(t, xi_grid)?;
        let mut xi = xi_grid.to_vec();
        xi.extend(hi_freq_window(t, opts.hi_freq_xi, opts.hi_freq_points));
        let mut values = Vec::with_capacity(xi.len());
        let mut err = Vec::with_capacity(xi.len());
        let mut rem = Vec::with_capacity(xi.len());
        for &x in &xi {
            let (v, e, r) = at(x)?;
            values.push(v);
            err.push(e);
            rem.push(r);
        }
        Ok(SpectrumScan::finish(
            kind,
            t,
            xi,
            xi_grid.len(),
            values,
            err,
            rem,
        ))
    }

    pub fn spectrum_tx(
        &self,
        t: f64,
        xi_grid: &[f64],
        u: Option<&Multiplier>,
        opts: &SpectrumOptions,
    ) -> Result<SpectrumScan> {
        self.scan(SpectrumKind::Tx, t, xi_grid, opts, |x| {
            self.tx_at(t, x, u, &opts.osc)
        })
    }

    pub fn spectrum_nx(
        &self,
        t: f64,
        xi_grid: &[f64],
        u: Option<&Multiplier>,
        opts: &SpectrumOptions,
    ) -> Result<SpectrumScan> {
        self.scan(SpectrumKind::Nx, t, xi_grid, opts, |x| {
            self.nx_at(t, x, u, &opts.osc)
        })
    }
}

/// Frequencies `ξ_k` near `ξ₀` with `2t(ξ_k² − ξ₀²) = 2πk/K`, covering one
/// period of the interference between the two stationary contributions.
pub fn hi_freq_window(t: f64, xi0: f64, k: usize) -> Vec<f64> {
    let sign = if xi0 < 0.0 { -1.0 } else { 1.0 };
    (0..k)
        .map(|j| sign * (xi0 * xi0 + PI * j as f64 / (t * k as f64)).sqrt())
        .collect()
}

/// `2√π a`, the high-frequency limit of both transforms for `t > 0`.
pub fn hi_freq_limit(a: f64) -> f64 {
    2.0 * PI.sqrt() * a
}

/// `2√(1 − e^{−πa²})`, the zero-time constant of both transforms when `f̂₊ = 0`.
pub fn zero_time_constant(a: f64) -> f64 {
    2.0 * (1.0 - (-PI * a * a).exp()).sqrt()
}

fn branch_fourier<F>(trace: &TraceField, lo: usize, hi: usize, xi: f64, field: F) -> CVec3
where
    F: Fn(usize) -> CVec3,
{
    let x = &trace.x_grid[lo..hi];
    let mut out = CVec3::zeros();
    for c in 0..3 {
        let g: Vec<Complex64> = (lo..hi).map(|k| field(k)[c]).collect();
        out[c] = filon_trapezoid(x, &g, xi);
    }
    out
}

fn zero_scan<F>(
    kind: SpectrumKind,
    trace: &TraceField,
    xi_grid: &[f64],
    jump: CVec3,
    field: F,
) -> SpectrumScan
where
    F: Fn(usize) -> CVec3 + Copy,
{
    let n = trace.x_grid.len();
    let s = trace.split;
    let mut values = Vec::with_capacity(xi_grid.len());
    let mut err = Vec::with_capacity(xi_grid.len());
    let mut rem = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        let smooth =
            branch_fourier(trace, 0, s, xi, field) + branch_fourier(trace, s, n, xi, field);
        // Same rule on every other node: a Richardson-style error estimate.
        let coarse = coarse_branch(trace, 0, s, xi, field) + coarse_branch(trace, s, n, xi, field);
        values.push(jump + smooth);
        err.push(cnorm(&(smooth - coarse)) / 3.0);
        rem.push(cnorm(&smooth));
    }
    SpectrumScan::finish(kind, 0.0, xi_grid.to_vec(), xi_grid.len(), values, err, rem)
}

fn coarse_branch<F>(trace: &TraceField, lo: usize, hi: usize, xi: f64, field: F) -> CVec3
where
    F: Fn(usize) -> CVec3,
{
    let mut idx: Vec<usize> = (lo..hi).step_by(2).collect();
    if *idx.last().unwrap() != hi - 1 {
        idx.push(hi - 1);
    }
    let x: Vec<f64> = idx.iter().map(|&k| trace.x_grid[k]).collect();
    let mut out = CVec3::zeros();
    for c in 0..3 {
        let g: Vec<Complex64> = idx.iter().map(|&k| field(k)[c]).collect();
        out[c] = filon_trapezoid(&x, &g, xi);
    }
    out
}

/// `T̂ₓ(0, ξ)`: the jump `T(0⁺) − T(0⁻) = R(A⁺ − A⁻)` plus the transform of
/// `Re(φ̄Ñ)` on both branches.
pub fn spectrum_at_zero_tx(trace: &TraceField, xi_grid: &[f64]) -> SpectrumScan {
    let ((tm, _), (tp, _)) = trace.inner_values();
    let jump = to_complex(&(tp - tm));
    let tx: Vec<CVec3> = trace.t_x().iter().map(to_complex).collect();
    zero_scan(SpectrumKind::Tx, trace, xi_grid, jump, |k| tx[k])
}

/// `N̂ₓ(0, ξ)`: the jump `Ñ(0⁺) − Ñ(0⁻) = R(B⁺ − B⁻)` plus the transform of
/// `−φT` on both branches.
pub fn spectrum_at_zero_nx(trace: &TraceField, xi_grid: &[f64]) -> SpectrumScan {
    let ((_, nm), (_, np)) = trace.inner_values();
    let jump = np - nm;
    let nx = trace.n_x();
    zero_scan(SpectrumKind::Nx, trace, xi_grid, jump, |k| nx[k])
}

/// Outcome of one strict inequality `inf_t ‖·̂ₓ(t)‖_∞ > ‖·̂ₓ(0)‖_∞`.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub kind: SpectrumKind,
    pub a: f64,
    pub t_grid: Vec<f64>,
    pub xi_grid: Vec<f64>,
    pub f_hat_plus: String,
    /// Sup-norm of the scan at each `t` of `t_grid`.
    pub sup_per_t: Vec<f64>,
    /// High-frequency limit estimate at each `t`.
    pub hi_freq_limits: Vec<f64>,
    pub inf_sup_t_pos: f64,
    pub sup_at_zero: f64,
    pub gap: f64,
    /// `2√π a − 2√(1 − e^{−πa²})`.
    pub analytic_gap: f64,
    /// Combined quadrature and extraction error.
    pub error_budget: f64,
    pub margin: f64,
    pub pass: bool,
    /// The gap is positive but smaller than the error budget.
    pub inconclusive: bool,
}

/// Frequencies used by default: a fine grid on `[−10, 10]` and the dyadic
/// ladder `±12.5·2^k` up to 400.
pub fn default_xi_grid() -> Vec<f64> {
    let mut v: Vec<f64> = (0..=40).map(|k| -10.0 + 0.5 * k as f64).collect();
    let mut x = 12.5;
    while x <= 400.0 {
        v.push(-x);
        v.push(x);
        x *= 2.0;
    }
    v
}

/// Positive-time scans of both transforms over a `t` grid.
#[derive(Debug, Clone)]
pub struct PositiveTimeScans {
    pub a: f64,
    pub t_grid: Vec<f64>,
    pub xi_grid: Vec<f64>,
    pub tx: Vec<SpectrumScan>,
    pub nx: Vec<SpectrumScan>,
    /// Far-field extraction spread of the underlying limits.
    pub limit_spread: f64,
    pub limits: SelfSimilarLimits,
}

impl PositiveTimeScans {
    /// Scan the self-similar solution (`u = 0`) for every `t` in `t_grid`.
    pub fn compute(
        a: f64,
        t_grid: &[f64],
        xi_grid: &[f64],
        opts: &SpectrumOptions,
    ) -> Result<Self> {
        if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::Invalid(
                "t_grid must be non-empty within (0, 1]".into(),
            ));
        }
        let xi_max = xi_grid
            .iter()
            .chain(std::iter::once(&opts.hi_freq_xi))
            .fold(0.0_f64, |m, x| m.max(x.abs()))
            * 1.01;
        let t_max = t_grid.iter().cloned().fold(0.0, f64::max);
        let ctx = SpectralContext::new(a, t_max, xi_max)?;
        let mut tx = Vec::with_capacity(t_grid.len());
        let mut nx = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            tx.push(ctx.spectrum_tx(t, xi_grid, None, opts)?);
            nx.push(ctx.spectrum_nx(t, xi_grid, None, opts)?);
        }
        Ok(Self {
            a,
            t_grid: t_grid.to_vec(),
            xi_grid: xi_grid.to_vec(),
            tx,
            nx,
            limit_spread: ctx.limits.spread,
            limits: ctx.limits,
        })
    }

    /// Compare against the zero-time spectra of the trace driven by
    /// `f_hat_plus` (identity rotation) and assemble both reports.
    pub fn report(&self, f_hat_plus: &FHat) -> Result<(InequalityReport, InequalityReport)> {
        let trace = crate::frames::trace_system_solve_with(
            f_hat_plus,
            &self.limits,
            &nalgebra::Matrix3::identity(),
            40.0,
            1e-3,
            &TraceOptions::default(),
        )?;
        let zt = spectrum_at_zero_tx(&trace, &self.xi_grid);
        let zn = spectrum_at_zero_nx(&trace, &self.xi_grid);
        let a = self.a;
        let build = |kind: SpectrumKind, scans: &[SpectrumScan], zero: &SpectrumScan| {
            let sups: Vec<f64> = scans.iter().map(|s| s.sup_norm).collect();
            let his: Vec<f64> = scans.iter().map(|s| s.hi_freq_limit_estimate).collect();
            let scan_err = scans.iter().map(SpectrumScan::max_err).fold(0.0, f64::max);
            let err = scan_err + zero.max_err() + 2.0 * self.limit_spread * hi_freq_limit(a);
            let inf = sups.iter().cloned().fold(f64::INFINITY, f64::min);
            let gap = inf - zero.sup_norm;
            let margin = gap - err;
            InequalityReport {
                kind,
                a,
                t_grid: self.t_grid.clone(),
                xi_grid: self.xi_grid.clone(),
                f_hat_plus: f_hat_plus.label.clone(),
                sup_per_t: sups,
                hi_freq_limits: his,
                inf_sup_t_pos: inf,
                sup_at_zero: zero.sup_norm,
                gap,
                analytic_gap: hi_freq_limit(a) - zero_time_constant(a),
                error_budget: err,
                margin,
                pass: margin > 0.0,
                inconclusive: gap > 0.0 && margin <= 0.0,
            }
        };
        Ok((
            build(SpectrumKind::Tx, &self.tx, &zt),
            build(SpectrumKind::Nx, &self.nx, &zn),
        ))
    }
}

/// Scan both transforms for every `t` of `t_grid` and at `t = 0` (trace with
/// `f̂₊`, identity `R`), and assemble the two inequality reports.
pub fn theorem11_report(
    a: f64,
    t_grid: &[f64],
    xi_grid: &[f64],
    f_hat_plus: &FHat,
    opts: &SpectrumOptions,
) -> Result<(InequalityReport, InequalityReport)> {
    PositiveTimeScans::compute(a, t_grid, xi_grid, opts)?.report(f_hat_plus)
}

/// `|Re(e^{iθ} N)|` for a complex normal.
pub fn rotated_real_part_norm(n: &CVec3, theta: f64) -> f64 {
    let e = Complex64::from_polar(1.0, theta);
    n.map(|z| (e * z).re).norm()
}

/// Real part of a complex vector.
pub fn real_part(v: &CVec3) -> Vec3 {
    v.map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_spans_one_interference_period() {
        let w = hi_freq_window(0.25, -200.0, 8);
        assert_eq!(w.len(), 8);
        let ph: Vec<f64> = w.iter().map(|x| 2.0 * 0.25 * x * x).collect();
        for k in 1..8 {
            assert!((ph[k] - ph[0] - 2.0 * PI * k as f64 / 8.0).abs() < 1e-8);
        }
    }

    #[test]
    fn closed_forms() {
        assert!((hi_freq_limit(0.5) - PI.sqrt()).abs() < 1e-15);
        assert!((zero_time_constant(0.5) - 1.47521).abs() < 1e-5);
        assert!(((hi_freq_limit(0.5) - zero_time_constant(0.5)) - 0.29724).abs() < 1e-5);
    }

    #[test]
    fn default_grid_reaches_400() {
        let g = default_xi_grid();
        assert!(g.contains(&-400.0) && g.contains(&400.0) && g.contains(&0.0));
    }
}
