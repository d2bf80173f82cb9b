//! `oscint`, `spectrum` and `theorem11`.

use anyhow::{bail, Result};
use clap::Args;
use filament_core::frames::trace_system_solve_with;
use filament_core::frames::{selfsimilar_limits, TraceOptions};
use filament_core::io::Table;
use filament_core::oscillatory::{
    decay_sweep, fitted_decay_exponent, fresnel_full, Multiplier, OscKernel,
};
use filament_core::profile::{ProfileEvaluator, ProfileOptions};
use filament_core::spectral::{
    default_xi_grid, hi_freq_limit, spectrum_at_zero_nx, spectrum_at_zero_tx, zero_time_constant,
    InequalityReport, PositiveTimeScans, SpectralContext, SpectrumKind, SpectrumOptions,
    SpectrumScan,
};
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::frames::fhat;
use crate::config::{Globals, Shape};
use crate::output::{par_map, Output};

fn multiplier(shape: Shape) -> Option<Multiplier> {
    match shape {
        Shape::Zero => None,
        Shape::One => Some(Multiplier::One),
        s => Some(Multiplier::function(move |x| s.eval_complex(x))),
    }
}

fn check_a(a: f64) -> Result<()> {
    if !(0.0..=5.0).contains(&a) {
        bail!("a must lie in [0, 5], got {a}");
    }
    Ok(())
}

/// Sweep the oscillatory integral I_ξ (or Ĩ_ξ) toward ξ → −∞.
#[derive(Args, Serialize, Debug)]
#[command(allow_negative_numbers = true)]
pub struct OscintArgs {
    #[arg(long)]
    pub a: Option<f64>,
    /// Time t > 0
    #[arg(long)]
    pub t: Option<f64>,
    /// Multiplier m(x): one, gaussian:AMP,WIDTH or bump:AMP,WIDTH
    #[arg(long)]
    pub m: Option<String>,
    /// Include the logarithmic phase e^{-ia² log|x|}
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log_phase: Option<bool>,
    /// Comma-separated frequencies, decreasing
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct OscintParams {
    pub a: f64,
    pub t: f64,
    pub m: Shape,
    pub log_phase: bool,
    pub xi: Vec<f64>,
}

impl Default for OscintParams {
    fn default() -> Self {
        Self {
            a: 0.5,
            t: 0.25,
            m: Shape::One,
            log_phase: true,
            xi: vec![-25.0, -50.0, -100.0, -200.0],
        }
    }
}

#[derive(Serialize)]
struct OscintReport {
    fresnel_full: (f64, f64),
    /// Fitted exponent of |I_ξ| against |ξ|.
    abs_decay_exponent: f64,
    /// Distances to the asymptotic reference decrease along the sweep.
    reference_gap_monotone: bool,
    last_reference_gap: f64,
    max_err_estimate: f64,
}

pub fn oscint(p: &OscintParams, out: &mut Output, g: &Globals) -> Result<()> {
    check_a(p.a)?;
    if p.xi.len() < 2
        || p.xi.windows(2).any(|w| !(w[1] < w[0]))
        || p.xi.iter().any(|x| !x.is_finite())
    {
        bail!("xi must hold at least two finite, strictly decreasing frequencies");
    }
    let Some(m) = multiplier(p.m) else {
        bail!("multiplier must be non-zero");
    };
    let kernel = OscKernel::new(p.a, p.t, p.log_phase, m)?;
    let rows: Vec<_> = par_map(&p.xi, g.threads, |&xi| Ok(decay_sweep(&kernel, &[xi])?[0]))?;
    out.table("sweep", &Table::sweep(&rows))?;
    let abs: Vec<f64> = rows.iter().map(|r| r.abs).collect();
    let f = fresnel_full();
    out.json(
        "oscint_summary",
        &OscintReport {
            fresnel_full: (f.re, f.im),
            abs_decay_exponent: fitted_decay_exponent(&p.xi, &abs),
            reference_gap_monotone: rows.windows(2).all(|w| w[1].abs_diff < w[0].abs_diff),
            last_reference_gap: rows.last().map_or(0.0, |r| r.abs_diff),
            max_err_estimate: rows.iter().map(|r| r.err_estimate).fold(0.0, f64::max),
        },
    )
}

/// Fourier transform of T_x or N_x at one time.
#[derive(Args, Serialize, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub a: Option<f64>,
    /// Time t >= 0; t = 0 uses the trace driven by f̂₊
    #[arg(long)]
    pub t: Option<f64>,
    /// Transform: tx or nx
    #[arg(long)]
    pub kind: Option<String>,
    /// Comma-separated frequencies (default: fine grid on [-10, 10] plus a dyadic ladder)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Option<Vec<f64>>,
    /// Scattering profile f̂₊ used at t = 0
    #[arg(long)]
    pub fhat: Option<String>,
    /// Perturbation u(t, ·) of the curvature-torsion field at t > 0
    #[arg(long)]
    pub u: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumParams {
    pub a: f64,
    pub t: f64,
    pub kind: SpectrumKind,
    pub xi: Vec<f64>,
    pub fhat: Shape,
    pub u: Shape,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        Self {
            a: 0.5,
            t: 0.5,
            kind: SpectrumKind::Tx,
            xi: default_xi_grid(),
            fhat: Shape::Zero,
            u: Shape::Zero,
        }
    }
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    #[serde(flatten)]
    scan: &'a SpectrumScan,
    max_err: f64,
    hi_freq_limit: f64,
    zero_time_constant: f64,
}

pub fn spectrum(p: &SpectrumParams, out: &mut Output, _: &Globals) -> Result<()> {
    check_a(p.a)?;
    if p.xi.is_empty() || p.xi.iter().any(|x| !x.is_finite() || x.abs() > 2000.0) {
        bail!("xi must be a non-empty list of finite frequencies with |xi| <= 2000");
    }
    if !(p.t >= 0.0 && p.t <= 1.0) {
        bail!("t must lie in [0, 1], got {}", p.t);
    }
    let scan = if p.t == 0.0 {
        let ev = ProfileEvaluator::new(p.a, 200.0, 0.5, &ProfileOptions::default())?;
        let limits = selfsimilar_limits(&ev, 200.0)?;
        let tr = trace_system_solve_with(
            &fhat(p.fhat),
            &limits,
            &Matrix3::identity(),
            40.0,
            1e-3,
            &TraceOptions::default(),
        )?;
        match p.kind {
            SpectrumKind::Tx => spectrum_at_zero_tx(&tr, &p.xi),
            SpectrumKind::Nx => spectrum_at_zero_nx(&tr, &p.xi),
        }
    } else {
        let opts = SpectrumOptions::default();
        let xi_max =
            p.xi.iter()
                .fold(opts.hi_freq_xi.abs(), |m, x| m.max(x.abs()))
                * 1.01;
        let ctx = SpectralContext::new(p.a, p.t, xi_max)?;
        let u = multiplier(p.u);
        match p.kind {
            SpectrumKind::Tx => ctx.spectrum_tx(p.t, &p.xi, u.as_ref(), &opts)?,
            SpectrumKind::Nx => ctx.spectrum_nx(p.t, &p.xi, u.as_ref(), &opts)?,
        }
    };
    out.table("spectrum", &Table::scan(&scan))?;
    out.json(
        "spectrum_summary",
        &SpectrumReport {
            scan: &scan,
            max_err: scan.max_err(),
            hi_freq_limit: hi_freq_limit(p.a),
            zero_time_constant: zero_time_constant(p.a),
        },
    )
}

/// Strict gap between positive-time and zero-time sup norms of both transforms.
#[derive(Args, Serialize, Debug)]
#[command(allow_negative_numbers = true)]
pub struct Theorem11Args {
    #[arg(long)]
    pub a: Option<f64>,
    /// Comma-separated positive times in (0, 1]
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Comma-separated frequencies
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub xi: Option<Vec<f64>>,
    /// Scattering profile f̂₊ of the trace at t = 0
    #[arg(long)]
    pub fhat: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct Theorem11Params {
    pub a: f64,
    pub t: Vec<f64>,
    pub xi: Vec<f64>,
    pub fhat: Shape,
}

impl Default for Theorem11Params {
    fn default() -> Self {
        Self {
            a: 0.5,
            t: vec![0.1, 0.25, 0.5, 1.0],
            xi: default_xi_grid(),
            fhat: Shape::Zero,
        }
    }
}

#[derive(Serialize)]
struct Theorem11Report {
    pass: bool,
    tx: InequalityReport,
    nx: InequalityReport,
}

pub fn theorem11(p: &Theorem11Params, out: &mut Output, g: &Globals) -> Result<()> {
    check_a(p.a)?;
    if p.t.is_empty() || p.t.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        bail!("t must be a non-empty list within (0, 1]");
    }
    if p.xi.is_empty() || p.xi.iter().any(|x| !x.is_finite() || x.abs() > 2000.0) {
        bail!("xi must be a non-empty list of finite frequencies with |xi| <= 2000");
    }
    let opts = SpectrumOptions::default();
    let parts = par_map(&p.t, g.threads, |&t| {
        Ok(PositiveTimeScans::compute(p.a, &[t], &p.xi, &opts)?)
    })?;
    let mut scans = parts[0].clone();
    for part in &parts[1..] {
        scans.t_grid.extend(&part.t_grid);
        scans.tx.extend(part.tx.iter().cloned());
        scans.nx.extend(part.nx.iter().cloned());
        scans.limit_spread = scans.limit_spread.max(part.limit_spread);
    }
    let (tx, nx) = scans.report(&fhat(p.fhat))?;
    let mut t = Table::new(&["t", "sup_tx", "sup_nx", "hi_freq_tx", "hi_freq_nx"]);
    for k in 0..scans.t_grid.len() {
        t.push(vec![
            scans.t_grid[k],
            tx.sup_per_t[k],
            nx.sup_per_t[k],
            tx.hi_freq_limits[k],
            nx.hi_freq_limits[k],
        ]);
    }
    out.table("theorem11", &t)?;
    out.json(
        "report",
        &Theorem11Report {
            pass: tx.pass && nx.pass,
            tx,
            nx,
        },
    )
}
