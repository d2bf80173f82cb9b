//! `frames` and `trace`.

use anyhow::{bail, Result};
use clap::Args;
use filament_core::frames::{
    hasimoto_transport_fn, psi_selfsimilar, reflect_continuation, selfsimilar_frame_field,
    selfsimilar_limits, trace_system_solve_with, FHat, TraceOptions,
};
use filament_core::geometry::{cnorm, OrthoFrame};
use filament_core::io::Table;
use filament_core::profile::{ProfileEvaluator, ProfileOptions};
use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{Globals, Shape};
use crate::output::Output;

/// Transport the frame along the self-similar curvature-torsion field and
/// compare with the frame read off the profile.
#[derive(Args, Serialize, Debug)]
#[command(allow_negative_numbers = true)]
pub struct FramesArgs {
    #[arg(long)]
    pub a: Option<f64>,
    /// Time t > 0
    #[arg(long)]
    pub t: Option<f64>,
    /// Half-length of the x interval
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    /// Number of nodes (odd, so that x = 0 is a node)
    #[arg(long)]
    pub n: Option<usize>,
    /// Magnus substeps per grid interval
    #[arg(long)]
    pub substeps: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct FramesParams {
    pub a: f64,
    pub t: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub substeps: usize,
}

impl Default for FramesParams {
    fn default() -> Self {
        Self {
            a: 0.5,
            t: 1.0,
            l: 10.0,
            n: 2001,
            substeps: 2,
        }
    }
}

#[derive(Serialize)]
struct FramesReport {
    tangent_error: f64,
    normal_error: f64,
    orthonormality_error: f64,
    drift_before_projection: f64,
    first_row_defect: f64,
}

pub fn frames(p: &FramesParams, out: &mut Output, _: &Globals) -> Result<()> {
    if !(p.a >= 0.0 && p.a <= 5.0) || !(p.t > 0.0 && p.t <= 100.0) || !(p.l > 0.0) {
        bail!("need 0 <= a <= 5, 0 < t <= 100 and L > 0");
    }
    if p.n < 3 || p.n.is_multiple_of(2) || !(1..=64).contains(&p.substeps) {
        bail!("n must be odd and >= 3, substeps in 1..=64");
    }
    let reach = p.l / p.t.sqrt();
    if reach > 2000.0 {
        bail!("L/sqrt(t) = {reach} is beyond the supported profile range");
    }
    let ev = ProfileEvaluator::new(p.a, reach + 1.0, 0.5, &ProfileOptions::default())?;
    let grid: Vec<f64> = (0..p.n)
        .map(|k| -p.l + 2.0 * p.l * k as f64 / (p.n - 1) as f64)
        .collect();
    let (t0, n0) = ev.frame(0.0)?;
    let psi = |x: f64| psi_selfsimilar(p.a, ev.kappa, p.t, x);
    let field = hasimoto_transport_fn(
        psi,
        &grid,
        p.t,
        &OrthoFrame { t: t0, n: n0 },
        0.0,
        p.substeps,
    )?;
    let exact = selfsimilar_frame_field(&ev, p.t, &grid)?;
    let mut te = 0.0_f64;
    let mut ne = 0.0_f64;
    for (f, e) in field.frames.iter().zip(&exact.frames) {
        te = te.max((f.t - e.t).norm());
        ne = ne.max(cnorm(&(f.n - e.n)));
    }
    out.table("frames", &Table::frame_field(&field))?;
    out.json(
        "frames_summary",
        &FramesReport {
            tangent_error: te,
            normal_error: ne,
            orthonormality_error: field.max_orthonormality_error(),
            drift_before_projection: field.drift_before_projection,
            first_row_defect: field.first_row_defect(),
        },
    )
}

/// Solve the trace system at the singular time for a given f̂₊.
#[derive(Args, Serialize, Debug)]
#[command(allow_negative_numbers = true)]
pub struct TraceArgs {
    #[arg(long)]
    pub a: Option<f64>,
    /// Scattering profile f̂₊: zero, one, gaussian:AMP,WIDTH or bump:AMP,WIDTH
    #[arg(long)]
    pub fhat: Option<String>,
    /// Outer end of each branch
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Inner end of each branch
    #[arg(long)]
    pub eps0: Option<f64>,
    /// Uniform grid spacing away from the origin
    #[arg(long)]
    pub h: Option<f64>,
    /// Also write the reflected continuation
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub reflect: Option<bool>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct TraceParams {
    pub a: f64,
    pub fhat: Shape,
    pub x_max: f64,
    pub eps0: f64,
    pub h: f64,
    pub reflect: bool,
}

impl Default for TraceParams {
    fn default() -> Self {
        Self {
            a: 0.5,
            fhat: Shape::Zero,
            x_max: 40.0,
            eps0: 1e-3,
            h: 0.01,
            reflect: false,
        }
    }
}

/// Trace profile for a shape descriptor.
pub fn fhat(shape: Shape) -> FHat {
    match shape {
        Shape::Zero => FHat::zero(),
        Shape::Gaussian { amp, width } => FHat::gaussian(amp, width),
        Shape::Bump { amp, width } => FHat::bump(amp, width),
        Shape::One => FHat::custom("one", |_| Complex64::new(1.0, 0.0)),
    }
}

#[derive(Serialize)]
struct TraceReport {
    fhat: String,
    nodes: usize,
    inner_minus_t: [f64; 3],
    inner_plus_t: [f64; 3],
    a_plus: [f64; 3],
    a_minus: [f64; 3],
    limit_spread: f64,
    orthonormality_error: f64,
    trace_l1: f64,
}

pub fn trace(p: &TraceParams, out: &mut Output, _: &Globals) -> Result<()> {
    if !(p.a >= 0.0 && p.a <= 5.0) {
        bail!("a must lie in [0, 5]");
    }
    if !(p.eps0 > 0.0 && p.eps0 < p.x_max && p.x_max <= 1000.0) || !(p.h > 0.0 && p.h <= 1.0) {
        bail!("need 0 < eps0 < x_max <= 1000 and 0 < h <= 1");
    }
    let f = fhat(p.fhat);
    let ev = ProfileEvaluator::new(p.a, 200.0, 0.5, &ProfileOptions::default())?;
    let limits = selfsimilar_limits(&ev, 200.0)?;
    let opts = TraceOptions {
        h: p.h,
        ..TraceOptions::default()
    };
    let tr = trace_system_solve_with(&f, &limits, &Matrix3::identity(), p.x_max, p.eps0, &opts)?;
    out.table("trace", &Table::trace(&tr))?;
    if p.reflect {
        out.table("trace_reflected", &Table::trace(&reflect_continuation(&tr)))?;
    }
    let ((tm, _), (tp, _)) = tr.inner_values();
    out.json(
        "trace_summary",
        &TraceReport {
            fhat: p.fhat.to_string(),
            nodes: tr.x_grid.len(),
            inner_minus_t: tm.into(),
            inner_plus_t: tp.into(),
            a_plus: limits.a_plus.into(),
            a_minus: limits.a_minus.into(),
            limit_spread: limits.spread,
            orthonormality_error: tr.max_orthonormality_error(),
            trace_l1: f.trace_l1(p.x_max),
        },
    )
}
