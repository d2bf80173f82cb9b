//! `profile`, `corners` and `momentum`.

use std::f64::consts::PI;

use anyhow::{bail, Result};
use clap::Args;
use filament_core::geometry::Vec3;
use filament_core::io::{ProfileSummary, Table};
use filament_core::profile::{
    momentum_perturbed, momentum_selfsimilar, solve_perturbed_profile, solve_profile_with, Epsilon,
    Normalization, ProfileOptions,
};
use serde::{Deserialize, Serialize};

use crate::config::{Globals, Shape};
use crate::output::{par_map, Output};

fn options(normalization: Normalization, tol: f64, ds: f64) -> Result<ProfileOptions> {
    if !(tol > 0.0 && tol < 1e-3) || !(ds > 0.0 && ds <= 1.0) {
        bail!("need 0 < tol < 1e-3 and 0 < ds <= 1");
    }
    Ok(ProfileOptions {
        normalization,
        tol,
        ds,
        ..ProfileOptions::default()
    })
}

fn check_a(a: f64) -> Result<()> {
    if !(0.0..=5.0).contains(&a) {
        bail!("profile parameter a must lie in [0, 5], got {a}");
    }
    Ok(())
}

fn check_half_width(s: f64) -> Result<()> {
    if !(5.0..=2000.0).contains(&s) {
        bail!("half-width S must lie in [5, 2000], got {s}");
    }
    Ok(())
}

/// Solve the profile equation on [-S, S] and extract the corner vectors.
#[derive(Args, Serialize, Debug)]
#[command(allow_negative_numbers = true)]
pub struct ProfileArgs {
    /// Profile parameter (curvature of the self-similar filament at t = 1)
    #[arg(long)]
    pub a: Option<f64>,
    /// Half-width of the integration domain
    #[arg(long = "S")]
    #[serde(rename = "S")]
    pub s: Option<f64>,
    /// Integrator tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output grid spacing
    #[arg(long)]
    pub ds: Option<f64>,
    /// Equation normalization: flow or as-printed
    #[arg(long)]
    pub normalization: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileParams {
    pub a: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub tol: f64,
    pub ds: f64,
    pub normalization: Normalization,
}

impl Default for ProfileParams {
    fn default() -> Self {
        Self {
            a: 0.5,
            s: 200.0,
            tol: 1e-13,
            ds: 0.02,
            normalization: Normalization::Flow,
        }
    }
}

#[derive(Serialize)]
struct ProfileReport {
    #[serde(flatten)]
    summary: ProfileSummary,
    cross_norm: f64,
    cross_norm_drift: f64,
    dot_drift: f64,
    unit_drift: f64,
}

pub fn profile(p: &ProfileParams, out: &mut Output, _: &Globals) -> Result<()> {
    check_a(p.a)?;
    check_half_width(p.s)?;
    let sol = solve_profile_with(p.a, p.s, &options(p.normalization, p.tol, p.ds)?)?;
    out.table("profile", &Table::profile(&sol))?;
    out.json(
        "summary",
        &ProfileReport {
            summary: ProfileSummary::new(&sol),
            cross_norm: sol.cross_norm,
            cross_norm_drift: sol.cross_norm_drift,
            dot_drift: sol.dot_drift,
            unit_drift: sol.unit_drift,
        },
    )
}

/// Corner vectors over a grid of parameters and half-widths.
#[derive(Args, Serialize, Debug)]
#[command(allow_negative_numbers = true)]
pub struct CornersArgs {
    /// Comma-separated profile parameters
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<f64>>,
    /// Comma-separated half-widths
    #[arg(long = "S", value_delimiter = ',')]
    #[serde(rename = "S")]
    pub s: Option<Vec<f64>>,
    /// Equation normalization: flow or as-printed
    #[arg(long)]
    pub normalization: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct CornersParams {
    pub a: Vec<f64>,
    #[serde(rename = "S")]
    pub s: Vec<f64>,
    pub normalization: Normalization,
}

impl Default for CornersParams {
    fn default() -> Self {
        Self {
            a: vec![0.3, 0.5, 0.8],
            s: vec![50.0, 100.0, 200.0],
            normalization: Normalization::Flow,
        }
    }
}

pub fn corners(p: &CornersParams, out: &mut Output, g: &Globals) -> Result<()> {
    if p.a.is_empty() || p.s.is_empty() {
        bail!("need at least one value of a and of S");
    }
    p.a.iter().try_for_each(|&a| check_a(a))?;
    p.s.iter().try_for_each(|&s| check_half_width(s))?;
    let opts = options(p.normalization, 1e-13, 0.02)?;
    let jobs: Vec<(f64, f64)> =
        p.a.iter()
            .flat_map(|&a| p.s.iter().map(move |&s| (a, s)))
            .collect();
    let rows = par_map(&jobs, g.threads, |&(a, s)| {
        let sol = solve_profile_with(a, s, &opts)?;
        let (ap, am) = (sol.a_plus, sol.a_minus);
        let gap2 = (ap - am).norm_squared();
        let gap2_ref = 4.0 * (1.0 - (-PI * a * a).exp());
        let a1_ref = (-PI * a * a / 2.0).exp();
        let rel = |x: f64, r: f64| if r == 0.0 { x.abs() } else { (x - r).abs() / r };
        Ok(vec![
            a,
            s,
            ap.x,
            ap.y,
            ap.z,
            am.x,
            am.y,
            am.z,
            gap2,
            gap2_ref,
            rel(gap2, gap2_ref),
            ap.x,
            a1_ref,
            rel(ap.x, a1_ref),
            sol.corners.spread(),
        ])
    })?;
    let mut t = Table::new(&[
        "a",
        "S",
        "ap_x",
        "ap_y",
        "ap_z",
        "am_x",
        "am_y",
        "am_z",
        "gap2",
        "gap2_closed_form",
        "gap2_rel_err",
        "a1",
        "a1_closed_form",
        "a1_rel_err",
        "extraction_spread",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    out.table("corners", &t)
}

/// Linear momentum of the truncated self-similar filament, optionally of a
/// perturbed profile too.
#[derive(Args, Serialize, Debug)]
#[command(allow_negative_numbers = true)]
pub struct MomentumArgs {
    #[arg(long)]
    pub a: Option<f64>,
    /// Comma-separated times (non-zero; negative times use the reflection)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t: Option<Vec<f64>>,
    /// Half-length of the truncated filament
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    /// Profile half-width
    #[arg(long = "S")]
    #[serde(rename = "S")]
    pub s: Option<f64>,
    #[arg(long)]
    pub normalization: Option<String>,
    /// Perturbation of the profile equation, e.g. gaussian:0.1,1
    #[arg(long)]
    pub eps: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct MomentumParams {
    pub a: f64,
    pub t: Vec<f64>,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub normalization: Normalization,
    pub eps: Option<Shape>,
}

impl Default for MomentumParams {
    fn default() -> Self {
        Self {
            a: 0.5,
            t: vec![1.0, 0.5, 0.25, 0.1, 0.01],
            l: 10.0,
            s: 200.0,
            normalization: Normalization::Flow,
            eps: None,
        }
    }
}

#[derive(Serialize)]
struct PerturbedReport {
    eps: String,
    momentum: [f64; 3],
    by_parts: [f64; 3],
    direct: [f64; 3],
    tail: f64,
    limit_spread: f64,
    unit_drift: f64,
    g_plus: [f64; 3],
    g_minus: [f64; 3],
}

pub fn momentum(p: &MomentumParams, out: &mut Output, g: &Globals) -> Result<()> {
    check_a(p.a)?;
    check_half_width(p.s)?;
    if p.t.is_empty() || p.t.iter().any(|t| !t.is_finite() || t.abs() > 100.0) {
        bail!("need a non-empty list of finite times with |t| <= 100");
    }
    if !(p.l > 0.0) {
        bail!("L must be positive");
    }
    let opts = options(p.normalization, 1e-13, 0.02)?;
    let sol = solve_profile_with(p.a, p.s, &opts)?;
    let rows = par_map(&p.t, g.threads, |&t| {
        let m = momentum_selfsimilar(&sol, t, p.l)?;
        let mut row = vec![t, p.l];
        for v in [m.finite, m.quadrature, m.limit] {
            row.extend(v.iter().copied());
        }
        row.extend([
            m.finite.norm(),
            m.limit.norm(),
            (m.finite - m.quadrature).norm(),
            (m.finite - m.limit).norm(),
        ]);
        Ok(row)
    })?;
    let mut t = Table::new(&[
        "t",
        "L",
        "finite_x",
        "finite_y",
        "finite_z",
        "quadrature_x",
        "quadrature_y",
        "quadrature_z",
        "limit_x",
        "limit_y",
        "limit_z",
        "finite_abs",
        "limit_abs",
        "endpoint_vs_quadrature",
        "truncation",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    out.table("momentum", &t)?;

    if let Some(shape) = p.eps {
        let eps = match shape {
            Shape::Zero => Epsilon::zero(),
            Shape::Gaussian { amp, width } => Epsilon::gaussian(amp, width),
            other => bail!("eps supports zero and gaussian:AMP,WIDTH, got {other}"),
        };
        let g0 = Vec3::new(0.0, 0.0, p.a / p.normalization.kappa());
        let pp = solve_perturbed_profile(&eps, g0, Vec3::x(), p.s, &opts)?;
        let m = momentum_perturbed(&pp)?;
        out.json(
            "perturbed",
            &PerturbedReport {
                eps: shape.to_string(),
                momentum: m.momentum.into(),
                by_parts: m.by_parts.into(),
                direct: m.direct.into(),
                tail: m.tail,
                limit_spread: pp.limit_spread,
                unit_drift: pp.unit_drift,
                g_plus: pp.g_plus.into(),
                g_minus: pp.g_minus.into(),
            },
        )?;
    }
    Ok(())
}
