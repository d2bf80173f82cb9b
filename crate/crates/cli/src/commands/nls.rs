//! `nls` and `xnorm`.

use anyhow::{bail, Result};
use clap::Args;
use filament_core::io::Table;
use filament_core::nls::{
    evolve_u, scattering_extract_with, singular_limit_error, xgamma_norm, ModulatedField, NlsGrid,
    NlsSign, ScatterEstimate, SingularLimitTable,
};
use serde::{Deserialize, Serialize};

use crate::config::{Globals, Shape};
use crate::output::Output;

/// Evolve the perturbation u of the self-similar NLS solution and estimate
/// its final state.
#[derive(Args, Serialize, Debug)]
#[command(allow_negative_numbers = true)]
pub struct NlsArgs {
    #[arg(long)]
    pub a: Option<f64>,
    /// focusing or defocusing
    #[arg(long)]
    pub sign: Option<String>,
    /// Half-width of the periodic X domain
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    /// Number of grid points (even)
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest step in τ
    #[arg(long)]
    pub dtau: Option<f64>,
    /// Final τ
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Datum u(1, ·): zero, gaussian:AMP,WIDTH or bump:AMP,WIDTH
    #[arg(long)]
    pub datum: Option<String>,
    /// Comma-separated τ values at which snapshots are written
    #[arg(long, value_delimiter = ',')]
    pub record: Option<Vec<f64>>,
    /// Comma-separated original times t = 1/τ for the singular-limit table
    #[arg(long, value_delimiter = ',')]
    pub singular_t: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct NlsParams {
    pub a: f64,
    pub sign: NlsSign,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub dtau: f64,
    pub tau_max: f64,
    pub datum: Shape,
    pub record: Vec<f64>,
    pub singular_t: Vec<f64>,
}

impl Default for NlsParams {
    fn default() -> Self {
        Self {
            a: 0.5,
            sign: NlsSign::Focusing,
            l: 512.0,
            n: 4096,
            dtau: 0.05,
            tau_max: 50.0,
            datum: Shape::Gaussian {
                amp: 0.1,
                width: 1.0,
            },
            record: vec![10.0, 20.0, 30.0, 40.0],
            singular_t: Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct Scatter {
    corrected: ScatterEstimate,
    uncorrected: ScatterEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    singular_limit: Option<SingularLimitTable>,
}

fn tau_label(tau: f64) -> String {
    format!("u_tau_{tau}")
}

pub fn nls(p: &NlsParams, out: &mut Output, _: &Globals) -> Result<()> {
    if !(p.a >= 0.0 && p.a <= 5.0) {
        bail!("a must lie in [0, 5]");
    }
    if !(p.dtau > 0.0 && p.dtau <= 1.0) || !(p.tau_max > 1.0 && p.tau_max <= 1e5) {
        bail!("need 0 < dtau <= 1 and 1 < tau_max <= 1e5");
    }
    if p.tau_max / p.dtau > 1e7 {
        bail!("more than 1e7 steps requested");
    }
    if p.record.iter().any(|&t| !(t > 1.0 && t <= p.tau_max)) {
        bail!("record times must lie in (1, tau_max]");
    }
    if p.singular_t
        .iter()
        .any(|&t| !(t >= 1.0 / p.tau_max && t < 1.0))
    {
        bail!("singular_t values must lie in [1/tau_max, 1)");
    }
    let grid = NlsGrid::new(p.l, p.n)?;
    let u1 = match p.datum {
        Shape::Zero => ModulatedField::zero(p.a, p.sign, grid),
        Shape::Gaussian { amp, width } => ModulatedField::gaussian(p.a, p.sign, grid, amp, width),
        s => {
            let u = grid.points().iter().map(|&x| s.eval_complex(x)).collect();
            ModulatedField::new(1.0, p.a, p.sign, grid, u)?
        }
    };
    let mut record = p.record.clone();
    record.extend(p.singular_t.iter().map(|t| 1.0 / t));
    let traj = evolve_u(&u1, p.tau_max, p.dtau, &record)?;

    let mut rec: Vec<f64> = p.record.clone();
    rec.sort_by(f64::total_cmp);
    rec.dedup();
    for &tau in &rec {
        out.table(&tau_label(tau), &Table::nls_snapshot(traj.at(tau)?))?;
    }
    let mut diag = Table::new(&["tau", "l2", "sup", "boundary"]);
    for d in &traj.diagnostics {
        diag.push(vec![d.tau, d.l2, d.sup, d.boundary]);
    }
    out.table("diagnostics", &diag)?;
    out.json("nls_manifest", &traj.manifest())?;

    let mut taus = rec.clone();
    if taus.last() != Some(&p.tau_max) {
        taus.push(p.tau_max);
    }
    if taus.len() >= 3 {
        let corrected = scattering_extract_with(&traj, &taus, true)?;
        let uncorrected = scattering_extract_with(&traj, &taus, false)?;
        let singular_limit = if p.singular_t.is_empty() {
            None
        } else {
            Some(singular_limit_error(&traj, &corrected, &p.singular_t)?)
        };
        let mut f = Table::new(&["x", "re_f", "im_f"]);
        for (x, z) in grid.points().iter().zip(&corrected.f_plus) {
            f.push(vec![*x, z.re, z.im]);
        }
        out.table("final_state", &f)?;
        out.json(
            "scatter",
            &Scatter {
                corrected,
                uncorrected,
                singular_limit,
            },
        )?;
    }
    Ok(())
}

/// Norm ‖f‖_{L²} + sup_{ξ² ≤ 1} |ξ|^{2γ}|f̂(ξ)| of a sampled datum.
#[derive(Args, Serialize, Debug)]
#[command(allow_negative_numbers = true)]
pub struct XnormArgs {
    /// Exponent γ, meaningful in (0, 1/4)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Datum: gaussian:AMP,WIDTH or bump:AMP,WIDTH
    #[arg(long)]
    pub datum: Option<String>,
    /// Half-width of the sampling interval
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub l: Option<f64>,
    /// Number of samples
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct XnormParams {
    pub gamma: f64,
    pub datum: Shape,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
}

impl Default for XnormParams {
    fn default() -> Self {
        Self {
            gamma: 0.2,
            datum: Shape::Gaussian {
                amp: 1.0,
                width: 1.0,
            },
            l: 32.0,
            n: 1024,
        }
    }
}

pub fn xnorm(p: &XnormParams, out: &mut Output, _: &Globals) -> Result<()> {
    if !(p.gamma > 0.0 && p.gamma < 1.0) || !(p.l > 0.0) || !(16..=1 << 22).contains(&p.n) {
        bail!("need 0 < gamma < 1, L > 0 and 16 <= n <= 2^22");
    }
    let dx = 2.0 * p.l / p.n as f64;
    let f: Vec<_> = (0..p.n)
        .map(|j| p.datum.eval_complex(-p.l + j as f64 * dx))
        .collect();
    let norm = xgamma_norm(&f, -p.l, dx, p.gamma)?;
    out.json("xnorm", &norm)
}
