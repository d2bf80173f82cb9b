//! `bflow` and `talbot`.

use std::f64::consts::PI;

use anyhow::{bail, Result};
use clap::Args;
use filament_core::binormal::{
    axis_switch_check, corner_count, evolve_with, init_circle, init_polygon, momentum_drift,
    momentum_series, CornerCount, CurveState, EvolutionManifest, EvolveOptions, TalbotTime,
};
use filament_core::io::Table;
use serde::{Deserialize, Serialize};

use crate::config::{Globals, Ratio, Time};
use crate::output::Output;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    Polygon,
    Circle,
}

fn initial_state(init: Initial, m: usize, n: usize) -> Result<CurveState> {
    if !(8..=1 << 16).contains(&n) {
        bail!("n must lie in [8, 65536], got {n}");
    }
    Ok(match init {
        Initial::Polygon => init_polygon(m, n)?,
        Initial::Circle => init_circle(n)?,
    })
}

/// `dt` defaults to a fraction of h² for the explicit stepper.
fn step(dt: Option<f64>, factor: f64, h: f64) -> Result<f64> {
    let dt = dt.unwrap_or(factor * h * h);
    if !(dt > 0.0 && dt <= 0.5 * h * h) {
        bail!("dt must lie in (0, h²/2] = (0, {}]", 0.5 * h * h);
    }
    Ok(dt)
}

/// Evolve a closed polygon (or circle) under the binormal flow.
#[derive(Args, Serialize, Debug)]
#[command(allow_negative_numbers = true)]
pub struct BflowArgs {
    /// Number of polygon sides
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: Option<usize>,
    /// Number of nodes (an even multiple of M)
    #[arg(long)]
    pub n: Option<usize>,
    /// Final time, e.g. 0.1, 1/27 or 2pi/27
    #[arg(long)]
    pub t: Option<String>,
    /// Time step (default 0.2 h²)
    #[arg(long)]
    pub dt: Option<f64>,
    /// Corner threshold as a multiple of the median discrete curvature
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Initial curve: polygon or circle
    #[arg(long)]
    pub init: Option<String>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct BflowParams {
    #[serde(rename = "M")]
    pub m: usize,
    pub n: usize,
    pub t: Time,
    pub dt: Option<f64>,
    pub threshold: f64,
    pub init: Initial,
}

impl Default for BflowParams {
    fn default() -> Self {
        Self {
            m: 3,
            n: 768,
            t: Time::text("2pi/27"),
            dt: None,
            threshold: 5.0,
            init: Initial::Polygon,
        }
    }
}

#[derive(Serialize)]
struct BflowReport {
    t: f64,
    corners: CornerCount,
    momentum_initial: [f64; 3],
    momentum_final: [f64; 3],
    momentum_drift: f64,
    tangent_norm_defect: f64,
    projection_drift: f64,
    evolution: EvolutionManifest,
}

pub fn bflow(p: &BflowParams, out: &mut Output, _: &Globals) -> Result<()> {
    if !(p.threshold > 1.0) {
        bail!("threshold must exceed 1");
    }
    let t = p.t.value;
    if !(t > 0.0 && t <= 2.0 * PI) {
        bail!("t must lie in (0, 2π], got {t}");
    }
    let s0 = initial_state(p.init, p.m, p.n)?;
    let dt = step(p.dt, 0.2, s0.h())?;
    let snaps = evolve_with(&s0, t, &EvolveOptions::new(dt), &[])?;
    let last = snaps.last().expect("final state");
    let series = momentum_series(&[s0.clone(), last.clone()])?;
    out.table("snapshot", &Table::curve(&last.curve))?;
    out.json(
        "bflow_summary",
        &BflowReport {
            t,
            corners: corner_count(last, p.threshold),
            momentum_initial: series[0].momentum,
            momentum_final: series[1].momentum,
            momentum_drift: momentum_drift(&series),
            tangent_norm_defect: last.curve.tangent_norm_defect(),
            projection_drift: last.projection_drift,
            evolution: EvolutionManifest {
                m: p.m,
                n: p.n,
                dt,
                t_snapshots: vec![t],
                scheme: EvolveOptions::new(dt).laplacian.name().into(),
            },
        },
    )
}

/// Evolve the regular M-gon to rational Talbot times t = (2π/M²)·p/q.
#[derive(Args, Serialize, Debug)]
#[command(allow_negative_numbers = true)]
pub struct TalbotArgs {
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated fractions p/q of the period 2π/M²
    #[arg(long, value_delimiter = ',')]
    pub pq: Option<Vec<String>>,
    /// Time step (default 0.01 h²)
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug)]
#[serde(deny_unknown_fields, default)]
pub struct TalbotParams {
    #[serde(rename = "M")]
    pub m: usize,
    pub n: usize,
    pub pq: Vec<Ratio>,
    pub dt: Option<f64>,
    pub threshold: f64,
}

impl Default for TalbotParams {
    fn default() -> Self {
        Self {
            m: 3,
            n: 768,
            pq: vec![Ratio { p: 1, q: 3 }, Ratio { p: 1, q: 2 }],
            dt: None,
            threshold: 5.0,
        }
    }
}

#[derive(Serialize)]
struct TalbotReport {
    times: Vec<TalbotTime>,
    momentum_drift: f64,
    evolution: EvolutionManifest,
}

pub fn talbot(p: &TalbotParams, out: &mut Output, _: &Globals) -> Result<()> {
    if p.pq.is_empty() || !(p.threshold > 1.0) {
        bail!("need at least one p/q and a threshold above 1");
    }
    let mut times =
        p.pq.iter()
            .map(|r| Ok(TalbotTime::new(p.m, r.p, r.q)?))
            .collect::<Result<Vec<_>>>()?;
    times.sort_by(|a, b| a.value.total_cmp(&b.value));
    times.dedup_by(|a, b| a.value == b.value);
    if times
        .last()
        .is_some_and(|t| t.value > 2.0 * PI / (p.m * p.m) as f64 * 4.0)
    {
        bail!("times beyond four periods are not supported");
    }
    let s0 = initial_state(Initial::Polygon, p.m, p.n)?;
    let dt = step(p.dt, 0.01, s0.h())?;
    let marks: Vec<f64> = times.iter().map(|t| t.value).collect();
    let t_end = *marks.last().expect("non-empty");
    let snaps = evolve_with(&s0, t_end, &EvolveOptions::new(dt), &marks)?;
    let mut table = Table::new(&[
        "p",
        "q",
        "t",
        "corners",
        "ambiguous",
        "axis_angle",
        "angle_mod_symmetry",
        "residual_over_diameter",
        "momentum_drift",
    ]);
    let mut all = vec![s0.clone()];
    for (tt, snap) in times.iter().zip(&snaps) {
        out.table(
            &format!("snapshot_{}_{}", tt.p, tt.q),
            &Table::curve(&snap.curve),
        )?;
        let c = corner_count(snap, p.threshold);
        let ax = axis_switch_check(snap, &s0, p.m)?;
        let drift = momentum_drift(&momentum_series(&[s0.clone(), snap.clone()])?);
        table.push(vec![
            tt.p as f64,
            tt.q as f64,
            tt.value,
            c.count as f64,
            f64::from(u8::from(c.ambiguous)),
            ax.angle,
            ax.angle_mod_symmetry,
            ax.residual / ax.diameter,
            drift,
        ]);
        all.push(snap.clone());
    }
    out.table("talbot", &table)?;
    out.json(
        "talbot_summary",
        &TalbotReport {
            momentum_drift: momentum_drift(&momentum_series(&all)?),
            times,
            evolution: EvolutionManifest {
                m: p.m,
                n: p.n,
                dt,
                t_snapshots: marks,
                scheme: EvolveOptions::new(dt).laplacian.name().into(),
            },
        },
    )
}
