//! Binormal flow `χ_t = χ_x ∧ χ_xx` advanced through its tangent form
//! `T_t = T ∧ T_ss` with per-step projection onto the sphere.
//!
//! The curve itself is rebuilt from the tangents by trapezoidal integration
//! in `s`; its mean position is carried as an extra unknown with velocity
//! `mean(T ∧ T_s)`, the average of `χ_t`.
//!
//! Closed curves default to a Fourier collocation Laplacian; open truncated
//! curves use `D₊D₋` with boundary tangents supplied at ghost nodes.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{align_rigid_points, hausdorff_points, SampledCurve, Topology, Vec3};

/// Discrete Laplacian used for `T_ss`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Laplacian {
    /// Fourier collocation: `T_ss` by FFT, cross product at the nodes
    /// (closed curves only).
    Spectral,
    /// Second difference `D₊D₋`.
    SecondDifference,
}

impl Laplacian {
    pub fn name(self) -> &'static str {
        match self {
            Laplacian::Spectral => "rk4-projected/spectral-collocation",
            Laplacian::SecondDifference => "rk4-projected/second-difference",
        }
    }
}

/// Exact tangent `T(t, s)` outside an open curve, used at the ghost nodes.
pub type BoundaryData = Arc<dyn Fn(f64, f64) -> Vec3 + Send + Sync>;

/// Curve at one instant; the tangent field is stored in `curve.tangents`.
#[derive(Debug, Clone)]
pub struct CurveState {
    pub t: f64,
    pub curve: SampledCurve,
    /// Largest `||T| − 1|` seen before projection since the previous output.
    pub projection_drift: f64,
}

impl CurveState {
    /// Build a state, checking that tangents exist and that the grid is uniform.
    pub fn new(t: f64, curve: SampledCurve) -> Result<Self> {
        if curve.tangents.is_none() {
            return Err(Error::Invalid("curve state needs a tangent field".into()));
        }
        if curve.len() < 8 {
            return Err(Error::Invalid("curve state needs at least 8 nodes".into()));
        }
        grid_step(&curve)?;
        Ok(Self {
            t,
            curve,
            projection_drift: 0.0,
        })
    }

    pub fn tangents(&self) -> &[Vec3] {
        self.curve
            .tangents
            .as_deref()
            .expect("checked at construction")
    }

    /// Arclength step.
    pub fn h(&self) -> f64 {
        grid_step(&self.curve).expect("checked at construction")
    }
}

fn grid_step(curve: &SampledCurve) -> Result<f64> {
    let s = &curve.s;
    let n = s.len();
    let h = (s[n - 1] - s[0]) / (n - 1) as f64;
    if s.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return Err(Error::Invalid("curve grid is not uniform".into()));
    }
    Ok(h)
}

/// Talbot time `t_{p,q} = (2π/M²) p/q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TalbotTime {
    pub m: usize,
    pub p: u64,
    pub q: u64,
    pub value: f64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl TalbotTime {
    pub fn new(m: usize, p: u64, q: u64) -> Result<Self> {
        if m < 3 || p == 0 || q == 0 || gcd(p, q) != 1 {
            return Err(Error::Invalid(format!(
                "need M >= 3 and coprime p, q > 0 (got M={m}, p={p}, q={q})"
            )));
        }
        Ok(Self {
            m,
            p,
            q,
            value: 2.0 * PI / (m * m) as f64 * p as f64 / q as f64,
        })
    }
}

/// Planar regular `M`-gon of perimeter `2π` in the `xy`-plane, sampled at
/// cell centres `s_i = (i + ½)h`; corners sit at `s = 2πj/M`.
pub fn init_polygon(m: usize, n: usize) -> Result<CurveState> {
    if m < 3 {
        return Err(Error::Invalid(format!("polygon needs M >= 3, got {m}")));
    }
    if n == 0 || !n.is_multiple_of(m) || !n.is_multiple_of(2) {
        return Err(Error::Invalid(format!(
            "n = {n} must be an even multiple of M = {m}"
        )));
    }
    let h = 2.0 * PI / n as f64;
    let side = 2.0 * PI / m as f64;
    let dir = |j: usize| {
        let ang = 2.0 * PI * j as f64 / m as f64;
        Vec3::new(ang.cos(), ang.sin(), 0.0)
    };
    let mut vertices = vec![Vec3::zeros()];
    for j in 0..m - 1 {
        let v = vertices[j] + dir(j) * side;
        vertices.push(v);
    }
    let per_side = n / m;
    let mut s = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut tangents = Vec::with_capacity(n);
    for i in 0..n {
        let si = (i as f64 + 0.5) * h;
        let j = i / per_side;
        s.push(si);
        points.push(vertices[j] + dir(j) * (si - j as f64 * side));
        tangents.push(dir(j));
    }
    let c = points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / n as f64;
    for p in &mut points {
        *p -= c;
    }
    CurveState::new(
        0.0,
        SampledCurve::new(Topology::Closed, s, points, Some(tangents))?,
    )
}

/// Unit circle (length `2π`) in the `xy`-plane, sampled at cell centres.
pub fn init_circle(n: usize) -> Result<CurveState> {
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::Invalid(format!(
            "circle needs an even n >= 8, got {n}"
        )));
    }
    let h = 2.0 * PI / n as f64;
    let s: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let points = s
        .iter()
        .map(|&u| Vec3::new(u.cos(), u.sin(), 0.0))
        .collect();
    let tangents = s
        .iter()
        .map(|&u| Vec3::new(-u.sin(), u.cos(), 0.0))
        .collect();
    CurveState::new(
        0.0,
        SampledCurve::new(Topology::Closed, s, points, Some(tangents))?,
    )
}

/// Integrator settings for [`evolve_with`].
#[derive(Clone)]
pub struct EvolveOptions {
    pub dt: f64,
    pub laplacian: Laplacian,
    /// Required for open curves.
    pub boundary: Option<BoundaryData>,
    /// Largest allowed `||T| − 1|` before projection in one step.
    pub cfl_tolerance: f64,
}

impl EvolveOptions {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            laplacian: Laplacian::Spectral,
            boundary: None,
            cfl_tolerance: 1e-3,
        }
    }
}

impl std::fmt::Debug for EvolveOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EvolveOptions")
            .field("dt", &self.dt)
            .field("laplacian", &self.laplacian)
            .field("boundary", &self.boundary.is_some())
            .field("cfl_tolerance", &self.cfl_tolerance)
            .finish()
    }
}

struct SpectralOps {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl SpectralOps {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let k = (0..n)
            .map(|j| {
                if j < n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                }
            })
            .collect();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            k,
        }
    }

    /// `T ∧ T_ss` at the nodes and the mean of `T ∧ T_s`, for a curve of
    /// length `2π/scale`.
    fn rhs(&self, t: &[Vec3], scale: f64) -> (Vec<Vec3>, Vec3) {
        let n = self.n;
        let mut hat: [Vec<Complex64>; 3] = Default::default();
        for (c, h) in hat.iter_mut().enumerate() {
            let mut buf: Vec<Complex64> = t.iter().map(|v| Complex64::new(v[c], 0.0)).collect();
            self.fwd.process(&mut buf);
            *h = buf;
        }
        // Mean of T ∧ T_s by the discrete Parseval identity.
        let mut mean = Vec3::zeros();
        for j in 0..n {
            let ik = Complex64::new(0.0, self.k[j] * scale);
            let a = [hat[0][j].conj(), hat[1][j].conj(), hat[2][j].conj()];
            let b = [hat[0][j] * ik, hat[1][j] * ik, hat[2][j] * ik];
            mean.x += (a[1] * b[2] - a[2] * b[1]).re;
            mean.y += (a[2] * b[0] - a[0] * b[2]).re;
            mean.z += (a[0] * b[1] - a[1] * b[0]).re;
        }
        mean /= (n * n) as f64;
        let mut lap = vec![Vec3::zeros(); n];
        for (c, h) in hat.iter_mut().enumerate() {
            for (z, k) in h.iter_mut().zip(&self.k) {
                *z *= -(k * scale) * (k * scale) / n as f64;
            }
            self.inv.process(h);
            for i in 0..n {
                lap[i][c] = h[i].re;
            }
        }
        let out = t.iter().zip(&lap).map(|(a, l)| a.cross(l)).collect();
        (out, mean)
    }
}

enum Operator {
    Spectral(SpectralOps, f64),
    ClosedDifference(f64),
    OpenDifference(f64, BoundaryData, f64, f64),
}

impl Operator {
    fn rhs(&self, t: &[Vec3], time: f64) -> (Vec<Vec3>, Vec3) {
        match self {
            Operator::Spectral(ops, scale) => ops.rhs(t, *scale),
            Operator::ClosedDifference(h) => {
                let n = t.len();
                difference_rhs(t, *h, t[n - 1], t[0])
            }
            Operator::OpenDifference(h, bc, s_lo, s_hi) => {
                difference_rhs(t, *h, bc(time, s_lo - h), bc(time, s_hi + h))
            }
        }
    }
}

fn difference_rhs(t: &[Vec3], h: f64, left: Vec3, right: Vec3) -> (Vec<Vec3>, Vec3) {
    let n = t.len();
    let at = |i: isize| -> Vec3 {
        if i < 0 {
            left
        } else if i as usize >= n {
            right
        } else {
            t[i as usize]
        }
    };
    let mut out = Vec::with_capacity(n);
    let mut mean = Vec3::zeros();
    for i in 0..n as isize {
        let (l, c, r) = (at(i - 1), at(i), at(i + 1));
        out.push(c.cross(&((l + r - 2.0 * c) / (h * h))));
        mean += c.cross(&((r - l) / (2.0 * h)));
    }
    (out, mean / n as f64)
}

/// Rebuild points from tangents by trapezoidal integration, placing the
/// mean of the nodes at `center`.
fn rebuild_points(t: &[Vec3], h: f64, center: Vec3) -> Vec<Vec3> {
    let mut pts = Vec::with_capacity(t.len());
    let mut p = Vec3::zeros();
    pts.push(p);
    for w in t.windows(2) {
        p += (w[0] + w[1]) * (0.5 * h);
        pts.push(p);
    }
    let mean = pts.iter().fold(Vec3::zeros(), |acc, q| acc + q) / t.len() as f64;
    for q in &mut pts {
        *q += center - mean;
    }
    pts
}

/// Evolve with the default scheme for the curve's topology: spectral for
/// closed curves. Open curves need boundary data, see [`evolve_with`].
pub fn evolve(
    state: &CurveState,
    t_end: f64,
    dt: f64,
    snapshots: &[f64],
) -> Result<Vec<CurveState>> {
    evolve_with(state, t_end, &EvolveOptions::new(dt), snapshots)
}

/// Evolve `state` to `t_end` (forward or backward), returning a state at
/// every snapshot time followed by the final state when `t_end` is not
/// itself a snapshot. Each interval between outputs is split into equal
/// steps no longer than `|dt|`.
pub fn evolve_with(
    state: &CurveState,
    t_end: f64,
    opts: &EvolveOptions,
    snapshots: &[f64],
) -> Result<Vec<CurveState>> {
    let t0 = state.t;
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    if !(opts.dt.abs() > 0.0) || !t_end.is_finite() {
        return Err(Error::Invalid(
            "dt must be non-zero and t_end finite".into(),
        ));
    }
    let mut marks: Vec<f64> = snapshots.to_vec();
    for &s in &marks {
        if (s - t0) * dir < -1e-14 || (s - t_end) * dir > 1e-14 {
            return Err(Error::Invalid(format!(
                "snapshot {s} outside [{t0}, {t_end}]"
            )));
        }
    }
    if marks.windows(2).any(|w| (w[1] - w[0]) * dir < 0.0) {
        return Err(Error::Invalid(
            "snapshots must be ordered in the direction of time".into(),
        ));
    }
    let emit_final = marks.last().is_none_or(|&l| (l - t_end).abs() > 1e-14);
    if emit_final {
        marks.push(t_end);
    }
    let h = state.h();
    let n = state.curve.len();
    let op = match (state.curve.topology, opts.laplacian) {
        (Topology::Closed, Laplacian::Spectral) => {
            if !n.is_multiple_of(2) {
                return Err(Error::Invalid(
                    "spectral Laplacian needs an even node count".into(),
                ));
            }
            Operator::Spectral(SpectralOps::new(n), 2.0 * PI / (n as f64 * h))
        }
        (Topology::Closed, Laplacian::SecondDifference) => Operator::ClosedDifference(h),
        (Topology::OpenTruncated, Laplacian::SecondDifference) => {
            let bc = opts
                .boundary
                .clone()
                .ok_or_else(|| Error::Invalid("open curves need boundary data".into()))?;
            Operator::OpenDifference(h, bc, state.curve.s[0], state.curve.s[n - 1])
        }
        (Topology::OpenTruncated, Laplacian::Spectral) => {
            return Err(Error::Invalid(
                "the spectral Laplacian needs a closed curve".into(),
            ));
        }
    };
    let mut tang = state.tangents().to_vec();
    let mut center = state.curve.centroid();
    let mut time = t0;
    let mut out = Vec::with_capacity(marks.len());
    for &mark in &marks {
        let span = mark - time;
        let steps = (span.abs() / opts.dt.abs() * (1.0 - 1e-12)).ceil() as usize;
        let d = if steps > 0 { span / steps as f64 } else { 0.0 };
        let mut drift = 0.0_f64;
        for k in 0..steps {
            let tk = time + k as f64 * d;
            drift = drift.max(rk4_step(
                &op,
                &mut tang,
                &mut center,
                tk,
                d,
                opts.cfl_tolerance,
            )?);
        }
        time = mark;
        let points = rebuild_points(&tang, h, center);
        let curve = SampledCurve::new(
            state.curve.topology,
            state.curve.s.clone(),
            points,
            Some(tang.clone()),
        )?;
        out.push(CurveState {
            t: mark,
            curve,
            projection_drift: drift,
        });
    }
    Ok(out)
}

fn rk4_step(
    op: &Operator,
    t: &mut [Vec3],
    c: &mut Vec3,
    time: f64,
    d: f64,
    cfl: f64,
) -> Result<f64> {
    let n = t.len();
    let stage = |base: &[Vec3], k: &[Vec3], f: f64| -> Vec<Vec3> {
        base.iter().zip(k).map(|(b, k)| b + k * f).collect()
    };
    let (k1, v1) = op.rhs(t, time);
    let (k2, v2) = op.rhs(&stage(t, &k1, d / 2.0), time + d / 2.0);
    let (k3, v3) = op.rhs(&stage(t, &k2, d / 2.0), time + d / 2.0);
    let (k4, v4) = op.rhs(&stage(t, &k3, d), time + d);
    let mut drift = 0.0_f64;
    for i in 0..n {
        let v = t[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (d / 6.0);
        let norm = v.norm();
        drift = drift.max((norm - 1.0).abs());
        t[i] = v / norm;
    }
    *c += (v1 + 2.0 * v2 + 2.0 * v3 + v4) * (d / 6.0);
    if !(drift <= cfl) {
        return Err(Error::Tolerance(format!(
            "tangent norm drift {drift:.3e} before projection exceeds {cfl:.1e}; reduce dt (CFL)"
        )));
    }
    Ok(drift)
}

/// Corner clusters of a discrete curve.
#[derive(Debug, Clone, Serialize)]
pub struct CornerCount {
    pub count: usize,
    /// Two clusters are separated by at most two sub-threshold nodes.
    pub ambiguous: bool,
    pub median_curvature: f64,
    pub threshold: f64,
}

/// Discrete curvature `|T_{i+1} − T_i|/h` (periodic for closed curves).
pub fn discrete_curvature(state: &CurveState) -> Vec<f64> {
    let t = state.tangents();
    let h = state.h();
    let n = t.len();
    let m = match state.curve.topology {
        Topology::Closed => n,
        Topology::OpenTruncated => n - 1,
    };
    (0..m).map(|i| (t[(i + 1) % n] - t[i]).norm() / h).collect()
}

/// Count clusters of nodes whose discrete curvature exceeds
/// `threshold_factor` times the median; adjacent nodes merge into one corner.
pub fn corner_count(state: &CurveState, threshold_factor: f64) -> CornerCount {
    let kappa = discrete_curvature(state);
    let mut sorted = kappa.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let threshold = threshold_factor * median.max(1e-9);
    let above: Vec<bool> = kappa.iter().map(|&k| k > threshold).collect();
    let n = above.len();
    let closed = state.curve.topology == Topology::Closed;
    // Cluster starts and ends, walking from a sub-threshold node when closed.
    let start = if closed {
        above.iter().position(|&a| !a)
    } else {
        Some(0)
    };
    let Some(start) = start else {
        return CornerCount {
            count: 1,
            ambiguous: false,
            median_curvature: median,
            threshold,
        };
    };
    let mut clusters: Vec<(usize, usize)> = Vec::new();
    let mut open: Option<usize> = None;
    let span = n;
    for j in 0..span {
        let i = if closed { (start + j) % n } else { j };
        match (above[i], open) {
            (true, None) => open = Some(j),
            (false, Some(b)) => {
                clusters.push((b, j - 1));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(b) = open {
        clusters.push((b, span - 1));
    }
    let mut ambiguous = clusters.windows(2).any(|w| w[1].0 - w[0].1 - 1 <= 2);
    if closed && clusters.len() > 1 {
        let first = clusters[0];
        let last = clusters[clusters.len() - 1];
        ambiguous |= (first.0 + n) - last.1 - 1 <= 2;
    }
    CornerCount {
        count: clusters.len(),
        ambiguous,
        median_curvature: median,
        threshold,
    }
}

/// Outcome of comparing an evolved polygon to the initial one.
#[derive(Debug, Clone, Serialize)]
pub struct AxisSwitch {
    /// In-plane rotation angle of the best alignment, in `[0, 2π)`.
    pub angle: f64,
    /// The angle reduced modulo the polygon symmetry `2π/M`, in `[0, 2π/M)`.
    pub angle_mod_symmetry: f64,
    /// Hausdorff distance after alignment.
    pub residual: f64,
    /// RMS node distance after alignment.
    pub rms: f64,
    /// Cyclic index shift of the best match.
    pub shift: usize,
    pub diameter: f64,
}

/// Rigidly align `state` onto `initial` over all cyclic relabellings and
/// report the in-plane rotation (about the normal of the initial plane) and
/// the residual.
pub fn axis_switch_check(state: &CurveState, initial: &CurveState, m: usize) -> Result<AxisSwitch> {
    if state.curve.topology != Topology::Closed || initial.curve.topology != Topology::Closed {
        return Err(Error::Invalid("axis switch needs closed curves".into()));
    }
    let n = initial.curve.len();
    if state.curve.len() != n || m < 3 {
        return Err(Error::Invalid(
            "curves must share the node count and M >= 3".into(),
        ));
    }
    let a = &initial.curve.points;
    let b = &state.curve.points;
    let mut best: Option<(f64, usize, crate::geometry::RigidAlignment)> = None;
    let mut shifted = vec![Vec3::zeros(); n];
    for shift in 0..n {
        for i in 0..n {
            shifted[i] = b[(i + shift) % n];
        }
        let al = align_rigid_points(a, &shifted)?;
        if best.as_ref().is_none_or(|(r, _, _)| al.residual < *r) {
            best = Some((al.residual, shift, al));
        }
    }
    let (rms, shift, al) = best.expect("n > 0");
    let aligned: Vec<Vec3> = b.iter().map(|p| al.rotation * p + al.translation).collect();
    let residual = hausdorff_points(a, &aligned);
    let r = al.rotation;
    let angle = r[(1, 0)].atan2(r[(0, 0)]).rem_euclid(2.0 * PI);
    let sym = 2.0 * PI / m as f64;
    let mut reduced = angle.rem_euclid(sym);
    if sym - reduced < 1e-12 {
        reduced = 0.0;
    }
    Ok(AxisSwitch {
        angle,
        angle_mod_symmetry: reduced,
        residual,
        rms,
        shift,
        diameter: initial.curve.diameter(),
    })
}

/// Distance of an angle from a target modulo `period`.
pub fn angle_distance_mod(angle: f64, target: f64, period: f64) -> f64 {
    let d = (angle - target).rem_euclid(period);
    d.min(period - d)
}

/// Linear momentum `∫ χ ∧ χ_s ds` of one snapshot.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentumRow {
    pub t: f64,
    pub momentum: [f64; 3],
}

impl MomentumRow {
    pub fn vector(&self) -> Vec3 {
        Vec3::from(self.momentum)
    }
}

/// `∫χ ∧ T ds` by the trapezoidal rule: periodic for closed curves, with
/// half-weighted endpoints for open ones.
pub fn momentum(state: &CurveState) -> Vec3 {
    let h = state.h();
    let t = state.tangents();
    let p = &state.curve.points;
    let n = p.len();
    let mut acc = Vec3::zeros();
    for i in 0..n {
        let w = match state.curve.topology {
            Topology::OpenTruncated if i == 0 || i == n - 1 => 0.5,
            _ => 1.0,
        };
        acc += p[i].cross(&t[i]) * w;
    }
    acc * h
}

/// Momentum of every snapshot; all snapshots must share one topology.
pub fn momentum_series(snapshots: &[CurveState]) -> Result<Vec<MomentumRow>> {
    if let Some(first) = snapshots.first() {
        if snapshots
            .iter()
            .any(|s| s.curve.topology != first.curve.topology)
        {
            return Err(Error::Invalid(
                "snapshots mix closed and open curves".into(),
            ));
        }
    }
    Ok(snapshots
        .iter()
        .map(|s| {
            let m = momentum(s);
            MomentumRow {
                t: s.t,
                momentum: [m.x, m.y, m.z],
            }
        })
        .collect())
}

/// Largest `|P(t) − P(t₀)|` over a series.
pub fn momentum_drift(rows: &[MomentumRow]) -> f64 {
    let Some(first) = rows.first() else {
        return 0.0;
    };
    rows.iter()
        .map(|r| (r.vector() - first.vector()).norm())
        .fold(0.0, f64::max)
}

/// Run manifest of an evolution.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub struct EvolutionManifest {
    #[serde(rename = "M")]
    pub m: usize,
    pub n: usize,
    pub dt: f64,
    pub t_snapshots: Vec<f64>,
    pub scheme: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn talbot_time_value_and_validation() {
        let t = TalbotTime::new(3, 1, 3).unwrap();
        assert!((t.value - 2.0 * PI / 27.0).abs() < 1e-15);
        assert!(TalbotTime::new(3, 2, 4).is_err());
        assert!(TalbotTime::new(2, 1, 1).is_err());
    }

    #[test]
    fn spectral_rhs_vanishes_on_a_circle_and_moves_it_upward() {
        let c = init_circle(64).unwrap();
        let ops = SpectralOps::new(64);
        let (r, v) = ops.rhs(c.tangents(), 1.0);
        assert!(r.iter().all(|x| x.norm() < 1e-12));
        assert!((v - Vec3::z()).norm() < 1e-12);
    }

    #[test]
    fn difference_rhs_of_a_straight_line_is_zero() {
        let t = vec![Vec3::x(); 10];
        let (r, v) = difference_rhs(&t, 0.1, Vec3::x(), Vec3::x());
        assert!(r.iter().all(|x| x.norm() == 0.0) && v.norm() == 0.0);
    }
}
