//! Hasimoto frames along the filament.
//!
//! A frame is `(T, N)` with `T` the unit tangent and `N = e₂ + i e₃` a complex
//! normal. Along `x` it obeys the skew system
//!
//! ```text
//! T_x = Re(ψ̄ N),    N_x = −ψ T,
//! ```
//!
//! i.e. `F_x = F Ω(ψ)` for the matrix `F = [T | Re N | Im N]` and
//! `Ω = [[0, −α, −β], [α, 0, 0], [β, 0, 0]]`, `ψ = α + iβ`. Steps are taken
//! with exact exponentials of skew generators, so frames stay on the rotation
//! group up to rounding.
//!
//! The module also builds the self-similar frames of a profile, the modulated
//! normal `Ñ = N e^{iΦ}` with `Φ = a² log(|x|/√t)` and its limits at `±∞`, the
//! Schrödinger-map residual `T_t − T∧T_xx`, and the `t = 0` trace system with
//! its reflected continuation.

use std::sync::Arc;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{cnorm, nearest_rotation, re_im, CVec3, OrthoFrame, Vec3};
use crate::profile::{FrameSource, ProfileEvaluator};
use crate::quadrature::GaussRule;

/// Frames sampled along `x` at a fixed time.
#[derive(Debug, Clone)]
pub struct FrameField {
    pub t: f64,
    pub x_grid: Vec<f64>,
    pub frames: Vec<OrthoFrame>,
    /// Curvature-torsion field used (or implied) for the transport.
    pub psi: Vec<Complex64>,
    /// Largest orthonormality error observed before the final projection.
    pub drift_before_projection: f64,
}

impl FrameField {
    pub fn len(&self) -> usize {
        self.x_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_grid.is_empty()
    }

    pub fn tangents(&self) -> Vec<Vec3> {
        self.frames.iter().map(|f| f.t).collect()
    }

    /// `max_k |F_kᵀF_k − I|`.
    pub fn max_orthonormality_error(&self) -> f64 {
        self.frames
            .iter()
            .map(OrthoFrame::orthonormality_error)
            .fold(0.0, f64::max)
    }

    /// `max_k |T₁² + |N₁|² − 1|`, the conserved first row of the frame.
    pub fn first_row_defect(&self) -> f64 {
        self.frames
            .iter()
            .map(|f| (f.t.x * f.t.x + f.n.x.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Skew generator `Ω(ψ)` of the frame system.
pub fn skew_generator(psi: Complex64) -> Matrix3<f64> {
    let (al, be) = (psi.re, psi.im);
    Matrix3::new(0.0, -al, -be, al, 0.0, 0.0, be, 0.0, 0.0)
}

/// `exp(K)` for a skew-symmetric `K` (Rodrigues).
pub fn exp_skew(k: &Matrix3<f64>) -> Matrix3<f64> {
    let w = Vec3::new(k[(2, 1)], k[(0, 2)], k[(1, 0)]);
    let th = w.norm();
    if th < 1e-8 {
        // Taylor to fourth order; the remainder is below rounding.
        let k2 = k * k;
        return Matrix3::identity() + k * (1.0 - th * th / 6.0) + k2 * (0.5 - th * th / 24.0);
    }
    let k2 = k * k;
    Matrix3::identity() + k * (th.sin() / th) + k2 * ((1.0 - th.cos()) / (th * th))
}

/// Fourth-order Magnus step generator on `[x, x+h]` for `F_x = F Ω(ψ(x))`.
fn magnus4_generator<P: Fn(f64) -> Complex64>(psi: &P, x: f64, h: f64) -> Matrix3<f64> {
    let c = 3f64.sqrt() / 6.0;
    let o1 = skew_generator(psi(x + (0.5 - c) * h));
    let o2 = skew_generator(psi(x + (0.5 + c) * h));
    (o1 + o2) * (0.5 * h) + (o1 * o2 - o2 * o1) * (3f64.sqrt() * h * h / 12.0)
}

fn validate_grid(grid: &[f64], x0: f64) -> Result<usize> {
    if grid.len() < 2 {
        return Err(Error::Invalid(
            "transport grid needs at least two nodes".into(),
        ));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid(
            "transport grid must be strictly increasing".into(),
        ));
    }
    let scale = grid[grid.len() - 1] - grid[0];
    grid.iter()
        .position(|&x| (x - x0).abs() <= 1e-12 * scale.max(1.0))
        .ok_or_else(|| Error::Invalid(format!("x0 = {x0} is not a grid node")))
}

fn transport_with<G>(
    grid: &[f64],
    i0: usize,
    frame0: &OrthoFrame,
    mut step: G,
) -> (Vec<OrthoFrame>, f64)
where
    G: FnMut(usize, usize) -> Matrix3<f64>,
{
    let n = grid.len();
    let mut mats = vec![Matrix3::zeros(); n];
    mats[i0] = frame0.matrix();
    for i in i0..n - 1 {
        mats[i + 1] = mats[i] * step(i, i + 1);
    }
    for i in (1..=i0).rev() {
        mats[i - 1] = mats[i] * step(i, i - 1);
    }
    let drift = mats
        .iter()
        .map(|m| OrthoFrame::from_matrix(m).orthonormality_error())
        .fold(0.0, f64::max);
    let frames = mats
        .iter()
        .map(|m| OrthoFrame::from_matrix(&nearest_rotation(m)))
        .collect();
    (frames, drift)
}

/// Transport `frame0` from the node `x0` along a sampled `ψ`.
///
/// Each step exponentiates `h Ω(ψ_mid)` with `ψ_mid` the average of the two
/// end samples (second order in the grid spacing).
pub fn hasimoto_transport(
    psi: &[Complex64],
    grid: &[f64],
    t: f64,
    frame0: &OrthoFrame,
    x0: f64,
) -> Result<FrameField> {
    if psi.len() != grid.len() {
        return Err(Error::Invalid("psi and grid lengths differ".into()));
    }
    if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invalid("non-finite psi sample".into()));
    }
    let i0 = validate_grid(grid, x0)?;
    let (frames, drift) = transport_with(grid, i0, frame0, |i, j| {
        exp_skew(&(skew_generator((psi[i] + psi[j]) * 0.5) * (grid[j] - grid[i])))
    });
    Ok(FrameField {
        t,
        x_grid: grid.to_vec(),
        frames,
        psi: psi.to_vec(),
        drift_before_projection: drift,
    })
}

/// Transport along a `ψ` given as a function, with `substeps` fourth-order
/// Magnus steps per grid interval.
pub fn hasimoto_transport_fn<P>(
    psi: P,
    grid: &[f64],
    t: f64,
    frame0: &OrthoFrame,
    x0: f64,
    substeps: usize,
) -> Result<FrameField>
where
    P: Fn(f64) -> Complex64,
{
    let i0 = validate_grid(grid, x0)?;
    let samples: Vec<Complex64> = grid.iter().map(|&x| psi(x)).collect();
    if samples
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::Invalid("non-finite psi sample".into()));
    }
    let m = substeps.max(1);
    let (frames, drift) = transport_with(grid, i0, frame0, |i, j| {
        let h = (grid[j] - grid[i]) / m as f64;
        let mut acc = Matrix3::identity();
        for k in 0..m {
            acc *= exp_skew(&magnus4_generator(&psi, grid[i] + k as f64 * h, h));
        }
        acc
    });
    Ok(FrameField {
        t,
        x_grid: grid.to_vec(),
        frames,
        psi: samples,
        drift_before_projection: drift,
    })
}

/// `ψ_a(t, x) = (a/√t) e^{iκx²/(2t)}`, the curvature-torsion field of the
/// self-similar solution (`κ = 1/2` in the flow normalization).
pub fn psi_selfsimilar(a: f64, kappa: f64, t: f64, x: f64) -> Complex64 {
    Complex64::from_polar(a / t.sqrt(), kappa * x * x / (2.0 * t))
}

/// Frames of the self-similar solution at time `t > 0` read off the profile:
/// `T(t, x) = G′(x/√t)` and `N(t, x) = N(1, x/√t)`.
pub fn selfsimilar_frame_field(ev: &ProfileEvaluator, t: f64, grid: &[f64]) -> Result<FrameField> {
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("frame field needs t > 0, got {t}")));
    }
    let rt = t.sqrt();
    let mut frames = Vec::with_capacity(grid.len());
    for &x in grid {
        let (tt, n) = ev.frame(x / rt)?;
        frames.push(OrthoFrame { t: tt, n });
    }
    let drift = frames
        .iter()
        .map(OrthoFrame::orthonormality_error)
        .fold(0.0, f64::max);
    Ok(FrameField {
        t,
        x_grid: grid.to_vec(),
        frames,
        psi: grid
            .iter()
            .map(|&x| psi_selfsimilar(ev.a, ev.kappa, t, x))
            .collect(),
        drift_before_projection: drift,
    })
}

/// Frame field with the modulated normal and its limits at `±∞`.
#[derive(Debug, Clone)]
pub struct ModulatedFrameField {
    /// Input field with the origin node removed.
    pub base: FrameField,
    pub a: f64,
    pub n_tilde: Vec<CVec3>,
    pub n_inf_plus: CVec3,
    pub n_inf_minus: CVec3,
    pub t_inf_plus: Vec3,
    pub t_inf_minus: Vec3,
    /// `N^{+∞} − Ñ` for `x > 0` and `N^{−∞} − Ñ` for `x < 0`.
    pub g_n: Vec<CVec3>,
    /// `T^{±∞} − T` with the same side convention.
    pub g_t: Vec<Vec3>,
    /// Disagreement of the two extraction windows.
    pub spread: f64,
}

impl ModulatedFrameField {
    /// Fitted exponent `p` in `|g(x)| ~ x^p` on `x > 0` (see [`decay_exponent`]).
    pub fn decay_exponent_n(&self) -> Result<f64> {
        let g: Vec<f64> = self.g_n.iter().map(cnorm).collect();
        decay_exponent(&self.base.x_grid, &g)
    }

    pub fn decay_exponent_t(&self) -> Result<f64> {
        let g: Vec<f64> = self.g_t.iter().map(|v| v.norm()).collect();
        decay_exponent(&self.base.x_grid, &g)
    }
}

/// Least-squares slope of `log max_{[x_k, 2x_k]} |g|` against `log x_k` on
/// the dyadic blocks `x_k = 2^k` that fit inside the positive part of the grid.
///
/// Taking the block maximum follows the envelope of an oscillating remainder.
pub fn decay_exponent(x: &[f64], g: &[f64]) -> Result<f64> {
    let x_max = x.iter().cloned().fold(f64::MIN, f64::max);
    let mut pts = Vec::new();
    let mut lo = 2.0;
    while 2.0 * lo <= x_max * (1.0 + 1e-12) {
        let m = x
            .iter()
            .zip(g)
            .filter(|(&xi, _)| xi >= lo && xi <= 2.0 * lo)
            .map(|(_, &gi)| gi)
            .fold(0.0, f64::max);
        if m > 0.0 {
            pts.push(((lo * 2f64.sqrt()).ln(), m.ln()));
        }
        lo *= 2.0;
    }
    if pts.len() < 2 {
        return Err(Error::Invalid(
            "grid too short for a decay fit (need x up to 8)".into(),
        ));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Real or complex 3-vectors, for window averages shared by both.
trait Linear: Copy + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> {
    fn scale(self, c: f64) -> Self;
}

impl Linear for Vec3 {
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

impl Linear for CVec3 {
    fn scale(self, c: f64) -> Self {
        self.map(|z| z * c)
    }
}

/// `∫ x v(x) dx / ∫ x dx` over the nodes inside `[lo, hi]` (trapezoid).
fn node_window<T: Linear>(x: &[f64], v: &[T], lo: f64, hi: f64) -> Option<T> {
    let idx: Vec<usize> = (0..x.len()).filter(|&i| x[i] >= lo && x[i] <= hi).collect();
    if idx.len() < 3 {
        return None;
    }
    let mut num: Option<T> = None;
    let mut den = 0.0;
    for w in idx.windows(2) {
        let (i, j) = (w[0], w[1]);
        let h = x[j] - x[i];
        let term = (v[i].scale(x[i]) + v[j].scale(x[j])).scale(0.5 * h);
        num = Some(match num {
            None => term,
            Some(acc) => acc + term,
        });
        den += 0.5 * h * (x[i] + x[j]);
    }
    num.map(|n| n.scale(1.0 / den))
}

fn richardson_pair<T: Linear>(far: T, near: T) -> T {
    far.scale(4.0 / 3.0) - near.scale(1.0 / 3.0)
}

/// Modulate a frame field and extract its limits at `±∞`.
///
/// Limits are weighted (`|x|`) averages over the trailing windows
/// `[X/2, X]` and `[X/4, X/2]` of each side, combined by Richardson
/// extrapolation; `extraction_tol` bounds the window disagreement.
pub fn modulate(field: &FrameField, a: f64, extraction_tol: f64) -> Result<ModulatedFrameField> {
    let scale = field
        .x_grid
        .iter()
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(1.0);
    let keep: Vec<usize> = (0..field.len())
        .filter(|&i| field.x_grid[i].abs() > 1e-12 * scale)
        .collect();
    let base = FrameField {
        t: field.t,
        x_grid: keep.iter().map(|&i| field.x_grid[i]).collect(),
        frames: keep.iter().map(|&i| field.frames[i]).collect(),
        psi: keep.iter().map(|&i| field.psi[i]).collect(),
        drift_before_projection: field.drift_before_projection,
    };
    let rt = field.t.sqrt();
    let n_tilde: Vec<CVec3> = base
        .x_grid
        .iter()
        .zip(&base.frames)
        .map(|(&x, f)| {
            let ph = Complex64::from_polar(1.0, a * a * (x.abs() / rt).ln());
            f.n.map(|z| z * ph)
        })
        .collect();
    let tangents = base.tangents();

    let x_plus = base.x_grid.iter().cloned().fold(f64::MIN, f64::max);
    let x_minus = -base.x_grid.iter().cloned().fold(f64::MAX, f64::min);
    if !(x_plus > 0.0 && x_minus > 0.0) {
        return Err(Error::Invalid(
            "modulation needs both half-lines in the grid".into(),
        ));
    }
    let neg_x: Vec<f64> = base.x_grid.iter().map(|x| -x).collect();
    let extract = |xs: &[f64], big: f64| -> Result<(CVec3, Vec3, f64)> {
        let wn = |lo, hi| node_window(xs, &n_tilde, lo, hi);
        let wt = |lo, hi| node_window(xs, &tangents, lo, hi);
        let err = || Error::NonConvergence("extraction window holds fewer than three nodes".into());
        let (nf, nn) = (
            wn(big / 2.0, big).ok_or_else(err)?,
            wn(big / 4.0, big / 2.0).ok_or_else(err)?,
        );
        let (tf, tn) = (
            wt(big / 2.0, big).ok_or_else(err)?,
            wt(big / 4.0, big / 2.0).ok_or_else(err)?,
        );
        let spread = (cnorm(&(nf - nn)) / 3.0).max((tf - tn).norm() / 3.0);
        Ok((
            richardson_pair(nf, nn),
            richardson_pair(tf, tn).normalize(),
            spread,
        ))
    };
    let (n_plus, t_plus, sp) = extract(&base.x_grid, x_plus)?;
    let (n_minus, t_minus, sm) = extract(&neg_x, x_minus)?;
    let spread = sp.max(sm);
    if spread > extraction_tol {
        return Err(Error::NonConvergence(format!(
            "modulated limits: windows disagree by {spread:.3e}"
        )));
    }
    let g_n = base
        .x_grid
        .iter()
        .zip(&n_tilde)
        .map(|(&x, n)| if x > 0.0 { n_plus - n } else { n_minus - n })
        .collect();
    let g_t = base
        .x_grid
        .iter()
        .zip(&tangents)
        .map(|(&x, t)| if x > 0.0 { t_plus - t } else { t_minus - t })
        .collect();
    Ok(ModulatedFrameField {
        base,
        a,
        n_tilde,
        n_inf_plus: n_plus,
        n_inf_minus: n_minus,
        t_inf_plus: t_plus,
        t_inf_minus: t_minus,
        g_n,
        g_t,
        spread,
    })
}

/// Limits of the self-similar frame at time one:
/// `A± = lim G′(±s)` and `B± = lim Ñ(1, ±s)` as `s → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilarLimits {
    pub a: f64,
    pub a_plus: Vec3,
    pub a_minus: Vec3,
    pub b_plus: CVec3,
    pub b_minus: CVec3,
    /// Window disagreement of the extraction.
    pub spread: f64,
}

impl SelfSimilarLimits {
    /// Frames `(A±, B±)` projected to the nearest rotation.
    pub fn frame_plus(&self) -> OrthoFrame {
        orthonormalized(&self.a_plus, &self.b_plus)
    }

    pub fn frame_minus(&self) -> OrthoFrame {
        orthonormalized(&self.a_minus, &self.b_minus)
    }
}

fn orthonormalized(t: &Vec3, n: &CVec3) -> OrthoFrame {
    OrthoFrame { t: *t, n: *n }.renormalize()
}

/// Extract `A±` and `B±` by Gauss-Legendre quadrature of `s·G′(s)` and
/// `s·Ñ(s)` over the phase-aligned windows near `[S/4, S/2]` and `[S/2, S]`,
/// followed by Richardson extrapolation.
pub fn selfsimilar_limits<F: FrameSource>(ev: &F, half_width: f64) -> Result<SelfSimilarLimits> {
    if half_width > ev.reach() {
        return Err(Error::Domain(format!(
            "limit windows reach {half_width} beyond frame range {}",
            ev.reach()
        )));
    }
    let kappa = ev.kappa();
    let aligned = |target: f64| {
        let k = (kappa * target * target / (4.0 * std::f64::consts::PI)).floor();
        if k < 1.0 {
            target
        } else {
            (4.0 * std::f64::consts::PI * k / kappa).sqrt()
        }
    };
    let e = [
        aligned(half_width / 4.0),
        aligned(half_width / 2.0),
        aligned(half_width),
    ];
    let rule = GaussRule::new(8);
    let window = |sign: f64, lo: f64, hi: f64| -> Result<(Vec3, CVec3)> {
        // Panels of at most a quarter of the local oscillation period.
        let mut s = lo;
        let mut acc_t = Vec3::zeros();
        let mut acc_n = CVec3::zeros();
        while s < hi {
            let h = (std::f64::consts::PI / (2.0 * kappa * s.max(1.0)))
                .min(hi - s)
                .min(0.5);
            for (x, w) in rule.panel(s, s + h) {
                let (tt, n) = ev.frame(sign * x)?;
                let ph = Complex64::from_polar(1.0, ev.a() * ev.a() * x.ln());
                acc_t += tt * (w * x);
                acc_n += n.map(|z| z * ph * (w * x));
            }
            s += h;
        }
        let den = (hi * hi - lo * lo) / 2.0;
        Ok((acc_t / den, acc_n / Complex64::new(den, 0.0)))
    };
    let side = |sign: f64| -> Result<(Vec3, CVec3, f64)> {
        let (tf, nf) = window(sign, e[1], e[2])?;
        let (tn, nn) = window(sign, e[0], e[1])?;
        let spread = ((tf - tn).norm() / 3.0).max(cnorm(&(nf - nn)) / 3.0);
        Ok((
            richardson_pair(tf, tn).normalize(),
            richardson_pair(nf, nn),
            spread,
        ))
    };
    let (ap, bp, sp) = side(1.0)?;
    let (am, bm, sm) = side(-1.0)?;
    Ok(SelfSimilarLimits {
        a: ev.a(),
        a_plus: ap,
        a_minus: am,
        b_plus: bp,
        b_minus: bm,
        spread: sp.max(sm),
    })
}

/// Residual `sup |T_t − σ T∧T_xx|` of the self-similar tangent
/// `T(t, x) = G′(x/√t)` with centred differences in `t` and `x`.
///
/// `t_list` must be uniformly spaced with at least three entries and `grid`
/// uniform with at least three nodes; the supremum runs over interior times
/// and nodes. `σ = +1` is the Schrödinger map; `σ = −1` is a negative control.
pub fn schrodinger_map_residual_signed(
    ev: &ProfileEvaluator,
    t_list: &[f64],
    grid: &[f64],
    sigma: f64,
) -> Result<f64> {
    if t_list.len() < 3 || grid.len() < 3 {
        return Err(Error::Invalid(
            "stencil needs at least three times and three grid nodes".into(),
        ));
    }
    let dt = t_list[1] - t_list[0];
    let h = grid[1] - grid[0];
    if !(dt > 0.0) || !(h > 0.0) {
        return Err(Error::Invalid(
            "time list and grid must be increasing".into(),
        ));
    }
    let uniform = |v: &[f64], d: f64| v.windows(2).all(|w| ((w[1] - w[0]) - d).abs() <= 1e-9 * d);
    if !uniform(t_list, dt) || !uniform(grid, h) {
        return Err(Error::Invalid("time list and grid must be uniform".into()));
    }
    if t_list[0] <= 0.0 {
        return Err(Error::Invalid("times must be positive".into()));
    }
    let tangent = |t: f64, x: f64| -> Result<Vec3> { Ok(ev.eval(x / t.sqrt())?.1) };
    let mut sup = 0.0_f64;
    for k in 1..t_list.len() - 1 {
        let t = t_list[k];
        let cur: Vec<Vec3> = grid.iter().map(|&x| tangent(t, x)).collect::<Result<_>>()?;
        for j in 1..grid.len() - 1 {
            let x = grid[j];
            let t_t = (tangent(t_list[k + 1], x)? - tangent(t_list[k - 1], x)?) / (2.0 * dt);
            let t_xx = (cur[j + 1] - cur[j] * 2.0 + cur[j - 1]) / (h * h);
            let r = t_t - cur[j].cross(&t_xx) * sigma;
            sup = sup.max(r.norm());
        }
    }
    Ok(sup)
}

/// [`schrodinger_map_residual_signed`] with `σ = +1`.
pub fn schrodinger_map_residual(
    ev: &ProfileEvaluator,
    t_list: &[f64],
    grid: &[f64],
) -> Result<f64> {
    schrodinger_map_residual_signed(ev, t_list, grid, 1.0)
}

/// Shared complex function of a real variable.
pub type ComplexFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Trace profile `f̂₊` supplied as a function handle.
#[derive(Clone)]
pub struct FHat {
    f: ComplexFn,
    pub label: String,
}

impl std::fmt::Debug for FHat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FHat").field("label", &self.label).finish()
    }
}

impl FHat {
    pub fn zero() -> Self {
        Self::custom("zero", |_| Complex64::new(0.0, 0.0))
    }

    /// `amp · e^{−y²/w²}`.
    pub fn gaussian(amp: f64, width: f64) -> Self {
        Self::custom(&format!("gaussian(amp={amp},width={width})"), move |y| {
            Complex64::new(amp * (-(y * y) / (width * width)).exp(), 0.0)
        })
    }

    /// Smooth compactly supported bump `amp · e^{1 − 1/(1 − (y/w)²)}` on `|y| < w`.
    pub fn bump(amp: f64, width: f64) -> Self {
        Self::custom(&format!("bump(amp={amp},width={width})"), move |y| {
            let r = y / width;
            if r.abs() >= 1.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(amp * (1.0 - 1.0 / (1.0 - r * r)).exp(), 0.0)
            }
        })
    }

    pub fn custom<F>(label: &str, f: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            label: label.to_string(),
        }
    }

    pub fn eval(&self, y: f64) -> Complex64 {
        (self.f)(y)
    }

    pub fn handle(&self) -> ComplexFn {
        self.f.clone()
    }

    /// `∫_{−X}^{X} |f̂₊(x/2)| dx` by composite Gauss-Legendre.
    pub fn trace_l1(&self, x_max: f64) -> f64 {
        let rule = GaussRule::new(8);
        let panels = (x_max * 8.0).ceil().max(16.0) as usize;
        let h = 2.0 * x_max / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = -x_max + k as f64 * h;
                rule.integrate(lo, lo + h, |x| self.eval(x / 2.0).norm())
            })
            .sum()
    }
}

/// Grid and step controls for the trace system.
#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Spacing of the uniform part of each branch grid.
    pub h: f64,
    /// Relative step `Δx/x` of the geometric part near the origin.
    pub grading: f64,
    /// Magnus substeps per grid interval.
    pub substeps: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            h: 0.01,
            grading: 0.05,
            substeps: 2,
        }
    }
}

/// Solution of the `t = 0` trace system on both half-lines.
#[derive(Clone)]
pub struct TraceField {
    pub a: f64,
    pub r: Matrix3<f64>,
    pub f_hat_plus: FHat,
    pub eps0: f64,
    pub x_max: f64,
    /// Increasing grid: the negative branch `[−X, −eps0]` then `[eps0, X]`.
    pub x_grid: Vec<f64>,
    pub t0: Vec<Vec3>,
    pub n0_tilde: Vec<CVec3>,
    pub limits: SelfSimilarLimits,
    /// Number of nodes on the negative branch.
    pub split: usize,
    /// True for the output of [`reflect_continuation`].
    pub reflected: bool,
    coefficient: ComplexFn,
}

impl std::fmt::Debug for TraceField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TraceField")
            .field("a", &self.a)
            .field("f_hat_plus", &self.f_hat_plus)
            .field("eps0", &self.eps0)
            .field("x_max", &self.x_max)
            .field("nodes", &self.x_grid.len())
            .field("reflected", &self.reflected)
            .finish()
    }
}

impl TraceField {
    /// Coefficient `φ` of the system `T_x = Re(φ̄Ñ)`, `Ñ_x = −φT`.
    pub fn phi(&self, x: f64) -> Complex64 {
        (self.coefficient)(x)
    }

    /// `T_x(0, x) = Re(φ̄Ñ)` at every node.
    pub fn t_x(&self) -> Vec<Vec3> {
        self.x_grid
            .iter()
            .zip(&self.n0_tilde)
            .map(|(&x, n)| {
                let pb = self.phi(x).conj();
                n.map(|z| (pb * z).re)
            })
            .collect()
    }

    /// `Ñ_x(0, x) = −φT` at every node.
    pub fn n_x(&self) -> Vec<CVec3> {
        self.x_grid
            .iter()
            .zip(&self.t0)
            .map(|(&x, t)| {
                let p = self.phi(x);
                t.map(|v| -p * v)
            })
            .collect()
    }

    /// `(T, Ñ)` at the inner ends `0⁻` (index `split − 1`) and `0⁺`.
    pub fn inner_values(&self) -> ((Vec3, CVec3), (Vec3, CVec3)) {
        let m = self.split - 1;
        let p = self.split;
        (
            (self.t0[m], self.n0_tilde[m]),
            (self.t0[p], self.n0_tilde[p]),
        )
    }

    pub fn max_orthonormality_error(&self) -> f64 {
        self.t0
            .iter()
            .zip(&self.n0_tilde)
            .map(|(t, n)| OrthoFrame { t: *t, n: *n }.orthonormality_error())
            .fold(0.0, f64::max)
    }

    /// Linear interpolation of `(T, Ñ)` at `x` (same branch only).
    pub fn interpolate(&self, x: f64) -> Result<(Vec3, CVec3)> {
        let (lo, hi) = if x < 0.0 {
            (0, self.split)
        } else {
            (self.split, self.x_grid.len())
        };
        let g = &self.x_grid[lo..hi];
        if x < g[0] || x > g[g.len() - 1] {
            return Err(Error::Domain(format!("x = {x} outside the trace branch")));
        }
        let k = g.partition_point(|&v| v <= x).clamp(1, g.len() - 1);
        let (i, j) = (lo + k - 1, lo + k);
        let w = (x - self.x_grid[i]) / (self.x_grid[j] - self.x_grid[i]);
        let t = self.t0[i] * (1.0 - w) + self.t0[j] * w;
        let n = self.n0_tilde[i] * Complex64::new(1.0 - w, 0.0)
            + self.n0_tilde[j] * Complex64::new(w, 0.0);
        Ok((t, n))
    }
}

/// Nodes `eps0 = x₀ < x₁ < … = X` with geometric steps near the origin and
/// uniform steps `h` beyond.
fn branch_grid(eps0: f64, x_max: f64, opts: &TraceOptions, a: f64) -> Vec<f64> {
    let c = opts.grading / (1.0 + a * a);
    let mut v = vec![eps0];
    let mut x = eps0;
    while x < x_max {
        let step = (c * x).min(opts.h);
        x = (x + step).min(x_max);
        if x_max - x < 1e-3 * step {
            x = x_max;
        }
        v.push(x);
    }
    v
}

/// Solve the `t = 0` trace system with the coefficient
/// `φ(x) = conj(f̂₊(x/2) e^{−ia² log|x|})` on both branches.
///
/// Each branch starts at `±eps0` from `R·A±`, `R·B±` and is integrated
/// outward to `±x_max` with fourth-order Magnus steps.
pub fn trace_system_solve_with(
    f_hat_plus: &FHat,
    limits: &SelfSimilarLimits,
    r: &Matrix3<f64>,
    x_max: f64,
    eps0: f64,
    opts: &TraceOptions,
) -> Result<TraceField> {
    if !(eps0 > 0.0) || !(x_max > eps0) {
        return Err(Error::Invalid("trace system needs 0 < eps0 < x_max".into()));
    }
    if (r.transpose() * r - Matrix3::identity()).amax() > 1e-9
        || (r.determinant() - 1.0).abs() > 1e-9
    {
        return Err(Error::Invalid("R must be a rotation".into()));
    }
    let a = limits.a;
    let fh = f_hat_plus.handle();
    let coefficient: ComplexFn = Arc::new(move |x: f64| {
        (fh(x / 2.0) * Complex64::from_polar(1.0, -a * a * x.abs().ln())).conj()
    });
    let branch = branch_grid(eps0, x_max, opts, a);
    let mut x_grid: Vec<f64> = branch.iter().rev().map(|x| -x).collect();
    let split = x_grid.len();
    x_grid.extend_from_slice(&branch);
    for &x in &x_grid {
        let v = coefficient(x);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Invalid(format!(
                "non-finite f_hat sample at x = {x}"
            )));
        }
    }
    let start_plus = limits.frame_plus().rotated(r);
    let start_minus = limits.frame_minus().rotated(r);
    let pos = hasimoto_transport_fn(
        &*coefficient,
        &branch,
        0.0,
        &start_plus,
        eps0,
        opts.substeps,
    )?;
    let neg_grid: Vec<f64> = x_grid[..split].to_vec();
    let neg = hasimoto_transport_fn(
        &*coefficient,
        &neg_grid,
        0.0,
        &start_minus,
        -eps0,
        opts.substeps,
    )?;
    let mut t0 = Vec::with_capacity(x_grid.len());
    let mut n0 = Vec::with_capacity(x_grid.len());
    for f in neg.frames.iter().chain(&pos.frames) {
        t0.push(f.t);
        n0.push(f.n);
    }
    Ok(TraceField {
        a,
        r: *r,
        f_hat_plus: f_hat_plus.clone(),
        eps0,
        x_max,
        x_grid,
        t0,
        n0_tilde: n0,
        limits: *limits,
        split,
        reflected: false,
        coefficient,
    })
}

/// [`trace_system_solve_with`] with limits extracted from a fresh profile of
/// parameter `a` (flow normalization, windows up to `s = 200`).
pub fn trace_system_solve(
    f_hat_plus: &FHat,
    a: f64,
    r: &Matrix3<f64>,
    x_max: f64,
    eps0: f64,
) -> Result<TraceField> {
    let ev = ProfileEvaluator::new(a, 200.0, 0.5, &crate::profile::ProfileOptions::default())?;
    let limits = selfsimilar_limits(&ev, 200.0)?;
    trace_system_solve_with(
        f_hat_plus,
        &limits,
        r,
        x_max,
        eps0,
        &TraceOptions::default(),
    )
}

/// Reflected trace `T*(0, x) = −T(0, −x)`, `Ñ*(0, x) = −conj(Ñ(0, −x))`, with
/// coefficient `φ*(x) = −conj(φ(−x))` so that the reflected pair solves the
/// same system.
pub fn reflect_continuation(trace: &TraceField) -> TraceField {
    let n = trace.x_grid.len();
    let x_grid: Vec<f64> = trace.x_grid.iter().rev().map(|x| -x).collect();
    let t0 = (0..n).map(|k| -trace.t0[n - 1 - k]).collect();
    let n0_tilde = (0..n)
        .map(|k| trace.n0_tilde[n - 1 - k].map(|z| -z.conj()))
        .collect();
    let inner = trace.coefficient.clone();
    let coefficient: ComplexFn = Arc::new(move |x: f64| -inner(-x).conj());
    TraceField {
        a: trace.a,
        r: trace.r,
        f_hat_plus: trace.f_hat_plus.clone(),
        eps0: trace.eps0,
        x_max: trace.x_max,
        x_grid,
        t0,
        n0_tilde,
        limits: trace.limits,
        split: n - trace.split,
        reflected: !trace.reflected,
        coefficient,
    }
}

/// `Re N ⊥ Im N` defect `|Re N · Im N|`.
pub fn normal_orthogonality(n: &CVec3) -> f64 {
    let (re, im) = re_im(n);
    re.dot(&im).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ProfileOptions;

    fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn zero_psi_gives_constant_frames() {
        let g = uniform(-2.0, 2.0, 41);
        let psi = vec![Complex64::new(0.0, 0.0); g.len()];
        let f = hasimoto_transport(&psi, &g, 1.0, &OrthoFrame::identity(), g[20]).unwrap();
        for fr in &f.frames {
            assert!((fr.matrix() - Matrix3::identity()).amax() < 1e-15);
        }
    }

    #[test]
    fn constant_real_psi_rotates_in_tangent_plane() {
        let c = 1.3;
        let period = 2.0 * std::f64::consts::PI / c;
        let g = uniform(0.0, period, 1001);
        let psi = vec![Complex64::new(c, 0.0); g.len()];
        let f = hasimoto_transport(&psi, &g, 1.0, &OrthoFrame::identity(), 0.0).unwrap();
        for (x, fr) in g.iter().zip(&f.frames) {
            let want = Vec3::new((c * x).cos(), (c * x).sin(), 0.0);
            assert!((fr.t - want).norm() < 1e-12);
        }
        assert!((f.frames[1000].t - Vec3::x()).norm() < 1e-12);
        assert!(f.drift_before_projection < 1e-12);
    }

    #[test]
    fn magnus_step_is_fourth_order() {
        let psi = |x: f64| Complex64::new(x.cos(), 0.5 * x * x);
        let reference =
            hasimoto_transport_fn(psi, &[0.0, 2.0], 1.0, &OrthoFrame::identity(), 0.0, 4000)
                .unwrap();
        let err = |m| {
            let f = hasimoto_transport_fn(psi, &[0.0, 2.0], 1.0, &OrthoFrame::identity(), 0.0, m)
                .unwrap();
            (f.frames[1].matrix() - reference.frames[1].matrix()).amax()
        };
        let rate = (err(20) / err(40)).log2();
        assert!(rate > 3.7 && rate < 4.4, "observed order {rate}");
    }

    #[test]
    fn selfsimilar_frames_are_orthonormal_with_unit_first_row() {
        let ev = ProfileEvaluator::new(0.5, 20.0, 0.5, &ProfileOptions::default()).unwrap();
        let f = selfsimilar_frame_field(&ev, 2.0, &uniform(-10.0, 10.0, 201)).unwrap();
        assert!(f.max_orthonormality_error() < 1e-9);
        assert!(f.first_row_defect() < 1e-8);
    }
}
