//! Chirped oscillatory integrals
//!
//! ```text
//! I_ξ = ∫ e^{−ixξ} (e^{−ix²/4t}/√t) e^{−ia² log(|x|/√t)} m(x) dx,
//! Ĩ_ξ = ∫ e^{−ixξ} (e^{−ix²/4t}/√t) m(x) dx.
//! ```
//!
//! With `x = 2√t (s + η)`, `η = −√t ξ`, the integral becomes
//! `2 e^{iξ²t} ∫ e^{−is²} e^{−ia² log(2|s+η|)} m(2√t(s+η)) ds`: a unit
//! stationary phase at `s = 0` and the log singularity at `s = −η`.
//!
//! The core interval enclosing both points is integrated exactly with
//! Gauss-Legendre panels sized by the local phase derivative and refined
//! geometrically toward the singularity. Beyond the core each tail carries a
//! Gaussian regularizer `e^{−ε d²}` (`d` the distance to the core), several
//! levels of `ε` are accumulated in one pass, and Neville extrapolation to
//! `ε = 0` gives the value. The error estimate is the larger of the last
//! extrapolation correction and the size of the integrand at the tail ends.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// `∫_ℝ e^{−is²} ds = √π e^{−iπ/4}`.
pub fn fresnel_full() -> Complex64 {
    Complex64::from_polar(PI.sqrt(), -PI / 4.0)
}

/// Samples of a decaying field, linearly interpolated and zero outside the
/// sampled range.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub x: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(x: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if x.len() != values.len() || x.len() < 2 {
            return Err(Error::Invalid(
                "sampled field needs matching x and values (>= 2)".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid(
                "sampled field abscissas must increase".into(),
            ));
        }
        if values
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Invalid("non-finite sample".into()));
        }
        Ok(Self { x, values })
    }

    /// Sample `f` on a uniform grid of `n` nodes over `[lo, hi]`.
    pub fn from_fn<F: Fn(f64) -> Complex64>(lo: f64, hi: f64, n: usize, f: F) -> Result<Self> {
        let x: Vec<f64> = (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect();
        let values = x.iter().map(|&v| f(v)).collect();
        Self::new(x, values)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.x.len();
        if x < self.x[0] || x > self.x[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let k = self.x.partition_point(|&v| v <= x).clamp(1, n - 1);
        let w = (x - self.x[k - 1]) / (self.x[k] - self.x[k - 1]);
        self.values[k - 1] * (1.0 - w) + self.values[k] * w
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }
}

/// Multiplier `m(x)` of the integrand at the fixed time of the kernel.
#[derive(Clone)]
pub enum Multiplier {
    One,
    Sampled(SampledField),
    Product(Box<Multiplier>, Box<Multiplier>),
    Function(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

impl std::fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Multiplier::One => write!(f, "One"),
            Multiplier::Sampled(s) => write!(f, "Sampled({} nodes)", s.x.len()),
            Multiplier::Product(a, b) => write!(f, "Product({a:?}, {b:?})"),
            Multiplier::Function(_) => write!(f, "Function"),
        }
    }
}

impl Multiplier {
    pub fn function<F: Fn(f64) -> Complex64 + Send + Sync + 'static>(f: F) -> Self {
        Multiplier::Function(Arc::new(f))
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            Multiplier::One => Complex64::new(1.0, 0.0),
            Multiplier::Sampled(s) => s.eval(x),
            Multiplier::Product(a, b) => a.eval(x) * b.eval(x),
            Multiplier::Function(f) => f(x),
        }
    }

    /// Sampled factors must cover the stationary point `x*`.
    fn check_covers(&self, x_star: f64) -> Result<()> {
        match self {
            Multiplier::Sampled(s) => {
                let (lo, hi) = s.range();
                if x_star < lo || x_star > hi {
                    return Err(Error::Domain(format!(
                        "window too small: stationary point x* = {x_star:.4} outside samples [{lo}, {hi}]"
                    )));
                }
                Ok(())
            }
            Multiplier::Product(a, b) => {
                a.check_covers(x_star)?;
                b.check_covers(x_star)
            }
            _ => Ok(()),
        }
    }
}

/// Parameters of `I_ξ` (log phase on) or `Ĩ_ξ` (log phase off).
#[derive(Debug, Clone)]
pub struct OscKernel {
    pub a: f64,
    pub t: f64,
    pub with_log_phase: bool,
    pub m: Multiplier,
}

impl OscKernel {
    pub fn new(a: f64, t: f64, with_log_phase: bool, m: Multiplier) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Invalid(format!(
                "kernel time must be positive, got {t}"
            )));
        }
        if !a.is_finite() {
            return Err(Error::Invalid("kernel parameter a must be finite".into()));
        }
        Ok(Self {
            a,
            t,
            with_log_phase,
            m,
        })
    }
}

/// Quadrature and regularization controls.
#[derive(Debug, Clone, Copy)]
pub struct OscOptions {
    /// Half-margin of the exact core beyond the stationary and singular points (in `s`).
    pub core_margin: f64,
    /// Largest `ε` of the tail regularizer.
    pub eps0: f64,
    /// Number of regularization levels `ε_k = ε₀/2^k`.
    pub levels: usize,
    /// Tails run until `ε_min d² = tail_decay`.
    pub tail_decay: f64,
    /// Gauss-Legendre nodes per panel.
    pub gl_order: usize,
    /// Phase increment allowed per panel (radians).
    pub phase_per_panel: f64,
    /// Panels closer than this to the singular point are skipped.
    pub singular_cutoff: f64,
}

impl Default for OscOptions {
    fn default() -> Self {
        Self {
            core_margin: 20.0,
            eps0: 0.04,
            levels: 5,
            tail_decay: 40.0,
            gl_order: 16,
            phase_per_panel: 3.0,
            singular_cutoff: 1e-12,
        }
    }
}

/// Truncation parameters used for one evaluation (in the `s` variable).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OscWindow {
    pub core_lo: f64,
    pub core_hi: f64,
    pub tail_length: f64,
    pub eps_min: f64,
    pub levels: usize,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscResult {
    pub xi: f64,
    pub value: Complex64,
    pub err_estimate: f64,
    pub window: OscWindow,
}

/// Vector-valued counterpart of [`OscResult`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscVecResult<const D: usize> {
    pub xi: f64,
    pub value: [Complex64; D],
    pub err_estimate: f64,
    pub window: OscWindow,
}

/// Neville extrapolation of `(h_k, y_k)` to `h = 0`; returns the value and
/// the size of the last correction.
fn neville_to_zero<const D: usize>(h: &[f64], y: &[[Complex64; D]]) -> ([Complex64; D], f64) {
    let n = h.len();
    let mut p: Vec<[Complex64; D]> = y.to_vec();
    let mut last_corr = 0.0_f64;
    for m in 1..n {
        let mut corr = 0.0_f64;
        for i in 0..n - m {
            let mut next = [Complex64::new(0.0, 0.0); D];
            for d in 0..D {
                // p_{i..i+m}(0) = (h_{i+m} p_i − h_i p_{i+1}) / (h_{i+m} − h_i)
                next[d] = (p[i][d] * h[i + m] - p[i + 1][d] * h[i]) / (h[i + m] - h[i]);
                if i == n - m - 1 {
                    corr = corr.max((next[d] - p[i + 1][d]).norm());
                }
            }
            p[i] = next;
        }
        last_corr = corr;
    }
    (p[0], last_corr)
}

struct Panels {
    rule_x: Vec<f64>,
    rule_w: Vec<f64>,
}

impl Panels {
    /// Visit every node `(s, weight)` covering `[lo, hi]`.
    ///
    /// Panel widths are bounded by `θ/ω(s)` for the smooth phase rate `ω`, by
    /// one, and near the singular point `sing` by a fraction of the distance
    /// to it (including the rate `a²/d` of the log phase).
    #[allow(clippy::too_many_arguments)]
    fn visit<W, V>(
        &self,
        lo: f64,
        hi: f64,
        omega: W,
        sing: Option<(f64, f64)>,
        cutoff: f64,
        theta: f64,
        mut f: V,
    ) -> usize
    where
        W: Fn(f64) -> f64,
        V: FnMut(f64, f64),
    {
        if !(hi > lo) {
            return 0;
        }
        let mut count = 0;
        let mut s = lo;
        while s < hi {
            let mut h = (hi - s).min(1.0);
            for _ in 0..3 {
                let w = omega(s).max(omega(s + h)).max(1e-300);
                h = h.min(theta / w);
            }
            if let Some((c, log_rate)) = sing {
                let d = (s - c).abs();
                if d < cutoff {
                    // Step over the unresolved sliver next to the singular point.
                    s = if c >= s {
                        (c + cutoff).min(hi)
                    } else {
                        s + cutoff
                    };
                    continue;
                }
                let toward = c > s;
                let near = if toward { 0.5 * d } else { d };
                h = h.min(if toward { 0.5 * d } else { 2.0 * d });
                if log_rate > 0.0 {
                    h = h.min(theta * near / log_rate);
                }
                if toward && s + h > c - cutoff {
                    h = c - s;
                }
            }
            let mid = s + 0.5 * h;
            let r = 0.5 * h;
            for (x, w) in self.rule_x.iter().zip(&self.rule_w) {
                f(mid + r * x, r * w);
            }
            count += 1;
            s += h;
        }
        count
    }
}

/// Evaluate the chirped integral of a `D`-component multiplier.
///
/// `chirp_sign = −1` computes `I_ξ` (or `Ĩ_ξ`) exactly as defined above;
/// `chirp_sign = +1` computes the same with every phase conjugated:
/// `∫ e^{+ixξ}(e^{+ix²/4t}/√t) e^{+ia² log(|x|/√t)} m dx`, used through
/// `conj(I_ξ[conj m])`.
pub fn eval_chirped<const D: usize, M>(
    a: f64,
    t: f64,
    with_log_phase: bool,
    xi: f64,
    m: &M,
    opts: &OscOptions,
) -> Result<OscVecResult<D>>
where
    M: Fn(f64) -> [Complex64; D],
{
    if !xi.is_finite() {
        return Err(Error::Invalid("xi must be finite".into()));
    }
    if !(t > 0.0) {
        return Err(Error::Invalid("t must be positive".into()));
    }
    let rt = t.sqrt();
    let eta = -rt * xi;
    let sing = -eta;
    let a2 = if with_log_phase { a * a } else { 0.0 };
    let c = opts.core_margin;
    let core_lo = sing.min(0.0) - c;
    let core_hi = sing.max(0.0) + c;
    let levels = opts.levels.max(2);
    let eps: Vec<f64> = (0..levels)
        .map(|k| opts.eps0 / 2f64.powi(k as i32))
        .collect();
    let eps_min = eps[levels - 1];
    let tail = (opts.tail_decay / eps_min).sqrt();

    let (rx, rw) = gauss_legendre(opts.gl_order);
    let panels = Panels {
        rule_x: rx,
        rule_w: rw,
    };
    let omega = |s: f64| 2.0 * s.abs() + 2.0 * (s + eta).abs();
    let integrand = |s: f64| -> [Complex64; D] {
        let u = s + eta;
        let mut ph = -s * s;
        if a2 > 0.0 {
            ph -= a2 * (2.0 * u.abs()).ln();
        }
        let e = Complex64::from_polar(1.0, ph);
        let mv = m(2.0 * rt * u);
        let mut out = [Complex64::new(0.0, 0.0); D];
        for d in 0..D {
            out[d] = e * mv[d];
        }
        out
    };

    let zero = [Complex64::new(0.0, 0.0); D];
    let mut core = zero;
    let theta = opts.phase_per_panel;
    let cut = opts.singular_cutoff * (1.0 + eta.abs());
    let mut n_panels = 0;
    let mut bad = false;
    let mut add_core = |s: f64, w: f64| {
        let v = integrand(s);
        for d in 0..D {
            if !v[d].re.is_finite() || !v[d].im.is_finite() {
                bad = true;
            }
            core[d] += v[d] * w;
        }
    };
    // Split the core at the singular point and at the stationary point.
    let mut cuts = vec![core_lo, sing, 0.0, core_hi];
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    for w in cuts.windows(2) {
        n_panels += panels.visit(
            w[0],
            w[1],
            omega,
            Some((sing, a2)),
            cut,
            theta,
            &mut add_core,
        );
    }

    let mut tails = vec![zero; levels];
    let mut edge = 0.0_f64;
    for (start, dir) in [(core_hi, 1.0), (core_lo, -1.0)] {
        let (lo, hi) = if dir > 0.0 {
            (start, start + tail)
        } else {
            (start - tail, start)
        };
        n_panels += panels.visit(lo, hi, omega, None, 0.0, theta, |s, w| {
            let v = integrand(s);
            let d2 = (s - start) * (s - start);
            for (k, e) in eps.iter().enumerate() {
                let g = (-e * d2).exp() * w;
                for d in 0..D {
                    tails[k][d] += v[d] * g;
                }
            }
        });
        let v = integrand(start + dir * tail);
        let mag = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        edge = edge.max(mag * (-opts.tail_decay).exp());
    }
    if bad {
        return Err(Error::Invalid("non-finite multiplier value".into()));
    }
    let totals: Vec<[Complex64; D]> = tails
        .iter()
        .map(|tl| {
            let mut v = core;
            for d in 0..D {
                v[d] += tl[d];
            }
            v
        })
        .collect();
    let (value, corr) = neville_to_zero(&eps, &totals);
    let pre = Complex64::from_polar(2.0, xi * xi * t);
    let mut out = zero;
    for d in 0..D {
        out[d] = pre * value[d];
    }
    let err_estimate = 2.0 * corr.max(edge);
    if !err_estimate.is_finite() {
        return Err(Error::NonConvergence(
            "extrapolation produced non-finite values".into(),
        ));
    }
    Ok(OscVecResult {
        xi,
        value: out,
        err_estimate,
        window: OscWindow {
            core_lo,
            core_hi,
            tail_length: tail,
            eps_min,
            levels,
            panels: n_panels,
        },
    })
}

fn eval_kernel(
    kernel: &OscKernel,
    xi: f64,
    log_phase: bool,
    opts: &OscOptions,
) -> Result<OscResult> {
    kernel.m.check_covers(-2.0 * kernel.t * xi)?;
    let m = |x: f64| [kernel.m.eval(x)];
    let r = eval_chirped::<1, _>(kernel.a, kernel.t, log_phase, xi, &m, opts)?;
    Ok(OscResult {
        xi,
        value: r.value[0],
        err_estimate: r.err_estimate,
        window: r.window,
    })
}

/// `I_ξ` with the log phase (the kernel flag selects `Ĩ_ξ` when false).
pub fn eval_i(kernel: &OscKernel, xi: f64) -> Result<OscResult> {
    eval_kernel(kernel, xi, kernel.with_log_phase, &OscOptions::default())
}

/// `Ĩ_ξ`: as [`eval_i`] without the log phase, whatever the kernel flag.
pub fn eval_i_tilde(kernel: &OscKernel, xi: f64) -> Result<OscResult> {
    eval_kernel(kernel, xi, false, &OscOptions::default())
}

/// [`eval_i`] with explicit options.
pub fn eval_i_with(kernel: &OscKernel, xi: f64, opts: &OscOptions) -> Result<OscResult> {
    eval_kernel(kernel, xi, kernel.with_log_phase, opts)
}

/// Limit of `I_ξ` for `m = 1` as `ξ → −∞`:
/// `2 e^{iξ²t} e^{−ia² log(2|ξ|√t)} √π e^{−iπ/4}` (no log factor for `Ĩ_ξ`).
pub fn asymptotic_reference(kernel: &OscKernel, xi: f64) -> Complex64 {
    let mut ph = xi * xi * kernel.t;
    if kernel.with_log_phase && kernel.a != 0.0 {
        ph -= kernel.a * kernel.a * (2.0 * xi.abs() * kernel.t.sqrt()).ln();
    }
    Complex64::from_polar(2.0, ph) * fresnel_full()
}

/// One row of a decay sweep.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub xi: f64,
    pub value: (f64, f64),
    pub abs: f64,
    pub reference: (f64, f64),
    pub abs_diff: f64,
    pub err_estimate: f64,
}

/// Evaluate the kernel over `xi_list` (decreasing toward `−∞`) and compare
/// with [`asymptotic_reference`].
pub fn decay_sweep(kernel: &OscKernel, xi_list: &[f64]) -> Result<Vec<SweepRow>> {
    if xi_list.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Invalid("xi_list must be sorted decreasing".into()));
    }
    xi_list
        .iter()
        .map(|&xi| {
            let r = eval_i(kernel, xi)?;
            let rf = asymptotic_reference(kernel, xi);
            Ok(SweepRow {
                xi,
                value: (r.value.re, r.value.im),
                abs: r.value.norm(),
                reference: (rf.re, rf.im),
                abs_diff: (r.value - rf).norm(),
                err_estimate: r.err_estimate,
            })
        })
        .collect()
}

/// Least-squares slope of `log|v|` against `log|ξ|`.
pub fn fitted_decay_exponent(xi: &[f64], v: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xi
        .iter()
        .zip(v)
        .map(|(x, y)| (x.abs().ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
