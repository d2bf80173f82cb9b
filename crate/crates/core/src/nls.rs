//! Perturbations of the self-similar solution of
//! `iψ_t + ψ_xx ± (|ψ|² − a²/t)ψ/2 = 0` through the modulation ansatz
//! `ψ(t, x) = (e^{ix²/4t}/√t)(a + ū)(1/t, x/t)`.
//!
//! With `τ = 1/t` and `X = x/t` the pseudo-conformal change of variables
//! turns `iψ_t + ψ_xx` into `t^{−5/2} e^{ix²/4t}(w_XX − i w_τ)` for
//! `ψ = t^{−1/2} e^{ix²/4t} w`. Conjugating `w = a + ū` gives
//!
//! ```text
//! i u_τ + u_XX ± (|a + u|² − a²)(a + u)/(2τ) = 0,
//! ```
//!
//! with the same sign as the cubic equation. `u ≡ 0` is a fixed point. The
//! derivation is checked by [`residual_eq4`], which maps a computed
//! trajectory back to `ψ` and evaluates the original equation; nothing else
//! in this module should be trusted unless that residual converges.
//!
//! Time stepping is Strang splitting on a periodic grid: the dispersive part
//! is exact in Fourier space and the nonlinear part is an exact phase
//! rotation `a + u ↦ (a + u) e^{±i(|a+u|² − a²) log(τ₂/τ₁)/2}`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Choice of sign in the cubic term: `+1` focusing, `−1` defocusing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NlsSign {
    Focusing,
    Defocusing,
}

impl NlsSign {
    pub fn value(self) -> f64 {
        match self {
            NlsSign::Focusing => 1.0,
            NlsSign::Defocusing => -1.0,
        }
    }
}

/// Right-hand side of the `u`-equation, `u_τ = i u_XX ± i(|a+u|² − a²)(a+u)/(2τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UEquation {
    pub a: f64,
    pub sign: NlsSign,
}

/// The evolution satisfied by `u` for parameter `a` and the given sign.
pub fn derive_u_evolution(a: f64, sign: NlsSign) -> UEquation {
    UEquation { a, sign }
}

impl UEquation {
    /// `u_τ` given `u` and `u_XX` at one point.
    pub fn rhs(&self, tau: f64, u: Complex64, u_xx: Complex64) -> Complex64 {
        let v = self.a + u;
        I * u_xx + I * (self.sign.value() * (v.norm_sqr() - self.a * self.a) / (2.0 * tau)) * v
    }

    /// Linear part of the nonlinearity at `u = 0`: `±(a²/(2τ))(u + ū)`.
    pub fn linearized_coupling(&self, tau: f64) -> f64 {
        self.sign.value() * self.a * self.a / (2.0 * tau)
    }

    /// Exact solution of the nonlinear substep from `tau1` to `tau2`.
    pub fn nonlinear_flow(&self, u: Complex64, tau1: f64, tau2: f64) -> Complex64 {
        let v = self.a + u;
        let theta = self.sign.value() * (v.norm_sqr() - self.a * self.a) * 0.5 * (tau2 / tau1).ln();
        v * Complex64::from_polar(1.0, theta) - self.a
    }
}

/// Uniform periodic grid `X_j = −L + j·2L/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NlsGrid {
    pub half_width: f64,
    pub n: usize,
}

impl NlsGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || n < 16 || !n.is_multiple_of(2) {
            return Err(Error::Invalid(format!(
                "grid needs L > 0 and an even n >= 16 (got L={half_width}, n={n})"
            )));
        }
        Ok(Self { half_width, n })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| -self.half_width + j as f64 * self.dx())
            .collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n;
        let dk = PI / self.half_width;
        (0..n)
            .map(|j| if j < n / 2 { j as f64 } else { j as f64 - n as f64 } * dk)
            .collect()
    }
}

struct Fourier {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl Fourier {
    fn new(grid: &NlsGrid) -> Self {
        let mut p = FftPlanner::new();
        Self {
            fwd: p.plan_fft_forward(grid.n),
            inv: p.plan_fft_inverse(grid.n),
            k: grid.wavenumbers(),
        }
    }

    /// Multiply by `m(k)` in Fourier space.
    fn apply<F: Fn(f64) -> Complex64>(&self, u: &mut [Complex64], m: F) {
        self.fwd.process(u);
        let scale = 1.0 / u.len() as f64;
        for (z, &k) in u.iter_mut().zip(&self.k) {
            *z *= m(k) * scale;
        }
        self.inv.process(u);
    }
}

/// `u(τ, ·)` on the periodic grid.
#[derive(Debug, Clone, Serialize)]
pub struct ModulatedField {
    pub tau: f64,
    pub a: f64,
    pub sign: NlsSign,
    pub grid: NlsGrid,
    #[serde(skip)]
    pub u: Vec<Complex64>,
}

impl ModulatedField {
    pub fn new(tau: f64, a: f64, sign: NlsSign, grid: NlsGrid, u: Vec<Complex64>) -> Result<Self> {
        if u.len() != grid.n {
            return Err(Error::Invalid("sample count differs from the grid".into()));
        }
        if !(tau >= 1.0) {
            return Err(Error::Invalid(format!("tau must be >= 1, got {tau}")));
        }
        if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("non-finite samples".into()));
        }
        Ok(Self {
            tau,
            a,
            sign,
            grid,
            u,
        })
    }

    pub fn zero(a: f64, sign: NlsSign, grid: NlsGrid) -> Self {
        Self {
            tau: 1.0,
            a,
            sign,
            grid,
            u: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    /// `amp·e^{−X²/width²}` at `τ = 1`.
    pub fn gaussian(a: f64, sign: NlsSign, grid: NlsGrid, amp: f64, width: f64) -> Self {
        let u = grid
            .points()
            .iter()
            .map(|x| Complex64::new(amp * (-(x * x) / (width * width)).exp(), 0.0))
            .collect();
        Self {
            tau: 1.0,
            a,
            sign,
            grid,
            u,
        }
    }

    pub fn l2(&self) -> f64 {
        l2_norm(&self.u, self.grid.dx())
    }

    pub fn sup(&self) -> f64 {
        self.u.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest `|u|` over the outer 5% of the grid on either side.
    pub fn boundary_max(&self) -> f64 {
        let n = self.grid.n;
        let w = (n / 20).max(1);
        self.u[..w]
            .iter()
            .chain(&self.u[n - w..])
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

fn l2_norm(u: &[Complex64], dx: f64) -> f64 {
    (u.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt()
}

/// Diagnostics after one step.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepDiagnostic {
    pub tau: f64,
    pub l2: f64,
    pub sup: f64,
    pub boundary: f64,
}

/// Recorded snapshots of one evolution.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub equation: UEquation,
    pub grid: NlsGrid,
    pub dtau: f64,
    pub scheme: String,
    #[serde(skip)]
    pub snapshots: Vec<ModulatedField>,
    pub diagnostics: Vec<StepDiagnostic>,
}

impl Trajectory {
    pub fn taus(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.tau).collect()
    }

    /// Snapshot recorded at `tau` (relative tolerance 1e−12).
    pub fn at(&self, tau: f64) -> Result<&ModulatedField> {
        self.snapshots
            .iter()
            .find(|s| (s.tau - tau).abs() <= 1e-12 * tau.max(1.0))
            .ok_or_else(|| Error::Domain(format!("no snapshot at tau = {tau}")))
    }

    /// Largest `sup_τ ‖u(τ)‖_{L²}` over the recorded steps.
    pub fn max_l2(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.l2).fold(0.0, f64::max)
    }
}

/// Evolve `u1` from its `τ` to `tau_max` with Strang splitting and steps no
/// longer than `dtau`, recording snapshots at the start, at every `record`
/// time and at `tau_max`.
pub fn evolve_u(
    u1: &ModulatedField,
    tau_max: f64,
    dtau: f64,
    record: &[f64],
) -> Result<Trajectory> {
    if !(tau_max > u1.tau) || !(dtau > 0.0) {
        return Err(Error::Invalid("need tau_max > tau and dtau > 0".into()));
    }
    let mut marks: Vec<f64> = record
        .iter()
        .copied()
        .filter(|&t| t > u1.tau && t < tau_max)
        .collect();
    if record.iter().any(|&t| t < u1.tau || t > tau_max) {
        return Err(Error::Invalid("record times outside the run".into()));
    }
    marks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    marks.dedup();
    marks.push(tau_max);
    let eq = derive_u_evolution(u1.a, u1.sign);
    let fourier = Fourier::new(&u1.grid);
    let dx = u1.grid.dx();
    let sup0 = u1.sup();
    let mut u = u1.u.clone();
    let mut tau = u1.tau;
    let mut snapshots = vec![u1.clone()];
    let mut diagnostics = Vec::new();
    for &mark in &marks {
        let steps = ((mark - tau) / dtau * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let d = (mark - tau) / steps as f64;
        for k in 0..steps {
            let t0 = tau + k as f64 * d;
            let tm = t0 + 0.5 * d;
            let t1 = if k + 1 == steps { mark } else { t0 + d };
            for z in u.iter_mut() {
                *z = eq.nonlinear_flow(*z, t0, tm);
            }
            fourier.apply(&mut u, |k| Complex64::from_polar(1.0, -k * k * (t1 - t0)));
            for z in u.iter_mut() {
                *z = eq.nonlinear_flow(*z, tm, t1);
            }
            let sup = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if !sup.is_finite() || (sup0 > 0.0 && sup > 10.0 * sup0) {
                return Err(Error::Blowup(format!(
                    "sup|u| = {sup:.3e} at tau = {t1} (initial {sup0:.3e})"
                )));
            }
            let n = u.len();
            let w = (n / 20).max(1);
            diagnostics.push(StepDiagnostic {
                tau: t1,
                l2: l2_norm(&u, dx),
                sup,
                boundary: u[..w]
                    .iter()
                    .chain(&u[n - w..])
                    .map(|z| z.norm())
                    .fold(0.0, f64::max),
            });
        }
        tau = mark;
        snapshots.push(ModulatedField {
            tau,
            a: u1.a,
            sign: u1.sign,
            grid: u1.grid,
            u: u.clone(),
        });
    }
    Ok(Trajectory {
        equation: eq,
        grid: u1.grid,
        dtau,
        scheme: "strang-split/fourier-exact-linear/exact-phase-nonlinear".into(),
        snapshots,
        diagnostics,
    })
}

/// `τ` values needed to check the residual at each `t` of `t_list` with a
/// centred difference of half-width `delta` in `t`.
pub fn residual_record_taus(t_list: &[f64], delta: f64) -> Vec<f64> {
    let mut v = Vec::new();
    for &t in t_list {
        v.push(1.0 / (t + delta));
        v.push(1.0 / t);
        v.push(1.0 / (t - delta));
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// `(ū, ū_X, ū_XX)` of the trigonometric interpolant at arbitrary `X`.
struct Interpolant {
    coef: Vec<Complex64>,
    k: Vec<f64>,
    x0: f64,
}

impl Interpolant {
    fn new(field: &ModulatedField) -> Self {
        let mut c = field.u.clone();
        let mut p = FftPlanner::new();
        p.plan_fft_forward(c.len()).process(&mut c);
        let n = c.len();
        for z in &mut c {
            *z /= n as f64;
        }
        let mut k = field.grid.wavenumbers();
        // Split the Nyquist mode symmetrically so the interpolant stays real for real data.
        k[n / 2] = 0.0;
        c[n / 2] = Complex64::new(0.0, 0.0);
        Self {
            coef: c,
            k,
            x0: -field.grid.half_width,
        }
    }

    fn conj_eval(&self, x: f64) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (c, &k) in self.coef.iter().zip(&self.k) {
            let e = c * Complex64::from_polar(1.0, k * (x - self.x0));
            out[0] += e;
            out[1] += e * (I * k);
            out[2] += e * (-k * k);
        }
        [out[0].conj(), out[1].conj(), out[2].conj()]
    }
}

/// `sup |iψ_t + ψ_xx ± (|ψ|² − a²/t)ψ/2|` over the central half of the
/// grid, mapped back through the ansatz, at every `t` of `t_list`.
///
/// `ψ_t` of the ansatz part is exact; the perturbation part is differenced
/// over the neighbouring snapshots (second order, non-uniform spacing).
pub fn residual_eq4(traj: &Trajectory, t_list: &[f64]) -> Result<f64> {
    residual_eq4_signed(traj, t_list, 1.0)
}

/// [`residual_eq4`] with the `a²/t` term multiplied by `a2_sign`
/// (`−1` gives a deliberately wrong equation).
pub fn residual_eq4_signed(traj: &Trajectory, t_list: &[f64], a2_sign: f64) -> Result<f64> {
    let taus = traj.taus();
    let a = traj.equation.a;
    let s = traj.equation.sign.value();
    let mut worst = 0.0_f64;
    for &tc in t_list {
        let tau_c = 1.0 / tc;
        let k = taus
            .iter()
            .position(|&t| (t - tau_c).abs() <= 1e-12 * tau_c)
            .ok_or_else(|| Error::Domain(format!("no snapshot at t = {tc}")))?;
        if k == 0 || k + 1 >= taus.len() {
            return Err(Error::Domain(format!(
                "t = {tc} needs snapshots on both sides"
            )));
        }
        let (t_m, t_p) = (1.0 / taus[k + 1], 1.0 / taus[k - 1]);
        let (hm, hp) = (tc - t_m, t_p - tc);
        let ip_c = Interpolant::new(&traj.snapshots[k]);
        let ip_m = Interpolant::new(&traj.snapshots[k + 1]);
        let ip_p = Interpolant::new(&traj.snapshots[k - 1]);
        let half = 0.5 * traj.grid.half_width;
        let xs: Vec<f64> = traj
            .grid
            .points()
            .into_iter()
            .filter(|x| x.abs() <= half)
            .map(|x| x * tc)
            .collect();
        let pert = |ip: &Interpolant, t: f64, x: f64| -> Complex64 {
            let w = ip.conj_eval(x / t)[0];
            Complex64::from_polar(1.0 / t.sqrt(), x * x / (4.0 * t)) * w
        };
        for &x in &xs {
            let t = tc;
            let [ub, ub_x, ub_xx] = ip_c.conj_eval(x / t);
            let e = Complex64::from_polar(1.0 / t.sqrt(), x * x / (4.0 * t));
            let w = a + ub;
            let psi = e * w;
            let psi_a = e * a;
            let psi_a_t = psi_a * Complex64::new(-0.5 / t, -x * x / (4.0 * t * t));
            let fm = pert(&ip_m, t_m, x);
            let fp = pert(&ip_p, t_p, x);
            let f0 = e * ub;
            let psi_u_t = (fp * (hm * hm) - fm * (hp * hp) + f0 * (hp * hp - hm * hm))
                / (hp * hm * (hp + hm));
            let psi_t = psi_a_t + psi_u_t;
            let psi_xx = psi * Complex64::new(-x * x / (4.0 * t * t), 0.5 / t)
                + e * (ub_x * (I * x / (t * t)) + ub_xx / (t * t));
            let r = I * psi_t + psi_xx + psi * (s * 0.5 * (psi.norm_sqr() - a2_sign * a * a / t));
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}

/// Final-state estimates from a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct ScatterEstimate {
    pub taus: Vec<f64>,
    /// Estimate at the last `τ`.
    #[serde(skip)]
    pub f_plus: Vec<Complex64>,
    /// `L²` distance between consecutive estimates.
    pub gaps: Vec<f64>,
    /// The last gap.
    pub cauchy_gap: f64,
    /// Gaps decrease strictly.
    pub decreasing: bool,
    /// `p` in `gap ∝ τ^{−p}` from the last two gaps.
    pub decay_exponent: f64,
    pub phase_corrected: bool,
    pub grid: NlsGrid,
}

/// `f₊ ≈ e^{−i(τ−1)∂²}[e^{∓ia² log√τ} u(τ)]` at each `τ` of `tau_list`.
pub fn scattering_extract(traj: &Trajectory, tau_list: &[f64]) -> Result<ScatterEstimate> {
    scattering_extract_with(traj, tau_list, true)
}

/// [`scattering_extract`] with the logarithmic phase correction optional.
pub fn scattering_extract_with(
    traj: &Trajectory,
    tau_list: &[f64],
    phase_correction: bool,
) -> Result<ScatterEstimate> {
    if tau_list.len() < 3 || tau_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid(
            "tau_list must be increasing with at least 3 entries".into(),
        ));
    }
    let fourier = Fourier::new(&traj.grid);
    let a = traj.equation.a;
    let s = traj.equation.sign.value();
    let dx = traj.grid.dx();
    let mut estimates = Vec::with_capacity(tau_list.len());
    for &tau in tau_list {
        let snap = traj.at(tau)?;
        let phase = if phase_correction {
            Complex64::from_polar(1.0, -s * a * a * tau.sqrt().ln())
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut g: Vec<Complex64> = snap.u.iter().map(|z| z * phase).collect();
        fourier.apply(&mut g, |k| Complex64::from_polar(1.0, k * k * (tau - 1.0)));
        estimates.push(g);
    }
    let gaps: Vec<f64> = estimates
        .windows(2)
        .map(|w| {
            let d: Vec<Complex64> = w[0].iter().zip(&w[1]).map(|(p, q)| p - q).collect();
            l2_norm(&d, dx)
        })
        .collect();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let m = gaps.len();
    let decay_exponent = (gaps[m - 2] / gaps[m - 1]).ln() / (tau_list[m] / tau_list[m - 1]).ln();
    Ok(ScatterEstimate {
        decay_exponent,
        taus: tau_list.to_vec(),
        f_plus: estimates.pop().expect("non-empty"),
        cauchy_gap: *gaps.last().expect("at least two gaps"),
        gaps,
        decreasing,
        phase_corrected: phase_correction,
        grid: traj.grid,
    })
}

/// `√(4πi)` on the principal branch.
pub fn sqrt_4_pi_i() -> Complex64 {
    Complex64::from_polar((4.0 * PI).sqrt(), PI / 4.0)
}

/// Continuous Fourier transform `∫ e^{−iXξ} f(X) dX` of grid samples,
/// evaluated by direct summation over the samples above `cutoff·max|f|`.
/// Frequencies beyond the grid Nyquist `π/dx` are not resolved and map to 0.
fn sampled_transform(f: &[Complex64], grid: &NlsGrid, xi: &[f64], cutoff: f64) -> Vec<Complex64> {
    let xs = grid.points();
    let fmax = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let support: Vec<usize> = (0..f.len())
        .filter(|&j| f[j].norm() > cutoff * fmax)
        .collect();
    let dx = grid.dx();
    let nyquist = PI / dx;
    if support.is_empty() {
        return vec![Complex64::new(0.0, 0.0); xi.len()];
    }
    xi.iter()
        .map(|&k| {
            if k.abs() >= nyquist {
                return Complex64::new(0.0, 0.0);
            }
            // Phases advance by a fixed rotation between samples.
            let step = Complex64::from_polar(1.0, -dx * k);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut j_prev = support[0];
            let mut e = Complex64::from_polar(dx, -xs[j_prev] * k);
            for &j in &support {
                while j_prev < j {
                    e *= step;
                    j_prev += 1;
                }
                acc += f[j] * e;
            }
            acc
        })
        .collect()
}

/// Error of the two-term description at each `t`, and the fitted slope.
#[derive(Debug, Clone, Serialize)]
pub struct SingularLimitTable {
    pub t: Vec<f64>,
    pub error: Vec<f64>,
    /// Least-squares slope of `log error` against `log t` over the smallest
    /// decade of `t`.
    pub slope: f64,
}

/// `‖ψ(t) − a e^{ix²/4t}/√t − ansatz(t)‖_{L²}` for each `t` of `t_list`.
///
/// In the variables `(τ, X)` this norm equals `‖u(τ) − U(τ)‖_{L²(dX)}` with
/// `U(τ, X) = e^{±ia² log√τ} e^{iX²/4τ} ĝ(X/2τ)/√(4πiτ)`,
/// `ĝ(ξ) = e^{iξ²} f̂₊(ξ)`, the stationary-phase profile of
/// `e^{±ia² log√τ} e^{i(τ−1)∂²} f₊`. Mapped back to `ψ` the ansatz is
/// `e^{±ia² log√t} e^{−ix²/4} conj(f̂₊(x/2))/conj(√(4πi))`.
pub fn singular_limit_error(
    traj: &Trajectory,
    f_plus: &ScatterEstimate,
    t_list: &[f64],
) -> Result<SingularLimitTable> {
    if f_plus.grid != traj.grid {
        return Err(Error::Invalid(
            "final state and trajectory grids differ".into(),
        ));
    }
    let a = traj.equation.a;
    let s = traj.equation.sign.value();
    let xs = traj.grid.points();
    let dx = traj.grid.dx();
    let mut err = Vec::with_capacity(t_list.len());
    for &t in t_list {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Domain(format!("t = {t} outside (0, 1]")));
        }
        let tau = 1.0 / t;
        let snap = traj.at(tau)?;
        let xi: Vec<f64> = xs.iter().map(|x| x / (2.0 * tau)).collect();
        let fh = sampled_transform(&f_plus.f_plus, &traj.grid, &xi, 1e-13);
        let pre =
            Complex64::from_polar(1.0, s * a * a * tau.sqrt().ln()) / (sqrt_4_pi_i() * tau.sqrt());
        let diff: Vec<Complex64> = xs
            .iter()
            .zip(&fh)
            .zip(&snap.u)
            .map(|((x, f), u)| {
                let k = x / (2.0 * tau);
                let ghat = f * Complex64::from_polar(1.0, k * k);
                u - pre * Complex64::from_polar(1.0, x * x / (4.0 * tau)) * ghat
            })
            .collect();
        err.push(l2_norm(&diff, dx));
    }
    let tmin = t_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let (lx, ly): (Vec<f64>, Vec<f64>) = t_list
        .iter()
        .zip(&err)
        .filter(|(t, e)| **t <= 10.0 * tmin * (1.0 + 1e-12) && **e > 0.0)
        .map(|(t, e)| (t.ln(), e.ln()))
        .unzip();
    let slope = if lx.len() >= 2 {
        lsq_slope(&lx, &ly)
    } else {
        f64::NAN
    };
    Ok(SingularLimitTable {
        t: t_list.to_vec(),
        error: err,
        slope,
    })
}

fn lsq_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `‖f‖_{L²} + sup_{ξ² ≤ 1} |ξ|^{2γ}|f̂(ξ)|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct XGammaNorm {
    pub value: f64,
    pub l2: f64,
    pub weighted_sup: f64,
    pub xi_at_sup: f64,
    pub gamma: f64,
    /// `γ` lies in `(0, 1/4)`.
    pub gamma_in_range: bool,
}

/// Norm of samples `f` on a uniform grid starting at `x0` with step `dx`.
///
/// The supremum is located on the discrete frequency grid `2πk/(n·dx)` and
/// then refined by golden-section search on the continuous transform.
pub fn xgamma_norm(f: &[Complex64], x0: f64, dx: f64, gamma: f64) -> Result<XGammaNorm> {
    if f.is_empty() || !(dx > 0.0) {
        return Err(Error::Invalid(
            "xgamma_norm needs samples and dx > 0".into(),
        ));
    }
    let n = f.len();
    let l2 = l2_norm(f, dx);
    let transform = |xi: f64| -> Complex64 {
        f.iter()
            .enumerate()
            .map(|(j, z)| z * Complex64::from_polar(dx, -(x0 + j as f64 * dx) * xi))
            .sum()
    };
    let weight = |xi: f64| xi.abs().powf(2.0 * gamma) * transform(xi).norm();
    let dk = 2.0 * PI / (n as f64 * dx);
    let kmax = (1.0 / dk).floor() as i64;
    let mut best = (0.0_f64, 0.0_f64);
    for k in -kmax..=kmax {
        let xi = k as f64 * dk;
        let w = weight(xi);
        if w > best.0 {
            best = (w, xi);
        }
    }
    // Refine between the neighbouring grid frequencies, clipped to ξ² ≤ 1.
    let (lo, hi) = ((best.1 - dk).max(-1.0), (best.1 + dk).min(1.0));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (weight(c), weight(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = weight(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = weight(d);
        }
    }
    let xm = 0.5 * (a + b);
    let wm = weight(xm);
    let (ws, xs) = [
        (best.0, best.1),
        (wm, xm),
        (weight(lo), lo),
        (weight(hi), hi),
    ]
    .into_iter()
    .fold((0.0, 0.0), |acc, p| if p.0 > acc.0 { p } else { acc });
    Ok(XGammaNorm {
        value: l2 + ws,
        l2,
        weighted_sup: ws,
        xi_at_sup: xs,
        gamma,
        gamma_in_range: gamma > 0.0 && gamma < 0.25,
    })
}

/// Run manifest of an NLS evolution.
#[derive(Debug, Clone, Serialize)]
pub struct NlsManifest {
    pub a: f64,
    pub sign: NlsSign,
    pub tau_grid: Vec<f64>,
    pub grid: NlsGrid,
    pub scheme: String,
}

impl Trajectory {
    pub fn manifest(&self) -> NlsManifest {
        NlsManifest {
            a: self.equation.a,
            sign: self.equation.sign,
            tau_grid: self.taus(),
            grid: self.grid,
            scheme: self.scheme.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nonlinear_flow_preserves_modulus_and_solves_its_ode() {
        let eq = derive_u_evolution(0.5, NlsSign::Focusing);
        let u = Complex64::new(0.1, -0.05);
        let v = eq.nonlinear_flow(u, 2.0, 2.5);
        assert!(((0.5 + v).norm() - (0.5 + u).norm()).abs() < 1e-15);
        // Derivative of the flow at tau2 = tau1 equals the nonlinear part of the rhs.
        let h = 1e-6;
        let d =
            (eq.nonlinear_flow(u, 2.0, 2.0 + h) - eq.nonlinear_flow(u, 2.0, 2.0 - h)) / (2.0 * h);
        let want = eq.rhs(2.0, u, Complex64::new(0.0, 0.0));
        assert!((d - want).norm() < 1e-8);
    }

    #[test]
    fn zero_is_a_fixed_point_of_the_rhs() {
        let eq = derive_u_evolution(0.7, NlsSign::Defocusing);
        assert_eq!(
            eq.rhs(3.0, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
            Complex64::new(0.0, 0.0)
        );
        assert!((eq.linearized_coupling(2.0) + 0.49 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn zero_parameter_reduces_to_plain_cubic_nls() {
        let eq = derive_u_evolution(0.0, NlsSign::Focusing);
        let u = Complex64::new(0.3, 0.4);
        let uxx = Complex64::new(-1.0, 2.0);
        let want = I * uxx + I * (0.25 / 4.0) * u;
        assert!((eq.rhs(2.0, u, uxx) - want).norm() < 1e-15);
    }

    #[test]
    fn grid_wavenumbers_are_in_fft_order() {
        let g = NlsGrid::new(PI, 16).unwrap();
        let k = g.wavenumbers();
        assert_eq!(&k[..3], &[0.0, 1.0, 2.0]);
        assert_eq!(k[8], -8.0);
        assert_eq!(k[15], -1.0);
        assert!(NlsGrid::new(PI, 8).is_err());
    }
}
