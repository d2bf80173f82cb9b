//! Gauss-Legendre rules and a Filon-type rule for `∫ e^{−ixξ} g(x) dx`.

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Reusable Gauss-Legendre rule mapped onto arbitrary panels.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    /// Iterate over `(x, w)` of the rule mapped to `[lo, hi]`.
    pub fn panel(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (lo + hi);
        let r = 0.5 * (hi - lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + r * x, r * w))
    }

    /// `∫_lo^hi f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> f64 {
        self.panel(lo, hi).map(|(x, w)| w * f(x)).sum()
    }
}

/// Weights `(w₀, w₁)` such that
/// `∫_{x₀}^{x₀+h} e^{−ixξ} (linear interpolant of g) dx = w₀ g₀ + w₁ g₁`.
fn filon_linear_weights(x0: f64, h: f64, xi: f64) -> (Complex64, Complex64) {
    let th = xi * h;
    let e0 = Complex64::from_polar(1.0, -xi * x0);
    if th.abs() < 1e-4 {
        // Series in θ to avoid cancellation.
        let i = Complex64::i();
        let w0 = h * (0.5 - i * th / 6.0 - th * th / 24.0);
        let w1 = h * (0.5 - i * th / 3.0 - th * th / 8.0);
        return (e0 * w0, e0 * w1);
    }
    // ∫₀¹ e^{−iθu}(1−u) du and ∫₀¹ e^{−iθu} u du.
    let i = Complex64::i();
    let em = Complex64::from_polar(1.0, -th);
    let j0 = (Complex64::new(1.0, 0.0) - em) / (i * th);
    let j1 = (em * (Complex64::new(1.0, 0.0) + i * th) - 1.0) / (th * th);
    (e0 * h * (j0 - j1), e0 * h * j1)
}

/// Filon-trapezoid approximation of `∫ e^{−ixξ} g(x) dx` for samples `g` on
/// the nodes `x` (any spacing), exact for piecewise-linear `g`.
pub fn filon_trapezoid(x: &[f64], g: &[Complex64], xi: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..x.len().saturating_sub(1) {
        let h = x[k + 1] - x[k];
        let (w0, w1) = filon_linear_weights(x[k], h, xi);
        acc += w0 * g[k] + w1 * g[k + 1];
    }
    acc
}
