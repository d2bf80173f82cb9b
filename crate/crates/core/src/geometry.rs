//! Vectors, orthonormal frames, sampled curves, finite differences and rigid
//! alignment.
//!
//! Everything here is a plain value type or a pure function.

use std::ops::{Add, Mul, Sub};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real 3-vector (tangents, points, corner vectors).
pub type Vec3 = Vector3<f64>;
/// Complex 3-vector (complex normals `N = e₂-part + i e₃-part`).
pub type CVec3 = Vector3<Complex64>;

/// Split a complex vector into its real and imaginary parts.
pub fn re_im(v: &CVec3) -> (Vec3, Vec3) {
    (v.map(|z| z.re), v.map(|z| z.im))
}

/// Assemble `re + i im`.
pub fn complexify(re: &Vec3, im: &Vec3) -> CVec3 {
    CVec3::new(
        Complex64::new(re.x, im.x),
        Complex64::new(re.y, im.y),
        Complex64::new(re.z, im.z),
    )
}

/// Euclidean (Hermitian) norm of a complex vector.
pub fn cnorm(v: &CVec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Multiply a complex vector by a complex scalar.
pub fn cscale(v: &CVec3, z: Complex64) -> CVec3 {
    v.map(|w| w * z)
}

/// Promote a real vector to a complex one.
pub fn to_complex(v: &Vec3) -> CVec3 {
    v.map(|x| Complex64::new(x, 0.0))
}

/// Orthonormal frame `(T, Re N, Im N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthoFrame {
    /// Unit tangent.
    pub t: Vec3,
    /// Complex normal; its real and imaginary parts complete `t` to a frame.
    pub n: CVec3,
}

impl OrthoFrame {
    /// The identity frame `(e₁, e₂ + i e₃)`.
    pub fn identity() -> Self {
        Self::from_matrix(&Matrix3::identity())
    }

    /// Frame from the columns `(T, Re N, Im N)` of a matrix.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        let t = m.column(0).into_owned();
        let re = m.column(1).into_owned();
        let im = m.column(2).into_owned();
        Self {
            t,
            n: complexify(&re, &im),
        }
    }

    /// Matrix with columns `(T, Re N, Im N)`.
    pub fn matrix(&self) -> Matrix3<f64> {
        let (re, im) = re_im(&self.n);
        Matrix3::from_columns(&[self.t, re, im])
    }

    /// `max |FᵀF − I|` entrywise together with `|det F − 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let m = self.matrix();
        let g = m.transpose() * m - Matrix3::identity();
        let e = g.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
        e.max((m.determinant() - 1.0).abs())
    }

    /// Nearest rotation in the Frobenius norm (polar decomposition).
    pub fn renormalize(&self) -> Self {
        Self::from_matrix(&nearest_rotation(&self.matrix()))
    }

    /// Apply a rotation to every vector of the frame.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        Self::from_matrix(&(r * self.matrix()))
    }
}

/// Nearest proper rotation to `m` via the polar factor of its SVD.
///
/// No column is privileged, unlike Gram-Schmidt.
pub fn nearest_rotation(m: &Matrix3<f64>) -> Matrix3<f64> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let mut d = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    u * d * v_t
}

/// Rotation by `angle` about the unit axis `axis` (Rodrigues).
pub fn axis_angle(axis: &Vec3, angle: f64) -> Matrix3<f64> {
    let k = axis.normalize();
    let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Matrix3::identity() + kx * angle.sin() + kx * kx * (1.0 - angle.cos())
}

/// Curve topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Periodic in the arclength parameter.
    Closed,
    /// Finite piece of an infinite curve with explicit endpoints.
    OpenTruncated,
}

/// Arclength-sampled space curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub topology: Topology,
    /// Strictly increasing arclength nodes.
    pub s: Vec<f64>,
    pub points: Vec<Vec3>,
    /// Optional unit tangent per node.
    pub tangents: Option<Vec<Vec3>>,
}

impl SampledCurve {
    /// Build a curve and check its structural invariants.
    pub fn new(
        topology: Topology,
        s: Vec<f64>,
        points: Vec<Vec3>,
        tangents: Option<Vec<Vec3>>,
    ) -> Result<Self> {
        if s.len() != points.len() {
            return Err(Error::Invalid("grid and point counts differ".into()));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("arclength grid not increasing".into()));
        }
        if let Some(t) = &tangents {
            if t.len() != s.len() {
                return Err(Error::Invalid("tangent count differs from grid".into()));
            }
        }
        Ok(Self {
            topology,
            s,
            points,
            tangents,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest relative mismatch between chord lengths and grid spacing.
    pub fn arclength_defect(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0_f64;
        for i in 0..n.saturating_sub(1) {
            let ds = self.s[i + 1] - self.s[i];
            let chord = (self.points[i + 1] - self.points[i]).norm();
            worst = worst.max((chord / ds - 1.0).abs());
        }
        worst
    }

    /// Largest deviation of `|T_i|` from one, or zero without tangents.
    pub fn tangent_norm_defect(&self) -> f64 {
        self.tangents.as_ref().map_or(0.0, |ts| {
            ts.iter()
                .fold(0.0_f64, |m, t| m.max((t.norm() - 1.0).abs()))
        })
    }

    /// Centroid of the nodes.
    pub fn centroid(&self) -> Vec3 {
        self.points.iter().fold(Vec3::zeros(), |acc, p| acc + p) / self.len() as f64
    }

    /// Largest pairwise node distance.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0_f64;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }
}

/// Derivative order accepted by [`finite_diff`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrder {
    First,
    Second,
}

fn uniform_step(grid: &[f64]) -> Result<f64> {
    if grid.len() < 5 {
        return Err(Error::Invalid(format!(
            "finite differences need at least 5 nodes, got {}",
            grid.len()
        )));
    }
    let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::Invalid("grid must be increasing".into()));
    }
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::Invalid("grid is not uniform".into()));
        }
    }
    Ok(h)
}

/// Second-order finite-difference derivative of sampled values.
///
/// Interior nodes use centered stencils. Open curves use one-sided
/// four-point stencils at the two ends (third order for the first
/// derivative, second order for the second); closed curves wrap periodically
/// (the grid then lists each node once, without repeating the first).
pub fn finite_diff<T>(
    values: &[T],
    grid: &[f64],
    order: DiffOrder,
    topology: Topology,
) -> Result<Vec<T>>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    if values.len() != grid.len() {
        return Err(Error::Invalid("values and grid lengths differ".into()));
    }
    let h = uniform_step(grid)?;
    let n = values.len();
    let f = |i: usize| values[i];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let d = match (topology, i) {
            (Topology::Closed, _) => {
                let im = f((i + n - 1) % n);
                let ip = f((i + 1) % n);
                match order {
                    DiffOrder::First => (ip - im) * (0.5 / h),
                    DiffOrder::Second => (ip + im - f(i) * 2.0) * (1.0 / (h * h)),
                }
            }
            (Topology::OpenTruncated, 0) => match order {
                DiffOrder::First => {
                    (f(1) * 18.0 - f(0) * 11.0 - f(2) * 9.0 + f(3) * 2.0) * (1.0 / (6.0 * h))
                }
                DiffOrder::Second => {
                    (f(0) * 2.0 - f(1) * 5.0 + f(2) * 4.0 - f(3)) * (1.0 / (h * h))
                }
            },
            (Topology::OpenTruncated, j) if j == n - 1 => match order {
                DiffOrder::First => {
                    (f(j) * 11.0 - f(j - 1) * 18.0 + f(j - 2) * 9.0 - f(j - 3) * 2.0)
                        * (1.0 / (6.0 * h))
                }
                DiffOrder::Second => {
                    (f(j) * 2.0 - f(j - 1) * 5.0 + f(j - 2) * 4.0 - f(j - 3)) * (1.0 / (h * h))
                }
            },
            (Topology::OpenTruncated, j) => match order {
                DiffOrder::First => (f(j + 1) - f(j - 1)) * (0.5 / h),
                DiffOrder::Second => (f(j + 1) + f(j - 1) - f(j) * 2.0) * (1.0 / (h * h)),
            },
        };
        out.push(d);
    }
    Ok(out)
}

/// Result of a least-squares rigid alignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidAlignment {
    /// Rotation `R` with `R·b + translation ≈ a`.
    pub rotation: Matrix3<f64>,
    pub translation: Vec3,
    /// RMS distance between `a_i` and the aligned `b_i`.
    pub residual: f64,
}

fn centroid_of(p: &[Vec3]) -> Vec3 {
    p.iter().fold(Vec3::zeros(), |acc, x| acc + x) / p.len() as f64
}

fn is_collinear(p: &[Vec3], c: &Vec3) -> bool {
    let mut cov = Matrix3::zeros();
    for x in p {
        let d = x - c;
        cov += d * d.transpose();
    }
    let sv = cov.singular_values();
    let mut s: Vec<f64> = sv.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s[0] == 0.0 || s[1] <= 1e-12 * s[0]
}

/// Orthogonal Procrustes alignment of node set `b` onto `a` (Kabsch).
///
/// Nodes are matched by index; both sets must have the same size.
pub fn align_rigid_points(a: &[Vec3], b: &[Vec3]) -> Result<RigidAlignment> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Invalid(
            "alignment needs equal, non-empty node sets".into(),
        ));
    }
    let ca = centroid_of(a);
    let cb = centroid_of(b);
    if is_collinear(a, &ca) || is_collinear(b, &cb) {
        return Err(Error::Degenerate("collinear point set".into()));
    }
    let mut h = Matrix3::zeros();
    for (p, q) in a.iter().zip(b) {
        h += (q - cb) * (p - ca).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.expect("svd u");
    let v = svd.v_t.expect("svd v_t").transpose();
    let mut d = Matrix3::identity();
    if (v * u.transpose()).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let rotation = v * d * u.transpose();
    let translation = ca - rotation * cb;
    let ss: f64 = a
        .iter()
        .zip(b)
        .map(|(p, q)| (rotation * q + translation - p).norm_squared())
        .sum();
    Ok(RigidAlignment {
        rotation,
        translation,
        residual: (ss / a.len() as f64).sqrt(),
    })
}

/// [`align_rigid_points`] on the nodes of two sampled curves.
pub fn align_rigid(a: &SampledCurve, b: &SampledCurve) -> Result<RigidAlignment> {
    align_rigid_points(&a.points, &b.points)
}

/// Directed Hausdorff distance `max_{p∈a} min_{q∈b} |p − q|` with early break.
fn directed_hausdorff(a: &[Vec3], b: &[Vec3]) -> f64 {
    let mut cmax = 0.0_f64;
    for p in a {
        let mut cmin = f64::INFINITY;
        for q in b {
            let d = (p - q).norm_squared();
            if d < cmin {
                cmin = d;
                if cmin <= cmax {
                    break;
                }
            }
        }
        cmax = cmax.max(cmin);
    }
    cmax.sqrt()
}

/// Symmetric discrete Hausdorff distance between two node sets.
pub fn hausdorff_points(a: &[Vec3], b: &[Vec3]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

/// Symmetric discrete Hausdorff distance between the nodes of two curves.
pub fn hausdorff_distance(a: &SampledCurve, b: &SampledCurve) -> f64 {
    hausdorff_points(&a.points, &b.points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_frame_is_orthonormal() {
        let f = OrthoFrame::identity();
        assert!(f.orthonormality_error() < 1e-15);
        assert_eq!(f.t, Vec3::x());
    }

    #[test]
    fn renormalize_fixes_a_perturbed_frame() {
        let r = axis_angle(&Vec3::new(1.0, 2.0, 3.0), 0.7);
        let mut m = r;
        m[(0, 1)] += 1e-3;
        m[(2, 0)] -= 2e-3;
        let f = OrthoFrame::from_matrix(&m).renormalize();
        assert!(f.orthonormality_error() < 1e-12);
        assert!((f.matrix() - r).norm() < 5e-3);
    }

    #[test]
    fn second_derivative_of_quadratic_is_exact() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
        let v: Vec<f64> = grid.iter().map(|s| s * s).collect();
        let d2 = finite_diff(&v, &grid, DiffOrder::Second, Topology::OpenTruncated).unwrap();
        for x in d2 {
            assert_abs_diff_eq!(x, 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_short_and_non_uniform_grids() {
        let g = [0.0, 1.0, 2.0, 3.0];
        assert!(finite_diff(&[0.0; 4], &g, DiffOrder::First, Topology::OpenTruncated).is_err());
        let g = [0.0, 1.0, 2.0, 3.5, 4.0];
        assert!(finite_diff(&[0.0; 5], &g, DiffOrder::First, Topology::OpenTruncated).is_err());
    }

    #[test]
    fn collinear_sets_are_flagged() {
        let a: Vec<Vec3> = (0..5).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        assert!(matches!(
            align_rigid_points(&a, &a),
            Err(Error::Degenerate(_))
        ));
    }
}
