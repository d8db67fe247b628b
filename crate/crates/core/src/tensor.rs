//! Small dense tensor kernel for 2×2 and 3×3 matrices.
//!
//! Everything downstream (energies, stresses, invariant maps) is built on the
//! spectral data of the right stretch tensor `U = sqrt(FᵀF)`. The symmetric
//! eigensolvers here are closed-form: the 2×2 case uses the trace/determinant
//! formula with an axis-aligned branch for (nearly) equal eigenvalues, and the
//! 3×3 case uses the trigonometric Cardano solution followed by deflation of
//! the best-separated eigenpair onto a 2×2 problem.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute eigenvalue floor below which a symmetric matrix is not treated as SPD.
pub const SPD_FLOOR: f64 = 1e-14;

/// Relative eigenvalue gap below which the 2×2 solver returns axis-aligned vectors.
pub const EQUAL_EIGEN_GAP: f64 = 1e-12;

/// Dense 2×2 or 3×3 real matrix. Entries outside the leading `dim×dim` block are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    dim: usize,
    a: [[f64; 3]; 3],
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "matrix dimension must be 2 or 3");
        Self { dim, a: [[0.0; 3]; 3] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn from_rows2(r: [[f64; 2]; 2]) -> Self {
        let mut m = Self::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                m.a[i][j] = r[i][j];
            }
        }
        m
    }

    pub fn from_rows3(r: [[f64; 3]; 3]) -> Self {
        Self { dim: 3, a: r }
    }

    /// Builds a matrix from 4 (2D) or 9 (3D) row-major entries.
    pub fn from_row_major(values: &[f64]) -> Result<Self> {
        let dim = match values.len() {
            4 => 2,
            9 => 3,
            n => {
                return Err(Error::InvalidInput(format!(
                    "expected 4 or 9 matrix entries, got {n}"
                )))
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.a[i][j] = values[i * dim + j];
            }
        }
        Ok(m)
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.a[i][i] = *v;
        }
        m
    }

    /// Counterclockwise planar rotation.
    pub fn rotation2(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::from_rows2([[c, -s], [s, c]])
    }

    /// Rotation about a unit `axis` by `angle` (Rodrigues).
    pub fn rotation3(axis: [f64; 3], angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let k = [axis[0] / n, axis[1] / n, axis[2] / n];
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Self::from_rows3([
            [
                c + k[0] * k[0] * t,
                k[0] * k[1] * t - k[2] * s,
                k[0] * k[2] * t + k[1] * s,
            ],
            [
                k[1] * k[0] * t + k[2] * s,
                c + k[1] * k[1] * t,
                k[1] * k[2] * t - k[0] * s,
            ],
            [
                k[2] * k[0] * t - k[1] * s,
                k[2] * k[1] * t + k[0] * s,
                c + k[2] * k[2] * t,
            ],
        ])
    }

    /// Dyadic product `ξ ⊗ η`.
    pub fn outer(xi: &[f64], eta: &[f64]) -> Self {
        assert_eq!(xi.len(), eta.len());
        let mut m = Self::zeros(xi.len());
        for i in 0..xi.len() {
            for j in 0..eta.len() {
                m.a[i][j] = xi[i] * eta[j];
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        self.a[i][j] = v;
    }

    /// Row-major entries of the leading `dim×dim` block.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.push(self.a[i][j]);
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.a[i][j] = self.a[j][i];
            }
        }
        m
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        for row in m.a.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    pub fn det(&self) -> f64 {
        let a = &self.a;
        match self.dim {
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += self.a[i][j] * other.a[i][j];
            }
        }
        s
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max(self.a[i][j].abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().flatten().all(|v| v.is_finite())
    }

    /// `Cof A`, built from signed minors so that it exists for singular `A`.
    pub fn cofactor(&self) -> Self {
        let a = &self.a;
        match self.dim {
            2 => Self::from_rows2([[a[1][1], -a[1][0]], [-a[0][1], a[0][0]]]),
            _ => {
                let mut c = Self::zeros(3);
                for i in 0..3 {
                    for j in 0..3 {
                        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
                        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
                        // cyclic index order absorbs the (-1)^(i+j) sign
                        c.a[i][j] = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
                    }
                }
                c
            }
        }
    }

    /// Inverse via the cofactor formula; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(self.cofactor().transpose().scale(1.0 / d))
    }

    /// `A^{-T}`; `None` when singular.
    pub fn inverse_transpose(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(self.cofactor().scale(1.0 / d))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.a[i][j] * v[j]).sum())
            .collect()
    }
}

impl Add for Mat {
    type Output = Mat;
    fn add(mut self, rhs: Mat) -> Mat {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..3 {
            for j in 0..3 {
                self.a[i][j] += rhs.a[i][j];
            }
        }
        self
    }
}

impl Sub for Mat {
    type Output = Mat;
    fn sub(mut self, rhs: Mat) -> Mat {
        debug_assert_eq!(self.dim, rhs.dim);
        for i in 0..3 {
            for j in 0..3 {
                self.a[i][j] -= rhs.a[i][j];
            }
        }
        self
    }
}

impl Mul for Mat {
    type Output = Mat;
    fn mul(self, rhs: Mat) -> Mat {
        debug_assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self.a[i][k] * rhs.a[k][j];
                }
                m.a[i][j] = s;
            }
        }
        m
    }
}

/// Symmetric matrix; symmetry is enforced on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymMat(Mat);

impl SymMat {
    /// Symmetrizes `m` as `(m + mᵀ)/2`.
    pub fn from_mat(m: &Mat) -> Self {
        let mut s = *m;
        for i in 0..m.dim {
            for j in (i + 1)..m.dim {
                let v = 0.5 * (m.a[i][j] + m.a[j][i]);
                s.a[i][j] = v;
                s.a[j][i] = v;
            }
        }
        SymMat(s)
    }

    pub fn identity(dim: usize) -> Self {
        SymMat(Mat::identity(dim))
    }

    pub fn diag(values: &[f64]) -> Self {
        SymMat(Mat::diag(values))
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn eigen(&self) -> EigenData {
        match self.0.dim {
            2 => eigen_sym2(&self.0),
            _ => eigen_sym3(&self.0),
        }
    }
}

/// Spectral data of a symmetric matrix: eigenvalues sorted descending and the
/// matching orthonormal eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenData {
    pub values: [f64; 3],
    pub vectors: Mat,
}

impl EigenData {
    pub fn dim(&self) -> usize {
        self.vectors.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values[..self.dim()]
    }

    /// `Q diag(f(λ_i)) Qᵀ`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> SymMat {
        let fv: Vec<f64> = self.values().iter().map(|&l| f(l)).collect();
        self.compose(&fv)
    }

    /// `Q diag(principal) Qᵀ` in this eigenbasis.
    pub fn compose(&self, principal: &[f64]) -> SymMat {
        let n = self.dim();
        let fv = principal;
        let q = &self.vectors.a;
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += q[i][k] * fv[k] * q[j][k];
                }
                m.a[i][j] = s;
                m.a[j][i] = s;
            }
        }
        SymMat(m)
    }

    pub fn reconstruct(&self) -> SymMat {
        self.map(|l| l)
    }
}

fn eigen_sym2(m: &Mat) -> EigenData {
    let (a, b, c) = (m.a[0][0], 0.5 * (m.a[0][1] + m.a[1][0]), m.a[1][1]);
    let (l1, l2, cos, sin) = sym2_parts(a, b, c);
    let mut vectors = Mat::zeros(2);
    vectors.a[0][0] = cos;
    vectors.a[1][0] = sin;
    vectors.a[0][1] = -sin;
    vectors.a[1][1] = cos;
    EigenData { values: [l1, l2, 0.0], vectors }
}

/// Eigenvalues `l1 ≥ l2` of `[[a, b], [b, c]]` and the unit eigenvector `(cos, sin)` of `l1`.
fn sym2_parts(a: f64, b: f64, c: f64) -> (f64, f64, f64, f64) {
    let mean = 0.5 * (a + c);
    let half = 0.5 * (a - c);
    let r = half.hypot(b);
    let l1 = mean + r;
    let l2 = mean - r;
    if r <= EQUAL_EIGEN_GAP * (l1.abs() + l2.abs()) {
        // nearly equal eigenvalues: the eigenbasis is arbitrary, keep it axis-aligned
        return if a >= c { (a, c, 1.0, 0.0) } else { (c, a, 0.0, 1.0) };
    }
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let (sin, cos) = theta.sin_cos();
    (l1, l2, cos, sin)
}

fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn dot3(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn normalize3(u: [f64; 3]) -> [f64; 3] {
    let n = dot3(u, u).sqrt();
    [u[0] / n, u[1] / n, u[2] / n]
}

fn sym3_apply(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [dot3(m[0], v), dot3(m[1], v), dot3(m[2], v)]
}

/// Characteristic polynomial `det(λI − D)` and its derivative.
fn char_poly(m: &[[f64; 3]; 3], lambda: f64) -> (f64, f64) {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let c2 = m[0][0] * m[1][1] + m[1][1] * m[2][2] + m[0][0] * m[2][2]
        - m[0][1] * m[1][0]
        - m[1][2] * m[2][1]
        - m[0][2] * m[2][0];
    let det = Mat::from_rows3(*m).det();
    let p = ((lambda - tr) * lambda + c2) * lambda - det;
    let dp = (3.0 * lambda - 2.0 * tr) * lambda + c2;
    (p, dp)
}

fn eigen_sym3(m: &Mat) -> EigenData {
    let scale = m.max_abs();
    if scale == 0.0 || !scale.is_finite() {
        return EigenData { values: [0.0; 3], vectors: Mat::identity(3) };
    }
    let s = SymMat::from_mat(&m.scale(1.0 / scale)).0;
    let q = s.trace() / 3.0;
    let mut c = s;
    for i in 0..3 {
        c.a[i][i] -= q;
    }
    let p2 = c.dot(&c) / 6.0;
    if p2 <= 1e-30 {
        let v = scale * q;
        return EigenData { values: [v, v, v], vectors: Mat::identity(3) };
    }
    let p = p2.sqrt();
    // D = (S − qI)/p has eigenvalues in [-2, 2]
    let d = c.scale(1.0 / p).a;
    let r = (0.5 * Mat::from_rows3(d).det()).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let mut beta = [
        2.0 * phi.cos(),
        0.0,
        2.0 * (phi + 2.0 * PI / 3.0).cos(),
    ];
    beta[1] = -beta[0] - beta[2];
    for b in beta.iter_mut() {
        let (f, df) = char_poly(&d, *b);
        if df.abs() > 1e-8 {
            let nb = *b - f / df;
            if char_poly(&d, nb).0.abs() < f.abs() {
                *b = nb;
            }
        }
    }
    beta.sort_by(|x, y| y.total_cmp(x));

    // deflate around the eigenvalue with the larger gap to its neighbour
    let isolated_top = beta[0] - beta[1] >= beta[1] - beta[2];
    let target = if isolated_top { beta[0] } else { beta[2] };
    let rows = [
        [d[0][0] - target, d[0][1], d[0][2]],
        [d[1][0], d[1][1] - target, d[1][2]],
        [d[2][0], d[2][1], d[2][2] - target],
    ];
    let candidates = [
        cross(rows[0], rows[1]),
        cross(rows[0], rows[2]),
        cross(rows[1], rows[2]),
    ];
    let best = candidates
        .iter()
        .copied()
        .max_by(|x, y| dot3(*x, *x).total_cmp(&dot3(*y, *y)))
        .unwrap();
    let v = normalize3(best);
    let u = if v[0].abs() > v[1].abs() {
        normalize3([-v[2], 0.0, v[0]])
    } else {
        normalize3([0.0, v[2], -v[1]])
    };
    let w = cross(v, u);
    let lv = dot3(v, sym3_apply(&d, v));
    let du = sym3_apply(&d, u);
    let dw = sym3_apply(&d, w);
    let (la, lb, cs, sn) = sym2_parts(dot3(u, du), 0.5 * (dot3(u, dw) + dot3(w, du)), dot3(w, dw));
    let va = [
        cs * u[0] + sn * w[0],
        cs * u[1] + sn * w[1],
        cs * u[2] + sn * w[2],
    ];
    let vb = cross(v, va);

    let mut pairs = [(lv, v), (la, va), (lb, vb)];
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut vectors = Mat::zeros(3);
    let mut values = [0.0; 3];
    for (k, (l, vec)) in pairs.iter().enumerate() {
        values[k] = scale * (q + p * l);
        for i in 0..3 {
            vectors.a[i][k] = vec[i];
        }
    }
    EigenData { values, vectors }
}

/// Spectral data of `U = sqrt(FᵀF)`: principal stretches (descending) and
/// right principal directions.
///
/// The smallest stretch is recovered from `det F` so that strongly compressed
/// states keep full relative accuracy.
pub fn stretch_eigen(f: &Mat) -> Result<EigenData> {
    let det = f.det();
    if !(det > 0.0) {
        return Err(Error::NonPositiveDeterminant { det });
    }
    let c = SymMat::from_mat(&(f.transpose() * *f));
    let mut eig = c.eigen();
    match f.dim {
        2 => {
            let (a, b, cc, d) = (f.a[0][0], f.a[0][1], f.a[1][0], f.a[1][1]);
            let s1 = 0.5 * ((a + d).hypot(cc - b) + (a - d).hypot(cc + b));
            eig.values = [s1, det / s1, 0.0];
        }
        _ => {
            let s1 = eig.values[0].max(0.0).sqrt();
            let s2 = eig.values[1].max(0.0).sqrt();
            let s3 = det / (s1 * s2);
            eig.values = [s1, s2, s3];
            if !(s3 <= s2) {
                eig.values = [s1, s2.max(s3), s2.min(s3)];
            }
        }
    }
    Ok(eig)
}

/// Right stretch tensor `U`, the SPD square root of `FᵀF`.
pub fn right_stretch(f: &Mat) -> Result<SymMat> {
    Ok(stretch_eigen(f)?.reconstruct())
}

/// Principal stretches of `F`, sorted descending.
pub fn principal_stretches(f: &Mat) -> Result<Vec<f64>> {
    Ok(stretch_eigen(f)?.values().to_vec())
}

/// Matrix logarithm of an SPD matrix through its eigen-data.
pub fn spd_log(a: &SymMat) -> Result<SymMat> {
    let eig = a.eigen();
    let min = eig.values().iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > SPD_FLOOR) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(eig.map(f64::ln))
}

/// Matrix exponential of a symmetric matrix along the same eigen path as [`spd_log`].
pub fn sym_exp(a: &SymMat) -> SymMat {
    a.eigen().map(f64::exp)
}

/// `dev_n A = A − (tr A / n)·1`.
pub fn deviator(a: &SymMat) -> SymMat {
    let n = a.dim();
    let mean = a.trace() / n as f64;
    let mut m = *a.as_mat();
    for i in 0..n {
        m.a[i][i] -= mean;
    }
    SymMat(m)
}

/// Location of a planar invariant pair relative to `D(i1,i2) = {i1² − 4 i2 > 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    InteriorD,
    OnGamma2,
    Outside,
}

/// Principal invariants of a stretch tensor with the planar domain flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantPoint {
    pub i1: f64,
    pub i2: f64,
    pub i3: Option<f64>,
    pub region: Region,
}

impl InvariantPoint {
    /// Planar point `(i1, i2)` classified against the parabola `γ2: i1² = 4 i2`.
    pub fn planar(i1: f64, i2: f64) -> Self {
        let disc = i1 * i1 - 4.0 * i2;
        let region = if disc.abs() <= 1e-12 * i1 * i1 {
            Region::OnGamma2
        } else if disc > 0.0 {
            Region::InteriorD
        } else {
            Region::Outside
        };
        Self { i1, i2, i3: None, region }
    }
}

/// Principal invariants of an SPD stretch tensor (`tr U, det U` in 2D; `tr U, tr Cof U, det U` in 3D).
pub fn invariants(u: &SymMat) -> Result<InvariantPoint> {
    let eig = u.eigen();
    let min = eig.values().iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > SPD_FLOOR) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let m = u.as_mat();
    Ok(match u.dim() {
        2 => InvariantPoint::planar(m.trace(), m.det()),
        _ => {
            let i1 = m.trace();
            let i2 = m.cofactor().trace();
            let i3 = m.det();
            // only the planar domain is tracked; a 3D point is realized by construction
            InvariantPoint { i1, i2, i3: Some(i3), region: Region::InteriorD }
        }
    })
}

/// Inverse of the planar invariant map: `(λ1, λ2)` with `λ1 ≥ λ2 > 0`.
///
/// The smaller root is taken as `i2 / λ1`, which stays accurate when `i2 ≪ i1²`.
pub fn invariants_to_eigenvalues(p: &InvariantPoint) -> Result<(f64, f64)> {
    if p.i3.is_some() {
        return Err(Error::UnsupportedDimension(3));
    }
    let (i1, i2) = (p.i1, p.i2);
    let disc = i1 * i1 - 4.0 * i2;
    if disc < 0.0 && disc.abs() > 1e-12 * i1 * i1 {
        return Err(Error::OutsideDomain { i1, i2, discriminant: disc });
    }
    if !(i1 > 0.0 && i2 > 0.0) {
        return Err(Error::OutsideDomain { i1, i2, discriminant: disc });
    }
    let r = disc.max(0.0).sqrt();
    let l1 = 0.5 * (i1 + r);
    Ok((l1, i2 / l1))
}

/// `Cof A`.
pub fn cofactor(a: &Mat) -> Mat {
    a.cofactor()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn right_stretch_identity_and_diagonal() {
        let u = right_stretch(&Mat::identity(2)).unwrap();
        assert!((*u.as_mat() - Mat::identity(2)).norm() < 1e-15);
        let u = right_stretch(&Mat::diag(&[3.0, 1.0])).unwrap();
        assert!((*u.as_mat() - Mat::diag(&[3.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn right_stretch_removes_left_rotation() {
        let f = Mat::rotation2(PI / 4.0) * Mat::diag(&[2.0, 0.5]);
        let u = right_stretch(&f).unwrap();
        assert!((*u.as_mat() - Mat::diag(&[2.0, 0.5])).norm() < 1e-14);
    }

    #[test]
    fn right_stretch_rejects_reflection() {
        let err = right_stretch(&Mat::diag(&[-1.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::NonPositiveDeterminant { .. }));
        assert!(right_stretch(&Mat::zeros(3)).is_err());
    }

    #[test]
    fn spd_log_cases() {
        let l = spd_log(&SymMat::diag(&[2.0, 5.0])).unwrap();
        assert!(close(l.as_mat().get(0, 0), 2f64.ln(), 1e-15));
        assert!(close(l.as_mat().get(1, 1), 5f64.ln(), 1e-15));
        assert!(l.as_mat().get(0, 1).abs() < 1e-16);

        assert!(spd_log(&SymMat::identity(3)).unwrap().norm() < 1e-15);

        // [[2,1],[1,2]] = Q diag(3,1) Qᵀ with Q the 45° rotation
        let a = SymMat::from_mat(&Mat::from_rows2([[2.0, 1.0], [1.0, 2.0]]));
        let l = spd_log(&a).unwrap();
        let h = 0.5 * 3f64.ln();
        let expected = Mat::from_rows2([[h, h], [h, h]]);
        assert!((*l.as_mat() - expected).norm() < 1e-15);
    }

    #[test]
    fn spd_log_rejects_indefinite() {
        let a = SymMat::diag(&[1.0, -1.0]);
        assert!(matches!(spd_log(&a), Err(Error::NotPositiveDefinite { .. })));
        let a = SymMat::diag(&[1.0, 1e-15, 2.0]);
        assert!(spd_log(&a).is_err());
    }

    #[test]
    fn deviator_cases() {
        assert!(deviator(&SymMat::identity(2)).norm() == 0.0);
        let d = deviator(&SymMat::diag(&[1.0, -1.0]));
        assert_eq!(*d.as_mat(), Mat::diag(&[1.0, -1.0]));
        let d = deviator(&SymMat::diag(&[3.0, 1.0]));
        assert_eq!(*d.as_mat(), Mat::diag(&[1.0, -1.0]));
    }

    #[test]
    fn invariants_cases() {
        let p = invariants(&SymMat::diag(&[3.0, 1.0])).unwrap();
        assert_eq!((p.i1, p.i2, p.region), (4.0, 3.0, Region::InteriorD));
        let p = invariants(&SymMat::diag(&[2.0, 2.0])).unwrap();
        assert_eq!((p.i1, p.i2, p.region), (4.0, 4.0, Region::OnGamma2));
        let p = invariants(&SymMat::diag(&[1.0, 2.0, 3.0])).unwrap();
        assert!(close(p.i1, 6.0, 1e-15) && close(p.i2, 11.0, 1e-15));
        assert!(close(p.i3.unwrap(), 6.0, 1e-15));
        assert!(invariants(&SymMat::diag(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn invariants_to_eigenvalues_cases() {
        let e = invariants_to_eigenvalues(&InvariantPoint::planar(4.0, 3.0)).unwrap();
        assert_eq!(e, (3.0, 1.0));
        let e = invariants_to_eigenvalues(&InvariantPoint::planar(4.0, 4.0)).unwrap();
        assert_eq!(e, (2.0, 2.0));
        let e = invariants_to_eigenvalues(&InvariantPoint::planar(2.5, 1.0)).unwrap();
        assert!(close(e.0, 2.0, 1e-15) && close(e.1, 0.5, 1e-15));
        let err = invariants_to_eigenvalues(&InvariantPoint::planar(2.0, 4.0)).unwrap_err();
        assert!(matches!(err, Error::OutsideDomain { .. }));
    }

    #[test]
    fn region_tolerance_band() {
        assert_eq!(InvariantPoint::planar(4.0, 4.0 - 1e-12).region, Region::OnGamma2);
        assert_eq!(InvariantPoint::planar(4.0, 4.0 - 1e-9).region, Region::InteriorD);
        assert_eq!(InvariantPoint::planar(4.0, 4.0 + 1e-9).region, Region::Outside);
    }

    #[test]
    fn cofactor_cases() {
        assert_eq!(cofactor(&Mat::identity(3)), Mat::identity(3));
        assert_eq!(cofactor(&Mat::diag(&[2.0, 5.0])), Mat::diag(&[5.0, 2.0]));
        assert_eq!(cofactor(&Mat::diag(&[1.0, 2.0, 3.0])), Mat::diag(&[6.0, 3.0, 2.0]));
        // singular input is fine: A (Cof A)ᵀ = det(A) 1 = 0
        let a = Mat::from_rows3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]]);
        assert!((a * cofactor(&a).transpose()).norm() < 1e-14);
    }

    #[test]
    fn eigen3_repeated_and_clustered() {
        let e = SymMat::identity(3).eigen();
        assert_eq!(e.values, [1.0, 1.0, 1.0]);
        let a = SymMat::diag(&[2.0, 2.0, 1.0]);
        let e = a.eigen();
        assert!((*e.reconstruct().as_mat() - *a.as_mat()).norm() < 1e-14);
        let r = Mat::rotation3([1.0, 2.0, 3.0], 0.7);
        let a = SymMat::from_mat(&(r * Mat::diag(&[1.0 + 1e-13, 1.0, 5.0]) * r.transpose()));
        let e = a.eigen();
        assert!((*e.reconstruct().as_mat() - *a.as_mat()).norm() < 1e-13);
        assert!(e.values[0] >= e.values[1] && e.values[1] >= e.values[2]);
    }
}
