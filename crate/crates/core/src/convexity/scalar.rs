//! Scalar inequalities behind the invariant-space convexity argument.
//!
//! Several of them cancel to high order as the eigenvalues merge
//! (`a → 1`, `z → 0`). Near that end they are evaluated through the
//! series of `coth ξ − 1/ξ` and `atanh z − z`; away from it the printed
//! formulas are used as-is.

use serde::{Deserialize, Serialize};

use super::{tested, Axis, Outcome, ScanGrid, ScanReport};
use crate::energy::psi;
use crate::error::{Error, Result};

/// Below this `z = R/i1` the printed formulas lose all accuracy.
pub const DEGENERATE_Z: f64 = 0.01;

/// `coth ξ − 1/ξ`, accurate for small `ξ`.
pub fn coth_minus_inv(xi: f64) -> f64 {
    let x = xi.abs();
    let v = if x < 0.25 {
        let x2 = x * x;
        // Laurent coefficients of coth without the 1/x term
        x * (1.0 / 3.0
            + x2 * (-1.0 / 45.0
                + x2 * (2.0 / 945.0
                    + x2 * (-1.0 / 4725.0 + x2 * (2.0 / 93555.0 - x2 * 1382.0 / 638512875.0)))))
    } else {
        1.0 / x.tanh() - 1.0 / x
    };
    v.copysign(xi)
}

/// `1/sinh² ξ − 1/ξ²`, accurate for small `ξ`.
fn csch2_minus_inv2(xi: f64) -> f64 {
    let x = xi.abs();
    if x < 0.25 {
        let x2 = x * x;
        -1.0 / 3.0
            + x2 * (1.0 / 15.0
                + x2 * (-2.0 / 189.0 + x2 * (1.0 / 675.0 + x2 * (-2.0 / 10395.0 + x2 * 15202.0 / 638512875.0))))
    } else {
        let s = x.sinh();
        1.0 / (s * s) - 1.0 / (x * x)
    }
}

/// `atanh z − z`, accurate for small `z`.
fn atanh_minus_id(z: f64) -> f64 {
    if z.abs() < 0.1 {
        let z2 = z * z;
        let mut term = z * z2;
        let mut sum = 0.0;
        for j in 1..9 {
            sum += term / (2 * j + 1) as f64;
            term *= z2;
        }
        sum
    } else {
        z.atanh() - z
    }
}

fn domain(function: &'static str, detail: String) -> Error {
    Error::Domain { function, detail }
}

/// `r(t) = k t² − t + 1`.
pub fn scalar_r(t: f64, k: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain("scalar_r", format!("t must be positive, got {t}")));
    }
    Ok(k * t * t - t + 1.0)
}

/// `r̂(t) = k (t² − 1) log² t − (t² + 1) log t + (t² − 1)`.
pub fn scalar_rhat(t: f64, k: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain("scalar_rhat", format!("t must be positive, got {t}")));
    }
    let l = t.ln();
    Ok(k * (t * t - 1.0) * l * l - (t * t + 1.0) * l + (t * t - 1.0))
}

fn check_a(function: &'static str, a: f64) -> Result<f64> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(domain(function, format!("a must exceed 1, got {a}")));
    }
    Ok(a.ln())
}

/// `t(a) = 1/log a + k log a − (a² + 1)/(a² − 1)`.
pub fn scalar_t_of_a(a: f64, k: f64) -> Result<f64> {
    let xi = check_a("scalar_t_of_a", a)?;
    Ok(k * xi - coth_minus_inv(xi))
}

/// `b(a) = k − 1/log² a + 4a²/(a² − 1)²`.
pub fn scalar_b_of_a(a: f64, k: f64) -> Result<f64> {
    let xi = check_a("scalar_b_of_a", a)?;
    Ok(k + csch2_minus_inv2(xi))
}

fn check_z(function: &'static str, z: f64) -> Result<()> {
    if !(z > 0.0 && z < 1.0) {
        return Err(domain(function, format!("z must lie in (0, 1), got {z}")));
    }
    Ok(())
}

/// `f7(z) = −(1 + z²) L + 2z (1 + k L²)` with `L = log((1+z)/(1−z))`.
pub fn f7(z: f64, k: f64) -> Result<f64> {
    check_z("f7", z)?;
    let l = 2.0 * z.atanh();
    if z < DEGENERATE_Z {
        Ok(2.0 * z * l * (k * l - coth_minus_inv(l)))
    } else {
        Ok(-(1.0 + z * z) * l + 2.0 * z * (1.0 + k * l * l))
    }
}

/// `2k z L² + 2z − L`.
fn h13(z: f64, k: f64) -> f64 {
    let l = 2.0 * z.atanh();
    if z < DEGENERATE_Z {
        2.0 * k * z * l * l - 2.0 * atanh_minus_id(z)
    } else {
        2.0 * k * z * l * l + 2.0 * z - l
    }
}

/// `2 i2 L + k i1 R L² + i1 R − i1² L` at `R = z i1`.
fn det_bracket(i1: f64, z: f64, k: f64) -> f64 {
    let r = z * i1;
    let l = 2.0 * z.atanh();
    if z < DEGENERATE_Z {
        i1 * i1 * z * l * (k * l - coth_minus_inv(l))
    } else {
        let i2 = (i1 * i1 - r * r) / 4.0;
        2.0 * i2 * l + k * i1 * r * l * l + i1 * r - i1 * i1 * l
    }
}

/// `2k R L² + 2R − i1 L` at `R = z i1`.
fn h10(i1: f64, z: f64, k: f64) -> f64 {
    let r = z * i1;
    let l = 2.0 * z.atanh();
    if z < DEGENERATE_Z {
        i1 * h13(z, k)
    } else {
        2.0 * k * r * l * l + 2.0 * r - i1 * l
    }
}

/// The scalar inequalities of the invariant-space convexity proof.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma {
    /// `∂ψ/∂i1 ≥ 0` on `D`.
    PsiMonotone,
    /// `b(a) ≥ 0` for `a > 1`.
    BOfA,
    /// `t(a) ≥ 0` for `a > 1`.
    TOfA,
    /// `f7(z) ≥ 0` for `z ∈ (0, 1)`.
    F7,
    /// Determinant bracket `≥ 0` for `0 < R < i1`.
    DetBracket,
    /// `2k z L² + 2z − L ≥ 0` for `z ∈ (0, 1)`.
    ZLog,
    /// `2k R L² + 2R − i1 L ≥ 0` for `0 < R < i1`.
    RLog,
}

impl Lemma {
    pub const ALL: [Lemma; 7] =
        [Lemma::PsiMonotone, Lemma::BOfA, Lemma::TOfA, Lemma::F7, Lemma::DetBracket, Lemma::ZLog, Lemma::RLog];

    pub fn id(&self) -> &'static str {
        match self {
            Lemma::PsiMonotone => "psi-monotone-in-i1",
            Lemma::BOfA => "b-of-a-nonnegative",
            Lemma::TOfA => "t-of-a-nonnegative",
            Lemma::F7 => "f7-nonnegative",
            Lemma::DetBracket => "det-bracket-nonnegative",
            Lemma::ZLog => "z-log-inequality",
            Lemma::RLog => "r-log-inequality",
        }
    }

    /// Smallest `k` for which the inequality holds on its whole domain.
    pub fn k_threshold(&self) -> f64 {
        match self {
            Lemma::PsiMonotone => 0.0,
            Lemma::BOfA | Lemma::TOfA | Lemma::F7 | Lemma::DetBracket => 1.0 / 3.0,
            Lemma::ZLog | Lemma::RLog => 1.0 / 8.0,
        }
    }
}

/// Sampling domains for [`verify_appendix_b`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixGrid {
    /// Points per one-dimensional lemma; two-dimensional lemmas use `√points` per axis.
    pub points: usize,
    pub i1: (f64, f64),
    pub z: (f64, f64),
    /// Range of `a − 1`.
    pub a_minus_one: (f64, f64),
    pub tolerance: f64,
}

impl Default for AppendixGrid {
    fn default() -> Self {
        Self { points: 10_000, i1: (0.1, 10.0), z: (1e-4, 1.0 - 1e-4), a_minus_one: (1e-6, 1e6), tolerance: 1e-10 }
    }
}

impl AppendixGrid {
    pub fn with_points(points: usize) -> Self {
        Self { points, ..Self::default() }
    }

    fn side(&self) -> usize {
        ((self.points as f64).sqrt().round() as usize).max(2)
    }

    fn grid_1d(&self, name: &str, range: (f64, f64)) -> ScanGrid {
        ScanGrid::new(&[(name, Axis::geometric(range.0, range.1, self.points.max(2)))])
    }

    fn grid_2d(&self) -> ScanGrid {
        let n = self.side();
        ScanGrid::new(&[("i1", Axis::geometric(self.i1.0, self.i1.1, n)), ("z", Axis::geometric(self.z.0, self.z.1, n))])
    }
}

/// Central (or, at the edge of `D`, forward) difference of `ψ` in `i1`,
/// scaled by `i1/ψ`.
fn psi_i1_slope(i1: f64, z: f64, k: f64) -> Option<(f64, f64)> {
    let i2 = i1 * i1 * (1.0 - z * z) / 4.0;
    let h = 1e-6 * i1;
    let f0 = psi(i1, i2, k).ok()?;
    let fp = psi(i1 + h, i2, k).ok()?;
    let d = match psi(i1 - h, i2, k) {
        Ok(fm) if (i1 - h) * (i1 - h) > 4.0 * i2 => (fp - fm) / (2.0 * h),
        _ => (fp - f0) / h,
    };
    Some((d, d * i1 / f0))
}

/// Scans each lemma on its domain at parameter `k`; one report per [`Lemma`], in order.
pub fn verify_appendix_b(k: f64, grid: &AppendixGrid) -> Vec<ScanReport> {
    Lemma::ALL.iter().map(|lemma| verify_lemma(*lemma, k, grid)).collect()
}

pub fn verify_lemma(lemma: Lemma, k: f64, grid: &AppendixGrid) -> ScanReport {
    let tol = grid.tolerance;
    let claim = format!("{}@k={}", lemma.id(), k);
    match lemma {
        Lemma::PsiMonotone => ScanReport::scan(&claim, &grid.grid_2d(), tol, |p| {
            match psi_i1_slope(p[0], p[1], k) {
                Some((d, m)) => tested(p.to_vec(), d, m),
                None => Outcome::Skipped,
            }
        }),
        Lemma::BOfA | Lemma::TOfA => {
            let g = grid.grid_1d("a_minus_one", grid.a_minus_one);
            ScanReport::scan(&claim, &g, tol, |p| {
                let a = 1.0 + p[0];
                let xi = a.ln();
                if lemma == Lemma::BOfA {
                    let b = scalar_b_of_a(a, k).expect("a > 1");
                    tested(vec![a], b, b)
                } else {
                    let t = scalar_t_of_a(a, k).expect("a > 1");
                    tested(vec![a], t, t / xi)
                }
            })
        }
        Lemma::F7 | Lemma::ZLog => {
            let g = grid.grid_1d("z", grid.z);
            ScanReport::scan(&claim, &g, tol, |p| {
                let z = p[0];
                let l = 2.0 * z.atanh();
                if lemma == Lemma::F7 {
                    let v = f7(z, k).expect("z in (0,1)");
                    tested(vec![z], v, v / (2.0 * z * l * l))
                } else {
                    let v = h13(z, k);
                    tested(vec![z], v, v / (z * z * z))
                }
            })
        }
        Lemma::DetBracket | Lemma::RLog => ScanReport::scan(&claim, &grid.grid_2d(), tol, |p| {
            let (i1, z) = (p[0], p[1]);
            let l = 2.0 * z.atanh();
            if lemma == Lemma::DetBracket {
                let v = det_bracket(i1, z, k);
                tested(vec![i1, z], v, v / (i1 * i1 * z * l * l))
            } else {
                let v = h10(i1, z, k);
                tested(vec![i1, z], v, v / (i1 * z * z * z))
            }
        }),
    }
}
