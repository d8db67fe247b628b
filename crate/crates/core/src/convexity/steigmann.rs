//! Monotonicity and convexity of functions of the principal invariants.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{describe_grid, tested, Axis, Outcome, ScanGrid, ScanReport};
use crate::rng;
use crate::tensor::{InvariantPoint, Mat, Region, SymMat};

/// `i1⁴ − 4 i1² i2 + 2 i2²`: polyconvex as a function of `F` but not convex in `(i1, i2)`.
pub fn fixture_quartic(i1: f64, i2: f64) -> f64 {
    i1.powi(4) - 4.0 * i1 * i1 * i2 + 2.0 * i2 * i2
}

/// `‖Cof U‖² = i2² − 2 i1 i3`: decreasing in `i1` and not convex in `(i1, i2, i3)`.
pub fn fixture_cof_norm(i1: f64, i2: f64, i3: f64) -> f64 {
    i2 * i2 - 2.0 * i1 * i3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteigmannGrid {
    pub i1: Axis,
    pub i2: Axis,
    /// Random midpoint-convexity pairs, half of them straddling `γ2`.
    pub pairs: usize,
    pub seed: u64,
    /// Only test points of `D ∪ γ2` (for functions that are only meaningful there).
    pub restrict_to_d: bool,
}

impl Default for SteigmannGrid {
    fn default() -> Self {
        Self {
            i1: Axis::geometric(0.2, 10.0, 80),
            i2: Axis::geometric(0.01, 30.0, 80),
            pairs: 10_000,
            seed: 1,
            restrict_to_d: false,
        }
    }
}

const EPS: f64 = f64::EPSILON;

fn in_closure_d(i1: f64, i2: f64) -> bool {
    i1 > 0.0 && i2 > 0.0 && InvariantPoint::planar(i1, i2).region != Region::Outside
}

fn region_of(i1: f64, i2: f64) -> Region {
    InvariantPoint::planar(i1, i2).region
}

/// Monotonicity in `i1` and convexity of a planar invariant function.
///
/// Report 1 checks `∂ψ/∂i1 ≥ −tol` with a central difference of step
/// `10⁻⁶ i1`; the margin includes the stencil's roundoff bound.
/// Report 2 checks that the difference Hessian (steps `10⁻⁴ i1`, `10⁻⁴ i2`,
/// in scaled coordinates) is positive semidefinite at grid points whose
/// stencil does not cross `γ2`, and that `ψ((p+q)/2) ≤ (ψ(p)+ψ(q))/2` on
/// random pairs.
pub fn steigmann_check_2d<F>(psi_fn: F, grid: &SteigmannGrid) -> (ScanReport, ScanReport)
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let g = ScanGrid::new(&[("i1", grid.i1), ("i2", grid.i2)]);
    let keep = |i1: f64, i2: f64| !grid.restrict_to_d || in_closure_d(i1, i2);

    let monotone = ScanReport::scan("steigmann-monotone-i1", &g, 1e-10, |p| {
        let (i1, i2) = (p[0], p[1]);
        let h = 1e-6 * i1;
        if !keep(i1, i2) || !keep(i1 - h, i2) || !keep(i1 + h, i2) {
            return Outcome::Skipped;
        }
        let (fp, fm) = (psi_fn(i1 + h, i2), psi_fn(i1 - h, i2));
        let d = (fp - fm) / (2.0 * h);
        let noise = 4.0 * EPS * fp.abs().max(fm.abs()) / (2.0 * h);
        tested(p.to_vec(), d, d + noise)
    });

    let tol = 1e-8;
    let hess_outcomes: Vec<Outcome> = (0..g.total())
        .into_par_iter()
        .map(|idx| {
            let p = g.point(idx);
            let (i1, i2) = (p[0], p[1]);
            let (h1, h2) = (1e-4 * i1, 1e-4 * i2);
            let stencil = [(-1.0, -1.0), (-1.0, 0.0), (-1.0, 1.0), (0.0, -1.0), (0.0, 1.0), (1.0, -1.0), (1.0, 0.0), (1.0, 1.0)];
            let r0 = region_of(i1, i2);
            for (a, b) in stencil {
                let (x, y) = (i1 + a * h1, i2 + b * h2);
                if !keep(x, y) || region_of(x, y) != r0 {
                    return Outcome::Skipped;
                }
            }
            if r0 == Region::OnGamma2 {
                return Outcome::Skipped;
            }
            let f = |a: f64, b: f64| psi_fn(i1 + a * h1, i2 + b * h2);
            let f0 = f(0.0, 0.0);
            // scaled coordinates x = i1/i1₀, y = i2/i2₀ with unit step 10⁻⁴
            let s = 1e-4;
            let d11 = (f(1.0, 0.0) - 2.0 * f0 + f(-1.0, 0.0)) / (s * s);
            let d22 = (f(0.0, 1.0) - 2.0 * f0 + f(0.0, -1.0)) / (s * s);
            let d12 = (f(1.0, 1.0) - f(1.0, -1.0) - f(-1.0, 1.0) + f(-1.0, -1.0)) / (4.0 * s * s);
            let fmax = stencil.iter().map(|&(a, b)| f(a, b).abs()).fold(f0.abs(), f64::max);
            let noise = 16.0 * EPS * fmax / (s * s);
            let h = SymMat::from_mat(&Mat::from_rows2([[d11, d12], [d12, d22]]));
            let min_eig = h.eigen().values()[1];
            let scale = h.norm().max(f0.abs()).max(f64::MIN_POSITIVE);
            let unscaled = SymMat::from_mat(&Mat::from_rows2([
                [d11 / (i1 * i1), d12 / (i1 * i2)],
                [d12 / (i1 * i2), d22 / (i2 * i2)],
            ]));
            tested(p, unscaled.eigen().values()[1], (min_eig + noise) / scale)
        })
        .collect();

    let pair_outcomes: Vec<Outcome> = (0..grid.pairs as u64)
        .into_par_iter()
        .map(|idx| {
            let mut r = rng::stream(grid.seed, idx);
            let draw = |r: &mut rand_chacha::ChaCha8Rng| -> (f64, f64) {
                let i1 = rng::log_uniform(r, grid.i1.lo, grid.i1.hi);
                let i2 = if idx % 2 == 0 {
                    0.25 * i1 * i1 * r.gen_range(0.5..1.5)
                } else {
                    rng::log_uniform(r, grid.i2.lo, grid.i2.hi)
                };
                (i1, i2)
            };
            let p = draw(&mut r);
            let q = draw(&mut r);
            let m = (0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1));
            if !(keep(p.0, p.1) && keep(q.0, q.1) && keep(m.0, m.1)) {
                return Outcome::Skipped;
            }
            let (fp, fq, fm) = (psi_fn(p.0, p.1), psi_fn(q.0, q.1), psi_fn(m.0, m.1));
            let gap = 0.5 * (fp + fq) - fm;
            let scale = fp.abs().max(fq.abs()).max(fm.abs()).max(f64::MIN_POSITIVE);
            tested(vec![p.0, p.1, q.0, q.1], gap, (gap + 4.0 * EPS * scale) / scale)
        })
        .collect();

    let mut outcomes = hess_outcomes;
    outcomes.extend(pair_outcomes);
    let desc = format!("{} + {} midpoint pairs (seed {})", describe_grid(&g), grid.pairs, grid.seed);
    let convex = ScanReport::from_outcomes("steigmann-convex", desc, tol, outcomes);
    (monotone, convex)
}

/// Three-dimensional counterpart at explicit points `(i1, i2, i3)`.
///
/// Report 1: `∂φ/∂i1 ≥ 0` and `∂φ/∂i2 ≥ 0` (the smaller relative slope is
/// the margin). Report 2: the 3×3 difference Hessian is positive semidefinite.
pub fn steigmann_check_3d<F>(phi: F, points: &[[f64; 3]]) -> (ScanReport, ScanReport)
where
    F: Fn(f64, f64, f64) -> f64 + Sync,
{
    let eval = |p: &[f64; 3], d: [f64; 3]| phi(p[0] + d[0], p[1] + d[1], p[2] + d[2]);
    let desc = format!("{} explicit points", points.len());

    let mono: Vec<Outcome> = points
        .par_iter()
        .map(|p| {
            let mut worst = f64::INFINITY;
            let mut value = 0.0;
            for axis in 0..2 {
                let h = 1e-6 * p[axis].abs().max(1.0);
                let mut e = [0.0; 3];
                e[axis] = h;
                let fp = eval(p, e);
                e[axis] = -h;
                let fm = eval(p, e);
                let d = (fp - fm) / (2.0 * h);
                let noise = 4.0 * EPS * fp.abs().max(fm.abs()) / (2.0 * h);
                let margin = (d + noise) / (eval(p, [0.0; 3]).abs().max(1.0) / p[axis].abs().max(1.0));
                if margin < worst {
                    worst = margin;
                    value = d;
                }
            }
            tested(p.to_vec(), value, worst)
        })
        .collect();

    let hess: Vec<Outcome> = points
        .par_iter()
        .map(|p| {
            let s = 1e-4;
            let h: Vec<f64> = p.iter().map(|x| s * x.abs().max(1.0)).collect();
            let at = |a: [f64; 3]| eval(p, [a[0] * h[0], a[1] * h[1], a[2] * h[2]]);
            let f0 = at([0.0; 3]);
            let mut m = Mat::zeros(3);
            let mut fmax = f0.abs();
            for i in 0..3 {
                for j in 0..3 {
                    let v = if i == j {
                        let mut e = [0.0; 3];
                        e[i] = 1.0;
                        let fp = at(e);
                        e[i] = -1.0;
                        let fm = at(e);
                        fmax = fmax.max(fp.abs()).max(fm.abs());
                        (fp - 2.0 * f0 + fm) / (s * s)
                    } else {
                        let mut v = 0.0;
                        for (si, sj, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                            let mut e = [0.0; 3];
                            e[i] = si;
                            e[j] = sj;
                            let fe = at(e);
                            fmax = fmax.max(fe.abs());
                            v += w * fe;
                        }
                        v / (4.0 * s * s)
                    };
                    m.set(i, j, v);
                }
            }
            let sym = SymMat::from_mat(&m);
            let min_eig = sym.eigen().values()[2];
            let noise = 16.0 * EPS * fmax / (s * s);
            let scale = sym.norm().max(f0.abs()).max(f64::MIN_POSITIVE);
            let mut unscaled = m;
            for i in 0..3 {
                for j in 0..3 {
                    unscaled.set(i, j, m.get(i, j) * s * s / (h[i] * h[j]));
                }
            }
            let value = SymMat::from_mat(&unscaled).eigen().values()[2];
            tested(p.to_vec(), value, (min_eig + noise) / scale)
        })
        .collect();

    (
        ScanReport::from_outcomes("steigmann3-monotone-i1-i2", desc.clone(), 1e-10, mono),
        ScanReport::from_outcomes("steigmann3-convex", desc, 1e-8, hess),
    )
}
