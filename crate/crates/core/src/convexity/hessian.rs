//! Hessian of `ψ(i1, i2)` pushed forward from eigenvalue space.

use super::scalar::coth_minus_inv;
use super::{tested, Axis, Outcome, ScanGrid, ScanReport};
use crate::energy::psi;
use crate::error::{Error, Result};
use crate::tensor::{invariants_to_eigenvalues, InvariantPoint, SymMat};

/// Minimum relative eigenvalue gap `(λ1 − λ2)/(λ1 + λ2)` for the pushforward.
pub const GAMMA2_GAP: f64 = 1e-8;

fn eigenvalues_off_gamma2(i1: f64, i2: f64) -> Result<(f64, f64)> {
    let (l1, l2) = invariants_to_eigenvalues(&InvariantPoint::planar(i1, i2))?;
    let gap = (l1 - l2) / (l1 + l2);
    if !(gap > GAMMA2_GAP) {
        return Err(Error::TooCloseToGamma2 { relative_gap: gap });
    }
    Ok((l1, l2))
}

/// `D²g − ψ_{i2} [[0, 1], [1, 0]]` in eigenvalue coordinates (`λ1 > λ2`).
///
/// The `(1,1)` entry is `k g r(L)/λ1²` with `r(t) = k t² − t + 1`.
pub fn lambda_space_matrix(l1: f64, l2: f64, k: f64) -> [[f64; 2]; 2] {
    let d = l1 - l2;
    let ll = (l1 / l2).ln();
    let g = (0.5 * k * ll * ll).exp();
    let kl2 = k * ll * ll;
    let m11 = k * g * (kl2 - ll + 1.0) / (l1 * l1);
    let m22 = k * g * (kl2 + ll + 1.0) / (l2 * l2);
    let m12 = -k * g * (k * d * ll * ll - (l1 + l2) * ll + d) / (l1 * d * l2);
    [[m11, m12], [m12, m22]]
}

/// `D²ψ(i1, i2)` for `(i1, i2)` inside `D`.
///
/// With `g(λ1, λ2) = exp((k/2) L²)`, `L = log(λ1/λ2)` and `J = ∇_λ i = [[1, 1], [λ2, λ1]]`,
/// `D²ψ = J^{-T} (D²g − ψ_{i2} [[0, 1], [1, 0]]) J^{-1}`.
pub fn hessian_psi(i1: f64, i2: f64, k: f64) -> Result<SymMat> {
    let (l1, l2) = eigenvalues_off_gamma2(i1, i2)?;
    let d = l1 - l2;
    let m = lambda_space_matrix(l1, l2, k);
    // J^{-T} = [[λ1, −λ2], [−1, 1]] / (λ1 − λ2)
    let a = [[l1 / d, -l2 / d], [-1.0 / d, 1.0 / d]];
    let mut h = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut s = 0.0;
            for p in 0..2 {
                for q in 0..2 {
                    s += a[i][p] * m[p][q] * a[j][q];
                }
            }
            h[i][j] = s;
        }
    }
    Ok(SymMat::from_mat(&crate::tensor::Mat::from_rows2(h)))
}

/// Central-difference Hessian of `ψ` with step `h` in both invariants.
pub fn hessian_psi_fd(i1: f64, i2: f64, k: f64, h: f64) -> Result<SymMat> {
    let f = |a: f64, b: f64| psi(a, b, k);
    let f0 = f(i1, i2)?;
    let d11 = (f(i1 + h, i2)? - 2.0 * f0 + f(i1 - h, i2)?) / (h * h);
    let d22 = (f(i1, i2 + h)? - 2.0 * f0 + f(i1, i2 - h)?) / (h * h);
    let d12 = (f(i1 + h, i2 + h)? - f(i1 + h, i2 - h)? - f(i1 - h, i2 + h)? + f(i1 - h, i2 - h)?)
        / (4.0 * h * h);
    Ok(SymMat::from_mat(&crate::tensor::Mat::from_rows2([[d11, d12], [d12, d22]])))
}

/// A positive multiple of `det D²ψ(i1, i2)`: the bracket
/// `2 i2 log a + k i1 R log² a + i1 R − i1² log a` divided by `i1²`.
///
/// With `z = R/i1` and `ξ = log a = 2 atanh z` this equals
/// `z ξ (1/ξ + k ξ − coth ξ)`, which is how it is evaluated: the direct
/// bracket cancels to `O(z³)` as `z → 0`.
pub fn det_hessian_sign(i1: f64, i2: f64, k: f64) -> Result<f64> {
    let (l1, l2) = eigenvalues_off_gamma2(i1, i2)?;
    let xi = (l1 / l2).ln();
    let z = (l1 - l2) / (l1 + l2);
    Ok(z * xi * (k * xi - coth_minus_inv(xi)))
}

/// Closed form of `det D²ψ` in the invariants (for cross-checking).
pub fn det_hessian_closed_form(i1: f64, i2: f64, k: f64) -> Result<f64> {
    let (l1, l2) = eigenvalues_off_gamma2(i1, i2)?;
    let disc = i1 * i1 - 4.0 * i2;
    let r = disc.sqrt();
    let la = (l1 / l2).ln();
    let bracket = 2.0 * i2 * la + k * i1 * r * la * la + i1 * r - i1 * i1 * la;
    let pre = 128.0 * k * k * i2 * la / (disc * disc);
    let cubes = -1.0 / ((r + i1).powi(3) * (r - i1).powi(3));
    Ok(pre * cubes * bracket * (k * la * la).exp())
}

/// Sign of `det D²ψ` over `D`, parametrized by `i1` and `z = √(i1² − 4 i2)/i1`.
///
/// The margin is `det_hessian_sign / (z ξ²) = k − (coth ξ − 1/ξ)/ξ`, which
/// tends to `k − 1/3` as `z → 0`.
pub fn hessian_scan(k: f64, i1_axis: &Axis, z_axis: &Axis) -> ScanReport {
    let grid = ScanGrid::new(&[("i1", *i1_axis), ("z", *z_axis)]);
    ScanReport::scan(&format!("psi-hessian-det-nonnegative@k={k}"), &grid, 1e-10, |p| {
        let (i1, z) = (p[0], p[1]);
        let i2 = i1 * i1 * (1.0 - z * z) / 4.0;
        match det_hessian_sign(i1, i2, k) {
            Ok(s) => {
                let xi = 2.0 * z.atanh();
                tested(vec![i1, i2], s, s / (z * xi * xi))
            }
            Err(_) => Outcome::Skipped,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn from_eigs(l1: f64, l2: f64) -> (f64, f64) {
        (l1 + l2, l1 * l2)
    }

    #[test]
    fn positive_definite_at_4_3() {
        let h = hessian_psi(4.0, 3.0, 1.0 / 3.0).unwrap();
        let e = h.eigen();
        assert!(e.values()[0] > 0.0 && e.values()[1] > 0.0);
    }

    #[test]
    fn matches_finite_differences() {
        let k = 0.5;
        let mut worst: f64 = 0.0;
        for idx in 0..100 {
            let mut r = rng::stream(11, idx);
            let l2 = rng::log_uniform(&mut r, 0.2, 5.0);
            let l1 = l2 * rng::log_uniform(&mut r, 1.05, 4.0);
            let (i1, i2) = from_eigs(l1, l2);
            let h = hessian_psi(i1, i2, k).unwrap();
            let fd = hessian_psi_fd(i1, i2, k, 1e-4 * i1.max(1.0)).unwrap();
            let rel = (*h.as_mat() - *fd.as_mat()).norm() / h.norm();
            worst = worst.max(rel);
        }
        assert!(worst < 1e-5, "worst relative error {worst:e}");
    }

    #[test]
    fn closed_form_determinant_agrees() {
        for &(l1, l2, k) in &[(3.0, 1.0, 1.0 / 3.0), (2.0, 0.5, 0.3), (10.0, 0.1, 1.0), (1.2, 1.0, 2.0)] {
            let (i1, i2) = from_eigs(l1, l2);
            let h = hessian_psi(i1, i2, k).unwrap();
            let det = h.as_mat().det();
            let cf = det_hessian_closed_form(i1, i2, k).unwrap();
            assert!((det - cf).abs() <= 1e-9 * det.abs().max(cf.abs()), "{det} vs {cf}");
        }
    }

    #[test]
    fn sign_consistency() {
        let mut disagreements = 0;
        for idx in 0..10_000u64 {
            let mut r = rng::stream(5, idx);
            let k = r.gen_range(0.2..0.5);
            let l2 = rng::log_uniform(&mut r, 0.1, 10.0);
            let l1 = l2 * rng::log_uniform(&mut r, 1.01, 50.0);
            let (i1, i2) = from_eigs(l1, l2);
            let det = hessian_psi(i1, i2, k).unwrap().as_mat().det();
            let s = det_hessian_sign(i1, i2, k).unwrap();
            if det.abs() > 1e-10 && det.signum() != s.signum() {
                disagreements += 1;
            }
        }
        assert_eq!(disagreements, 0);
    }

    #[test]
    fn bracket_matches_direct_formula_away_from_gamma2() {
        let k = 0.37;
        let (i1, i2) = from_eigs(5.0, 2.0);
        let r = (i1 * i1 - 4.0 * i2).sqrt();
        let la = 2.5f64.ln();
        let direct = 2.0 * i2 * la + k * i1 * r * la * la + i1 * r - i1 * i1 * la;
        let v = det_hessian_sign(i1, i2, k).unwrap();
        assert!((v * i1 * i1 - direct).abs() < 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn scale_invariant_sign() {
        for &k in &[0.3, 1.0 / 3.0, 0.5] {
            for &(l1, l2) in &[(1.1, 1.0), (3.0, 1.0), (40.0, 0.5)] {
                let (i1, i2) = from_eigs(l1, l2);
                let a = det_hessian_sign(i1, i2, k).unwrap();
                let b = det_hessian_sign(10.0 * i1, 100.0 * i2, k).unwrap();
                assert_eq!(a.signum(), b.signum());
            }
        }
    }

    #[test]
    fn lambda_entry_sign_follows_r() {
        use crate::convexity::scalar_r;
        for &k in &[0.2, 0.25, 0.3, 1.0 / 3.0] {
            for i in 1..200 {
                let ratio = 1.0 + 0.1 * i as f64;
                let m = lambda_space_matrix(ratio, 1.0, k);
                let r = scalar_r(ratio.ln(), k).unwrap();
                if r.abs() > 1e-12 {
                    assert_eq!(m[0][0].signum(), r.signum());
                }
            }
        }
    }

    #[test]
    fn rejects_gamma2_and_outside() {
        assert!(matches!(hessian_psi(4.0, 4.0, 0.5), Err(Error::TooCloseToGamma2 { .. })));
        assert!(matches!(hessian_psi(2.0, 4.0, 0.5), Err(Error::OutsideDomain { .. })));
        assert!(matches!(det_hessian_sign(2.0, 1.0, 0.5), Err(Error::TooCloseToGamma2 { .. })));
    }

    #[test]
    fn hessian_scan_threshold() {
        let i1 = Axis::geometric(0.1, 10.0, 40);
        let z = Axis::geometric(1e-4, 1.0 - 1e-4, 60);
        assert!(hessian_scan(1.0 / 3.0, &i1, &z).holds());
        let r = hessian_scan(0.30, &i1, &z);
        assert!(r.fails());
        assert!((r.min_margin - (0.30 - 1.0 / 3.0)).abs() < 1e-6);
    }
}
