//! Convexity of `t ↦ exp(k̂ (log t)^m)` on `(0, ∞)`.

use super::{tested, Axis, ScanGrid, ScanReport};

/// `1/m^(m+1)`, the smallest `k̂` giving a convex volumetric term.
pub fn volumetric_threshold(m: u32) -> f64 {
    1.0 / (m as f64).powi(m as i32 + 1)
}

/// Relative step of the three-point stencil `t(1 − h), t, t(1 + h)`.
pub const VOLUMETRIC_STEP: f64 = 1e-2;

fn vol(t: f64, khat: f64, m: u32) -> f64 {
    (khat * t.ln().powi(m as i32)).exp()
}

/// Midpoint test `f(t−h) + f(t+h) − 2f(t) ≥ 0` at every grid point, with `h = 10⁻²·t`.
///
/// For a convex function the midpoint inequality holds exactly at any step,
/// so only roundoff (relative `~1e-16`) separates a convex `f` from zero;
/// the margin is the second difference divided by `f(t)`.
pub fn volumetric_convexity_check(khat: f64, m: u32, t_axis: &Axis) -> ScanReport {
    let grid = ScanGrid::new(&[("t", *t_axis)]);
    let claim = format!("volumetric-convexity@khat={khat},m={m}");
    ScanReport::scan(&claim, &grid, 1e-10, |p| {
        let t = p[0];
        let h = VOLUMETRIC_STEP * t;
        let f0 = vol(t, khat, m);
        let d2 = vol(t + h, khat, m) + vol(t - h, khat, m) - 2.0 * f0;
        tested(vec![t], d2 / (h * h), d2 / f0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis() -> Axis {
        Axis::geometric(1e-3, 1e3, 10_000)
    }

    /// `d²/dt² exp(k̂ log² t) = 2k̂ e^{k̂L²}(2k̂L² − L + 1)/t²`
    fn analytic(t: f64, khat: f64) -> f64 {
        let l = t.ln();
        2.0 * khat * (khat * l * l).exp() * (2.0 * khat * l * l - l + 1.0) / (t * t)
    }

    #[test]
    fn thresholds() {
        assert_eq!(volumetric_threshold(2), 0.125);
        assert_eq!(volumetric_threshold(3), 1.0 / 81.0);
    }

    #[test]
    fn analytic_tangency_at_e_squared() {
        let t = std::f64::consts::E.powi(2);
        assert!(analytic(t, 0.125).abs() < 1e-15);
        assert!(analytic(t, 0.12) < 0.0);
    }

    #[test]
    fn second_differences_track_the_analytic_form() {
        for &t in &[0.01, 0.5, 3.0, 30.0, 500.0] {
            let h = 1e-4 * t;
            let fd = (vol(t + h, 0.2, 2) + vol(t - h, 0.2, 2) - 2.0 * vol(t, 0.2, 2)) / (h * h);
            let a = analytic(t, 0.2);
            assert!((fd - a).abs() < 1e-5 * a.abs().max(vol(t, 0.2, 2) / (t * t)));
        }
    }

    #[test]
    fn eighth_holds_and_point_twelve_fails() {
        assert!(volumetric_convexity_check(0.125, 2, &axis()).holds());
        let r = volumetric_convexity_check(0.12, 2, &axis());
        assert!(r.fails());
        let t = r.worst.unwrap().point[0];
        let e = std::f64::consts::E;
        assert!(t > e && t < e.powi(4));
        // analytic negative interval is (5.3, 12.2)
        for v in &r.violations {
            assert!(v.point[0] > 5.0 && v.point[0] < 12.5);
        }
    }

    #[test]
    fn even_exponent_threshold() {
        // m = 4: 1/4⁵ = 1/1024
        assert!(volumetric_convexity_check(1.0 / 1024.0, 4, &axis()).holds());
        assert!(volumetric_convexity_check(0.9 / 1024.0, 4, &axis()).fails());
    }

    #[test]
    fn odd_exponent_is_never_convex_below_one() {
        // f'' ∝ 9k̂²s⁴ + 6k̂s − 3k̂s² with s = log t, negative for small s < 0
        for &khat in &[1.0 / 81.0, 0.1, 1.0] {
            let r = volumetric_convexity_check(khat, 3, &axis());
            assert!(r.fails());
            assert!(r.violations.iter().all(|v| v.point[0] < 1.0));
        }
    }
}
