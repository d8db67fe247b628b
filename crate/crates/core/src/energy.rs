//! The exponentiated Hencky energy family
//!
//! ```text
//! W_eH(F) = μ/k · exp(k ‖dev_n log U‖²) + κ/(2k̂) · exp(k̂ (tr log U)^m)   if det F > 0
//!         = +∞                                                            otherwise
//! ```
//!
//! together with its invariant-space representation `ψ(i1, i2)`, the convex
//! extension `ψ̂`, the quadratic Hencky comparison energy and the first
//! Piola–Kirchhoff stress.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tensor::{invariants_to_eigenvalues, stretch_eigen, InvariantPoint, Mat, Region};

/// Material parameters `(μ, κ, k, k̂, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub mu: f64,
    pub kappa: f64,
    pub k: f64,
    pub khat: f64,
    pub m: u32,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self { mu: 1.0, kappa: 1.0, k: 1.0 / 3.0, khat: 1.0 / 8.0, m: 2 }
    }
}

impl MaterialParams {
    pub fn new(mu: f64, kappa: f64, k: f64, khat: f64, m: u32) -> Result<Self> {
        let p = Self { mu, kappa, k, khat, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("mu", self.mu)?;
        positive("kappa", self.kappa)?;
        positive("k", self.k)?;
        positive("khat", self.khat)?;
        if self.m == 0 {
            return Err(Error::InvalidInput("m must be at least 1".into()));
        }
        Ok(())
    }

    /// Energy of the stress-free reference state, `μ/k + κ/(2k̂)`.
    pub fn reference_energy(&self) -> f64 {
        self.mu / self.k + self.kappa / (2.0 * self.khat)
    }
}

/// Energy value; `+∞` marks a state with `det F ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyValue {
    pub value: f64,
    pub finite: bool,
}

impl EnergyValue {
    pub fn finite(value: f64) -> Self {
        Self { value, finite: value.is_finite() }
    }

    pub fn infinite() -> Self {
        Self { value: f64::INFINITY, finite: false }
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }
}

#[derive(Serialize, Deserialize)]
struct EnergyValueRepr {
    value: Option<f64>,
    finite: bool,
}

impl Serialize for EnergyValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EnergyValueRepr { value: self.finite.then_some(self.value), finite: self.finite }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EnergyValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = EnergyValueRepr::deserialize(d)?;
        Ok(match r.value {
            Some(v) if r.finite => EnergyValue::finite(v),
            _ => EnergyValue::infinite(),
        })
    }
}

/// Scalar Hencky strain measures of `F`: `‖dev_n log U‖²` and `tr log U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HenckyMeasures {
    pub dev_norm_sq: f64,
    pub trace: f64,
}

impl HenckyMeasures {
    pub fn from_stretches(stretches: &[f64]) -> Self {
        if stretches.len() == 2 {
            let r = (stretches[0] / stretches[1]).ln();
            let trace = stretches[0].ln() + stretches[1].ln();
            return Self { dev_norm_sq: 0.5 * r * r, trace };
        }
        let logs: Vec<f64> = stretches.iter().map(|s| s.ln()).collect();
        let trace: f64 = logs.iter().sum();
        let mean = trace / logs.len() as f64;
        let dev_norm_sq = logs.iter().map(|l| (l - mean) * (l - mean)).sum();
        Self { dev_norm_sq, trace }
    }

    /// `None` when `det F ≤ 0`.
    pub fn of(f: &Mat) -> Option<Self> {
        let eig = stretch_eigen(f).ok()?;
        Some(Self::from_stretches(eig.values()))
    }
}

fn iso_term(h: &HenckyMeasures, p: &MaterialParams) -> f64 {
    p.mu / p.k * (p.k * h.dev_norm_sq).exp()
}

fn vol_term(h: &HenckyMeasures, p: &MaterialParams) -> f64 {
    p.kappa / (2.0 * p.khat) * (p.khat * h.trace.powi(p.m as i32)).exp()
}

fn split(f: &Mat, p: &MaterialParams) -> Option<(f64, f64)> {
    let h = HenckyMeasures::of(f)?;
    Some((iso_term(&h, p), vol_term(&h, p)))
}

/// `W_eH(F)`; `+∞` when `det F ≤ 0`.
pub fn energy_eh(f: &Mat, p: &MaterialParams) -> EnergyValue {
    match split(f, p) {
        Some((iso, vol)) => EnergyValue::finite(iso + vol),
        None => EnergyValue::infinite(),
    }
}

/// Isochoric summand `μ/k · exp(k ‖dev_n log U‖²)`.
pub fn energy_iso(f: &Mat, p: &MaterialParams) -> EnergyValue {
    match split(f, p) {
        Some((iso, _)) => EnergyValue::finite(iso),
        None => EnergyValue::infinite(),
    }
}

/// Volumetric summand `κ/(2k̂) · exp(k̂ (tr log U)^m)`.
pub fn energy_vol(f: &Mat, p: &MaterialParams) -> EnergyValue {
    match split(f, p) {
        Some((_, vol)) => EnergyValue::finite(vol),
        None => EnergyValue::infinite(),
    }
}

/// `W_eH` evaluated from principal stretches (isotropic route, no eigensolve).
pub fn energy_from_stretches(stretches: &[f64], p: &MaterialParams) -> f64 {
    if stretches.iter().any(|s| !(*s > 0.0)) {
        return f64::INFINITY;
    }
    let h = HenckyMeasures::from_stretches(stretches);
    iso_term(&h, p) + vol_term(&h, p)
}

/// Quadratic Hencky energy `μ ‖dev_n log U‖² + κ/2 (tr log U)²`.
pub fn energy_quadratic_hencky(f: &Mat, p: &MaterialParams) -> EnergyValue {
    match HenckyMeasures::of(f) {
        Some(h) => EnergyValue::finite(p.mu * h.dev_norm_sq + 0.5 * p.kappa * h.trace * h.trace),
        None => EnergyValue::infinite(),
    }
}

/// Energies selectable by name in scans and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyKind {
    /// Full exponentiated Hencky energy.
    ExpHencky,
    /// Isochoric summand only.
    ExpHenckyIso,
    /// Quadratic Hencky energy.
    QuadraticHencky,
}

impl EnergyKind {
    pub fn eval(&self, f: &Mat, p: &MaterialParams) -> f64 {
        match self {
            EnergyKind::ExpHencky => energy_eh(f, p).value,
            EnergyKind::ExpHenckyIso => energy_iso(f, p).value,
            EnergyKind::QuadraticHencky => energy_quadratic_hencky(f, p).value,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnergyKind::ExpHencky => "exp-hencky",
            EnergyKind::ExpHenckyIso => "exp-hencky-iso",
            EnergyKind::QuadraticHencky => "quadratic-hencky",
        }
    }
}

impl std::str::FromStr for EnergyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp-hencky" | "eh" => Ok(EnergyKind::ExpHencky),
            "exp-hencky-iso" | "iso" => Ok(EnergyKind::ExpHenckyIso),
            "quadratic-hencky" | "hencky" => Ok(EnergyKind::QuadraticHencky),
            other => Err(Error::InvalidInput(format!("unknown energy '{other}'"))),
        }
    }
}

/// `g(λ1, λ2) = exp((k/2) log²(λ1/λ2))`, the unscaled planar isochoric factor.
pub fn g_iso(l1: f64, l2: f64, k: f64) -> Result<f64> {
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(Error::Domain {
            function: "g_iso",
            detail: format!("stretches must be positive, got ({l1}, {l2})"),
        });
    }
    let r = (l1 / l2).ln();
    Ok((0.5 * k * r * r).exp())
}

/// `ψ(i1, i2) = exp((k/2) log²((i1+R)/(i1−R)))`, `R = sqrt(i1² − 4 i2)`, on `D ∪ γ2`.
///
/// Evaluated through the eigenvalues `λ1 = (i1+R)/2`, `λ2 = i2/λ1` so that the
/// ratio stays accurate as `R → 0`.
pub fn psi(i1: f64, i2: f64, k: f64) -> Result<f64> {
    let (l1, l2) = invariants_to_eigenvalues(&InvariantPoint::planar(i1, i2))?;
    g_iso(l1, l2, k)
}

/// Convex extension `ψ̂` of `ψ` to `[0, ∞) × ℝ₊`: `ψ` on `D ∪ γ2`, `1` elsewhere.
pub fn psi_hat(i1: f64, i2: f64, k: f64) -> f64 {
    let point = InvariantPoint::planar(i1, i2);
    if point.region == Region::Outside || !(i1 > 0.0) || !(i2 > 0.0) {
        return 1.0;
    }
    psi(i1, i2, k).unwrap_or(1.0)
}

/// First Piola–Kirchhoff stress `S1 = ∂W_eH/∂F` for `m = 2`:
///
/// ```text
/// S1 = F^{-T} [ 2μ e^{k‖dev log U‖²} dev log U + κ e^{k̂ (tr log U)²} tr(log U) 1 ]
/// ```
///
/// The bracket is coaxial with `U`, so it sits to the right of `F^{-T}`
/// (equivalently, to the left of `F^{-T}` when written with `log V`).
pub fn piola_stress(f: &Mat, p: &MaterialParams) -> Result<Mat> {
    if p.m != 2 {
        return Err(Error::InvalidInput(format!(
            "the stress is available for the quadratic volumetric exponent only (m = {})",
            p.m
        )));
    }
    let det = f.det();
    let eig = stretch_eigen(f)?;
    let n = f.dim() as f64;
    let logs: Vec<f64> = eig.values().iter().map(|s| s.ln()).collect();
    let h = HenckyMeasures::from_stretches(eig.values());
    let mean = h.trace / n;
    let iso = 2.0 * p.mu * (p.k * h.dev_norm_sq).exp();
    let vol = p.kappa * (p.khat * h.trace * h.trace).exp() * h.trace;
    // principal values of the coaxial bracket
    let principal: Vec<f64> = logs.iter().map(|l| iso * (l - mean) + vol).collect();
    let bracket = eig.compose(&principal);
    let finv_t = f
        .inverse_transpose()
        .ok_or(Error::NonPositiveDeterminant { det })?;
    Ok(finv_t * *bracket.as_mat())
}

/// Fourth-order tangent `∂²W/∂F_ij ∂F_kl` stored row-major over `(i, j, k, l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Tangent {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.dim;
        self.data[((i * n + j) * n + k) * n + l]
    }

    /// `A : 𝕋 : B`.
    pub fn contract(&self, a: &Mat, b: &Mat) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        s += a.get(i, j) * self.get(i, j, k, l) * b.get(k, l);
                    }
                }
            }
        }
        s
    }
}

/// Default finite-difference step for second derivatives at `F`.
pub fn tangent_step(f: &Mat) -> f64 {
    1e-4 * (1.0 + f.norm())
}

/// Tangent by central second differences of `W_eH` with step `h`
/// (defaults to [`tangent_step`]).
pub fn tangent_fd(f: &Mat, p: &MaterialParams, h: Option<f64>) -> Result<Tangent> {
    let h = h.unwrap_or_else(|| tangent_step(f));
    let n = f.dim();
    let nn = n * n;
    let w = |m: &Mat| -> Result<f64> {
        let e = energy_eh(m, p);
        if e.finite {
            Ok(e.value)
        } else {
            Err(Error::StencilLeftDomain { step: h })
        }
    };
    let shifted = |a: usize, da: f64, b: usize, db: f64| {
        let mut m = *f;
        m.set(a / n, a % n, m.get(a / n, a % n) + da);
        m.set(b / n, b % n, m.get(b / n, b % n) + db);
        m
    };
    let w0 = w(f)?;
    let mut data = vec![0.0; nn * nn];
    for a in 0..nn {
        let wp = w(&shifted(a, h, a, 0.0))?;
        let wm = w(&shifted(a, -h, a, 0.0))?;
        data[a * nn + a] = (wp - 2.0 * w0 + wm) / (h * h);
        for b in (a + 1)..nn {
            let wpp = w(&shifted(a, h, b, h))?;
            let wpm = w(&shifted(a, h, b, -h))?;
            let wmp = w(&shifted(a, -h, b, h))?;
            let wmm = w(&shifted(a, -h, b, -h))?;
            let v = (wpp - wpm - wmp + wmm) / (4.0 * h * h);
            data[a * nn + b] = v;
            data[b * nn + a] = v;
        }
    }
    Ok(Tangent { dim: n, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p_ref() -> MaterialParams {
        MaterialParams::new(1.0, 1.0, 1.0 / 3.0, 1.0 / 8.0, 2).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / (1.0 + b.abs())
    }

    #[test]
    fn params_validation() {
        assert!(MaterialParams::new(0.0, 1.0, 1.0, 1.0, 2).is_err());
        assert!(MaterialParams::new(1.0, 1.0, -1.0, 1.0, 2).is_err());
        assert!(MaterialParams::new(1.0, 1.0, 1.0, 1.0, 0).is_err());
        assert!(MaterialParams::new(1.0, f64::NAN, 1.0, 1.0, 2).is_err());
        assert!(MaterialParams::default().validate().is_ok());
    }

    #[test]
    fn energy_at_identity_is_reference_value() {
        let p = MaterialParams::new(2.0, 5.0, 0.7, 0.3, 2).unwrap();
        for dim in [2, 3] {
            let e = energy_eh(&Mat::identity(dim), &p);
            assert!(e.finite);
            assert!(rel(e.value, 2.0 / 0.7 + 5.0 / 0.6) < 1e-15);
        }
    }

    #[test]
    fn energy_infinite_off_gl_plus() {
        let e = energy_eh(&Mat::diag(&[-1.0, 1.0]), &p_ref());
        assert!(!e.finite && e.value == f64::INFINITY);
        assert!(!energy_quadratic_hencky(&Mat::zeros(2), &p_ref()).finite);
    }

    #[test]
    fn energy_diag_two_one() {
        // 3·exp((1/6) log² 2) + 4·exp((1/8) log² 2)
        let l2 = 2f64.ln();
        let expected = 3.0 * (l2 * l2 / 6.0).exp() + 4.0 * (l2 * l2 / 8.0).exp();
        let e = energy_eh(&Mat::diag(&[2.0, 1.0]), &p_ref());
        assert!(rel(e.value, expected) < 1e-14);
        assert!((e.value - 7.4977).abs() < 1e-4);
    }

    #[test]
    fn split_cases() {
        let p = p_ref();
        let t = 3.7;
        let vol = energy_vol(&Mat::diag(&[t, 1.0 / t]), &p).value;
        assert!(rel(vol, p.kappa / (2.0 * p.khat)) < 1e-15);
        let iso = energy_iso(&Mat::identity(2).scale(2.5), &p).value;
        assert!(rel(iso, p.mu / p.k) < 1e-15);
        let p2 = MaterialParams::new(1.0, 1.0, 2.0, 0.125, 2).unwrap();
        let iso = energy_iso(&Mat::diag(&[std::f64::consts::E, 1.0]), &p2).value;
        assert!(rel(iso / (p2.mu / p2.k), std::f64::consts::E) < 1e-14);
    }

    #[test]
    fn quadratic_hencky_cases() {
        let p = MaterialParams::new(1.0, 3.0, 1.0, 1.0, 2).unwrap();
        assert_eq!(energy_quadratic_hencky(&Mat::identity(2), &p).value, 0.0);
        let e = std::f64::consts::E;
        let w = energy_quadratic_hencky(&Mat::diag(&[e, e]), &p).value;
        assert!(rel(w, 2.0 * p.kappa) < 1e-14);
    }

    #[test]
    fn g_iso_cases() {
        assert_eq!(g_iso(1.7, 1.7, 0.4).unwrap(), 1.0);
        assert!(rel(g_iso(std::f64::consts::E, 1.0, 1.0).unwrap(), 0.5f64.exp()) < 1e-15);
        let v = g_iso(3.0, 1.0, 1.0 / 3.0).unwrap();
        assert!((v - 1.2229).abs() < 1e-4);
        assert!(g_iso(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn psi_cases() {
        let k = 0.45;
        assert!(rel(psi(4.0, 3.0, k).unwrap(), g_iso(3.0, 1.0, k).unwrap()) < 1e-14);
        assert!((psi(4.0, 4.0 - 1e-12, k).unwrap() - 1.0).abs() < 1e-10);
        let v = psi(2.5, 1.0, 1.0 / 3.0).unwrap();
        let l4 = 4f64.ln();
        assert!(rel(v, (l4 * l4 / 6.0).exp()) < 1e-14);
        assert!((v - 1.3775).abs() < 1e-4);
        assert!(matches!(psi(2.0, 4.0, k), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn psi_hat_cases() {
        let k = 1.0 / 3.0;
        assert_eq!(psi_hat(2.0, 4.0, k), 1.0);
        assert_eq!(psi_hat(4.0, 4.0, k), 1.0);
        assert_eq!(psi_hat(0.0, 1.0, k), 1.0);
        assert!(rel(psi_hat(4.0, 3.0, k), psi(4.0, 3.0, k).unwrap()) < 1e-15);
        // continuity across γ2
        assert!((psi_hat(4.0, 4.0 - 1e-9, k) - psi_hat(4.0, 4.0 + 1e-9, k)).abs() < 1e-9);
    }

    #[test]
    fn stress_vanishes_at_identity() {
        let s = piola_stress(&Mat::identity(2), &p_ref()).unwrap();
        assert!(s.norm() < 1e-15);
    }

    #[test]
    fn stress_pure_dilation() {
        let p = MaterialParams::new(1.3, 2.1, 0.5, 0.2, 2).unwrap();
        let c: f64 = 1.4;
        let s = piola_stress(&Mat::identity(2).scale(c), &p).unwrap();
        let lc = c.ln();
        let expected = p.kappa * (4.0 * p.khat * lc * lc).exp() * (2.0 * lc / c);
        assert!(rel(s.get(0, 0), expected) < 1e-14);
        assert!(rel(s.get(1, 1), expected) < 1e-14);
        assert!(s.get(0, 1).abs() < 1e-15 && s.get(1, 0).abs() < 1e-15);
    }

    #[test]
    fn stress_rejects_bad_input() {
        let p = p_ref();
        assert!(matches!(
            piola_stress(&Mat::diag(&[1.0, -1.0]), &p),
            Err(Error::NonPositiveDeterminant { .. })
        ));
        let p3 = MaterialParams { m: 3, ..p };
        assert!(piola_stress(&Mat::identity(2), &p3).is_err());
    }

    #[test]
    fn tangent_is_symmetric_and_rejects_tight_stencil() {
        let f = Mat::from_rows2([[1.1, 0.3], [-0.2, 0.9]]);
        let t = tangent_fd(&f, &p_ref(), None).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(t.data[a * 4 + b], t.data[b * 4 + a]);
            }
        }
        let thin = Mat::diag(&[1.0, 1e-6]);
        assert!(matches!(
            tangent_fd(&thin, &p_ref(), Some(1e-3)),
            Err(Error::StencilLeftDomain { .. })
        ));
    }

    #[test]
    fn energy_value_json_shape() {
        let s = serde_json::to_string(&EnergyValue::infinite()).unwrap();
        assert_eq!(s, r#"{"value":null,"finite":false}"#);
        let back: EnergyValue = serde_json::from_str(&s).unwrap();
        assert!(!back.finite);
    }
}
