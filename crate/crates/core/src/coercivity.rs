//! Growth constants for the exponentiated Hencky energy and their verification.
//!
//! Constants are built exactly as in the existence argument (they are very
//! loose); every inequality is then checked on a grid or on samples.
//! Comparisons are made in log space so that `e^{β log² t}` never overflows.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{energy_eh, HenckyMeasures, MaterialParams};
use crate::error::{Error, Result};
use crate::rng;
use crate::solver::{element_gradients, total_energy, DiscreteField, Mesh};
use crate::tensor::Mat;

/// Relative roundoff allowance when comparing the two sides of an inequality.
const REL_TOL: f64 = 1e-12;

/// Outcome of comparing `L ≥ R` given `log L` and `R` (which may be negative).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Comparison {
    slack: f64,
    holds: bool,
    overflow: bool,
}

fn compare(log_lhs: f64, rhs: f64) -> Comparison {
    let lhs = log_lhs.exp();
    let overflow = !lhs.is_finite();
    if rhs <= 0.0 {
        return Comparison { slack: lhs - rhs, holds: true, overflow };
    }
    let holds = log_lhs >= rhs.ln() - REL_TOL;
    Comparison { slack: lhs - rhs, holds, overflow }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoercivityParams {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub q: Option<f64>,
    pub n: Option<usize>,
    pub material: Option<MaterialParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityCertificate {
    pub claim: String,
    pub params: CoercivityParams,
    pub k1: f64,
    pub k2: f64,
    /// Intermediate constants of the construction.
    pub constants: BTreeMap<String, f64>,
    pub grid: String,
    pub points: usize,
    pub violations: usize,
    /// Points where the left-hand side exceeds `f64::MAX`; decided in log space.
    pub overflow_points: usize,
    #[serde(with = "crate::io::extended_f64")]
    pub min_slack: f64,
    /// Largest `K₁` the samples would allow with the constructed `K₂`.
    pub empirical_k1: Option<f64>,
    pub holds: bool,
}

/// Constant of `e^{β log² t} ≥ K |t − 1|^{αβ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarCoercivity {
    pub alpha: f64,
    pub beta: f64,
    /// `K̂ = inf_{s>0} e^{s² − αs}` (grid infimum refined at `s = α/2`).
    pub k_hat: f64,
    pub log_k_hat: f64,
    /// `min{K̂, 1}`: the constant for `β = 1`.
    pub k_base: f64,
    /// `min{K̂, 1}^β`, valid for every `β > 0`.
    pub k: f64,
    pub log_k: f64,
    pub certificate: CoercivityCertificate,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// `log min{K̂, 1}` with `K̂ = inf_{s>0} e^{s² − αs}`.
fn log_k_base(alpha: f64) -> (f64, f64) {
    let n = 4000;
    let hi = 2.0 * alpha.max(1.0);
    let grid_min = (1..=n)
        .map(|i| {
            let s = hi * i as f64 / n as f64;
            s * s - alpha * s
        })
        .fold(f64::INFINITY, f64::min);
    let analytic = -alpha * alpha / 4.0;
    let log_k_hat = grid_min.min(analytic);
    (log_k_hat, log_k_hat.min(0.0))
}

/// Builds the constant and checks it on `t ∈ [10⁻⁶, 10⁶]` (log grid, 20 001 points).
pub fn scalar_coercivity_constant(alpha: f64, beta: f64) -> Result<ScalarCoercivity> {
    check_positive("alpha", alpha)?;
    check_positive("beta", beta)?;
    let (log_k_hat, log_base) = log_k_base(alpha);
    let log_k = beta * log_base;
    let count = 20_001;
    let results: Vec<Comparison> = (0..count)
        .into_par_iter()
        .map(|i| {
            let t = 10f64.powf(-6.0 + 12.0 * i as f64 / (count - 1) as f64);
            scalar_side(t, alpha, beta, log_k)
        })
        .collect();
    let mut cert = certificate("scalar-coercivity", "t=1e-6:1e6:20001:log plus t=1", count + 1, &results);
    let at_one = scalar_side(1.0, alpha, beta, log_k);
    absorb(&mut cert, &at_one);
    cert.params = CoercivityParams { alpha: Some(alpha), beta: Some(beta), ..Default::default() };
    cert.k1 = log_k.exp();
    cert.k2 = 0.0;
    Ok(ScalarCoercivity {
        alpha,
        beta,
        k_hat: log_k_hat.exp(),
        log_k_hat,
        k_base: log_base.exp(),
        k: log_k.exp(),
        log_k,
        certificate: cert,
    })
}

fn scalar_side(t: f64, alpha: f64, beta: f64, log_k: f64) -> Comparison {
    let l = t.ln();
    let d = (t - 1.0).abs();
    let rhs = if d == 0.0 { 0.0 } else { (log_k + alpha * beta * d.ln()).exp() };
    let mut c = compare(beta * l * l, rhs);
    if d > 0.0 && !rhs.is_finite() {
        c.holds = beta * l * l >= log_k + alpha * beta * d.ln() - REL_TOL;
    }
    c
}

fn certificate(claim: &str, grid: &str, points: usize, results: &[Comparison]) -> CoercivityCertificate {
    let mut c = CoercivityCertificate {
        claim: claim.to_string(),
        params: CoercivityParams::default(),
        k1: 0.0,
        k2: 0.0,
        constants: BTreeMap::new(),
        grid: grid.to_string(),
        points,
        violations: 0,
        overflow_points: 0,
        min_slack: f64::INFINITY,
        empirical_k1: None,
        holds: true,
    };
    for r in results {
        absorb(&mut c, r);
    }
    c
}

fn absorb(c: &mut CoercivityCertificate, r: &Comparison) {
    if !r.holds {
        c.violations += 1;
        c.holds = false;
    }
    if r.overflow {
        c.overflow_points += 1;
    }
    if r.slack < c.min_slack {
        c.min_slack = r.slack;
    }
}

/// `1/C` and `K̃/C` of the Taylor bound `C √(s+t)^γ − K̃ ≤ √s^γ` for `t ∈ (0, a)`, `s > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorConstants {
    pub m: u32,
    pub c: f64,
    pub k_tilde: f64,
}

/// `m` with `γ − 2m > 0 ≥ γ − 2m − 2`.
pub fn taylor_order(gamma: f64) -> u32 {
    let mut m = ((gamma / 2.0).ceil() - 1.0).max(0.0) as u32;
    while gamma - 2.0 * m as f64 <= 0.0 && m > 0 {
        m -= 1;
    }
    while gamma - 2.0 * m as f64 - 2.0 > 0.0 {
        m += 1;
    }
    m
}

pub fn taylor_constants(a: f64, gamma: f64) -> TaylorConstants {
    let m = taylor_order(gamma);
    let mut inv_c = 0.0;
    let mut coef = 1.0; // γ(γ−2)⋯(γ−2j+2)/(2^j j!)
    for j in 0..=m {
        inv_c += coef * a.powi(j as i32);
        coef *= (gamma - 2.0 * j as f64) / (2.0 * (j + 1) as f64);
    }
    // after the loop coef = γ(γ−2)⋯(γ−2m)/(2^{m+1}(m+1)!)
    let kt_over_c = coef * a.powi(m as i32 + 1);
    let c = 1.0 / inv_c;
    TaylorConstants { m, c, k_tilde: kt_over_c * c }
}

/// Constants of `e^{β(log²λ1 + log²λ2)} ≥ K₁((λ1−1)² + (λ2−1)²)^{αβ/2} − K₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairConstants {
    pub log_k: f64,
    pub taylor: TaylorConstants,
    pub k1: f64,
    pub k2: f64,
}

pub fn pair_constants(alpha: f64, beta: f64) -> PairConstants {
    let gamma = alpha * beta;
    let (_, log_base) = log_k_base(alpha);
    let log_k = beta * log_base;
    let k = log_k.exp();
    let taylor = taylor_constants(4.0, gamma);
    // both large: K²; mixed: K C
    let k1 = (k * k).min(k * taylor.c);
    // both in (0, 3]: sup of K₁ (…)^{γ/2} is at (3, 3); mixed: K K̃
    let k2 = (k1 * 8f64.powf(gamma / 2.0)).max(k * taylor.k_tilde);
    PairConstants { log_k, taylor, k1, k2 }
}

/// Constructs the pair constants and checks them on `λᵢ ∈ [lo, hi]`, `count × count`, log-spaced.
pub fn verify_pair_coercivity(alpha: f64, beta: f64, lo: f64, hi: f64, count: usize) -> Result<CoercivityCertificate> {
    check_positive("alpha", alpha)?;
    check_positive("beta", beta)?;
    if !(lo > 0.0 && lo < hi) || count < 2 {
        return Err(Error::InvalidInput(format!("bad grid {lo}:{hi}:{count}")));
    }
    let pc = pair_constants(alpha, beta);
    let gamma = alpha * beta;
    let axis: Vec<f64> = (0..count)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp())
        .collect();
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(count * count + 1);
    for &a in &axis {
        for &b in &axis {
            pts.push((a, b));
        }
    }
    pts.push((1.0, 1.0));
    let results: Vec<Comparison> = pts
        .par_iter()
        .map(|&(l1, l2)| {
            let log_lhs = beta * (l1.ln().powi(2) + l2.ln().powi(2));
            let d2 = (l1 - 1.0).powi(2) + (l2 - 1.0).powi(2);
            let rhs = pc.k1 * d2.powf(gamma / 2.0) - pc.k2;
            compare(log_lhs, rhs)
        })
        .collect();
    let grid = format!("lambda_i={lo}:{hi}:{count}:log squared plus (1,1)");
    let mut cert = certificate("pair-coercivity", &grid, pts.len(), &results);
    cert.params = CoercivityParams { alpha: Some(alpha), beta: Some(beta), ..Default::default() };
    cert.k1 = pc.k1;
    cert.k2 = pc.k2;
    cert.constants.insert("K".into(), pc.log_k.exp());
    cert.constants.insert("taylor_m".into(), pc.taylor.m as f64);
    cert.constants.insert("taylor_C".into(), pc.taylor.c);
    cert.constants.insert("taylor_K_tilde".into(), pc.taylor.k_tilde);
    Ok(cert)
}

/// Constants of `Ŵ(U) ≥ K₁ ‖U − 1‖^q − K₂` for the full energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub a1: f64,
    pub a2: f64,
    pub k1: f64,
    pub k2: f64,
}

/// Construction for dimension `n`.
///
/// Deviatoric part (`γ = 2q`, `β = k`): for `n = 2` the pair constants of
/// [`pair_constants`]; for `n = 3` the bound
/// `e^{k Σ log² λ̃ᵢ} ≥ K maxᵢ |λ̃ᵢ − 1|^{2q} ≥ K n^{−q} (Σ(λ̃ᵢ − 1)²)^q`.
/// Volumetric part: the scalar constant for `d = det U^{1/n}` with
/// `β = k̂ n²`, `αβ = 2q`, since `(tr log U)² = n² log² d`.
pub fn full_constants(p: &MaterialParams, q: f64, n: usize) -> Result<FullConstants> {
    p.validate()?;
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidInput(format!("q must be >= 1, got {q}")));
    }
    let nf = n as f64;
    let (k1_dev, k3_dev) = match n {
        2 => {
            let pc = pair_constants(2.0 * q / p.k, p.k);
            (pc.k1, pc.k2)
        }
        3 => {
            let (_, log_base) = log_k_base(2.0 * q / p.k);
            ((p.k * log_base).exp() * nf.powf(-q), 0.0)
        }
        other => return Err(Error::UnsupportedDimension(other)),
    };
    let beta_v = p.khat * nf * nf;
    let (_, log_base_v) = log_k_base(2.0 * q / beta_v);
    let kv = (beta_v * log_base_v).exp();
    let c1 = p.mu / p.k * k1_dev;
    let c2 = p.kappa / (2.0 * p.khat) * kv;
    let c3 = p.mu / p.k * k3_dev;
    let two_q2 = 2f64.powf(q - 2.0);
    let a2 = two_q2 * nf.powf(q) + 2f64.powf(3.0 * q - 3.0);
    let a1 = (two_q2 / c1).max(a2 / c2);
    Ok(FullConstants { c1, c2, c3, a1, a2, k1: 1.0 / a1, k2: c3 + a2 / a1 })
}

/// Random SPD `U` with eigenvalues log-uniform in `[lo, hi]`.
pub fn random_spd(seed: u64, index: u64, n: usize, lo: f64, hi: f64) -> Mat {
    let mut r = rng::stream(seed, index);
    let ev: Vec<f64> = (0..n).map(|_| rng::log_uniform(&mut r, lo, hi)).collect();
    let q = rng::rotation(&mut r, n);
    q * Mat::diag(&ev) * q.transpose()
}

/// Constructs the constants and checks them on `samples` random SPD `U`
/// (eigenvalues in `[10⁻³, 10³]`) plus `U = 1` and `U = 10³·1`.
pub fn verify_full_coercivity(
    p: &MaterialParams,
    q: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<CoercivityCertificate> {
    let fc = full_constants(p, q, n)?;
    let mut us: Vec<Mat> = (0..samples as u64).map(|i| random_spd(seed, i, n, 1e-3, 1e3)).collect();
    us.push(Mat::identity(n));
    us.push(Mat::identity(n).scale(1e3));
    let rows: Vec<(Comparison, Option<f64>)> = us
        .par_iter()
        .map(|u| {
            let w = energy_eh(u, p).value;
            let dist = (*u - Mat::identity(n)).norm();
            let rhs = fc.k1 * dist.powf(q) - fc.k2;
            let emp = if dist > 0.0 { Some((w + fc.k2) / dist.powf(q)) } else { None };
            (compare(w.ln(), rhs), emp)
        })
        .collect();
    let results: Vec<Comparison> = rows.iter().map(|r| r.0).collect();
    let grid = format!("{samples} random SPD, eigenvalues log-uniform in [1e-3, 1e3], seed {seed}; plus U = 1, 1e3*1");
    let mut cert = certificate("full-coercivity", &grid, us.len(), &results);
    cert.params = CoercivityParams { q: Some(q), n: Some(n), material: Some(*p), ..Default::default() };
    cert.k1 = fc.k1;
    cert.k2 = fc.k2;
    cert.empirical_k1 = rows.iter().filter_map(|r| r.1).reduce(f64::min);
    for (name, v) in [("C1", fc.c1), ("C2", fc.c2), ("C3", fc.c3), ("A1", fc.a1), ("A2", fc.a2)] {
        cert.constants.insert(name.into(), v);
    }
    Ok(cert)
}

/// Families showing that `e^{k ‖dev₂ log U‖²}` admits no bound of either form
/// `≥ K₁ ‖U − 1‖^{αk} − K₂` or `≥ K₁ ‖dev₂ U‖^{αk} − K₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoncoercivityWitness {
    /// `λ1 = λ2 = N + 1` violates the first bound.
    pub n_bound1: f64,
    pub lhs1: f64,
    pub rhs1: f64,
    /// `λ1 = 2N`, `λ2 = N` violates the second bound.
    pub n_bound2: f64,
    pub lhs2: f64,
    pub rhs2: f64,
}

fn dev_only(stretches: &[f64], k: f64) -> f64 {
    (k * HenckyMeasures::from_stretches(stretches).dev_norm_sq).exp()
}

fn dev2_norm(l1: f64, l2: f64) -> f64 {
    (l1 - l2).abs() / 2f64.sqrt()
}

/// Smallest integer `N` making each family's right-hand side exceed `target` times its
/// (constant) left-hand side; both are then evaluated directly.
pub fn dev_only_noncoercivity_witness(k: f64, alpha: f64, k1: f64, k2: f64, target: f64) -> Result<NoncoercivityWitness> {
    check_positive("k", k)?;
    check_positive("alpha", alpha)?;
    check_positive("K1", k1)?;
    if !(k2 >= 0.0) || !(target > 0.0) {
        return Err(Error::InvalidInput("K2 must be >= 0 and target > 0".into()));
    }
    let ak = alpha * k;
    // bound 1: K1 (2N²)^{αk/2} − K2 > target
    let log_n1 = 0.5 * ((2.0 / ak) * ((target + k2) / k1).ln() - 2f64.ln());
    let n1 = (log_n1.exp().floor() + 1.0).max(1.0);
    let lhs1_const = 1.0;
    // bound 2: K1 N^{αk} / 2^{αk/2} − K2 > e^{(k/2) log² 2} target
    let lhs2_const = (0.5 * k * 2f64.ln().powi(2)).exp();
    let log_n2 = (((lhs2_const * target + k2) / k1).ln() + 0.5 * ak * 2f64.ln()) / ak;
    let n2 = (log_n2.exp().floor() + 1.0).max(1.0);
    if !(n1.is_finite() && n2.is_finite()) {
        return Err(Error::InvalidInput("witness exceeds the floating-point range".into()));
    }
    let eval1 = |n: f64| {
        let lhs = dev_only(&[n + 1.0, n + 1.0], k);
        let dist = (Mat::diag(&[n + 1.0, n + 1.0]) - Mat::identity(2)).norm();
        (lhs, k1 * dist.powf(ak) - k2)
    };
    let eval2 = |n: f64| {
        let lhs = dev_only(&[2.0 * n, n], k);
        (lhs, k1 * dev2_norm(2.0 * n, n).powf(ak) - k2)
    };
    let (mut n1, mut n2) = (n1, n2);
    // guard against rounding in the closed-form inversion
    while eval1(n1).1 <= lhs1_const * target {
        n1 += 1.0;
    }
    while eval2(n2).1 <= lhs2_const * target {
        n2 += 1.0;
    }
    let (lhs1, rhs1) = eval1(n1);
    let (lhs2, rhs2) = eval2(n2);
    Ok(NoncoercivityWitness { n_bound1: n1, lhs1, rhs1, n_bound2: n2, lhs2, rhs2 })
}

/// Smallest `c` on a log grid in `[1, c_max]` with `C(1 + ‖c·1‖^q) < W_eH(c·1)`.
pub fn polynomial_bound_witness(p: &MaterialParams, c_bound: f64, q: f64, n: usize, c_max: f64) -> Option<f64> {
    let count = 2001;
    (0..count).map(|i| c_max.powf(i as f64 / (count - 1) as f64)).find(|&c| {
        let f = Mat::identity(n).scale(c);
        let w = energy_eh(&f, p).value;
        let norm = c * (n as f64).sqrt();
        let log_rhs = c_bound.ln() + (1.0 + norm.powf(q)).ln();
        w.ln() > log_rhs
    })
}

/// One row of the discrete coercivity table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QCoercivityRow {
    pub bound: f64,
    pub k_tilde: f64,
    /// Fields with `I ≤ bound`.
    pub admitted: usize,
    /// Largest `‖∇φ‖_{L^q}` among admitted fields.
    pub max_grad_norm: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QCoercivityReport {
    pub q: f64,
    pub area: f64,
    pub k1: f64,
    pub k2: f64,
    pub fields: usize,
    pub rows: Vec<QCoercivityRow>,
    pub holds: bool,
}

/// `‖∇φ‖_{L^q}` for a piecewise-affine field, or `None` if an element is inverted.
pub fn grad_lq_norm(mesh: &Mesh, field: &DiscreteField, q: f64) -> f64 {
    let grads = element_gradients(mesh, field);
    let sum: f64 = grads.iter().zip(mesh.areas()).map(|(f, a)| a * f.norm().powf(q)).sum();
    sum.powf(1.0 / q)
}

/// `K̃(K) = [2^{q−1}((K + K₂|Ω|)/K₁ + |Ω| n^{q/2})]^{1/q}` with `n = 2`.
pub fn k_tilde_bound(bound: f64, q: f64, k1: f64, k2: f64, area: f64) -> f64 {
    (2f64.powf(q - 1.0) * ((bound + k2 * area) / k1 + area * 2f64.powf(q / 2.0))).powf(1.0 / q)
}

/// Samples fields on `mesh` and checks `I(φ) ≤ K ⇒ ‖∇φ‖_{L^q} ≤ K̃(K)` for every `K` in `bounds`.
///
/// Fields: the identity, the dilations `c·x` for `c` in `[10⁻², 10³]`, and
/// `samples` random nodal perturbations of random affine maps.
pub fn q_coercivity_of_functional(
    mesh: &Mesh,
    p: &MaterialParams,
    q: f64,
    bounds: &[f64],
    samples: usize,
    seed: u64,
) -> Result<QCoercivityReport> {
    let fc = full_constants(p, q, 2)?;
    let area: f64 = mesh.areas().iter().sum();
    let mut fields: Vec<DiscreteField> = vec![DiscreteField::identity(mesh)];
    for i in 0..=50 {
        let c = 10f64.powf(-2.0 + 5.0 * i as f64 / 50.0);
        fields.push(DiscreteField::affine(mesh, &Mat::identity(2).scale(c), [0.0, 0.0]));
    }
    let diam = mesh.diameter();
    let random: Vec<DiscreteField> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            use rand::Rng;
            let mut r = rng::stream(seed, i);
            let s = [rng::log_uniform(&mut r, 0.05, 1e3), rng::log_uniform(&mut r, 0.05, 1e3)];
            let a = rng::deformation_with_stretches(&mut r, &s);
            let mut f = DiscreteField::affine(mesh, &a, [0.0, 0.0]);
            let amp = r.gen_range(0.0..0.2) * diam * s[0].min(s[1]);
            for x in f.values.iter_mut() {
                x[0] += amp * r.gen_range(-1.0..1.0);
                x[1] += amp * r.gen_range(-1.0..1.0);
            }
            f
        })
        .collect();
    fields.extend(random);
    let evaluated: Vec<(f64, f64)> = fields
        .par_iter()
        .map(|f| (total_energy(mesh, f, p).value, grad_lq_norm(mesh, f, q)))
        .collect();
    let rows: Vec<QCoercivityRow> = bounds
        .iter()
        .map(|&b| {
            let kt = k_tilde_bound(b, q, fc.k1, fc.k2, area);
            let admitted: Vec<f64> = evaluated.iter().filter(|(e, _)| *e <= b).map(|(_, g)| *g).collect();
            QCoercivityRow {
                bound: b,
                k_tilde: kt,
                admitted: admitted.len(),
                max_grad_norm: admitted.iter().cloned().fold(0.0, f64::max),
                violations: admitted.iter().filter(|&&g| g > kt).count(),
            }
        })
        .collect();
    let holds = rows.iter().all(|r| r.violations == 0);
    Ok(QCoercivityReport { q, area, k1: fc.k1, k2: fc.k2, fields: fields.len(), rows, holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_constant_examples() {
        let s = scalar_coercivity_constant(3.0, 1.0).unwrap();
        assert!((s.k_hat - (-2.25f64).exp()).abs() < 1e-15);
        assert!((s.k - 0.1054).abs() < 1e-4);
        assert!(s.certificate.holds);
        let s = scalar_coercivity_constant(0.1, 1.0).unwrap();
        assert!((s.k - (-0.0025f64).exp()).abs() < 1e-12);
        assert!((s.k - 0.9975).abs() < 1e-4);
        // t = 1: LHS 1, RHS 0
        assert!(s.certificate.min_slack <= 1.0);
        let c = scalar_side(1.0, 3.0, 1.0, s.log_k);
        assert_eq!(c.slack, 1.0);
    }

    #[test]
    fn scalar_constant_with_large_beta_overflows_safely() {
        let s = scalar_coercivity_constant(2.0, 8.0).unwrap();
        assert!(s.certificate.holds);
        assert!(s.certificate.overflow_points > 0);
    }

    #[test]
    fn taylor_order_rule() {
        for &(g, m) in &[(0.5, 0), (2.0, 0), (2.5, 1), (4.0, 1), (4.1, 2), (8.0, 3)] {
            assert_eq!(taylor_order(g), m, "gamma {g}");
            let mf = m as f64;
            assert!(g - 2.0 * mf > 0.0 && g - 2.0 * mf - 2.0 <= 0.0);
        }
    }

    #[test]
    fn taylor_bound_holds_on_samples() {
        for &gamma in &[0.7, 2.0, 3.3, 8.0] {
            let tc = taylor_constants(4.0, gamma);
            for i in 0..200 {
                let t = 4.0 * (i as f64 + 0.5) / 200.0;
                for j in 0..200 {
                    let s = 1.0 + 10f64.powf(j as f64 / 20.0);
                    let lhs = tc.c * (s + t).sqrt().powf(gamma) - tc.k_tilde;
                    assert!(lhs <= s.sqrt().powf(gamma) * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn product_inequality_at_three() {
        let (a, b): (f64, f64) = (3.0, 3.0);
        assert_eq!(((a - 1.0) * (b - 1.0)).powi(2), 16.0);
        assert_eq!((a - 1.0).powi(2) + (b - 1.0).powi(2), 8.0);
    }

    #[test]
    fn pair_certificate_holds() {
        let c = verify_pair_coercivity(4.0, 1.0, 1e-4, 1e3, 120).unwrap();
        assert!(c.holds, "min slack {}", c.min_slack);
        assert!(c.min_slack >= 0.0);
        assert!(c.k1 > 0.0 && c.k2 >= 0.0);
    }

    #[test]
    fn full_certificate_holds_and_k1_decreases_in_q() {
        let p = MaterialParams::default();
        for n in [2, 3] {
            let c = verify_full_coercivity(&p, 2.0, n, 5_000, 1).unwrap();
            assert!(c.holds);
            assert!(c.min_slack >= p.reference_energy() * 0.0);
            let k = [1.0, 2.0, 4.0].map(|q| full_constants(&p, q, n).unwrap().k1);
            assert!(k[0] >= k[1] && k[1] >= k[2], "{k:?}");
            assert!(k.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn identity_slack_is_reference_energy_plus_k2() {
        let p = MaterialParams::default();
        let fc = full_constants(&p, 2.0, 2).unwrap();
        let w = energy_eh(&Mat::identity(2), &p).value;
        let c = compare(w.ln(), -fc.k2);
        assert!(c.holds && c.slack >= p.reference_energy());
    }

    #[test]
    fn noncoercivity_witness_example() {
        let w = dev_only_noncoercivity_witness(1.0, 1.0, 1.0, 0.0, 1e6).unwrap();
        assert_eq!(w.lhs1, 1.0);
        assert!(w.rhs1 > 1e6);
        // (2N²)^{1/2} > 10⁶ first at N = 707107
        assert_eq!(w.n_bound1, 707_107.0);
        let c = (0.5 * 2f64.ln().powi(2)).exp();
        assert!((w.lhs2 - c).abs() < 1e-14);
        assert!(w.rhs2 > c * 1e6);
    }

    #[test]
    fn no_polynomial_upper_bound() {
        let p = MaterialParams::default();
        for &c in &[1.0, 1e3, 1e10] {
            for &q in &[1.0, 2.0, 4.0] {
                for n in [2, 3] {
                    assert!(polynomial_bound_witness(&p, c, q, n, 1e6).is_some(), "C={c} q={q} n={n}");
                }
            }
        }
    }

    #[test]
    fn functional_coercivity_on_a_mesh() {
        use crate::solver::make_rect_mesh;
        let p = MaterialParams::default();
        let m = make_rect_mesh(4, 4, 1.0, 1.0).unwrap();
        let id = DiscreteField::identity(&m);
        assert!((total_energy(&m, &id, &p).value - p.reference_energy()).abs() < 1e-12);
        for q in [1.0, 2.0, 4.0] {
            assert!((grad_lq_norm(&m, &id, q) - 2f64.sqrt()).abs() < 1e-12);
        }
        let r = q_coercivity_of_functional(&m, &p, 2.0, &[10.0, 1e2, 1e4, 1e8], 1_000, 3).unwrap();
        assert!(r.holds, "{:?}", r.rows);
        assert!(r.rows.iter().all(|row| row.admitted > 0));
        for c in [2.0, 10.0, 100.0] {
            let f = DiscreteField::affine(&m, &Mat::identity(2).scale(c), [0.0, 0.0]);
            let e = total_energy(&m, &f, &p).value;
            let g = grad_lq_norm(&m, &f, 2.0);
            assert!((g - c * 2f64.sqrt()).abs() < 1e-10 * c);
            assert!(g <= k_tilde_bound(e, 2.0, r.k1, r.k2, 1.0));
        }
    }
}
