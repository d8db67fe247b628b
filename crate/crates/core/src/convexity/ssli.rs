//! Sum-of-squared-logarithms sampler.
//!
//! For positive `μ` and `λ` with `e_j(λ) ≤ e_j(μ)` for `j < n` and
//! `e_n(λ) = e_n(μ)`, the claim is `Σ log² λ ≤ Σ log² μ`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{tested, Outcome, ScanReport};
use crate::error::{Error, Result};
use crate::rng;

pub const SSLI_RETRIES: usize = 100;
pub const SSLI_SLACK: f64 = 1e-10;
/// Relative slack when re-checking the symmetric-polynomial constraints on computed roots.
const CONSTRAINT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsliTuple {
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl SsliTuple {
    /// `Σ log² μ − Σ log² λ`.
    pub fn margin(&self) -> f64 {
        sum_log2(&self.mu) - sum_log2(&self.lambda)
    }
}

fn sum_log2(v: &[f64]) -> f64 {
    v.iter().map(|x| x.ln().powi(2)).sum()
}

/// Elementary symmetric polynomials `e_1..e_n`.
pub fn elementary_symmetric(v: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; v.len() + 1];
    e[0] = 1.0;
    for (i, &x) in v.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += e[j - 1] * x;
        }
    }
    e.remove(0);
    e
}

fn satisfies_constraints(mu: &[f64], lambda: &[f64]) -> bool {
    if lambda.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return false;
    }
    let em = elementary_symmetric(mu);
    let el = elementary_symmetric(lambda);
    let n = mu.len();
    (0..n - 1).all(|j| el[j] <= em[j] * (1.0 + CONSTRAINT_RTOL))
        && ((el[n - 1] - em[n - 1]).abs() <= CONSTRAINT_RTOL * em[n - 1])
}

/// Real roots of `x³ − a x² + b x − c`, descending, if all three are real.
fn cubic_roots(a: f64, b: f64, c: f64) -> Option<[f64; 3]> {
    // depressed cubic y³ + p y + q with x = y + a/3
    let s = a / 3.0;
    let p = b - a * a / 3.0;
    let q = -2.0 * s * s * s + s * b - c;
    if p >= 0.0 {
        return None;
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = 3.0 * q / (p * m);
    if !(-1.0..=1.0).contains(&arg) {
        return None;
    }
    let theta = arg.acos() / 3.0;
    let mut r = [0.0; 3];
    for (k, slot) in r.iter_mut().enumerate() {
        *slot = s + m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
    }
    r.sort_by(|x, y| y.partial_cmp(x).unwrap());
    // one Newton step per root
    for x in r.iter_mut() {
        let f = ((*x - a) * *x + b) * *x - c;
        let df = (3.0 * *x - 2.0 * a) * *x + b;
        if df != 0.0 {
            *x -= f / df;
        }
    }
    Some(r)
}

fn construct_2d(r: &mut ChaCha8Rng, mu: &[f64]) -> Option<Vec<f64>> {
    let p = mu[0] * mu[1];
    let s_mu = mu[0] + mu[1];
    let s_min = 2.0 * p.sqrt();
    let s = s_min + r.gen::<f64>() * (s_mu - s_min).max(0.0);
    // stable roots of x² − s x + p
    let disc = (s * s - 4.0 * p).max(0.0);
    let l1 = 0.5 * (s + disc.sqrt());
    Some(vec![l1, p / l1])
}

fn construct_3d(r: &mut ChaCha8Rng, mu: &[f64], attempt: usize) -> Option<Vec<f64>> {
    let e = elementary_symmetric(mu);
    let shrink = 0.5f64.powi(attempt as i32 / 10);
    let a = e[0] * (1.0 - shrink * r.gen::<f64>() * 0.5);
    let b = e[1] * (1.0 - shrink * r.gen::<f64>() * 0.5);
    let roots = cubic_roots(a, b, e[2])?;
    // product is pinned; the smallest root is recovered from it
    let smallest = e[2] / (roots[0] * roots[1]);
    Some(vec![roots[0], roots[1], smallest])
}

fn construct_nd(r: &mut ChaCha8Rng, mu: &[f64]) -> Option<Vec<f64>> {
    let n = mu.len() as f64;
    let logs: Vec<f64> = mu.iter().map(|x| x.ln()).collect();
    let mean = logs.iter().sum::<f64>() / n;
    let pull = r.gen::<f64>();
    let noise: Vec<f64> = (0..mu.len()).map(|_| r.gen_range(-0.2..0.2)).collect();
    let noise_mean = noise.iter().sum::<f64>() / n;
    Some(
        logs.iter()
            .zip(&noise)
            .map(|(l, z)| (l - pull * (l - mean) + (z - noise_mean)).exp())
            .collect(),
    )
}

/// Builds one constraint-satisfying `λ` for `μ`, retrying up to [`SSLI_RETRIES`] times.
pub fn construct_lambda(r: &mut ChaCha8Rng, mu: &[f64]) -> Result<Vec<f64>> {
    for attempt in 0..SSLI_RETRIES {
        let candidate = match mu.len() {
            2 => construct_2d(r, mu),
            3 => construct_3d(r, mu, attempt),
            _ => construct_nd(r, mu),
        };
        if let Some(l) = candidate {
            if satisfies_constraints(mu, &l) {
                return Ok(l);
            }
        }
    }
    Err(Error::ConstraintConstructionFailed { retries: SSLI_RETRIES })
}

/// Trial `index` of a sampler run: `μ` log-uniform in `[e⁻³, e³]ⁿ` and a constructed `λ`.
pub fn ssli_tuple(n: usize, seed: u64, index: u64) -> Result<SsliTuple> {
    let mut r = rng::stream(seed, index);
    let lim = 3f64.exp();
    let mu: Vec<f64> = (0..n).map(|_| rng::log_uniform(&mut r, 1.0 / lim, lim)).collect();
    let lambda = construct_lambda(&mut r, &mu)?;
    Ok(SsliTuple { mu, lambda })
}

/// Runs `trials` constructions; construction failures are counted as skipped.
pub fn ssli_sampler(n: usize, trials: usize, seed: u64) -> Result<ScanReport> {
    if !(2..=4).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("ssli needs at least one trial".into()));
    }
    let outcomes: Vec<Outcome> = (0..trials as u64)
        .into_par_iter()
        .map(|i| match ssli_tuple(n, seed, i) {
            Ok(t) => {
                let m = t.margin();
                let mut point = t.mu.clone();
                point.extend(&t.lambda);
                tested(point, m, m)
            }
            Err(_) => Outcome::Skipped,
        })
        .collect();
    let desc = format!("n={n}, {trials} trials, mu log-uniform in [e^-3, e^3], seed {seed}");
    Ok(ScanReport::from_outcomes(&format!("sum-of-squared-logs-{n}d"), desc, SSLI_SLACK, outcomes))
}
