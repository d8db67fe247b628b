//! Sampled rank-one convexity: `t ↦ W(F + t ξ⊗η)` along random lines.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{tested, Outcome, ScanReport};
use crate::rng;
use crate::tensor::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RankOneSampler {
    /// Principal stretches log-uniform in `[lo, hi]`, random rotations on both sides.
    Stretches { lo: f64, hi: f64 },
    /// `‖dev log U‖` uniform in `[dev_lo, dev_hi]` in a random deviatoric direction,
    /// plus `tr log U` uniform in `[−vol, vol]`.
    DevBiased { dev_lo: f64, dev_hi: f64, vol: f64 },
    /// `F = 1`.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneConfig {
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub sampler: RankOneSampler,
    /// Relative tolerance on the midpoint gap `(W₊ + W₋ − 2W₀)/max|W|`.
    pub tolerance: f64,
    /// Stop after the first chunk of samples that contains a violation.
    pub stop_at_first: bool,
}

impl RankOneConfig {
    pub fn new(dim: usize, samples: usize, seed: u64, sampler: RankOneSampler) -> Self {
        Self { dim, samples, seed, sampler, tolerance: 1e-10, stop_at_first: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankOneWitness {
    pub f: Mat,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    pub second_derivative: f64,
}

const CHUNK: usize = 8192;

fn deviatoric_direction(r: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let mut v = rng::unit_vector(r, dim);
        let mean = v.iter().sum::<f64>() / dim as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn sample_f(r: &mut ChaCha8Rng, dim: usize, sampler: &RankOneSampler) -> Mat {
    match *sampler {
        RankOneSampler::Identity => Mat::identity(dim),
        RankOneSampler::Stretches { lo, hi } => {
            let s: Vec<f64> = (0..dim).map(|_| rng::log_uniform(r, lo, hi)).collect();
            rng::deformation_with_stretches(r, &s)
        }
        RankOneSampler::DevBiased { dev_lo, dev_hi, vol } => {
            let d = r.gen_range(dev_lo..=dev_hi);
            let t = if vol > 0.0 { r.gen_range(-vol..=vol) } else { 0.0 };
            let v = deviatoric_direction(r, dim);
            let s: Vec<f64> = v.iter().map(|x| (d * x + t / dim as f64).exp()).collect();
            rng::deformation_with_stretches(r, &s)
        }
    }
}

/// Midpoint second difference along `ξ⊗η` with step `10⁻⁴(1 + ‖F‖)`.
///
/// Returns `None` when a stencil point has infinite energy.
pub fn line_second_difference<E>(energy: &E, f: &Mat, xi: &[f64], eta: &[f64]) -> Option<(f64, f64)>
where
    E: Fn(&Mat) -> f64,
{
    let h = 1e-4 * (1.0 + f.norm());
    let a = Mat::outer(xi, eta).scale(h);
    let w0 = energy(f);
    let wp = energy(&(*f + a));
    let wm = energy(&(*f - a));
    if !(w0.is_finite() && wp.is_finite() && wm.is_finite()) {
        return None;
    }
    let gap = wp + wm - 2.0 * w0;
    let scale = w0.abs().max(wp.abs()).max(wm.abs()).max(f64::MIN_POSITIVE);
    Some((gap / (h * h), gap / scale))
}

fn pack(f: &Mat, xi: &[f64], eta: &[f64]) -> Vec<f64> {
    let mut p = f.to_row_major();
    p.extend_from_slice(xi);
    p.extend_from_slice(eta);
    p
}

/// Estimates `d²/dt² W(F + t ξ⊗η)` at sampled `(F, ξ, η)`.
///
/// A sample whose stencil leaves `GL⁺` is skipped and counted. The returned
/// witness is the worst violation seen, if any.
pub fn rank_one_scan<E>(energy: E, cfg: &RankOneConfig) -> (ScanReport, Option<RankOneWitness>)
where
    E: Fn(&Mat) -> f64 + Sync,
{
    let dim = cfg.dim;
    let one = |idx: usize| -> Outcome {
        let mut r = rng::stream(cfg.seed, idx as u64);
        let f = sample_f(&mut r, dim, &cfg.sampler);
        let xi = rng::unit_vector(&mut r, dim);
        let eta = rng::unit_vector(&mut r, dim);
        match line_second_difference(&energy, &f, &xi, &eta) {
            Some((d2, margin)) => tested(pack(&f, &xi, &eta), d2, margin),
            None => Outcome::Skipped,
        }
    };
    let mut outcomes: Vec<Outcome> = Vec::with_capacity(cfg.samples);
    let mut start = 0;
    while start < cfg.samples {
        let end = (start + CHUNK).min(cfg.samples);
        let chunk: Vec<Outcome> = (start..end).into_par_iter().map(one).collect();
        let hit = chunk
            .iter()
            .any(|o| matches!(o, Outcome::Tested(s) if !(s.margin >= -cfg.tolerance)));
        outcomes.extend(chunk);
        start = end;
        if hit && cfg.stop_at_first {
            break;
        }
    }
    let grid = format!("{:?}, dim {}, {} samples requested, seed {}", cfg.sampler, dim, cfg.samples, cfg.seed);
    let report = ScanReport::from_outcomes(&format!("rank-one-convexity-{dim}d"), grid, cfg.tolerance, outcomes);
    let witness = if report.fails() {
        report.worst.as_ref().map(|s| {
            let n2 = dim * dim;
            let f = Mat::from_row_major(&s.point[..n2]).expect("packed matrix");
            RankOneWitness {
                f,
                xi: s.point[n2..n2 + dim].to_vec(),
                eta: s.point[n2 + dim..].to_vec(),
                second_derivative: s.value,
            }
        })
    } else {
        None
    };
    (report, witness)
}
