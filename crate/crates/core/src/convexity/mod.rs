//! Grid- and sample-based convexity checks.
//!
//! Every check produces a [`ScanReport`]. A verdict of `Holds` means no
//! violation beyond the recorded tolerance on the recorded grid; it is a
//! falsifiable statement about that grid, not a proof.

mod hessian;
mod rank_one;
mod scalar;
mod ssli;
mod steigmann;
mod volumetric;

pub use hessian::{
    det_hessian_closed_form, det_hessian_sign, hessian_psi, hessian_scan, hessian_psi_fd, lambda_space_matrix,
};
pub use rank_one::{line_second_difference, rank_one_scan, RankOneConfig, RankOneSampler, RankOneWitness};
pub use scalar::{
    coth_minus_inv, f7, scalar_b_of_a, scalar_r, scalar_rhat, scalar_t_of_a, verify_appendix_b,
    verify_lemma, AppendixGrid, Lemma,
};
pub use ssli::{elementary_symmetric, ssli_sampler, ssli_tuple, SsliTuple};
pub use steigmann::{
    fixture_cof_norm, fixture_quartic, steigmann_check_2d, steigmann_check_3d, SteigmannGrid,
};
pub use volumetric::{volumetric_convexity_check, volumetric_threshold};

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt_f64, CsvTable};

/// At most this many violations are stored verbatim; the count is always exact.
pub const MAX_STORED_VIOLATIONS: usize = 256;

/// One scanned variable: `count` points from `lo` to `hi`, linear or geometric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub log: bool,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize, log: bool) -> Result<Self> {
        let a = Self { lo, hi, count, log };
        a.validate()?;
        Ok(a)
    }

    pub fn linear(lo: f64, hi: f64, count: usize) -> Self {
        Self::new(lo, hi, count, false).expect("valid linear axis")
    }

    pub fn geometric(lo: f64, hi: f64, count: usize) -> Self {
        Self::new(lo, hi, count, true).expect("valid log axis")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidInput(format!("axis needs lo < hi, got {}..{}", self.lo, self.hi)));
        }
        if self.count < 2 {
            return Err(Error::InvalidInput(format!("axis needs count >= 2, got {}", self.count)));
        }
        if self.log && self.lo <= 0.0 {
            return Err(Error::InvalidInput("log spacing requires lo > 0".into()));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        let s = i as f64 / (self.count - 1) as f64;
        if i + 1 == self.count {
            return self.hi;
        }
        if self.log {
            (self.lo.ln() + s * (self.hi.ln() - self.lo.ln())).exp()
        } else {
            self.lo + s * (self.hi - self.lo)
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Parses `lo:hi:count` or `lo:hi:count:log`.
impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidInput(format!("grid spec '{s}' is not lo:hi:count[:log]"));
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        let log = match parts.get(3).map(|p| p.trim()) {
            None | Some("lin") => false,
            Some("log") => true,
            Some(_) => return Err(bad()),
        };
        Axis::new(lo, hi, count, log)
    }
}

/// Tensor-product grid over named axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub names: Vec<String>,
    pub axes: Vec<Axis>,
}

impl ScanGrid {
    pub fn new(named: &[(&str, Axis)]) -> Self {
        Self {
            names: named.iter().map(|(n, _)| n.to_string()).collect(),
            axes: named.iter().map(|(_, a)| *a).collect(),
        }
    }

    pub fn total(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Point `index` in row-major order (last axis fastest).
    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.axes.len()];
        for (d, a) in self.axes.iter().enumerate().rev() {
            p[d] = a.value(index % a.count);
            index /= a.count;
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// A tested point: `margin >= -tolerance` means the claim holds there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub point: Vec<f64>,
    #[serde(with = "crate::io::extended_f64")]
    pub value: f64,
    #[serde(with = "crate::io::extended_f64")]
    pub margin: f64,
}

/// Per-point outcome of a scan.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Tested(Sample),
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub claim: String,
    pub grid: String,
    pub tolerance: f64,
    pub points_tested: usize,
    pub points_skipped: usize,
    pub violation_count: usize,
    pub violations: Vec<Sample>,
    #[serde(with = "crate::io::extended_f64")]
    pub min_margin: f64,
    /// Point with the smallest margin, stored whether or not it violates.
    pub worst: Option<Sample>,
    pub verdict: Verdict,
}

impl ScanReport {
    /// Ordered reduction of per-point outcomes.
    pub fn from_outcomes(claim: &str, grid: String, tolerance: f64, outcomes: Vec<Outcome>) -> Self {
        let mut r = ScanReport {
            claim: claim.to_string(),
            grid,
            tolerance,
            points_tested: 0,
            points_skipped: 0,
            violation_count: 0,
            violations: Vec::new(),
            min_margin: f64::INFINITY,
            worst: None,
            verdict: Verdict::Inconclusive,
        };
        for o in outcomes {
            match o {
                Outcome::Skipped => r.points_skipped += 1,
                Outcome::Tested(s) => {
                    r.points_tested += 1;
                    // NaN margins count as violations.
                    let violates = !(s.margin >= -tolerance);
                    if violates {
                        r.violation_count += 1;
                        if r.violations.len() < MAX_STORED_VIOLATIONS {
                            r.violations.push(s.clone());
                        }
                    }
                    if s.margin < r.min_margin || (s.margin.is_nan() && !r.min_margin.is_nan()) {
                        r.min_margin = s.margin;
                        r.worst = Some(s);
                    }
                }
            }
        }
        r.verdict = if r.violation_count > 0 {
            Verdict::Fails
        } else if r.points_tested > 0 {
            Verdict::Holds
        } else {
            Verdict::Inconclusive
        };
        r
    }

    /// Evaluates `f` at every grid point in parallel and reduces in grid order.
    pub fn scan<F>(claim: &str, grid: &ScanGrid, tolerance: f64, f: F) -> Self
    where
        F: Fn(&[f64]) -> Outcome + Sync,
    {
        let outcomes: Vec<Outcome> =
            (0..grid.total()).into_par_iter().map(|i| f(&grid.point(i))).collect();
        Self::from_outcomes(claim, describe_grid(grid), tolerance, outcomes)
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn fails(&self) -> bool {
        self.verdict == Verdict::Fails
    }

    /// One row per stored violation; shorter points are padded with empty cells.
    pub fn violations_csv(&self) -> CsvTable {
        let dim = self.violations.iter().map(|s| s.point.len()).max().unwrap_or(0);
        let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
        header.push("value".into());
        header.push("margin".into());
        let mut t = CsvTable::new(&header);
        for s in &self.violations {
            let mut row: Vec<String> = s.point.iter().map(|&v| fmt_f64(v)).collect();
            row.resize(dim, String::new());
            row.push(fmt_f64(s.value));
            row.push(fmt_f64(s.margin));
            t.push(row);
        }
        t
    }
}

pub fn describe_grid(grid: &ScanGrid) -> String {
    grid.names
        .iter()
        .zip(&grid.axes)
        .map(|(n, a)| format!("{n}={}:{}:{}{}", a.lo, a.hi, a.count, if a.log { ":log" } else { "" }))
        .collect::<Vec<_>>()
        .join(" x ")
}

pub(crate) fn tested(point: Vec<f64>, value: f64, margin: f64) -> Outcome {
    Outcome::Tested(Sample { point, value, margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing_and_spacing() {
        let a: Axis = "0.1:10:3:log".parse().unwrap();
        assert!(a.log);
        assert!((a.value(1) - 1.0).abs() < 1e-15);
        assert_eq!(a.value(2), 10.0);
        let b: Axis = "0:1:5".parse().unwrap();
        assert_eq!(b.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!("1:0:5".parse::<Axis>().is_err());
        assert!("0:1:1".parse::<Axis>().is_err());
        assert!("0:1:5:log".parse::<Axis>().is_err());
        assert!("0:1".parse::<Axis>().is_err());
    }

    #[test]
    fn grid_points_row_major() {
        let g = ScanGrid::new(&[("a", Axis::linear(0.0, 1.0, 2)), ("b", Axis::linear(0.0, 2.0, 3))]);
        assert_eq!(g.total(), 6);
        assert_eq!(g.point(0), vec![0.0, 0.0]);
        assert_eq!(g.point(1), vec![0.0, 1.0]);
        assert_eq!(g.point(3), vec![1.0, 0.0]);
    }

    #[test]
    fn verdict_rules() {
        let ok = ScanReport::from_outcomes("c", String::new(), 1e-10, vec![tested(vec![1.0], 0.0, -1e-12)]);
        assert!(ok.holds());
        assert_eq!(ok.violation_count, 0);
        let bad = ScanReport::from_outcomes(
            "c",
            String::new(),
            1e-10,
            vec![tested(vec![1.0], 0.0, 1.0), tested(vec![2.0], 0.0, -1.0), Outcome::Skipped],
        );
        assert!(bad.fails());
        assert_eq!(bad.worst.as_ref().unwrap().point, vec![2.0]);
        assert_eq!(bad.points_skipped, 1);
        let none = ScanReport::from_outcomes("c", String::new(), 1e-10, vec![Outcome::Skipped]);
        assert_eq!(none.verdict, Verdict::Inconclusive);
        let nan = ScanReport::from_outcomes("c", String::new(), 1e-10, vec![tested(vec![0.0], 0.0, f64::NAN)]);
        assert!(nan.fails());
    }
}
