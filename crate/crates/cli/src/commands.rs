//! Subcommand implementations.

use std::path::PathBuf;

use hencky_core::coercivity::{
    dev_only_noncoercivity_witness, pair_constants, polynomial_bound_witness, scalar_coercivity_constant,
    verify_full_coercivity, verify_pair_coercivity, CoercivityCertificate,
};
use hencky_core::convexity::{
    hessian_scan, rank_one_scan, ssli_sampler, steigmann_check_2d, verify_appendix_b, volumetric_convexity_check,
    volumetric_threshold, AppendixGrid, Axis, Lemma, RankOneConfig, RankOneSampler, ScanReport, SteigmannGrid,
};
use hencky_core::energy::{
    energy_eh, energy_iso, energy_quadratic_hencky, energy_vol, piola_stress, psi_hat, HenckyMeasures,
};
use hencky_core::io::{read_json, to_json_string, write_json};
use hencky_core::solver::{
    element_table, make_rect_mesh, solve as run_solver, DirichletData, DiscreteField, Mesh, Method, SolveOptions,
    SolveReport,
};
use hencky_core::tensor::{invariants, right_stretch, InvariantPoint};
use hencky_core::{EnergyKind, EnergyValue, Mat};
use serde::Serialize;

use crate::config::{parse_list, Resolved};
use crate::CliError;

fn config_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn list_or(flag: Option<String>, file: Option<Vec<f64>>, default: Vec<f64>) -> Result<Vec<f64>, CliError> {
    match flag {
        Some(s) => parse_list(&s).map_err(CliError::Config),
        None => Ok(file.unwrap_or(default)),
    }
}

#[derive(Debug, Serialize)]
struct EvalRecord {
    f: Vec<f64>,
    dim: usize,
    det: f64,
    energy: EnergyValue,
    energy_iso: EnergyValue,
    energy_vol: EnergyValue,
    quadratic_hencky: EnergyValue,
    /// Row-major first Piola-Kirchhoff stress (2D only).
    stress: Option<Vec<f64>>,
    invariants: Option<InvariantPoint>,
    dev_log_norm: Option<f64>,
}

pub fn eval(cfg: &Resolved, values: &[f64], want_stress: bool) -> Result<(), CliError> {
    if values.len() != 4 && values.len() != 9 {
        return Err(CliError::Config(format!("F needs 4 or 9 numbers, got {}", values.len())));
    }
    let f = Mat::from_row_major(values).map_err(config_err)?;
    let p = &cfg.params;
    let det = f.det();
    let dim = f.dim();
    let stress = if dim == 2 {
        match piola_stress(&f, p) {
            Ok(s) => Some(s.to_row_major()),
            Err(e) if want_stress => return Err(e.into()),
            Err(_) => None,
        }
    } else if want_stress {
        return Err(CliError::Config("the stress is computed for 2D deformation gradients only".into()));
    } else {
        None
    };
    let record = EvalRecord {
        f: values.to_vec(),
        dim,
        det,
        energy: energy_eh(&f, p),
        energy_iso: energy_iso(&f, p),
        energy_vol: energy_vol(&f, p),
        quadratic_hencky: energy_quadratic_hencky(&f, p),
        stress,
        invariants: right_stretch(&f).ok().and_then(|u| invariants(&u).ok()),
        dev_log_norm: HenckyMeasures::of(&f).map(|h| h.dev_norm_sq.sqrt()),
    };
    print!("{}", to_json_string(&record)?);
    if cfg.out.is_some() {
        write_json(&cfg.path("eval.json"), &record)?;
    }
    Ok(())
}

/// One line of the expectation table.
struct Row {
    claim: String,
    verdict: String,
    expected: Option<bool>,
}

fn emit_report(cfg: &Resolved, report: &ScanReport, expected: Option<bool>, rows: &mut Vec<Row>) -> Result<(), CliError> {
    write_json(&cfg.path(&format!("{}.json", report.claim)), report)?;
    if !report.violations.is_empty() {
        report.violations_csv().write(&cfg.path(&format!("{}-violations.csv", report.claim)))?;
    }
    rows.push(Row { claim: report.claim.clone(), verdict: format!("{:?}", report.verdict), expected });
    Ok(())
}

fn emit_certificate(cfg: &Resolved, cert: &CoercivityCertificate, rows: &mut Vec<Row>) -> Result<(), CliError> {
    write_json(&cfg.path(&format!("{}.json", cert.claim)), cert)?;
    let verdict = if cert.holds { "Holds" } else { "Fails" };
    rows.push(Row { claim: cert.claim.clone(), verdict: verdict.into(), expected: Some(true) });
    Ok(())
}

/// Prints the table; fails iff a claim expected to hold did not.
fn finish(rows: &[Row]) -> Result<(), CliError> {
    let mut failed = Vec::new();
    for r in rows {
        let exp = match r.expected {
            Some(true) => "Holds",
            Some(false) => "Fails",
            None => "-",
        };
        let note = match r.expected {
            Some(true) if r.verdict != "Holds" => {
                failed.push(r.claim.clone());
                "  UNEXPECTED"
            }
            Some(false) if r.verdict != "Fails" => "  unexpected",
            _ => "",
        };
        println!("{:<60} {:<12} expected {exp}{note}", r.claim, r.verdict);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ClaimFailed(format!("expected to hold but did not: {}", failed.join(", "))))
    }
}

pub struct ConvexityArgs {
    pub k_list: Option<String>,
    pub khat_list: Option<String>,
    pub rank_one: bool,
    pub dim: Option<usize>,
    pub energy: Option<String>,
    pub samples: Option<usize>,
    pub stop_at_first: bool,
}

pub fn scan_convexity(cfg: &Resolved, a: ConvexityArgs) -> Result<(), CliError> {
    let p = cfg.params;
    let file = &cfg.file;
    let any_list = a.k_list.is_some() || a.khat_list.is_some() || file.k_list.is_some() || file.khat_list.is_some();
    let run_defaults = !any_list && !a.rank_one;
    let k_list = if a.k_list.is_some() || file.k_list.is_some() || run_defaults {
        list_or(a.k_list, file.k_list.clone(), vec![p.k])?
    } else {
        Vec::new()
    };
    let khat_list = if a.khat_list.is_some() || file.khat_list.is_some() || run_defaults {
        list_or(a.khat_list, file.khat_list.clone(), vec![p.khat])?
    } else {
        Vec::new()
    };
    let mut rows = Vec::new();
    let i1_axis = cfg.grid.unwrap_or(Axis::geometric(0.1, 10.0, 100));
    let z_axis = Axis::geometric(1e-4, 1.0 - 1e-4, 100);
    for &k in &k_list {
        if !(k > 0.0) {
            return Err(CliError::Config(format!("k must be positive, got {k}")));
        }
        let expected = Some(k >= 1.0 / 3.0);
        emit_report(cfg, &hessian_scan(k, &i1_axis, &z_axis), expected, &mut rows)?;
        let (mono, convex) = steigmann_check_2d(|i1, i2| psi_hat(i1, i2, k), &SteigmannGrid::default());
        for mut r in [mono, convex] {
            r.claim = format!("{}-psi-hat@k={k}", r.claim);
            let exp = if r.claim.starts_with("steigmann-monotone") { Some(true) } else { expected };
            emit_report(cfg, &r, exp, &mut rows)?;
        }
    }
    let t_axis = cfg.grid.unwrap_or(Axis::geometric(1e-3, 1e3, 20_001));
    for &khat in &khat_list {
        if !(khat > 0.0) {
            return Err(CliError::Config(format!("khat must be positive, got {khat}")));
        }
        let expected = Some(p.m % 2 == 0 && khat >= volumetric_threshold(p.m));
        emit_report(cfg, &volumetric_convexity_check(khat, p.m, &t_axis), expected, &mut rows)?;
    }
    if a.rank_one {
        let dim = a.dim.or(file.dim).unwrap_or(2);
        if dim != 2 && dim != 3 {
            return Err(CliError::Config(format!("--dim must be 2 or 3, got {dim}")));
        }
        let energy: EnergyKind = a
            .energy
            .or(file.energy.clone())
            .unwrap_or_else(|| "exp-hencky".into())
            .parse()
            .map_err(config_err)?;
        let samples = a.samples.or(file.samples).unwrap_or(100_000);
        let sampler = if dim == 2 {
            RankOneSampler::Stretches { lo: 0.05, hi: 20.0 }
        } else {
            RankOneSampler::DevBiased { dev_lo: 2.0, dev_hi: 10.0, vol: 0.5 }
        };
        let mut rc = RankOneConfig::new(dim, samples, cfg.seed, sampler);
        rc.stop_at_first = a.stop_at_first;
        let (mut report, witness) = rank_one_scan(|f: &Mat| energy.eval(f, &p), &rc);
        report.claim = format!("{}-{}", report.claim, energy.name());
        let expected = match (energy, dim) {
            (EnergyKind::ExpHencky, 2) if p.k >= 1.0 / 3.0 && p.khat >= 0.125 && p.m == 2 => Some(true),
            (EnergyKind::QuadraticHencky, 3) => Some(false),
            _ => None,
        };
        if let Some(w) = &witness {
            write_json(&cfg.path(&format!("{}-witness.json", report.claim)), w)?;
        }
        emit_report(cfg, &report, expected, &mut rows)?;
    }
    finish(&rows)
}

pub fn scan_coercivity(
    cfg: &Resolved,
    q_list: Option<String>,
    dim: Option<usize>,
    samples: Option<usize>,
) -> Result<(), CliError> {
    let p = cfg.params;
    let q_list = list_or(q_list, cfg.file.q_list.clone(), vec![1.0, 2.0, 4.0])?;
    let n = dim.or(cfg.file.dim).unwrap_or(2);
    let samples = samples.or(cfg.file.samples).unwrap_or(100_000);
    let mut rows = Vec::new();
    for &q in &q_list {
        let mut full = verify_full_coercivity(&p, q, n, samples, cfg.seed)?;
        full.claim = format!("full-coercivity@q={q},n={n}");
        emit_certificate(cfg, &full, &mut rows)?;
        let (alpha, beta) = (2.0 * q / p.k, p.k);
        if n == 2 {
            let mut pair = verify_pair_coercivity(alpha, beta, 1e-4, 1e3, 400)?;
            pair.claim = format!("pair-coercivity@alpha={alpha},beta={beta}");
            emit_certificate(cfg, &pair, &mut rows)?;
        }
        let beta_v = p.khat * (n * n) as f64;
        let mut scalar = scalar_coercivity_constant(2.0 * q / beta_v, beta_v)?.certificate;
        scalar.claim = format!("scalar-coercivity@alpha={},beta={beta_v}", 2.0 * q / beta_v);
        emit_certificate(cfg, &scalar, &mut rows)?;
        let pc = pair_constants(alpha, beta);
        let witness = dev_only_noncoercivity_witness(p.k, alpha, pc.k1, pc.k2, 1e6)?;
        write_json(&cfg.path(&format!("dev-only-noncoercivity@q={q}.json")), &witness)?;
    }
    let poly = polynomial_bound_witness(&p, 1e10, q_list.iter().cloned().fold(1.0, f64::max), n, 1e6);
    write_json(&cfg.path("polynomial-upper-bound-witness.json"), &poly)?;
    finish(&rows)
}

pub fn verify_appendix(cfg: &Resolved, k_list: Option<String>, points: Option<usize>) -> Result<(), CliError> {
    let k_list = list_or(k_list, cfg.file.k_list.clone(), vec![cfg.params.k])?;
    let grid = AppendixGrid::with_points(points.or(cfg.file.points).unwrap_or(10_000));
    let mut rows = Vec::new();
    for &k in &k_list {
        if !(k > 0.0) {
            return Err(CliError::Config(format!("k must be positive, got {k}")));
        }
        for (lemma, report) in Lemma::ALL.iter().zip(verify_appendix_b(k, &grid)) {
            emit_report(cfg, &report, Some(k >= lemma.k_threshold()), &mut rows)?;
        }
    }
    finish(&rows)
}

pub fn ssli(cfg: &Resolved, dim: Option<usize>, trials: Option<usize>) -> Result<(), CliError> {
    let n = dim.or(cfg.file.dim).unwrap_or(3);
    let trials = trials.or(cfg.file.trials).unwrap_or(100_000);
    let report = ssli_sampler(n, trials, cfg.seed)?;
    let mut rows = Vec::new();
    emit_report(cfg, &report, Some(true), &mut rows)?;
    finish(&rows)
}

pub struct SolveArgs {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub mesh: Option<PathBuf>,
    pub affine: Option<String>,
    pub dirichlet: Option<PathBuf>,
    pub method: Option<String>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SolveOutput<'a> {
    #[serde(flatten)]
    report: &'a SolveReport,
    /// Max nodal distance to the affine map, when the data are affine.
    affine_max_error: Option<f64>,
}

pub fn solve(cfg: &Resolved, a: SolveArgs) -> Result<(), CliError> {
    let file = &cfg.file;
    let mesh: Mesh = match &a.mesh {
        Some(path) => {
            let m: Mesh = read_json(path)?;
            m.validate()?;
            m
        }
        None => make_rect_mesh(
            a.nx.or(file.nx).unwrap_or(16),
            a.ny.or(file.ny).unwrap_or(16),
            a.width.or(file.width).unwrap_or(1.0),
            a.height.or(file.height).unwrap_or(1.0),
        )?,
    };
    let affine = match a.affine {
        Some(s) => Some(parse_list(&s).map_err(CliError::Config)?),
        None => file.affine.clone(),
    };
    let affine = match affine {
        Some(v) if v.len() == 4 => Some(Mat::from_row_major(&v)?),
        Some(v) => return Err(CliError::Config(format!("--affine needs 4 numbers, got {}", v.len()))),
        None => None,
    };
    let (data, affine) = match &a.dirichlet {
        Some(path) => (read_json::<DirichletData>(path)?, None),
        None => {
            let m = affine.unwrap_or_else(|| Mat::identity(2));
            (DirichletData::affine(&mesh, &m, [0.0, 0.0]), Some(m))
        }
    };
    let method: Method = a.method.or(file.method.clone()).unwrap_or_else(|| "qn".into()).parse()?;
    let options = SolveOptions {
        method,
        max_iterations: a.max_iter.or(file.max_iter).unwrap_or(SolveOptions::default().max_iterations),
        gradient_tolerance: a.tol.or(file.tol),
        ..SolveOptions::default()
    };
    let (field, report) = run_solver(&mesh, &data, &cfg.params, &options)?;
    let affine_max_error = affine.map(|m| field.max_distance(&DiscreteField::affine(&mesh, &m, [0.0, 0.0])));
    write_json(&cfg.path("mesh.json"), &mesh)?;
    write_json(&cfg.path("solution.json"), &field)?;
    write_json(&cfg.path("report.json"), &SolveOutput { report: &report, affine_max_error })?;
    element_table(&mesh, &field, &cfg.params).write(&cfg.path("elements.csv"))?;
    println!(
        "{} after {} iterations: energy {:.12e}, gradient {:.3e} (tol {:.3e}), min det {:.6e}",
        if report.converged { "converged" } else { "NOT converged" },
        report.iterations,
        report.final_energy,
        report.final_gradient_norm,
        report.tolerance,
        report.min_det
    );
    if let Some(e) = affine_max_error {
        println!("max distance to the affine data map: {e:.3e}");
    }
    if report.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "gradient norm {:e} above tolerance {:e} after {} iterations",
            report.final_gradient_norm, report.tolerance, report.iterations
        )))
    }
}
