//! Line-searched descent on the free nodal positions.

use serde::{Deserialize, Serialize};

use super::assemble::{element_stiffness, energy_gradient_pinned, min_det, total_energy};
use super::mesh::{apply_affine, DiscreteField, DirichletData, Mesh};
use crate::energy::MaterialParams;
use crate::error::{Error, Result};

pub const ARMIJO_C1: f64 = 1e-4;
pub const LBFGS_MEMORY: usize = 10;
pub const MAX_START_ATTEMPTS: usize = 50;
const MAX_SHRINKS: usize = 80;
/// Relative energy change below which Armijo cannot be decided in double precision.
const ROUNDOFF_BAND: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    GradientDescent,
    QuasiNewton,
    NewtonFD,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" | "gradient-descent" => Ok(Method::GradientDescent),
            "qn" | "quasi-newton" | "lbfgs" => Ok(Method::QuasiNewton),
            "newton" | "newton-fd" => Ok(Method::NewtonFD),
            other => Err(Error::InvalidInput(format!("unknown method '{other}' (gd, qn, newton)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Free-node gradient norm at which to stop; `None` means
    /// `1e-8 (1 + |I(φ₀)|) / diam Ω`.
    pub gradient_tolerance: Option<f64>,
    pub shrink: f64,
    pub initial_step: f64,
    pub method: Method,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iterations: 5000, gradient_tolerance: None, shrink: 0.5, initial_step: 1.0, method: Method::QuasiNewton }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.gradient_tolerance {
            if !(t > 0.0) {
                return Err(Error::InvalidInput(format!("gradient tolerance must be positive, got {t}")));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::InvalidInput(format!("shrink must lie in (0, 1), got {}", self.shrink)));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::InvalidInput(format!("initial step must be positive, got {}", self.initial_step)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub iterations: usize,
    pub final_energy: f64,
    pub final_gradient_norm: f64,
    pub tolerance: f64,
    /// `min det ∇φ` of the returned field.
    pub min_det: f64,
    /// Smallest `min det ∇φ` over all accepted iterates.
    pub min_det_over_iterates: f64,
    pub converged: bool,
    /// Energy of every accepted iterate, starting with the initial field.
    pub energy_history: Vec<f64>,
    /// Iterations where Newton fell back to the gradient direction.
    pub newton_fallbacks: usize,
    pub start_attempts: usize,
}

struct Problem<'a> {
    mesh: &'a Mesh,
    params: &'a MaterialParams,
    pinned: Vec<usize>,
    /// node → index among free nodes
    free_index: Vec<Option<usize>>,
    free: Vec<usize>,
    base: DiscreteField,
}

impl<'a> Problem<'a> {
    fn new(mesh: &'a Mesh, params: &'a MaterialParams, base: DiscreteField) -> Self {
        let pinned = mesh.dirichlet_nodes();
        let mut free_index = vec![None; mesh.nodes.len()];
        let mut free = Vec::new();
        let mut pi = pinned.iter().peekable();
        for (i, slot) in free_index.iter_mut().enumerate() {
            if pi.peek() == Some(&&i) {
                pi.next();
            } else {
                *slot = Some(free.len());
                free.push(i);
            }
        }
        Self { mesh, params, pinned, free_index, free, base }
    }

    fn field(&self, x: &[f64]) -> DiscreteField {
        let mut f = self.base.clone();
        for (k, &node) in self.free.iter().enumerate() {
            f.values[node] = [x[2 * k], x[2 * k + 1]];
        }
        f
    }

    fn unknowns(&self, f: &DiscreteField) -> Vec<f64> {
        self.free.iter().flat_map(|&n| f.values[n]).collect()
    }

    fn energy(&self, x: &[f64]) -> f64 {
        total_energy(self.mesh, &self.field(x), self.params).value
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = energy_gradient_pinned(self.mesh, &self.field(x), self.params, &self.pinned)?;
        Ok(self.free.iter().flat_map(|&n| g[n]).collect())
    }

    fn newton_direction(&self, x: &[f64], g: &[f64]) -> Result<Option<Vec<f64>>> {
        let f = self.field(x);
        let nd = 2 * self.free.len();
        let mut k = nalgebra::DMatrix::<f64>::zeros(nd, nd);
        for (e, t) in self.mesh.triangles.iter().enumerate() {
            let ke = element_stiffness(self.mesh, &f, self.params, e)?;
            for a in 0..3 {
                let Some(ra) = self.free_index[t[a]] else { continue };
                for b in 0..3 {
                    let Some(rb) = self.free_index[t[b]] else { continue };
                    for i in 0..2 {
                        for kk in 0..2 {
                            k[(2 * ra + i, 2 * rb + kk)] += ke[2 * a + i][2 * b + kk];
                        }
                    }
                }
            }
        }
        let Some(chol) = k.cholesky() else { return Ok(None) };
        let rhs = nalgebra::DVector::from_iterator(nd, g.iter().map(|v| -v));
        Ok(Some(chol.solve(&rhs).iter().copied().collect()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

/// Two-loop recursion over stored `(s, y)` pairs.
fn lbfgs_direction(g: &[f64], pairs: &[(Vec<f64>, Vec<f64>)]) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y) in pairs.iter().rev() {
        let rho = 1.0 / dot(y, s);
        let a = rho * dot(s, &q);
        q = axpy(&q, -a, y);
        alphas.push((rho, a));
    }
    if let Some((s, y)) = pairs.last() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y), (rho, a)) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q = axpy(&q, a - b, s);
    }
    q.iter().map(|v| -v).collect()
}

/// Default start: the least-squares affine extension of the data; then a
/// harmonic smoothing of it; then blends of the identity toward it.
fn feasible_start(mesh: &Mesh, data: &DirichletData, p: &MaterialParams) -> Result<(DiscreteField, usize)> {
    let mut candidates: Vec<DiscreteField> = Vec::new();
    let ext = match data.affine_fit(mesh) {
        Some((a, b)) => DiscreteField { values: mesh.nodes.iter().map(|x| apply_affine(&a, b, *x)).collect() },
        None => DiscreteField::identity(mesh),
    };
    let mut first = ext.clone();
    data.pin(&mut first);
    candidates.push(first.clone());
    candidates.push(harmonic_smoothing(mesh, first, 200));
    let blends = MAX_START_ATTEMPTS - candidates.len();
    for j in 0..blends {
        let s = 1.0 - j as f64 / blends as f64;
        let mut f = DiscreteField {
            values: mesh
                .nodes
                .iter()
                .zip(&ext.values)
                .map(|(x, e)| [(1.0 - s) * x[0] + s * e[0], (1.0 - s) * x[1] + s * e[1]])
                .collect(),
        };
        data.pin(&mut f);
        candidates.push(f);
    }
    for (attempt, f) in candidates.into_iter().enumerate() {
        if total_energy(mesh, &f, p).finite {
            return Ok((f, attempt + 1));
        }
    }
    Err(Error::NoFeasibleStart { attempts: MAX_START_ATTEMPTS })
}

/// Jacobi sweeps of the graph Laplacian on free nodes.
fn harmonic_smoothing(mesh: &Mesh, mut f: DiscreteField, sweeps: usize) -> DiscreteField {
    let pinned = mesh.dirichlet_nodes();
    let mut neighbours = vec![Vec::new(); mesh.nodes.len()];
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            neighbours[a].push(b);
            neighbours[b].push(a);
        }
    }
    for _ in 0..sweeps {
        let prev = f.clone();
        for (i, nb) in neighbours.iter().enumerate() {
            if pinned.binary_search(&i).is_ok() || nb.is_empty() {
                continue;
            }
            let w = 1.0 / nb.len() as f64;
            f.values[i] = [0, 1].map(|k| w * nb.iter().map(|&j| prev.values[j][k]).sum::<f64>());
        }
    }
    f
}

/// Minimizes `I` over fields equal to `data` on `Γ_D`.
pub fn solve(
    mesh: &Mesh,
    data: &DirichletData,
    p: &MaterialParams,
    options: &SolveOptions,
) -> Result<(DiscreteField, SolveReport)> {
    p.validate()?;
    data.check(mesh)?;
    let (start, attempts) = feasible_start(mesh, data, p)?;
    let (f, mut r) = solve_from(mesh, data, p, options, start)?;
    r.start_attempts = attempts;
    Ok((f, r))
}

/// As [`solve`], from a given feasible field (Dirichlet nodes are re-pinned).
pub fn solve_from(
    mesh: &Mesh,
    data: &DirichletData,
    p: &MaterialParams,
    options: &SolveOptions,
    mut start: DiscreteField,
) -> Result<(DiscreteField, SolveReport)> {
    options.validate()?;
    data.check(mesh)?;
    start.check(mesh)?;
    data.pin(&mut start);
    let e0 = total_energy(mesh, &start, p);
    if !e0.finite {
        return Err(Error::NoFeasibleStart { attempts: 1 });
    }
    let tol = options
        .gradient_tolerance
        .unwrap_or(1e-8 * (1.0 + e0.value.abs()) / mesh.diameter());
    let prob = Problem::new(mesh, p, start.clone());
    let mut x = prob.unknowns(&start);
    let mut e = e0.value;
    let mut g = prob.gradient(&x)?;
    let mut history = vec![e];
    let mut min_det_iter = min_det(mesh, &start);
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut step = options.initial_step;
    let mut fallbacks = 0;
    let mut iterations = 0;
    let mut converged = norm(&g) <= tol;
    while !converged && iterations < options.max_iterations {
        let mut d = match options.method {
            Method::GradientDescent => g.iter().map(|v| -v).collect(),
            Method::QuasiNewton => lbfgs_direction(&g, &pairs),
            Method::NewtonFD => match prob.newton_direction(&x, &g)? {
                Some(d) => d,
                None => {
                    fallbacks += 1;
                    g.iter().map(|v| -v).collect()
                }
            },
        };
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let steepest = matches!(options.method, Method::GradientDescent) || (pairs.is_empty() && options.method == Method::QuasiNewton);
        let mut t = if options.method == Method::GradientDescent {
            step
        } else if steepest {
            // first quasi-Newton step: move the fastest node by 1% of the domain
            (options.initial_step * 1e-2 * mesh.diameter() / norm(&d)).min(options.initial_step)
        } else {
            options.initial_step
        };
        let mut accepted = None;
        for _ in 0..MAX_SHRINKS {
            let xt = axpy(&x, t, &d);
            let et = prob.energy(&xt);
            // +∞ trial steps (an element left GL⁺) are shrunk like any other rejection
            if et.is_finite() && et < e && et <= e + ARMIJO_C1 * t * slope {
                accepted = Some((xt, et, None));
                break;
            }
            // energy change lost in roundoff: fall back to the slope at the trial point
            if et.is_finite() && et <= e && e - et <= ROUNDOFF_BAND * e.abs() {
                let gt = prob.gradient(&xt)?;
                if dot(&gt, &d) <= (1.0 - 2.0 * ARMIJO_C1) * slope.abs() {
                    accepted = Some((xt, et, Some(gt)));
                    break;
                }
            }
            t *= options.shrink;
        }
        let Some((xn, en, gn)) = accepted else { break };
        let gn = match gn {
            Some(g) => g,
            None => prob.gradient(&xn)?,
        };
        if options.method == Method::QuasiNewton {
            let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
            if dot(&s, &y) > 1e-12 * norm(&s) * norm(&y) {
                pairs.push((s, y));
                if pairs.len() > LBFGS_MEMORY {
                    pairs.remove(0);
                }
            }
        }
        step = t / options.shrink;
        x = xn;
        e = en;
        g = gn;
        iterations += 1;
        history.push(e);
        min_det_iter = min_det_iter.min(min_det(mesh, &prob.field(&x)));
        converged = norm(&g) <= tol;
    }
    let field = prob.field(&x);
    let report = SolveReport {
        method: options.method,
        iterations,
        final_energy: e,
        final_gradient_norm: norm(&g),
        tolerance: tol,
        min_det: min_det(mesh, &field),
        min_det_over_iterates: min_det_iter,
        converged,
        energy_history: history,
        newton_fallbacks: fallbacks,
        start_attempts: 1,
    };
    Ok((field, report))
}
