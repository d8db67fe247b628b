//! Element kinematics, energy, gradient, tangent and boundary residual.
//!
//! Element contributions are computed in parallel and summed in element order,
//! so results do not depend on the thread count.

use rayon::prelude::*;

use super::mesh::{BoundaryTag, DiscreteField, Mesh};
use crate::energy::{energy_eh, piola_stress, tangent_fd, EnergyValue, HenckyMeasures, MaterialParams};
use crate::error::{Error, Result};
use crate::io::CsvTable;
use crate::tensor::Mat;

/// `F = Σ_a x_a ⊗ ∇N_a` on one triangle.
pub fn element_gradient(mesh: &Mesh, field: &DiscreteField, e: usize) -> Mat {
    let g = mesh.geometry(e);
    let t = mesh.triangles[e];
    let mut f = [[0.0; 2]; 2];
    for (a, &node) in t.iter().enumerate() {
        let x = field.values[node];
        for i in 0..2 {
            for j in 0..2 {
                f[i][j] += x[i] * g.grads[a][j];
            }
        }
    }
    Mat::from_rows2(f)
}

pub fn element_gradients(mesh: &Mesh, field: &DiscreteField) -> Vec<Mat> {
    (0..mesh.triangles.len()).into_par_iter().map(|e| element_gradient(mesh, field, e)).collect()
}

pub fn min_det(mesh: &Mesh, field: &DiscreteField) -> f64 {
    element_gradients(mesh, field).iter().map(|f| f.det()).fold(f64::INFINITY, f64::min)
}

/// `I(φ) = Σ_e |T_e| W_eH(∇φ|_{T_e})`; `+∞` if any element is not in `GL⁺`.
pub fn total_energy(mesh: &Mesh, field: &DiscreteField, p: &MaterialParams) -> EnergyValue {
    let contrib: Vec<f64> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|e| {
            let w = energy_eh(&element_gradient(mesh, field, e), p);
            if w.finite {
                mesh.geometry(e).area * w.value
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut sum = 0.0;
    for c in contrib {
        if !c.is_finite() {
            return EnergyValue::infinite();
        }
        sum += c;
    }
    EnergyValue::finite(sum)
}

/// `∂I/∂x_a`, with rows of nodes in `pinned` set to zero.
pub fn energy_gradient_pinned(
    mesh: &Mesh,
    field: &DiscreteField,
    p: &MaterialParams,
    pinned: &[usize],
) -> Result<Vec<[f64; 2]>> {
    let contrib: Vec<Result<[[f64; 2]; 3]>> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|e| {
            let f = element_gradient(mesh, field, e);
            if !(f.det() > 0.0) {
                return Err(Error::InfeasibleState);
            }
            let s = piola_stress(&f, p)?;
            let g = mesh.geometry(e);
            Ok(g.grads.map(|dn| {
                [0, 1].map(|i| g.area * (s.get(i, 0) * dn[0] + s.get(i, 1) * dn[1]))
            }))
        })
        .collect();
    let mut grad = vec![[0.0; 2]; mesh.nodes.len()];
    for (e, c) in contrib.into_iter().enumerate() {
        let c = c?;
        for (a, &node) in mesh.triangles[e].iter().enumerate() {
            grad[node][0] += c[a][0];
            grad[node][1] += c[a][1];
        }
    }
    for &i in pinned {
        grad[i] = [0.0; 2];
    }
    Ok(grad)
}

/// Gradient of [`total_energy`] with Dirichlet rows zeroed.
pub fn energy_gradient(mesh: &Mesh, field: &DiscreteField, p: &MaterialParams) -> Result<Vec<[f64; 2]>> {
    energy_gradient_pinned(mesh, field, p, &mesh.dirichlet_nodes())
}

/// Element stiffness `K[(a,i),(b,k)] = |T| Σ_{jl} 𝕋_{ijkl} ∂_j N_a ∂_l N_b` from the FD tangent.
pub fn element_stiffness(mesh: &Mesh, field: &DiscreteField, p: &MaterialParams, e: usize) -> Result<[[f64; 6]; 6]> {
    let f = element_gradient(mesh, field, e);
    let t = tangent_fd(&f, p, None)?;
    let g = mesh.geometry(e);
    let mut k = [[0.0; 6]; 6];
    for a in 0..3 {
        for i in 0..2 {
            for b in 0..3 {
                for kk in 0..2 {
                    let mut s = 0.0;
                    for j in 0..2 {
                        for l in 0..2 {
                            s += t.get(i, j, kk, l) * g.grads[a][j] * g.grads[b][l];
                        }
                    }
                    k[2 * a + i][2 * b + kk] = g.area * s;
                }
            }
        }
    }
    // symmetrize the FD tangent
    for r in 0..6 {
        for c in (r + 1)..6 {
            let m = 0.5 * (k[r][c] + k[c][r]);
            k[r][c] = m;
            k[c][r] = m;
        }
    }
    Ok(k)
}

/// `max ‖S₁(∇φ|_T)·n − ŝ₁(x_mid, n)‖` over `Γ_N` edges, `0` if there are none.
/// `x_mid` is the reference midpoint and `n` the reference outward normal.
pub fn neumann_residual<T>(mesh: &Mesh, field: &DiscreteField, traction: T, p: &MaterialParams) -> Result<f64>
where
    T: Fn([f64; 2], [f64; 2]) -> [f64; 2],
{
    let mut worst: f64 = 0.0;
    for edge in mesh.boundary.iter().filter(|e| e.tag == BoundaryTag::NeumannN) {
        let (e, n) = mesh
            .edge_element(edge.nodes)
            .ok_or_else(|| Error::InvalidInput(format!("edge {:?} has no element", edge.nodes)))?;
        let s = piola_stress(&element_gradient(mesh, field, e), p)?;
        let (a, b) = (mesh.nodes[edge.nodes[0]], mesh.nodes[edge.nodes[1]]);
        let target = traction([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])], n);
        let sn = s.mul_vec(&n);
        worst = worst.max((sn[0] - target[0]).hypot(sn[1] - target[1]));
    }
    Ok(worst)
}

/// Per-element energy density, `det ∇φ` and `‖dev₂ log U‖`.
pub fn element_table(mesh: &Mesh, field: &DiscreteField, p: &MaterialParams) -> CsvTable {
    let mut t = CsvTable::new(&["element", "area", "energy_density", "det", "dev_log_norm"]);
    for (e, f) in element_gradients(mesh, field).iter().enumerate() {
        let dev = HenckyMeasures::of(f).map(|h| h.dev_norm_sq.sqrt()).unwrap_or(f64::NAN);
        let mut row = vec![e.to_string()];
        row.extend(
            [mesh.geometry(e).area, energy_eh(f, p).value, f.det(), dev]
                .iter()
                .map(|v| crate::io::fmt_f64(*v)),
        );
        t.push(row);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::solver::mesh::{make_rect_mesh, DirichletData};
    use rand::Rng;

    fn perturbed(mesh: &Mesh, seed: u64, amp: f64) -> DiscreteField {
        let mut r = rng::stream(seed, 0);
        let a = Mat::from_rows2([[1.1, 0.2], [-0.1, 0.95]]);
        let mut f = DiscreteField::affine(mesh, &a, [0.0, 0.0]);
        for v in f.values.iter_mut() {
            v[0] += amp * r.gen_range(-1.0..1.0);
            v[1] += amp * r.gen_range(-1.0..1.0);
        }
        f
    }

    #[test]
    fn identity_energy_and_gradient() {
        let p = MaterialParams::default();
        let m = make_rect_mesh(4, 4, 1.0, 1.0).unwrap();
        let id = DiscreteField::identity(&m);
        let e = total_energy(&m, &id, &p);
        assert!((e.value - p.reference_energy()).abs() < 1e-12);
        let g = energy_gradient_pinned(&m, &id, &p, &[]).unwrap();
        assert!(g.iter().all(|v| v[0].abs() < 1e-13 && v[1].abs() < 1e-13));
    }

    #[test]
    fn affine_energy_is_area_times_density() {
        let p = MaterialParams::default();
        let m = make_rect_mesh(3, 5, 2.0, 1.5).unwrap();
        let a = Mat::diag(&[1.2, 1.0]);
        let e = total_energy(&m, &DiscreteField::affine(&m, &a, [0.3, 0.0]), &p);
        let exact = 3.0 * energy_eh(&a, &p).value;
        assert!((e.value - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn flipped_triangle_gives_infinite_energy() {
        let p = MaterialParams::default();
        let m = make_rect_mesh(2, 2, 1.0, 1.0).unwrap();
        let mut f = DiscreteField::identity(&m);
        f.values[4] = [1.5, 1.5];
        assert!(!total_energy(&m, &f, &p).finite);
        assert!(matches!(energy_gradient(&m, &f, &p), Err(Error::InfeasibleState)));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = MaterialParams::default();
        let m = make_rect_mesh(3, 3, 1.0, 1.0).unwrap();
        let f = perturbed(&m, 5, 0.03);
        let g = energy_gradient_pinned(&m, &f, &p, &[]).unwrap();
        let mut r = rng::stream(6, 0);
        for _ in 0..20 {
            let dir: Vec<[f64; 2]> = (0..m.nodes.len()).map(|_| [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)]).collect();
            let shift = |s: f64| DiscreteField {
                values: f.values.iter().zip(&dir).map(|(v, d)| [v[0] + s * d[0], v[1] + s * d[1]]).collect(),
            };
            let h = 1e-6;
            let fd = (total_energy(&m, &shift(h), &p).value - total_energy(&m, &shift(-h), &p).value) / (2.0 * h);
            let an: f64 = g.iter().zip(&dir).map(|(a, d)| a[0] * d[0] + a[1] * d[1]).sum();
            assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "{fd} vs {an}");
        }
    }

    #[test]
    fn dilation_center_node_is_balanced() {
        let p = MaterialParams::default();
        let m = make_rect_mesh(2, 2, 1.0, 1.0).unwrap();
        let f = DiscreteField::affine(&m, &Mat::identity(2).scale(1.1), [0.0, 0.0]);
        let g = energy_gradient(&m, &f, &p).unwrap();
        assert!(g[4][0].abs() < 1e-14 && g[4][1].abs() < 1e-14);
    }

    #[test]
    fn gradient_is_bit_stable_across_thread_counts() {
        let p = MaterialParams::default();
        let m = make_rect_mesh(8, 8, 1.0, 1.0).unwrap();
        let f = perturbed(&m, 2, 0.01);
        let run = |n| {
            rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(|| {
                (energy_gradient(&m, &f, &p).unwrap(), total_energy(&m, &f, &p).value.to_bits())
            })
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn stiffness_matches_gradient_differences() {
        let p = MaterialParams::default();
        let m = make_rect_mesh(1, 1, 1.0, 1.0).unwrap();
        let f = perturbed(&m, 3, 0.02);
        let k = element_stiffness(&m, &f, &p, 0).unwrap();
        let t = m.triangles[0];
        let h = 1e-6;
        for b in 0..3 {
            for kk in 0..2 {
                let mut fp = f.clone();
                let mut fm = f.clone();
                fp.values[t[b]][kk] += h;
                fm.values[t[b]][kk] -= h;
                let ep = element_force(&m, &fp, &p);
                let em = element_force(&m, &fm, &p);
                for a in 0..3 {
                    for i in 0..2 {
                        let fd = (ep[a][i] - em[a][i]) / (2.0 * h);
                        assert!((fd - k[2 * a + i][2 * b + kk]).abs() < 1e-4 * (1.0 + fd.abs()));
                    }
                }
            }
        }
    }

    fn element_force(m: &Mesh, f: &DiscreteField, p: &MaterialParams) -> [[f64; 2]; 3] {
        let s = piola_stress(&element_gradient(m, f, 0), p).unwrap();
        let g = m.geometry(0);
        g.grads.map(|dn| [0, 1].map(|i| g.area * (s.get(i, 0) * dn[0] + s.get(i, 1) * dn[1])))
    }

    #[test]
    fn neumann_residual_cases() {
        let p = MaterialParams::default();
        let mut m = make_rect_mesh(4, 4, 1.0, 1.0).unwrap();
        let a = Mat::diag(&[1.2, 1.0]);
        let f = DiscreteField::affine(&m, &a, [0.0, 0.0]);
        let zero = |_: [f64; 2], _: [f64; 2]| [0.0, 0.0];
        assert_eq!(neumann_residual(&m, &f, zero, &p).unwrap(), 0.0);
        m.retag(BoundaryTag::NeumannN, |x| x[0] > 0.999);
        let s = piola_stress(&a, &p).unwrap();
        let consistent = |_: [f64; 2], n: [f64; 2]| {
            let v = s.mul_vec(&n);
            [v[0], v[1]]
        };
        assert!(neumann_residual(&m, &f, consistent, &p).unwrap() <= 1e-8);
        let off = neumann_residual(&m, &f, zero, &p).unwrap();
        assert!(off > 0.1, "{off}");
        let _ = DirichletData::affine(&m, &a, [0.0, 0.0]);
    }

    #[test]
    fn element_csv_has_one_row_per_triangle() {
        let p = MaterialParams::default();
        let m = make_rect_mesh(2, 1, 1.0, 1.0).unwrap();
        let t = element_table(&m, &DiscreteField::identity(&m), &p);
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.header.len(), 5);
    }
}
