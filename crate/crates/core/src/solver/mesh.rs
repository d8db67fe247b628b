//! Triangulated planar domains, nodal fields and Dirichlet data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    DirichletD,
    NeumannN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub nodes: Vec<[f64; 2]>,
    /// Counterclockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<BoundaryEdge>,
}

/// Reference area and shape-function gradients of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

impl Mesh {
    /// Validates triangles (indices, positive area) and that the tagged edges
    /// are exactly the boundary edges, each tagged once.
    pub fn new(nodes: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, boundary: Vec<BoundaryEdge>) -> Result<Self> {
        let mesh = Self { nodes, triangles, boundary };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Mesh with every boundary edge tagged `tag`.
    pub fn from_triangles(nodes: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, tag: BoundaryTag) -> Result<Self> {
        let mut mesh = Self { nodes, triangles, boundary: Vec::new() };
        mesh.check_triangles()?;
        mesh.boundary = mesh
            .boundary_edges_from_triangles()
            .into_iter()
            .map(|nodes| BoundaryEdge { nodes, tag })
            .collect();
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        self.check_triangles()?;
        let mut expected: BTreeMap<(usize, usize), usize> =
            self.boundary_edges_from_triangles().into_iter().map(|[a, b]| (edge_key(a, b), 0)).collect();
        for e in &self.boundary {
            match expected.get_mut(&edge_key(e.nodes[0], e.nodes[1])) {
                Some(c) => *c += 1,
                None => {
                    return Err(Error::InvalidInput(format!("edge {:?} is not on the boundary", e.nodes)));
                }
            }
        }
        if let Some((k, c)) = expected.iter().find(|(_, &c)| c != 1) {
            return Err(Error::InvalidInput(format!("boundary edge {k:?} tagged {c} times")));
        }
        Ok(())
    }

    fn check_triangles(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::InvalidInput("mesh has no triangles".into()));
        }
        if self.nodes.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::InvalidInput("non-finite node coordinate".into()));
        }
        for (e, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= self.nodes.len()) {
                return Err(Error::InvalidInput(format!("triangle {e} references a missing node")));
            }
            let a = signed_area(self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]);
            if !(a > 0.0) {
                return Err(Error::InvalidInput(format!("triangle {e} has signed area {a}")));
            }
        }
        Ok(())
    }

    /// Edges belonging to exactly one triangle, oriented as in that triangle.
    fn boundary_edges_from_triangles(&self) -> Vec<[usize; 2]> {
        let mut count: BTreeMap<(usize, usize), (usize, [usize; 2])> = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                count.entry(edge_key(a, b)).or_insert((0, [a, b])).0 += 1;
            }
        }
        count.into_values().filter(|(c, _)| *c == 1).map(|(_, e)| e).collect()
    }

    pub fn geometry(&self, e: usize) -> ElementGeometry {
        let t = self.triangles[e];
        let [x0, x1, x2] = t.map(|i| self.nodes[i]);
        let dm = Mat::from_rows2([[x1[0] - x0[0], x2[0] - x0[0]], [x1[1] - x0[1], x2[1] - x0[1]]]);
        let inv = dm.inverse().expect("validated triangle");
        let g1 = [inv.get(0, 0), inv.get(0, 1)];
        let g2 = [inv.get(1, 0), inv.get(1, 1)];
        ElementGeometry {
            area: 0.5 * dm.det(),
            grads: [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2],
        }
    }

    pub fn areas(&self) -> Vec<f64> {
        (0..self.triangles.len()).map(|e| self.geometry(e).area).collect()
    }

    pub fn area(&self) -> f64 {
        self.areas().iter().sum()
    }

    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &self.nodes {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt()
    }

    /// Sorted nodes on Dirichlet edges.
    pub fn dirichlet_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary
            .iter()
            .filter(|e| e.tag == BoundaryTag::DirichletD)
            .flat_map(|e| e.nodes)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Retags boundary edges whose midpoint satisfies `pred`.
    pub fn retag<P: Fn([f64; 2]) -> bool>(&mut self, tag: BoundaryTag, pred: P) {
        for e in self.boundary.iter_mut() {
            let (a, b) = (self.nodes[e.nodes[0]], self.nodes[e.nodes[1]]);
            if pred([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]) {
                e.tag = tag;
            }
        }
    }

    /// Triangle containing a boundary edge, with its outward unit normal.
    pub fn edge_element(&self, edge: [usize; 2]) -> Option<(usize, [f64; 2])> {
        let key = edge_key(edge[0], edge[1]);
        self.triangles.iter().enumerate().find_map(|(e, t)| {
            (0..3).find_map(|k| {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                (edge_key(a, b) == key).then(|| {
                    // counterclockwise: outward normal is the edge rotated clockwise
                    let (p, q) = (self.nodes[a], self.nodes[b]);
                    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                    let l = dx.hypot(dy);
                    (e, [dy / l, -dx / l])
                })
            })
        })
    }
}

/// `nx × ny` cells on `[0, width] × [0, height]`, each split along a diagonal
/// whose direction alternates like a checkerboard. Boundary edges are `DirichletD`.
pub fn make_rect_mesh(nx: usize, ny: usize, width: f64, height: f64) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidDimensions(format!("nx = {nx}, ny = {ny}")));
    }
    if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
        return Err(Error::InvalidDimensions(format!("width = {width}, height = {height}")));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    Mesh::from_triangles(nodes, triangles, BoundaryTag::DirichletD)
}

/// Deformed nodal positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteField {
    pub values: Vec<[f64; 2]>,
}

impl DiscreteField {
    pub fn identity(mesh: &Mesh) -> Self {
        Self { values: mesh.nodes.clone() }
    }

    /// `φ(X) = A X + b`.
    pub fn affine(mesh: &Mesh, a: &Mat, b: [f64; 2]) -> Self {
        Self { values: mesh.nodes.iter().map(|x| apply_affine(a, b, *x)).collect() }
    }

    pub fn from_fn<F: Fn([f64; 2]) -> [f64; 2]>(mesh: &Mesh, f: F) -> Self {
        Self { values: mesh.nodes.iter().map(|x| f(*x)).collect() }
    }

    pub fn check(&self, mesh: &Mesh) -> Result<()> {
        if self.values.len() != mesh.nodes.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} values for {} nodes",
                self.values.len(),
                mesh.nodes.len()
            )));
        }
        if self.values.iter().any(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(Error::InvalidInput("non-finite field value".into()));
        }
        Ok(())
    }

    pub fn max_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
            .fold(0.0, f64::max)
    }

    /// P1 interpolation of `(mesh, self)` at the nodes of `target`.
    /// Target nodes outside every triangle are an error.
    pub fn interpolate(&self, mesh: &Mesh, target: &Mesh) -> Result<Self> {
        let mut values = Vec::with_capacity(target.nodes.len());
        for p in &target.nodes {
            let found = mesh.triangles.iter().find_map(|t| {
                let [a, b, c] = t.map(|i| mesh.nodes[i]);
                let area = signed_area(a, b, c);
                let w = [signed_area(*p, b, c) / area, signed_area(a, *p, c) / area, signed_area(a, b, *p) / area];
                w.iter().all(|&x| x >= -1e-12).then(|| {
                    let v = t.map(|i| self.values[i]);
                    [0, 1].map(|k| w[0] * v[0][k] + w[1] * v[1][k] + w[2] * v[2][k])
                })
            });
            values.push(found.ok_or_else(|| Error::InvalidInput(format!("node {p:?} outside the source mesh")))?);
        }
        Ok(Self { values })
    }
}

pub(crate) fn apply_affine(a: &Mat, b: [f64; 2], x: [f64; 2]) -> [f64; 2] {
    [
        a.get(0, 0) * x[0] + a.get(0, 1) * x[1] + b[0],
        a.get(1, 0) * x[0] + a.get(1, 1) * x[1] + b[1],
    ]
}

/// Prescribed positions on `Γ_D` nodes, sorted by node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletData {
    pub values: Vec<(usize, [f64; 2])>,
}

impl DirichletData {
    pub fn from_fn<F: Fn([f64; 2]) -> [f64; 2]>(mesh: &Mesh, f: F) -> Self {
        Self { values: mesh.dirichlet_nodes().into_iter().map(|i| (i, f(mesh.nodes[i]))).collect() }
    }

    pub fn affine(mesh: &Mesh, a: &Mat, b: [f64; 2]) -> Self {
        Self::from_fn(mesh, |x| apply_affine(a, b, x))
    }

    /// Checks that every `Γ_D` node, and nothing else, carries a finite value.
    pub fn check(&self, mesh: &Mesh) -> Result<()> {
        let nodes = mesh.dirichlet_nodes();
        if nodes.is_empty() {
            return Err(Error::InvalidInput("Dirichlet boundary is empty".into()));
        }
        let given: Vec<usize> = self.values.iter().map(|(i, _)| *i).collect();
        if given != nodes {
            return Err(Error::InvalidInput("Dirichlet data must list exactly the Dirichlet nodes, sorted".into()));
        }
        if self.values.iter().any(|(_, v)| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(Error::InvalidInput("non-finite Dirichlet value".into()));
        }
        Ok(())
    }

    pub fn pin(&self, field: &mut DiscreteField) {
        for (i, v) in &self.values {
            field.values[*i] = *v;
        }
    }

    /// Least-squares affine map through the data.
    pub fn affine_fit(&self, mesh: &Mesh) -> Option<(Mat, [f64; 2])> {
        // normal equations for [X Y 1] c = φ_k, k = 0, 1
        let mut ata = [[0.0; 3]; 3];
        let mut atb = [[0.0; 3]; 2];
        for (i, v) in &self.values {
            let r = [mesh.nodes[*i][0], mesh.nodes[*i][1], 1.0];
            for p in 0..3 {
                for q in 0..3 {
                    ata[p][q] += r[p] * r[q];
                }
                for k in 0..2 {
                    atb[k][p] += r[p] * v[k];
                }
            }
        }
        let m = nalgebra::Matrix3::from_fn(|p, q| ata[p][q]);
        let lu = m.lu();
        let c0 = lu.solve(&nalgebra::Vector3::from(atb[0]))?;
        let c1 = lu.solve(&nalgebra::Vector3::from(atb[1]))?;
        Some((Mat::from_rows2([[c0[0], c0[1]], [c1[0], c1[1]]]), [c0[2], c1[2]]))
    }
}
