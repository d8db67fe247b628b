//! Planar elastostatics by direct minimization of `I(φ) = ∫ W_eH(∇φ)` over
//! piecewise-affine fields on triangles.

mod assemble;
mod mesh;
mod minimize;

pub use assemble::{
    element_gradient, element_gradients, element_stiffness, element_table, energy_gradient, energy_gradient_pinned,
    min_det, neumann_residual, total_energy,
};
pub use mesh::{make_rect_mesh, BoundaryEdge, BoundaryTag, DirichletData, DiscreteField, ElementGeometry, Mesh};
pub use minimize::{solve, solve_from, Method, SolveOptions, SolveReport, ARMIJO_C1, LBFGS_MEMORY, MAX_START_ATTEMPTS};
