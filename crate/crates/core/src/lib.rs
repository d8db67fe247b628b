//! Numerical laboratory for the exponentiated Hencky energy family.
//!
//! * [`tensor`]: 2×2/3×3 kernel (stretch tensors, SPD logarithm, invariants).
//! * [`energy`]: energies, invariant representation, Piola stress, FD tangent.
//! * [`convexity`]: invariant-space Hessian, scalar inequalities, Steigmann,
//!   rank-one and volumetric scans, sum-of-squared-logarithms sampler.
//! * [`coercivity`]: growth-constant construction and verification.
//! * [`solver`]: P1 planar elastostatics by direct energy minimization.
//! * [`io`]: JSON/CSV output helpers.

pub mod coercivity;
pub mod convexity;
pub mod energy;
pub mod error;
pub mod io;
pub mod rng;
pub mod solver;
pub mod tensor;

pub use energy::{EnergyKind, EnergyValue, MaterialParams};
pub use error::{Error, Result};
pub use tensor::{Mat, SymMat};
