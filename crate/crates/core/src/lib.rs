//! Nonvariational finite elements for second order problems in the plane.
//!
//! The crate discretizes `A(x) : D^2 u = f` with continuous P2 elements by
//! carrying a finite element Hessian of the discrete solution as an extra
//! unknown, and uses that linear solver inside a Newton iteration for the
//! prescribed Gauss curvature equation
//! `det D^2 u = K (1 + |grad u|^2)^2`.
//!
//! Modules, bottom up:
//! - [`mesh`]: criss-cross triangulations of squares, refinement, text IO
//! - [`fem`]: P2 spaces, quadrature, assembly, sparse direct solves
//! - [`hessian`]: the finite element Hessian and convexity checks
//! - [`nvfem`]: the linear nonvariational block solver
//! - [`newton`]: the Gauss curvature problem and its Newton solver
//! - [`analysis`]: manufactured solutions, error norms, convergence tables

pub mod analysis;
pub mod error;
pub mod fem;
pub mod fmt;
pub mod hessian;
pub mod mesh;
pub mod newton;
pub mod nvfem;
pub mod sym2;

pub use error::{Error, Result};
pub use fem::{DofMap, FeFunction, SpaceKind, SparseMatrix};
pub use hessian::{fe_hessian, ConvexityReport, HessianField};
pub use mesh::{generate_square_mesh, mesh_size, refine_uniform, Mesh};
pub use newton::{newton_solve, GaussCurvatureProblem, NewtonConfig, NewtonTrace};
pub use nvfem::{solve_nonvariational, LinearNvProblem};
pub use sym2::Sym2;
