//! Continuous P2 Lagrange finite elements on triangles.

mod assembly;
mod dofmap;
mod element;
mod function;
mod quadrature;
mod sparse;

pub use assembly::{
    assemble_boundary, assemble_generic, assemble_mass_matrix, assemble_vector, for_each_cell_point, sample_function,
    BasisSample, CellPoint, EdgePoint, QpTable, Tabulation,
};
pub use dofmap::{build_dofmap, DofMap, SpaceKind};
pub use element::{CellGeometry, ReferenceElementP2, NODES_PER_CELL, REFERENCE_NODES};
pub use function::{interpolate, max_coeff_diff, FeFunction};
pub use quadrature::{gauss_legendre, EdgeRule, TriangleRule};
pub use sparse::{relative_residual, solve_sparse, LuFactorization, SparseMatrix, TripletBuilder, SOLVE_RESIDUAL_TOL};
