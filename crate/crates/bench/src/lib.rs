//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use nvfem_core::fem::{build_dofmap, interpolate, DofMap, SpaceKind};
use nvfem_core::{generate_square_mesh, FeFunction, Mesh};

pub fn bench_mesh(n: usize) -> Mesh {
    generate_square_mesh(-0.5, 0.5, n, 0.2, 1).expect("valid mesh parameters")
}

pub fn free_space(n: usize) -> Arc<DofMap> {
    Arc::new(build_dofmap(Arc::new(bench_mesh(n)), SpaceKind::Free))
}

pub fn smooth_field(dm: &Arc<DofMap>) -> FeFunction {
    interpolate(|x| (x[0] + 2.0 * x[1]).exp() + x[0] * x[1], dm)
}
