use std::sync::Arc;

use super::element::{CellGeometry, NODES_PER_CELL, REFERENCE_NODES};
use crate::mesh::{Mesh, Point};

/// Which P2 space a [`DofMap`] describes. Both share one global numbering;
/// they differ only in whether boundary DOFs are unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// Continuous P2 with boundary DOFs fixed by Dirichlet data (the space V).
    Dirichlet,
    /// Continuous P2 without constraints (the space W).
    Free,
}

/// Global DOF numbering: vertex `v` owns DOF `v`, edge `e` owns DOF `nv + e`.
#[derive(Debug, Clone)]
pub struct DofMap {
    mesh: Arc<Mesh>,
    kind: SpaceKind,
    cell_dofs: Vec<[usize; NODES_PER_CELL]>,
    coords: Vec<Point>,
    geometry: Vec<CellGeometry>,
    is_boundary: Vec<bool>,
    boundary_dofs: Vec<usize>,
    /// Position among the unknowns, or `None` for constrained DOFs.
    free_index: Vec<Option<usize>>,
    free_dofs: Vec<usize>,
}

pub fn build_dofmap(mesh: Arc<Mesh>, kind: SpaceKind) -> DofMap {
    let nv = mesh.num_vertices();
    let ndof = nv + mesh.edges().len();

    let cell_dofs: Vec<[usize; NODES_PER_CELL]> = mesh
        .cells()
        .iter()
        .zip(mesh.cell_edges())
        .map(|(c, e)| [c[0], c[1], c[2], nv + e[0], nv + e[1], nv + e[2]])
        .collect();

    let mut coords = vec![[0.0; 2]; ndof];
    coords[..nv].copy_from_slice(mesh.vertices());
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        coords[nv + e] = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
    }

    let geometry = (0..mesh.num_cells()).map(|c| CellGeometry::new(mesh.cell_points(c))).collect();

    let mut is_boundary = vec![false; ndof];
    for be in mesh.boundary_edges() {
        is_boundary[be.vertices[0]] = true;
        is_boundary[be.vertices[1]] = true;
        is_boundary[nv + mesh.cell_edges()[be.cell][be.local_edge]] = true;
    }
    let boundary_dofs: Vec<usize> = (0..ndof).filter(|&d| is_boundary[d]).collect();

    let mut free_index = vec![None; ndof];
    let mut free_dofs = Vec::with_capacity(ndof);
    for d in 0..ndof {
        if kind == SpaceKind::Free || !is_boundary[d] {
            free_index[d] = Some(free_dofs.len());
            free_dofs.push(d);
        }
    }

    DofMap { mesh, kind, cell_dofs, coords, geometry, is_boundary, boundary_dofs, free_index, free_dofs }
}

impl DofMap {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn num_dofs(&self) -> usize {
        self.coords.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cell_dofs.len()
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize; NODES_PER_CELL] {
        &self.cell_dofs[c]
    }

    pub fn geometry(&self, c: usize) -> &CellGeometry {
        &self.geometry[c]
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn boundary_dofs(&self) -> &[usize] {
        &self.boundary_dofs
    }

    pub fn is_boundary(&self, d: usize) -> bool {
        self.is_boundary[d]
    }

    pub fn free_index(&self, d: usize) -> Option<usize> {
        self.free_index[d]
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    pub fn num_free(&self) -> usize {
        self.free_dofs.len()
    }

    /// Same numbering on the same mesh, different constraint kind.
    pub fn with_kind(&self, kind: SpaceKind) -> DofMap {
        if kind == self.kind {
            return self.clone();
        }
        build_dofmap(self.mesh.clone(), kind)
    }

    pub fn same_mesh(&self, other: &DofMap) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }

    /// Physical coordinates of the six nodes of cell `c`.
    pub fn cell_node_coords(&self, c: usize) -> [Point; NODES_PER_CELL] {
        let geo = &self.geometry[c];
        REFERENCE_NODES.map(|p| geo.map(p))
    }
}
