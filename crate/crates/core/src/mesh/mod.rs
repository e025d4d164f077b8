//! Conforming triangulations of axis-aligned squares.
//!
//! Meshes are immutable once built. Every constructor goes through
//! [`Mesh::from_parts`], which derives the edge table and the outward
//! boundary normals and rejects nonconforming input.

mod io;

use std::collections::{HashMap, HashSet};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use io::{load_mesh, save_mesh};

pub type Point = [f64; 2];

/// Upper bound on circumradius / inradius accepted for generated meshes.
pub const SHAPE_REGULARITY_BOUND: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    /// Unit outward normal.
    pub normal: Point,
    /// The unique cell containing this edge.
    pub cell: usize,
    /// Position of the edge inside `Mesh::cell_edges[cell]`.
    pub local_edge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    edges: Vec<[usize; 2]>,
    /// Local edges of each cell, in the order (v0,v1), (v1,v2), (v2,v0).
    cell_edges: Vec<[usize; 3]>,
}

/// Local vertex pairs of the three cell edges.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn signed_area(p0: Point, p1: Point, p2: Point) -> f64 {
    0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Mesh {
    /// Builds a mesh from raw vertex, cell and boundary-edge lists and checks
    /// orientation and conformity.
    pub fn from_parts(vertices: Vec<Point>, cells: Vec<[usize; 3]>, boundary_pairs: Vec<[usize; 2]>) -> Result<Self> {
        let nv = vertices.len();
        if cells.is_empty() {
            return Err(Error::InvariantViolation("mesh has no cells".into()));
        }
        if vertices.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvariantViolation("non-finite vertex coordinate".into()));
        }

        let mut seen_cells = HashSet::with_capacity(cells.len());
        let mut used = vec![false; nv];
        for (c, cell) in cells.iter().enumerate() {
            if cell.iter().any(|&v| v >= nv) {
                return Err(Error::InvariantViolation(format!("cell {c} references a vertex out of range")));
            }
            if cell[0] == cell[1] || cell[1] == cell[2] || cell[0] == cell[2] {
                return Err(Error::InvariantViolation(format!("cell {c} repeats a vertex")));
            }
            let area = signed_area(vertices[cell[0]], vertices[cell[1]], vertices[cell[2]]);
            if !(area > 0.0) {
                return Err(Error::InvariantViolation(format!(
                    "cell {c} is not counterclockwise (signed area {area:e})"
                )));
            }
            let mut key = *cell;
            key.sort_unstable();
            if !seen_cells.insert(key) {
                return Err(Error::InvariantViolation(format!("cell {c} is repeated")));
            }
            for &v in cell {
                used[v] = true;
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvariantViolation(format!("vertex {v} belongs to no cell")));
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::with_capacity(cells.len() * 2);
        let mut edges = Vec::with_capacity(cells.len() * 2);
        // (count, first cell, local index in first cell)
        let mut incidence: Vec<(usize, usize, usize)> = Vec::with_capacity(cells.len() * 2);
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let mut local = [0usize; 3];
            for (k, [i, j]) in LOCAL_EDGES.iter().enumerate() {
                let key = edge_key(cell[*i], cell[*j]);
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    incidence.push((0, c, k));
                    edges.len() - 1
                });
                incidence[e].0 += 1;
                if incidence[e].0 > 2 {
                    return Err(Error::InvariantViolation(format!(
                        "edge ({}, {}) is shared by more than two cells",
                        key.0, key.1
                    )));
                }
                local[k] = e;
            }
            cell_edges.push(local);
        }

        let expected_boundary = incidence.iter().filter(|inc| inc.0 == 1).count();
        if boundary_pairs.len() != expected_boundary {
            return Err(Error::InvariantViolation(format!(
                "{} boundary edges listed but the cells have {} unshared edges",
                boundary_pairs.len(),
                expected_boundary
            )));
        }
        let mut seen_boundary = HashSet::with_capacity(boundary_pairs.len());
        let mut boundary_edges = Vec::with_capacity(boundary_pairs.len());
        for [a, b] in boundary_pairs {
            let key = edge_key(a, b);
            let Some(&e) = edge_index.get(&key) else {
                return Err(Error::InvariantViolation(format!("boundary edge ({a}, {b}) is not an edge of any cell")));
            };
            let (count, cell, local_edge) = incidence[e];
            if count != 1 {
                return Err(Error::InvariantViolation(format!("boundary edge ({a}, {b}) is shared by two cells")));
            }
            if !seen_boundary.insert(key) {
                return Err(Error::InvariantViolation(format!("boundary edge ({a}, {b}) is listed twice")));
            }
            let pa = vertices[a];
            let pb = vertices[b];
            let len = dist(pa, pb);
            let mut normal = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
            let opposite = cells[cell][3 - LOCAL_EDGES[local_edge][0] - LOCAL_EDGES[local_edge][1]];
            let po = vertices[opposite];
            if normal[0] * (po[0] - pa[0]) + normal[1] * (po[1] - pa[1]) > 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            boundary_edges.push(BoundaryEdge { vertices: [a, b], normal, cell, local_edge });
        }

        Ok(Mesh { vertices, cells, boundary_edges, edges, cell_edges })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn cell_edges(&self) -> &[[usize; 3]] {
        &self.cell_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_points(&self, c: usize) -> [Point; 3] {
        let [a, b, d] = self.cells[c];
        [self.vertices[a], self.vertices[b], self.vertices[d]]
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let [p0, p1, p2] = self.cell_points(c);
        signed_area(p0, p1, p2)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_area(c)).sum()
    }

    /// Longest edge of cell `c` (the local value of the meshsize function).
    pub fn cell_diameter(&self, c: usize) -> f64 {
        let [p0, p1, p2] = self.cell_points(c);
        dist(p0, p1).max(dist(p1, p2)).max(dist(p2, p0))
    }

    /// Circumradius over inradius; 2 for an equilateral triangle.
    pub fn cell_shape_ratio(&self, c: usize) -> f64 {
        let [p0, p1, p2] = self.cell_points(c);
        let (a, b, d) = (dist(p1, p2), dist(p2, p0), dist(p0, p1));
        let area = signed_area(p0, p1, p2);
        let s = 0.5 * (a + b + d);
        a * b * d * s / (4.0 * area * area)
    }

    pub fn max_shape_ratio(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_shape_ratio(c)).fold(0.0, f64::max)
    }

    /// Meshsize h(x) = max of h_K over the closed cells containing vertex `v`.
    pub fn vertex_meshsize(&self) -> Vec<f64> {
        let mut h = vec![0.0f64; self.num_vertices()];
        for (c, cell) in self.cells.iter().enumerate() {
            let hk = self.cell_diameter(c);
            for &v in cell {
                h[v] = h[v].max(hk);
            }
        }
        h
    }

    /// Axis-aligned bounding box `[xmin, ymin, xmax, ymax]`.
    pub fn bounding_box(&self) -> [f64; 4] {
        self.vertices.iter().fold([f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY], |b, p| {
            [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])]
        })
    }

    /// Whether vertex `v` lies on a boundary edge.
    pub fn boundary_vertex_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.num_vertices()];
        for be in &self.boundary_edges {
            flags[be.vertices[0]] = true;
            flags[be.vertices[1]] = true;
        }
        flags
    }
}

/// Maximum cell diameter.
pub fn mesh_size(mesh: &Mesh) -> f64 {
    (0..mesh.num_cells()).map(|c| mesh.cell_diameter(c)).fold(0.0, f64::max)
}

/// Criss-cross triangulation of `[xmin, xmax]^2`: `n x n` squares, each cut
/// into four triangles meeting at its centre.
///
/// With `perturb > 0` every interior grid vertex is moved by a random
/// displacement of length at most `perturb * (xmax - xmin) / n`, drawn from
/// a ChaCha stream seeded by `seed`. Square centres follow as the mean of
/// their four corners so each square stays star-shaped about its centre.
pub fn generate_square_mesh(xmin: f64, xmax: f64, n: usize, perturb: f64, seed: u64) -> Result<Mesh> {
    if !(xmin.is_finite() && xmax.is_finite() && xmax > xmin) {
        return Err(Error::InvalidParameter(format!("square bounds must satisfy xmin < xmax (got {xmin}, {xmax})")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(0.0..0.3).contains(&perturb) {
        return Err(Error::InvalidParameter(format!("perturb must lie in [0, 0.3) (got {perturb})")));
    }

    let width = (xmax - xmin) / n as f64;
    let grid = |i: usize, j: usize| j * (n + 1) + i;
    let centre = |i: usize, j: usize| (n + 1) * (n + 1) + j * n + i;

    let mut vertices = Vec::with_capacity((n + 1) * (n + 1) + n * n);
    for j in 0..=n {
        for i in 0..=n {
            // Snap the far side to xmax exactly.
            let x = if i == n { xmax } else { xmin + i as f64 * width };
            let y = if j == n { xmax } else { xmin + j as f64 * width };
            vertices.push([x, y]);
        }
    }
    if perturb > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for j in 1..n {
            for i in 1..n {
                let radius = perturb * width * rng.random::<f64>();
                let angle = std::f64::consts::TAU * rng.random::<f64>();
                let v = &mut vertices[grid(i, j)];
                v[0] += radius * angle.cos();
                v[1] += radius * angle.sin();
            }
        }
    }
    for j in 0..n {
        for i in 0..n {
            let corners = [grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1)];
            let mut c = [0.0, 0.0];
            for &k in &corners {
                c[0] += 0.25 * vertices[k][0];
                c[1] += 0.25 * vertices[k][1];
            }
            vertices.push(c);
        }
    }

    let mut cells = Vec::with_capacity(4 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (grid(i, j), grid(i + 1, j), grid(i + 1, j + 1), grid(i, j + 1));
            let m = centre(i, j);
            cells.extend_from_slice(&[[a, b, m], [b, c, m], [c, d, m], [d, a, m]]);
        }
    }

    let mut boundary = Vec::with_capacity(4 * n);
    for i in 0..n {
        boundary.push([grid(i, 0), grid(i + 1, 0)]);
    }
    for j in 0..n {
        boundary.push([grid(n, j), grid(n, j + 1)]);
    }
    for i in (0..n).rev() {
        boundary.push([grid(i + 1, n), grid(i, n)]);
    }
    for j in (0..n).rev() {
        boundary.push([grid(0, j + 1), grid(0, j)]);
    }

    let mesh = Mesh::from_parts(vertices, cells, boundary)?;
    let ratio = mesh.max_shape_ratio();
    if ratio > SHAPE_REGULARITY_BOUND {
        return Err(Error::InvariantViolation(format!("perturbed mesh is not shape regular (ratio {ratio:.3})")));
    }
    Ok(mesh)
}

/// Red refinement: every triangle is split into four similar children
/// through its edge midpoints. New vertex `nv + e` is the midpoint of edge `e`.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices.clone();
    vertices.extend(mesh.edges.iter().map(|&[a, b]| {
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
    }));

    let mut cells = Vec::with_capacity(4 * mesh.num_cells());
    for (cell, local) in mesh.cells.iter().zip(&mesh.cell_edges) {
        let [a, b, c] = *cell;
        let (mab, mbc, mca) = (nv + local[0], nv + local[1], nv + local[2]);
        cells.extend_from_slice(&[[a, mab, mca], [mab, b, mbc], [mca, mbc, c], [mab, mbc, mca]]);
    }

    let mut edge_lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(mesh.edges.len());
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        edge_lookup.insert((a, b), e);
    }
    let mut boundary = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for be in &mesh.boundary_edges {
        let [a, b] = be.vertices;
        let m = nv + edge_lookup[&edge_key(a, b)];
        boundary.push([a, m]);
        boundary.push([m, b]);
    }

    Mesh::from_parts(vertices, cells, boundary).expect("uniform refinement of a valid mesh is valid")
}
