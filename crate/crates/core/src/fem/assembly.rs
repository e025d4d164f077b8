//! Element-loop assemblers shared by every bilinear form in the crate.

use super::dofmap::DofMap;
use super::element::{ReferenceElementP2, NODES_PER_CELL};
use super::function::FeFunction;
use super::quadrature::{EdgeRule, TriangleRule};
use super::sparse::{SparseMatrix, TripletBuilder};
use crate::error::{Error, Result};
use crate::mesh::{Point, LOCAL_EDGES};

/// Value and physical gradient of one basis function at one point.
#[derive(Debug, Clone, Copy, Default)]
pub struct BasisSample {
    pub value: f64,
    pub grad: [f64; 2],
}

/// A quadrature point inside a cell.
#[derive(Debug, Clone, Copy)]
pub struct CellPoint {
    pub cell: usize,
    /// Index of the point within the triangle rule.
    pub qp: usize,
    pub x: Point,
}

/// A quadrature point on a boundary edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgePoint {
    /// Index into `Mesh::boundary_edges`.
    pub edge: usize,
    pub cell: usize,
    pub x: Point,
    pub normal: Point,
}

/// Reference basis values and gradients tabulated at the points of a rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub values: Vec<[f64; NODES_PER_CELL]>,
    pub gradients: Vec<[[f64; 2]; NODES_PER_CELL]>,
}

impl Tabulation {
    pub fn at(points: &[[f64; 2]]) -> Self {
        let el = ReferenceElementP2;
        Tabulation {
            values: points.iter().map(|&p| el.values(p)).collect(),
            gradients: points.iter().map(|&p| el.gradients(p)).collect(),
        }
    }
}

fn check_same_mesh(trial: &DofMap, test: &DofMap) -> Result<()> {
    if trial.num_cells() != test.num_cells() {
        return Err(Error::DimensionMismatch { expected: test.num_cells(), found: trial.num_cells() });
    }
    if !trial.same_mesh(test) {
        return Err(Error::InvalidParameter("trial and test spaces live on different meshes".into()));
    }
    Ok(())
}

/// Calls `visit(point, weight, samples)` at every quadrature point, where
/// `weight` already includes the Jacobian and `samples` holds the six local
/// basis functions of the cell.
pub fn for_each_cell_point(
    dm: &DofMap,
    rule: &TriangleRule,
    mut visit: impl FnMut(&CellPoint, f64, &[BasisSample; NODES_PER_CELL]),
) {
    let tab = Tabulation::at(&rule.points);
    let mut samples = [BasisSample::default(); NODES_PER_CELL];
    for cell in 0..dm.num_cells() {
        let geo = dm.geometry(cell);
        let jac = geo.det.abs();
        for (qp, (&p, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            for (k, s) in samples.iter_mut().enumerate() {
                s.value = tab.values[qp][k];
                s.grad = geo.push_gradient(tab.gradients[qp][k]);
            }
            let point = CellPoint { cell, qp, x: geo.map(p) };
            visit(&point, w * jac, &samples);
        }
    }
}

/// `A[test a, trial b] = sum_cells sum_qp w * kernel(point, trial_b, test_a)`.
///
/// Rows follow the test numbering and columns the trial numbering, both over
/// all DOFs; constrained DOFs are selected later by the caller.
pub fn assemble_generic<K>(trial: &DofMap, test: &DofMap, rule: &TriangleRule, kernel: K) -> Result<SparseMatrix>
where
    K: Fn(&CellPoint, &BasisSample, &BasisSample) -> f64,
{
    check_same_mesh(trial, test)?;
    let mut builder = TripletBuilder::with_capacity(test.num_dofs(), trial.num_dofs(), test.num_cells() * 36);
    let mut local = [[0.0f64; NODES_PER_CELL]; NODES_PER_CELL];
    let mut current = usize::MAX;
    let flush = |builder: &mut TripletBuilder, cell: usize, local: &[[f64; NODES_PER_CELL]; NODES_PER_CELL]| {
        let rows = test.cell_dofs(cell);
        let cols = trial.cell_dofs(cell);
        for (a, row) in local.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                builder.add(rows[a], cols[b], v);
            }
        }
    };
    for_each_cell_point(test, rule, |pt, w, samples| {
        if pt.cell != current {
            if current != usize::MAX {
                flush(&mut builder, current, &local);
            }
            current = pt.cell;
            local = [[0.0; NODES_PER_CELL]; NODES_PER_CELL];
        }
        for (a, test_s) in samples.iter().enumerate() {
            for (b, trial_s) in samples.iter().enumerate() {
                local[a][b] += w * kernel(pt, trial_s, test_s);
            }
        }
    });
    if current != usize::MAX {
        flush(&mut builder, current, &local);
    }
    Ok(builder.build())
}

/// `F[a] = sum_cells sum_qp w * source(point, test_a)`.
pub fn assemble_vector<S>(test: &DofMap, rule: &TriangleRule, source: S) -> Vec<f64>
where
    S: Fn(&CellPoint, &BasisSample) -> f64,
{
    let mut out = vec![0.0; test.num_dofs()];
    for_each_cell_point(test, rule, |pt, w, samples| {
        let dofs = test.cell_dofs(pt.cell);
        for (s, &d) in samples.iter().zip(dofs) {
            out[d] += w * source(pt, s);
        }
    });
    out
}

/// Boundary analogue of [`assemble_generic`]: integrates over the boundary
/// edges, with basis gradients taken from the parent cell.
pub fn assemble_boundary<K>(trial: &DofMap, test: &DofMap, rule: &EdgeRule, kernel: K) -> Result<SparseMatrix>
where
    K: Fn(&EdgePoint, &BasisSample, &BasisSample) -> f64,
{
    check_same_mesh(trial, test)?;
    let mesh = test.mesh();
    let el = ReferenceElementP2;
    let nodes = el.nodes();
    let mut builder =
        TripletBuilder::with_capacity(test.num_dofs(), trial.num_dofs(), mesh.boundary_edges().len() * 36);
    for (e, be) in mesh.boundary_edges().iter().enumerate() {
        let cell = be.cell;
        let geo = test.geometry(cell);
        let [i, j] = LOCAL_EDGES[be.local_edge];
        let (ri, rj) = (nodes[i], nodes[j]);
        let [a, b] = be.vertices;
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let length = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
        let mut local = [[0.0f64; NODES_PER_CELL]; NODES_PER_CELL];
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let r = [(1.0 - t) * ri[0] + t * rj[0], (1.0 - t) * ri[1] + t * rj[1]];
            let vals = el.values(r);
            let grads = el.gradients(r);
            let samples: [BasisSample; NODES_PER_CELL] =
                std::array::from_fn(|k| BasisSample { value: vals[k], grad: geo.push_gradient(grads[k]) });
            let pt = EdgePoint { edge: e, cell, x: geo.map(r), normal: be.normal };
            for (la, test_s) in samples.iter().enumerate() {
                for (lb, trial_s) in samples.iter().enumerate() {
                    local[la][lb] += w * length * kernel(&pt, trial_s, test_s);
                }
            }
        }
        let rows = test.cell_dofs(cell);
        let cols = trial.cell_dofs(cell);
        for (la, row) in local.iter().enumerate() {
            for (lb, &v) in row.iter().enumerate() {
                builder.add(rows[la], cols[lb], v);
            }
        }
    }
    Ok(builder.build())
}

pub fn assemble_mass_matrix(dm: &DofMap) -> SparseMatrix {
    assemble_generic(dm, dm, &TriangleRule::default(), |_, u, v| u.value * v.value)
        .expect("a space is always compatible with itself")
}

/// Values of type `T` at every quadrature point of every cell, indexed by
/// `cell * points_per_cell + qp`.
#[derive(Debug, Clone)]
pub struct QpTable<T> {
    points_per_cell: usize,
    values: Vec<T>,
}

impl<T: Copy> QpTable<T> {
    pub fn from_fn(dm: &DofMap, rule: &TriangleRule, mut f: impl FnMut(&CellPoint) -> T) -> Self {
        let mut values = Vec::with_capacity(dm.num_cells() * rule.len());
        let geo_points = &rule.points;
        for cell in 0..dm.num_cells() {
            let geo = dm.geometry(cell);
            for (qp, &p) in geo_points.iter().enumerate() {
                values.push(f(&CellPoint { cell, qp, x: geo.map(p) }));
            }
        }
        QpTable { points_per_cell: rule.len(), values }
    }

    #[inline]
    pub fn get(&self, cell: usize, qp: usize) -> T {
        self.values[cell * self.points_per_cell + qp]
    }
}

impl<T> QpTable<T> {
    pub fn points_per_cell(&self) -> usize {
        self.points_per_cell
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Values and gradients of `u` at the points of `rule`.
pub fn sample_function(u: &FeFunction, rule: &TriangleRule) -> QpTable<(f64, [f64; 2])> {
    let points = &rule.points;
    QpTable::from_fn(u.dofmap(), rule, |pt| {
        let p = points[pt.qp];
        (u.evaluate(pt.cell, p), u.evaluate_gradient(pt.cell, p))
    })
}
