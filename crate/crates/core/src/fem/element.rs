//! The quadratic Lagrange triangle.
//!
//! ```text
//! t
//! |
//! 2
//! | \
//! 5   4
//! |     \
//! 0---3---1 -- s
//! ```
//!
//! Nodes 0..3 are the vertices, 3 sits on edge (0,1), 4 on (1,2), 5 on (2,0),
//! matching the local edge order of [`crate::mesh::LOCAL_EDGES`].

use crate::mesh::Point;

pub const NODES_PER_CELL: usize = 6;

pub const REFERENCE_NODES: [[f64; 2]; NODES_PER_CELL] =
    [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]];

const BARY_GRADS: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceElementP2;

impl ReferenceElementP2 {
    pub fn nodes(&self) -> &'static [[f64; 2]; NODES_PER_CELL] {
        &REFERENCE_NODES
    }

    pub fn values(&self, p: [f64; 2]) -> [f64; NODES_PER_CELL] {
        let l = [1.0 - p[0] - p[1], p[0], p[1]];
        [
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[0] * l[1],
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
        ]
    }

    /// Gradients with respect to the reference coordinates.
    pub fn gradients(&self, p: [f64; 2]) -> [[f64; 2]; NODES_PER_CELL] {
        let l = [1.0 - p[0] - p[1], p[0], p[1]];
        let g = BARY_GRADS;
        let vertex = |i: usize| {
            let s = 4.0 * l[i] - 1.0;
            [s * g[i][0], s * g[i][1]]
        };
        let edge =
            |i: usize, j: usize| [4.0 * (l[i] * g[j][0] + l[j] * g[i][0]), 4.0 * (l[i] * g[j][1] + l[j] * g[i][1])];
        [vertex(0), vertex(1), vertex(2), edge(0, 1), edge(1, 2), edge(2, 0)]
    }
}

/// Affine map `x = x0 + J (s, t)` of one cell.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub origin: Point,
    /// Columns are `x1 - x0` and `x2 - x0`.
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
}

impl CellGeometry {
    pub fn new(points: [Point; 3]) -> Self {
        let [p0, p1, p2] = points;
        let jacobian = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        CellGeometry { origin: p0, jacobian, det }
    }

    pub fn map(&self, p: [f64; 2]) -> Point {
        let j = &self.jacobian;
        [self.origin[0] + j[0][0] * p[0] + j[0][1] * p[1], self.origin[1] + j[1][0] * p[0] + j[1][1] * p[1]]
    }

    pub fn inverse_map(&self, x: Point) -> [f64; 2] {
        let j = &self.jacobian;
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [(j[1][1] * d[0] - j[0][1] * d[1]) / self.det, (-j[1][0] * d[0] + j[0][0] * d[1]) / self.det]
    }

    /// Physical gradient `J^{-T} g`.
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        [(j[1][1] * g[0] - j[1][0] * g[1]) / self.det, (-j[0][1] * g[0] + j[0][0] * g[1]) / self.det]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_property() {
        let el = ReferenceElementP2;
        for (j, node) in el.nodes().iter().enumerate() {
            let v = el.values(*node);
            for (i, vi) in v.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((vi - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let el = ReferenceElementP2;
        for p in [[0.1, 0.2], [0.3, 0.3], [0.7, 0.05], [0.0, 0.0]] {
            let sum: f64 = el.values(p).iter().sum();
            assert!((sum - 1.0).abs() < 1e-15);
            let g = el.gradients(p);
            let gs = g.iter().fold([0.0, 0.0], |a, b| [a[0] + b[0], a[1] + b[1]]);
            assert!(gs[0].abs() < 1e-14 && gs[1].abs() < 1e-14);
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        let el = ReferenceElementP2;
        let p = [0.23, 0.41];
        let h = 1e-5;
        let g = el.gradients(p);
        let vx = (el.values([p[0] + h, p[1]]), el.values([p[0] - h, p[1]]));
        let vy = (el.values([p[0], p[1] + h]), el.values([p[0], p[1] - h]));
        for i in 0..NODES_PER_CELL {
            // Quadratics: central differences are exact up to rounding.
            assert!((g[i][0] - (vx.0[i] - vx.1[i]) / (2.0 * h)).abs() < 1e-9);
            assert!((g[i][1] - (vy.0[i] - vy.1[i]) / (2.0 * h)).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_map_round_trip() {
        let geo = CellGeometry::new([[0.1, 0.2], [0.9, 0.3], [0.4, 1.1]]);
        let s = [0.3, 0.25];
        let back = geo.inverse_map(geo.map(s));
        assert!((back[0] - s[0]).abs() < 1e-15 && (back[1] - s[1]).abs() < 1e-15);
    }
}
