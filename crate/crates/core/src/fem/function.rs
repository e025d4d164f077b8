use std::sync::Arc;

use super::dofmap::DofMap;
use super::element::ReferenceElementP2;
use crate::error::{Error, Result};
use crate::mesh::Point;

/// A P2 finite element function: coefficients over a [`DofMap`].
#[derive(Debug, Clone)]
pub struct FeFunction {
    dofmap: Arc<DofMap>,
    coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(dofmap: Arc<DofMap>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dofmap.num_dofs() {
            return Err(Error::DimensionMismatch { expected: dofmap.num_dofs(), found: coeffs.len() });
        }
        Ok(FeFunction { dofmap, coeffs })
    }

    pub fn zeros(dofmap: Arc<DofMap>) -> Self {
        let n = dofmap.num_dofs();
        FeFunction { dofmap, coeffs: vec![0.0; n] }
    }

    pub fn dofmap(&self) -> &Arc<DofMap> {
        &self.dofmap
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn evaluate(&self, cell: usize, p: [f64; 2]) -> f64 {
        let dofs = self.dofmap.cell_dofs(cell);
        ReferenceElementP2.values(p).iter().zip(dofs).map(|(v, &d)| v * self.coeffs[d]).sum()
    }

    pub fn evaluate_gradient(&self, cell: usize, p: [f64; 2]) -> [f64; 2] {
        let dofs = self.dofmap.cell_dofs(cell);
        let mut g = [0.0; 2];
        for (gr, &d) in ReferenceElementP2.gradients(p).iter().zip(dofs) {
            g[0] += gr[0] * self.coeffs[d];
            g[1] += gr[1] * self.coeffs[d];
        }
        self.dofmap.geometry(cell).push_gradient(g)
    }

    /// `alpha * self + beta * other`, on the same DofMap.
    pub fn axpby(&self, alpha: f64, other: &FeFunction, beta: f64) -> FeFunction {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| alpha * a + beta * b).collect();
        FeFunction { dofmap: self.dofmap.clone(), coeffs }
    }

    /// Maximum absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn min_coeff(&self) -> f64 {
        self.coeffs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Nodal interpolant: coefficients are `f` at the DOF coordinates.
pub fn interpolate(f: impl Fn(Point) -> f64, dofmap: &Arc<DofMap>) -> FeFunction {
    let coeffs = dofmap.coords().iter().map(|&p| f(p)).collect();
    FeFunction { dofmap: dofmap.clone(), coeffs }
}

/// Max coefficient difference between two functions on the same numbering.
pub fn max_coeff_diff(a: &FeFunction, b: &FeFunction) -> f64 {
    a.coeffs.iter().zip(&b.coeffs).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{build_dofmap, SpaceKind};
    use crate::mesh::generate_square_mesh;

    fn space() -> Arc<DofMap> {
        let mesh = Arc::new(generate_square_mesh(-0.5, 0.5, 3, 0.2, 5).unwrap());
        Arc::new(build_dofmap(mesh, SpaceKind::Free))
    }

    const SAMPLES: [[f64; 2]; 4] = [[0.1, 0.1], [0.6, 0.2], [0.25, 0.5], [1.0 / 3.0, 1.0 / 3.0]];

    #[test]
    fn constant_interpolant() {
        let u = interpolate(|_| 1.0, &space());
        assert!(u.coeffs().iter().all(|&c| c == 1.0));
    }

    #[test]
    fn reproduces_quadratics() {
        let dm = space();
        let f = |p: Point| p[0] * p[0] + p[1];
        let u = interpolate(f, &dm);
        for c in 0..dm.num_cells() {
            for s in SAMPLES {
                let x = dm.geometry(c).map(s);
                assert!((u.evaluate(c, s) - f(x)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn quartic_is_not_reproduced() {
        let dm = space();
        let f = |p: Point| p[0].powi(4);
        let u = interpolate(f, &dm);
        let worst = (0..dm.num_cells())
            .map(|c| (u.evaluate(c, [0.25, 0.25]) - f(dm.geometry(c).map([0.25, 0.25]))).abs())
            .fold(0.0, f64::max);
        assert!(worst > 1e-6);
    }

    #[test]
    fn gradient_of_linear_and_quadratic() {
        let dm = space();
        let ux = interpolate(|p| p[0], &dm);
        let uxx = interpolate(|p| p[0] * p[0], &dm);
        for c in 0..dm.num_cells() {
            for s in SAMPLES {
                let g = ux.evaluate_gradient(c, s);
                assert!((g[0] - 1.0).abs() < 1e-13 && g[1].abs() < 1e-13);
                let x = dm.geometry(c).map(s);
                let g2 = uxx.evaluate_gradient(c, s);
                assert!((g2[0] - 2.0 * x[0]).abs() < 1e-13 && g2[1].abs() < 1e-13);
            }
        }
    }

    #[test]
    fn gradient_matches_directional_difference() {
        let dm = space();
        let u = interpolate(|p| (3.0 * p[0]).sin() * (2.0 * p[1]).cos(), &dm);
        let c = 7;
        let geo = *dm.geometry(c);
        let s = [0.3, 0.3];
        let x = geo.map(s);
        let dir = [0.6, 0.8];
        let g = u.evaluate_gradient(c, s);
        let along = |h: f64| u.evaluate(c, geo.inverse_map([x[0] + h * dir[0], x[1] + h * dir[1]]));
        let exact = g[0] * dir[0] + g[1] * dir[1];
        let mut prev = f64::INFINITY;
        for k in 1..4 {
            let h = 1e-2 / 4f64.powi(k);
            let err = ((along(h) - along(-h)) / (2.0 * h) - exact).abs();
            // u is quadratic on the cell, so central differences are exact.
            assert!(err < 1e-9);
            assert!(err <= prev + 1e-12);
            prev = err;
        }
    }

    #[test]
    fn length_mismatch() {
        let dm = space();
        assert!(matches!(FeFunction::new(dm, vec![0.0; 3]), Err(Error::DimensionMismatch { .. })));
    }
}
