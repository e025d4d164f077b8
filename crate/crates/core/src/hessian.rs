//! The finite element Hessian.
//!
//! For a continuous P2 function `V`, the Hessian `H[V]` is the unique field
//! in the unconstrained P2 space `W` (componentwise) with
//!
//! ```text
//! ∫ H[V]_ij Φ = -∫ ∂_i V ∂_j Φ + ∮ ∂_i V n_j Φ      for all Φ in W,
//! ```
//!
//! i.e. `M h_ij = B_ij v` with `M` the mass matrix of `W`. Only the upper
//! triangle (11, 12, 22) is stored.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{
    assemble_boundary, assemble_generic, assemble_mass_matrix, DofMap, EdgeRule, FeFunction, LuFactorization,
    SpaceKind, SparseMatrix, TriangleRule, TripletBuilder,
};
use crate::mesh::Point;
use crate::sym2::Sym2;

/// Upper-triangular storage of a symmetric 2x2 field in `W`.
#[derive(Debug, Clone)]
pub struct HessianField {
    pub h11: FeFunction,
    pub h12: FeFunction,
    pub h22: FeFunction,
}

impl HessianField {
    pub fn new(h11: FeFunction, h12: FeFunction, h22: FeFunction) -> Result<Self> {
        let n = h11.coeffs().len();
        for c in [&h12, &h22] {
            if !Arc::ptr_eq(h11.dofmap(), c.dofmap()) && !h11.dofmap().same_mesh(c.dofmap()) {
                return Err(Error::InvalidParameter("Hessian components on different spaces".into()));
            }
            if c.coeffs().len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.coeffs().len() });
            }
        }
        Ok(HessianField { h11, h12, h22 })
    }

    pub fn zeros(w: Arc<DofMap>) -> Self {
        HessianField { h11: FeFunction::zeros(w.clone()), h12: FeFunction::zeros(w.clone()), h22: FeFunction::zeros(w) }
    }

    pub fn dofmap(&self) -> &Arc<DofMap> {
        self.h11.dofmap()
    }

    /// The full symmetric matrix at reference point `p` of `cell`.
    pub fn at(&self, cell: usize, p: [f64; 2]) -> Sym2 {
        Sym2::new(self.h11.evaluate(cell, p), self.h12.evaluate(cell, p), self.h22.evaluate(cell, p))
    }

    pub fn components(&self) -> [&FeFunction; 3] {
        [&self.h11, &self.h12, &self.h22]
    }

    /// `alpha * self + beta * other`.
    pub fn axpby(&self, alpha: f64, other: &HessianField, beta: f64) -> HessianField {
        HessianField {
            h11: self.h11.axpby(alpha, &other.h11, beta),
            h12: self.h12.axpby(alpha, &other.h12, beta),
            h22: self.h22.axpby(alpha, &other.h22, beta),
        }
    }

    pub fn max_coeff_diff(&self, other: &HessianField) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| crate::fem::max_coeff_diff(a, b))
            .fold(0.0, f64::max)
    }
}

/// The distributional Hessian pairing of component `(i, j)`, zero-based:
/// row `a`, column `b` holds `-∫ ∂_i φ_b ∂_j ψ_a + ∮ ∂_i φ_b n_j ψ_a`.
pub fn assemble_hessian_block(trial: &DofMap, test: &DofMap, i: usize, j: usize) -> Result<SparseMatrix> {
    assert!(i < 2 && j < 2, "Hessian component index out of range");
    let volume = assemble_generic(trial, test, &TriangleRule::default(), |_, u, v| -u.grad[i] * v.grad[j])?;
    let boundary = assemble_boundary(trial, test, &EdgeRule::default(), |pt, u, v| u.grad[i] * pt.normal[j] * v.value)?;
    let mut b = TripletBuilder::with_capacity(volume.nrows(), volume.ncols(), volume.nnz() + boundary.nnz());
    b.add_block(&volume, 1.0, Some, Some);
    b.add_block(&boundary, 1.0, Some, Some);
    Ok(b.build())
}

#[derive(Debug, Clone)]
pub struct HessianBlocks {
    pub b11: SparseMatrix,
    pub b12: SparseMatrix,
    pub b22: SparseMatrix,
}

impl HessianBlocks {
    pub fn iter(&self) -> [&SparseMatrix; 3] {
        [&self.b11, &self.b12, &self.b22]
    }
}

/// Blocks for (1,1), (1,2), (2,2). The off-diagonal uses slot (1,2) only.
pub fn assemble_hessian_blocks(trial: &DofMap, test: &DofMap) -> Result<HessianBlocks> {
    Ok(HessianBlocks {
        b11: assemble_hessian_block(trial, test, 0, 0)?,
        b12: assemble_hessian_block(trial, test, 0, 1)?,
        b22: assemble_hessian_block(trial, test, 1, 1)?,
    })
}

/// Reusable `u -> H[u]` with the mass matrix factorized once.
#[derive(Debug)]
pub struct HessianOperator {
    w: Arc<DofMap>,
    mass_lu: LuFactorization,
    blocks: HessianBlocks,
}

impl HessianOperator {
    pub fn new(dm: &Arc<DofMap>) -> Result<Self> {
        let w = if dm.kind() == SpaceKind::Free { dm.clone() } else { Arc::new(dm.with_kind(SpaceKind::Free)) };
        let mass = assemble_mass_matrix(&w);
        let mass_lu = LuFactorization::new(&mass)?;
        let blocks = assemble_hessian_blocks(&w, &w)?;
        Ok(HessianOperator { w, mass_lu, blocks })
    }

    pub fn space(&self) -> &Arc<DofMap> {
        &self.w
    }

    pub fn blocks(&self) -> &HessianBlocks {
        &self.blocks
    }

    pub fn apply(&self, u: &FeFunction) -> Result<HessianField> {
        if !u.dofmap().same_mesh(&self.w) {
            return Err(Error::InvalidParameter("function and Hessian operator on different meshes".into()));
        }
        let solve = |b: &SparseMatrix| -> Result<FeFunction> {
            let rhs = b.mul_vec(u.coeffs())?;
            FeFunction::new(self.w.clone(), self.mass_lu.solve(&rhs)?)
        };
        Ok(HessianField { h11: solve(&self.blocks.b11)?, h12: solve(&self.blocks.b12)?, h22: solve(&self.blocks.b22)? })
    }
}

pub fn fe_hessian(u: &FeFunction) -> Result<HessianField> {
    HessianOperator::new(u.dofmap())?.apply(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityReport {
    pub convex: bool,
    pub min_eigenvalue: f64,
    pub location: Point,
    pub cell: usize,
}

/// Pointwise surrogate for finite element convexity: the smallest eigenvalue
/// of `H` over all quadrature points must be at least `-tol`.
pub fn check_fe_convexity(h: &HessianField, tol: f64) -> ConvexityReport {
    let rule = TriangleRule::default();
    let dm = h.dofmap();
    let mut report = ConvexityReport { convex: true, min_eigenvalue: f64::INFINITY, location: [0.0; 2], cell: 0 };
    for cell in 0..dm.num_cells() {
        for &p in &rule.points {
            let lam = h.at(cell, p).min_eigenvalue();
            if lam < report.min_eigenvalue || lam.is_nan() {
                report.min_eigenvalue = lam;
                report.location = dm.geometry(cell).map(p);
                report.cell = cell;
            }
        }
    }
    report.convex = report.min_eigenvalue >= -tol;
    report
}
