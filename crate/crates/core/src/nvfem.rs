//! Linear nonvariational solver for `A : D^2 u + b · grad u = f`, `u = g` on
//! the boundary.
//!
//! The discrete Hessian is an unknown of the system. With `n_I` interior DOFs
//! of V and `n_W` DOFs of W, the unknown vector is
//! `[u_I | h11 | h12 | h22]` and the rows are
//!
//! ```text
//! (A11 h11 + 2 A12 h12 + A22 h22 + b · grad u, φ) = (f, φ)     φ in V interior
//! M h_ij - B_ij (u_I + lift)                    = 0          tested with W
//! ```
//!
//! Dirichlet data enters through a nodal lift on the boundary DOFs, whose
//! columns are moved to the right-hand side.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{
    assemble_generic, assemble_mass_matrix, assemble_vector, build_dofmap, CellPoint, DofMap, FeFunction,
    LuFactorization, QpTable, SpaceKind, SparseMatrix, TriangleRule, TripletBuilder,
};
use crate::hessian::{assemble_hessian_blocks, HessianBlocks, HessianField};
use crate::mesh::{Mesh, Point};
use crate::sym2::Sym2;

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// A coefficient field. `Table` values are indexed by the points of
/// [`TriangleRule::default`].
#[derive(Clone)]
pub enum Coefficient<T> {
    Constant(T),
    Function(Arc<dyn Fn(Point) -> T + Send + Sync>),
    Table(QpTable<T>),
}

impl<T: Copy> Coefficient<T> {
    #[inline]
    pub fn eval(&self, pt: &CellPoint) -> T {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Function(f) => f(pt.x),
            Coefficient::Table(t) => t.get(pt.cell, pt.qp),
        }
    }

    pub fn function(f: impl Fn(Point) -> T + Send + Sync + 'static) -> Self {
        Coefficient::Function(Arc::new(f))
    }

    /// Evaluates the coefficient once at every quadrature point.
    pub fn tabulate(&self, dm: &DofMap) -> QpTable<T> {
        QpTable::from_fn(dm, &TriangleRule::default(), |pt| self.eval(pt))
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for Coefficient<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coefficient::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Coefficient::Function(_) => f.write_str("Function(..)"),
            Coefficient::Table(t) => write!(f, "Table({} values)", t.values().len()),
        }
    }
}

#[derive(Clone)]
pub struct LinearNvProblem {
    /// Symmetric coefficient matrix `A(x)`.
    pub a: Coefficient<Sym2>,
    /// First order term `b(x) · grad u`; `None` means zero.
    pub b: Option<Coefficient<[f64; 2]>>,
    pub f: Coefficient<f64>,
    /// Dirichlet data, evaluated at the boundary DOF coordinates.
    pub g: ScalarFn,
}

impl LinearNvProblem {
    pub fn new(a: Coefficient<Sym2>, f: Coefficient<f64>, g: ScalarFn) -> Self {
        LinearNvProblem { a, b: None, f, g }
    }

    pub fn with_advection(mut self, b: Coefficient<[f64; 2]>) -> Self {
        self.b = Some(b);
        self
    }
}

/// Spaces and f-independent blocks for one mesh, reusable across solves.
#[derive(Debug)]
pub struct NvSpaces {
    pub v: Arc<DofMap>,
    pub w: Arc<DofMap>,
    pub mass: SparseMatrix,
    pub hessian: HessianBlocks,
}

impl NvSpaces {
    pub fn new(mesh: Arc<Mesh>) -> Result<Self> {
        let v = Arc::new(build_dofmap(mesh.clone(), SpaceKind::Dirichlet));
        let w = Arc::new(build_dofmap(mesh, SpaceKind::Free));
        let mass = assemble_mass_matrix(&w);
        let hessian = assemble_hessian_blocks(&w, &w)?;
        Ok(NvSpaces { v, w, mass, hessian })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.v.mesh()
    }

    pub fn num_interior(&self) -> usize {
        self.v.num_free()
    }

    pub fn system_size(&self) -> usize {
        self.v.num_free() + 3 * self.w.num_dofs()
    }

    /// Coefficients equal to `g` on boundary DOFs and zero elsewhere.
    pub fn lift(&self, g: &(dyn Fn(Point) -> f64 + Send + Sync)) -> Vec<f64> {
        let mut lift = vec![0.0; self.v.num_dofs()];
        for &d in self.v.boundary_dofs() {
            lift[d] = g(self.v.coords()[d]);
        }
        lift
    }
}

#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Boundary values on all V DOFs (zero in the interior).
    pub lift: Vec<f64>,
    pub num_interior: usize,
    pub num_w: usize,
}

impl BlockSystem {
    pub fn dim(&self) -> usize {
        self.num_interior + 3 * self.num_w
    }

    /// Splits a solution vector into the lifted `U` and its Hessian.
    pub fn unpack(&self, spaces: &NvSpaces, x: &[f64]) -> Result<(FeFunction, HessianField)> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let mut u = self.lift.clone();
        for (k, &d) in spaces.v.free_dofs().iter().enumerate() {
            u[d] = x[k];
        }
        let nw = self.num_w;
        let base = self.num_interior;
        let comp = |c: usize| FeFunction::new(spaces.w.clone(), x[base + c * nw..base + (c + 1) * nw].to_vec());
        Ok((FeFunction::new(spaces.v.clone(), u)?, HessianField { h11: comp(0)?, h12: comp(1)?, h22: comp(2)? }))
    }

    /// Packs `(U, H)` into the unknown layout; used for residual checks.
    pub fn pack(&self, spaces: &NvSpaces, u: &FeFunction, h: &HessianField) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.dim());
        x.extend(spaces.v.free_dofs().iter().map(|&d| u.coeffs()[d]));
        for c in h.components() {
            x.extend_from_slice(c.coeffs());
        }
        x
    }
}

pub fn assemble_block_system(p: &LinearNvProblem, spaces: &NvSpaces) -> Result<BlockSystem> {
    let v = &spaces.v;
    let w = &spaces.w;
    let ni = v.num_free();
    let nw = w.num_dofs();
    let rule = TriangleRule::default();
    let lift = spaces.lift(p.g.as_ref());

    let c11 = assemble_generic(w, v, &rule, |pt, s, t| p.a.eval(pt).xx * s.value * t.value)?;
    let c12 = assemble_generic(w, v, &rule, |pt, s, t| p.a.eval(pt).xy * s.value * t.value)?;
    let c22 = assemble_generic(w, v, &rule, |pt, s, t| p.a.eval(pt).yy * s.value * t.value)?;
    let advection = match &p.b {
        Some(b) => Some(assemble_generic(v, v, &rule, |pt, s, t| {
            let bv = b.eval(pt);
            (bv[0] * s.grad[0] + bv[1] * s.grad[1]) * t.value
        })?),
        None => None,
    };

    let nnz_guess = 3 * c11.nnz() + 4 * spaces.mass.nnz() + 3 * spaces.hessian.b11.nnz();
    let mut builder = TripletBuilder::with_capacity(ni + 3 * nw, ni + 3 * nw, nnz_guess);
    let interior = |d: usize| v.free_index(d);
    let h_col = |c: usize| move |d: usize| Some(ni + c * nw + d);

    // PDE rows
    builder.add_block(&c11, 1.0, interior, h_col(0));
    builder.add_block(&c12, 2.0, interior, h_col(1));
    builder.add_block(&c22, 1.0, interior, h_col(2));
    if let Some(adv) = &advection {
        builder.add_block(adv, 1.0, interior, interior);
    }
    let load = assemble_vector(v, &rule, |pt, t| p.f.eval(pt) * t.value);
    let mut rhs = vec![0.0; ni + 3 * nw];
    for (k, &d) in v.free_dofs().iter().enumerate() {
        rhs[k] = load[d];
    }
    if let Some(adv) = &advection {
        let lifted = adv.mul_vec(&lift)?;
        for (k, &d) in v.free_dofs().iter().enumerate() {
            rhs[k] -= lifted[d];
        }
    }

    // Hessian rows
    for (c, b) in spaces.hessian.iter().into_iter().enumerate() {
        let row = move |d: usize| Some(ni + c * nw + d);
        builder.add_block(&spaces.mass, 1.0, row, h_col(c));
        builder.add_block(b, -1.0, row, interior);
        let lifted = b.mul_vec(&lift)?;
        rhs[ni + c * nw..ni + (c + 1) * nw].copy_from_slice(&lifted);
    }

    Ok(BlockSystem { matrix: builder.build(), rhs, lift, num_interior: ni, num_w: nw })
}

/// Solves the block system. A singular system means the coefficient lost
/// invertibility; callers treat it as an ellipticity failure.
pub fn solve_nonvariational(p: &LinearNvProblem, spaces: &NvSpaces) -> Result<(FeFunction, HessianField)> {
    let system = assemble_block_system(p, spaces)?;
    let x = LuFactorization::new(&system.matrix)?.solve(&system.rhs)?;
    system.unpack(spaces, &x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_square_mesh;

    fn spaces(n: usize) -> NvSpaces {
        NvSpaces::new(Arc::new(generate_square_mesh(-0.5, 0.5, n, 0.0, 0).unwrap())).unwrap()
    }

    #[test]
    fn block_dimension_on_single_square() {
        let s = spaces(1);
        let p =
            LinearNvProblem::new(Coefficient::Constant(Sym2::IDENTITY), Coefficient::Constant(0.0), Arc::new(|_| 0.0));
        let sys = assemble_block_system(&p, &s).unwrap();
        assert_eq!(sys.dim(), 44);
        assert_eq!(sys.matrix.nrows(), 44);
    }

    #[test]
    fn homogeneous_problem_has_zero_solution() {
        let s = spaces(2);
        let p =
            LinearNvProblem::new(Coefficient::Constant(Sym2::IDENTITY), Coefficient::Constant(0.0), Arc::new(|_| 0.0));
        let (u, h) = solve_nonvariational(&p, &s).unwrap();
        assert_eq!(u.max_abs(), 0.0);
        assert!(h.components().iter().all(|c| c.max_abs() == 0.0));
    }

    #[test]
    fn identity_pde_rows_are_the_trace() {
        let s = spaces(2);
        let p =
            LinearNvProblem::new(Coefficient::Constant(Sym2::IDENTITY), Coefficient::Constant(1.0), Arc::new(|_| 0.0));
        let sys = assemble_block_system(&p, &s).unwrap();
        let ni = s.num_interior();
        let nw = s.w.num_dofs();
        for (k, &d) in s.v.free_dofs().iter().enumerate() {
            for (j, m) in s.mass.row(d) {
                assert!((sys.matrix.get(k, ni + j) - m).abs() < 1e-15);
                assert_eq!(sys.matrix.get(k, ni + nw + j), 0.0);
                assert!((sys.matrix.get(k, ni + 2 * nw + j) - m).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn negative_identity_is_still_invertible() {
        let s = spaces(2);
        let g: ScalarFn = Arc::new(|p: Point| p[0] * p[0] + p[1] * p[1]);
        let p = LinearNvProblem::new(
            Coefficient::Constant(Sym2::scaled_identity(-1.0)),
            Coefficient::Constant(-4.0),
            g.clone(),
        );
        let (u, _) = solve_nonvariational(&p, &s).unwrap();
        for (d, x) in s.v.coords().iter().enumerate() {
            assert!((u.coeffs()[d] - g(*x)).abs() < 1e-9);
        }
    }
}
