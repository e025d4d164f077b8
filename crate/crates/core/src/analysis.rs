//! Manufactured solutions, error norms and convergence tables.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{FeFunction, TriangleRule};
use crate::hessian::HessianField;
use crate::mesh::{mesh_size, refine_uniform, Mesh, Point};
use crate::newton::{newton_solve_with, ExactSolution, GaussCurvatureProblem, NewtonConfig};
use crate::nvfem::NvSpaces;
use crate::sym2::Sym2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Manufactured {
    /// `u = |x|^4`
    Quartic,
    /// `u = exp(|x|^2 / 2)`
    Exponential,
}

impl Manufactured {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "quartic" => Ok(Manufactured::Quartic),
            "exponential" => Ok(Manufactured::Exponential),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Manufactured::Quartic => "quartic",
            Manufactured::Exponential => "exponential",
        }
    }

    pub fn u(&self, x: Point) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        match self {
            Manufactured::Quartic => r2 * r2,
            Manufactured::Exponential => (0.5 * r2).exp(),
        }
    }

    pub fn grad(&self, x: Point) -> [f64; 2] {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let s = match self {
            Manufactured::Quartic => 4.0 * r2,
            Manufactured::Exponential => (0.5 * r2).exp(),
        };
        [s * x[0], s * x[1]]
    }

    pub fn hessian(&self, x: Point) -> Sym2 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let outer = Sym2::new(x[0] * x[0], x[0] * x[1], x[1] * x[1]);
        match self {
            // 4 r^2 I + 8 x x^T
            Manufactured::Quartic => Sym2::scaled_identity(4.0 * r2) + 8.0 * outer,
            // e^{r^2/2} (I + x x^T)
            Manufactured::Exponential => (0.5 * r2).exp() * (Sym2::IDENTITY + outer),
        }
    }

    /// Closed-form curvature of the graph.
    pub fn curvature(&self, x: Point) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        match self {
            Manufactured::Quartic => {
                let d = 1.0 + 16.0 * r2 * r2 * r2;
                48.0 * r2 * r2 / (d * d)
            }
            Manufactured::Exponential => {
                let e = r2.exp();
                let d = 1.0 + e * r2;
                e * (1.0 + r2) / (d * d)
            }
        }
    }

    pub fn exact(&self) -> ExactSolution {
        let m = *self;
        ExactSolution {
            u: Arc::new(move |x| m.u(x)),
            grad: Arc::new(move |x| m.grad(x)),
            hessian: Arc::new(move |x| m.hessian(x)),
        }
    }

    pub fn problem(&self) -> GaussCurvatureProblem {
        let m = *self;
        GaussCurvatureProblem::new(Arc::new(move |x| m.curvature(x)), Arc::new(move |x| m.u(x)))
            .with_exact(self.exact())
    }
}

/// The curvature problem whose exact solution is the named function.
pub fn manufactured_problem(name: &str) -> Result<GaussCurvatureProblem> {
    Ok(Manufactured::from_name(name)?.problem())
}

fn integrate_cells(u: &FeFunction, mut density: impl FnMut(usize, [f64; 2], Point) -> f64) -> f64 {
    let rule = TriangleRule::default();
    let dm = u.dofmap();
    let mut total = 0.0;
    for cell in 0..dm.num_cells() {
        let geo = dm.geometry(cell);
        let jac = geo.det.abs();
        for (&p, &w) in rule.points.iter().zip(&rule.weights) {
            total += w * jac * density(cell, p, geo.map(p));
        }
    }
    total
}

/// `||u - U||_{L2}`.
pub fn error_l2(u: &FeFunction, exact: impl Fn(Point) -> f64) -> f64 {
    integrate_cells(u, |c, p, x| (exact(x) - u.evaluate(c, p)).powi(2)).sqrt()
}

/// `|u - U|_{H1}`.
pub fn error_h1_semi(u: &FeFunction, grad_exact: impl Fn(Point) -> [f64; 2]) -> f64 {
    integrate_cells(u, |c, p, x| {
        let g = u.evaluate_gradient(c, p);
        let e = grad_exact(x);
        (e[0] - g[0]).powi(2) + (e[1] - g[1]).powi(2)
    })
    .sqrt()
}

/// `||D^2 u - H||_{L2}` in the Frobenius norm (off-diagonal counted twice).
pub fn error_hessian(h: &HessianField, hess_exact: impl Fn(Point) -> Sym2) -> f64 {
    integrate_cells(&h.h11, |c, p, x| (hess_exact(x) - h.at(c, p)).frobenius_norm_sq()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRecord {
    pub level: usize,
    pub h: f64,
    pub ndof: usize,
    pub err_l2: f64,
    pub err_h1: f64,
    pub err_h2: f64,
    pub newton_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub l2: f64,
    pub h1: f64,
    pub h2: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTable {
    pub records: Vec<ErrorRecord>,
}

/// Experimental order between two consecutive levels. An exact hit on the
/// finer level gives `+inf`.
pub fn eoc_pair(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    if e_fine == 0.0 {
        return f64::INFINITY;
    }
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

impl ConvergenceTable {
    /// Pairwise rates; `rates()[k]` compares records `k` and `k + 1`.
    pub fn rates(&self) -> Vec<Rates> {
        self.records
            .windows(2)
            .map(|w| {
                let (a, b) = (&w[0], &w[1]);
                Rates {
                    l2: eoc_pair(a.err_l2, b.err_l2, a.h, b.h),
                    h1: eoc_pair(a.err_h1, b.err_h1, a.h, b.h),
                    h2: eoc_pair(a.err_h2, b.err_h2, a.h, b.h),
                }
            })
            .collect()
    }
}

pub fn eoc(table: &ConvergenceTable) -> Result<Vec<Rates>> {
    if table.records.len() < 2 {
        return Err(Error::InvalidParameter("need at least two records for rates".into()));
    }
    Ok(table.rates())
}

/// A study that stopped early, with the levels completed so far.
#[derive(Debug)]
pub struct StudyFailure {
    pub table: ConvergenceTable,
    pub level: usize,
    pub error: Error,
}

impl std::fmt::Display for StudyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "convergence study failed at level {}: {}", self.level, self.error)
    }
}

impl std::error::Error for StudyFailure {}

/// Per-level solution kept for output.
#[derive(Debug, Clone)]
pub struct LevelSolution {
    pub mesh: Arc<Mesh>,
    pub u: FeFunction,
    pub h: HessianField,
}

/// Solves on `base` and `levels - 1` uniform refinements of it.
/// `on_level` sees every converged level as it completes.
pub fn run_convergence_study(
    problem: &GaussCurvatureProblem,
    base: &Mesh,
    levels: usize,
    cfg: &NewtonConfig,
    mut on_level: impl FnMut(&ErrorRecord, &LevelSolution),
) -> std::result::Result<ConvergenceTable, StudyFailure> {
    let mut table = ConvergenceTable::default();
    let fail = |table: ConvergenceTable, level, error| StudyFailure { table, level, error };
    if levels < 2 {
        return Err(fail(table, 0, Error::InvalidParameter("a convergence study needs at least 2 levels".into())));
    }
    let Some(exact) = problem.exact().cloned() else {
        return Err(fail(table, 0, Error::InvalidParameter("problem has no exact solution".into())));
    };
    let mut mesh = base.clone();
    for level in 0..levels {
        if level > 0 {
            mesh = refine_uniform(&mesh);
        }
        let mesh_arc = Arc::new(mesh.clone());
        let spaces = match NvSpaces::new(mesh_arc.clone()) {
            Ok(s) => s,
            Err(e) => return Err(fail(table, level, e)),
        };
        let sol = match newton_solve_with(problem, &spaces, cfg) {
            Ok(s) => s,
            Err(e) => return Err(fail(table, level, e)),
        };
        let record = ErrorRecord {
            level,
            h: mesh_size(&mesh),
            ndof: spaces.v.num_dofs(),
            err_l2: error_l2(&sol.u, |x| (exact.u)(x)),
            err_h1: error_h1_semi(&sol.u, |x| (exact.grad)(x)),
            err_h2: error_hessian(&sol.h, |x| (exact.hessian)(x)),
            newton_iters: sol.trace.len(),
        };
        on_level(&record, &LevelSolution { mesh: mesh_arc, u: sol.u, h: sol.h });
        table.records.push(record);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_mass_matrix, build_dofmap, interpolate, SpaceKind};
    use crate::hessian::fe_hessian;
    use crate::mesh::generate_square_mesh;
    use crate::newton::residual_density;

    #[test]
    fn curvature_examples() {
        let q = Manufactured::Quartic;
        assert!((q.curvature([0.5, 0.5]) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(Manufactured::Exponential.curvature([0.0, 0.0]), 1.0);
        assert!(matches!(manufactured_problem("cubic"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn manufactured_fields_solve_the_equation() {
        for m in [Manufactured::Quartic, Manufactured::Exponential] {
            for x in [[0.1, -0.3], [0.45, 0.2], [-0.5, 0.5], [0.0, 0.33]] {
                let r = residual_density(m.hessian(x), m.grad(x), m.curvature(x));
                assert!(r.abs() < 1e-12, "{m:?} at {x:?}: {r}");
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let h = 1e-4;
        for m in [Manufactured::Quartic, Manufactured::Exponential] {
            let x = [0.31, -0.17];
            let g = m.grad(x);
            let dx = (m.u([x[0] + h, x[1]]) - m.u([x[0] - h, x[1]])) / (2.0 * h);
            let dy = (m.u([x[0], x[1] + h]) - m.u([x[0], x[1] - h])) / (2.0 * h);
            assert!((g[0] - dx).abs() < 1e-7 && (g[1] - dy).abs() < 1e-7);
            let hx = m.grad([x[0] + h, x[1]]);
            let hxm = m.grad([x[0] - h, x[1]]);
            let hy = m.grad([x[0], x[1] + h]);
            let hym = m.grad([x[0], x[1] - h]);
            let hs = m.hessian(x);
            assert!((hs.xx - (hx[0] - hxm[0]) / (2.0 * h)).abs() < 1e-7);
            assert!((hs.xy - (hx[1] - hxm[1]) / (2.0 * h)).abs() < 1e-7);
            assert!((hs.xy - (hy[0] - hym[0]) / (2.0 * h)).abs() < 1e-7);
            assert!((hs.yy - (hy[1] - hym[1]) / (2.0 * h)).abs() < 1e-7);
        }
    }

    #[test]
    fn errors_vanish_for_interpolated_quadratics() {
        let mesh = Arc::new(generate_square_mesh(-0.5, 0.5, 3, 0.2, 4).unwrap());
        let dm = Arc::new(build_dofmap(mesh, SpaceKind::Dirichlet));
        let f = |x: Point| 1.0 + x[0] - 2.0 * x[1] + 0.5 * x[0] * x[0] + x[0] * x[1] - 3.0 * x[1] * x[1];
        let u = interpolate(f, &dm);
        let h = fe_hessian(&u).unwrap();
        assert!(error_l2(&u, f) <= 1e-10);
        assert!(error_h1_semi(&u, |x| [1.0 + x[0] + x[1], -2.0 + x[0] - 6.0 * x[1]]) <= 1e-10);
        assert!(error_hessian(&h, |_| Sym2::new(1.0, 1.0, -6.0)) <= 1e-10);
    }

    #[test]
    fn l2_error_of_random_function_is_mass_form() {
        let mesh = Arc::new(generate_square_mesh(-0.5, 0.5, 2, 0.1, 4).unwrap());
        let dm = Arc::new(build_dofmap(mesh, SpaceKind::Free));
        let c: Vec<f64> = (0..dm.num_dofs()).map(|i| ((i * 7919) % 17) as f64 / 17.0 - 0.5).collect();
        let u = FeFunction::new(dm.clone(), c.clone()).unwrap();
        let m = assemble_mass_matrix(&dm);
        let mc = m.mul_vec(&c).unwrap();
        let quad: f64 = c.iter().zip(&mc).map(|(a, b)| a * b).sum();
        assert!((error_l2(&u, |_| 0.0) - quad.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn eoc_arithmetic() {
        assert!((eoc_pair(1.0, 0.125, 1.0, 0.5) - 3.0).abs() < 1e-14);
        assert!((eoc_pair(1.0, 0.25, 1.0, 0.5) - 2.0).abs() < 1e-14);
        assert!((eoc_pair(1.0, 2f64.powf(-1.5), 1.0, 0.5) - 1.5).abs() < 1e-14);
        assert_eq!(eoc_pair(1.0, 0.0, 1.0, 0.5), f64::INFINITY);
        assert!(eoc(&ConvergenceTable::default()).is_err());
    }
}
