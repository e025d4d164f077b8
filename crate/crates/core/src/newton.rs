//! Prescribed Gauss curvature: `det D^2 u = K (1 + |grad u|^2)^2` with
//! `u = g` on the boundary, solved by Newton's method on the nonvariational
//! discretization.
//!
//! Each step freezes `(U, H[U])` and solves the linear problem
//!
//! ```text
//! cof H : H_new - 4 K (1 + |∇U|^2) ∇U · ∇U_new
//!     = cof H : H - 4 K (1 + |∇U|^2) |∇U|^2 - F(H, ∇U)
//! ```
//!
//! where `F(H, p) = det H - K (1 + |p|^2)^2`; the left side is the Gateaux
//! derivative of `F` paired with the new iterate.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::fem::{assemble_vector, interpolate, max_coeff_diff, sample_function, FeFunction, QpTable, TriangleRule};
use crate::hessian::{check_fe_convexity, ConvexityReport, HessianField, HessianOperator};
use crate::mesh::{Mesh, Point};
use crate::nvfem::{solve_nonvariational, Coefficient, LinearNvProblem, NvSpaces, ScalarFn};
use crate::sym2::{dot, norm_sq, Sym2};

pub type VectorFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(Point) -> Sym2 + Send + Sync>;

/// An exact solution with analytic derivatives, for error studies.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarFn,
    pub grad: VectorFn,
    pub hessian: MatrixFn,
}

#[derive(Clone)]
pub struct GaussCurvatureProblem {
    k: ScalarFn,
    constant_k: Option<f64>,
    g: ScalarFn,
    exact: Option<ExactSolution>,
}

impl std::fmt::Debug for GaussCurvatureProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaussCurvatureProblem")
            .field("constant_k", &self.constant_k)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl GaussCurvatureProblem {
    /// Constant curvature `k > 0` with boundary data `g`.
    pub fn constant(k: f64, g: ScalarFn) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidParameter(format!("curvature must be positive (got {k})")));
        }
        Ok(GaussCurvatureProblem { k: Arc::new(move |_| k), constant_k: Some(k), g, exact: None })
    }

    /// Variable curvature. Positivity is checked at the quadrature points of
    /// the mesh when a solve starts.
    pub fn new(k: ScalarFn, g: ScalarFn) -> Self {
        GaussCurvatureProblem { k, constant_k: None, g, exact: None }
    }

    pub fn with_exact(mut self, exact: ExactSolution) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn curvature(&self, x: Point) -> f64 {
        (self.k)(x)
    }

    pub fn constant_curvature(&self) -> Option<f64> {
        self.constant_k
    }

    pub fn boundary_data(&self) -> &ScalarFn {
        &self.g
    }

    pub fn exact(&self) -> Option<&ExactSolution> {
        self.exact.as_ref()
    }

    fn check_positive(&self, spaces: &NvSpaces) -> Result<QpTable<f64>> {
        let table = QpTable::from_fn(&spaces.w, &TriangleRule::default(), |pt| (self.k)(pt.x));
        if let Some(bad) = table.values().iter().find(|k| !(k.is_finite() && **k > 0.0)) {
            return Err(Error::InvalidParameter(format!("curvature must be positive, found {bad}")));
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Stop when the max coefficient change between iterates is at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// Convexity is declared when the smallest Hessian eigenvalue is `>= -convexity_tol`.
    pub convexity_tol: f64,
    /// Step length in (0, 1]; 1 is the undamped Newton step.
    pub damping: f64,
    /// Divergence is declared when an increment exceeds this multiple of the
    /// smallest increment seen so far.
    pub divergence_factor: f64,
    /// Fail instead of starting from a nonconvex initial guess.
    pub require_convex_start: bool,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-10,
            max_iter: 50,
            convexity_tol: 1e-8,
            damping: 1.0,
            divergence_factor: 1e3,
            require_convex_start: false,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive (got {})", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(self.convexity_tol >= 0.0) {
            return Err(Error::InvalidParameter("convexity tolerance must be nonnegative".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidParameter(format!("damping must lie in (0, 1] (got {})", self.damping)));
        }
        if !(self.divergence_factor > 1.0) {
            return Err(Error::InvalidParameter("divergence factor must exceed 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonStep {
    /// `max |U^n - U^{n-1}|` over DOF coefficients.
    pub increment: f64,
    /// `max_a |(F(H, ∇U), φ_a)|` over interior DOFs of V.
    pub residual: f64,
    pub min_eigenvalue: f64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonTrace {
    pub initial: Option<InitialGuessInfo>,
    pub steps: Vec<NewtonStep>,
}

impl NewtonTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> Option<&NewtonStep> {
        self.steps.last()
    }
}

#[derive(Debug, Clone)]
pub struct NewtonSolution {
    pub u: FeFunction,
    pub h: HessianField,
    pub trace: NewtonTrace,
}

pub fn cofactor_2x2(h: Sym2) -> Sym2 {
    h.cofactor()
}

/// `det H - K (1 + |p|^2)^2`.
pub fn residual_density(h: Sym2, grad: [f64; 2], k: f64) -> f64 {
    let s = 1.0 + norm_sq(grad);
    h.det() - k * s * s
}

/// Gateaux derivative of [`residual_density`] at `(h, grad)` in direction
/// `(dh, dgrad)`: `cof h : dh - 4 K (1 + |p|^2) p · dp`.
pub fn linearized_density(h: Sym2, grad: [f64; 2], k: f64, dh: Sym2, dgrad: [f64; 2]) -> f64 {
    let s = 1.0 + norm_sq(grad);
    h.cofactor().frobenius(&dh) - 4.0 * k * s * dot(grad, dgrad)
}

/// Pointwise coefficients of one Newton step about `(u_prev, h_prev)`.
pub fn newton_coefficients(
    h_prev: &HessianField,
    u_prev: &FeFunction,
    k: &QpTable<f64>,
    g: ScalarFn,
) -> LinearNvProblem {
    let rule = TriangleRule::default();
    let grads = sample_function(u_prev, &rule);
    let dm = h_prev.dofmap();
    let points = &rule.points;
    let mut a_vals = QpTable::from_fn(dm, &rule, |pt| h_prev.at(pt.cell, points[pt.qp]));
    let b_vals = QpTable::from_fn(dm, &rule, |pt| {
        let p = grads.get(pt.cell, pt.qp).1;
        let s = 1.0 + norm_sq(p);
        let c = -4.0 * k.get(pt.cell, pt.qp) * s;
        [c * p[0], c * p[1]]
    });
    let f_vals = QpTable::from_fn(dm, &rule, |pt| {
        let h = a_vals.get(pt.cell, pt.qp);
        let p = grads.get(pt.cell, pt.qp).1;
        let kk = k.get(pt.cell, pt.qp);
        let b = b_vals.get(pt.cell, pt.qp);
        h.cofactor().frobenius(&h) + dot(b, p) - residual_density(h, p, kk)
    });
    a_vals = QpTable::from_fn(dm, &rule, |pt| a_vals.get(pt.cell, pt.qp).cofactor());
    LinearNvProblem::new(Coefficient::Table(a_vals), Coefficient::Table(f_vals), g)
        .with_advection(Coefficient::Table(b_vals))
}

/// `max_a |(F(H, ∇U), φ_a)|` over interior DOFs of `spaces.v`.
pub fn weak_residual(spaces: &NvSpaces, u: &FeFunction, h: &HessianField, k: &QpTable<f64>) -> f64 {
    let rule = TriangleRule::default();
    let grads = sample_function(u, &rule);
    let points = rule.points.clone();
    let r = assemble_vector(&spaces.v, &rule, |pt, t| {
        let hv = h.at(pt.cell, points[pt.qp]);
        residual_density(hv, grads.get(pt.cell, pt.qp).1, k.get(pt.cell, pt.qp)) * t.value
    });
    spaces.v.free_dofs().iter().fold(0.0, |m, &d| m.max(r[d].abs()))
}

/// How the starting iterate was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialGuessInfo {
    pub report: ConvexityReport,
    /// The paraboloid fallback was used instead of the Poisson solve.
    pub fallback: bool,
}

/// Starting iterate: the solution of `Δu = 2 sqrt(K̄)` with the problem's
/// boundary data, where `K̄ = K (1 + |∇G|^2)^2` and `G` is the nodal
/// interpolant of `g`.
///
/// If that field fails the convexity check, the paraboloid
/// `sqrt(min K̄) |x - x_c|^2 / 2` plus the discrete harmonic extension of
/// `g - paraboloid` is tried. When neither passes, the candidate with the
/// larger minimum eigenvalue is returned, unless
/// [`NewtonConfig::require_convex_start`] is set, in which case this is an
/// initialization failure.
pub fn initial_guess(
    problem: &GaussCurvatureProblem,
    spaces: &NvSpaces,
    cfg: &NewtonConfig,
) -> Result<(FeFunction, HessianField, InitialGuessInfo)> {
    let rule = TriangleRule::default();
    let k = problem.check_positive(spaces)?;
    let g = problem.g.clone();
    let lift = interpolate(|x| g(x), &spaces.v);
    let lift_grads = sample_function(&lift, &rule);
    let kbar = QpTable::from_fn(&spaces.w, &rule, |pt| {
        let s = 1.0 + norm_sq(lift_grads.get(pt.cell, pt.qp).1);
        k.get(pt.cell, pt.qp) * s * s
    });
    let rhs = QpTable::from_fn(&spaces.w, &rule, |pt| 2.0 * kbar.get(pt.cell, pt.qp).sqrt());
    let poisson = LinearNvProblem::new(Coefficient::Constant(Sym2::IDENTITY), Coefficient::Table(rhs), g.clone());
    let (u0, h0) = solve_nonvariational(&poisson, spaces)
        .map_err(|e| Error::InitializationFailure(format!("Poisson initializer failed: {e}")))?;
    let report = check_fe_convexity(&h0, cfg.convexity_tol);
    if report.convex {
        return Ok((u0, h0, InitialGuessInfo { report, fallback: false }));
    }

    let kmin = kbar.values().iter().copied().fold(f64::INFINITY, f64::min);
    let bb = spaces.mesh().bounding_box();
    let centre = [0.5 * (bb[0] + bb[2]), 0.5 * (bb[1] + bb[3])];
    let c = kmin.sqrt();
    let bowl = move |x: Point| 0.5 * c * ((x[0] - centre[0]).powi(2) + (x[1] - centre[1]).powi(2));
    let g2 = g.clone();
    let correction = LinearNvProblem::new(
        Coefficient::Constant(Sym2::IDENTITY),
        Coefficient::Constant(0.0),
        Arc::new(move |x| g2(x) - bowl(x)),
    );
    let (harmonic, _) = solve_nonvariational(&correction, spaces)
        .map_err(|e| Error::InitializationFailure(format!("fallback initializer failed: {e}")))?;
    let u1 = interpolate(bowl, &spaces.v).axpby(1.0, &harmonic, 1.0);
    let h1 = HessianOperator::new(&spaces.w)?.apply(&u1)?;
    let report1 = check_fe_convexity(&h1, cfg.convexity_tol);
    if report1.convex {
        return Ok((u1, h1, InitialGuessInfo { report: report1, fallback: true }));
    }
    if cfg.require_convex_start {
        return Err(Error::InitializationFailure(format!(
            "no convex initial guess: Poisson min eigenvalue {:.3e} at {:?}, paraboloid {:.3e}",
            report.min_eigenvalue, report.location, report1.min_eigenvalue
        )));
    }
    if report1.min_eigenvalue > report.min_eigenvalue {
        Ok((u1, h1, InitialGuessInfo { report: report1, fallback: true }))
    } else {
        Ok((u0, h0, InitialGuessInfo { report, fallback: false }))
    }
}

pub fn newton_solve(problem: &GaussCurvatureProblem, mesh: Arc<Mesh>, cfg: &NewtonConfig) -> Result<NewtonSolution> {
    let spaces = NvSpaces::new(mesh)?;
    newton_solve_with(problem, &spaces, cfg)
}

pub fn newton_solve_with(
    problem: &GaussCurvatureProblem,
    spaces: &NvSpaces,
    cfg: &NewtonConfig,
) -> Result<NewtonSolution> {
    cfg.validate()?;
    let k = problem.check_positive(spaces)?;
    let (mut u, mut h, init) = initial_guess(problem, spaces, cfg)?;
    let mut trace = NewtonTrace { initial: Some(init), steps: vec![] };
    let hop = if cfg.damping < 1.0 { Some(HessianOperator::new(&spaces.w)?) } else { None };
    let mut min_increment = f64::INFINITY;

    for iteration in 1..=cfg.max_iter {
        let start = Instant::now();
        let step = newton_coefficients(&h, &u, &k, problem.g.clone());
        let (mut u_new, mut h_new) = match solve_nonvariational(&step, spaces) {
            Ok(sol) => sol,
            Err(Error::SingularMatrix(detail)) => {
                return Err(Error::EllipticityFailure { iteration, detail, trace: Box::new(trace) })
            }
            Err(e) => return Err(e),
        };
        if let Some(hop) = &hop {
            u_new = u.axpby(1.0 - cfg.damping, &u_new, cfg.damping);
            h_new = hop.apply(&u_new)?;
        }
        let increment = max_coeff_diff(&u_new, &u);
        let residual = weak_residual(spaces, &u_new, &h_new, &k);
        let convexity = check_fe_convexity(&h_new, cfg.convexity_tol);
        trace.steps.push(NewtonStep {
            increment,
            residual,
            min_eigenvalue: convexity.min_eigenvalue,
            elapsed: start.elapsed(),
        });

        if !increment.is_finite() || !residual.is_finite() {
            return Err(Error::NonConvergence { reason: "iterate became non-finite".into(), trace: Box::new(trace) });
        }
        if increment <= cfg.tol {
            return Ok(NewtonSolution { u: u_new, h: h_new, trace });
        }
        min_increment = min_increment.min(increment);
        if increment > cfg.divergence_factor * min_increment {
            return Err(Error::NonConvergence {
                reason: format!(
                    "increment {increment:.3e} grew past {:.0e} x its minimum {min_increment:.3e}",
                    cfg.divergence_factor
                ),
                trace: Box::new(trace),
            });
        }
        u = u_new;
        h = h_new;
    }
    Err(Error::NonConvergence {
        reason: format!("maximum of {} iterations reached", cfg.max_iter),
        trace: Box::new(trace),
    })
}
