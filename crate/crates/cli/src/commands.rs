use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use nvfem_core::analysis::{
    error_h1_semi, error_hessian, error_l2, run_convergence_study, ConvergenceTable, ErrorRecord, Manufactured,
};
use nvfem_core::mesh::save_mesh;
use nvfem_core::newton::newton_solve_with;
use nvfem_core::nvfem::{Coefficient, NvSpaces};
use nvfem_core::{
    generate_square_mesh, mesh_size, refine_uniform, solve_nonvariational, Error, GaussCurvatureProblem,
    LinearNvProblem, Mesh, Sym2,
};

use crate::config::RunConfig;
use crate::output::{convergence_csv, field_text, linear_csv, sweep_csv, SweepRow};
use crate::{CliError, Outcome, Report};

fn write(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })
}

fn prepare_out(cfg: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out).map_err(|source| CliError::Io { path: cfg.out.clone(), source })
}

pub fn base_mesh(cfg: &RunConfig) -> Result<Mesh, CliError> {
    Ok(generate_square_mesh(-cfg.half_width, cfg.half_width, cfg.n, cfg.perturb, cfg.seed)?)
}

fn mesh_hierarchy(cfg: &RunConfig) -> Result<Vec<Mesh>, CliError> {
    let mut meshes = vec![base_mesh(cfg)?];
    for _ in 1..cfg.levels {
        meshes.push(refine_uniform(meshes.last().unwrap()));
    }
    Ok(meshes)
}

/// Solver failures complete the run with a non-convergence status; anything else is fatal.
fn is_solver_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NonConvergence { .. }
            | Error::EllipticityFailure { .. }
            | Error::InitializationFailure(_)
            | Error::SingularMatrix(_)
    )
}

pub fn cmd_converge(cfg: &RunConfig) -> Result<Report, CliError> {
    let problem = Manufactured::from_name(&cfg.problem)?.problem();
    prepare_out(cfg)?;
    let base = base_mesh(cfg)?;
    let mut io_error = None;
    let mut warnings = vec![];
    let result = run_convergence_study(&problem, &base, cfg.levels, &cfg.newton(), |rec, sol| {
        let l = rec.level;
        let mut files = vec![
            (format!("mesh_{l}.txt"), save_mesh(&sol.mesh)),
            (format!("field_u_{l}.dat"), field_text(&sol.u, &format!("u_{l}"))),
        ];
        for (name, c) in ["h11", "h12", "h22"].iter().zip(sol.h.components()) {
            files.push((format!("field_{name}_{l}.dat"), field_text(c, &format!("{name}_{l}"))));
        }
        for (name, text) in files {
            if let Err(e) = write(&cfg.out, &name, &text) {
                io_error.get_or_insert(e);
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e);
    }
    let (table, outcome) = match result {
        Ok(table) => (table, Outcome::Converged),
        Err(failure) if is_solver_failure(&failure.error) => {
            warnings.push(failure.to_string());
            (failure.table, Outcome::NotConverged)
        }
        Err(failure) => return Err(failure.error.into()),
    };
    let csv = convergence_csv(&table);
    write(&cfg.out, "convergence.csv", &csv)?;
    Ok(Report { outcome, text: csv, warnings })
}

pub fn sweep_rows(
    cfg: &RunConfig,
    mut on_solution: impl FnMut(f64, &nvfem_core::FeFunction),
) -> Result<Vec<SweepRow>, CliError> {
    let meshes = mesh_hierarchy(cfg)?;
    let spaces = NvSpaces::new(Arc::new(meshes.last().unwrap().clone()))?;
    let newton = cfg.newton();
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut rows = Vec::with_capacity(cfg.k.len());
    for chunk in cfg.k.chunks(threads) {
        let results: Vec<_> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&k| {
                    let spaces = &spaces;
                    s.spawn(move || {
                        let problem = GaussCurvatureProblem::constant(k, Arc::new(|_| 0.0))?;
                        newton_solve_with(&problem, spaces, &newton)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
        });
        for (&k, result) in chunk.iter().zip(results) {
            rows.push(match result {
                Ok(sol) => {
                    on_solution(k, &sol.u);
                    SweepRow {
                        k,
                        converged: true,
                        iterations: sol.trace.len(),
                        min_u: Some(sol.u.min_coeff()),
                        min_eig_h: sol.trace.last().map(|s| s.min_eigenvalue),
                        failure: None,
                    }
                }
                Err(e) if is_solver_failure(&e) => {
                    let trace = e.trace();
                    SweepRow {
                        k,
                        converged: false,
                        iterations: trace.map_or(0, |t| t.len()),
                        min_u: None,
                        min_eig_h: trace.and_then(|t| t.last()).map(|s| s.min_eigenvalue),
                        failure: Some(e.to_string()),
                    }
                }
                Err(e) => return Err(e.into()),
            });
        }
    }
    Ok(rows)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    prepare_out(cfg)?;
    let mut fields = vec![];
    let rows = sweep_rows(cfg, |k, u| fields.push((format!("field_u_K{k}.dat"), field_text(u, &format!("u_K{k}")))))?;
    for (name, text) in fields {
        write(&cfg.out, &name, &text)?;
    }
    let csv = sweep_csv(&rows);
    write(&cfg.out, "sweep.csv", &csv)?;
    let warnings: Vec<String> =
        rows.iter().filter_map(|r| r.failure.as_ref().map(|f| format!("K = {}: {f}", r.k))).collect();
    let outcome = if warnings.is_empty() { Outcome::Converged } else { Outcome::NotConverged };
    Ok(Report { outcome, text: csv, warnings })
}

/// A built-in linear test case with its exact solution.
pub struct LinearCase {
    pub problem: LinearNvProblem,
    pub u: fn([f64; 2]) -> f64,
    pub grad: fn([f64; 2]) -> [f64; 2],
    pub hessian: fn([f64; 2]) -> Sym2,
}

fn wave(x: [f64; 2]) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).cos()
}

fn wave_grad(x: [f64; 2]) -> [f64; 2] {
    [PI * (PI * x[0]).cos() * (PI * x[1]).cos(), -PI * (PI * x[0]).sin() * (PI * x[1]).sin()]
}

fn wave_hessian(x: [f64; 2]) -> Sym2 {
    let (s, c) = ((PI * x[0]).sin(), (PI * x[1]).cos());
    let mixed = -PI * PI * (PI * x[0]).cos() * (PI * x[1]).sin();
    Sym2::new(-PI * PI * s * c, mixed, -PI * PI * s * c)
}

fn quad(x: [f64; 2]) -> f64 {
    1.0 + 0.5 * x[0] - x[1] + x[0] * x[0] + 0.75 * x[0] * x[1] + 2.0 * x[1] * x[1]
}

fn quad_grad(x: [f64; 2]) -> [f64; 2] {
    [0.5 + 2.0 * x[0] + 0.75 * x[1], -1.0 + 0.75 * x[0] + 4.0 * x[1]]
}

fn quad_hessian(_: [f64; 2]) -> Sym2 {
    Sym2::new(2.0, 0.75, 4.0)
}

fn mixed_u(x: [f64; 2]) -> f64 {
    wave(x) + x[0] * x[1] * x[1]
}

fn mixed_grad(x: [f64; 2]) -> [f64; 2] {
    let g = wave_grad(x);
    [g[0] + x[1] * x[1], g[1] + 2.0 * x[0] * x[1]]
}

fn mixed_hessian(x: [f64; 2]) -> Sym2 {
    wave_hessian(x) + Sym2::new(0.0, 2.0 * x[1], 2.0 * x[0])
}

fn variable_a(x: [f64; 2]) -> Sym2 {
    Sym2::new(1.0 + x[0] * x[0], 0.25 * x[0] * x[1], 1.0 + x[1] * x[1])
}

pub fn linear_case(name: &str) -> Result<LinearCase, CliError> {
    let case = match name {
        "identity" => LinearCase {
            problem: LinearNvProblem::new(
                Coefficient::Constant(Sym2::IDENTITY),
                Coefficient::function(|x| wave_hessian(x).trace()),
                Arc::new(wave),
            ),
            u: wave,
            grad: wave_grad,
            hessian: wave_hessian,
        },
        "spd" => {
            let a = Sym2::new(2.0, 1.0, 2.0);
            LinearCase {
                problem: LinearNvProblem::new(
                    Coefficient::Constant(a),
                    Coefficient::Constant(a.frobenius(&quad_hessian([0.0, 0.0]))),
                    Arc::new(quad),
                ),
                u: quad,
                grad: quad_grad,
                hessian: quad_hessian,
            }
        }
        "manufactured" => LinearCase {
            problem: LinearNvProblem::new(
                Coefficient::function(variable_a),
                Coefficient::function(|x| variable_a(x).frobenius(&mixed_hessian(x))),
                Arc::new(mixed_u),
            ),
            u: mixed_u,
            grad: mixed_grad,
            hessian: mixed_hessian,
        },
        other => return Err(CliError::Config(format!("unknown linear case '{other}'"))),
    };
    Ok(case)
}

pub fn linear_table(
    cfg: &RunConfig,
    mut on_level: impl FnMut(usize, &nvfem_core::FeFunction),
) -> Result<ConvergenceTable, CliError> {
    let case = linear_case(&cfg.case)?;
    let mut table = ConvergenceTable::default();
    for (level, mesh) in mesh_hierarchy(cfg)?.into_iter().enumerate() {
        let h = mesh_size(&mesh);
        let spaces = NvSpaces::new(Arc::new(mesh))?;
        let (u, hess) = solve_nonvariational(&case.problem, &spaces)?;
        table.records.push(ErrorRecord {
            level,
            h,
            ndof: spaces.v.num_dofs(),
            err_l2: error_l2(&u, case.u),
            err_h1: error_h1_semi(&u, case.grad),
            err_h2: error_hessian(&hess, case.hessian),
            newton_iters: 0,
        });
        on_level(level, &u);
    }
    Ok(table)
}

pub fn cmd_solve_linear(cfg: &RunConfig) -> Result<Report, CliError> {
    prepare_out(cfg)?;
    let mut finest = None;
    let table = linear_table(cfg, |_, u| finest = Some(field_text(u, &format!("u_{}", cfg.case))))?;
    if let Some(text) = finest {
        write(&cfg.out, &format!("field_u_{}.dat", cfg.case), &text)?;
    }
    let csv = linear_csv(&table);
    write(&cfg.out, "linear.csv", &csv)?;
    Ok(Report { outcome: Outcome::Converged, text: csv, warnings: vec![] })
}

pub fn cmd_mesh_info(cfg: &RunConfig) -> Result<Report, CliError> {
    prepare_out(cfg)?;
    let mut text = String::from("level,vertices,cells,boundary_edges,h,max_shape_ratio\n");
    for (level, mesh) in mesh_hierarchy(cfg)?.iter().enumerate() {
        write(&cfg.out, &format!("mesh_{level}.txt"), &save_mesh(mesh))?;
        text.push_str(&format!(
            "{level},{},{},{},{:.6e},{:.6e}\n",
            mesh.num_vertices(),
            mesh.num_cells(),
            mesh.boundary_edges().len(),
            mesh_size(mesh),
            mesh.max_shape_ratio()
        ));
    }
    Ok(Report { outcome: Outcome::Converged, text, warnings: vec![] })
}
