use std::sync::Arc;

use nvfem_core::analysis::{eoc_pair, error_l2};
use nvfem_core::fem::relative_residual;
use nvfem_core::nvfem::{assemble_block_system, Coefficient, NvSpaces};
use nvfem_core::{
    fe_hessian, generate_square_mesh, mesh_size, refine_uniform, solve_nonvariational, LinearNvProblem, Mesh, Sym2,
};

fn test_meshes() -> Vec<Mesh> {
    let mut out = vec![];
    for (n, perturb, seed) in [(1, 0.0, 0), (2, 0.0, 0), (3, 0.2, 7), (5, 0.25, 11)] {
        out.push(generate_square_mesh(-0.5, 0.5, n, perturb, seed).unwrap());
    }
    out.push(refine_uniform(&out[2]));
    out
}

fn quadratic(x: [f64; 2]) -> f64 {
    1.0 + 0.5 * x[0] - x[1] + x[0] * x[0] + 0.75 * x[0] * x[1] + 2.0 * x[1] * x[1]
}

const QUADRATIC_HESSIAN: Sym2 = Sym2 { xx: 2.0, xy: 0.75, yy: 4.0 };

#[test]
fn constant_coefficients_reproduce_quadratics() {
    for a in [Sym2::IDENTITY, Sym2::new(2.0, 1.0, 2.0)] {
        let f = a.frobenius(&QUADRATIC_HESSIAN);
        for mesh in test_meshes() {
            let spaces = NvSpaces::new(Arc::new(mesh)).unwrap();
            let p = LinearNvProblem::new(Coefficient::Constant(a), Coefficient::Constant(f), Arc::new(quadratic));
            let (u, h) = solve_nonvariational(&p, &spaces).unwrap();
            let err =
                u.coeffs().iter().zip(spaces.v.coords()).fold(0.0f64, |m, (c, x)| m.max((c - quadratic(*x)).abs()));
            assert!(err <= 1e-9, "A = {a:?}: nodal error {err}");
            for cell in 0..spaces.w.num_cells() {
                let hv = h.at(cell, [0.2, 0.3]);
                assert!((hv - QUADRATIC_HESSIAN).frobenius_norm_sq().sqrt() <= 1e-9);
            }
        }
    }
}

#[test]
fn block_solution_matches_post_hoc_hessian_and_residual() {
    let a = Coefficient::function(|x: [f64; 2]| Sym2::new(2.0 + x[0], 0.3 * x[1], 1.5 - x[1]));
    let b = Coefficient::function(|x: [f64; 2]| [x[1], -0.5]);
    let f = Coefficient::function(|x: [f64; 2]| (3.0 * x[0]).cos() + x[1]);
    let p = LinearNvProblem::new(a, f, Arc::new(|x: [f64; 2]| x[0] * x[1])).with_advection(b);
    let spaces = NvSpaces::new(Arc::new(generate_square_mesh(-0.5, 0.5, 4, 0.2, 5).unwrap())).unwrap();
    let sys = assemble_block_system(&p, &spaces).unwrap();
    assert_eq!(sys.dim(), spaces.num_interior() + 3 * spaces.w.num_dofs());
    let (u, h) = solve_nonvariational(&p, &spaces).unwrap();
    let post = fe_hessian(&u).unwrap();
    let w_post = post.dofmap().clone();
    assert_eq!(w_post.num_dofs(), h.dofmap().num_dofs());
    for (x, y) in h.components().iter().zip(post.components()) {
        let d = x.coeffs().iter().zip(y.coeffs()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(d <= 1e-9, "component difference {d}");
    }
    let x = sys.pack(&spaces, &u, &h);
    assert!(relative_residual(&sys.matrix, &x, &sys.rhs) <= 1e-10);
}

#[test]
fn poisson_converges_at_third_order_in_l2() {
    use std::f64::consts::PI;
    let exact = |x: [f64; 2]| (PI * x[0]).sin() * (PI * x[1]).cos();
    let lap = move |x: [f64; 2]| -2.0 * PI * PI * exact(x);
    let mut mesh = generate_square_mesh(-0.5, 0.5, 4, 0.2, 2).unwrap();
    let mut prev: Option<(f64, f64)> = None;
    let mut rates = vec![];
    for _ in 0..4 {
        let spaces = NvSpaces::new(Arc::new(mesh.clone())).unwrap();
        let p =
            LinearNvProblem::new(Coefficient::Constant(Sym2::IDENTITY), Coefficient::function(lap), Arc::new(exact));
        let (u, _) = solve_nonvariational(&p, &spaces).unwrap();
        let e = error_l2(&u, exact);
        let h = mesh_size(&mesh);
        if let Some((e0, h0)) = prev {
            rates.push(eoc_pair(e0, e, h0, h));
        }
        prev = Some((e, h));
        mesh = refine_uniform(&mesh);
    }
    let last = *rates.last().unwrap();
    assert!((2.6..=3.4).contains(&last), "rates {rates:?}");
}
