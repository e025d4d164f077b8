use std::sync::Arc;

use nvfem_core::fem::{
    assemble_generic, assemble_mass_matrix, build_dofmap, interpolate, solve_sparse, DofMap, EdgeRule, FeFunction,
    SpaceKind, TriangleRule,
};
use nvfem_core::hessian::assemble_hessian_block;
use nvfem_core::mesh::{load_mesh, save_mesh};
use nvfem_core::newton::{linearized_density, residual_density};
use nvfem_core::{fe_hessian, generate_square_mesh, refine_uniform, Sym2};
use proptest::prelude::*;

fn space(n: usize, perturb: f64, seed: u64) -> Arc<DofMap> {
    let mesh = generate_square_mesh(-0.5, 0.5, n, perturb, seed).unwrap();
    Arc::new(build_dofmap(Arc::new(mesh), SpaceKind::Free))
}

fn point_in_triangle(p: [f64; 2], t: [[f64; 2]; 3]) -> bool {
    let cross = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let eps = 1e-12;
    cross(t[0], t[1], p) >= -eps && cross(t[1], t[2], p) >= -eps && cross(t[2], t[0], p) >= -eps
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generation_is_deterministic(n in 1usize..7, perturb in 0.0f64..0.29, seed in any::<u64>()) {
        let a = generate_square_mesh(-1.0, 2.0, n, perturb, seed).unwrap();
        let b = generate_square_mesh(-1.0, 2.0, n, perturb, seed).unwrap();
        prop_assert_eq!(save_mesh(&a), save_mesh(&b));
        prop_assert!((a.total_area() - 9.0).abs() < 1e-12);
        prop_assert_eq!(a.num_cells(), 4 * n * n);
    }

    #[test]
    fn save_load_round_trip(n in 1usize..6, perturb in 0.0f64..0.29, seed in any::<u64>()) {
        let m = generate_square_mesh(0.0, 1.0, n, perturb, seed).unwrap();
        let back = load_mesh(&save_mesh(&m)).unwrap();
        prop_assert_eq!(back.vertices(), m.vertices());
        prop_assert_eq!(back.cells(), m.cells());
    }

    #[test]
    fn refined_cells_nest_in_parents(n in 1usize..5, perturb in 0.0f64..0.29, seed in any::<u64>()) {
        let m = generate_square_mesh(0.0, 1.0, n, perturb, seed).unwrap();
        let r = refine_uniform(&m);
        prop_assert_eq!(r.num_cells(), 4 * m.num_cells());
        prop_assert!((r.total_area() - m.total_area()).abs() < 1e-12);
        for c in 0..r.num_cells() {
            let parent = m.cell_points(c / 4);
            for p in r.cell_points(c) {
                prop_assert!(point_in_triangle(p, parent));
            }
        }
    }

    #[test]
    fn interpolation_reproduces_quadratics(c in prop::array::uniform6(-3.0f64..3.0), seed in any::<u64>()) {
        let dm = space(3, 0.2, seed);
        let q = move |x: [f64; 2]| c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[0] * x[0] + c[4] * x[0] * x[1] + c[5] * x[1] * x[1];
        let u = interpolate(q, &dm);
        for cell in 0..dm.num_cells() {
            for r in [[0.1, 0.2], [1.0 / 3.0, 1.0 / 3.0], [0.7, 0.05]] {
                let x = dm.geometry(cell).map(r);
                prop_assert!((u.evaluate(cell, r) - q(x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_kernels_give_symmetric_matrices(a in 0.1f64..3.0, b in -1.0f64..1.0, seed in any::<u64>()) {
        let dm = space(2, 0.25, seed);
        let m = assemble_generic(&dm, &dm, &TriangleRule::default(), |pt, s, t| {
            let w = 1.0 + pt.x[0] * pt.x[0];
            a * w * (s.grad[0] * t.grad[0] + s.grad[1] * t.grad[1]) + b * s.value * t.value
        }).unwrap();
        prop_assert!(m.asymmetry() <= 1e-13 * m.max_abs());
    }

    #[test]
    fn fe_hessian_is_linear(alpha in -2.0f64..2.0, beta in -2.0f64..2.0, seed in any::<u64>()) {
        use rand::{RngExt, SeedableRng};
        let dm = space(3, 0.2, seed);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut random = || FeFunction::new(dm.clone(), (0..dm.num_dofs()).map(|_| rng.random::<f64>() - 0.5).collect()).unwrap();
        let (u, v) = (random(), random());
        let lhs = fe_hessian(&u.axpby(alpha, &v, beta)).unwrap();
        let rhs = fe_hessian(&u).unwrap().axpby(alpha, &fe_hessian(&v).unwrap(), beta);
        prop_assert!(lhs.max_coeff_diff(&rhs) <= 1e-10);
    }

    #[test]
    fn off_diagonal_slots_agree(seed in any::<u64>()) {
        use rand::{RngExt, SeedableRng};
        let dm = space(3, 0.25, seed);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let u: Vec<f64> = (0..dm.num_dofs()).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let mass = assemble_mass_matrix(&dm);
        let b12 = assemble_hessian_block(&dm, &dm, 0, 1).unwrap();
        let b21 = assemble_hessian_block(&dm, &dm, 1, 0).unwrap();
        let h12 = solve_sparse(&mass, &b12.mul_vec(&u).unwrap()).unwrap();
        let h21 = solve_sparse(&mass, &b21.mul_vec(&u).unwrap()).unwrap();
        let diff = h12.iter().zip(&h21).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(diff <= 1e-10, "slot difference {}", diff);
    }

    #[test]
    fn cofactor_pairing_is_twice_the_determinant(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0) {
        let m = Sym2::new(a, b, c);
        let lhs = m.cofactor().frobenius(&m);
        prop_assert!((lhs - 2.0 * m.det()).abs() <= 1e-13 * (1.0 + m.frobenius_norm_sq()));
    }

    #[test]
    fn residual_is_linear_in_the_hessian_cofactor_direction(
        h in prop::array::uniform3(-2.0f64..2.0),
        dh in prop::array::uniform3(-1.0f64..1.0),
        p in prop::array::uniform2(-1.0f64..1.0),
        k in 0.01f64..3.0,
    ) {
        // F is quadratic in H, so the central difference in H alone is exact up to rounding.
        let (h, dh) = (Sym2::new(h[0], h[1], h[2]), Sym2::new(dh[0], dh[1], dh[2]));
        let eps = 1e-3;
        let fd = (residual_density(h + eps * dh, p, k) - residual_density(h - eps * dh, p, k)) / (2.0 * eps);
        let exact = linearized_density(h, p, k, dh, [0.0, 0.0]);
        prop_assert!((fd - exact).abs() < 1e-9);
    }
}

#[test]
fn quadrature_exactness_on_monomials() {
    let tri = TriangleRule::default();
    assert!(tri.degree >= 8);
    for i in 0..=tri.degree {
        for j in 0..=(tri.degree - i) {
            let approx: f64 =
                tri.points.iter().zip(&tri.weights).map(|(p, w)| w * p[0].powi(i as i32) * p[1].powi(j as i32)).sum();
            // ∫_T x^i y^j = i! j! / (i + j + 2)!
            let fact = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
            let exact = fact(i) * fact(j) / fact(i + j + 2);
            assert!((approx - exact).abs() <= 1e-13 * exact, "x^{i} y^{j}");
        }
    }
    let edge = EdgeRule::default();
    assert!(edge.degree >= 9);
    for i in 0..=edge.degree {
        let approx: f64 = edge.points.iter().zip(&edge.weights).map(|(p, w)| w * p.powi(i as i32)).sum();
        let exact = 1.0 / (i as f64 + 1.0);
        assert!((approx - exact).abs() <= 1e-13 * exact);
    }
}
