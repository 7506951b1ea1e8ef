//! The closed-form inner integrals against brute-force adaptive quadrature of
//! the defining formulas for `g` and `h`.

use nlbh_oracle::{gaussian_breaks, integrate, integrate_2d};
use nonlocal_biharmonic::assembly::Discretization;
use nonlocal_biharmonic::kernel::KernelParams;
use nonlocal_biharmonic::mesh::TensorMesh;
use nonlocal_biharmonic::problems::{builtin_poly10, builtin_xlog, ReferenceField};
use rand::{Rng, SeedableRng};

fn random_coeffs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn breaks(mesh: &TensorMesh, center: f64, delta: f64) -> Vec<f64> {
    let mut b = mesh.nodes();
    b.extend(gaussian_breaks(center, delta, 8));
    b
}

#[test]
fn g_and_h_match_quadrature_1d() {
    let problem = builtin_poly10();
    for (n, delta) in [(4, 0.1), (5, 0.03)] {
        let mesh = TensorMesh::new(n, 1).unwrap();
        let kernel = KernelParams::new(delta, 1).unwrap();
        let disc = Discretization::new(&mesh, &kernel, &problem, 1e-3).unwrap();
        let u = random_coeffs(mesh.n_dofs(), n as u64);
        let g = disc.g_values(&u).unwrap();
        let c = kernel.c_delta();
        let uf = |s: f64| mesh.evaluate(&u, &[s]).unwrap();
        let scale = c / (delta * delta);

        for (q, (x, _)) in disc.interior_points().iter().enumerate().step_by(4) {
            let x = x[0];
            let ux = uf(x);
            let inner = integrate(
                |y| c * (-((x - y) / delta).powi(2)).exp() * (ux - uf(y)),
                0.0,
                1.0,
                &breaks(&mesh, x, delta),
                1e-14,
                1e-13,
            );
            let source: f64 = [(0.0, -1.0), (1.0, 1.0)]
                .iter()
                .map(|&(y, nrm)| 2.0 * 0.25 * c * (-((x - y) / delta).powi(2)).exp() * problem.normal_derivative(&[y], &[nrm]))
                .sum();
            let expect = inner / (delta * delta) - source;
            assert!((g[q] - expect).abs() <= 1e-10 * scale, "x = {x}: {} vs {expect}", g[q]);
        }

        let h = disc.h_values(&u).unwrap();
        for (bp, hv) in disc.boundary_points().iter().zip(&h) {
            let x = bp.x[0];
            let expect = integrate(
                |y| c * (-((x - y) / delta).powi(2)).exp() * (bp.a - uf(y)),
                0.0,
                1.0,
                &breaks(&mesh, x, delta),
                1e-14,
                1e-13,
            );
            assert!((hv - expect).abs() <= 1e-10 * c, "h({x}): {hv} vs {expect}");
        }
    }
}

#[test]
fn g_matches_quadrature_2d() {
    let problem = builtin_xlog();
    let delta = 0.1;
    let mesh = TensorMesh::new(2, 2).unwrap();
    let line = TensorMesh::new(2, 1).unwrap();
    let kernel = KernelParams::new(delta, 2).unwrap();
    let disc = Discretization::new(&mesh, &kernel, &problem, 1e-2).unwrap();
    let u = random_coeffs(mesh.n_dofs(), 42);
    let g = disc.g_values(&u).unwrap();
    let c = kernel.c_delta();
    let kern = |x: [f64; 2], y: [f64; 2]| c * (-((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)) / (delta * delta)).exp();

    // Along each edge the boundary datum is the cubic interpolant of b at the nodes.
    let edge_b = |fixed_axis: usize, v: f64| -> Vec<f64> {
        line.nodes()
            .iter()
            .map(|&t| {
                let x = if fixed_axis == 0 { [v, t] } else { [t, v] };
                let mut n = [0.0; 2];
                n[fixed_axis] = if v == 0.0 { -1.0 } else { 1.0 };
                problem.normal_derivative(&x, &n)
            })
            .collect()
    };
    let edges = [(0, 0.0), (0, 1.0), (1, 0.0), (1, 1.0)];
    let edge_coeffs: Vec<Vec<f64>> = edges.iter().map(|&(a, v)| edge_b(a, v)).collect();

    let points = disc.interior_points();
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    for _ in 0..12 {
        let q = rng.gen_range(0..points.len());
        let x = points[q].0;
        let ux = mesh.evaluate(&u, &x).unwrap();
        let inner = integrate_2d(
            |y0, y1| kern(x, [y0, y1]) * (ux - mesh.evaluate(&u, &[y0, y1]).unwrap()),
            (0.0, 1.0),
            (0.0, 1.0),
            &breaks(&line, x[0], delta),
            &breaks(&line, x[1], delta),
            1e-12,
            1e-12,
        );
        let mut source = 0.0;
        for (&(axis, v), coeffs) in edges.iter().zip(&edge_coeffs) {
            let free = 1 - axis;
            source += integrate(
                |t| {
                    let y = if axis == 0 { [v, t] } else { [t, v] };
                    2.0 * 0.25 * kern(x, y) * line.evaluate(coeffs, &[t]).unwrap()
                },
                0.0,
                1.0,
                &breaks(&line, x[free], delta),
                1e-14,
                1e-13,
            );
        }
        let expect = inner / (delta * delta) - source;
        let scale = c / (delta * delta);
        assert!((g[q] - expect).abs() <= 1e-9 * scale, "x = {x:?}: {} vs {expect}", g[q]);
    }
}
