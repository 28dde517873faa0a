use std::f64::consts::PI;
use std::sync::Arc;

use graphsurf::calculus::TensorField;
use graphsurf::family::{jacobian_bounds, sample_height_field};
use graphsurf::geometry::{
    christoffel, embedded_graph_geometry, flat_graph_geometry, graph_map_jacobian, riemann_from_b,
    riemann_symmetry_residual,
};
use graphsurf::{BaseManifold, DerivativeScheme, FamilySpec, GeometryBundle, HeightField, SpectralBasis};
use proptest::prelude::*;

fn random_height(base: &BaseManifold<f64>, band: usize, coeffs: &[f64]) -> HeightField<f64> {
    let basis = SpectralBasis::up_to(base, band);
    let c: Vec<f64> = (0..basis.len()).map(|i| coeffs[i % coeffs.len()]).collect();
    HeightField::from_basis(&basis, c)
}

fn gauss_curvature(m: &Arc<GeometryBundle<f64>>) -> Vec<f64> {
    let r = riemann_from_b(m);
    (0..m.npts())
        .map(|p| {
            let g = m.g_at(p);
            r.at(p)[0b0101] / (g[0] * g[3] - g[1] * g[2])
        })
        .collect()
}

fn total_curvature(m: &Arc<GeometryBundle<f64>>) -> f64 {
    gauss_curvature(m).iter().zip(m.measure_weights()).map(|(k, w)| k * w).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frame_is_orthonormal(coeffs in prop::collection::vec(-0.04f64..0.04, 1..12)) {
        let base = BaseManifold::flat_torus(&[16, 16]).unwrap();
        let m = embedded_graph_geometry(&random_height(&base, 3, &coeffs)).unwrap();
        for p in 0..m.npts() {
            let nu = m.normal_at(p);
            let len: f64 = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!((len - 1.0).abs() < 1e-14);
            prop_assert!(nu[2] > 0.0);
            for row in m.tangents_at(p).chunks(3) {
                let dot: f64 = row.iter().zip(nu).map(|(a, b)| a * b).sum();
                prop_assert!(dot.abs() < 1e-14);
            }
        }
        prop_assert!(m.trace_identity_residual() < 1e-12);
        prop_assert!(m.inverse_residual() < 1e-12);
    }

    #[test]
    fn gauss_equation_symmetries(coeffs in prop::collection::vec(-0.05f64..0.05, 1..12)) {
        let base = BaseManifold::flat_torus(&[12, 12]).unwrap();
        let m = Arc::new(embedded_graph_geometry(&random_height(&base, 3, &coeffs)).unwrap());
        prop_assert!(riemann_symmetry_residual(&riemann_from_b(&m)) <= 1e-14);
    }

    #[test]
    fn flat_closed_form_matches_embedding(coeffs in prop::collection::vec(-0.05f64..0.05, 1..12)) {
        let base = BaseManifold::flat_torus(&[16, 16]).unwrap();
        let psi = random_height(&base, 3, &coeffs);
        let a = flat_graph_geometry(&psi).unwrap();
        let b = embedded_graph_geometry(&psi).unwrap();
        for (x, y) in a.g().iter().zip(b.g()) {
            prop_assert!((x - y).abs() < 1e-13);
        }
        for (x, y) in a.b().iter().zip(b.b()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_jacobian_stays_in_sandwich(sample in 0usize..200, delta in 0.01f64..0.3) {
        let spec = FamilySpec {
            base: BaseManifold::flat_torus(&[16, 16]).unwrap(),
            delta,
            alpha: None,
            band_limit: 4,
            samples: 1,
            seed: 11,
        };
        let psi = sample_height_field(&spec, sample).unwrap();
        let jac = graph_map_jacobian(&psi).unwrap();
        let (lo, hi) = jacobian_bounds(&spec.base, delta);
        prop_assert!(jac.min() >= lo && jac.max() <= hi);
        prop_assert!(jac.max() <= 1.0 + 3.0 * delta);
    }
}

#[test]
fn unit_sphere_riemann_is_constant_curvature() {
    let base = BaseManifold::<f64>::sphere(1.0, 16, 32).unwrap();
    let m = Arc::new(embedded_graph_geometry(&HeightField::zero(&base)).unwrap());
    let r = riemann_from_b(&m);
    let n = 2;
    for p in 0..m.npts() {
        let g = m.g_at(p);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let expect = g[i * n + k] * g[j * n + l] - g[i * n + l] * g[j * n + k];
                        let got = r.at(p)[((i * n + j) * n + k) * n + l];
                        assert!((got - expect).abs() < 1e-13);
                    }
                }
            }
        }
    }
}

#[test]
fn total_curvature_is_topological() {
    // Gauss-Bonnet: 0 on a torus, 4 pi on a sphere, whatever the graph
    let torus = BaseManifold::flat_torus(&[32, 32]).unwrap();
    let m = Arc::new(embedded_graph_geometry(&random_height(&torus, 3, &[0.003, -0.002, 0.001, 0.0025])).unwrap());
    assert!(total_curvature(&m).abs() < 1e-10, "{}", total_curvature(&m));

    let sphere = BaseManifold::sphere(1.0, 48, 96).unwrap();
    let m = Arc::new(embedded_graph_geometry(&random_height(&sphere, 3, &[0.004, -0.002, 0.003])).unwrap());
    assert!((total_curvature(&m) - 4.0 * PI).abs() < 1e-4, "{}", total_curvature(&m));
}

#[test]
fn fourth_order_scheme_converges() {
    let err = |n: usize| {
        let base = BaseManifold::<f64>::flat_torus(&[n, n])
            .unwrap()
            .with_scheme(DerivativeScheme::FiniteDifference4)
            .unwrap();
        let psi = HeightField::from_fn(&base, |x| 0.1 * x[0].sin()).unwrap();
        let m = flat_graph_geometry(&psi).unwrap();
        (0..m.npts())
            .map(|p| {
                let x = base.coords(p)[0];
                let w2: f64 = 1.0 + 0.01 * x.cos().powi(2);
                let exact = 0.1 * x.sin() / w2.powf(1.5);
                (m.mean_curvature()[p] - exact).abs()
            })
            .fold(0.0, f64::max)
    };
    let (a, b) = (err(32), err(64));
    assert!((a / b).log2() > 3.5, "{a} {b}");
}

#[test]
fn christoffel_symbols_of_graph_metric() {
    // g = I + d psi d psi^T gives Gamma^k_ij = psi_k psi_ij / W^2
    let base = BaseManifold::<f64>::flat_torus(&[32, 32]).unwrap();
    let psi = HeightField::from_fn(&base, |x| 0.1 * x[0].sin() * x[1].cos()).unwrap();
    let m = christoffel(flat_graph_geometry(&psi).unwrap()).unwrap();
    for p in (0..m.npts()).step_by(7) {
        let x = base.coords(p);
        let d = [0.1 * x[0].cos() * x[1].cos(), -0.1 * x[0].sin() * x[1].sin()];
        let h = [
            [-0.1 * x[0].sin() * x[1].cos(), -0.1 * x[0].cos() * x[1].sin()],
            [-0.1 * x[0].cos() * x[1].sin(), -0.1 * x[0].sin() * x[1].cos()],
        ];
        let w2 = 1.0 + d[0] * d[0] + d[1] * d[1];
        let gam = m.gamma_at(p).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let expect = d[k] * h[i][j] / w2;
                    assert!((gam[(k * 2 + i) * 2 + j] - expect).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn scalar_fields_follow_the_chart() {
    let base = BaseManifold::<f64>::flat_torus(&[8, 8]).unwrap();
    let m = Arc::new(flat_graph_geometry(&HeightField::zero(&base)).unwrap());
    let u = TensorField::from_fn(&m, |x| x[0] + 2.0 * x[1]).unwrap();
    for p in 0..m.npts() {
        let x = base.coords(p);
        assert_eq!(u.at(p)[0], x[0] + 2.0 * x[1]);
    }
}
