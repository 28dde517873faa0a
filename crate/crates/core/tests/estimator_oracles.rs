use std::f64::consts::PI;
use std::sync::Arc;

use graphsurf::calculus::TensorField;
use graphsurf::estimators::gn::{verify_gn_inequality, Exponent};
use graphsurf::estimators::poincare::{laplace_first_eigenvalue, poincare_ratio};
use graphsurf::estimators::sobolev::{morrey_ratio, sobolev_ratio};
use graphsurf::geometry::{christoffel, embedded_graph_geometry};
use graphsurf::{BaseManifold, EstimatorSpec, GeometryBundle, HeightField, SpectralBasis};
use proptest::prelude::*;

fn surface(n: usize, amp: f64) -> Arc<GeometryBundle<f64>> {
    let base = BaseManifold::<f64>::flat_torus(&[n, n]).unwrap();
    let psi = HeightField::from_fn(&base, |x| amp * (x[0].sin() + (2.0 * x[1]).cos())).unwrap();
    Arc::new(christoffel(embedded_graph_geometry(&psi).unwrap()).unwrap())
}

#[test]
fn rayleigh_quotients_stay_below_galerkin_constant() {
    let m = surface(24, 0.05);
    let lambda = laplace_first_eigenvalue(&m, 6).unwrap();
    let cp = 1.0 / lambda.sqrt();
    let basis = SpectralBasis::up_to(m.base(), 4);
    let mut rng = graphsurf::spectral::substream(5, 0);
    for _ in 0..20 {
        let c = basis.random_coefficients(&mut rng);
        let u = TensorField::scalar(&m, basis.synthesize(&c)).unwrap();
        let r = poincare_ratio(&u, 2.0).unwrap();
        assert!(r <= cp * (1.0 + 1e-9), "{r} > {cp}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flat_rayleigh_bounded_by_first_mode(coeffs in prop::collection::vec(-1.0f64..1.0, 2..20)) {
        let base = BaseManifold::flat_torus(&[16, 16]).unwrap();
        let m = Arc::new(christoffel(embedded_graph_geometry(&HeightField::zero(&base)).unwrap()).unwrap());
        let basis = SpectralBasis::up_to(&base, 3);
        let c: Vec<f64> = (0..basis.len()).map(|i| coeffs[i % coeffs.len()]).collect();
        let u = TensorField::scalar(&m, basis.synthesize(&c)).unwrap();
        if let Ok(r) = poincare_ratio(&u, 2.0) {
            prop_assert!(r <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn gn_closed_form_for_a_sine() {
    // j=0, m=1, r=q=2, theta=1/2 in two dimensions gives p = 4
    let m = surface(32, 0.0);
    let u = TensorField::from_fn(&m, |x| x[0].sin()).unwrap();
    let check = verify_gn_inequality(&u, 0, 1, Exponent::Finite(2.0), Exponent::Finite(2.0), 0.5).unwrap();
    assert!((check.p - 4.0).abs() < 1e-12);
    let l4 = (3.0 * PI * PI / 2.0).powf(0.25);
    let l2 = PI * 2f64.sqrt();
    assert!((check.lhs - l4).abs() < 1e-12);
    assert!((check.rhs - 2.0 * PI).abs() < 1e-12);
    assert!((check.mean_zero_ratio.unwrap() - l4 / l2).abs() < 1e-12);
}

#[test]
fn sobolev_and_morrey_constants_on_flat_torus() {
    let m = surface(16, 0.0);
    let one = TensorField::constant(&m, 1.0);
    let v = 4.0 * PI * PI;
    // ||1||_2 / ||1||_1
    assert!((sobolev_ratio(&one, 1.0).unwrap() - 1.0 / v.sqrt()).abs() < 1e-14);
    // sup 1 / ||1||_4 with p = 4 > n
    assert!((morrey_ratio(&one, 4.0).unwrap() - v.powf(-0.25)).abs() < 1e-14);
    let est = EstimatorSpec::Sobolev {
        p: 1.0,
        trials: 4,
        ascent_steps: 5,
        band: 3,
    }
    .run(&m, 1)
    .unwrap();
    assert!(est.value >= 1.0 / v.sqrt() - 1e-14);
}

#[test]
fn schauder_ratio_vanishes_only_when_flat() {
    let flat = surface(16, 0.0);
    let bent = surface(16, 0.1);
    let spec = EstimatorSpec::SchauderB { alpha: 0.5 };
    assert_eq!(spec.run(&flat, 0).unwrap().value, 0.0);
    let v = spec.run(&bent, 0).unwrap().value;
    assert!(v > 0.0 && v.is_finite());
}

#[test]
fn estimates_are_reproducible() {
    let m = surface(16, 0.05);
    let specs = [
        EstimatorSpec::Gn {
            j: 1,
            m: 2,
            r: 2.0,
            q: 2.0,
            theta: 0.75,
            trials: 6,
            ascent_steps: 8,
            band: 4,
        },
        EstimatorSpec::CzFn {
            p: 2.0,
            trials: 6,
            ascent_steps: 8,
            band: 4,
        },
        EstimatorSpec::Morrey {
            p: 3.0,
            trials: 4,
            ascent_steps: 0,
            band: 3,
        },
    ];
    for s in &specs {
        let a = s.run(&m, 42).unwrap();
        let b = s.run(&m, 42).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.witness, b.witness);
    }
}
