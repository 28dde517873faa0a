//! Calderon-Zygmund and Schauder quotients for the second fundamental form
//! and for functions.

use std::sync::Arc;

use super::sobolev::nonzero;
use super::{maximize, Candidates, ConstantEstimate, InequalityKind, Search};
use crate::calculus::{hessian_and_laplacian, iterated_covariant_derivative, TensorField};
use crate::error::{GraphError, Result};
use crate::geometry::GeometryBundle;
use crate::norms::{holder_norm, lp_norm, HolderConvention};
use crate::scalar::Real;

/// `||B||_p / (1 + ||H||_p)`.
pub fn cz_curvature_ratio<T: Real>(bundle: &Arc<GeometryBundle<T>>, p: T) -> Result<T> {
    Ok(lp_norm(&bundle.b_field(), p)? / (T::one() + lp_norm(&bundle.h_field(), p)?))
}

/// `||B||_{C^{0,alpha}} / (1 + ||H||_{C^{0,alpha}})` with chart components.
pub fn schauder_curvature_ratio<T: Real>(bundle: &Arc<GeometryBundle<T>>, alpha: T) -> Result<T> {
    schauder_curvature_ratio_with(bundle, alpha, HolderConvention::Chart)
}

pub fn schauder_curvature_ratio_with<T: Real>(
    bundle: &Arc<GeometryBundle<T>>,
    alpha: T,
    convention: HolderConvention,
) -> Result<T> {
    let (b, _) = holder_norm(&bundle.b_field(), alpha, convention)?;
    let (h, _) = holder_norm(&bundle.h_field(), alpha, convention)?;
    Ok(b / (T::one() + h))
}

/// `||nabla^2 u||_p / (||Delta u||_p + ||u||_p)`.
pub fn cz_function_ratio<T: Real>(u: &TensorField<T>, p: T) -> Result<T> {
    let (hess, lap) = hessian_and_laplacian(u)?;
    let un = lp_norm(u, p)?;
    if un == T::zero() {
        return Err(GraphError::UndefinedRatio("u vanishes identically".into()));
    }
    Ok(lp_norm(&hess, p)? / (lp_norm(&lap, p)? + un))
}

pub fn estimate_cz_function_constant<T: Real>(
    bundle: &Arc<GeometryBundle<T>>,
    p: T,
    search: Search,
    seed: u64,
) -> Result<ConstantEstimate<T>> {
    if p.is_nan() || p < T::one() {
        return Err(GraphError::InvalidExponent(format!("p = {p} is not in [1, inf]")));
    }
    let cands = Candidates::new(bundle, search.band, seed, InequalityKind::CzFn);
    let (value, witness) = maximize(&cands, search, true, |u| nonzero(cz_function_ratio(u, p)))?;
    Ok(ConstantEstimate {
        inequality: InequalityKind::CzFn,
        value,
        witness,
        params: vec![("p".into(), p.to_f64_lossy())],
    })
}

/// Higher order curvature quotient together with `||H||_q` for `q = 3, 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HigherCz<T> {
    /// `||nabla^k B||_p / (1 + ||nabla^k H||_p)`
    pub ratio: T,
    pub h_l3: T,
    pub h_l4: T,
}

/// First order by default; `k = 2` only when explicitly allowed.
pub fn higher_cz_ratio<T: Real>(
    bundle: &Arc<GeometryBundle<T>>,
    p: T,
    k: usize,
    allow_second_order: bool,
) -> Result<HigherCz<T>> {
    let max = if allow_second_order { 2 } else { 1 };
    if k == 0 || k > max {
        return Err(GraphError::UnsupportedOrder { requested: k, max });
    }
    let db = iterated_covariant_derivative(&bundle.b_field(), k)?;
    let dh = iterated_covariant_derivative(&bundle.h_field(), k)?;
    let h = bundle.h_field();
    Ok(HigherCz {
        ratio: lp_norm(&db, p)? / (T::one() + lp_norm(&dh, p)?),
        h_l3: lp_norm(&h, T::lit(3.0))?,
        h_l4: lp_norm(&h, T::lit(4.0))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::BaseManifold;
    use crate::geometry::{christoffel, embedded_graph_geometry, flat_graph_geometry};
    use crate::height::HeightField;
    use std::f64::consts::PI;

    fn flat(shape: &[usize]) -> Arc<GeometryBundle<f64>> {
        let base = BaseManifold::flat_torus(shape).unwrap();
        Arc::new(christoffel(flat_graph_geometry(&HeightField::zero(&base)).unwrap()).unwrap())
    }

    #[test]
    fn flat_anchors() {
        let m = flat(&[32, 32]);
        assert_eq!(cz_curvature_ratio(&m, 2.0).unwrap(), 0.0);
        assert_eq!(schauder_curvature_ratio(&m, 0.5).unwrap(), 0.0);
        assert_eq!(higher_cz_ratio(&m, 2.0, 1, false).unwrap().ratio, 0.0);
        let u = TensorField::from_fn(&m, |x| x[0].sin()).unwrap();
        assert!((cz_function_ratio(&u, 2.0).unwrap() - 0.5).abs() < 1e-12);
        let c = TensorField::constant(&m, 1.0);
        assert_eq!(cz_function_ratio(&c, 2.0).unwrap(), 0.0);
        let z = TensorField::constant(&m, 0.0);
        assert_eq!(cz_function_ratio(&z, 2.0).unwrap_err().kind(), "undefined-ratio");
    }

    #[test]
    fn two_mode_closed_form() {
        // u = sin x + sin y: |hess|^2 = sin^2 x + sin^2 y, Delta u = -u
        let m = flat(&[32, 32]);
        let u = TensorField::from_fn(&m, |x| x[0].sin() + x[1].sin()).unwrap();
        let hess = (4.0 * PI * PI).sqrt();
        let un = (4.0 * PI * PI).sqrt();
        assert!((cz_function_ratio(&u, 2.0).unwrap() - hess / (2.0 * un)).abs() < 1e-6);
    }

    #[test]
    fn umbilic_sphere_ratio() {
        let base = BaseManifold::<f64>::sphere(1.0, 64, 128).unwrap();
        let m = Arc::new(christoffel(embedded_graph_geometry(&HeightField::zero(&base)).unwrap()).unwrap());
        let a = (4.0 * PI).sqrt();
        let expect = 2f64.sqrt() * a / (1.0 + 2.0 * a);
        assert!((cz_curvature_ratio(&m, 2.0).unwrap() - expect).abs() < 1e-6);
        assert!(higher_cz_ratio(&m, 2.0, 1, false).unwrap().ratio < 1e-6);
    }

    #[test]
    fn order_gate() {
        let m = flat(&[8, 8]);
        assert_eq!(higher_cz_ratio(&m, 2.0, 2, false).unwrap_err().kind(), "unsupported-order");
        assert!(higher_cz_ratio(&m, 2.0, 2, true).is_ok());
        assert_eq!(higher_cz_ratio(&m, 2.0, 3, true).unwrap_err().kind(), "unsupported-order");
    }
}
