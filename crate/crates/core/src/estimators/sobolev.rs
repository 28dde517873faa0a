//! Sobolev, Morrey and Sobolev-Poincare quotients.

use std::sync::Arc;

use super::{maximize, poincare, Candidates, ConstantEstimate, InequalityKind, Search};
use crate::calculus::{covariant_derivative, TensorField};
use crate::error::{GraphError, Result};
use crate::geometry::GeometryBundle;
use crate::norms::{holder_norm, lp_norm, HolderConvention};
use crate::scalar::Real;

/// `p* = n p / (n - p)`, defined for `1 <= p < n`.
pub fn sobolev_conjugate<T: Real>(p: T, n: usize) -> Result<T> {
    let nn = T::from_count(n);
    if n < 2 || p.is_nan() || p < T::one() || p >= nn {
        return Err(GraphError::InvalidExponent(format!(
            "Sobolev exponent needs 1 <= p < n = {n}, got p = {p}"
        )));
    }
    Ok(nn * p / (nn - p))
}

/// `||u||_{p*} / (||u||_p + ||grad u||_p)`.
pub fn sobolev_ratio<T: Real>(u: &TensorField<T>, p: T) -> Result<T> {
    let ps = sobolev_conjugate(p, u.bundle().dim())?;
    let den = lp_norm(u, p)? + lp_norm(&covariant_derivative(u)?, p)?;
    if den == T::zero() {
        return Err(GraphError::UndefinedRatio("zero field".into()));
    }
    Ok(lp_norm(u, ps)? / den)
}

pub fn estimate_sobolev_constant<T: Real>(
    bundle: &Arc<GeometryBundle<T>>,
    p: T,
    search: Search,
    seed: u64,
) -> Result<ConstantEstimate<T>> {
    sobolev_conjugate(p, bundle.dim())?;
    let cands = Candidates::new(bundle, search.band, seed, InequalityKind::Sobolev);
    let (value, witness) = maximize(&cands, search, true, |u| nonzero(sobolev_ratio(u, p)))?;
    Ok(ConstantEstimate {
        inequality: InequalityKind::Sobolev,
        value,
        witness,
        params: vec![("p".into(), p.to_f64_lossy())],
    })
}

/// `||u||_{C^{0,alpha}} / ||u||_{W^{1,p}}` with `alpha = 1 - n/p`.
pub fn morrey_ratio<T: Real>(u: &TensorField<T>, p: T) -> Result<T> {
    let alpha = morrey_alpha(p, u.bundle().dim())?;
    let den = lp_norm(u, p)? + lp_norm(&covariant_derivative(u)?, p)?;
    if den == T::zero() {
        return Err(GraphError::UndefinedRatio("zero field".into()));
    }
    let (num, _) = holder_norm(u, alpha, HolderConvention::Chart)?;
    Ok(num / den)
}

fn morrey_alpha<T: Real>(p: T, n: usize) -> Result<T> {
    let nn = T::from_count(n);
    if p.is_nan() || p <= nn || p.is_infinite() {
        return Err(GraphError::InvalidExponent(format!(
            "Morrey exponent needs n = {n} < p < inf, got p = {p}"
        )));
    }
    Ok(T::one() - nn / p)
}

pub fn estimate_morrey_constant<T: Real>(
    bundle: &Arc<GeometryBundle<T>>,
    p: T,
    search: Search,
    seed: u64,
) -> Result<ConstantEstimate<T>> {
    let alpha = morrey_alpha(p, bundle.dim())?;
    let cands = Candidates::new(bundle, search.band, seed, InequalityKind::Morrey);
    let (value, witness) = maximize(&cands, search, true, |u| nonzero(morrey_ratio(u, p)))?;
    Ok(ConstantEstimate {
        inequality: InequalityKind::Morrey,
        value,
        witness,
        params: vec![("p".into(), p.to_f64_lossy()), ("alpha".into(), alpha.to_f64_lossy())],
    })
}

/// `C_SP = C_S (1 + C_P)`, composing the two estimates the way the
/// mean-zero Sobolev inequality follows from them.
pub fn estimate_sobolev_poincare_constant<T: Real>(
    bundle: &Arc<GeometryBundle<T>>,
    p: T,
    search: Search,
    seed: u64,
) -> Result<ConstantEstimate<T>> {
    let s = estimate_sobolev_constant(bundle, p, search, seed)?;
    let c = poincare::estimate_poincare_constant(bundle, p, search, seed)?;
    Ok(ConstantEstimate {
        inequality: InequalityKind::SobolevPoincare,
        value: s.value * (T::one() + c.value),
        witness: format!("sobolev: {}; poincare: {}", s.witness, c.witness),
        params: vec![("p".into(), p.to_f64_lossy())],
    })
}

/// Maps undefined quotients to "skip this candidate".
pub(crate) fn nonzero<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(GraphError::UndefinedRatio(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::BaseManifold;
    use crate::geometry::{christoffel, flat_graph_geometry};
    use crate::height::HeightField;
    use std::f64::consts::PI;

    fn flat(shape: &[usize]) -> Arc<GeometryBundle<f64>> {
        let base = BaseManifold::flat_torus(shape).unwrap();
        Arc::new(christoffel(flat_graph_geometry(&HeightField::zero(&base)).unwrap()).unwrap())
    }

    #[test]
    fn sine_quotient() {
        let m = flat(&[32, 32]);
        let u = TensorField::from_fn(&m, |x| x[0].sin()).unwrap();
        // ||u||_2 = pi sqrt 2 and ||u||_1 = ||u'||_1 = 8 pi; the grid rule is
        // exact for |sin| only in the limit
        let r = sobolev_ratio(&u, 1.0).unwrap();
        assert!((r - 2f64.sqrt() / 16.0).abs() < 2e-3, "{r}");
    }

    #[test]
    fn estimate_dominates_candidates_and_is_deterministic() {
        let m = flat(&[24, 24]);
        let search = Search {
            trials: 8,
            ascent_steps: 10,
            band: 4,
        };
        let a = estimate_sobolev_constant(&m, 1.0, search, 7).unwrap();
        let b = estimate_sobolev_constant(&m, 1.0, search, 7).unwrap();
        assert_eq!(a, b);
        let vol = 4.0 * PI * PI;
        let constant = vol.powf(0.5 - 1.0);
        assert!(a.value >= constant - 1e-15);
        let u = TensorField::from_fn(&m, |x| x[0].sin()).unwrap();
        assert!(a.value >= sobolev_ratio(&u, 1.0).unwrap() || a.witness == "constant");
    }

    #[test]
    fn exponent_ranges() {
        let m = flat(&[8, 8]);
        let s = Search::default();
        assert_eq!(
            estimate_sobolev_constant(&m, 2.0, s, 0).unwrap_err().kind(),
            "invalid-exponent"
        );
        assert_eq!(
            estimate_morrey_constant(&m, 2.0, s, 0).unwrap_err().kind(),
            "invalid-exponent"
        );
    }
}
