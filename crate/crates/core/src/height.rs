//! Height functions `psi` over a base.

use crate::base::{BaseKind, BaseManifold, Parity};
use crate::error::{GraphError, Result};
use crate::norms::pair_holder_seminorm;
use crate::scalar::{max_of, Real};
use std::sync::OnceLock;

use crate::spectral::{modes_up_to, Mode, SpectralBasis};

/// Grid samples of `psi` together with their spectral coefficients.
#[derive(Debug, Clone)]
pub struct HeightField<T: Real> {
    base: BaseManifold<T>,
    values: Vec<T>,
    modes: Vec<Mode>,
    // projected on first use for fields built from samples
    coeffs: OnceLock<Vec<T>>,
    band_limit: usize,
}

impl<T: Real> HeightField<T> {
    pub fn zero(base: &BaseManifold<T>) -> Self {
        Self::constant(base, T::zero())
    }

    pub fn constant(base: &BaseManifold<T>, c: T) -> Self {
        let modes = modes_up_to(base, 0);
        // the constant harmonic is 1 / sqrt(4 pi), not 1
        let basis = SpectralBasis::new(base, modes.clone());
        let unit = basis.sample(0)[0];
        Self {
            base: base.clone(),
            values: vec![c; base.npts()],
            modes,
            coeffs: OnceLock::from(vec![c / unit]),
            band_limit: 0,
        }
    }

    /// Synthesizes `sum c_k mode_k` on the grid.
    pub fn from_coeffs(base: &BaseManifold<T>, modes: Vec<Mode>, coeffs: Vec<T>) -> Result<Self> {
        if modes.len() != coeffs.len() {
            return Err(GraphError::ShapeMismatch {
                expected: modes.len(),
                actual: coeffs.len(),
            });
        }
        check_finite(&coeffs, "height coefficients")?;
        let basis = SpectralBasis::new(base, modes);
        Ok(Self::from_basis(&basis, coeffs))
    }

    pub fn from_basis(basis: &SpectralBasis<T>, coeffs: Vec<T>) -> Self {
        let values = basis.synthesize(&coeffs);
        let band_limit = basis
            .modes()
            .iter()
            .zip(&coeffs)
            .filter(|(_, c)| **c != T::zero())
            .map(|(m, _)| m.band())
            .max()
            .unwrap_or(0);
        Self {
            base: basis.base().clone(),
            values,
            modes: basis.modes().to_vec(),
            coeffs: OnceLock::from(coeffs),
            band_limit,
        }
    }

    /// Takes grid samples and projects them onto the largest band the grid
    /// resolves exactly. Fields with content above that band keep their
    /// samples but are not reproduced by their coefficients.
    pub fn from_values(base: &BaseManifold<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != base.npts() {
            return Err(GraphError::ShapeMismatch {
                expected: base.npts(),
                actual: values.len(),
            });
        }
        check_finite(&values, "height samples")?;
        let band = resolvable_band(base);
        Ok(Self {
            base: base.clone(),
            values,
            modes: modes_up_to(base, band),
            coeffs: OnceLock::new(),
            band_limit: band,
        })
    }

    pub fn from_fn(base: &BaseManifold<T>, f: impl Fn(&[T]) -> T) -> Result<Self> {
        let values = (0..base.npts()).map(|i| f(&base.coords(i))).collect();
        Self::from_values(base, values)
    }

    pub fn base(&self) -> &BaseManifold<T> {
        &self.base
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn coeffs(&self) -> &[T] {
        self.coeffs
            .get_or_init(|| SpectralBasis::new(&self.base, self.modes.clone()).project(&self.values))
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            base: self.base.clone(),
            values: self.values.iter().map(|&v| v * factor).collect(),
            modes: self.modes.clone(),
            coeffs: match self.coeffs.get() {
                Some(c) => OnceLock::from(c.iter().map(|&c| c * factor).collect::<Vec<T>>()),
                None => OnceLock::new(),
            },
            band_limit: self.band_limit,
        }
    }

    /// Relative sup-distance between the samples and the synthesized series.
    pub fn synthesis_error(&self) -> T {
        let basis = SpectralBasis::new(&self.base, self.modes.clone());
        let synth = basis.synthesize(self.coeffs());
        let scale = max_of(self.values.iter().map(|v| v.abs()));
        let err = max_of(self.values.iter().zip(&synth).map(|(a, b)| (*a - *b).abs()));
        if scale > T::zero() {
            err / scale
        } else {
            err
        }
    }

    pub fn sup_abs(&self) -> T {
        max_of(self.values.iter().map(|v| v.abs()))
    }

    /// Chart partial derivatives, one grid field per axis.
    pub fn gradient(&self) -> Vec<Vec<T>> {
        (0..self.base.dim())
            .map(|a| self.base.d1(&self.values, a, Parity::Even))
            .collect()
    }

    /// Pointwise `|grad^0 psi|` in the base metric.
    pub fn gradient_norms(&self) -> Vec<T> {
        let grad = self.gradient();
        let n = self.base.dim();
        (0..self.base.npts())
            .map(|p| {
                let ginv = base_metric_inverse(&self.base, p);
                let mut s = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        s = s + ginv[i * n + j] * grad[i][p] * grad[j][p];
                    }
                }
                s.sqrt()
            })
            .collect()
    }

    /// `sup |psi| + sup |grad^0 psi|` over the grid.
    pub fn c1_norm(&self) -> T {
        self.sup_abs() + max_of(self.gradient_norms())
    }

    /// C^1 norm plus the Holder seminorm of the ambient gradient vector of
    /// `psi` along the base.
    pub fn c1_alpha_norm(&self, alpha: T) -> Result<T> {
        if !(alpha > T::zero() && alpha <= T::one()) {
            return Err(GraphError::InvalidExponent(format!(
                "Holder exponent {alpha} not in (0, 1]"
            )));
        }
        let n = self.base.dim();
        let d = n + 1;
        let grad = self.gradient();
        let mut positions = Vec::with_capacity(self.base.npts() * d);
        let mut comps = Vec::with_capacity(self.base.npts() * d);
        for p in 0..self.base.npts() {
            let bp = self.base.base_point(p);
            let ginv = base_metric_inverse(&self.base, p);
            positions.extend_from_slice(&bp.position);
            for k in 0..d {
                let mut v = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        v = v + ginv[i * n + j] * grad[j][p] * bp.tangents[i][k];
                    }
                }
                comps.push(v);
            }
        }
        let semi = pair_holder_seminorm(&self.base, &positions, &comps, d, alpha)?;
        Ok(self.c1_norm() + semi)
    }
}

/// Largest band whose products the grid integrates exactly.
pub fn resolvable_band<T: Real>(base: &BaseManifold<T>) -> usize {
    let shape = base.grid_shape();
    match base.kind() {
        BaseKind::FlatTorus => shape.iter().map(|&s| (s - 1) / 2).min().unwrap_or(0),
        BaseKind::Sphere => ((shape[0] - 1) / 2).min(shape[1] / 2 - 1),
    }
}

pub(crate) fn base_metric_inverse<T: Real>(base: &BaseManifold<T>, p: usize) -> Vec<T> {
    let n = base.dim();
    let g0 = base.base_metric(p);
    // both built-in base metrics are diagonal
    let mut inv = vec![T::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = T::one() / g0[i * n + i];
    }
    inv
}

pub(crate) fn check_finite<T: Real>(values: &[T], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(GraphError::InvalidField(format!(
            "{what}: non-finite value at index {i}"
        ))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Phase;

    #[test]
    fn constant_field_norms() {
        let base = BaseManifold::<f64>::flat_torus(&[16, 16]).unwrap();
        let h = HeightField::constant(&base, -0.25);
        assert_eq!(h.c1_norm(), 0.25);
        assert_eq!(h.band_limit(), 0);
        let s = BaseManifold::<f64>::sphere(1.0, 8, 16).unwrap();
        let h = HeightField::constant(&s, 0.5);
        assert!(h.synthesis_error() < 1e-14);
    }

    #[test]
    fn single_mode_c1_norm() {
        let base = BaseManifold::<f64>::flat_torus(&[32, 32]).unwrap();
        let h = HeightField::from_coeffs(
            &base,
            vec![Mode::Fourier {
                wavevector: vec![1, 0],
                phase: Phase::Sin,
            }],
            vec![0.1],
        )
        .unwrap();
        // sup|0.1 sin x| + sup|0.1 cos x|, both attained on the grid
        assert!((h.c1_norm() - 0.2).abs() < 1e-14);
    }

    #[test]
    fn from_values_reproduces_band_limited_samples() {
        let base = BaseManifold::<f64>::flat_torus(&[16, 12]).unwrap();
        let h = HeightField::from_fn(&base, |x| 0.1 * (2.0 * x[0] - x[1]).cos() + 0.05).unwrap();
        assert!(h.synthesis_error() < 1e-10);
        let s = BaseManifold::<f64>::sphere(1.0, 12, 24).unwrap();
        let h = HeightField::from_fn(&s, |x| x[0].cos() * x[0].sin() * x[1].sin()).unwrap();
        assert!(h.synthesis_error() < 1e-10);
    }

    #[test]
    fn nan_samples_are_rejected() {
        let base = BaseManifold::<f64>::flat_torus(&[8, 8]).unwrap();
        let mut v = vec![0.0; 64];
        v[5] = f64::NAN;
        assert_eq!(
            HeightField::from_values(&base, v).unwrap_err().kind(),
            "invalid-field"
        );
    }
}
