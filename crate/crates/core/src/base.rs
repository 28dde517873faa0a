//! Base hypersurfaces and their sampling grids.
//!
//! Two bases are built in: the flat torus `T^n = prod [0, L_a)` seen as the
//! cross-section `T^n x {0}` of `T^n x R`, and the round sphere `S^2_R` in
//! `R^3`, parametrized by colatitude/longitude on a grid that skips the poles
//! by half a cell.
//!
//! Derivatives on the torus are trigonometric-spectral (or 4th-order central
//! differences on request). On the sphere the longitude axis is spectral and
//! the colatitude axis uses 4th-order differences, continued across each pole
//! by the identification `(-theta, phi) ~ (theta, phi + pi)`. Under that
//! identification a chart component with an odd number of colatitude indices
//! changes sign, which is what [`Parity`] tracks.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{GraphError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseKind {
    FlatTorus,
    Sphere,
}

/// How torus axes are differentiated. Sphere axes ignore this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeScheme {
    #[default]
    Spectral,
    FiniteDifference4,
}

/// Sign picked up by a chart component when continued across a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AxisRule {
    Spectral,
    PeriodicFd4,
    PoleFd4,
}

struct AxisOps<T: Real> {
    rule: AxisRule,
    len: usize,
    stride: usize,
    spacing: T,
    /// `2 pi k / L` in FFT order, Nyquist entry zeroed.
    wavenumbers: Vec<T>,
    forward: Option<Arc<dyn Fft<T>>>,
    inverse: Option<Arc<dyn Fft<T>>>,
}

/// Sampling grid of a base: coordinates, quadrature weights and the
/// first-derivative operator along each axis.
pub struct Grid<T: Real> {
    shape: Vec<usize>,
    npts: usize,
    axis_coords: Vec<Vec<T>>,
    chart_weight: Vec<T>,
    axes: Vec<AxisOps<T>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("shape", &self.shape)
            .field("npts", &self.npts)
            .finish()
    }
}

/// Analytic data of the base at one grid point.
#[derive(Debug, Clone)]
pub struct BasePoint<T> {
    /// Position `x` in the ambient space.
    pub position: Vec<T>,
    /// `d_i x`, row i.
    pub tangents: Vec<Vec<T>>,
    /// `d_i d_j x`, index `i * n + j`.
    pub second: Vec<Vec<T>>,
    pub normal: Vec<T>,
    /// `d_i nu_0`, row i.
    pub normal_d: Vec<Vec<T>>,
    /// `d_i d_j nu_0`, index `i * n + j`.
    pub normal_dd: Vec<Vec<T>>,
}

/// The fixed compact base `M_0` together with its grid.
#[derive(Clone)]
pub struct BaseManifold<T: Real> {
    kind: BaseKind,
    dim: usize,
    periods: Vec<T>,
    radius: T,
    scheme: DerivativeScheme,
    grid: Arc<Grid<T>>,
}

impl<T: Real> fmt::Debug for BaseManifold<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BaseManifold")
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .field("grid_shape", &self.grid.shape)
            .field("scheme", &self.scheme)
            .finish()
    }
}

impl<T: Real> BaseManifold<T> {
    /// Flat torus with all periods `2 pi`.
    pub fn flat_torus(grid_shape: &[usize]) -> Result<Self> {
        let periods = vec![T::TAU(); grid_shape.len()];
        Self::flat_torus_with_periods(&periods, grid_shape)
    }

    pub fn flat_torus_with_periods(periods: &[T], grid_shape: &[usize]) -> Result<Self> {
        Self::build_torus(periods, grid_shape, DerivativeScheme::Spectral)
    }

    /// Same base, differentiated with the given scheme.
    pub fn with_scheme(&self, scheme: DerivativeScheme) -> Result<Self> {
        match self.kind {
            BaseKind::FlatTorus => Self::build_torus(&self.periods, &self.grid.shape, scheme),
            BaseKind::Sphere => Ok(self.clone()),
        }
    }

    fn build_torus(periods: &[T], grid_shape: &[usize], scheme: DerivativeScheme) -> Result<Self> {
        let dim = grid_shape.len();
        if dim == 0 {
            return Err(GraphError::InvalidGrid("torus needs at least one axis".into()));
        }
        if periods.len() != dim {
            return Err(GraphError::InvalidGrid(format!(
                "{} periods for {} axes",
                periods.len(),
                dim
            )));
        }
        if periods.iter().any(|&p| !(p > T::zero()) || !p.is_finite()) {
            return Err(GraphError::InvalidGrid("periods must be positive".into()));
        }
        if grid_shape.iter().any(|&s| s < 5) {
            return Err(GraphError::InvalidGrid("each axis needs at least 5 samples".into()));
        }
        let rule = match scheme {
            DerivativeScheme::Spectral => AxisRule::Spectral,
            DerivativeScheme::FiniteDifference4 => AxisRule::PeriodicFd4,
        };
        let rules = vec![rule; dim];
        let grid = Grid::new(grid_shape, periods, &rules, |axis, i| {
            periods[axis] * T::from_count(i) / T::from_count(grid_shape[axis])
        });
        let cell = grid.axes.iter().fold(T::one(), |acc, a| acc * a.spacing);
        let mut grid = grid;
        grid.chart_weight = vec![cell; grid.npts];
        Ok(Self {
            kind: BaseKind::FlatTorus,
            dim,
            periods: periods.to_vec(),
            radius: T::infinity(),
            scheme,
            grid: Arc::new(grid),
        })
    }

    /// Round sphere of the given radius on an `n_theta x n_phi` grid.
    pub fn sphere(radius: T, n_theta: usize, n_phi: usize) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(GraphError::InvalidGrid("sphere radius must be positive".into()));
        }
        if n_theta < 4 || n_phi < 6 || n_phi % 2 != 0 {
            return Err(GraphError::InvalidGrid(
                "sphere grid needs n_theta >= 4 and an even n_phi >= 6".into(),
            ));
        }
        let shape = [n_theta, n_phi];
        let periods = [T::PI(), T::TAU()];
        let rules = [AxisRule::PoleFd4, AxisRule::Spectral];
        let mut grid = Grid::new(&shape, &periods, &rules, |axis, i| {
            if axis == 0 {
                (T::from_count(i) + T::lit(0.5)) * T::PI() / T::from_count(n_theta)
            } else {
                T::TAU() * T::from_count(i) / T::from_count(n_phi)
            }
        });
        let fejer = fejer_weights::<T>(n_theta);
        let dphi = T::TAU() / T::from_count(n_phi);
        let mut w = Vec::with_capacity(grid.npts);
        for (i, &fw) in fejer.iter().enumerate() {
            let s = grid.axis_coords[0][i].sin();
            for _ in 0..n_phi {
                w.push(fw / s * dphi);
            }
        }
        grid.chart_weight = w;
        Ok(Self {
            kind: BaseKind::Sphere,
            dim: 2,
            periods: periods.to_vec(),
            radius,
            scheme: DerivativeScheme::Spectral,
            grid: Arc::new(grid),
        })
    }

    pub fn kind(&self) -> BaseKind {
        self.kind
    }

    /// Intrinsic dimension n; the ambient space is `R^{n+1}`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim + 1
    }

    pub fn periods(&self) -> &[T] {
        &self.periods
    }

    /// Sphere radius (infinite for the torus).
    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }

    pub fn grid_shape(&self) -> &[usize] {
        &self.grid.shape
    }

    pub fn npts(&self) -> usize {
        self.grid.npts
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Width of the tubular neighborhood the graphs must stay in.
    pub fn tubular_width(&self) -> T {
        match self.kind {
            BaseKind::FlatTorus => T::infinity(),
            BaseKind::Sphere => self.radius,
        }
    }

    /// Largest absolute principal curvature of the base.
    pub fn max_principal_curvature(&self) -> T {
        match self.kind {
            BaseKind::FlatTorus => T::zero(),
            BaseKind::Sphere => T::one() / self.radius,
        }
    }

    /// n-volume of the base.
    pub fn volume(&self) -> T {
        match self.kind {
            BaseKind::FlatTorus => self.periods.iter().fold(T::one(), |a, &p| a * p),
            BaseKind::Sphere => T::lit(4.0) * T::PI() * self.radius * self.radius,
        }
    }

    /// Chart coordinates of a grid point.
    pub fn coords(&self, idx: usize) -> Vec<T> {
        let multi = self.grid.unravel(idx);
        multi
            .iter()
            .enumerate()
            .map(|(a, &i)| self.grid.axis_coords[a][i])
            .collect()
    }

    /// Parity of a covariant chart component with the given index tuple.
    pub fn component_parity(&self, indices: &[usize]) -> Parity {
        match self.kind {
            BaseKind::FlatTorus => Parity::Even,
            BaseKind::Sphere => {
                if indices.iter().filter(|&&i| i == 0).count() % 2 == 1 {
                    Parity::Odd
                } else {
                    Parity::Even
                }
            }
        }
    }

    /// Base metric `g0_ij` at a grid point.
    pub fn base_metric(&self, idx: usize) -> Vec<T> {
        let n = self.dim;
        let mut g = vec![T::zero(); n * n];
        match self.kind {
            BaseKind::FlatTorus => {
                for i in 0..n {
                    g[i * n + i] = T::one();
                }
            }
            BaseKind::Sphere => {
                let theta = self.coords(idx)[0];
                let r2 = self.radius * self.radius;
                g[0] = r2;
                g[3] = r2 * theta.sin() * theta.sin();
            }
        }
        g
    }

    /// Closed-form embedding data of the base at a grid point.
    pub fn base_point(&self, idx: usize) -> BasePoint<T> {
        let n = self.dim;
        let d = n + 1;
        let c = self.coords(idx);
        match self.kind {
            BaseKind::FlatTorus => {
                let mut position = c.clone();
                position.push(T::zero());
                let tangents = (0..n)
                    .map(|i| {
                        let mut e = vec![T::zero(); d];
                        e[i] = T::one();
                        e
                    })
                    .collect();
                let mut normal = vec![T::zero(); d];
                normal[n] = T::one();
                BasePoint {
                    position,
                    tangents,
                    second: vec![vec![T::zero(); d]; n * n],
                    normal,
                    normal_d: vec![vec![T::zero(); d]; n],
                    normal_dd: vec![vec![T::zero(); d]; n * n],
                }
            }
            BaseKind::Sphere => {
                let r = self.radius;
                let (st, ct) = c[0].sin_cos();
                let (sp, cp) = c[1].sin_cos();
                let unit = vec![st * cp, st * sp, ct];
                let d_theta = vec![ct * cp, ct * sp, -st];
                let d_phi = vec![-st * sp, st * cp, T::zero()];
                let d_tt: Vec<T> = unit.iter().map(|&v| -v).collect();
                let d_tp = vec![-ct * sp, ct * cp, T::zero()];
                let d_pp = vec![-st * cp, -st * sp, T::zero()];
                let scale = |v: &Vec<T>| v.iter().map(|&x| x * r).collect::<Vec<T>>();
                BasePoint {
                    position: scale(&unit),
                    tangents: vec![scale(&d_theta), scale(&d_phi)],
                    second: vec![scale(&d_tt), scale(&d_tp), scale(&d_tp), scale(&d_pp)],
                    normal: unit,
                    normal_d: vec![d_theta, d_phi],
                    normal_dd: vec![d_tt, d_tp.clone(), d_tp, d_pp],
                }
            }
        }
    }

    /// Ambient distance between two points of a graph over this base. On the
    /// torus the base directions are taken modulo their periods.
    pub fn ambient_distance(&self, a: &[T], b: &[T]) -> T {
        let mut s = T::zero();
        for k in 0..a.len() {
            let mut diff = (a[k] - b[k]).abs();
            if self.kind == BaseKind::FlatTorus && k < self.dim {
                let p = self.periods[k];
                diff = diff % p;
                if diff > p / T::lit(2.0) {
                    diff = p - diff;
                }
            }
            s = s + diff * diff;
        }
        s.sqrt()
    }

    /// Signed distance to the base and the foot point of the nearest-point
    /// projection. Negative on the interior side.
    pub fn tubular_projection(&self, x: &[T]) -> Result<(T, Vec<T>)> {
        if x.len() != self.dim + 1 {
            return Err(GraphError::ProjectionUndefined(format!(
                "point has {} coordinates, ambient dimension is {}",
                x.len(),
                self.dim + 1
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(GraphError::ProjectionUndefined("non-finite point".into()));
        }
        match self.kind {
            BaseKind::FlatTorus => {
                let mut foot = x.to_vec();
                let d = foot[self.dim];
                foot[self.dim] = T::zero();
                Ok((d, foot))
            }
            BaseKind::Sphere => {
                // the nearest-point map of a sphere is smooth away from its center
                let norm = x.iter().fold(T::zero(), |a, &v| a + v * v).sqrt();
                if norm == T::zero() {
                    return Err(GraphError::ProjectionUndefined("sphere center".into()));
                }
                let d = norm - self.radius;
                let foot = x.iter().map(|&v| self.radius * v / norm).collect();
                Ok((d, foot))
            }
        }
    }

    /// First derivative of a grid field along one chart axis.
    pub fn d1(&self, f: &[T], axis: usize, parity: Parity) -> Vec<T> {
        self.grid.d1(f, axis, parity)
    }
}

impl<T: Real> Grid<T> {
    fn new(
        shape: &[usize],
        periods: &[T],
        rules: &[AxisRule],
        coord: impl Fn(usize, usize) -> T,
    ) -> Self {
        let dim = shape.len();
        let npts = shape.iter().product();
        let mut strides = vec![1; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        let mut planner = FftPlanner::<T>::new();
        let axes = (0..dim)
            .map(|a| {
                let len = shape[a];
                let spacing = periods[a] / T::from_count(len);
                let (forward, inverse, wavenumbers) = if rules[a] == AxisRule::Spectral {
                    let wn = (0..len)
                        .map(|k| {
                            let signed = if k < len.div_ceil(2) {
                                k as f64
                            } else if len % 2 == 0 && k == len / 2 {
                                0.0
                            } else {
                                k as f64 - len as f64
                            };
                            T::lit(signed) * T::TAU() / periods[a]
                        })
                        .collect();
                    (
                        Some(planner.plan_fft_forward(len)),
                        Some(planner.plan_fft_inverse(len)),
                        wn,
                    )
                } else {
                    (None, None, Vec::new())
                };
                AxisOps {
                    rule: rules[a],
                    len,
                    stride: strides[a],
                    spacing,
                    wavenumbers,
                    forward,
                    inverse,
                }
            })
            .collect();
        let axis_coords = (0..dim)
            .map(|a| (0..shape[a]).map(|i| coord(a, i)).collect())
            .collect();
        Self {
            shape: shape.to_vec(),
            npts,
            axis_coords,
            chart_weight: Vec::new(),
            axes,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn npts(&self) -> usize {
        self.npts
    }

    pub fn axis_coords(&self, axis: usize) -> &[T] {
        &self.axis_coords[axis]
    }

    /// Chart quadrature weight per point; multiplied by `sqrt(det g)` it
    /// integrates against the Riemannian measure.
    pub fn chart_weight(&self) -> &[T] {
        &self.chart_weight
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.axes[axis].spacing
    }

    pub fn unravel(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            out[a] = idx % self.shape[a];
            idx /= self.shape[a];
        }
        out
    }

    /// Start offsets of all grid lines running along `axis`.
    fn line_starts(&self, axis: usize) -> impl Iterator<Item = usize> + '_ {
        let len = self.shape[axis];
        let stride = self.axes[axis].stride;
        let outer = self.npts / (len * stride);
        (0..outer).flat_map(move |o| (0..stride).map(move |i| o * len * stride + i))
    }

    pub fn d1(&self, f: &[T], axis: usize, parity: Parity) -> Vec<T> {
        assert_eq!(f.len(), self.npts, "field length");
        let ax = &self.axes[axis];
        let mut out = vec![T::zero(); self.npts];
        match ax.rule {
            AxisRule::Spectral => self.spectral_d1(f, axis, &mut out),
            AxisRule::PeriodicFd4 => {
                let n = ax.len as isize;
                let c = T::one() / (T::lit(12.0) * ax.spacing);
                for start in self.line_starts(axis) {
                    let at = |i: isize| f[start + (i.rem_euclid(n) as usize) * ax.stride];
                    for i in 0..n {
                        let v = (at(i - 2) - T::lit(8.0) * at(i - 1) + T::lit(8.0) * at(i + 1)
                            - at(i + 2))
                            * c;
                        out[start + i as usize * ax.stride] = v;
                    }
                }
            }
            AxisRule::PoleFd4 => {
                // axis 0 is colatitude, axis 1 longitude (sphere only)
                let nt = self.shape[0] as isize;
                let np = self.shape[1];
                let half = np / 2;
                let sign = match parity {
                    Parity::Even => T::one(),
                    Parity::Odd => -T::one(),
                };
                let c = T::one() / (T::lit(12.0) * ax.spacing);
                for j in 0..np {
                    let at = |i: isize| -> T {
                        if i < 0 {
                            sign * f[((-1 - i) as usize) * np + (j + half) % np]
                        } else if i >= nt {
                            sign * f[((2 * nt - 1 - i) as usize) * np + (j + half) % np]
                        } else {
                            f[i as usize * np + j]
                        }
                    };
                    for i in 0..nt {
                        out[i as usize * np + j] = (at(i - 2) - T::lit(8.0) * at(i - 1)
                            + T::lit(8.0) * at(i + 1)
                            - at(i + 2))
                            * c;
                    }
                }
            }
        }
        out
    }

    fn spectral_d1(&self, f: &[T], axis: usize, out: &mut [T]) {
        let ax = &self.axes[axis];
        let fwd = ax.forward.as_ref().expect("spectral axis has a plan");
        let inv = ax.inverse.as_ref().expect("spectral axis has a plan");
        let len = ax.len;
        let scale = T::one() / T::from_count(len);
        let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
        let mut scratch = vec![
            Complex::new(T::zero(), T::zero());
            fwd.get_inplace_scratch_len()
                .max(inv.get_inplace_scratch_len())
        ];
        let starts: Vec<usize> = self.line_starts(axis).collect();
        // Two real lines share one complex transform: the multiplier i*k is
        // odd in k, so it maps real signals to real signals.
        for pair in starts.chunks(2) {
            let a = pair[0];
            let b = pair.get(1).copied();
            for (k, z) in buf.iter_mut().enumerate() {
                let re = f[a + k * ax.stride];
                let im = b.map_or(T::zero(), |b| f[b + k * ax.stride]);
                *z = Complex::new(re, im);
            }
            fwd.process_with_scratch(&mut buf, &mut scratch);
            for (z, &w) in buf.iter_mut().zip(&ax.wavenumbers) {
                *z = Complex::new(-z.im * w, z.re * w);
            }
            inv.process_with_scratch(&mut buf, &mut scratch);
            for (k, z) in buf.iter().enumerate() {
                out[a + k * ax.stride] = z.re * scale;
                if let Some(b) = b {
                    out[b + k * ax.stride] = z.im * scale;
                }
            }
        }
    }
}

/// Fejer's first rule on `n` Chebyshev nodes `theta_i = (i + 1/2) pi / n`,
/// as weights for `int_0^pi f(theta) sin(theta) dtheta`.
pub fn fejer_weights<T: Real>(n: usize) -> Vec<T> {
    (0..n)
        .map(|i| {
            let theta = (T::from_count(i) + T::lit(0.5)) * T::PI() / T::from_count(n);
            let mut s = T::zero();
            for k in 1..=n / 2 {
                let kk = T::from_count(k);
                s = s + (T::lit(2.0) * kk * theta).cos() / (T::lit(4.0) * kk * kk - T::one());
            }
            T::lit(2.0) / T::from_count(n) * (T::one() - T::lit(2.0) * s)
        })
        .collect()
}
