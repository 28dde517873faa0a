//! Covariant tensor fields on a graph hypersurface and the Levi-Civita
//! calculus acting on them.
//!
//! Components are stored per grid point in row-major multi-index order. A
//! covariant derivative puts the new (derivative) slot first:
//! `(nabla T)_{j i1 .. im} = nabla_j T_{i1 .. im}`.

use std::sync::Arc;

use crate::base::BaseKind;
use crate::error::{GraphError, Result};
use crate::geometry::GeometryBundle;
use crate::height::check_finite;
use crate::scalar::{max_of, ordered_sum, Real};

/// Highest derivative order the grid operators are trusted for.
pub const MAX_DERIVATIVE_ORDER: usize = 4;

#[derive(Debug, Clone)]
pub struct TensorField<T: Real> {
    rank: usize,
    components: Vec<T>,
    bundle: Arc<GeometryBundle<T>>,
}

impl<T: Real> TensorField<T> {
    pub fn new(bundle: &Arc<GeometryBundle<T>>, rank: usize, components: Vec<T>) -> Result<Self> {
        let expected = bundle.npts() * bundle.dim().pow(rank as u32);
        if components.len() != expected {
            return Err(GraphError::ShapeMismatch {
                expected,
                actual: components.len(),
            });
        }
        check_finite(&components, "tensor components")?;
        Ok(Self::from_parts(Arc::clone(bundle), rank, components))
    }

    pub(crate) fn from_parts(bundle: Arc<GeometryBundle<T>>, rank: usize, components: Vec<T>) -> Self {
        Self {
            rank,
            components,
            bundle,
        }
    }

    pub fn scalar(bundle: &Arc<GeometryBundle<T>>, values: Vec<T>) -> Result<Self> {
        Self::new(bundle, 0, values)
    }

    /// Scalar field from a function of the chart coordinates.
    pub fn from_fn(bundle: &Arc<GeometryBundle<T>>, f: impl Fn(&[T]) -> T) -> Result<Self> {
        let base = bundle.base();
        let values = (0..base.npts()).map(|p| f(&base.coords(p))).collect();
        Self::scalar(bundle, values)
    }

    pub fn constant(bundle: &Arc<GeometryBundle<T>>, c: T) -> Self {
        Self::from_parts(Arc::clone(bundle), 0, vec![c; bundle.npts()])
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn bundle(&self) -> &Arc<GeometryBundle<T>> {
        &self.bundle
    }

    pub fn components(&self) -> &[T] {
        &self.components
    }

    /// Components per grid point, `n^rank`.
    pub fn ncomp(&self) -> usize {
        self.bundle.dim().pow(self.rank as u32)
    }

    pub fn at(&self, p: usize) -> &[T] {
        let c = self.ncomp();
        &self.components[p * c..(p + 1) * c]
    }

    /// One component as a grid field.
    pub fn component_field(&self, c: usize) -> Vec<T> {
        let nc = self.ncomp();
        (0..self.bundle.npts()).map(|p| self.components[p * nc + c]).collect()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self::from_parts(
            Arc::clone(&self.bundle),
            self.rank,
            self.components.iter().map(|&v| v * factor).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a - b)
    }

    fn combine(&self, other: &Self, op: impl Fn(T, T) -> T) -> Result<Self> {
        if self.rank != other.rank || self.components.len() != other.components.len() {
            return Err(GraphError::ShapeMismatch {
                expected: self.components.len(),
                actual: other.components.len(),
            });
        }
        Ok(Self::from_parts(
            Arc::clone(&self.bundle),
            self.rank,
            self.components
                .iter()
                .zip(&other.components)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        ))
    }

    /// Pointwise metric norm `sqrt(g^{i1 j1} .. g^{im jm} T_I T_J)`.
    pub fn pointwise_norms(&self) -> Vec<T> {
        let n = self.bundle.dim();
        let m = self.rank;
        (0..self.bundle.npts())
            .map(|p| {
                let t = self.at(p);
                if m == 0 {
                    return t[0].abs();
                }
                let raised = raise_all(t, self.bundle.g_inv_at(p), n, m);
                let s = t.iter().zip(&raised).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
                s.max(T::zero()).sqrt()
            })
            .collect()
    }

    /// Full contraction `g^{ij} T_{ij ..}` of the first two slots.
    pub fn trace_first_pair(&self) -> Result<Self> {
        if self.rank < 2 {
            return Err(GraphError::InvalidField(format!(
                "trace needs rank >= 2, got {}",
                self.rank
            )));
        }
        let n = self.bundle.dim();
        let rest = n.pow(self.rank as u32 - 2);
        let mut out = Vec::with_capacity(self.bundle.npts() * rest);
        for p in 0..self.bundle.npts() {
            let t = self.at(p);
            let gi = self.bundle.g_inv_at(p);
            for r in 0..rest {
                let mut s = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        s = s + gi[i * n + j] * t[(i * n + j) * rest + r];
                    }
                }
                out.push(s);
            }
        }
        Ok(Self::from_parts(Arc::clone(&self.bundle), self.rank - 2, out))
    }

    fn check_finite(&self) -> Result<()> {
        check_finite(&self.components, "tensor components")
    }
}

/// Raises every slot of a covariant component block with `g^-1`.
fn raise_all<T: Real>(t: &[T], gi: &[T], n: usize, m: usize) -> Vec<T> {
    let mut cur = t.to_vec();
    let mut next = vec![T::zero(); cur.len()];
    for slot in 0..m {
        let stride = n.pow((m - 1 - slot) as u32);
        for (idx, out) in next.iter_mut().enumerate() {
            let i = (idx / stride) % n;
            let base = idx - i * stride;
            let mut s = T::zero();
            for k in 0..n {
                s = s + gi[i * n + k] * cur[base + k * stride];
            }
            *out = s;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Decodes a flat component index into its multi-index.
pub fn multi_index(mut c: usize, n: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = c % n;
        c /= n;
    }
    idx
}

fn require_gamma<T: Real>(bundle: &GeometryBundle<T>) -> Result<()> {
    if bundle.has_christoffel() {
        Ok(())
    } else {
        Err(GraphError::IncompleteBundle("christoffel symbols"))
    }
}

/// Levi-Civita derivative of a covariant field, one Christoffel correction
/// per slot: `nabla_j T_I = d_j T_I - sum_s Gamma^k_{j i_s} T_{I[s -> k]}`.
pub fn covariant_derivative<T: Real>(t: &TensorField<T>) -> Result<TensorField<T>> {
    let bundle = t.bundle();
    require_gamma(bundle)?;
    t.check_finite()?;
    let base = bundle.base();
    let n = bundle.dim();
    let m = t.rank();
    let nc = t.ncomp();
    let npts = bundle.npts();
    let out_nc = nc * n;
    let mut out = vec![T::zero(); npts * out_nc];

    for c in 0..nc {
        let multi = multi_index(c, n, m);
        let field = t.component_field(c);
        let parity = base.component_parity(&multi);
        for j in 0..n {
            let d = base.d1(&field, j, parity);
            for p in 0..npts {
                out[p * out_nc + j * nc + c] = d[p];
            }
        }
    }
    if m > 0 {
        for p in 0..npts {
            let gamma = bundle.gamma_at(p).expect("checked above");
            let tp = t.at(p);
            let o = &mut out[p * out_nc..(p + 1) * out_nc];
            for j in 0..n {
                for c in 0..nc {
                    let mut corr = T::zero();
                    for slot in 0..m {
                        let stride = n.pow((m - 1 - slot) as u32);
                        let i = (c / stride) % n;
                        let rest = c - i * stride;
                        for k in 0..n {
                            corr = corr + gamma[(k * n + j) * n + i] * tp[rest + k * stride];
                        }
                    }
                    o[j * nc + c] = o[j * nc + c] - corr;
                }
            }
        }
    }
    Ok(TensorField::from_parts(Arc::clone(bundle), m + 1, out))
}

/// `nabla^k T`, refused beyond fourth order.
pub fn iterated_covariant_derivative<T: Real>(t: &TensorField<T>, k: usize) -> Result<TensorField<T>> {
    if k == 0 || k > MAX_DERIVATIVE_ORDER {
        return Err(GraphError::UnsupportedOrder {
            requested: k,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    let mut cur = covariant_derivative(t)?;
    for _ in 1..k {
        cur = covariant_derivative(&cur)?;
    }
    Ok(cur)
}

/// Covariant Hessian `nabla^2 u` and Laplace-Beltrami `g^ij nabla_i nabla_j u`.
pub fn hessian_and_laplacian<T: Real>(u: &TensorField<T>) -> Result<(TensorField<T>, TensorField<T>)> {
    if u.rank() != 0 {
        return Err(GraphError::InvalidField(format!(
            "hessian needs a scalar field, got rank {}",
            u.rank()
        )));
    }
    let hess = iterated_covariant_derivative(u, 2)?;
    let lap = hess.trace_first_pair()?;
    Ok((hess, lap))
}

/// `int_M u dmu` by the grid quadrature.
pub fn integrate_dmu<T: Real>(u: &TensorField<T>) -> Result<T> {
    if u.rank() != 0 {
        return Err(GraphError::InvalidField(format!(
            "integrand must be a scalar field, got rank {}",
            u.rank()
        )));
    }
    let w = u.bundle().measure_weights();
    Ok(ordered_sum(u.components().iter().zip(&w).map(|(&a, &b)| a * b)))
}

/// `Delta B - nabla^2 H - H B g^-1 B + |B|^2 B`, which vanishes identically on
/// a hypersurface of Euclidean space.
pub fn simons_residual<T: Real>(bundle: &Arc<GeometryBundle<T>>) -> Result<TensorField<T>> {
    require_gamma(bundle)?;
    let n = bundle.dim();
    let b = bundle.b_field();
    let lap_b = iterated_covariant_derivative(&b, 2)?.trace_first_pair()?;
    let (hess_h, _) = hessian_and_laplacian(&bundle.h_field())?;
    let mut out = Vec::with_capacity(bundle.npts() * n * n);
    for p in 0..bundle.npts() {
        let bp = bundle.b_at(p);
        let gi = bundle.g_inv_at(p);
        let h = bundle.mean_curvature()[p];
        let b_up = raise_all(bp, gi, n, 2);
        let norm2 = bp.iter().zip(&b_up).fold(T::zero(), |a, (&x, &y)| a + x * y);
        let lb = lap_b.at(p);
        let hh = hess_h.at(p);
        for i in 0..n {
            for j in 0..n {
                let mut bgb = T::zero();
                for l in 0..n {
                    for s in 0..n {
                        bgb = bgb + bp[i * n + l] * gi[l * n + s] * bp[s * n + j];
                    }
                }
                let ij = i * n + j;
                out.push(lb[ij] - hh[ij] - h * bgb + norm2 * bp[ij]);
            }
        }
    }
    Ok(TensorField::from_parts(Arc::clone(bundle), 2, out))
}

/// Sup over the grid of the metric norm of the Simons residual.
pub fn simons_residual_sup<T: Real>(bundle: &Arc<GeometryBundle<T>>) -> Result<T> {
    Ok(max_of(simons_residual(bundle)?.pointwise_norms()))
}

/// `max |nabla_i B_jk - nabla_j B_ik|` over grid points and index triples.
pub fn codazzi_residual<T: Real>(bundle: &Arc<GeometryBundle<T>>) -> Result<T> {
    require_gamma(bundle)?;
    let n = bundle.dim();
    let db = covariant_derivative(&bundle.b_field())?;
    Ok(max_of((0..bundle.npts()).map(|p| {
        let c = db.at(p);
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max((c[(i * n + j) * n + k] - c[(j * n + i) * n + k]).abs());
                }
            }
        }
        worst
    })))
}

/// Smooth non-symmetric scalar used to exercise the divergence theorem.
pub fn divergence_probe<T: Real>(bundle: &Arc<GeometryBundle<T>>) -> TensorField<T> {
    let base = bundle.base();
    let two_pi = T::lit(2.0) * T::PI();
    let values = (0..base.npts())
        .map(|p| {
            let x = base.coords(p);
            match base.kind() {
                BaseKind::FlatTorus => {
                    let per = base.periods();
                    let last = x.len() - 1;
                    let waves = x
                        .iter()
                        .zip(per)
                        .fold(T::zero(), |a, (&xi, &l)| a + (two_pi * xi / l).cos());
                    waves + (two_pi * (x[0] / per[0] + x[last] / per[last])).sin()
                }
                BaseKind::Sphere => {
                    let (st, ct) = x[0].sin_cos();
                    ct + st * ct * x[1].cos()
                }
            }
        })
        .collect();
    TensorField::from_parts(Arc::clone(bundle), 0, values)
}

/// `|int_M Delta u dmu|` for a given scalar field.
pub fn divergence_residual<T: Real>(u: &TensorField<T>) -> Result<T> {
    let (_, lap) = hessian_and_laplacian(u)?;
    Ok(integrate_dmu(&lap)?.abs())
}
