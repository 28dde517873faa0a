//! Lebesgue, Sobolev, fractional and Holder norms of grid tensor fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base::BaseManifold;
use crate::calculus::{iterated_covariant_derivative, TensorField, MAX_DERIVATIVE_ORDER};
use crate::error::{GraphError, Result};
use crate::scalar::{max_of, ordered_sum, Real};

/// Largest grid on which the quadratic pair sums are evaluated.
pub const MAX_PAIR_POINTS: usize = 1 << 16;

/// Which components enter the Holder difference quotient of a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HolderConvention {
    /// Chart components `T_I`.
    #[default]
    Chart,
    /// Ambient components of the tensor extended by tangential projection.
    Ambient,
}

fn check_p<T: Real>(p: T) -> Result<()> {
    if p.is_nan() || p < T::one() {
        return Err(GraphError::InvalidExponent(format!("p = {p} is not in [1, inf]")));
    }
    Ok(())
}

/// `(int |T|^p dmu)^(1/p)` with the metric pointwise norm; `p = inf` gives
/// the grid sup.
pub fn lp_norm<T: Real>(t: &TensorField<T>, p: T) -> Result<T> {
    check_p(p)?;
    let norms = t.pointwise_norms();
    if p.is_infinite() {
        return Ok(max_of(norms));
    }
    let w = t.bundle().measure_weights();
    let s = ordered_sum(norms.iter().zip(&w).map(|(&a, &b)| a.powf(p) * b));
    Ok(s.powf(p.recip()))
}

/// Volume-normalized `(avg |T|^p)^(1/p)`.
pub fn mean_lp_norm<T: Real>(t: &TensorField<T>, p: T) -> Result<T> {
    let v = t.bundle().volume();
    let raw = lp_norm(t, p)?;
    if p.is_infinite() {
        Ok(raw)
    } else {
        Ok(raw / v.powf(p.recip()))
    }
}

/// `sum_{j <= k} ||nabla^j T||_p`.
pub fn wkp_norm<T: Real>(t: &TensorField<T>, k: usize, p: T) -> Result<T> {
    check_p(p)?;
    if k > MAX_DERIVATIVE_ORDER {
        return Err(GraphError::UnsupportedOrder {
            requested: k,
            max: MAX_DERIVATIVE_ORDER,
        });
    }
    let mut total = lp_norm(t, p)?;
    for j in 1..=k {
        total = total + lp_norm(&iterated_covariant_derivative(t, j)?, p)?;
    }
    Ok(total)
}

fn check_pair_cap(npts: usize) -> Result<()> {
    if npts > MAX_PAIR_POINTS {
        return Err(GraphError::InvalidGrid(format!(
            "{npts} points exceed the pair-sum cap of {MAX_PAIR_POINTS}"
        )));
    }
    Ok(())
}

/// Gagliardo seminorm `([u]_{s,p}^p = int int |u(x)-u(y)|^p / |x-y|^(n+sp))^(1/p)`
/// over ordered pairs of distinct grid points with ambient distances.
pub fn gagliardo_seminorm<T: Real>(u: &TensorField<T>, s: T, p: T) -> Result<T> {
    if u.rank() != 0 {
        return Err(GraphError::InvalidField("Gagliardo seminorm needs a scalar field".into()));
    }
    if !(s > T::zero() && s < T::one()) {
        return Err(GraphError::InvalidExponent(format!("s = {s} is not in (0, 1)")));
    }
    check_p(p)?;
    if p.is_infinite() {
        return Err(GraphError::InvalidExponent("p must be finite".into()));
    }
    let m = u.bundle();
    let npts = m.npts();
    check_pair_cap(npts)?;
    let base = m.base();
    let d = m.dim() + 1;
    let pos = m.embedding();
    let w = m.measure_weights();
    let vals = u.components();
    let expo = T::from_count(m.dim()) + s * p;
    let rows: Vec<T> = (0..npts)
        .into_par_iter()
        .map(|i| {
            let xi = &pos[i * d..(i + 1) * d];
            let mut acc = T::zero();
            for j in 0..npts {
                if j == i {
                    continue;
                }
                let r = base.ambient_distance(xi, &pos[j * d..(j + 1) * d]);
                acc = acc + (vals[i] - vals[j]).abs().powf(p) / r.powf(expo) * w[j];
            }
            acc * w[i]
        })
        .collect();
    Ok(ordered_sum(rows).powf(p.recip()))
}

/// `max_{x != y} sum_c |F_c(x) - F_c(y)| / |x - y|^alpha` for a vector-valued
/// grid function with `ncomp` components per point.
pub fn pair_holder_seminorm<T: Real>(
    base: &BaseManifold<T>,
    positions: &[T],
    comps: &[T],
    ncomp: usize,
    alpha: T,
) -> Result<T> {
    if !(alpha > T::zero() && alpha <= T::one()) {
        return Err(GraphError::InvalidExponent(format!("alpha = {alpha} is not in (0, 1]")));
    }
    let npts = comps.len() / ncomp.max(1);
    check_pair_cap(npts)?;
    let d = positions.len() / npts.max(1);
    let rows: Vec<T> = (0..npts)
        .into_par_iter()
        .map(|i| {
            let xi = &positions[i * d..(i + 1) * d];
            let ci = &comps[i * ncomp..(i + 1) * ncomp];
            let mut best = T::zero();
            for j in (i + 1)..npts {
                let r = base.ambient_distance(xi, &positions[j * d..(j + 1) * d]);
                if r == T::zero() {
                    continue;
                }
                let cj = &comps[j * ncomp..(j + 1) * ncomp];
                let diff = ci.iter().zip(cj).fold(T::zero(), |a, (&x, &y)| a + (x - y).abs());
                let q = diff / r.powf(alpha);
                if q > best {
                    best = q;
                }
            }
            best
        })
        .collect();
    Ok(max_of(rows))
}

/// Holder norm `sup |T| + [T]_alpha` and the seminorm alone.
pub fn holder_norm<T: Real>(t: &TensorField<T>, alpha: T, convention: HolderConvention) -> Result<(T, T)> {
    let m = t.bundle();
    let comps = match convention {
        HolderConvention::Chart => t.components().to_vec(),
        HolderConvention::Ambient => ambient_components(t),
    };
    let ncomp = comps.len() / m.npts();
    let semi = pair_holder_seminorm(m.base(), m.embedding(), &comps, ncomp, alpha)?;
    Ok((max_of(t.pointwise_norms()) + semi, semi))
}

/// Components of `T(P ., .., P .)` in ambient coordinates, where `P` is the
/// tangential projection: `T_{a1..am} = T_I e^{i1}_{a1} .. e^{im}_{am}` with
/// the dual frame `e^i = g^ij d_j phi`.
pub fn ambient_components<T: Real>(t: &TensorField<T>) -> Vec<T> {
    let m = t.bundle();
    let n = m.dim();
    let d = n + 1;
    let rank = t.rank();
    let out_nc = d.pow(rank as u32);
    let mut out = Vec::with_capacity(m.npts() * out_nc);
    for p in 0..m.npts() {
        let gi = m.g_inv_at(p);
        let tan = m.tangents_at(p);
        let mut dual = vec![T::zero(); n * d];
        for i in 0..n {
            for a in 0..d {
                let mut s = T::zero();
                for j in 0..n {
                    s = s + gi[i * n + j] * tan[j * d + a];
                }
                dual[i * d + a] = s;
            }
        }
        // contract one slot at a time, chart index -> ambient index
        let mut cur = t.at(p).to_vec();
        let mut shape_chart = rank;
        for _ in 0..rank {
            let inner = n.pow((shape_chart - 1) as u32);
            let done = cur.len() / (n * inner);
            let mut next = vec![T::zero(); done * d * inner];
            for o in 0..done {
                for a in 0..d {
                    for r in 0..inner {
                        let mut s = T::zero();
                        for i in 0..n {
                            s = s + cur[(o * n + i) * inner + r] * dual[i * d + a];
                        }
                        next[(o * d + a) * inner + r] = s;
                    }
                }
            }
            cur = next;
            shape_chart -= 1;
        }
        out.extend_from_slice(&cur);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{christoffel, embedded_graph_geometry, flat_graph_geometry};
    use crate::height::HeightField;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn flat(shape: &[usize]) -> Arc<crate::geometry::GeometryBundle<f64>> {
        let base = BaseManifold::flat_torus(shape).unwrap();
        Arc::new(christoffel(flat_graph_geometry(&HeightField::zero(&base)).unwrap()).unwrap())
    }

    #[test]
    fn flat_lp_values() {
        let m = flat(&[32, 32]);
        let one = TensorField::constant(&m, 1.0);
        assert!((lp_norm(&one, 2.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        let u = TensorField::from_fn(&m, |x| x[0].sin()).unwrap();
        assert!((lp_norm(&u, 2.0).unwrap() - PI * 2f64.sqrt()).abs() < 1e-12);
        assert!((wkp_norm(&u, 1, 2.0).unwrap() - 2.0 * PI * 2f64.sqrt()).abs() < 1e-11);
        assert!((lp_norm(&u, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lp_norm(&u, 0.5).unwrap_err().kind(), "invalid-exponent");
        assert_eq!(wkp_norm(&u, 5, 2.0).unwrap_err().kind(), "unsupported-order");
    }

    #[test]
    fn umbilic_b_norm() {
        let base = BaseManifold::sphere(1.0, 64, 128).unwrap();
        let m = Arc::new(embedded_graph_geometry(&HeightField::zero(&base)).unwrap());
        let b = m.b_field();
        let expect = 2f64.sqrt() * (4.0 * PI).sqrt();
        assert!((lp_norm(&b, 2.0).unwrap() - expect).abs() < 1e-6);
    }

    #[test]
    fn gagliardo_basics() {
        let m = flat(&[16, 16]);
        let c = TensorField::constant(&m, 3.0);
        assert_eq!(gagliardo_seminorm(&c, 0.5, 2.0).unwrap(), 0.0);
        let u = TensorField::from_fn(&m, |x| x[0].sin()).unwrap();
        let a = gagliardo_seminorm(&u, 0.5, 2.0).unwrap();
        let b = gagliardo_seminorm(&u.scaled(2.0), 0.5, 2.0).unwrap();
        assert!((b - 2.0 * a).abs() <= 1e-12 * b);
        assert_eq!(gagliardo_seminorm(&u, 1.0, 2.0).unwrap_err().kind(), "invalid-exponent");
    }

    #[test]
    fn gagliardo_self_convergence() {
        let a = {
            let m = flat(&[32, 32]);
            gagliardo_seminorm(&TensorField::from_fn(&m, |x| x[0].sin()).unwrap(), 0.5, 2.0).unwrap()
        };
        let b = {
            let m = flat(&[48, 48]);
            gagliardo_seminorm(&TensorField::from_fn(&m, |x| x[0].sin()).unwrap(), 0.5, 2.0).unwrap()
        };
        assert!((a - b).abs() / b < 0.05, "{a} vs {b}");
    }

    #[test]
    fn holder_of_a_linear_function_on_a_patch() {
        // x_1 on the patch [0, pi)^2, where minimum-image and chordal
        // distances coincide
        let base = BaseManifold::<f64>::flat_torus(&[32, 32]).unwrap();
        let mut pos = Vec::new();
        let mut vals = Vec::new();
        for p in 0..base.npts() {
            let x = base.coords(p);
            if x[0] < PI && x[1] < PI {
                pos.extend_from_slice(&[x[0], x[1], 0.0]);
                vals.push(x[0]);
            }
        }
        let s = pair_holder_seminorm(&base, &pos, &vals, 1, 1.0).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn holder_homogeneity_and_constants() {
        let m = flat(&[16, 16]);
        let c = TensorField::constant(&m, -2.0);
        assert_eq!(holder_norm(&c, 0.5, HolderConvention::Chart).unwrap(), (2.0, 0.0));
        let u = TensorField::from_fn(&m, |x| (x[0] + x[1]).cos()).unwrap();
        let (_, a) = holder_norm(&u, 0.5, HolderConvention::Chart).unwrap();
        let (_, b) = holder_norm(&u.scaled(3.0), 0.5, HolderConvention::Chart).unwrap();
        assert!((b - 3.0 * a).abs() <= 1e-12 * b);
        assert_eq!(
            holder_norm(&u, 0.0, HolderConvention::Chart).unwrap_err().kind(),
            "invalid-exponent"
        );
    }

    #[test]
    fn ambient_components_of_the_metric_are_the_projection() {
        let base = BaseManifold::sphere(1.0, 8, 16).unwrap();
        let m = Arc::new(embedded_graph_geometry(&HeightField::zero(&base)).unwrap());
        let g = TensorField::new(&m, 2, m.g().to_vec()).unwrap();
        let amb = ambient_components(&g);
        for p in 0..m.npts() {
            let x = m.embedding_at(p);
            for a in 0..3 {
                for b in 0..3 {
                    let e: f64 = if a == b { 1.0 } else { 0.0 } - x[a] * x[b];
                    assert!((amb[p * 9 + a * 3 + b] - e).abs() < 1e-12);
                }
            }
        }
    }
}
