//! Pointwise geometry of a graph hypersurface `M = { x + psi(x) nu_0(x) }`.
//!
//! Conventions: the unit normal points to the same side as the base normal
//! (outward on the sphere), `B_ij = -<d_i d_j phi, nu>` and `H = g^ij B_ij`,
//! so a round sphere has positive mean curvature.

use std::io::{self, Write};
use std::sync::Arc;

use crate::base::{BaseKind, BaseManifold};
use crate::calculus::TensorField;
use crate::error::{GraphError, Result};
use crate::height::{base_metric_inverse, check_finite, HeightField};
use crate::linalg::{det, dot, generalized_cross, inverse};
use crate::scalar::{max_of, Real};

/// Per-grid-point geometric data of a hypersurface.
#[derive(Debug, Clone)]
pub struct GeometryBundle<T: Real> {
    base: BaseManifold<T>,
    n: usize,
    psi: Vec<T>,
    embedding: Vec<T>,
    tangents: Vec<T>,
    g: Vec<T>,
    g_inv: Vec<T>,
    sqrt_det_g: Vec<T>,
    normal: Vec<T>,
    b: Vec<T>,
    h: Vec<T>,
    gamma: Option<Vec<T>>,
}

impl<T: Real> GeometryBundle<T> {
    pub fn base(&self) -> &BaseManifold<T> {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn npts(&self) -> usize {
        self.base.npts()
    }

    /// Height values the surface was built from.
    pub fn psi(&self) -> &[T] {
        &self.psi
    }

    pub fn embedding_at(&self, p: usize) -> &[T] {
        let d = self.n + 1;
        &self.embedding[p * d..(p + 1) * d]
    }

    /// All embedding positions, `npts x (n+1)`.
    pub fn embedding(&self) -> &[T] {
        &self.embedding
    }

    /// `d_i phi` at a point as `n` rows of length `n+1`.
    pub fn tangents_at(&self, p: usize) -> &[T] {
        let d = self.n + 1;
        let s = self.n * d;
        &self.tangents[p * s..(p + 1) * s]
    }

    pub fn g_at(&self, p: usize) -> &[T] {
        let s = self.n * self.n;
        &self.g[p * s..(p + 1) * s]
    }

    pub fn g_inv_at(&self, p: usize) -> &[T] {
        let s = self.n * self.n;
        &self.g_inv[p * s..(p + 1) * s]
    }

    pub fn sqrt_det_g(&self) -> &[T] {
        &self.sqrt_det_g
    }

    pub fn normal_at(&self, p: usize) -> &[T] {
        let d = self.n + 1;
        &self.normal[p * d..(p + 1) * d]
    }

    pub fn b_at(&self, p: usize) -> &[T] {
        let s = self.n * self.n;
        &self.b[p * s..(p + 1) * s]
    }

    /// Second fundamental form components, `npts x n x n`.
    pub fn b(&self) -> &[T] {
        &self.b
    }

    pub fn g(&self) -> &[T] {
        &self.g
    }

    pub fn mean_curvature(&self) -> &[T] {
        &self.h
    }

    /// `Gamma^i_jk` at a point, index `(i * n + j) * n + k`.
    pub fn gamma_at(&self, p: usize) -> Option<&[T]> {
        let s = self.n * self.n * self.n;
        self.gamma.as_ref().map(|g| &g[p * s..(p + 1) * s])
    }

    pub fn has_christoffel(&self) -> bool {
        self.gamma.is_some()
    }

    /// Riemannian quadrature weight `sqrt(det g) * w_chart` per point.
    pub fn measure_weights(&self) -> Vec<T> {
        self.sqrt_det_g
            .iter()
            .zip(self.base.grid().chart_weight())
            .map(|(&a, &w)| a * w)
            .collect()
    }

    pub fn volume(&self) -> T {
        crate::scalar::ordered_sum(self.measure_weights())
    }

    /// Second fundamental form as a rank-2 field.
    pub fn b_field(self: &Arc<Self>) -> TensorField<T> {
        TensorField::from_parts(Arc::clone(self), 2, self.b.clone())
    }

    /// Mean curvature as a scalar field.
    pub fn h_field(self: &Arc<Self>) -> TensorField<T> {
        TensorField::from_parts(Arc::clone(self), 0, self.h.clone())
    }

    /// `max |H - g^ij B_ij|` over the grid.
    pub fn trace_identity_residual(&self) -> T {
        let n = self.n;
        max_of((0..self.npts()).map(|p| {
            let gi = self.g_inv_at(p);
            let b = self.b_at(p);
            let tr = (0..n * n).fold(T::zero(), |acc, k| acc + gi[k] * b[k]);
            (self.h[p] - tr).abs()
        }))
    }

    /// `max |g g^-1 - I|` over the grid.
    pub fn inverse_residual(&self) -> T {
        let n = self.n;
        max_of((0..self.npts()).map(|p| {
            let g = self.g_at(p);
            let gi = self.g_inv_at(p);
            let mut worst = T::zero();
            for i in 0..n {
                for j in 0..n {
                    let s = (0..n).fold(T::zero(), |acc, k| acc + g[i * n + k] * gi[k * n + j]);
                    let e = if i == j { T::one() } else { T::zero() };
                    worst = worst.max((s - e).abs());
                }
            }
            worst
        }))
    }

    /// Writes one CSV row per grid point: index, embedding, `g_ij`, `B_ij`,
    /// `H`, `sqrt(det g)` and, when given, the graph-map Jacobian.
    pub fn write_csv<W: Write>(&self, mut w: W, jacobian: Option<&JacobianData<T>>) -> io::Result<()> {
        let n = self.n;
        let d = n + 1;
        let mut header = vec!["index".to_string()];
        header.extend((0..d).map(|k| format!("x{k}")));
        for i in 0..n {
            for j in 0..n {
                header.push(format!("g{i}{j}"));
            }
        }
        for i in 0..n {
            for j in 0..n {
                header.push(format!("b{i}{j}"));
            }
        }
        header.push("h".into());
        header.push("sqrt_det_g".into());
        if jacobian.is_some() {
            header.push("jpsi".into());
        }
        writeln!(w, "{}", header.join(","))?;
        let mut line = String::new();
        for p in 0..self.npts() {
            line.clear();
            line.push_str(&p.to_string());
            for v in self
                .embedding_at(p)
                .iter()
                .chain(self.g_at(p))
                .chain(self.b_at(p))
                .chain([self.h[p], self.sqrt_det_g[p]].iter())
            {
                line.push(',');
                line.push_str(&v.to_string());
            }
            if let Some(j) = jacobian {
                line.push(',');
                line.push_str(&j.jpsi[p].to_string());
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Differential of the graph map `Psi(x) = x + psi(x) nu_0(x)` and its
/// Jacobian determinant relative to the base measure.
#[derive(Debug, Clone)]
pub struct JacobianData<T: Real> {
    n: usize,
    /// Ambient `(n+1) x (n+1)` matrix per point, row-major.
    pub dpsi: Vec<T>,
    pub jpsi: Vec<T>,
}

impl<T: Real> JacobianData<T> {
    pub fn dpsi_at(&self, p: usize) -> &[T] {
        let d = self.n + 1;
        &self.dpsi[p * d * d..(p + 1) * d * d]
    }

    pub fn min(&self) -> T {
        self.jpsi.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.jpsi.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

struct HeightDerivatives<T> {
    grad: Vec<Vec<T>>,
    /// `d_i d_j psi`, index `i * n + j`, symmetric by construction.
    hess: Vec<Vec<T>>,
}

fn height_derivatives<T: Real>(psi: &HeightField<T>) -> HeightDerivatives<T> {
    let base = psi.base();
    let n = base.dim();
    let grad = psi.gradient();
    let mut hess = vec![Vec::new(); n * n];
    for i in 0..n {
        for j in i..n {
            // the chart derivative of a scalar is parity-even only along
            // longitude; d_theta psi flips parity
            let parity = base.component_parity(&[j]);
            let h = base.d1(&grad[j], i, parity);
            if i != j {
                hess[j * n + i] = h.clone();
            }
            hess[i * n + j] = h;
        }
    }
    HeightDerivatives { grad, hess }
}

/// Geometry of the graph of `psi` over a flat torus from the closed-form
/// graph formulas: `g = I + d psi (x) d psi`, `nu = (-grad psi, 1)/W`,
/// `B = -Hess psi / W` with `W = sqrt(1 + |grad psi|^2)`.
pub fn flat_graph_geometry<T: Real>(psi: &HeightField<T>) -> Result<GeometryBundle<T>> {
    let base = psi.base();
    if base.kind() != BaseKind::FlatTorus {
        return Err(GraphError::UnsupportedBase(
            "closed-form graph geometry needs a flat torus".into(),
        ));
    }
    check_finite(psi.values(), "psi")?;
    let n = base.dim();
    let d = n + 1;
    let npts = base.npts();
    let HeightDerivatives { grad, hess } = height_derivatives(psi);

    let mut out = Storage::new(n, npts);
    for p in 0..npts {
        let gp: Vec<T> = (0..n).map(|i| grad[i][p]).collect();
        let w2 = T::one() + dot(&gp, &gp);
        let w = w2.sqrt();
        let mut x = base.coords(p);
        x.push(psi.values()[p]);
        out.embedding.extend_from_slice(&x);
        for i in 0..n {
            for k in 0..d {
                let e = if k == i { T::one() } else { T::zero() };
                out.tangents.push(if k == n { gp[i] } else { e });
            }
        }
        let mut h = T::zero();
        let mut ginv = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { T::one() } else { T::zero() };
                out.g.push(delta + gp[i] * gp[j]);
                // Sherman-Morrison inverse of I + a a^T
                ginv[i * n + j] = delta - gp[i] * gp[j] / w2;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let bij = -hess[i * n + j][p] / w;
                out.b.push(bij);
                h = h + ginv[i * n + j] * bij;
            }
        }
        out.g_inv.extend_from_slice(&ginv);
        out.sqrt_det_g.push(w);
        for (k, &gk) in gp.iter().enumerate().take(n) {
            let _ = k;
            out.normal.push(-gk / w);
        }
        out.normal.push(T::one() / w);
        out.h.push(h);
    }
    Ok(out.finish(base.clone(), psi.values().to_vec()))
}

/// Geometry of `phi = x + psi nu_0` assembled from its first and second
/// derivatives: `g_ij = <d_i phi, d_j phi>`, `nu` the unit normal to the
/// tangent frame, `B_ij = -<d_i d_j phi, nu>`.
pub fn embedded_graph_geometry<T: Real>(psi: &HeightField<T>) -> Result<GeometryBundle<T>> {
    let base = psi.base();
    check_finite(psi.values(), "psi")?;
    let width = base.tubular_width();
    let sup = psi.sup_abs();
    if sup >= width {
        return Err(GraphError::LeavesTubularNeighborhood {
            max_abs: sup.to_f64_lossy(),
            width: width.to_f64_lossy(),
        });
    }
    let n = base.dim();
    let d = n + 1;
    let npts = base.npts();
    let HeightDerivatives { grad, hess } = height_derivatives(psi);

    let mut out = Storage::new(n, npts);
    for p in 0..npts {
        let bp = base.base_point(p);
        let s = psi.values()[p];
        let mut pos = bp.position.clone();
        for k in 0..d {
            pos[k] = pos[k] + s * bp.normal[k];
        }
        let frame: Vec<Vec<T>> = (0..n)
            .map(|i| {
                (0..d)
                    .map(|k| bp.tangents[i][k] + grad[i][p] * bp.normal[k] + s * bp.normal_d[i][k])
                    .collect()
            })
            .collect();
        let mut g = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = dot(&frame[i], &frame[j]);
            }
        }
        let detg = det(&g, n);
        if !(detg > T::zero()) {
            return Err(GraphError::DegenerateGraph {
                point: p,
                det: detg.to_f64_lossy(),
            });
        }
        let ginv = inverse(&g, n).ok_or(GraphError::DegenerateGraph {
            point: p,
            det: detg.to_f64_lossy(),
        })?;
        let rows: Vec<&[T]> = frame.iter().map(Vec::as_slice).collect();
        let mut nu = generalized_cross(&rows);
        let len = dot(&nu, &nu).sqrt();
        let orient = if dot(&nu, &bp.normal) < T::zero() {
            -T::one()
        } else {
            T::one()
        };
        nu.iter_mut().for_each(|v| *v = *v * orient / len);

        let mut b = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let ij = i * n + j;
                let second: Vec<T> = (0..d)
                    .map(|k| {
                        bp.second[ij][k]
                            + hess[ij][p] * bp.normal[k]
                            + grad[i][p] * bp.normal_d[j][k]
                            + grad[j][p] * bp.normal_d[i][k]
                            + s * bp.normal_dd[ij][k]
                    })
                    .collect();
                let v = -dot(&second, &nu);
                b[ij] = v;
                b[j * n + i] = v;
            }
        }
        let h = (0..n * n).fold(T::zero(), |acc, k| acc + ginv[k] * b[k]);

        out.embedding.extend_from_slice(&pos);
        for f in &frame {
            out.tangents.extend_from_slice(f);
        }
        out.g.extend_from_slice(&g);
        out.g_inv.extend_from_slice(&ginv);
        out.sqrt_det_g.push(detg.sqrt());
        out.normal.extend_from_slice(&nu);
        out.b.extend_from_slice(&b);
        out.h.push(h);
    }
    Ok(out.finish(base.clone(), psi.values().to_vec()))
}

struct Storage<T> {
    n: usize,
    embedding: Vec<T>,
    tangents: Vec<T>,
    g: Vec<T>,
    g_inv: Vec<T>,
    sqrt_det_g: Vec<T>,
    normal: Vec<T>,
    b: Vec<T>,
    h: Vec<T>,
}

impl<T: Real> Storage<T> {
    fn new(n: usize, npts: usize) -> Self {
        let d = n + 1;
        Self {
            n,
            embedding: Vec::with_capacity(npts * d),
            tangents: Vec::with_capacity(npts * n * d),
            g: Vec::with_capacity(npts * n * n),
            g_inv: Vec::with_capacity(npts * n * n),
            sqrt_det_g: Vec::with_capacity(npts),
            normal: Vec::with_capacity(npts * d),
            b: Vec::with_capacity(npts * n * n),
            h: Vec::with_capacity(npts),
        }
    }

    fn finish(self, base: BaseManifold<T>, psi: Vec<T>) -> GeometryBundle<T> {
        GeometryBundle {
            base,
            n: self.n,
            psi,
            embedding: self.embedding,
            tangents: self.tangents,
            g: self.g,
            g_inv: self.g_inv,
            sqrt_det_g: self.sqrt_det_g,
            normal: self.normal,
            b: self.b,
            h: self.h,
            gamma: None,
        }
    }
}

/// Fills in `Gamma^i_jk = 1/2 g^il (d_j g_kl + d_k g_jl - d_l g_jk)` from grid
/// derivatives of the metric.
pub fn christoffel<T: Real>(bundle: GeometryBundle<T>) -> Result<GeometryBundle<T>> {
    let base = bundle.base.clone();
    let n = bundle.n;
    let npts = bundle.npts();
    if let Some(p) = bundle.sqrt_det_g.iter().position(|v| !(*v > T::zero())) {
        return Err(GraphError::DegenerateGraph {
            point: p,
            det: bundle.sqrt_det_g[p].to_f64_lossy(),
        });
    }
    // dg[(l * n + j) * n + k] = d_l g_jk as a grid field
    let mut dg: Vec<Vec<T>> = vec![Vec::new(); n * n * n];
    for j in 0..n {
        for k in j..n {
            let comp: Vec<T> = (0..npts).map(|p| bundle.g[p * n * n + j * n + k]).collect();
            let parity = base.component_parity(&[j, k]);
            for l in 0..n {
                let der = base.d1(&comp, l, parity);
                if j != k {
                    dg[(l * n + k) * n + j] = der.clone();
                }
                dg[(l * n + j) * n + k] = der;
            }
        }
    }
    let mut gamma = vec![T::zero(); npts * n * n * n];
    let half = T::lit(0.5);
    for p in 0..npts {
        let gi = &bundle.g_inv[p * n * n..(p + 1) * n * n];
        if gi.iter().any(|v| !v.is_finite()) {
            return Err(GraphError::DegenerateGraph {
                point: p,
                det: 0.0,
            });
        }
        let at = |l: usize, j: usize, k: usize| dg[(l * n + j) * n + k][p];
        let out = &mut gamma[p * n * n * n..(p + 1) * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let mut s = T::zero();
                    for l in 0..n {
                        s = s + gi[i * n + l] * (at(j, k, l) + at(k, j, l) - at(l, j, k));
                    }
                    let v = half * s;
                    out[(i * n + j) * n + k] = v;
                    out[(i * n + k) * n + j] = v;
                }
            }
        }
    }
    Ok(GeometryBundle {
        gamma: Some(gamma),
        ..bundle
    })
}

/// Riemann tensor from the Gauss equations, `R_ijkl = B_ik B_jl - B_il B_jk`.
pub fn riemann_from_b<T: Real>(bundle: &Arc<GeometryBundle<T>>) -> TensorField<T> {
    let n = bundle.n;
    let npts = bundle.npts();
    let mut r = Vec::with_capacity(npts * n.pow(4));
    for p in 0..npts {
        let b = bundle.b_at(p);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        r.push(b[i * n + k] * b[j * n + l] - b[i * n + l] * b[j * n + k]);
                    }
                }
            }
        }
    }
    TensorField::from_parts(Arc::clone(bundle), 4, r)
}

/// Largest violation of the algebraic curvature-tensor symmetries: the two
/// antisymmetries, pair exchange and the first Bianchi identity.
pub fn riemann_symmetry_residual<T: Real>(r: &TensorField<T>) -> T {
    let n = r.bundle().dim();
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
    max_of((0..r.bundle().npts()).map(|p| {
        let c = r.at(p);
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = c[idx(i, j, k, l)];
                        worst = worst
                            .max((v + c[idx(j, i, k, l)]).abs())
                            .max((v + c[idx(i, j, l, k)]).abs())
                            .max((v - c[idx(k, l, i, j)]).abs())
                            .max((v + c[idx(i, k, l, j)] + c[idx(i, l, j, k)]).abs());
                    }
                }
            }
        }
        worst
    }))
}

/// `dPsi = Id + d psi (x) nu_0 + psi d nu_0` on `T_x M_0`, as an ambient
/// matrix, and the n-volume distortion `J Psi = sqrt(det g / det g_0)`.
pub fn graph_map_jacobian<T: Real>(psi: &HeightField<T>) -> Result<JacobianData<T>> {
    let base = psi.base();
    check_finite(psi.values(), "psi")?;
    let width = base.tubular_width();
    let sup = psi.sup_abs();
    if sup >= width {
        return Err(GraphError::LeavesTubularNeighborhood {
            max_abs: sup.to_f64_lossy(),
            width: width.to_f64_lossy(),
        });
    }
    let n = base.dim();
    let d = n + 1;
    let grad = psi.gradient();
    let mut dpsi = Vec::with_capacity(base.npts() * d * d);
    let mut jpsi = Vec::with_capacity(base.npts());
    for p in 0..base.npts() {
        let bp = base.base_point(p);
        let g0 = base.base_metric(p);
        let g0inv = base_metric_inverse(base, p);
        let s = psi.values()[p];
        // ambient gradient of psi along the base
        let grad_amb: Vec<T> = (0..d)
            .map(|k| {
                let mut v = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        v = v + g0inv[i * n + j] * grad[j][p] * bp.tangents[i][k];
                    }
                }
                v
            })
            .collect();
        let mut a = vec![T::zero(); d * d];
        for r in 0..d {
            for c in 0..d {
                let mut tangential = T::zero();
                let mut weingarten = T::zero();
                for i in 0..n {
                    for j in 0..n {
                        tangential = tangential + g0inv[i * n + j] * bp.tangents[i][r] * bp.tangents[j][c];
                        weingarten = weingarten + g0inv[i * n + j] * bp.normal_d[i][r] * bp.tangents[j][c];
                    }
                }
                a[r * d + c] = tangential + bp.normal[r] * grad_amb[c] + s * weingarten;
            }
        }
        let images: Vec<Vec<T>> = (0..n)
            .map(|i| {
                (0..d)
                    .map(|r| (0..d).fold(T::zero(), |acc, c| acc + a[r * d + c] * bp.tangents[i][c]))
                    .collect()
            })
            .collect();
        let mut gm = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                gm[i * n + j] = dot(&images[i], &images[j]);
            }
        }
        jpsi.push((det(&gm, n) / det(&g0, n)).sqrt());
        dpsi.extend_from_slice(&a);
    }
    Ok(JacobianData { n, dpsi, jpsi })
}

/// Signed distance to the base (negative inside) and nearest-point foot.
pub fn tubular_projection<T: Real>(base: &BaseManifold<T>, x: &[T]) -> Result<(T, Vec<T>)> {
    base.tubular_projection(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Mode, Phase};

    fn sine_graph(base: &BaseManifold<f64>, amp: f64) -> HeightField<f64> {
        HeightField::from_coeffs(
            base,
            vec![Mode::Fourier {
                wavevector: vec![1, 0],
                phase: Phase::Sin,
            }],
            vec![amp],
        )
        .unwrap()
    }

    #[test]
    fn flat_zero_graph_is_the_plane() {
        let base = BaseManifold::<f64>::flat_torus(&[8, 8]).unwrap();
        let m = flat_graph_geometry(&HeightField::zero(&base)).unwrap();
        for p in 0..m.npts() {
            assert_eq!(m.g_at(p), &[1.0, 0.0, 0.0, 1.0]);
            assert_eq!(m.b_at(p), &[0.0; 4]);
            assert_eq!(m.mean_curvature()[p], 0.0);
            assert_eq!(m.normal_at(p), &[0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn unit_slope_metric() {
        // psi = x_1 - sin x_1 ... simpler: pick the point where the gradient is (1, 0)
        // psi = sin x_1 has gradient (1, 0) at x_1 = 0.
        let base = BaseManifold::<f64>::flat_torus(&[16, 16]).unwrap();
        let m = flat_graph_geometry(&sine_graph(&base, 1.0)).unwrap();
        let g = m.g_at(0);
        assert!((g[0] - 2.0).abs() < 1e-13 && g[1].abs() < 1e-13 && (g[3] - 1.0).abs() < 1e-13);
        assert!((m.sqrt_det_g()[0] - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn mean_curvature_at_a_critical_point() {
        let base = BaseManifold::<f64>::flat_torus(&[32, 32]).unwrap();
        let m = flat_graph_geometry(&sine_graph(&base, 0.1)).unwrap();
        // grid index of x_1 = pi/2 (row 8 of 32), x_2 = 0
        let p = 8 * 32;
        assert!((base.coords(p)[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((m.mean_curvature()[p] - 0.1).abs() < 1e-13);
    }

    #[test]
    fn embedded_route_matches_closed_form_on_torus() {
        let base = BaseManifold::<f64>::flat_torus(&[24, 20]).unwrap();
        let psi = HeightField::from_fn(&base, |x| {
            0.1 * (x[0] + 2.0 * x[1]).sin() + 0.05 * (3.0 * x[0]).cos()
        })
        .unwrap();
        let a = flat_graph_geometry(&psi).unwrap();
        let b = embedded_graph_geometry(&psi).unwrap();
        for p in 0..a.npts() {
            for k in 0..4 {
                assert!((a.g_at(p)[k] - b.g_at(p)[k]).abs() < 1e-8);
                assert!((a.b_at(p)[k] - b.b_at(p)[k]).abs() < 1e-8);
                assert!((a.g_inv_at(p)[k] - b.g_inv_at(p)[k]).abs() < 1e-8);
            }
            for k in 0..3 {
                assert!((a.normal_at(p)[k] - b.normal_at(p)[k]).abs() < 1e-8);
            }
            assert!((a.mean_curvature()[p] - b.mean_curvature()[p]).abs() < 1e-8);
        }
    }

    #[test]
    fn round_sphere_has_positive_mean_curvature() {
        let base = BaseManifold::<f64>::sphere(1.0, 16, 32).unwrap();
        let m = embedded_graph_geometry(&HeightField::zero(&base)).unwrap();
        for &h in m.mean_curvature() {
            assert!((h - 2.0).abs() < 1e-12);
        }
        let m = embedded_graph_geometry(&HeightField::constant(&base, 0.5)).unwrap();
        for &h in m.mean_curvature() {
            assert!((h - 2.0 / 1.5).abs() < 1e-12);
        }
        for p in 0..m.npts() {
            let x = m.embedding_at(p);
            let nu = m.normal_at(p);
            assert!(dot(x, nu) > 0.0, "normal points outward");
        }
    }

    #[test]
    fn leaving_the_tube_is_rejected() {
        let base = BaseManifold::<f64>::sphere(1.0, 8, 16).unwrap();
        let err = embedded_graph_geometry(&HeightField::constant(&base, -1.0)).unwrap_err();
        assert_eq!(err.kind(), "leaves-tubular-neighborhood");
        let err = graph_map_jacobian(&HeightField::constant(&base, 1.2)).unwrap_err();
        assert_eq!(err.kind(), "leaves-tubular-neighborhood");
    }

    #[test]
    fn flat_route_rejects_the_sphere() {
        let base = BaseManifold::<f64>::sphere(1.0, 8, 16).unwrap();
        let err = flat_graph_geometry(&HeightField::zero(&base)).unwrap_err();
        assert_eq!(err.kind(), "unsupported-base");
    }

    #[test]
    fn sphere_christoffel_symbols() {
        let base = BaseManifold::<f64>::sphere(1.0, 64, 32).unwrap();
        let m = christoffel(embedded_graph_geometry(&HeightField::zero(&base)).unwrap()).unwrap();
        for p in 0..m.npts() {
            let t = base.coords(p)[0];
            let gam = m.gamma_at(p).unwrap();
            // Gamma^theta_{phi phi} = -sin cos, Gamma^phi_{theta phi} = cot
            assert!((gam[3] + t.sin() * t.cos()).abs() < 1e-5, "{} vs {}", gam[3], -t.sin() * t.cos());
            assert!((gam[5] - t.cos() / t.sin()).abs() < 1e-4 * (1.0 / t.sin()));
            assert_eq!(gam[5], gam[6]);
        }
    }

    #[test]
    fn jacobian_closed_forms() {
        let base = BaseManifold::<f64>::sphere(1.0, 16, 32).unwrap();
        let j = graph_map_jacobian(&HeightField::constant(&base, 0.5)).unwrap();
        assert!(j.jpsi.iter().all(|&v| (v - 2.25).abs() < 1e-12));
        let j = graph_map_jacobian(&HeightField::zero(&base)).unwrap();
        assert!(j.jpsi.iter().all(|&v| (v - 1.0).abs() < 1e-13));

        let torus = BaseManifold::<f64>::flat_torus(&[32, 8]).unwrap();
        let j = graph_map_jacobian(&sine_graph(&torus, 0.1)).unwrap();
        for p in 0..torus.npts() {
            let c = torus.coords(p)[0].cos();
            assert!((j.jpsi[p] - (1.0 + 0.01 * c * c).sqrt()).abs() < 1e-13);
        }
    }
}
