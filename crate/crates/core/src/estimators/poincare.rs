//! Poincare-Wirtinger constant. For `p = 2` it is `1 / sqrt(lambda_1)` with
//! `lambda_1` the first nonzero Laplace-Beltrami eigenvalue, found by block
//! inverse power iteration on the mean-zero part of a spectral trial space.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::sobolev::nonzero;
use super::{maximize, Candidates, ConstantEstimate, InequalityKind, Search};
use crate::calculus::{covariant_derivative, TensorField};
use crate::error::{GraphError, Result};
use crate::geometry::GeometryBundle;
use crate::linalg::{backward_solve_transposed, cholesky, cholesky_solve, dot, forward_solve, symmetric_eigen, Mat};
use crate::norms::lp_norm;
use crate::scalar::{ordered_sum, Real};
use crate::spectral::{substream, SpectralBasis};

pub const EIGEN_TOLERANCE: f64 = 1e-8;
pub const EIGEN_MAX_ITERATIONS: usize = 500;
const BLOCK: usize = 12;

/// `||u - mean u||_p / ||grad u||_p`; undefined for constants.
pub fn poincare_ratio<T: Real>(u: &TensorField<T>, p: T) -> Result<T> {
    let w = u.bundle().measure_weights();
    let vol = ordered_sum(w.iter().copied());
    let mean = ordered_sum(u.components().iter().zip(&w).map(|(&a, &b)| a * b)) / vol;
    let centered = TensorField::scalar(u.bundle(), u.components().iter().map(|&v| v - mean).collect())?;
    let den = lp_norm(&covariant_derivative(u)?, p)?;
    if den == T::zero() {
        return Err(GraphError::UndefinedRatio("constant field".into()));
    }
    Ok(lp_norm(&centered, p)? / den)
}

/// Smallest nonzero eigenvalue of `-Delta` on the span of the non-constant
/// modes up to `band`, made mean-zero for the surface measure.
pub fn laplace_first_eigenvalue<T: Real>(bundle: &Arc<GeometryBundle<T>>, band: usize) -> Result<T> {
    let base = bundle.base();
    let n = bundle.dim();
    let npts = bundle.npts();
    let basis = SpectralBasis::up_to(base, band);
    let idx: Vec<usize> = (0..basis.len()).filter(|&a| !basis.modes()[a].is_constant()).collect();
    let k = idx.len();
    if k == 0 {
        return Err(GraphError::InvalidField("trial space has no non-constant modes".into()));
    }
    let w = bundle.measure_weights();
    let vol = ordered_sum(w.iter().copied());

    // mean-zero samples and chart gradients of every trial mode
    let (vals, grads): (Vec<Vec<T>>, Vec<Vec<Vec<T>>>) = idx
        .par_iter()
        .map(|&a| {
            let s = basis.sample(a);
            let mean = ordered_sum(s.iter().zip(&w).map(|(&x, &y)| x * y)) / vol;
            let v: Vec<T> = s.iter().map(|&x| x - mean).collect();
            let g: Vec<Vec<T>> = (0..n)
                .map(|ax| base.d1(s, ax, crate::base::Parity::Even))
                .collect();
            (v, g)
        })
        .unzip();
    // raised, weighted gradients: e_i = w g^ij d_j phi
    let raised: Vec<Vec<Vec<T>>> = grads
        .par_iter()
        .map(|g| {
            (0..n)
                .map(|i| {
                    (0..npts)
                        .map(|p| {
                            let gi = bundle.g_inv_at(p);
                            (0..n).fold(T::zero(), |acc, j| acc + gi[i * n + j] * g[j][p]) * w[p]
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let rows: Vec<(Vec<T>, Vec<T>)> = (0..k)
        .into_par_iter()
        .map(|a| {
            let mut arow = vec![T::zero(); k];
            let mut mrow = vec![T::zero(); k];
            for b in 0..k {
                let mut s = T::zero();
                for i in 0..n {
                    s = s + grads[a][i].iter().zip(&raised[b][i]).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
                }
                arow[b] = s;
                mrow[b] = vals[a]
                    .iter()
                    .zip(&vals[b])
                    .zip(&w)
                    .fold(T::zero(), |acc, ((&x, &y), &z)| acc + x * y * z);
            }
            (arow, mrow)
        })
        .collect();
    let mut a_mat = Vec::with_capacity(k * k);
    let mut m_mat = Vec::with_capacity(k * k);
    for (ar, mr) in &rows {
        a_mat.extend_from_slice(ar);
        m_mat.extend_from_slice(mr);
    }
    // symmetrize away rounding so the factorization sees an exact symmetric matrix
    for a in 0..k {
        for b in (a + 1)..k {
            let s = (a_mat[a * k + b] + a_mat[b * k + a]) * T::lit(0.5);
            a_mat[a * k + b] = s;
            a_mat[b * k + a] = s;
        }
    }
    let l = cholesky(&a_mat, k).ok_or(GraphError::DegenerateGraph {
        point: 0,
        det: 0.0,
    })?;
    let mass_times = |x: &[T]| -> Vec<T> {
        (0..k)
            .map(|r| m_mat[r * k..(r + 1) * k].iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    };
    let stiff_times = |x: &[T]| -> Vec<T> {
        (0..k)
            .map(|r| a_mat[r * k..(r + 1) * k].iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    };

    // Block inverse iteration with a Rayleigh-Ritz step each round. The
    // lowest eigenvalues come in near-degenerate clusters (four on a square
    // torus, three on a sphere), which stall a single vector; a block wider
    // than the first cluster converges at the rate lambda_1 / lambda_{b+1}.
    let b = k.min(BLOCK);
    let mut rng = substream(0x9e37_79b9, 0);
    let mut x: Vec<Vec<T>> = (0..b)
        .map(|_| (0..k).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect())
        .collect();
    let mut lambda = T::infinity();
    let tol = T::lit(EIGEN_TOLERANCE);
    let mut change = T::infinity();
    for _ in 0..EIGEN_MAX_ITERATIONS {
        let y: Vec<Vec<T>> = x.par_iter().map(|c| cholesky_solve(&l, k, &mass_times(c))).collect();
        let my: Vec<Vec<T>> = y.par_iter().map(|c| mass_times(c)).collect();
        let ay: Vec<Vec<T>> = y.par_iter().map(|c| stiff_times(c)).collect();
        let gram = |u: &[Vec<T>]| -> Vec<T> {
            let mut g = vec![T::zero(); b * b];
            for i in 0..b {
                for j in 0..b {
                    g[i * b + j] = dot(&y[i], &u[j]);
                }
            }
            g
        };
        let (ritz, s) = generalized_eigen(&gram(&ay), &gram(&my), b).ok_or(GraphError::ConvergenceFailure {
            iterations: 0,
            last_change: change.to_f64_lossy(),
            estimate: lambda.to_f64_lossy(),
        })?;
        x = (0..b)
            .map(|c| {
                (0..k)
                    .map(|r| (0..b).fold(T::zero(), |acc, i| acc + y[i][r] * s[(i, c)]))
                    .collect()
            })
            .collect();
        let next = ritz[0];
        change = ((next - lambda) / next).abs();
        lambda = next;
        if change <= tol {
            return Ok(lambda);
        }
    }
    Err(GraphError::ConvergenceFailure {
        iterations: EIGEN_MAX_ITERATIONS,
        last_change: change.to_f64_lossy(),
        estimate: lambda.to_f64_lossy(),
    })
}

/// Eigenpairs of `A s = theta M s` for a small pencil with `M` positive
/// definite, ascending, with `M`-orthonormal vectors as columns.
fn generalized_eigen<T: Real>(a: &[T], m: &[T], n: usize) -> Option<(Vec<T>, Mat<T>)> {
    let l = cholesky(m, n)?;
    // C = L^-1 A L^-T
    let mut half = vec![T::zero(); n * n];
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| a[i * n + j]).collect();
        let z = forward_solve(&l, n, &col);
        for i in 0..n {
            half[i * n + j] = z[i];
        }
    }
    let mut c = vec![T::zero(); n * n];
    for i in 0..n {
        let z = forward_solve(&l, n, &half[i * n..(i + 1) * n]);
        for j in 0..n {
            c[i * n + j] = z[j];
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (c[i * n + j] + c[j * n + i]) * T::lit(0.5);
            c[i * n + j] = s;
            c[j * n + i] = s;
        }
    }
    let (vals, w) = symmetric_eigen(&c, n);
    let mut s = Mat::zeros(n, n);
    for col in 0..n {
        let v = backward_solve_transposed(&l, n, &w.column(col));
        for r in 0..n {
            s[(r, col)] = v[r];
        }
    }
    Some((vals, s))
}

pub fn estimate_poincare_constant<T: Real>(
    bundle: &Arc<GeometryBundle<T>>,
    p: T,
    search: Search,
    seed: u64,
) -> Result<ConstantEstimate<T>> {
    if p.is_nan() || p < T::one() {
        return Err(GraphError::InvalidExponent(format!("p = {p} is not in [1, inf]")));
    }
    let params = vec![("p".into(), p.to_f64_lossy())];
    if p == T::lit(2.0) {
        let lambda = laplace_first_eigenvalue(bundle, search.band)?;
        return Ok(ConstantEstimate {
            inequality: InequalityKind::Poincare,
            value: lambda.sqrt().recip(),
            witness: format!("first eigenfunction, lambda_1 = {lambda}"),
            params,
        });
    }
    let cands = Candidates::new(bundle, search.band, seed, InequalityKind::Poincare);
    let (value, witness) = maximize(&cands, search, false, |u| nonzero(poincare_ratio(u, p)))?;
    Ok(ConstantEstimate {
        inequality: InequalityKind::Poincare,
        value,
        witness,
        params,
    })
}
