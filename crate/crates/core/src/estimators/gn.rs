//! Gagliardo-Nirenberg interpolation: exponent algebra and quotients.

use std::sync::Arc;

use super::{maximize, Candidates, ConstantEstimate, InequalityKind, Search};
use crate::calculus::{iterated_covariant_derivative, integrate_dmu, TensorField};
use crate::error::{GraphError, Result};
use crate::geometry::GeometryBundle;
use crate::norms::lp_norm;
use crate::scalar::{Field, Real};

/// A Lebesgue exponent in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent<F> {
    Finite(F),
    Infinite,
}

impl<F: Field> Exponent<F> {
    /// `1/r`, zero for `r = inf`.
    pub fn inverse(&self) -> F {
        match self {
            Exponent::Finite(r) => F::one() / r.clone(),
            Exponent::Infinite => F::zero(),
        }
    }
}

impl<T: Real> Exponent<T> {
    pub fn from_real(r: T) -> Self {
        if r.is_infinite() {
            Exponent::Infinite
        } else {
            Exponent::Finite(r)
        }
    }

    pub fn to_real(self) -> T {
        match self {
            Exponent::Finite(r) => r,
            Exponent::Infinite => T::infinity(),
        }
    }
}

fn count<F: Field>(k: usize) -> F {
    F::from_usize(k).expect("small integer representable")
}

fn check_lebesgue<F: Field>(r: &Exponent<F>, name: &str) -> Result<()> {
    match r {
        Exponent::Finite(v) if !(v.clone() >= F::one()) => {
            Err(GraphError::InvalidExponent(format!("{name} = {v} is not in [1, inf]")))
        }
        _ => Ok(()),
    }
}

/// `1/p = j/n + theta (1/r - m/n) + (1 - theta)/q`, after checking the
/// admissible range and the excluded endpoint `r = n/(m-j) != 1, theta = 1`.
pub fn gn_inverse_exponent<F: Field>(
    j: usize,
    m: usize,
    r: &Exponent<F>,
    q: &Exponent<F>,
    theta: F,
    n: usize,
) -> Result<F> {
    if n == 0 || j >= m {
        return Err(GraphError::InvalidExponent(format!(
            "need 0 <= j < m and n >= 1, got j = {j}, m = {m}, n = {n}"
        )));
    }
    check_lebesgue(r, "r")?;
    check_lebesgue(q, "q")?;
    let nf: F = count(n);
    let mf: F = count(m);
    let jf: F = count(j);
    if !(theta.clone() * mf.clone() >= jf.clone() && theta <= F::one()) {
        return Err(GraphError::InvalidExponent(format!("theta = {theta} is not in [j/m, 1]")));
    }
    if theta == F::one() {
        if let Exponent::Finite(rv) = r {
            let critical = rv.clone() * count::<F>(m - j) == nf;
            if critical && *rv != F::one() {
                return Err(GraphError::ExcludedCase);
            }
        }
    }
    let inv = jf / nf.clone()
        + theta.clone() * (r.inverse() - mf / nf)
        + (F::one() - theta) * q.inverse();
    if inv < F::zero() {
        return Err(GraphError::NoValidExponent {
            inverse: inv.to_string(),
        });
    }
    Ok(inv)
}

/// The exponent `p` itself; `1/p = 0` gives `Infinite`.
pub fn gn_exponent<F: Field>(
    j: usize,
    m: usize,
    r: &Exponent<F>,
    q: &Exponent<F>,
    theta: F,
    n: usize,
) -> Result<Exponent<F>> {
    let inv = gn_inverse_exponent(j, m, r, q, theta, n)?;
    if inv == F::zero() {
        Ok(Exponent::Infinite)
    } else {
        Ok(Exponent::Finite(F::one() / inv))
    }
}

/// Both sides of the interpolation inequality for one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnCheck<T> {
    pub p: T,
    /// `||nabla^j u||_p`
    pub lhs: T,
    /// `(||nabla^m u||_r + ||u||_r)^theta ||u||_q^(1-theta)`
    pub rhs: T,
    pub ratio: T,
    /// `lhs / (||nabla^m u||_r^theta ||u||_q^(1-theta))`, only for mean-zero `u`.
    pub mean_zero_ratio: Option<T>,
}

fn derivative_norm<T: Real>(u: &TensorField<T>, k: usize, p: T) -> Result<T> {
    if k == 0 {
        lp_norm(u, p)
    } else {
        lp_norm(&iterated_covariant_derivative(u, k)?, p)
    }
}

pub fn verify_gn_inequality<T: Real>(
    u: &TensorField<T>,
    j: usize,
    m: usize,
    r: Exponent<T>,
    q: Exponent<T>,
    theta: T,
) -> Result<GnCheck<T>> {
    let p = gn_exponent(j, m, &r, &q, theta, u.bundle().dim())?.to_real();
    let (r, q) = (r.to_real(), q.to_real());
    let lhs = derivative_norm(u, j, p)?;
    let dm = derivative_norm(u, m, r)?;
    let ur = lp_norm(u, r)?;
    let uq = lp_norm(u, q)?;
    let tail = uq.powf(T::one() - theta);
    let rhs = (dm + ur).powf(theta) * tail;
    if rhs == T::zero() {
        return Err(GraphError::UndefinedRatio("zero field".into()));
    }
    let scale = lp_norm(u, T::one())?;
    let mean = integrate_dmu(u)?;
    let mean_zero = mean.abs() <= T::lit(1e-12) * scale.max(T::min_positive_value());
    let reduced = dm.powf(theta) * tail;
    let mean_zero_ratio = if mean_zero && reduced > T::zero() {
        Some(lhs / reduced)
    } else {
        None
    };
    Ok(GnCheck {
        p,
        lhs,
        rhs,
        ratio: lhs / rhs,
        mean_zero_ratio,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_gn_constant<T: Real>(
    bundle: &Arc<GeometryBundle<T>>,
    j: usize,
    m: usize,
    r: Exponent<T>,
    q: Exponent<T>,
    theta: T,
    search: Search,
    seed: u64,
) -> Result<ConstantEstimate<T>> {
    let p = gn_exponent(j, m, &r, &q, theta, bundle.dim())?.to_real();
    let cands = Candidates::new(bundle, search.band, seed, InequalityKind::Gn);
    let (value, witness) = maximize(&cands, search, true, |u| {
        super::sobolev::nonzero(verify_gn_inequality(u, j, m, r, q, theta).map(|c| c.ratio))
    })?;
    Ok(ConstantEstimate {
        inequality: InequalityKind::Gn,
        value,
        witness,
        params: vec![
            ("j".into(), j as f64),
            ("m".into(), m as f64),
            ("r".into(), r.to_real().to_f64_lossy()),
            ("q".into(), q.to_real().to_f64_lossy()),
            ("theta".into(), theta.to_f64_lossy()),
            ("p".into(), p.to_f64_lossy()),
        ],
    })
}
