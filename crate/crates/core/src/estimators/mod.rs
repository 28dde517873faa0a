//! Empirical lower bounds for the constants of functional inequalities on a
//! single hypersurface.
//!
//! Every estimator maximizes a quotient over a seeded family of band-limited
//! test fields, so its value is the largest quotient actually observed.
//! Candidate streams depend only on the seed and the estimator, never on the
//! surface, which makes estimates continuous in the surface.

pub mod cz;
pub mod gn;
pub mod poincare;
pub mod sobolev;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::TensorField;
use crate::error::Result;
use crate::geometry::GeometryBundle;
use crate::scalar::Real;
use crate::spectral::{stream_id, substream, SpectralBasis};

pub use cz::{
    cz_curvature_ratio, cz_function_ratio, estimate_cz_function_constant, higher_cz_ratio,
    schauder_curvature_ratio, HigherCz,
};
pub use gn::{estimate_gn_constant, gn_exponent, gn_inverse_exponent, verify_gn_inequality, Exponent, GnCheck};
pub use poincare::{estimate_poincare_constant, laplace_first_eigenvalue, poincare_ratio};
pub use sobolev::{
    estimate_morrey_constant, estimate_sobolev_constant, estimate_sobolev_poincare_constant, morrey_ratio,
    sobolev_ratio,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    Sobolev,
    Morrey,
    Poincare,
    SobolevPoincare,
    Gn,
    CzB,
    SchauderB,
    CzFn,
    CzGradB,
}

impl InequalityKind {
    pub fn name(self) -> &'static str {
        match self {
            InequalityKind::Sobolev => "sobolev",
            InequalityKind::Morrey => "morrey",
            InequalityKind::Poincare => "poincare",
            InequalityKind::SobolevPoincare => "sobolev_poincare",
            InequalityKind::Gn => "gn",
            InequalityKind::CzB => "cz_b",
            InequalityKind::SchauderB => "schauder_b",
            InequalityKind::CzFn => "cz_fn",
            InequalityKind::CzGradB => "cz_grad_b",
        }
    }
}

impl fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Best quotient found for one inequality on one surface.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantEstimate<T> {
    pub inequality: InequalityKind,
    pub value: T,
    pub witness: String,
    pub params: Vec<(String, f64)>,
}

impl<T> ConstantEstimate<T> {
    /// `name=value` pairs joined by `;`.
    pub fn params_string(&self) -> String {
        params_string(&self.params)
    }
}

pub fn params_string(params: &[(String, f64)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Search budget shared by the sampling estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Search {
    pub trials: usize,
    pub ascent_steps: usize,
    pub band: usize,
}

impl Default for Search {
    fn default() -> Self {
        Self {
            trials: 32,
            ascent_steps: 50,
            band: 8,
        }
    }
}

fn default_trials() -> usize {
    Search::default().trials
}
fn default_ascent() -> usize {
    Search::default().ascent_steps
}
fn default_band() -> usize {
    Search::default().band
}
fn default_morrey_trials() -> usize {
    8
}
fn default_morrey_ascent() -> usize {
    0
}

/// One configured estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorSpec {
    Sobolev {
        p: f64,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_ascent")]
        ascent_steps: usize,
        #[serde(default = "default_band")]
        band: usize,
    },
    Morrey {
        p: f64,
        #[serde(default = "default_morrey_trials")]
        trials: usize,
        #[serde(default = "default_morrey_ascent")]
        ascent_steps: usize,
        #[serde(default = "default_band")]
        band: usize,
    },
    Poincare {
        p: f64,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_ascent")]
        ascent_steps: usize,
        #[serde(default = "default_band")]
        band: usize,
    },
    SobolevPoincare {
        p: f64,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_ascent")]
        ascent_steps: usize,
        #[serde(default = "default_band")]
        band: usize,
    },
    Gn {
        j: usize,
        m: usize,
        r: f64,
        q: f64,
        theta: f64,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_ascent")]
        ascent_steps: usize,
        #[serde(default = "default_band")]
        band: usize,
    },
    CzB {
        p: f64,
    },
    SchauderB {
        alpha: f64,
    },
    CzFn {
        p: f64,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default = "default_ascent")]
        ascent_steps: usize,
        #[serde(default = "default_band")]
        band: usize,
    },
    CzGradB {
        p: f64,
        #[serde(default = "one")]
        k: usize,
        #[serde(default)]
        allow_second_order: bool,
    },
}

fn one() -> usize {
    1
}

impl EstimatorSpec {
    pub fn inequality(&self) -> InequalityKind {
        match self {
            EstimatorSpec::Sobolev { .. } => InequalityKind::Sobolev,
            EstimatorSpec::Morrey { .. } => InequalityKind::Morrey,
            EstimatorSpec::Poincare { .. } => InequalityKind::Poincare,
            EstimatorSpec::SobolevPoincare { .. } => InequalityKind::SobolevPoincare,
            EstimatorSpec::Gn { .. } => InequalityKind::Gn,
            EstimatorSpec::CzB { .. } => InequalityKind::CzB,
            EstimatorSpec::SchauderB { .. } => InequalityKind::SchauderB,
            EstimatorSpec::CzFn { .. } => InequalityKind::CzFn,
            EstimatorSpec::CzGradB { .. } => InequalityKind::CzGradB,
        }
    }

    /// Exponent parameters, in a fixed order.
    pub fn params(&self) -> Vec<(String, f64)> {
        let kv = |pairs: &[(&str, f64)]| pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        match *self {
            EstimatorSpec::Sobolev { p, .. }
            | EstimatorSpec::Morrey { p, .. }
            | EstimatorSpec::Poincare { p, .. }
            | EstimatorSpec::SobolevPoincare { p, .. }
            | EstimatorSpec::CzB { p }
            | EstimatorSpec::CzFn { p, .. } => kv(&[("p", p)]),
            EstimatorSpec::Gn { j, m, r, q, theta, .. } => kv(&[
                ("j", j as f64),
                ("m", m as f64),
                ("r", r),
                ("q", q),
                ("theta", theta),
            ]),
            EstimatorSpec::SchauderB { alpha } => kv(&[("alpha", alpha)]),
            EstimatorSpec::CzGradB { p, k, .. } => kv(&[("p", p), ("k", k as f64)]),
        }
    }

    /// Short stable label, e.g. `gn_j1_m2_r2_q2_theta0.75`.
    pub fn label(&self) -> String {
        let mut s = self.inequality().name().to_string();
        for (k, v) in self.params() {
            s.push_str(&format!("_{k}{v}"));
        }
        s
    }

    fn search(&self) -> Search {
        match *self {
            EstimatorSpec::Sobolev {
                trials,
                ascent_steps,
                band,
                ..
            }
            | EstimatorSpec::Morrey {
                trials,
                ascent_steps,
                band,
                ..
            }
            | EstimatorSpec::Poincare {
                trials,
                ascent_steps,
                band,
                ..
            }
            | EstimatorSpec::SobolevPoincare {
                trials,
                ascent_steps,
                band,
                ..
            }
            | EstimatorSpec::Gn {
                trials,
                ascent_steps,
                band,
                ..
            }
            | EstimatorSpec::CzFn {
                trials,
                ascent_steps,
                band,
                ..
            } => Search {
                trials,
                ascent_steps,
                band,
            },
            _ => Search::default(),
        }
    }

    /// Runs the estimator on one surface. The bundle must carry Christoffel
    /// symbols for every estimator that differentiates.
    pub fn run<T: Real>(&self, bundle: &Arc<GeometryBundle<T>>, seed: u64) -> Result<ConstantEstimate<T>> {
        let search = self.search();
        let lit = T::lit;
        match *self {
            EstimatorSpec::Sobolev { p, .. } => estimate_sobolev_constant(bundle, lit(p), search, seed),
            EstimatorSpec::Morrey { p, .. } => estimate_morrey_constant(bundle, lit(p), search, seed),
            EstimatorSpec::Poincare { p, .. } => estimate_poincare_constant(bundle, lit(p), search, seed),
            EstimatorSpec::SobolevPoincare { p, .. } => {
                estimate_sobolev_poincare_constant(bundle, lit(p), search, seed)
            }
            EstimatorSpec::Gn { j, m, r, q, theta, .. } => estimate_gn_constant(
                bundle,
                j,
                m,
                Exponent::from_real(lit(r)),
                Exponent::from_real(lit(q)),
                lit(theta),
                search,
                seed,
            ),
            EstimatorSpec::CzB { p } => Ok(ConstantEstimate {
                inequality: InequalityKind::CzB,
                value: cz_curvature_ratio(bundle, lit(p))?,
                witness: "second fundamental form".into(),
                params: self.params(),
            }),
            EstimatorSpec::SchauderB { alpha } => Ok(ConstantEstimate {
                inequality: InequalityKind::SchauderB,
                value: schauder_curvature_ratio(bundle, lit(alpha))?,
                witness: "second fundamental form".into(),
                params: self.params(),
            }),
            EstimatorSpec::CzFn { p, .. } => estimate_cz_function_constant(bundle, lit(p), search, seed),
            EstimatorSpec::CzGradB {
                p,
                k,
                allow_second_order,
            } => {
                let h = higher_cz_ratio(bundle, lit(p), k, allow_second_order)?;
                let mut params = self.params();
                params.push(("h_l3".into(), h.h_l3.to_f64_lossy()));
                params.push(("h_l4".into(), h.h_l4.to_f64_lossy()));
                Ok(ConstantEstimate {
                    inequality: InequalityKind::CzGradB,
                    value: h.ratio,
                    witness: format!("covariant derivative of order {k} of B"),
                    params,
                })
            }
        }
    }
}

/// Major stream ids of candidate fields carry this bit; sampled height
/// fields use the sample id as major id and never reach it.
const CANDIDATE_DOMAIN: u64 = 1 << 31;

/// Seeded band-limited test fields on the parameter grid of a surface.
pub(crate) struct Candidates<'a, T: Real> {
    bundle: &'a Arc<GeometryBundle<T>>,
    basis: SpectralBasis<T>,
    seed: u64,
    tag: u64,
}

impl<'a, T: Real> Candidates<'a, T> {
    pub(crate) fn new(bundle: &'a Arc<GeometryBundle<T>>, band: usize, seed: u64, tag: InequalityKind) -> Self {
        Self {
            bundle,
            basis: SpectralBasis::up_to(bundle.base(), band),
            seed,
            tag: CANDIDATE_DOMAIN | (tag as u64 + 1),
        }
    }

    fn coeffs(&self, stream: u64) -> Vec<T> {
        let mut rng = substream(self.seed, stream_id(self.tag, stream));
        self.basis.random_coefficients(&mut rng)
    }

    pub(crate) fn trial_coeffs(&self, i: usize) -> Vec<T> {
        self.coeffs(i as u64)
    }

    fn ascent_direction(&self, step: usize) -> Vec<T> {
        self.coeffs((1u64 << 31) + step as u64)
    }

    pub(crate) fn field(&self, coeffs: &[T]) -> TensorField<T> {
        TensorField::from_parts(Arc::clone(self.bundle), 0, self.basis.synthesize(coeffs))
    }
}

fn unit<T: Real>(v: &[T]) -> Vec<T> {
    let n = v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
    if n > T::zero() {
        v.iter().map(|&x| x / n).collect()
    } else {
        v.to_vec()
    }
}

/// Maximizes `ratio` over the constant field (optional), `search.trials`
/// random candidates, and `search.ascent_steps` steps of normalized random
/// perturbation from the best random candidate. Quotients that are undefined
/// for a candidate (`None`) are skipped. Ties keep the first candidate.
pub(crate) fn maximize<T: Real>(
    cands: &Candidates<'_, T>,
    search: Search,
    include_constant: bool,
    ratio: impl Fn(&TensorField<T>) -> Result<Option<T>> + Sync,
) -> Result<(T, String)> {
    let mut best = T::zero();
    let mut witness = String::from("none");
    if include_constant {
        if let Some(r) = ratio(&TensorField::constant(cands.bundle, T::one()))? {
            best = r;
            witness = "constant".into();
        }
    }
    let trials: Vec<(Vec<T>, Option<T>)> = (0..search.trials)
        .into_par_iter()
        .map(|i| {
            let c = cands.trial_coeffs(i);
            let r = ratio(&cands.field(&c))?;
            Ok((c, r))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut start: Option<(usize, T)> = None;
    for (i, (_, r)) in trials.iter().enumerate() {
        if let Some(r) = *r {
            if start.is_none_or(|(_, s)| r > s) {
                start = Some((i, r));
            }
            if r > best {
                best = r;
                witness = format!("random band-{} field #{i}", search.band);
            }
        }
    }
    let Some((i0, r0)) = start else {
        return Ok((best, witness));
    };
    let mut cur = unit(&trials[i0].0);
    let mut cur_r = r0;
    let mut sigma = T::lit(0.5);
    let mut accepted = 0;
    for step in 0..search.ascent_steps {
        let dir = unit(&cands.ascent_direction(step));
        let trial: Vec<T> = cur.iter().zip(&dir).map(|(&c, &d)| c + sigma * d).collect();
        let trial = unit(&trial);
        match ratio(&cands.field(&trial))? {
            Some(r) if r > cur_r => {
                cur = trial;
                cur_r = r;
                accepted += 1;
                sigma = (sigma * T::lit(1.5)).min(T::one());
            }
            _ => sigma = sigma * T::lit(0.6),
        }
    }
    if cur_r > best {
        best = cur_r;
        witness = format!(
            "ascent from random band-{} field #{i0} ({accepted} of {} steps accepted)",
            search.band, search.ascent_steps
        );
    }
    Ok((best, witness))
}
