//! Random members of the family of graphs with `||psi||_{C^1} < delta` and
//! sweeps of constant estimates over it.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::base::BaseManifold;
use crate::error::{GraphError, Result};
use crate::estimators::{cz_curvature_ratio, ConstantEstimate, EstimatorSpec};
use crate::geometry::{christoffel, embedded_graph_geometry, graph_map_jacobian, GeometryBundle};
use crate::height::HeightField;
use crate::norms::lp_norm;
use crate::scalar::Real;
use crate::spectral::{stream_id, substream, SpectralBasis};

/// Fraction of `delta` the rescaled samples are placed at.
pub const TARGET_FRACTION: f64 = 0.9;
const MAX_REDRAWS: u64 = 64;

#[derive(Debug, Clone)]
pub struct FamilySpec<T: Real> {
    pub base: BaseManifold<T>,
    pub delta: T,
    pub alpha: Option<T>,
    pub band_limit: usize,
    pub samples: usize,
    pub seed: u64,
}

impl<T: Real> FamilySpec<T> {
    pub fn validate(&self) -> Result<()> {
        check_delta(&self.base, self.delta)?;
        if self.samples == 0 {
            return Err(GraphError::InvalidFamily("samples must be at least 1".into()));
        }
        if self.samples as u64 >= 1 << 31 {
            return Err(GraphError::InvalidFamily(format!("{} samples is too many", self.samples)));
        }
        if let Some(a) = self.alpha {
            if !(a > T::zero() && a <= T::one()) {
                return Err(GraphError::InvalidFamily(format!("alpha = {a} is not in (0, 1]")));
            }
        }
        Ok(())
    }

    pub fn with_delta(&self, delta: T) -> Self {
        Self { delta, ..self.clone() }
    }
}

fn check_delta<T: Real>(base: &BaseManifold<T>, delta: T) -> Result<()> {
    let eps = base.tubular_width();
    if delta.is_nan() || delta < T::zero() || delta >= eps {
        return Err(GraphError::InvalidFamily(format!(
            "delta = {delta} must lie in [0, {eps})"
        )));
    }
    Ok(())
}

/// Draws `psi = 0.9 delta psi_0 / ||psi_0||_{C^1}` from the substream of
/// `(seed, sample_id)`. The direction `psi_0` does not depend on `delta`, so
/// families at different `delta` are rescalings of each other.
pub fn sample_height_field<T: Real>(spec: &FamilySpec<T>, sample_id: usize) -> Result<HeightField<T>> {
    spec.validate()?;
    let base = &spec.base;
    if spec.delta == T::zero() {
        return Ok(HeightField::zero(base));
    }
    let basis = SpectralBasis::up_to(base, spec.band_limit);
    let mut attempt = 0;
    let psi0 = loop {
        let mut rng = substream(spec.seed, stream_id(sample_id as u64, attempt));
        let coeffs = basis.random_coefficients(&mut rng);
        let field = HeightField::from_basis(&basis, coeffs);
        if field.c1_norm() > T::zero() {
            break field;
        }
        attempt += 1;
        if attempt >= MAX_REDRAWS {
            return Err(GraphError::InvalidFamily("every draw vanished on the grid".into()));
        }
    };
    let target = T::lit(TARGET_FRACTION) * spec.delta;
    let mut psi = psi0.scaled(target / psi0.c1_norm());
    if let Some(alpha) = spec.alpha {
        let n = psi.c1_alpha_norm(alpha)?;
        if n >= spec.delta {
            psi = psi.scaled(target / n);
        }
    }
    Ok(psi)
}

/// One sampled surface of a sweep.
#[derive(Debug, Clone)]
pub struct FamilySweepRecord<T> {
    pub sample_id: usize,
    pub delta: T,
    pub c1_norm_actual: T,
    /// One entry per configured estimator, in configuration order.
    pub estimates: Vec<std::result::Result<ConstantEstimate<T>, GraphError>>,
    pub volume: T,
    pub b_l2: T,
    pub h_l2: T,
    pub jpsi_min: T,
    pub jpsi_max: T,
    /// Set when the surface itself could not be built.
    pub failure: Option<GraphError>,
}

impl<T: Real> FamilySweepRecord<T> {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    fn failed(sample_id: usize, delta: T, c1: T, n_est: usize, e: GraphError) -> Self {
        Self {
            sample_id,
            delta,
            c1_norm_actual: c1,
            estimates: vec![Err(e.clone()); n_est],
            volume: T::nan(),
            b_l2: T::nan(),
            h_l2: T::nan(),
            jpsi_min: T::nan(),
            jpsi_max: T::nan(),
            failure: Some(e),
        }
    }
}

/// Surface with Christoffel symbols, ready for every estimator.
pub fn build_surface<T: Real>(psi: &HeightField<T>) -> Result<Arc<GeometryBundle<T>>> {
    Ok(Arc::new(christoffel(embedded_graph_geometry(psi)?)?))
}

/// Builds the surface of `psi` and runs every estimator on it.
pub fn evaluate_sample<T: Real>(
    psi: &HeightField<T>,
    sample_id: usize,
    delta: T,
    estimators: &[EstimatorSpec],
    seed: u64,
) -> FamilySweepRecord<T> {
    let c1 = psi.c1_norm();
    let run = || -> Result<FamilySweepRecord<T>> {
        let m = build_surface(psi)?;
        let jac = graph_map_jacobian(psi)?;
        let two = T::lit(2.0);
        let estimates = estimators.iter().map(|e| e.run(&m, seed)).collect();
        Ok(FamilySweepRecord {
            sample_id,
            delta,
            c1_norm_actual: c1,
            estimates,
            volume: m.volume(),
            b_l2: lp_norm(&m.b_field(), two)?,
            h_l2: lp_norm(&m.h_field(), two)?,
            jpsi_min: jac.min(),
            jpsi_max: jac.max(),
            failure: None,
        })
    };
    run().unwrap_or_else(|e| FamilySweepRecord::failed(sample_id, delta, c1, estimators.len(), e))
}

/// Per-delta maximum of each estimator over the successful samples.
#[derive(Debug, Clone)]
pub struct DeltaAggregate<T> {
    pub delta: T,
    pub succeeded: usize,
    pub attempted: usize,
    /// `None` when no sample produced a value for that estimator.
    pub max: Vec<Option<T>>,
}

/// Smallest-delta maximum against the constant of the base itself.
#[derive(Debug, Clone)]
pub struct Trend<T> {
    pub label: String,
    pub base_value: Option<T>,
    pub smallest_delta: T,
    pub smallest_delta_max: Option<T>,
    /// `|max - base| / |base|`, absent when either side is missing or the
    /// base value is zero.
    pub relative_gap: Option<T>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput<T> {
    pub records: Vec<FamilySweepRecord<T>>,
    pub aggregates: Vec<DeltaAggregate<T>>,
    pub base_record: FamilySweepRecord<T>,
    pub trend: Vec<Trend<T>>,
}

impl<T: Real> SweepOutput<T> {
    pub fn success_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 1.0;
        }
        self.records.iter().filter(|r| r.succeeded()).count() as f64 / self.records.len() as f64
    }
}

/// Samples every `(delta, sample)` pair, evaluates the estimators, and
/// aggregates. Records are sorted by `(delta, sample_id)`.
pub fn family_sweep<T: Real>(
    spec: &FamilySpec<T>,
    deltas: &[T],
    estimators: &[EstimatorSpec],
) -> Result<SweepOutput<T>> {
    for &d in deltas {
        spec.with_delta(d).validate()?;
    }
    let jobs: Vec<(usize, usize)> = (0..deltas.len())
        .flat_map(|di| (0..spec.samples).map(move |s| (di, s)))
        .collect();
    let mut records: Vec<(usize, FamilySweepRecord<T>)> = jobs
        .par_iter()
        .map(|&(di, s)| {
            let d = deltas[di];
            let rec = match sample_height_field(&spec.with_delta(d), s) {
                Ok(psi) => evaluate_sample(&psi, s, d, estimators, spec.seed),
                Err(e) => FamilySweepRecord::failed(s, d, T::nan(), estimators.len(), e),
            };
            (di, rec)
        })
        .collect();
    records.sort_by(|(da, a), (db, b)| {
        deltas[*da]
            .partial_cmp(&deltas[*db])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(da.cmp(db))
            .then(a.sample_id.cmp(&b.sample_id))
    });

    let mut groups: BTreeMap<usize, Vec<&FamilySweepRecord<T>>> = BTreeMap::new();
    for (di, r) in &records {
        groups.entry(*di).or_default().push(r);
    }
    let mut order: Vec<usize> = groups.keys().copied().collect();
    order.sort_by(|a, b| deltas[*a].partial_cmp(&deltas[*b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(b)));
    let aggregates: Vec<DeltaAggregate<T>> = order
        .iter()
        .map(|di| {
            let rs = &groups[di];
            let max = (0..estimators.len())
                .map(|k| {
                    rs.iter()
                        .filter_map(|r| r.estimates[k].as_ref().ok().map(|e| e.value))
                        .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))))
                })
                .collect();
            DeltaAggregate {
                delta: deltas[*di],
                succeeded: rs.iter().filter(|r| r.succeeded()).count(),
                attempted: rs.len(),
                max,
            }
        })
        .collect();

    let base_record = evaluate_sample(&HeightField::zero(&spec.base), 0, T::zero(), estimators, spec.seed);
    let trend = match aggregates.first() {
        Some(first) => estimators
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let base_value = base_record.estimates[k].as_ref().ok().map(|c| c.value);
                let smallest = first.max[k];
                let relative_gap = match (base_value, smallest) {
                    (Some(b), Some(s)) if b != T::zero() => Some(((s - b) / b).abs()),
                    _ => None,
                };
                Trend {
                    label: e.label(),
                    base_value,
                    smallest_delta: first.delta,
                    smallest_delta_max: smallest,
                    relative_gap,
                }
            })
            .collect(),
        None => Vec::new(),
    };
    Ok(SweepOutput {
        records: records.into_iter().map(|(_, r)| r).collect(),
        aggregates,
        base_record,
        trend,
    })
}

/// Bounds `[(1 - delta kappa)^n / (1 + 2 delta), (1 + 2 delta)(1 + delta kappa)^n]`
/// on the graph-map Jacobian, `kappa` the largest base principal curvature.
pub fn jacobian_bounds<T: Real>(base: &BaseManifold<T>, delta: T) -> (T, T) {
    let k = base.max_principal_curvature();
    let n = base.dim() as i32;
    let two = T::lit(2.0);
    let lo = (T::one() - delta * k).powi(n) / (T::one() + two * delta);
    let hi = (T::one() + two * delta) * (T::one() + delta * k).powi(n);
    (lo, hi)
}

/// Whether a successful record respects the Jacobian and volume sandwiches.
pub fn record_within_bounds<T: Real>(base: &BaseManifold<T>, rec: &FamilySweepRecord<T>) -> bool {
    if !rec.succeeded() {
        return true;
    }
    let (lo, hi) = jacobian_bounds(base, rec.delta);
    let v0 = base.volume();
    rec.c1_norm_actual < rec.delta.max(T::min_positive_value())
        && rec.jpsi_min >= lo
        && rec.jpsi_max <= hi
        && rec.volume >= v0 * lo
        && rec.volume <= v0 * hi
}

/// `||B||_2 / (1 + ||H||_2)` of the graph of `psi`; shortcut used by tests.
pub fn cz_b_of<T: Real>(psi: &HeightField<T>) -> Result<T> {
    cz_curvature_ratio(&build_surface(psi)?, T::lit(2.0))
}
