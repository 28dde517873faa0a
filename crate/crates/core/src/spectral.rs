//! Band-limited real bases on the grid: trigonometric modes on the torus,
//! real spherical harmonics on the sphere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::base::{BaseKind, BaseManifold};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Cos,
    Sin,
}

/// One real basis function.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `cos(k . x)` or `sin(k . x)` with `k_a` counted in periods of axis a.
    Fourier { wavevector: Vec<i32>, phase: Phase },
    /// Orthonormal real spherical harmonic of degree l and order m >= 0.
    Harmonic { degree: usize, order: usize, phase: Phase },
}

impl Mode {
    pub fn is_constant(&self) -> bool {
        match self {
            Mode::Fourier { wavevector, .. } => wavevector.iter().all(|&k| k == 0),
            Mode::Harmonic { degree, .. } => *degree == 0,
        }
    }

    /// Band of the mode: `max |k_a|` or the degree.
    pub fn band(&self) -> usize {
        match self {
            Mode::Fourier { wavevector, .. } => {
                wavevector.iter().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
            }
            Mode::Harmonic { degree, .. } => *degree,
        }
    }

    /// Laplace-Beltrami eigenvalue of the mode on the base.
    pub fn eigenvalue<T: Real>(&self, base: &BaseManifold<T>) -> T {
        match self {
            Mode::Fourier { wavevector, .. } => wavevector
                .iter()
                .zip(base.periods())
                .fold(T::zero(), |acc, (&k, &p)| {
                    let w = T::TAU() * T::lit(k as f64) / p;
                    acc + w * w
                }),
            Mode::Harmonic { degree, .. } => {
                let l = T::from_count(*degree);
                let r = base.radius();
                l * (l + T::one()) / (r * r)
            }
        }
    }
}

/// Modes of band at most `band`, constant first, in a fixed order.
pub fn modes_up_to<T: Real>(base: &BaseManifold<T>, band: usize) -> Vec<Mode> {
    match base.kind() {
        BaseKind::FlatTorus => {
            let n = base.dim();
            let b = band as i32;
            let mut out = vec![Mode::Fourier {
                wavevector: vec![0; n],
                phase: Phase::Cos,
            }];
            let side = (2 * band + 1) as i64;
            let total = side.pow(n as u32);
            for code in 0..total {
                let mut c = code;
                let mut k = vec![0i32; n];
                for slot in k.iter_mut().rev() {
                    *slot = (c % side) as i32 - b;
                    c /= side;
                }
                // one representative of each +-k pair
                match k.iter().find(|&&v| v != 0) {
                    Some(&first) if first > 0 => {
                        for phase in [Phase::Cos, Phase::Sin] {
                            out.push(Mode::Fourier {
                                wavevector: k.clone(),
                                phase,
                            });
                        }
                    }
                    _ => {}
                }
            }
            out
        }
        BaseKind::Sphere => {
            let mut out = Vec::new();
            for l in 0..=band {
                out.push(Mode::Harmonic {
                    degree: l,
                    order: 0,
                    phase: Phase::Cos,
                });
                for m in 1..=l {
                    for phase in [Phase::Cos, Phase::Sin] {
                        out.push(Mode::Harmonic {
                            degree: l,
                            order: m,
                            phase,
                        });
                    }
                }
            }
            out
        }
    }
}

/// Associated Legendre function normalized so that the resulting real
/// spherical harmonics are orthonormal on the unit sphere (no Condon-Shortley
/// phase). `x = cos(theta)`, `s = sin(theta) >= 0`.
pub fn legendre_normalized<T: Real>(l: usize, m: usize, x: T, s: T) -> T {
    assert!(m <= l, "order exceeds degree");
    let four_pi = T::lit(4.0) * T::PI();
    let mut pmm = T::one() / four_pi.sqrt();
    for k in 1..=m {
        let kk = T::from_count(k);
        pmm = pmm * ((T::lit(2.0) * kk + T::one()) / (T::lit(2.0) * kk)).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mm = T::from_count(m);
    let mut p_prev = pmm;
    let mut p = (T::lit(2.0) * mm + T::lit(3.0)).sqrt() * x * pmm;
    for ll in m + 2..=l {
        let lf = T::from_count(ll);
        let a = ((T::lit(4.0) * lf * lf - T::one()) / (lf * lf - mm * mm)).sqrt();
        let lm1 = lf - T::one();
        let b = ((lm1 * lm1 - mm * mm) / (T::lit(4.0) * lm1 * lm1 - T::one())).sqrt();
        let next = a * (x * p - b * p_prev);
        p_prev = p;
        p = next;
    }
    p
}

/// Samples a mode on the grid of a base.
pub fn evaluate_mode<T: Real>(base: &BaseManifold<T>, mode: &Mode) -> Vec<T> {
    let grid = base.grid();
    match mode {
        Mode::Fourier { wavevector, phase } => (0..base.npts())
            .map(|i| {
                let x = base.coords(i);
                let arg = wavevector
                    .iter()
                    .zip(&x)
                    .zip(base.periods())
                    .fold(T::zero(), |acc, ((&k, &xa), &p)| {
                        acc + T::TAU() * T::lit(k as f64) * xa / p
                    });
                match phase {
                    Phase::Cos => arg.cos(),
                    Phase::Sin => arg.sin(),
                }
            })
            .collect(),
        Mode::Harmonic {
            degree,
            order,
            phase,
        } => {
            let thetas = grid.axis_coords(0);
            let phis = grid.axis_coords(1);
            let rows: Vec<T> = thetas
                .iter()
                .map(|&t| legendre_normalized(*degree, *order, t.cos(), t.sin()))
                .collect();
            let m = T::from_count(*order);
            let angular: Vec<T> = phis
                .iter()
                .map(|&p| {
                    if *order == 0 {
                        T::one()
                    } else {
                        let v = match phase {
                            Phase::Cos => (m * p).cos(),
                            Phase::Sin => (m * p).sin(),
                        };
                        T::lit(2.0).sqrt() * v
                    }
                })
                .collect();
            let mut out = Vec::with_capacity(base.npts());
            for &r in &rows {
                for &a in &angular {
                    out.push(r * a);
                }
            }
            if *order == 0 && *phase == Phase::Sin {
                out.iter_mut().for_each(|v| *v = T::zero());
            }
            out
        }
    }
}

/// A fixed list of modes sampled once on a grid.
#[derive(Debug, Clone)]
pub struct SpectralBasis<T: Real> {
    base: BaseManifold<T>,
    modes: Vec<Mode>,
    samples: Vec<Vec<T>>,
    /// Base-measure weight per grid point, used for projections.
    weights: Vec<T>,
}

impl<T: Real> SpectralBasis<T> {
    pub fn new(base: &BaseManifold<T>, modes: Vec<Mode>) -> Self {
        let samples = modes.iter().map(|m| evaluate_mode(base, m)).collect();
        let weights = base_measure_weights(base);
        Self {
            base: base.clone(),
            modes,
            samples,
            weights,
        }
    }

    pub fn up_to(base: &BaseManifold<T>, band: usize) -> Self {
        Self::new(base, modes_up_to(base, band))
    }

    pub fn base(&self) -> &BaseManifold<T> {
        &self.base
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[T] {
        &self.samples[i]
    }

    pub fn synthesize(&self, coeffs: &[T]) -> Vec<T> {
        assert_eq!(coeffs.len(), self.modes.len(), "coefficient count");
        let mut out = vec![T::zero(); self.base.npts()];
        for (c, s) in coeffs.iter().zip(&self.samples) {
            if *c == T::zero() {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(s) {
                *o = *o + *c * v;
            }
        }
        out
    }

    /// Least-squares coefficients of a grid field, using the discrete
    /// orthogonality of the modes under the base quadrature.
    pub fn project(&self, values: &[T]) -> Vec<T> {
        self.samples
            .iter()
            .map(|s| {
                let mut num = T::zero();
                let mut den = T::zero();
                for ((&u, &v), &w) in values.iter().zip(s).zip(&self.weights) {
                    num = num + u * v * w;
                    den = den + v * v * w;
                }
                if den > T::zero() {
                    num / den
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    /// Gaussian coefficients scaled by `1 / (1 + lambda_mode)`.
    pub fn random_coefficients(&self, rng: &mut ChaCha8Rng) -> Vec<T> {
        self.modes
            .iter()
            .map(|m| {
                let z: f64 = rng.sample(StandardNormal);
                T::lit(z) / (T::one() + m.eigenvalue(&self.base))
            })
            .collect()
    }
}

/// `sqrt(det g0)` times the chart weight: quadrature for the base measure.
pub fn base_measure_weights<T: Real>(base: &BaseManifold<T>) -> Vec<T> {
    let n = base.dim();
    let w = base.grid().chart_weight();
    (0..base.npts())
        .map(|i| crate::linalg::det(&base.base_metric(i), n).sqrt() * w[i])
        .collect()
}

/// Independent random stream `stream` of the generator seeded by `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for a pair of indices, so that nested loops never share streams.
pub fn stream_id(major: u64, minor: u64) -> u64 {
    (major << 32) ^ minor
}
