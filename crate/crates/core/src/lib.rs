//! Graph hypersurfaces over a flat torus or a round sphere: their geometry,
//! discrete tensor calculus on them, functional norms, and empirical
//! estimates of Sobolev, Poincare, interpolation, Calderon-Zygmund and
//! Schauder constants over families of nearby graphs.
//!
//! Everything numeric is generic over [`Real`]; the aliases below fix `f64`.

pub mod base;
pub mod calculus;
pub mod error;
pub mod estimators;
pub mod family;
pub mod geometry;
pub mod height;
pub mod linalg;
pub mod norms;
pub mod scalar;
pub mod spectral;

pub use base::{BaseKind, BaseManifold, DerivativeScheme, Parity};
pub use calculus::TensorField;
pub use error::{GraphError, Result};
pub use estimators::{ConstantEstimate, EstimatorSpec, InequalityKind};
pub use family::{FamilySpec, FamilySweepRecord};
pub use geometry::{GeometryBundle, JacobianData};
pub use height::HeightField;
pub use norms::HolderConvention;
pub use scalar::{Field, Real};
pub use spectral::{Mode, Phase, SpectralBasis};

/// Exact rational scalar for exponent algebra.
pub type Rational = num_rational::Ratio<i64>;

pub type BaseManifoldF64 = BaseManifold<f64>;
pub type HeightFieldF64 = HeightField<f64>;
pub type GeometryBundleF64 = GeometryBundle<f64>;
pub type JacobianDataF64 = JacobianData<f64>;
pub type TensorFieldF64 = TensorField<f64>;
pub type ConstantEstimateF64 = ConstantEstimate<f64>;
pub type FamilySpecF64 = FamilySpec<f64>;
pub type FamilySweepRecordF64 = FamilySweepRecord<f64>;

pub type BaseManifoldF32 = BaseManifold<f32>;
pub type HeightFieldF32 = HeightField<f32>;
pub type GeometryBundleF32 = GeometryBundle<f32>;
pub type TensorFieldF32 = TensorField<f32>;
