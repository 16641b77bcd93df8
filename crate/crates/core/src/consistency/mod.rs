//! Data-consistent wrappers, alternating projections and classical regularization.

mod family;
mod parameter;
mod pocs;
mod relaxed;
mod tikhonov;
mod wrappers;

pub use family::{
    regularizing_network_apply, FixedWrapper, IdentityRegularizer, IdentityWrapper, LadderWrapper,
    PseudoInverseRegularizer, RegularizerFamily, RegularizerKind, RelaxedWrapper, TikhonovRegularizer,
    WrapperFamily,
};
pub use parameter::{ParameterChoice, RadiusRule, ALPHA_FLOOR};
pub use pocs::{pocs, pocs_intersect, PocsOptions, PocsReport};
pub use relaxed::{relaxed_project, DataConsistentProjection, NullspaceProjection, SaturationProjection};
pub use tikhonov::{tikhonov_reconstruct, TikhonovOptions};
pub use wrappers::{
    composed_stage_one,
    dc_wrap_composed, dc_wrap_composed_from_data, dc_wrap_nullspace, dc_wrap_saturation, ComposedDc,
    NullspaceDc, SaturationDc,
};

use crate::error::Result;
use crate::scalar::Scalar;

/// A map `u ↦ U(u)` on flat vectors with an optional reported Lipschitz bound.
pub trait LipschitzMap<T: Scalar>: Send + Sync {
    fn eval(&self, u: &[T]) -> Result<Vec<T>>;

    /// Reported bound `L`; `None` when nothing useful is known.
    fn lipschitz(&self) -> Option<f64>;
}

impl<T: Scalar, M: LipschitzMap<T> + ?Sized> LipschitzMap<T> for &M {
    fn eval(&self, u: &[T]) -> Result<Vec<T>> {
        (**self).eval(u)
    }
    fn lipschitz(&self) -> Option<f64> {
        (**self).lipschitz()
    }
}

impl<T: Scalar, M: LipschitzMap<T> + ?Sized> LipschitzMap<T> for std::sync::Arc<M> {
    fn eval(&self, u: &[T]) -> Result<Vec<T>> {
        (**self).eval(u)
    }
    fn lipschitz(&self) -> Option<f64> {
        (**self).lipschitz()
    }
}

impl<T: Scalar, M: LipschitzMap<T> + ?Sized> LipschitzMap<T> for Box<M> {
    fn eval(&self, u: &[T]) -> Result<Vec<T>> {
        (**self).eval(u)
    }
    fn lipschitz(&self) -> Option<f64> {
        (**self).lipschitz()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMap;

impl<T: Scalar> LipschitzMap<T> for IdentityMap {
    fn eval(&self, u: &[T]) -> Result<Vec<T>> {
        Ok(u.to_vec())
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(1.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroMap;

impl<T: Scalar> LipschitzMap<T> for ZeroMap {
    fn eval(&self, u: &[T]) -> Result<Vec<T>> {
        Ok(vec![T::zero(); u.len()])
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Closure with a caller-asserted Lipschitz bound.
pub struct FnMap<F> {
    f: F,
    lipschitz: Option<f64>,
}

impl<F> FnMap<F> {
    pub fn new(f: F, lipschitz: Option<f64>) -> Self {
        Self { f, lipschitz }
    }
}

impl<T: Scalar, F> LipschitzMap<T> for FnMap<F>
where
    F: Fn(&[T]) -> Vec<T> + Send + Sync,
{
    fn eval(&self, u: &[T]) -> Result<Vec<T>> {
        Ok((self.f)(u))
    }
    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}
