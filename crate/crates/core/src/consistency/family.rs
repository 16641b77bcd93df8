//! Families `G_α`, `Φ_α` and the regularizing network `R_α = Φ_α ∘ G_α`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::parameter::{ParameterChoice, RadiusRule};
use super::relaxed::{relaxed_project, DataConsistentProjection};
use super::tikhonov::{tikhonov_reconstruct, TikhonovOptions};
use super::LipschitzMap;
use crate::error::{Error, Result};
use crate::operators::{ForwardOperator, RadonOperator};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularizerKind {
    Tikhonov,
    PseudoInverse,
    ComposedRightInverse,
    Identity,
}

/// `(α, y) ↦ G_α(y)`.
pub trait RegularizerFamily<T: Scalar>: Send + Sync {
    fn reconstruct(&self, alpha: f64, y: &[T]) -> Result<Vec<T>>;
    fn kind(&self) -> RegularizerKind;
}

pub struct TikhonovRegularizer<T: Scalar> {
    pub op: Arc<dyn ForwardOperator<T>>,
    pub x0: Vec<T>,
    pub opts: TikhonovOptions,
}

impl<T: Scalar> TikhonovRegularizer<T> {
    pub fn new(op: Arc<dyn ForwardOperator<T>>) -> Self {
        let x0 = vec![T::zero(); op.input_len()];
        Self {
            op,
            x0,
            opts: TikhonovOptions::default(),
        }
    }
}

impl<T: Scalar> RegularizerFamily<T> for TikhonovRegularizer<T> {
    fn reconstruct(&self, alpha: f64, y: &[T]) -> Result<Vec<T>> {
        tikhonov_reconstruct(self.op.as_ref(), y, alpha, &self.x0, self.opts)
    }

    fn kind(&self) -> RegularizerKind {
        RegularizerKind::Tikhonov
    }
}

/// `F₁†`, ignoring `α`. On saturated data this is the composed right inverse `F₁† ∘ id`.
pub struct PseudoInverseRegularizer<T: Scalar> {
    pub radon: Arc<RadonOperator<T>>,
    pub composed: bool,
}

impl<T: Scalar> RegularizerFamily<T> for PseudoInverseRegularizer<T> {
    fn reconstruct(&self, _alpha: f64, y: &[T]) -> Result<Vec<T>> {
        self.radon.pinv_slice(y)
    }

    fn kind(&self) -> RegularizerKind {
        if self.composed {
            RegularizerKind::ComposedRightInverse
        } else {
            RegularizerKind::PseudoInverse
        }
    }
}

/// `G_α = id`, the right inverse of a pointwise saturation on feasible data.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityRegularizer;

impl<T: Scalar> RegularizerFamily<T> for IdentityRegularizer {
    fn reconstruct(&self, _alpha: f64, y: &[T]) -> Result<Vec<T>> {
        Ok(y.to_vec())
    }

    fn kind(&self) -> RegularizerKind {
        RegularizerKind::Identity
    }
}

/// `(α, z) ↦ Φ_α(z)`.
pub trait WrapperFamily<T: Scalar>: Send + Sync {
    fn wrap(&self, alpha: f64, z: &[T]) -> Result<Vec<T>>;

    /// Uniform Lipschitz bound over `α`, if known.
    fn lipschitz(&self) -> Option<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityWrapper;

impl<T: Scalar> WrapperFamily<T> for IdentityWrapper {
    fn wrap(&self, _alpha: f64, z: &[T]) -> Result<Vec<T>> {
        Ok(z.to_vec())
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `Φ_α = Φ₀` for every `α`.
pub struct FixedWrapper<T: Scalar>(pub Arc<dyn LipschitzMap<T>>);

impl<T: Scalar> WrapperFamily<T> for FixedWrapper<T> {
    fn wrap(&self, _alpha: f64, z: &[T]) -> Result<Vec<T>> {
        self.0.eval(z)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.0.lipschitz()
    }
}

/// `Φ_α(z) = P_{z,α}(U(z))` with consistency radius `r(α)`.
pub struct RelaxedWrapper<T: Scalar> {
    pub net: Arc<dyn LipschitzMap<T>>,
    pub forward: Arc<dyn ForwardOperator<T>>,
    pub projection: Arc<dyn DataConsistentProjection<T>>,
    pub radius: RadiusRule,
}

impl<T: Scalar> WrapperFamily<T> for RelaxedWrapper<T> {
    fn wrap(&self, alpha: f64, z: &[T]) -> Result<Vec<T>> {
        let u = self.net.eval(z)?;
        relaxed_project(
            self.forward.as_ref(),
            self.projection.as_ref(),
            z,
            &u,
            self.radius.radius(alpha),
        )
    }

    fn lipschitz(&self) -> Option<f64> {
        None
    }
}

/// One trained network per `α` rung; `α` is matched to the nearest rung on a log scale.
pub struct LadderWrapper<T: Scalar> {
    rungs: Vec<(f64, Arc<dyn LipschitzMap<T>>)>,
}

impl<T: Scalar> LadderWrapper<T> {
    pub fn new(rungs: Vec<(f64, Arc<dyn LipschitzMap<T>>)>) -> Result<Self> {
        if rungs.is_empty() || rungs.iter().any(|(a, _)| !(*a > 0.0)) {
            return Err(Error::Config("alpha ladder needs positive rungs".into()));
        }
        Ok(Self { rungs })
    }

    fn pick(&self, alpha: f64) -> &Arc<dyn LipschitzMap<T>> {
        let la = alpha.max(f64::MIN_POSITIVE).ln();
        let (_, net) = self
            .rungs
            .iter()
            .min_by(|a, b| {
                (a.0.ln() - la)
                    .abs()
                    .partial_cmp(&(b.0.ln() - la).abs())
                    .expect("finite")
            })
            .expect("nonempty");
        net
    }
}

impl<T: Scalar> WrapperFamily<T> for LadderWrapper<T> {
    fn wrap(&self, alpha: f64, z: &[T]) -> Result<Vec<T>> {
        self.pick(alpha).eval(z)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.rungs
            .iter()
            .map(|(_, n)| n.lipschitz())
            .try_fold(0.0f64, |acc, l| l.map(|l| acc.max(l)))
    }
}

/// `R_δ(y) = Φ_α(G_α(y))` with `α = α*(δ)`.
pub fn regularizing_network_apply<T, G, P>(g: &G, phi: &P, pc: &ParameterChoice, delta: f64, y: &[T]) -> Result<Vec<T>>
where
    T: Scalar,
    G: RegularizerFamily<T> + ?Sized,
    P: WrapperFamily<T> + ?Sized,
{
    if !(delta >= 0.0) {
        return Err(Error::Precondition(format!("noise level must be nonnegative, got {delta}")));
    }
    let alpha = pc.alpha(delta);
    phi.wrap(alpha, &g.reconstruct(alpha, y)?)
}
