//! Fixed maps applied after the network during training, e.g. a data-consistency wrapper.

use std::sync::Arc;

use crate::error::Result;
use crate::operators::{RadonOperator, SaturationMap};
use crate::scalar::Scalar;

/// `out = head(z, U(z))` together with its pullback to `U(z)`.
pub trait OutputHead<T: Scalar>: Send + Sync {
    fn apply(&self, z: &[T], u: &[T]) -> Result<Vec<T>>;
    fn pullback(&self, z: &[T], u: &[T], g: &[T]) -> Result<Vec<T>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityHead;

impl<T: Scalar> OutputHead<T> for IdentityHead {
    fn apply(&self, _z: &[T], u: &[T]) -> Result<Vec<T>> {
        Ok(u.to_vec())
    }

    fn pullback(&self, _z: &[T], _u: &[T], g: &[T]) -> Result<Vec<T>> {
        Ok(g.to_vec())
    }
}

/// `z + P_ker(F₁) u`; the pullback is `P_ker g` since the projector is symmetric.
#[derive(Debug, Clone)]
pub struct NullspaceHead<T>(pub Arc<RadonOperator<T>>);

impl<T: Scalar> OutputHead<T> for NullspaceHead<T> {
    fn apply(&self, z: &[T], u: &[T]) -> Result<Vec<T>> {
        let k = self.0.kernel_project_slice(u)?;
        Ok(z.iter().zip(&k).map(|(&a, &b)| a + b).collect())
    }

    fn pullback(&self, _z: &[T], _u: &[T], g: &[T]) -> Result<Vec<T>> {
        self.0.kernel_project_slice(g)
    }
}

/// `P_{N_C(P_C z)}(u)`; gradient flows only through saturated cells where `u > M`.
#[derive(Debug, Clone)]
pub struct SaturationHead<T>(pub SaturationMap<T>);

impl<T: Scalar> OutputHead<T> for SaturationHead<T> {
    fn apply(&self, z: &[T], u: &[T]) -> Result<Vec<T>> {
        let y = self.0.saturate_slice(z)?;
        self.0.normal_cone_project_slice(&y, u)
    }

    fn pullback(&self, z: &[T], u: &[T], g: &[T]) -> Result<Vec<T>> {
        Ok(z.iter()
            .zip(u)
            .zip(g)
            .zip(self.0.levels())
            .map(|(((&zv, &uv), &gv), &m)| if zv >= m && uv > m { gv } else { T::zero() })
            .collect())
    }
}
