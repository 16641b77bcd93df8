//! Exact data-consistent projections `P_{z,0}` and their relaxation `P_{z,α}`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::l2_distance;
use crate::operators::{ForwardOperator, RadonOperator, SaturationMap};
use crate::scalar::Scalar;

/// `u ↦ P_{z,0}(u)` with `F(P_{z,0}(u)) = F(z)`.
pub trait DataConsistentProjection<T: Scalar>: Send + Sync {
    fn project(&self, z: &[T], u: &[T]) -> Result<Vec<T>>;
}

/// Pointwise: `P_{N_C(P_C z)}(u)`.
#[derive(Debug, Clone)]
pub struct SaturationProjection<T>(pub SaturationMap<T>);

impl<T: Scalar> DataConsistentProjection<T> for SaturationProjection<T> {
    fn project(&self, z: &[T], u: &[T]) -> Result<Vec<T>> {
        let y = self.0.saturate_slice(z)?;
        self.0.normal_cone_project_slice(&y, u)
    }
}

/// Affine: `u − F₁†(F₁u − F₁z)`, i.e. the row-space part of `z` plus the kernel part of `u`.
#[derive(Debug, Clone)]
pub struct NullspaceProjection<T>(pub Arc<RadonOperator<T>>);

impl<T: Scalar> DataConsistentProjection<T> for NullspaceProjection<T> {
    fn project(&self, z: &[T], u: &[T]) -> Result<Vec<T>> {
        let d: Vec<T> = u.iter().zip(z).map(|(&a, &b)| a - b).collect();
        let row = self.0.row_space_project_slice(&d)?;
        Ok(u.iter().zip(&row).map(|(&a, &b)| a - b).collect())
    }
}

/// Point on the segment from `u` to `P_{z,0}(u)` closest to `u` with `‖F(·) − F(z)‖ ≤ radius`.
/// The segment parameter is found by bisection to `1e-8`.
pub fn relaxed_project<T, F, P>(f: &F, exact: &P, z: &[T], u: &[T], radius: f64) -> Result<Vec<T>>
where
    T: Scalar,
    F: ForwardOperator<T> + ?Sized,
    P: DataConsistentProjection<T> + ?Sized,
{
    if !(radius >= 0.0) {
        return Err(Error::Precondition(format!("radius must be nonnegative, got {radius}")));
    }
    let fz = f.forward(z)?;
    let misfit = |x: &[T]| -> Result<f64> { Ok(l2_distance(&f.forward(x)?, &fz)?.f64()) };
    if misfit(u)? <= radius {
        return Ok(u.to_vec());
    }
    let p = exact.project(z, u)?;
    if radius == 0.0 {
        return Ok(p);
    }
    let point = |t: f64| -> Vec<T> {
        let t = T::of(t);
        u.iter().zip(&p).map(|(&a, &b)| a + t * (b - a)).collect()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if misfit(&point(mid))? <= radius {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(point(hi))
}
