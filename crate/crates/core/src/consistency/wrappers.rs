//! The data-consistent networks `Φ₀` for the saturation, linear and composed problems.

use std::sync::Arc;

use super::pocs::{pocs, PocsOptions};
use super::LipschitzMap;
use crate::error::{check_len, Result};
use crate::grid::{Grid, Image};
use crate::operators::{ComposedOperator, RadonOperator, SaturationMap};
use crate::scalar::Scalar;

/// `P_{N_C(P_C z)}(U(z))`; `F` of the output equals `F(z)` cell by cell.
pub fn dc_wrap_saturation<T, G, U>(u: &U, z: &G, m: &SaturationMap<T>) -> Result<G>
where
    T: Scalar,
    G: Grid<T>,
    U: LipschitzMap<T> + ?Sized,
{
    let y = m.saturate(z)?;
    let uz = u.eval(z.values())?;
    check_len("network output", z.len(), uz.len())?;
    z.with_values(m.normal_cone_project_slice(y.values(), &uz)?)
}

/// `z + P_ker(F₁) U(z)`.
pub fn dc_wrap_nullspace<T, U>(u: &U, radon: &RadonOperator<T>, z: &Image<T>) -> Result<Image<T>>
where
    T: Scalar,
    U: LipschitzMap<T> + ?Sized,
{
    z.with_values(nullspace_slice(u, radon, z.values())?)
}

fn nullspace_slice<T, U>(u: &U, radon: &RadonOperator<T>, z: &[T]) -> Result<Vec<T>>
where
    T: Scalar,
    U: LipschitzMap<T> + ?Sized,
{
    let uz = u.eval(z)?;
    check_len("network output", z.len(), uz.len())?;
    let k = radon.kernel_project_slice(&uz)?;
    Ok(z.iter().zip(&k).map(|(&a, &b)| a + b).collect())
}

/// Composed wrapper evaluated from saturated data `y`:
/// sinogram wrapper, alternating projections, `F₁†`, then the null-space wrapper.
pub fn dc_wrap_composed_from_data<T, U1, U2>(
    u1: &U1,
    u2: &U2,
    op: &ComposedOperator<T>,
    y: &[T],
    opts: PocsOptions,
) -> Result<Vec<T>>
where
    T: Scalar,
    U1: LipschitzMap<T> + ?Sized,
    U2: LipschitzMap<T> + ?Sized,
{
    let x1 = composed_stage_one(u2, op, y, opts)?;
    nullspace_slice(u1, op.radon(), &x1)
}

/// First half of the composed wrapper: `F₁† POCS(P_{N_C(y)} U₂(y))`.
pub fn composed_stage_one<T, U2>(u2: &U2, op: &ComposedOperator<T>, y: &[T], opts: PocsOptions) -> Result<Vec<T>>
where
    T: Scalar,
    U2: LipschitzMap<T> + ?Sized,
{
    let m = op.saturation();
    check_len("composed wrapper data", m.levels().len(), y.len())?;
    let u = u2.eval(y)?;
    check_len("sinogram network output", y.len(), u.len())?;
    let start = m.normal_cone_project_slice(y, &u)?;
    let rep = pocs(op.radon(), y, &start, m, opts)?;
    op.radon().pinv_slice(&rep.v)
}

/// `Φ₀(z)` for `F = F₂∘F₁`, computed as the data pipeline applied to `F(z)`.
pub fn dc_wrap_composed<T, U1, U2>(
    u1: &U1,
    u2: &U2,
    op: &ComposedOperator<T>,
    z: &Image<T>,
    opts: PocsOptions,
) -> Result<Image<T>>
where
    T: Scalar,
    U1: LipschitzMap<T> + ?Sized,
    U2: LipschitzMap<T> + ?Sized,
{
    let y = op.apply(z)?;
    z.with_values(dc_wrap_composed_from_data(u1, u2, op, y.values(), opts)?)
}

/// [`dc_wrap_saturation`] packaged as a map.
pub struct SaturationDc<T: Scalar> {
    pub net: Arc<dyn LipschitzMap<T>>,
    pub levels: SaturationMap<T>,
}

impl<T: Scalar> LipschitzMap<T> for SaturationDc<T> {
    fn eval(&self, z: &[T]) -> Result<Vec<T>> {
        let y = self.levels.saturate_slice(z)?;
        let u = self.net.eval(z)?;
        self.levels.normal_cone_project_slice(&y, &u)
    }

    fn lipschitz(&self) -> Option<f64> {
        // projection onto N_C(y) is not jointly Lipschitz in (y, u) beyond 1 + L
        self.net.lipschitz().map(|l| 1.0 + l)
    }
}

/// [`dc_wrap_nullspace`] packaged as a map.
pub struct NullspaceDc<T: Scalar> {
    pub net: Arc<dyn LipschitzMap<T>>,
    pub radon: Arc<RadonOperator<T>>,
}

impl<T: Scalar> LipschitzMap<T> for NullspaceDc<T> {
    fn eval(&self, z: &[T]) -> Result<Vec<T>> {
        nullspace_slice(self.net.as_ref(), &self.radon, z)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.net.lipschitz().map(|l| 1.0 + l)
    }
}

/// [`dc_wrap_composed`] packaged as a map on images.
pub struct ComposedDc<T: Scalar> {
    pub image_net: Arc<dyn LipschitzMap<T>>,
    pub sinogram_net: Arc<dyn LipschitzMap<T>>,
    pub op: ComposedOperator<T>,
    pub pocs: PocsOptions,
}

impl<T: Scalar> ComposedDc<T> {
    /// Runs the pipeline on saturated data.
    pub fn from_data(&self, y: &[T]) -> Result<Vec<T>> {
        dc_wrap_composed_from_data(
            self.image_net.as_ref(),
            self.sinogram_net.as_ref(),
            &self.op,
            y,
            self.pocs,
        )
    }

    /// Output of the sinogram stage, `F₁†(POCS(...))`, the input the image network sees.
    pub fn stage_one(&self, y: &[T]) -> Result<Vec<T>> {
        composed_stage_one(self.sinogram_net.as_ref(), &self.op, y, self.pocs)
    }
}

impl<T: Scalar> LipschitzMap<T> for ComposedDc<T> {
    fn eval(&self, z: &[T]) -> Result<Vec<T>> {
        let y = crate::operators::ForwardOperator::forward(&self.op, z)?;
        self.from_data(&y)
    }

    fn lipschitz(&self) -> Option<f64> {
        None
    }
}
