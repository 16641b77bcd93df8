use std::sync::Arc;

use super::{ForwardOperator, RadonOperator, SaturationMap};
use crate::error::{Error, Result};
use crate::grid::{Image, Sinogram};
use crate::scalar::Scalar;

/// `F = F₂ ∘ F₁`: Radon transform followed by saturation of the sinogram.
#[derive(Debug, Clone)]
pub struct ComposedOperator<T> {
    radon: Arc<RadonOperator<T>>,
    saturation: SaturationMap<T>,
}

impl<T: Scalar> ComposedOperator<T> {
    pub fn new(radon: Arc<RadonOperator<T>>, saturation: SaturationMap<T>) -> Result<Self> {
        if saturation.shape() != (radon.n_angles(), radon.n_bins()) {
            return Err(Error::Dimension {
                context: "composed operator saturation grid",
                expected: radon.n_angles() * radon.n_bins(),
                got: saturation.levels().len(),
            });
        }
        Ok(Self { radon, saturation })
    }

    /// Constant saturation level on the full sinogram.
    pub fn with_level(radon: Arc<RadonOperator<T>>, level: T) -> Result<Self> {
        let sat = SaturationMap::constant(radon.n_angles(), radon.n_bins(), level)?;
        Self::new(radon, sat)
    }

    pub fn radon(&self) -> &RadonOperator<T> {
        &self.radon
    }

    pub fn radon_arc(&self) -> Arc<RadonOperator<T>> {
        Arc::clone(&self.radon)
    }

    pub fn saturation(&self) -> &SaturationMap<T> {
        &self.saturation
    }

    pub fn apply(&self, x: &Image<T>) -> Result<Sinogram<T>> {
        self.saturation.saturate(&self.radon.apply(x)?)
    }
}

impl<T: Scalar> ForwardOperator<T> for ComposedOperator<T> {
    fn input_len(&self) -> usize {
        self.radon.input_len()
    }

    fn output_len(&self) -> usize {
        self.radon.output_len()
    }

    fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.saturation.saturate_slice(&self.radon.forward(x)?)
    }

    fn vjp(&self, x: &[T], r: &[T]) -> Result<Vec<T>> {
        let y = self.radon.forward(x)?;
        let g = self.saturation.vjp(&y, r)?;
        self.radon.vjp(x, &g)
    }

    fn lipschitz_bound(&self) -> f64 {
        self.radon.lipschitz_bound()
    }
}
