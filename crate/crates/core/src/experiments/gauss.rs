//! Saturated Gaussians: `F = P_C` with levels `0.6` on the centre disk and `0` outside.

use super::phantom::{disk_saturation_levels, gen_gaussian_phantom, PhantomRegime};
use super::report::Method;
use crate::consistency::{tikhonov_reconstruct, TikhonovOptions};
use crate::error::Result;
use crate::grid::Grid;
use crate::learn::{Dataset, Network, Sample};
use crate::operators::SaturationMap;
use crate::rng::Rng;
use crate::scalar::Scalar;

/// Ground truths and the matching saturated data.
#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub truth: Vec<Vec<T>>,
    pub data: Vec<Vec<T>>,
}

impl<T: Scalar> Split<T> {
    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    /// Pairs `(inputs[i], truth[i])`.
    pub fn dataset(&self, inputs: &[Vec<T>], n: usize) -> Result<Dataset<T>> {
        Dataset::new(
            n,
            n,
            inputs
                .iter()
                .zip(&self.truth)
                .map(|(i, t)| Sample {
                    input: i.clone(),
                    target: t.clone(),
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct GaussSat<T> {
    pub n: usize,
    pub levels: SaturationMap<T>,
}

impl<T: Scalar> GaussSat<T> {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            levels: SaturationMap::from_grid(&disk_saturation_levels::<T>(n))?,
        })
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.levels.saturate_slice(x)
    }

    pub fn draw(&self, regime: &PhantomRegime, count: usize, rng: &mut Rng) -> Result<Split<T>> {
        let mut truth = Vec::with_capacity(count);
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            let x = gen_gaussian_phantom::<T>(rng, regime, self.n)?;
            data.push(self.forward(x.values())?);
            truth.push(x.into_values());
        }
        Ok(Split { truth, data })
    }

    /// `G_α(y)`: Tikhonov on the saturation operator from `x₀ = 0`.
    pub fn tikhonov(&self, y: &[T], alpha: f64) -> Result<Vec<T>> {
        let x0 = vec![T::zero(); y.len()];
        tikhonov_reconstruct(&self.levels, y, alpha, &x0, TikhonovOptions::default())
    }

    /// Right inverse `G₀ = id`, the plain network `U` and the wrapper `Φ₀ = P_{N_C(y)} ∘ U`.
    pub fn methods<'a>(&'a self, net: &'a Network<T>, dc_net: &'a Network<T>) -> Vec<Method<'a, T>> {
        let n = self.n;
        vec![
            Method {
                name: "pseudo-inverse",
                run: Box::new(|y: &[T]| Ok(y.to_vec())),
            },
            Method {
                name: "network",
                run: Box::new(move |y: &[T]| net.forward(y, n, n)),
            },
            Method {
                name: "data-consistent",
                run: Box::new(move |y: &[T]| {
                    let u = dc_net.forward(y, n, n)?;
                    self.levels.normal_cone_project_slice(y, &u)
                }),
            },
        ]
    }
}
