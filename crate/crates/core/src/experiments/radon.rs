//! Limited-angle Radon transform followed by sinogram saturation, `F = F₂ ∘ F₁`.
//!
//! Four reconstructions are compared: `F₁†y`, one image network `U₁(F₁†y)`,
//! two networks `U₁(F₁†U₂(y))`, and the composed data-consistent network.

use std::sync::Arc;

use super::gauss::Split;
use super::phantom::gen_ellipse_pair;
use super::report::Method;
use crate::consistency::{composed_stage_one, ComposedDc, LipschitzMap, NullspaceDc, PocsOptions};
use crate::error::Result;
use crate::grid::Grid;
use crate::learn::{Architecture, Dataset, GridNet, Network, PoolAxes, Sample};
use crate::operators::{ComposedOperator, ForwardOperator, RadonOperator};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct RadonSat<T> {
    pub op: ComposedOperator<T>,
    pub pocs: PocsOptions,
    /// Factor applied to regular phantoms; sets how much of the sinogram saturates.
    pub intensity: f64,
}

/// Default regular-set intensity: at `M = 8`, `n = 32` and 8 angles the pseudo-inverse then
/// scores about 23 dB on the regular set.
pub const DEFAULT_INTENSITY: f64 = 0.85;

/// The sinogram network variant of an image architecture: `1×k` kernels along the detector
/// axis and pooling over detector bins only.
pub fn sinogram_architecture(image: &Architecture) -> Architecture {
    Architecture {
        kernel: (1, image.kernel.1),
        pool_axes: PoolAxes::Columns,
        ..*image
    }
}

impl<T: Scalar> RadonSat<T> {
    pub fn new(n: usize, n_angles: usize, level: f64) -> Result<Self> {
        let radon = Arc::new(RadonOperator::new(n, n_angles)?);
        Ok(Self {
            op: ComposedOperator::with_level(radon, T::of(level))?,
            pocs: PocsOptions {
                max_sweeps: 5000,
                ..PocsOptions::default()
            },
            intensity: DEFAULT_INTENSITY,
        })
    }

    pub fn radon(&self) -> &RadonOperator<T> {
        self.op.radon()
    }

    pub fn n(&self) -> usize {
        self.radon().n_x()
    }

    /// Sinogram grid `(n_angles, n_bins)`.
    pub fn data_shape(&self) -> (usize, usize) {
        (self.radon().n_angles(), self.radon().n_bins())
    }

    pub fn level(&self) -> f64 {
        self.op.saturation().levels()[0].f64()
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.op.forward(x)
    }

    /// Regular set: random-ellipse images scaled by `intensity`.
    pub fn draw_regular(&self, count: usize, ellipses: (usize, usize), rng: &mut Rng) -> Result<Split<T>> {
        let mut truth = Vec::with_capacity(count);
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            let (x, _) = gen_ellipse_pair::<T>(rng, self.n(), ellipses)?;
            let x: Vec<T> = x.values().iter().map(|&v| v * T::of(self.intensity)).collect();
            data.push(self.forward(&x)?);
            truth.push(x);
        }
        Ok(Split { truth, data })
    }

    /// Modified set: ellipse images with a smooth bump, scaled so the sinogram peaks at `M·s`
    /// with `s ~ U[0.9, 1.1]`, i.e. below or just around the saturation level.
    pub fn draw_modified(&self, count: usize, ellipses: (usize, usize), rng: &mut Rng) -> Result<Split<T>> {
        let mut truth = Vec::with_capacity(count);
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            let (_, x) = gen_ellipse_pair::<T>(rng, self.n(), ellipses)?;
            let target = self.level() * rng.uniform(0.9, 1.1);
            let peak = self
                .radon()
                .apply_slice(x.values())?
                .iter()
                .fold(0.0f64, |m, v| m.max(v.f64()));
            let s = if peak > 0.0 { target / peak } else { 1.0 };
            let xs: Vec<T> = x.values().iter().map(|&v| v * T::of(s)).collect();
            data.push(self.forward(&xs)?);
            truth.push(xs);
        }
        Ok(Split { truth, data })
    }

    /// `F₁†` applied to each datum.
    pub fn pinv_inputs(&self, data: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        data.iter().map(|y| self.radon().pinv_slice(y)).collect()
    }

    /// Sinogram values are divided by this before they enter `U₂`.
    pub fn sinogram_scale(&self) -> f64 {
        let m = self.level();
        if m > 0.0 {
            m
        } else {
            1.0
        }
    }

    /// `U₂` acting on raw sinograms.
    pub fn sinogram_map(&self, u2: &Network<T>) -> Result<GridNet<T>> {
        let (h, w) = self.data_shape();
        GridNet::new(u2.clone(), h, w)?.with_scale(self.sinogram_scale())
    }

    /// Saturated sinograms paired with the unsaturated ones, both divided by
    /// [`sinogram_scale`](Self::sinogram_scale), for `U₂`.
    pub fn sinogram_dataset(&self, split: &Split<T>) -> Result<Dataset<T>> {
        let (h, w) = self.data_shape();
        let s = T::of(self.sinogram_scale());
        let samples = split
            .truth
            .iter()
            .zip(&split.data)
            .map(|(x, y)| {
                Ok(Sample {
                    input: y.iter().map(|&v| v / s).collect(),
                    target: self.radon().apply_slice(x)?.into_iter().map(|v| v / s).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(h, w, samples)
    }

    /// `F₁†U₂(y)`, the image-network input of the two-network baseline.
    pub fn two_net_inputs(&self, u2: &Network<T>, data: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        let net = self.sinogram_map(u2)?;
        data.iter().map(|y| self.radon().pinv_slice(&net.eval(y)?)).collect()
    }

    fn composed_dc(&self, u1: &Network<T>, u2: &Network<T>) -> Result<ComposedDc<T>> {
        let n = self.n();
        Ok(ComposedDc {
            image_net: Arc::new(GridNet::new(u1.clone(), n, n)?),
            sinogram_net: Arc::new(self.sinogram_map(u2)?),
            op: self.op.clone(),
            pocs: self.pocs,
        })
    }

    /// `F₁† POCS(P_{N_C(y)} U₂(y))`, the image-network input of the data-consistent network.
    pub fn dc_inputs(&self, u2: &Network<T>, data: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        let net = self.sinogram_map(u2)?;
        data.iter()
            .map(|y| composed_stage_one(&net, &self.op, y, self.pocs))
            .collect()
    }

    /// The null-space wrapper `z ↦ z + P_ker(F₁) U₁(z)` as a map.
    pub fn nullspace_dc(&self, u1: &Network<T>) -> Result<NullspaceDc<T>> {
        let n = self.n();
        Ok(NullspaceDc {
            net: Arc::new(GridNet::new(u1.clone(), n, n)?) as Arc<dyn LipschitzMap<T>>,
            radon: self.op.radon_arc(),
        })
    }

    /// The composed data-consistent network as an image map `Φ₀(z) = Φ₀(F(z))`.
    pub fn data_consistent(&self, u1: &Network<T>, u2: &Network<T>) -> Result<ComposedDc<T>> {
        self.composed_dc(u1, u2)
    }

    pub fn methods<'a>(
        &'a self,
        one_net: &'a Network<T>,
        u2: &'a GridNet<T>,
        two_net: &'a Network<T>,
        dc: &'a ComposedDc<T>,
    ) -> Vec<Method<'a, T>> {
        let n = self.n();
        vec![
            Method {
                name: "pseudo-inverse",
                run: Box::new(move |y: &[T]| self.radon().pinv_slice(y)),
            },
            Method {
                name: "one-network",
                run: Box::new(move |y: &[T]| one_net.forward(&self.radon().pinv_slice(y)?, n, n)),
            },
            Method {
                name: "two-networks",
                run: Box::new(move |y: &[T]| {
                    let s = u2.eval(y)?;
                    two_net.forward(&self.radon().pinv_slice(&s)?, n, n)
                }),
            },
            Method {
                name: "data-consistent",
                run: Box::new(move |y: &[T]| dc.from_data(y)),
            },
        ]
    }
}
