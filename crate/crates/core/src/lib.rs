//! Data-consistent regularizing networks for nonlinear inverse problems.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`], [`rng`] and [`linalg`]: images, sinograms, deterministic randomness and the
//!   iterative kernels (LSQR, conjugate gradients, power iteration).
//! - [`operators`]: the forward operators (pointwise saturation, parallel-beam Radon, their
//!   composition) together with right inverses and the normal-cone / kernel / range projections.
//! - [`consistency`]: data-consistent wrappers, alternating projections, Tikhonov
//!   regularization, parameter choices and the regularizing network `R_α = Φ_α ∘ G_α`.
//! - [`learn`]: a small convolutional residual network with hand-written gradients and Adam.
//! - [`experiments`]: phantoms, noise, quality metrics, convergence/rate harnesses and the two
//!   end-to-end experiment pipelines.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix the
//! 64-bit variants used by the experiments.

pub mod consistency;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod learn;
pub mod linalg;
pub mod operators;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use grid::{Extent, Grid, Image, Sinogram};
pub use rng::Rng;
pub use scalar::Scalar;

pub type Image64 = Image<f64>;
pub type Image32 = Image<f32>;
pub type Sinogram64 = Sinogram<f64>;
pub type Sinogram32 = Sinogram<f32>;
pub type RadonOperator64 = operators::RadonOperator<f64>;
pub type SaturationMap64 = operators::SaturationMap<f64>;
pub type ComposedOperator64 = operators::ComposedOperator<f64>;
pub type Network64 = learn::Network<f64>;
pub type Network32 = learn::Network<f32>;
pub type DenseMatrix64 = linalg::DenseMatrix<f64>;
pub type CsrMatrix64 = linalg::CsrMatrix<f64>;
