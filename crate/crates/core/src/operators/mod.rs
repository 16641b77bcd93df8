//! Forward operators and their right inverses.

mod composed;
mod radon;
mod saturation;

pub use composed::ComposedOperator;
pub use radon::{PinvMethod, RadonOperator};
pub use saturation::{normal_cone_project, SaturationMap};

use crate::error::Result;
use crate::linalg::LinearMap;
use crate::scalar::Scalar;

/// Evaluation contract for `F` on flat vectors.
pub trait ForwardOperator<T: Scalar>: Send + Sync {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;

    fn forward(&self, x: &[T]) -> Result<Vec<T>>;

    /// `J_F(x)ᵀ r`. For piecewise-linear maps the kink takes the saturated branch.
    fn vjp(&self, x: &[T], r: &[T]) -> Result<Vec<T>>;

    /// The operator as a linear map, when it is one.
    fn as_linear(&self) -> Option<&dyn LinearMap<T>> {
        None
    }

    /// Upper bound on the Lipschitz constant, used to pick gradient step sizes.
    fn lipschitz_bound(&self) -> f64;
}

/// Any linear map viewed as a forward operator.
#[derive(Debug, Clone)]
pub struct Linear<M>(pub M);

impl<T: Scalar, M: LinearMap<T>> ForwardOperator<T> for Linear<M> {
    fn input_len(&self) -> usize {
        self.0.input_dim()
    }

    fn output_len(&self) -> usize {
        self.0.output_dim()
    }

    fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.0.apply(x)
    }

    fn vjp(&self, _x: &[T], r: &[T]) -> Result<Vec<T>> {
        self.0.adjoint(r)
    }

    fn as_linear(&self) -> Option<&dyn LinearMap<T>> {
        Some(&self.0)
    }

    fn lipschitz_bound(&self) -> f64 {
        let mut rng = crate::rng::Rng::new(0x11ce);
        // power iteration underestimates; pad it
        1.05 * crate::linalg::spectral_norm(&self.0, 200, &mut rng).f64()
    }
}

/// Orthogonal projection onto the range of a linear operator.
pub trait RangeProjector<T: Scalar>: Send + Sync {
    fn range_project(&self, y: &[T]) -> Result<Vec<T>>;
}
