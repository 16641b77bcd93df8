//! Linear maps and the iterative kernels built on them.

mod cg;
mod dense;
mod lsqr;
mod pinv;
mod power;
mod sparse;
mod vector;

pub use cg::{conjugate_gradient, CgOptions, CgReport};
pub use dense::DenseMatrix;
pub use lsqr::{lsqr, lsqr_solve, LsqrOptions, LsqrReport};
pub use pinv::SpectralPinv;
pub use power::spectral_norm;
pub use sparse::CsrMatrix;
pub use vector::{axpy, dot, l2_distance, norm, scale, sub};

use crate::error::{check_len, Result};
use crate::scalar::Scalar;

/// A matrix-like object that can be applied and transposed.
pub trait LinearMap<T: Scalar>: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;

    /// `y = A x`. Slices are assumed to have the right lengths.
    fn apply_into(&self, x: &[T], y: &mut [T]);

    /// `x = Aᵀ y`.
    fn adjoint_into(&self, y: &[T], x: &mut [T]);

    fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        check_len("linear map input", self.input_dim(), x.len())?;
        let mut y = vec![T::zero(); self.output_dim()];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    fn adjoint(&self, y: &[T]) -> Result<Vec<T>> {
        check_len("linear map adjoint input", self.output_dim(), y.len())?;
        let mut x = vec![T::zero(); self.input_dim()];
        self.adjoint_into(y, &mut x);
        Ok(x)
    }
}

impl<T: Scalar, M: LinearMap<T> + ?Sized> LinearMap<T> for &M {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn output_dim(&self) -> usize {
        (**self).output_dim()
    }
    fn apply_into(&self, x: &[T], y: &mut [T]) {
        (**self).apply_into(x, y)
    }
    fn adjoint_into(&self, y: &[T], x: &mut [T]) {
        (**self).adjoint_into(y, x)
    }
}

/// `Aᵀ` as a map in its own right.
pub struct Transposed<M>(pub M);

impl<T: Scalar, M: LinearMap<T>> LinearMap<T> for Transposed<M> {
    fn input_dim(&self) -> usize {
        self.0.output_dim()
    }
    fn output_dim(&self) -> usize {
        self.0.input_dim()
    }
    fn apply_into(&self, x: &[T], y: &mut [T]) {
        self.0.adjoint_into(x, y)
    }
    fn adjoint_into(&self, y: &[T], x: &mut [T]) {
        self.0.apply_into(y, x)
    }
}

/// Identity on `ℝⁿ`.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl<T: Scalar> LinearMap<T> for Identity {
    fn input_dim(&self) -> usize {
        self.0
    }
    fn output_dim(&self) -> usize {
        self.0
    }
    fn apply_into(&self, x: &[T], y: &mut [T]) {
        y.copy_from_slice(x)
    }
    fn adjoint_into(&self, y: &[T], x: &mut [T]) {
        x.copy_from_slice(y)
    }
}
