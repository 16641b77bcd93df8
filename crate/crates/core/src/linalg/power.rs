use super::{norm, scale, LinearMap};
use crate::rng::Rng;
use crate::scalar::Scalar;

/// Largest singular value by power iteration on `AᵀA` from a random start.
///
/// The returned value is `max_k ‖A v_k‖` over the unit iterates, so it never exceeds `σ_max`.
pub fn spectral_norm<T: Scalar, M: LinearMap<T> + ?Sized>(a: &M, iters: usize, rng: &mut Rng) -> T {
    let iters = iters.max(1);
    let mut v: Vec<T> = rng.gaussian_vec(a.input_dim());
    let n0 = norm(&v);
    if n0.is_zero() {
        return T::zero();
    }
    scale(n0.recip(), &mut v);
    let mut av = vec![T::zero(); a.output_dim()];
    let mut best = T::zero();
    for _ in 0..iters {
        a.apply_into(&v, &mut av);
        let s = norm(&av);
        if s > best {
            best = s;
        }
        if s.is_zero() {
            break;
        }
        a.adjoint_into(&av, &mut v);
        let nv = norm(&v);
        if nv.is_zero() {
            break;
        }
        scale(nv.recip(), &mut v);
    }
    best
}
