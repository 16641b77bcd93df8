use super::{axpy, dot, norm};
use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Relative residual `‖b − Ax‖ / ‖b‖` at which to stop.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgReport<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradients for a symmetric positive definite operator given as `apply(x, out)`.
pub fn conjugate_gradient<T: Scalar>(
    apply: impl Fn(&[T], &mut [T]),
    b: &[T],
    x0: Option<&[T]>,
    opts: CgOptions,
) -> Result<CgReport<T>> {
    let n = b.len();
    let mut x = match x0 {
        Some(x0) => {
            check_len("cg initial guess", n, x0.len())?;
            x0.to_vec()
        }
        None => vec![T::zero(); n],
    };
    let b_norm = norm(b);
    if b_norm.is_zero() {
        return Ok(CgReport {
            x: vec![T::zero(); n],
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut ap = vec![T::zero(); n];
    apply(&x, &mut ap);
    let mut r: Vec<T> = b.iter().zip(&ap).map(|(&bi, &ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let tol = T::of(opts.tol) * b_norm;
    if rr.sqrt() <= tol {
        return Ok(CgReport {
            x,
            iterations: 0,
            relative_residual: (rr.sqrt() / b_norm).f64(),
        });
    }
    for it in 1..=opts.max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::Precondition(
                "conjugate gradients needs a positive definite operator".into(),
            ));
        }
        let step = rr / pap;
        axpy(step, &p, &mut x);
        axpy(-step, &ap, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol {
            return Ok(CgReport {
                x,
                iterations: it,
                relative_residual: (rr_new.sqrt() / b_norm).f64(),
            });
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, &ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Err(Error::IterationLimit {
        solver: "conjugate gradients",
        iterations: opts.max_iter,
        residual: (rr.sqrt() / b_norm).f64(),
    })
}
