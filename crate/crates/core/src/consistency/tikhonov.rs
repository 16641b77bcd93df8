//! Minimizers of `½‖F(x) − y‖² + (α/2)‖x − x₀‖²`.

use crate::error::{check_len, Error, Result};
use crate::linalg::{conjugate_gradient, norm, CgOptions};
use crate::operators::ForwardOperator;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TikhonovOptions {
    /// Relative residual for conjugate gradients (linear `F`).
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Step-change tolerance for gradient descent (nonlinear `F`).
    pub gd_tol: f64,
    pub gd_max_iter: usize,
}

impl Default for TikhonovOptions {
    fn default() -> Self {
        Self {
            cg_tol: 1e-10,
            cg_max_iter: 10_000,
            gd_tol: 1e-10,
            gd_max_iter: 10_000,
        }
    }
}

pub fn tikhonov_reconstruct<T: Scalar, F: ForwardOperator<T> + ?Sized>(
    f: &F,
    y: &[T],
    alpha: f64,
    x0: &[T],
    opts: TikhonovOptions,
) -> Result<Vec<T>> {
    if !(alpha > 0.0) {
        return Err(Error::Precondition(format!("tikhonov needs alpha > 0, got {alpha}")));
    }
    check_len("tikhonov data", f.output_len(), y.len())?;
    check_len("tikhonov prior", f.input_len(), x0.len())?;
    let a = T::of(alpha);
    match f.as_linear() {
        Some(lin) => {
            // (FᵀF + αI) x = Fᵀy + αx₀
            let mut rhs = lin.adjoint(y)?;
            for (r, &p) in rhs.iter_mut().zip(x0) {
                *r = *r + a * p;
            }
            let normal = |x: &[T], out: &mut [T]| {
                let mut fx = vec![T::zero(); lin.output_dim()];
                lin.apply_into(x, &mut fx);
                lin.adjoint_into(&fx, out);
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = *o + a * xi;
                }
            };
            let rep = conjugate_gradient(
                normal,
                &rhs,
                Some(x0),
                CgOptions {
                    tol: opts.cg_tol,
                    max_iter: opts.cg_max_iter,
                },
            )
            .map_err(|e| match e {
                Error::IterationLimit { iterations, residual, .. } => Error::IterationLimit {
                    solver: "tikhonov (conjugate gradients)",
                    iterations,
                    residual,
                },
                other => other,
            })?;
            Ok(rep.x)
        }
        None => gradient_descent(f, y, a, x0, opts),
    }
}

fn objective<T: Scalar, F: ForwardOperator<T> + ?Sized>(f: &F, y: &[T], a: T, x: &[T], x0: &[T]) -> Result<f64> {
    let fx = f.forward(x)?;
    let data: T = fx.iter().zip(y).map(|(&p, &q)| (p - q) * (p - q)).sum();
    let reg: T = x.iter().zip(x0).map(|(&p, &q)| (p - q) * (p - q)).sum();
    Ok((T::of(0.5) * (data + a * reg)).f64())
}

fn gradient_descent<T: Scalar, F: ForwardOperator<T> + ?Sized>(
    f: &F,
    y: &[T],
    a: T,
    x0: &[T],
    opts: TikhonovOptions,
) -> Result<Vec<T>> {
    let l = T::of(f.lipschitz_bound());
    let step = (l * l + a).recip();
    let mut x = x0.to_vec();
    let tol = T::of(opts.gd_tol);
    for _ in 0..opts.gd_max_iter {
        let fx = f.forward(&x)?;
        let r: Vec<T> = fx.iter().zip(y).map(|(&p, &q)| p - q).collect();
        let mut g = f.vjp(&x, &r)?;
        for ((gi, &xi), &pi) in g.iter_mut().zip(&x).zip(x0) {
            *gi = *gi + a * (xi - pi);
        }
        let change = step * norm(&g);
        for (xi, &gi) in x.iter_mut().zip(&g) {
            *xi = *xi - step * gi;
        }
        if change <= tol * norm(&x).max(T::one()) {
            return Ok(x);
        }
    }
    Err(Error::IterationLimit {
        solver: "tikhonov (gradient descent)",
        iterations: opts.gd_max_iter,
        residual: objective(f, y, a, &x, x0)?,
    })
}
