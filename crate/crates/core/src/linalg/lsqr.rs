//! Paige–Saunders LSQR. Started from zero it converges to the minimum-norm
//! least-squares solution, which is how the pseudo-inverse is realized iteratively.

use super::{axpy, norm, scale, LinearMap};
use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsqrOptions {
    /// Stop once `‖Aᵀ(b − Ax)‖ ≤ tol·‖Aᵀb‖`.
    pub tol: f64,
    /// `None` means `10·max(rows, cols)`.
    pub max_iter: Option<usize>,
}

impl Default for LsqrOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LsqrReport<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Final `‖Aᵀr‖ / ‖Aᵀb‖` as tracked by the recurrence.
    pub relative_normal_residual: f64,
}

pub fn lsqr<T: Scalar, M: LinearMap<T> + ?Sized>(
    a: &M,
    b: &[T],
    opts: LsqrOptions,
) -> Result<LsqrReport<T>> {
    check_len("lsqr right-hand side", a.output_dim(), b.len())?;
    if !(opts.tol > 0.0) {
        return Err(Error::Precondition("lsqr tolerance must be positive".into()));
    }
    let (m, n) = (a.output_dim(), a.input_dim());
    let max_iter = opts.max_iter.unwrap_or(10 * m.max(n));
    let mut x = vec![T::zero(); n];

    let mut u = b.to_vec();
    let mut beta = norm(&u);
    if beta.is_zero() {
        return Ok(LsqrReport {
            x,
            iterations: 0,
            relative_normal_residual: 0.0,
        });
    }
    scale(beta.recip(), &mut u);
    let mut v = vec![T::zero(); n];
    a.adjoint_into(&u, &mut v);
    let mut alpha = norm(&v);
    if alpha.is_zero() {
        // b is orthogonal to the range; x = 0 is already optimal
        return Ok(LsqrReport {
            x,
            iterations: 0,
            relative_normal_residual: 0.0,
        });
    }
    scale(alpha.recip(), &mut v);
    let atb_norm = alpha * beta;
    let tol = T::of(opts.tol);

    let mut w = v.clone();
    let mut phi_bar = beta;
    let mut rho_bar = alpha;
    let mut av = vec![T::zero(); m];
    let mut atu = vec![T::zero(); n];
    let mut rel = 1.0;

    for it in 1..=max_iter {
        a.apply_into(&v, &mut av);
        for (ui, &avi) in u.iter_mut().zip(&av) {
            *ui = avi - alpha * *ui;
        }
        beta = norm(&u);
        if !beta.is_zero() {
            scale(beta.recip(), &mut u);
            a.adjoint_into(&u, &mut atu);
            for (vi, &ai) in v.iter_mut().zip(&atu) {
                *vi = ai - beta * *vi;
            }
            alpha = norm(&v);
            if !alpha.is_zero() {
                scale(alpha.recip(), &mut v);
            }
        } else {
            alpha = T::zero();
        }

        let rho = rho_bar.hypot(beta);
        let c = rho_bar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rho_bar = -c * alpha;
        let phi = c * phi_bar;
        phi_bar = s * phi_bar;

        axpy(phi / rho, &w, &mut x);
        let t = theta / rho;
        for (wi, &vi) in w.iter_mut().zip(&v) {
            *wi = vi - t * *wi;
        }

        let normal_res = (phi_bar * alpha * c).abs();
        rel = (normal_res / atb_norm).f64();
        if normal_res <= tol * atb_norm || alpha.is_zero() || beta.is_zero() {
            return Ok(LsqrReport {
                x,
                iterations: it,
                relative_normal_residual: rel,
            });
        }
    }
    Err(Error::IterationLimit {
        solver: "lsqr",
        iterations: max_iter,
        residual: rel,
    })
}

/// Minimum-norm least-squares solution of `Ax ≈ b`.
pub fn lsqr_solve<T: Scalar, M: LinearMap<T> + ?Sized>(
    a: &M,
    b: &[T],
    tol: f64,
    max_iter: Option<usize>,
) -> Result<Vec<T>> {
    lsqr(a, b, LsqrOptions { tol, max_iter }).map(|r| r.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{DenseMatrix, Identity};

    #[test]
    fn identity_returns_rhs() {
        let b = vec![1.0f64, -2.0, 3.5];
        let x = lsqr_solve(&Identity(3), &b, 1e-12, None).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = DenseMatrix::from_fn(3, 4, |i, j| (i + 2 * j) as f64);
        assert_eq!(lsqr_solve(&a, &[0.0; 3], 1e-8, None).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn iteration_limit_carries_residual() {
        let a = DenseMatrix::from_fn(6, 6, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let err = lsqr(&a, &[1.0; 6], LsqrOptions { tol: 1e-15, max_iter: Some(1) }).unwrap_err();
        match err {
            Error::IterationLimit { residual, iterations, .. } => {
                assert_eq!(iterations, 1);
                assert!(residual > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
