//! Pseudo-inverse through an eigendecomposition of the smaller Gram matrix.
//!
//! For a wide `A` (m ≤ n) with `AAᵀ = U Λ Uᵀ` truncated to the nonzero spectrum,
//! `A† = Aᵀ U Λ⁻¹ Uᵀ` and `AA† = U Uᵀ`. A tall `A` uses `AᵀA = V Λ Vᵀ` and `A† = V Λ⁻¹ Vᵀ Aᵀ`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{DenseMatrix, LinearMap};
use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    /// basis spans range(A) ⊂ ℝᵐ
    Range,
    /// basis spans the row space ⊂ ℝⁿ
    Domain,
}

#[derive(Debug, Clone)]
pub struct SpectralPinv {
    m: usize,
    n: usize,
    side: Side,
    /// column-major, `rank` columns of length `m` (Range) or `n` (Domain)
    basis: Vec<f64>,
    inv_lambda: Vec<f64>,
    lambda_max: f64,
}

impl SpectralPinv {
    /// Eigenvalues below `rel_cutoff·λ_max` are treated as zero.
    pub fn new<T: Scalar, M: LinearMap<T> + ?Sized>(a: &M, rel_cutoff: f64) -> Result<Self> {
        if !(rel_cutoff > 0.0 && rel_cutoff < 1.0) {
            return Err(Error::Precondition("spectral cutoff must lie in (0, 1)".into()));
        }
        let (m, n) = (a.output_dim(), a.input_dim());
        let side = if m <= n { Side::Range } else { Side::Domain };
        let k = m.min(n);
        // columns of A (or Aᵀ) in f64
        let dense: DenseMatrix<T> = match side {
            Side::Range => DenseMatrix::from_map(&super::Transposed(a)),
            Side::Domain => DenseMatrix::from_map(a),
        };
        // dense is (big × k); Gram = denseᵀ dense
        let big = dense.rows();
        let b = DMatrix::<f64>::from_fn(big, k, |i, j| dense.get(i, j).f64());
        let gram = b.tr_mul(&b);
        let gram = (&gram + gram.transpose()) * 0.5;
        let eig = SymmetricEigen::new(gram);
        let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let mut basis = Vec::new();
        let mut inv_lambda = Vec::new();
        if lambda_max > 0.0 {
            let floor = rel_cutoff * lambda_max;
            for (j, &lam) in eig.eigenvalues.iter().enumerate() {
                if lam > floor {
                    basis.extend(eig.eigenvectors.column(j).iter().copied());
                    inv_lambda.push(1.0 / lam);
                }
            }
        }
        Ok(Self {
            m,
            n,
            side,
            basis,
            inv_lambda,
            lambda_max,
        })
    }

    pub fn rank(&self) -> usize {
        self.inv_lambda.len()
    }

    /// Largest singular value of `A`.
    pub fn sigma_max(&self) -> f64 {
        self.lambda_max.sqrt()
    }

    /// Smallest retained singular value.
    pub fn sigma_min(&self) -> f64 {
        self.inv_lambda
            .iter()
            .cloned()
            .fold(0.0, f64::max)
            .recip()
            .sqrt()
    }

    /// Retained `(σ, v)` pairs with `v` a unit vector in the smaller space
    /// (data space for a wide `A`, parameter space for a tall one).
    pub fn singular_pairs(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        let len = self.len();
        self.inv_lambda
            .iter()
            .enumerate()
            .map(move |(j, il)| (il.recip().sqrt(), &self.basis[j * len..(j + 1) * len]))
    }

    fn len(&self) -> usize {
        match self.side {
            Side::Range => self.m,
            Side::Domain => self.n,
        }
    }

    /// `B diag(w) Bᵀ z`, with `w = Λ⁻¹` or all ones.
    fn sandwich(&self, z: &[f64], inverse: bool) -> Vec<f64> {
        let len = self.len();
        let mut out = vec![0.0; len];
        for (j, &il) in self.inv_lambda.iter().enumerate() {
            let col = &self.basis[j * len..(j + 1) * len];
            let mut c: f64 = col.iter().zip(z).map(|(a, b)| a * b).sum();
            if inverse {
                c *= il;
            }
            for (o, &b) in out.iter_mut().zip(col) {
                *o += c * b;
            }
        }
        out
    }

    /// `A† y`.
    pub fn apply<T: Scalar, M: LinearMap<T> + ?Sized>(&self, a: &M, y: &[T]) -> Result<Vec<T>> {
        check_len("pseudo-inverse input", self.m, y.len())?;
        match self.side {
            Side::Range => {
                let z: Vec<T> = self
                    .sandwich(&to_f64(y), true)
                    .into_iter()
                    .map(T::of)
                    .collect();
                a.adjoint(&z)
            }
            Side::Domain => {
                let aty = a.adjoint(y)?;
                Ok(self
                    .sandwich(&to_f64(&aty), true)
                    .into_iter()
                    .map(T::of)
                    .collect())
            }
        }
    }

    /// `A A† y`, the orthogonal projection onto `range(A)`.
    pub fn range_project<T: Scalar, M: LinearMap<T> + ?Sized>(&self, a: &M, y: &[T]) -> Result<Vec<T>> {
        check_len("range projection input", self.m, y.len())?;
        match self.side {
            Side::Range => Ok(self
                .sandwich(&to_f64(y), false)
                .into_iter()
                .map(T::of)
                .collect()),
            Side::Domain => a.apply(&self.apply(a, y)?),
        }
    }

    /// `A† A x`, the orthogonal projection onto the row space.
    pub fn row_space_project<T: Scalar, M: LinearMap<T> + ?Sized>(&self, a: &M, x: &[T]) -> Result<Vec<T>> {
        check_len("row-space projection input", self.n, x.len())?;
        match self.side {
            Side::Range => self.apply(a, &a.apply(x)?),
            Side::Domain => Ok(self
                .sandwich(&to_f64(x), false)
                .into_iter()
                .map(T::of)
                .collect()),
        }
    }
}

fn to_f64<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.f64()).collect()
}
