//! Parallel-beam Radon transform as a sparse matrix with exact line-length weights.
//!
//! Lengths are in pixel units: the image occupies `[-n/2, n/2]²`, the detector has
//! `⌈1.5 n⌉` unit-pitch bins centred on the origin and angle `k` is `kπ / n_angles`.
//! The ray for `(θ, s)` is `{p : p·(cos θ, sin θ) = s}`.

use std::sync::OnceLock;

use super::{ForwardOperator, RangeProjector};
use crate::error::{check_len, Error, Result};
use crate::grid::{Extent, Grid, Image, Sinogram};
use crate::linalg::{lsqr, CsrMatrix, LinearMap, LsqrOptions, SpectralPinv};
use crate::scalar::Scalar;

/// How `F₁†` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PinvMethod {
    /// Truncated eigendecomposition of `F₁F₁ᵀ`, computed once and cached.
    Spectral { rel_cutoff: f64 },
    /// LSQR from zero on every call.
    Lsqr { tol: f64, max_iter: Option<usize> },
}

impl Default for PinvMethod {
    fn default() -> Self {
        PinvMethod::Spectral { rel_cutoff: 1e-10 }
    }
}

#[derive(Debug)]
pub struct RadonOperator<T> {
    n_x: usize,
    n_angles: usize,
    n_bins: usize,
    matrix: CsrMatrix<T>,
    method: PinvMethod,
    spectral: OnceLock<SpectralPinv>,
}

impl<T: Scalar> RadonOperator<T> {
    pub fn new(n_x: usize, n_angles: usize) -> Result<Self> {
        if n_x < 2 || n_angles < 1 {
            return Err(Error::Precondition(format!(
                "radon needs n_x >= 2 and n_angles >= 1, got {n_x} and {n_angles}"
            )));
        }
        let n_bins = (3 * n_x).div_ceil(2);
        let mut triplets = Vec::new();
        for k in 0..n_angles {
            let theta = k as f64 * std::f64::consts::PI / n_angles as f64;
            for j in 0..n_bins {
                let s = j as f64 + 0.5 - n_bins as f64 / 2.0;
                let row = k * n_bins + j;
                for (pixel, len) in siddon(n_x, theta, s) {
                    triplets.push((row, pixel, T::of(len)));
                }
            }
        }
        let matrix = CsrMatrix::from_triplets(n_angles * n_bins, n_x * n_x, triplets)?;
        Ok(Self {
            n_x,
            n_angles,
            n_bins,
            matrix,
            method: PinvMethod::default(),
            spectral: OnceLock::new(),
        })
    }

    pub fn with_pinv_method(mut self, method: PinvMethod) -> Self {
        self.method = method;
        self.spectral = OnceLock::new();
        self
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn pinv_method(&self) -> PinvMethod {
        self.method
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n_angles)
            .map(|k| k as f64 * std::f64::consts::PI / self.n_angles as f64)
            .collect()
    }

    /// Image grid the operator acts on (pixel-unit extent).
    pub fn image_extent(&self) -> Extent {
        Extent::pixel_units(self.n_x)
    }

    pub fn zero_image(&self) -> Image<T> {
        Image::zeros(self.n_x, self.n_x, self.image_extent())
    }

    pub fn zero_sinogram(&self) -> Sinogram<T> {
        Sinogram::zeros(self.n_angles, self.n_bins)
    }

    fn check_image(&self, x: &Image<T>) -> Result<()> {
        if x.shape() == (self.n_x, self.n_x) {
            Ok(())
        } else {
            Err(Error::Dimension {
                context: "radon image",
                expected: self.n_x * self.n_x,
                got: x.len(),
            })
        }
    }

    fn check_sinogram(&self, y: &Sinogram<T>) -> Result<()> {
        if y.shape() == (self.n_angles, self.n_bins) {
            Ok(())
        } else {
            Err(Error::Dimension {
                context: "radon sinogram",
                expected: self.n_angles * self.n_bins,
                got: y.len(),
            })
        }
    }

    fn wrap_sinogram(&self, v: Vec<T>) -> Sinogram<T> {
        Sinogram::new(self.n_angles, self.n_bins, v).expect("operator shape")
    }

    fn wrap_image(&self, like: Option<&Image<T>>, v: Vec<T>) -> Image<T> {
        match like {
            Some(x) => x.with_values(v).expect("operator shape"),
            None => Image::new(self.n_x, self.n_x, self.image_extent(), v).expect("operator shape"),
        }
    }

    /// `F₁x` on a flat row-major image.
    pub fn apply_slice(&self, x: &[T]) -> Result<Vec<T>> {
        LinearMap::apply(&self.matrix, x)
    }

    /// `F₁ᵀy` on a flat sinogram.
    pub fn adjoint_slice(&self, y: &[T]) -> Result<Vec<T>> {
        LinearMap::adjoint(&self.matrix, y)
    }

    pub fn apply(&self, x: &Image<T>) -> Result<Sinogram<T>> {
        self.check_image(x)?;
        Ok(self.wrap_sinogram(self.matrix.apply(x.values())?))
    }

    pub fn adjoint(&self, y: &Sinogram<T>) -> Result<Image<T>> {
        self.check_sinogram(y)?;
        Ok(self.wrap_image(None, self.matrix.adjoint(y.values())?))
    }

    /// The cached spectral pseudo-inverse, built on first use with the configured cutoff
    /// (or `1e-10` when the operator uses LSQR).
    pub fn spectral_pinv(&self) -> Result<&SpectralPinv> {
        let cutoff = match self.method {
            PinvMethod::Spectral { rel_cutoff } => rel_cutoff,
            PinvMethod::Lsqr { .. } => 1e-10,
        };
        self.spectral(cutoff)
    }

    fn spectral(&self, rel_cutoff: f64) -> Result<&SpectralPinv> {
        if let Some(p) = self.spectral.get() {
            return Ok(p);
        }
        let p = SpectralPinv::new(&self.matrix, rel_cutoff)?;
        Ok(self.spectral.get_or_init(|| p))
    }

    /// `F₁† y` on flat data, using the configured method.
    pub fn pinv_slice(&self, y: &[T]) -> Result<Vec<T>> {
        self.pinv_slice_with(y, self.method)
    }

    pub fn pinv_slice_with(&self, y: &[T], method: PinvMethod) -> Result<Vec<T>> {
        check_len("pseudo-inverse input", self.matrix.rows(), y.len())?;
        match method {
            PinvMethod::Spectral { rel_cutoff } => self.spectral(rel_cutoff)?.apply(&self.matrix, y),
            PinvMethod::Lsqr { tol, max_iter } => {
                Ok(lsqr(&self.matrix, y, LsqrOptions { tol, max_iter })?.x)
            }
        }
    }

    pub fn pseudo_inverse(&self, y: &Sinogram<T>) -> Result<Image<T>> {
        self.check_sinogram(y)?;
        Ok(self.wrap_image(None, self.pinv_slice(y.values())?))
    }

    /// `F₁† y` by LSQR at the given tolerance, whatever the configured method.
    pub fn pseudo_inverse_apply(&self, y: &Sinogram<T>, tol: f64) -> Result<Image<T>> {
        self.check_sinogram(y)?;
        let v = self.pinv_slice_with(y.values(), PinvMethod::Lsqr { tol, max_iter: None })?;
        Ok(self.wrap_image(None, v))
    }

    /// `F₁†F₁ x` on flat images.
    pub fn row_space_project_slice(&self, x: &[T]) -> Result<Vec<T>> {
        check_len("row-space projection input", self.matrix.cols(), x.len())?;
        match self.method {
            PinvMethod::Spectral { rel_cutoff } => {
                self.spectral(rel_cutoff)?.row_space_project(&self.matrix, x)
            }
            PinvMethod::Lsqr { .. } => self.pinv_slice(&self.matrix.apply(x)?),
        }
    }

    /// `x − F₁†F₁ x` on flat images.
    pub fn kernel_project_slice(&self, x: &[T]) -> Result<Vec<T>> {
        let r = self.row_space_project_slice(x)?;
        Ok(x.iter().zip(&r).map(|(&a, &b)| a - b).collect())
    }

    pub fn kernel_project(&self, x: &Image<T>) -> Result<Image<T>> {
        self.check_image(x)?;
        Ok(self.wrap_image(Some(x), self.kernel_project_slice(x.values())?))
    }

    /// `F₁F₁† y` on flat data.
    pub fn range_project_slice(&self, y: &[T]) -> Result<Vec<T>> {
        check_len("range projection input", self.matrix.rows(), y.len())?;
        match self.method {
            PinvMethod::Spectral { rel_cutoff } => self.spectral(rel_cutoff)?.range_project(&self.matrix, y),
            PinvMethod::Lsqr { .. } => self.matrix.apply(&self.pinv_slice(y)?),
        }
    }

    pub fn range_project(&self, y: &Sinogram<T>) -> Result<Sinogram<T>> {
        self.check_sinogram(y)?;
        Ok(self.wrap_sinogram(self.range_project_slice(y.values())?))
    }

    /// Rank of `F₁` as seen by the spectral pseudo-inverse.
    pub fn rank(&self) -> Result<usize> {
        let cutoff = match self.method {
            PinvMethod::Spectral { rel_cutoff } => rel_cutoff,
            PinvMethod::Lsqr { .. } => 1e-10,
        };
        Ok(self.spectral(cutoff)?.rank())
    }
}

impl<T: Scalar> LinearMap<T> for RadonOperator<T> {
    fn input_dim(&self) -> usize {
        self.matrix.cols()
    }

    fn output_dim(&self) -> usize {
        self.matrix.rows()
    }

    fn apply_into(&self, x: &[T], y: &mut [T]) {
        self.matrix.apply_into(x, y)
    }

    fn adjoint_into(&self, y: &[T], x: &mut [T]) {
        self.matrix.adjoint_into(y, x)
    }
}

impl<T: Scalar> ForwardOperator<T> for RadonOperator<T> {
    fn input_len(&self) -> usize {
        self.matrix.cols()
    }

    fn output_len(&self) -> usize {
        self.matrix.rows()
    }

    fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.matrix.apply(x)
    }

    fn vjp(&self, _x: &[T], r: &[T]) -> Result<Vec<T>> {
        self.matrix.adjoint(r)
    }

    fn as_linear(&self) -> Option<&dyn LinearMap<T>> {
        Some(&self.matrix)
    }

    fn lipschitz_bound(&self) -> f64 {
        // ‖A‖₂ ≤ √(‖A‖₁‖A‖∞)
        let mut col = vec![0.0f64; self.matrix.cols()];
        let mut row_max = 0.0f64;
        for r in 0..self.matrix.rows() {
            let mut s = 0.0;
            for (c, v) in self.matrix.row(r) {
                let a = v.f64().abs();
                s += a;
                col[c] += a;
            }
            row_max = row_max.max(s);
        }
        (row_max * col.iter().cloned().fold(0.0, f64::max)).sqrt()
    }
}

impl<T: Scalar> RangeProjector<T> for RadonOperator<T> {
    fn range_project(&self, y: &[T]) -> Result<Vec<T>> {
        self.range_project_slice(y)
    }
}

/// Pixels crossed by the ray `p·(cos θ, sin θ) = s` and the length inside each.
/// Pixel index is row-major with row 0 at the top (largest y).
fn siddon(n: usize, theta: f64, s: f64) -> Vec<(usize, f64)> {
    let h = n as f64 / 2.0;
    let (c, sn) = (theta.cos(), theta.sin());
    // p(t) = s·(c, sn) + t·(−sn, c)
    let (px, py) = (s * c, s * sn);
    let (dx, dy) = (-sn, c);
    const EPS: f64 = 1e-12;

    let mut t_lo = f64::NEG_INFINITY;
    let mut t_hi = f64::INFINITY;
    for (p, d) in [(px, dx), (py, dy)] {
        if d.abs() < EPS {
            if p <= -h || p >= h {
                return Vec::new();
            }
        } else {
            let a = (-h - p) / d;
            let b = (h - p) / d;
            t_lo = t_lo.max(a.min(b));
            t_hi = t_hi.min(a.max(b));
        }
    }
    if t_hi - t_lo <= EPS {
        return Vec::new();
    }

    let mut ts = vec![t_lo, t_hi];
    for (p, d) in [(px, dx), (py, dy)] {
        if d.abs() < EPS {
            continue;
        }
        for i in 0..=n {
            let t = (-h + i as f64 - p) / d;
            if t > t_lo && t < t_hi {
                ts.push(t);
            }
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));

    let mut out: Vec<(usize, f64)> = Vec::new();
    for w in ts.windows(2) {
        let len = w[1] - w[0];
        if len <= EPS {
            continue;
        }
        let tm = 0.5 * (w[0] + w[1]);
        let x = px + tm * dx;
        let y = py + tm * dy;
        let col = ((x + h).floor() as isize).clamp(0, n as isize - 1) as usize;
        let row = ((h - y).floor() as isize).clamp(0, n as isize - 1) as usize;
        let idx = row * n + col;
        match out.last_mut() {
            Some(last) if last.0 == idx => last.1 += len,
            _ => out.push((idx, len)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_count_rounds_up() {
        assert_eq!(RadonOperator::<f64>::new(5, 1).unwrap().n_bins(), 8);
        assert_eq!(RadonOperator::<f64>::new(32, 1).unwrap().n_bins(), 48);
    }

    #[test]
    fn rejects_tiny_grids() {
        assert!(RadonOperator::<f64>::new(1, 4).is_err());
        assert!(RadonOperator::<f64>::new(4, 0).is_err());
    }

    #[test]
    fn vertical_ray_hits_one_column() {
        let seg = siddon(4, 0.0, 0.5);
        assert_eq!(seg.len(), 4);
        for (k, (idx, len)) in seg.iter().enumerate() {
            assert_eq!(idx % 4, 2);
            assert!((len - 1.0).abs() < 1e-12, "segment {k}");
        }
    }

    #[test]
    fn ray_outside_square_is_empty() {
        assert!(siddon(4, 0.3, 5.0).is_empty());
    }
}
