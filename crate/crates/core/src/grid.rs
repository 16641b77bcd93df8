//! Images and sinograms: row-major real grids with a little shape metadata.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::scalar::Scalar;

/// Physical rectangle covered by an image, `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extent {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Extent {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    /// The square `[-1, 1]²`.
    pub fn unit_square() -> Self {
        Self::new(-1.0, 1.0, -1.0, 1.0)
    }

    /// `[-n/2, n/2]²`, i.e. unit pixel pitch for an `n × n` grid.
    pub fn pixel_units(n: usize) -> Self {
        let h = n as f64 / 2.0;
        Self::new(-h, h, -h, h)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// Shared behaviour of the two grid kinds. Everything numerical works on the flat slice.
pub trait Grid<T: Scalar>: Clone {
    /// `(rows, cols)`.
    fn shape(&self) -> (usize, usize);
    fn values(&self) -> &[T];
    fn values_mut(&mut self) -> &mut [T];

    /// Same shape and metadata, new values.
    fn with_values(&self, values: Vec<T>) -> Result<Self>;

    fn len(&self) -> usize {
        self.values().len()
    }

    fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    fn zeros_like(&self) -> Self {
        self.with_values(vec![T::zero(); self.len()])
            .expect("length preserved")
    }

    fn map(&self, f: impl Fn(T) -> T) -> Self {
        self.with_values(self.values().iter().map(|&v| f(v)).collect())
            .expect("length preserved")
    }

    fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }

    fn same_shape(&self, other: &Self, context: &'static str) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::Dimension {
                context,
                expected: self.len(),
                got: other.len(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Image<T> {
    width: usize,
    height: usize,
    extent: Extent,
    values: Vec<T>,
}

impl<T: Scalar> Image<T> {
    pub fn new(width: usize, height: usize, extent: Extent, values: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Precondition("image dimensions must be positive".into()));
        }
        check_len("image values", width * height, values.len())?;
        Ok(Self {
            width,
            height,
            extent,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize, extent: Extent) -> Self {
        Self::new(width, height, extent, vec![T::zero(); width * height]).expect("positive dims")
    }

    /// Samples `f(x, y)` at pixel centres. Row 0 is the top of the image (largest `y`).
    pub fn from_fn(width: usize, height: usize, extent: Extent, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut img = Self::zeros(width, height, extent);
        for r in 0..height {
            for c in 0..width {
                let (x, y) = img.pixel_center(r, c);
                img.values[r * width + c] = T::of(f(x, y));
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    pub fn pixel_size(&self) -> (f64, f64) {
        (
            self.extent.width() / self.width as f64,
            self.extent.height() / self.height as f64,
        )
    }

    pub fn pixel_center(&self, row: usize, col: usize) -> (f64, f64) {
        let (dx, dy) = self.pixel_size();
        (
            self.extent.x_min + (col as f64 + 0.5) * dx,
            self.extent.y_max - (row as f64 + 0.5) * dy,
        )
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: T) {
        self.values[row * self.width + col] = v;
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn cast<U: Scalar>(&self) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            extent: self.extent,
            values: self.values.iter().map(|v| U::of(v.f64())).collect(),
        }
    }
}

impl<T: Scalar> Grid<T> for Image<T> {
    fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    fn values(&self) -> &[T] {
        &self.values
    }

    fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(self.width, self.height, self.extent, values)
    }
}

/// Radon data, one row per projection angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sinogram<T> {
    n_angles: usize,
    n_bins: usize,
    values: Vec<T>,
}

impl<T: Scalar> Sinogram<T> {
    pub fn new(n_angles: usize, n_bins: usize, values: Vec<T>) -> Result<Self> {
        if n_angles == 0 || n_bins == 0 {
            return Err(Error::Precondition("sinogram dimensions must be positive".into()));
        }
        check_len("sinogram values", n_angles * n_bins, values.len())?;
        Ok(Self {
            n_angles,
            n_bins,
            values,
        })
    }

    pub fn zeros(n_angles: usize, n_bins: usize) -> Self {
        Self::new(n_angles, n_bins, vec![T::zero(); n_angles * n_bins]).expect("positive dims")
    }

    pub fn n_angles(&self) -> usize {
        self.n_angles
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    #[inline]
    pub fn get(&self, angle: usize, bin: usize) -> T {
        self.values[angle * self.n_bins + bin]
    }

    pub fn row(&self, angle: usize) -> &[T] {
        &self.values[angle * self.n_bins..(angle + 1) * self.n_bins]
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

impl<T: Scalar> Grid<T> for Sinogram<T> {
    fn shape(&self) -> (usize, usize) {
        (self.n_angles, self.n_bins)
    }

    fn values(&self) -> &[T] {
        &self.values
    }

    fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(self.n_angles, self.n_bins, values)
    }
}
