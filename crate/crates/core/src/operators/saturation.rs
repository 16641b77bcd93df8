use serde::{Deserialize, Serialize};

use super::ForwardOperator;
use crate::error::{check_len, Error, Result};
use crate::grid::Grid;
use crate::scalar::Scalar;

/// Pointwise saturation levels `M(r) ≥ 0`; as an operator it is `x ↦ min(x, M)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationMap<T> {
    rows: usize,
    cols: usize,
    levels: Vec<T>,
}

impl<T: Scalar> SaturationMap<T> {
    pub fn new(rows: usize, cols: usize, levels: Vec<T>) -> Result<Self> {
        check_len("saturation levels", rows * cols, levels.len())?;
        if let Some(bad) = levels.iter().find(|l| !(l.is_finite() && **l >= T::zero())) {
            return Err(Error::Precondition(format!(
                "saturation levels must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self { rows, cols, levels })
    }

    pub fn constant(rows: usize, cols: usize, level: T) -> Result<Self> {
        Self::new(rows, cols, vec![level; rows * cols])
    }

    /// Levels taken from the values of a grid, e.g. an image-shaped mask.
    pub fn from_grid<G: Grid<T>>(g: &G) -> Result<Self> {
        let (rows, cols) = g.shape();
        Self::new(rows, cols, g.values().to_vec())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    pub fn saturate_slice(&self, x: &[T]) -> Result<Vec<T>> {
        check_len("saturation input", self.levels.len(), x.len())?;
        Ok(x.iter().zip(&self.levels).map(|(&v, &m)| v.min(m)).collect())
    }

    pub fn saturate<G: Grid<T>>(&self, x: &G) -> Result<G> {
        self.check_shape(x)?;
        x.with_values(self.saturate_slice(x.values())?)
    }

    pub(crate) fn check_shape<G: Grid<T>>(&self, g: &G) -> Result<()> {
        if g.shape() == (self.rows, self.cols) {
            Ok(())
        } else {
            Err(Error::Dimension {
                context: "saturation grid",
                expected: self.levels.len(),
                got: g.len(),
            })
        }
    }

    /// True when `y = min(y, M)`.
    pub fn is_feasible(&self, y: &[T]) -> bool {
        y.len() == self.levels.len() && y.iter().zip(&self.levels).all(|(&v, &m)| v <= m)
    }

    /// Flat-slice form of [`normal_cone_project`].
    pub fn normal_cone_project_slice(&self, y: &[T], u: &[T]) -> Result<Vec<T>> {
        check_len("normal cone data", self.levels.len(), y.len())?;
        check_len("normal cone candidate", self.levels.len(), u.len())?;
        let mut out = Vec::with_capacity(y.len());
        for ((&yv, &uv), &m) in y.iter().zip(u).zip(&self.levels) {
            if yv > m {
                return Err(Error::Precondition(format!(
                    "data value {yv} exceeds its saturation level {m}"
                )));
            }
            out.push(if yv < m { yv } else { uv.max(m) });
        }
        Ok(out)
    }

    /// `dist(u, N_C(y))` without forming the projection.
    pub fn normal_cone_distance(&self, y: &[T], u: &[T]) -> Result<T> {
        let p = self.normal_cone_project_slice(y, u)?;
        crate::linalg::l2_distance(&p, u)
    }
}

/// Metric projection of `u` onto `N_C(y) = {x : min(x, M) = y}`.
///
/// Unsaturated cells are pinned to `y`; saturated cells (`y ≥ M`) keep `u` if it is at least `M`.
pub fn normal_cone_project<T: Scalar, G: Grid<T>>(y: &G, u: &G, m: &SaturationMap<T>) -> Result<G> {
    m.check_shape(y)?;
    m.check_shape(u)?;
    y.with_values(m.normal_cone_project_slice(y.values(), u.values())?)
}

impl<T: Scalar> ForwardOperator<T> for SaturationMap<T> {
    fn input_len(&self) -> usize {
        self.levels.len()
    }

    fn output_len(&self) -> usize {
        self.levels.len()
    }

    fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        self.saturate_slice(x)
    }

    fn vjp(&self, x: &[T], r: &[T]) -> Result<Vec<T>> {
        check_len("saturation vjp point", self.levels.len(), x.len())?;
        check_len("saturation vjp cotangent", self.levels.len(), r.len())?;
        Ok(x.iter()
            .zip(r)
            .zip(&self.levels)
            .map(|((&xv, &rv), &m)| if xv < m { rv } else { T::zero() })
            .collect())
    }

    fn lipschitz_bound(&self) -> f64 {
        1.0
    }
}
