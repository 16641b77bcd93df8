//! Alternating projections onto `N_C(y)` and `range(F₁)`.

use crate::error::{Error, Result};
use crate::grid::{Grid, Sinogram};
use crate::linalg::{l2_distance, norm};
use crate::operators::{RangeProjector, SaturationMap};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PocsOptions {
    /// Stop once a sweep moves the iterate by at most `tol·‖v‖`.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for PocsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_sweeps: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PocsReport<T> {
    /// Final iterate; it lies in the range, having been projected there last.
    pub v: Vec<T>,
    pub sweeps: usize,
    /// `‖v_{k+1} − v_k‖` for every sweep.
    pub changes: Vec<f64>,
    /// Distance moved by one extra normal-cone projection.
    pub dist_normal_cone: f64,
    /// Distance moved by one extra range projection.
    pub dist_range: f64,
}

impl<T> PocsReport<T> {
    /// Ratio of the last two sweep changes, a proxy for the linear convergence factor.
    pub fn late_ratio(&self) -> Option<f64> {
        let n = self.changes.len();
        if n < 2 || self.changes[n - 2] == 0.0 {
            return None;
        }
        Some(self.changes[n - 1] / self.changes[n - 2])
    }

    /// Median sweep-to-sweep ratio over the second half of the run.
    pub fn late_ratio_median(&self) -> Option<f64> {
        let n = self.changes.len();
        let mut ratios: Vec<f64> = ((n / 2).max(1)..n)
            .filter(|&k| self.changes[k - 1] > 0.0)
            .map(|k| self.changes[k] / self.changes[k - 1])
            .collect();
        if ratios.is_empty() {
            return None;
        }
        ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
        Some(ratios[ratios.len() / 2])
    }
}

/// Alternating projections for data `y = P_C(·)` starting at `start`.
pub fn pocs<T: Scalar, R: RangeProjector<T> + ?Sized>(
    range: &R,
    y: &[T],
    start: &[T],
    m: &SaturationMap<T>,
    opts: PocsOptions,
) -> Result<PocsReport<T>> {
    if !m.is_feasible(y) {
        return Err(Error::Precondition("pocs data must already be saturated".into()));
    }
    let mut v = start.to_vec();
    let mut changes = Vec::new();
    let tol = opts.tol;
    for sweep in 1..=opts.max_sweeps {
        let a = m.normal_cone_project_slice(y, &v)?;
        let b = range.range_project(&a)?;
        let change = l2_distance(&b, &v)?.f64();
        let scale = norm(&v).f64();
        v = b;
        changes.push(change);
        if change <= tol * scale || change == 0.0 {
            let (dn, dr) = distances(range, y, &v, m)?;
            return Ok(PocsReport {
                v,
                sweeps: sweep,
                changes,
                dist_normal_cone: dn,
                dist_range: dr,
            });
        }
    }
    let (dn, dr) = distances(range, y, &v, m)?;
    Err(Error::IterationLimit {
        solver: "pocs",
        iterations: opts.max_sweeps,
        residual: dn.max(dr),
    })
}

fn distances<T: Scalar, R: RangeProjector<T> + ?Sized>(
    range: &R,
    y: &[T],
    v: &[T],
    m: &SaturationMap<T>,
) -> Result<(f64, f64)> {
    let dn = m.normal_cone_distance(y, v)?.f64();
    let pr = range.range_project(v)?;
    let dr = l2_distance(&pr, v)?.f64();
    Ok((dn, dr))
}

/// Projects toward `N_C(P_C(z)) ∩ range(F₁)` starting from `z` itself.
pub fn pocs_intersect<T: Scalar, R: RangeProjector<T> + ?Sized>(
    range: &R,
    z: &Sinogram<T>,
    m: &SaturationMap<T>,
    tol: f64,
    max_iter: usize,
) -> Result<(Sinogram<T>, PocsReport<T>)> {
    let y = m.saturate(z)?;
    let rep = pocs(
        range,
        y.values(),
        z.values(),
        m,
        PocsOptions {
            tol,
            max_sweeps: max_iter,
        },
    )?;
    Ok((z.with_values(rep.v.clone())?, rep))
}
