//! Per-sample quality scores and their aggregates.

use serde::{Deserialize, Serialize};

use super::io::{num, Table};
use super::metrics::{mean_std, psnr, ssim};
use crate::error::Result;
use crate::grid::{Extent, Image};
use crate::linalg::l2_distance;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub set: String,
    pub method: String,
    pub sample: usize,
    pub psnr: f64,
    pub ssim: f64,
    /// `‖F(x̂) − F(x)‖`
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub set: String,
    pub method: String,
    pub count: usize,
    pub psnr_mean: f64,
    pub psnr_std: f64,
    pub ssim_mean: f64,
    pub ssim_std: f64,
    pub fidelity_mean: f64,
    pub fidelity_std: f64,
}

/// A named reconstruction `y ↦ x̂`.
pub struct Method<'a, T> {
    pub name: &'a str,
    pub run: Box<dyn Fn(&[T]) -> Result<Vec<T>> + 'a>,
}

/// Scores every method on every `(truth, data)` pair of one test set.
/// Returns the rows and the reconstructions, indexed `[method][sample]`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_set<T: Scalar>(
    set: &str,
    truths: &[Vec<T>],
    data: &[Vec<T>],
    n: usize,
    peak: f64,
    forward: &dyn Fn(&[T]) -> Result<Vec<T>>,
    methods: &[Method<'_, T>],
) -> Result<(Vec<EvalRow>, Vec<Vec<Vec<T>>>)> {
    let mut rows = Vec::new();
    let mut recons = vec![Vec::with_capacity(truths.len()); methods.len()];
    for (i, (x, y)) in truths.iter().zip(data).enumerate() {
        let fx = forward(x)?;
        let xi = Image::new(n, n, Extent::unit_square(), x.clone())?;
        for (k, m) in methods.iter().enumerate() {
            let xhat = (m.run)(y)?;
            let fh = forward(&xhat)?;
            let hi = Image::new(n, n, Extent::unit_square(), xhat)?;
            rows.push(EvalRow {
                set: set.to_string(),
                method: m.name.to_string(),
                sample: i,
                psnr: psnr(&hi, &xi, peak)?,
                ssim: ssim(&hi, &xi, peak)?,
                fidelity: l2_distance(&fh, &fx)?.f64(),
            });
            recons[k].push(hi.into_values());
        }
    }
    Ok((rows, recons))
}

/// Mean and standard deviation per `(set, method)`, in first-appearance order.
pub fn aggregate(rows: &[EvalRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in rows {
        let k = (r.set.as_str(), r.method.as_str());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(set, method)| {
            let sel: Vec<&EvalRow> = rows.iter().filter(|r| r.set == set && r.method == method).collect();
            let col = |f: fn(&EvalRow) -> f64| mean_std(&sel.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (psnr_mean, psnr_std) = col(|r| r.psnr);
            let (ssim_mean, ssim_std) = col(|r| r.ssim);
            let (fidelity_mean, fidelity_std) = col(|r| r.fidelity);
            AggregateRow {
                set: set.to_string(),
                method: method.to_string(),
                count: sel.len(),
                psnr_mean,
                psnr_std,
                ssim_mean,
                ssim_std,
                fidelity_mean,
                fidelity_std,
            }
        })
        .collect()
}

pub fn sample_table(rows: &[EvalRow]) -> Table {
    let mut t = Table::new(&["set", "method", "sample", "psnr", "ssim", "fidelity"]);
    for r in rows {
        t.push(vec![
            r.set.clone(),
            r.method.clone(),
            r.sample.to_string(),
            num(r.psnr),
            num(r.ssim),
            num(r.fidelity),
        ]);
    }
    t
}

pub fn aggregate_table(rows: &[AggregateRow]) -> Table {
    let mut t = Table::new(&[
        "set",
        "method",
        "count",
        "psnr_mean",
        "psnr_std",
        "ssim_mean",
        "ssim_std",
        "fidelity_mean",
        "fidelity_std",
    ]);
    for r in rows {
        t.push(vec![
            r.set.clone(),
            r.method.clone(),
            r.count.to_string(),
            num(r.psnr_mean),
            num(r.psnr_std),
            num(r.ssim_mean),
            num(r.ssim_std),
            num(r.fidelity_mean),
            num(r.fidelity_std),
        ]);
    }
    t
}
