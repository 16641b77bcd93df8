//! Image quality and data-fidelity measures.

use crate::error::{check_len, Error, Result};
use crate::grid::{Grid, Image};
use crate::linalg::l2_distance;
use crate::operators::ForwardOperator;
use crate::scalar::Scalar;

/// Returned by [`psnr`] for identical images.
pub const PSNR_CAP: f64 = 300.0;

pub fn psnr<T: Scalar>(xhat: &Image<T>, x: &Image<T>, peak: f64) -> Result<f64> {
    xhat.same_shape(x, "psnr")?;
    if !(peak > 0.0) {
        return Err(Error::Precondition("psnr peak must be positive".into()));
    }
    let mse = xhat
        .values()
        .iter()
        .zip(x.values())
        .map(|(&a, &b)| (a.f64() - b.f64()).powi(2))
        .sum::<f64>()
        / x.len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * (peak * peak / mse).log10()).min(PSNR_CAP))
}

const WIN: usize = 11;
const WIN_SIGMA: f64 = 1.5;

fn gauss_kernel() -> [f64; WIN] {
    let mut k = [0.0; WIN];
    let c = (WIN / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        *v = (-((i as f64 - c).powi(2)) / (2.0 * WIN_SIGMA * WIN_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian filter over valid positions only.
fn filter_valid(img: &[f64], h: usize, w: usize, k: &[f64; WIN]) -> Vec<f64> {
    let (oh, ow) = (h - WIN + 1, w - WIN + 1);
    let mut rows = vec![0.0; h * ow];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = (0..WIN).map(|t| k[t] * img[y * w + x + t]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..WIN).map(|t| k[t] * rows[(y + t) * ow + x]).sum();
        }
    }
    out
}

/// Mean structural similarity over all fully contained 11×11 Gaussian windows (σ = 1.5).
pub fn ssim<T: Scalar>(xhat: &Image<T>, x: &Image<T>, peak: f64) -> Result<f64> {
    xhat.same_shape(x, "ssim")?;
    let (h, w) = x.shape();
    if h < WIN || w < WIN {
        return Err(Error::Precondition(format!("ssim needs at least {WIN}x{WIN} pixels, got {h}x{w}")));
    }
    let c1 = (0.01 * peak).powi(2);
    let c2 = (0.03 * peak).powi(2);
    let a: Vec<f64> = xhat.values().iter().map(|v| v.f64()).collect();
    let b: Vec<f64> = x.values().iter().map(|v| v.f64()).collect();
    let k = gauss_kernel();
    let prod = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(u, v)| u * v).collect() };
    let mu_a = filter_valid(&a, h, w, &k);
    let mu_b = filter_valid(&b, h, w, &k);
    let aa = filter_valid(&prod(&a, &a), h, w, &k);
    let bb = filter_valid(&prod(&b, &b), h, w, &k);
    let ab = filter_valid(&prod(&a, &b), h, w, &k);
    let mut total = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = aa[i] - ma * ma;
        let vb = bb[i] - mb * mb;
        let cov = ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    Ok(total / mu_a.len() as f64)
}

/// `‖F(x̂) − F(x)‖`.
pub fn data_fidelity<T: Scalar, F: ForwardOperator<T> + ?Sized>(f: &F, xhat: &[T], x: &[T]) -> Result<f64> {
    check_len("data fidelity", x.len(), xhat.len())?;
    Ok(l2_distance(&f.forward(xhat)?, &f.forward(x)?)?.f64())
}

/// Mean and sample standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
