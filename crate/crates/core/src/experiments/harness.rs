//! Empirical convergence and convergence-rate measurements over a noise ladder.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::noise::{add_noise, perturb, NoiseModel};
use crate::consistency::{regularizing_network_apply, ParameterChoice, RegularizerFamily, WrapperFamily};
use crate::error::{Error, Result};
use crate::linalg::l2_distance;
use crate::operators::ForwardOperator;
use crate::rng::Rng;
use crate::scalar::Scalar;

/// `10^-1, 10^-1.5, …, 10^-4`.
pub fn default_ladder() -> Vec<f64> {
    (0..7).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect()
}

/// A reconstruction algorithm `(δ, y^δ) ↦ x̂`.
pub trait ReconstructionMethod<T: Scalar>: Send + Sync {
    fn reconstruct(&self, delta: f64, y: &[T]) -> Result<Vec<T>>;

    fn alpha(&self, _delta: f64) -> Option<f64> {
        None
    }

    /// Unit data-space directions along which noise of size `δ` hurts most, if known.
    /// The harnesses add `±δ·d` for each of them to the random draws.
    fn worst_case_directions(&self, _delta: f64) -> Result<Vec<Vec<f64>>> {
        Ok(Vec::new())
    }
}

/// Supplies adversarial noise directions for a given `α`.
pub trait NoiseProbe: Send + Sync {
    fn directions(&self, alpha: f64) -> Result<Vec<Vec<f64>>>;
}

/// `R_δ = Φ_{α*(δ)} ∘ G_{α*(δ)}`.
pub struct RegularizedMethod<T: Scalar> {
    pub g: Arc<dyn RegularizerFamily<T>>,
    pub phi: Arc<dyn WrapperFamily<T>>,
    pub pc: ParameterChoice,
    pub probe: Option<Arc<dyn NoiseProbe>>,
}

impl<T: Scalar> ReconstructionMethod<T> for RegularizedMethod<T> {
    fn reconstruct(&self, delta: f64, y: &[T]) -> Result<Vec<T>> {
        regularizing_network_apply(self.g.as_ref(), self.phi.as_ref(), &self.pc, delta, y)
    }

    fn alpha(&self, delta: f64) -> Option<f64> {
        Some(self.pc.alpha(delta))
    }

    fn worst_case_directions(&self, delta: f64) -> Result<Vec<Vec<f64>>> {
        match &self.probe {
            Some(p) => p.directions(self.pc.alpha(delta)),
            None => Ok(Vec::new()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub delta: f64,
    pub alpha: Option<f64>,
    pub sup_error: f64,
    pub mean_error: f64,
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() || ladder.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Config("noise ladder must contain positive values".into()));
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("noise ladder must be strictly decreasing".into()));
    }
    Ok(())
}

/// Errors `‖target − method(δ, y^δ)‖` over random draws plus the method's worst-case probes.
fn errors_at<T: Scalar, M: ReconstructionMethod<T> + ?Sized>(
    method: &M,
    target: &[T],
    y: &[T],
    delta: f64,
    n_draws: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    let mut errs = Vec::with_capacity(n_draws + 2);
    for _ in 0..n_draws {
        let yd = add_noise(y, NoiseModel { delta }, rng)?;
        errs.push(l2_distance(target, &method.reconstruct(delta, &yd)?)?.f64());
    }
    for d in method.worst_case_directions(delta)? {
        for sign in [1.0, -1.0] {
            let dir: Vec<f64> = d.iter().map(|v| sign * v).collect();
            let yd = perturb(y, &dir, delta, delta);
            errs.push(l2_distance(target, &method.reconstruct(delta, &yd)?)?.f64());
        }
    }
    Ok(errs)
}

/// Per-rung sup and mean error of `method` against `target` for data `y`.
pub fn convergence_harness_with_data<T: Scalar, M: ReconstructionMethod<T> + ?Sized>(
    method: &M,
    target: &[T],
    y: &[T],
    ladder: &[f64],
    n_draws: usize,
    rng: &mut Rng,
) -> Result<Vec<ConvergenceRow>> {
    check_ladder(ladder)?;
    if n_draws == 0 {
        return Err(Error::Config("need at least one noise draw".into()));
    }
    let mut rows = Vec::with_capacity(ladder.len());
    for (k, &delta) in ladder.iter().enumerate() {
        let mut stream = rng.derive(k as u64);
        let errs = errors_at(method, target, y, delta, n_draws, &mut stream)?;
        rows.push(ConvergenceRow {
            delta,
            alpha: method.alpha(delta),
            sup_error: errs.iter().cloned().fold(0.0, f64::max),
            mean_error: errs.iter().sum::<f64>() / errs.len() as f64,
        });
    }
    Ok(rows)
}

/// [`convergence_harness_with_data`] with `y = F(x_true)` and target `x_true`.
pub fn convergence_harness<T, M, F>(
    method: &M,
    x_true: &[T],
    f: &F,
    ladder: &[f64],
    n_draws: usize,
    rng: &mut Rng,
) -> Result<Vec<ConvergenceRow>>
where
    T: Scalar,
    M: ReconstructionMethod<T> + ?Sized,
    F: ForwardOperator<T> + ?Sized,
{
    let y = f.forward(x_true)?;
    convergence_harness_with_data(method, x_true, &y, ladder, n_draws, rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub deltas: Vec<f64>,
    pub sup_errors: Vec<f64>,
    /// Least-squares slope of `ln(error)` against `ln(δ)`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log–log fit.
    pub residual: f64,
    pub samples_per_delta: usize,
}

/// Fits `ln e = intercept + slope·ln δ`.
pub fn fit_rate(deltas: &[f64], errors: &[f64]) -> Result<(f64, f64, f64)> {
    if deltas.len() < 3 || deltas.len() != errors.len() {
        return Err(Error::Config(format!(
            "rate fit needs at least 3 rungs with matching errors, got {} and {}",
            deltas.len(),
            errors.len()
        )));
    }
    if errors.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Precondition("rate fit needs positive errors".into()));
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok((slope, intercept, (rss / n).sqrt()))
}

fn report(ladder: &[f64], sups: Vec<f64>, per: usize) -> Result<RateReport> {
    let (slope, intercept, residual) = fit_rate(ladder, &sups)?;
    Ok(RateReport {
        deltas: ladder.to_vec(),
        sup_errors: sups,
        slope,
        intercept,
        residual,
        samples_per_delta: per,
    })
}

/// Worst-case error over `samples × draws` per rung and the fitted rate exponent.
pub fn rate_harness<T, M, F>(
    method: &M,
    samples: &[Vec<T>],
    f: &F,
    ladder: &[f64],
    n_draws: usize,
    rng: &mut Rng,
) -> Result<RateReport>
where
    T: Scalar,
    M: ReconstructionMethod<T> + ?Sized,
    F: ForwardOperator<T> + ?Sized,
{
    check_ladder(ladder)?;
    if ladder.len() < 3 {
        return Err(Error::Config("rate fit needs at least 3 rungs".into()));
    }
    if samples.is_empty() || n_draws == 0 {
        return Err(Error::Config("rate harness needs samples and draws".into()));
    }
    let data: Vec<Vec<T>> = samples.iter().map(|x| f.forward(x)).collect::<Result<_>>()?;
    let mut sups = vec![0.0f64; ladder.len()];
    let mut per = 0;
    for (k, &delta) in ladder.iter().enumerate() {
        per = 0;
        for (i, (x, y)) in samples.iter().zip(&data).enumerate() {
            let mut stream = rng.derive((i as u64) << 16 | k as u64);
            let errs = errors_at(method, x, y, delta, n_draws, &mut stream)?;
            per += errs.len();
            sups[k] = errs.iter().cloned().fold(sups[k], f64::max);
        }
    }
    report(ladder, sups, per)
}

/// Stability of the regularizer: `sup ‖G_α(y^δ) − G_α(F x)‖` with `α = α*(δ)`.
pub fn stability_probe<T, G, F>(
    g: &G,
    pc: &ParameterChoice,
    samples: &[Vec<T>],
    f: &F,
    ladder: &[f64],
    n_draws: usize,
    rng: &mut Rng,
) -> Result<RateReport>
where
    T: Scalar,
    G: RegularizerFamily<T> + ?Sized,
    F: ForwardOperator<T> + ?Sized,
{
    check_ladder(ladder)?;
    let mut sups = vec![0.0f64; ladder.len()];
    for (i, x) in samples.iter().enumerate() {
        let y = f.forward(x)?;
        for (k, &delta) in ladder.iter().enumerate() {
            let alpha = pc.alpha(delta);
            let clean = g.reconstruct(alpha, &y)?;
            let mut stream = rng.derive((i as u64) << 16 | k as u64);
            for _ in 0..n_draws {
                let yd = add_noise(&y, NoiseModel { delta }, &mut stream)?;
                let e = l2_distance(&g.reconstruct(alpha, &yd)?, &clean)?.f64();
                sups[k] = sups[k].max(e);
            }
        }
    }
    report(ladder, sups, samples.len() * n_draws)
}

/// Gap between the relaxed and the exact wrapper: `sup ‖Φ_α(x) − Φ₀(x)‖` with `α = α*(δ)`.
pub fn wrapper_gap_probe<T, P, Q>(
    phi: &P,
    phi0: &Q,
    pc: &ParameterChoice,
    samples: &[Vec<T>],
    ladder: &[f64],
) -> Result<RateReport>
where
    T: Scalar,
    P: WrapperFamily<T> + ?Sized,
    Q: WrapperFamily<T> + ?Sized,
{
    check_ladder(ladder)?;
    let mut sups = vec![0.0f64; ladder.len()];
    for x in samples {
        let exact = phi0.wrap(0.0, x)?;
        for (k, &delta) in ladder.iter().enumerate() {
            let e = l2_distance(&phi.wrap(pc.alpha(delta), x)?, &exact)?.f64();
            sups[k] = sups[k].max(e);
        }
    }
    report(ladder, sups, samples.len())
}
