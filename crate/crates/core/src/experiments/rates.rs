//! Rate and convergence studies: Tikhonov and the regularizing network on the Radon problem,
//! an identity sanity check, and convergence of `R_α` on saturated sinograms.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::harness::{
    convergence_harness_with_data, default_ladder, rate_harness, stability_probe, wrapper_gap_probe, ConvergenceRow,
    NoiseProbe, RateReport, RegularizedMethod,
};
use super::probes::SpectralNoiseProbe;
use super::radon::RadonSat;
use crate::consistency::{
    ComposedDc, FixedWrapper, IdentityWrapper, LipschitzMap, NullspaceDc, NullspaceProjection, ParameterChoice,
    RadiusRule, RelaxedWrapper, TikhonovRegularizer,
};
use crate::error::{Error, Result};
use crate::linalg::{norm, Identity};
use crate::operators::{ForwardOperator, Linear, RadonOperator};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSettings {
    pub ladder: Vec<f64>,
    pub draws: usize,
    pub choice: ParameterChoice,
    pub radius: RadiusRule,
    pub samples: usize,
    /// `‖w‖` of the source elements `F₁ᵀw`.
    pub source_norm: f64,
}

impl Default for RateSettings {
    fn default() -> Self {
        Self {
            ladder: default_ladder(),
            draws: 20,
            choice: ParameterChoice::default(),
            radius: RadiusRule::default(),
            samples: 4,
            source_norm: 1.0,
        }
    }
}

impl RateSettings {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.draws == 0 {
            return Err(Error::Config("rate study needs samples and draws".into()));
        }
        if !(self.source_norm > 0.0) {
            return Err(Error::Config("source norm must be positive".into()));
        }
        Ok(())
    }
}

/// `x = F₁ᵀw` for Gaussian `w` rescaled to `‖w‖ = norm`.
pub fn source_elements<T: Scalar>(radon: &RadonOperator<T>, count: usize, w_norm: f64, rng: &mut Rng) -> Result<Vec<Vec<T>>> {
    let m = radon.n_angles() * radon.n_bins();
    (0..count)
        .map(|_| {
            let g: Vec<f64> = (0..m).map(|_| rng.gaussian()).collect();
            let s = w_norm / norm(&g);
            let w: Vec<T> = g.iter().map(|v| T::of(v * s)).collect();
            radon.adjoint_slice(&w)
        })
        .collect()
}

fn tikhonov<T: Scalar>(radon: &Arc<RadonOperator<T>>) -> Arc<TikhonovRegularizer<T>> {
    Arc::new(TikhonovRegularizer::new(radon.clone() as Arc<dyn ForwardOperator<T>>))
}

/// Tikhonov with `F = id` and `α* = δ` on Gaussian samples; the expected slope is 1.
pub fn identity_rate<T: Scalar>(dim: usize, s: &RateSettings, rng: &mut Rng) -> Result<RateReport> {
    s.validate()?;
    let op: Arc<dyn ForwardOperator<T>> = Arc::new(Linear(Identity(dim)));
    let samples: Vec<Vec<T>> = (0..s.samples)
        .map(|_| {
            let g: Vec<f64> = (0..dim).map(|_| rng.gaussian()).collect();
            let k = s.source_norm / norm(&g);
            g.iter().map(|v| T::of(v * k)).collect()
        })
        .collect();
    let method = RegularizedMethod {
        g: Arc::new(TikhonovRegularizer::new(op.clone())),
        phi: Arc::new(IdentityWrapper),
        pc: ParameterChoice::default(),
        probe: None,
    };
    rate_harness(&method, &samples, op.as_ref(), &s.ladder, s.draws, &mut rng.derive(1))
}

/// Tikhonov over the source set `X₀ = {F₁ᵀw}`.
pub fn tikhonov_rate<T: Scalar>(
    radon: &Arc<RadonOperator<T>>,
    sources: &[Vec<T>],
    s: &RateSettings,
    rng: &Rng,
) -> Result<RateReport> {
    let probe: Arc<dyn NoiseProbe> = Arc::new(SpectralNoiseProbe::for_radon(radon.as_ref())?);
    let method = RegularizedMethod {
        g: tikhonov(radon),
        phi: Arc::new(IdentityWrapper),
        pc: s.choice,
        probe: Some(probe),
    };
    rate_harness(&method, sources, radon.as_ref(), &s.ladder, s.draws, &mut rng.derive(2))
}

/// `Φ_α = P_{z,α} ∘ U` with radius `r(α)` for the null-space problem.
pub fn relaxed_nullspace<T: Scalar>(
    radon: &Arc<RadonOperator<T>>,
    net: Arc<dyn LipschitzMap<T>>,
    radius: RadiusRule,
) -> RelaxedWrapper<T> {
    RelaxedWrapper {
        net,
        forward: radon.clone(),
        projection: Arc::new(NullspaceProjection(radon.clone())),
        radius,
    }
}

/// `R_α = Φ_α ∘ G_α` (Tikhonov, relaxed null-space wrapper) over `M₀ = Φ₀(X₀)`.
pub fn network_rate<T: Scalar>(
    radon: &Arc<RadonOperator<T>>,
    net: Arc<dyn LipschitzMap<T>>,
    sources: &[Vec<T>],
    s: &RateSettings,
    rng: &Rng,
) -> Result<RateReport> {
    let phi0 = NullspaceDc {
        net: net.clone(),
        radon: radon.clone(),
    };
    let m0: Vec<Vec<T>> = sources.iter().map(|x| phi0.eval(x)).collect::<Result<_>>()?;
    let probe: Arc<dyn NoiseProbe> = Arc::new(SpectralNoiseProbe::for_radon(radon.as_ref())?);
    let method = RegularizedMethod {
        g: tikhonov(radon),
        phi: Arc::new(relaxed_nullspace(radon, net, s.radius)),
        pc: s.choice,
        probe: Some(probe),
    };
    rate_harness(&method, &m0, radon.as_ref(), &s.ladder, s.draws, &mut rng.derive(3))
}

/// `sup ‖G_α(y^δ) − G_α(F x)‖` over the source set.
pub fn stability_rate<T: Scalar>(
    radon: &Arc<RadonOperator<T>>,
    sources: &[Vec<T>],
    s: &RateSettings,
    rng: &Rng,
) -> Result<RateReport> {
    stability_probe(
        tikhonov(radon).as_ref(),
        &s.choice,
        sources,
        radon.as_ref(),
        &s.ladder,
        s.draws,
        &mut rng.derive(4),
    )
}

/// `sup ‖Φ_α(x) − Φ₀(x)‖` over the source set.
pub fn wrapper_gap_rate<T: Scalar>(
    radon: &Arc<RadonOperator<T>>,
    net: Arc<dyn LipschitzMap<T>>,
    sources: &[Vec<T>],
    s: &RateSettings,
) -> Result<RateReport> {
    let exact = FixedWrapper(Arc::new(NullspaceDc {
        net: net.clone(),
        radon: radon.clone(),
    }) as Arc<dyn LipschitzMap<T>>);
    wrapper_gap_probe(&relaxed_nullspace(radon, net, s.radius), &exact, &s.choice, sources, &s.ladder)
}

/// Convergence of `R_α = Φ₀ ∘ G_α` on saturated data: `G_α` is Tikhonov on `F₁`, `Φ₀` the
/// composed wrapper, and the limit `Φ₀(F₁† y)`.
pub fn radon_sat_convergence<T: Scalar>(
    problem: &RadonSat<T>,
    dc: ComposedDc<T>,
    x_true: &[T],
    s: &RateSettings,
    rng: &Rng,
) -> Result<Vec<ConvergenceRow>> {
    s.validate()?;
    let radon = problem.op.radon_arc();
    let y = problem.forward(x_true)?;
    let dc: Arc<dyn LipschitzMap<T>> = Arc::new(dc);
    let target = dc.eval(&radon.pinv_slice(&y)?)?;
    let probe: Arc<dyn NoiseProbe> = Arc::new(SpectralNoiseProbe::for_radon(radon.as_ref())?);
    let method = RegularizedMethod {
        g: tikhonov(&radon),
        phi: Arc::new(FixedWrapper(dc)),
        pc: s.choice,
        probe: Some(probe),
    };
    convergence_harness_with_data(&method, &target, &y, &s.ladder, s.draws, &mut rng.derive(5))
}
