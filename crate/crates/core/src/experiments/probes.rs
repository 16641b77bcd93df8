//! Adversarial noise directions for the rate and convergence harnesses.

use super::harness::NoiseProbe;
use crate::error::{Error, Result};
use crate::linalg::SpectralPinv;
use crate::operators::RadonOperator;
use crate::scalar::Scalar;

/// For linear Tikhonov, noise along a left singular vector `u_j` is amplified by
/// `σ_j/(σ_j² + α)`; this probe returns the `u_j` maximising that factor.
#[derive(Debug, Clone)]
pub struct SpectralNoiseProbe {
    pairs: Vec<(f64, Vec<f64>)>,
}

impl SpectralNoiseProbe {
    /// Needs the data-side basis, i.e. an operator with at most as many rows as columns.
    pub fn from_pinv(p: &SpectralPinv, data_len: usize) -> Result<Self> {
        let pairs: Vec<(f64, Vec<f64>)> = p.singular_pairs().map(|(s, v)| (s, v.to_vec())).collect();
        if pairs.iter().any(|(_, v)| v.len() != data_len) {
            return Err(Error::Precondition(
                "spectral probe needs singular vectors in data space".into(),
            ));
        }
        Ok(Self { pairs })
    }

    pub fn for_radon<T: Scalar>(radon: &RadonOperator<T>) -> Result<Self> {
        let m = radon.n_angles() * radon.n_bins();
        Self::from_pinv(radon.spectral_pinv()?, m)
    }
}

impl NoiseProbe for SpectralNoiseProbe {
    fn directions(&self, alpha: f64) -> Result<Vec<Vec<f64>>> {
        let best = self
            .pairs
            .iter()
            .max_by(|a, b| {
                let f = |s: f64| s / (s * s + alpha);
                f(a.0).total_cmp(&f(b.0))
            })
            .ok_or_else(|| Error::Precondition("operator has no nonzero singular values".into()))?;
        Ok(vec![best.1.clone()])
    }
}
