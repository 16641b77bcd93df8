use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{l2_distance, norm};
use crate::rng::Rng;
use crate::scalar::Scalar;

/// Perturbations drawn from the ball of radius `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub delta: f64,
}

/// `y + δ·u·g/‖g‖` with `g` Gaussian and `u ~ U[0, 1)`; `‖y^δ − y‖ ≤ δ` always holds.
pub fn add_noise<T: Scalar>(y: &[T], model: NoiseModel, rng: &mut Rng) -> Result<Vec<T>> {
    if !(model.delta >= 0.0) {
        return Err(Error::Precondition(format!("noise level must be nonnegative, got {}", model.delta)));
    }
    if model.delta == 0.0 || y.is_empty() {
        return Ok(y.to_vec());
    }
    let g: Vec<f64> = (0..y.len()).map(|_| rng.gaussian()).collect();
    let u = rng.unit();
    let gn = norm(&g);
    let dir: Vec<f64> = g.iter().map(|v| v / gn).collect();
    Ok(perturb(y, &dir, model.delta * u, model.delta))
}

/// `y + r·d` for a unit direction `d`, shrunk if rounding would leave the `delta` ball.
pub fn perturb<T: Scalar>(y: &[T], dir: &[f64], r: f64, delta: f64) -> Vec<T> {
    let mut r = r.min(delta);
    loop {
        let out: Vec<T> = y.iter().zip(dir).map(|(&a, &d)| a + T::of(r * d)).collect();
        let dist = l2_distance(&out, y).expect("same length").f64();
        if dist <= delta {
            return out;
        }
        r *= (delta / dist) * (1.0 - 1e-12);
    }
}
