use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest regularization parameter handed out, used for noiseless data.
pub const ALPHA_FLOOR: f64 = 1e-12;

/// A priori rule `α*(δ) = c·δᵖ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterChoice {
    pub c: f64,
    pub p: f64,
}

impl Default for ParameterChoice {
    fn default() -> Self {
        Self { c: 1.0, p: 1.0 }
    }
}

impl ParameterChoice {
    pub fn new(c: f64, p: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!("parameter choice constant must be positive, got {c}")));
        }
        if !(p > 0.0 && p < 2.0) {
            return Err(Error::Config(format!("parameter choice exponent must lie in (0, 2), got {p}")));
        }
        Ok(Self { c, p })
    }

    pub fn alpha(&self, delta: f64) -> f64 {
        if delta <= 0.0 {
            ALPHA_FLOOR
        } else {
            (self.c * delta.powf(self.p)).max(ALPHA_FLOOR)
        }
    }
}

/// Consistency radius `r(α) = scale·α^exponent` for the relaxed wrappers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusRule {
    pub scale: f64,
    pub exponent: f64,
}

impl Default for RadiusRule {
    fn default() -> Self {
        Self {
            scale: 1.0,
            exponent: 0.5,
        }
    }
}

impl RadiusRule {
    pub fn radius(&self, alpha: f64) -> f64 {
        if alpha <= 0.0 {
            0.0
        } else {
            self.scale * alpha.powf(self.exponent)
        }
    }
}
