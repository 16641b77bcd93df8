use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Exponential decay from `start` to `end` over `epochs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    pub start: f64,
    pub end: f64,
    pub epochs: usize,
}

impl LrSchedule {
    pub fn constant(lr: f64) -> Self {
        Self {
            start: lr,
            end: lr,
            epochs: 1,
        }
    }

    pub fn at(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 {
            return self.start;
        }
        let frac = epoch.min(self.epochs - 1) as f64 / (self.epochs - 1) as f64;
        self.start * (self.end / self.start).powf(frac)
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<T>,
    v: Vec<T>,
    t: u64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(n: usize) -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [T], grads: &[T], lr: f64) {
        debug_assert_eq!(params.len(), grads.len());
        self.t += 1;
        let (b1, b2) = (T::of(self.beta1), T::of(self.beta2));
        let c1 = T::of(1.0 - self.beta1.powi(self.t as i32));
        let c2 = T::of(1.0 - self.beta2.powi(self.t as i32));
        let (lr, eps) = (T::of(lr), T::of(self.eps));
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + (T::one() - b1) * g;
            self.v[i] = b2 * self.v[i] + (T::one() - b2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] = params[i] - lr * mh / (vh.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut opt = Adam::<f64>::new(2);
        let mut p = vec![1.0, -2.0];
        opt.step(&mut p, &[0.0, 0.0], 0.1);
        assert_eq!(p, vec![1.0, -2.0]);
    }

    #[test]
    fn first_step_is_normalized_gradient() {
        let mut opt = Adam::<f64>::new(2);
        let mut p = vec![0.0, 0.0];
        let g = [0.5, -3.0];
        opt.step(&mut p, &g, 0.01);
        for (pi, gi) in p.iter().zip(&g) {
            let expect = -0.01 * gi / (gi.abs() + 1e-8);
            assert!((pi - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_hits_endpoints() {
        let s = LrSchedule {
            start: 1e-3,
            end: 1e-4,
            epochs: 11,
        };
        assert!((s.at(0) - 1e-3).abs() < 1e-18);
        assert!((s.at(10) - 1e-4).abs() < 1e-15);
        assert!((s.at(5) - 1e-3 * 0.1f64.sqrt()).abs() < 1e-15);
    }
}
