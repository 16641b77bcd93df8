use serde::{Deserialize, Serialize};

use super::network::Network;
use crate::error::Result;
use crate::linalg::{norm, scale};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    /// Largest observed ratio; a lower bound on the true constant.
    pub lower: f64,
    /// Composition of layer-norm bounds.
    pub upper: f64,
}

/// Probes `‖U(a) − U(b)‖/‖a − b‖` on random pairs and the local Jacobian norm by power iteration.
pub fn lipschitz_estimate<T: Scalar>(
    net: &Network<T>,
    h: usize,
    w: usize,
    n_probes: usize,
    rng: &mut Rng,
) -> Result<LipschitzEstimate> {
    let n = net.architecture().channels * h * w;
    let mut lower = 0.0f64;
    for _ in 0..n_probes.max(1) {
        let a: Vec<T> = rng.uniform_vec(n, 0.0, 1.0);
        let eps = 10f64.powf(rng.uniform(-3.0, 0.0));
        let mut d: Vec<T> = rng.gaussian_vec(n);
        let dn = norm(&d);
        scale(T::of(eps) / dn, &mut d);
        let b: Vec<T> = a.iter().zip(&d).map(|(&x, &y)| x + y).collect();
        let ua = net.forward(&a, h, w)?;
        let ub = net.forward(&b, h, w)?;
        let num = crate::linalg::l2_distance(&ua, &ub)?.f64();
        lower = lower.max(num / eps);

        let cache = net.forward_cached(&a, h, w)?;
        let mut v: Vec<T> = rng.gaussian_vec(n);
        let vn = norm(&v);
        scale(vn.recip(), &mut v);
        for _ in 0..30 {
            let jv = net.jvp(&cache, &v);
            lower = lower.max(norm(&jv).f64());
            let mut jtjv = net.backward(&cache, &jv, None);
            let nn = norm(&jtjv);
            if nn.is_zero() {
                break;
            }
            scale(nn.recip(), &mut jtjv);
            v = jtjv;
        }
    }
    Ok(LipschitzEstimate {
        lower,
        upper: net.lipschitz_upper_bound(),
    })
}
