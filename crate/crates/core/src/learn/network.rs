//! A small convolutional encoder–decoder with an optional identity skip, differentiated by hand.

use serde::{Deserialize, Serialize};

use super::tensor::{
    concat, conv_backward, conv_forward, pool_backward, pool_forward, relu_in_place, relu_mask, split,
    up_backward, up_forward, Tensor,
};
use crate::error::{check_len, Error, Result};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolAxes {
    /// 2×2 pooling.
    Both,
    /// 1×2 pooling along the row direction only (keeps the number of rows).
    Columns,
}

impl PoolAxes {
    fn factors(self) -> (usize, usize) {
        match self {
            PoolAxes::Both => (2, 2),
            PoolAxes::Columns => (1, 2),
        }
    }
}

/// Shape of the network.
///
/// `levels = 0` gives a plain stack: `convs_per_level` ReLU convolutions of width
/// `base_channels` followed by a linear output convolution. With `levels > 0` each level
/// halves the resolution and the decoder concatenates the matching encoder features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub channels: usize,
    pub base_channels: usize,
    pub levels: usize,
    pub convs_per_level: usize,
    pub kernel: (usize, usize),
    pub pool_axes: PoolAxes,
    pub residual: bool,
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            channels: 1,
            base_channels: 8,
            levels: 0,
            convs_per_level: 2,
            kernel: (3, 3),
            pool_axes: PoolAxes::Both,
            residual: true,
        }
    }
}

impl Architecture {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("architecture: {m}")));
        if self.channels == 0 {
            return bad("channels must be positive");
        }
        if self.kernel.0 % 2 == 0 || self.kernel.1 % 2 == 0 {
            return bad("kernel sides must be odd");
        }
        if self.convs_per_level > 0 && self.base_channels == 0 {
            return bad("base_channels must be positive");
        }
        if self.convs_per_level == 0 && self.levels > 0 {
            return bad("pooling levels need at least one convolution per level");
        }
        Ok(())
    }

    /// Checks that an `h × w` grid survives `levels` rounds of pooling.
    pub fn check_grid(&self, h: usize, w: usize) -> Result<()> {
        let (fy, fx) = self.pool_axes.factors();
        let (dy, dx) = (fy.pow(self.levels as u32), fx.pow(self.levels as u32));
        if h == 0 || w == 0 || h % dy != 0 || w % dx != 0 {
            return Err(Error::Config(format!(
                "grid {h}x{w} is not divisible by the pooling factor {dy}x{dx}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Layer {
    pub in_c: usize,
    pub out_c: usize,
    pub w_off: usize,
    pub b_off: usize,
    pub relu: bool,
}

impl Layer {
    pub fn weight_len(&self, kernel: (usize, usize)) -> usize {
        self.out_c * self.in_c * kernel.0 * kernel.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Node {
    Input,
    Conv { src: usize, layer: usize },
    Pool { src: usize },
    Up { src: usize },
    Concat { a: usize, b: usize },
    Residual { body: usize },
}

fn plan(arch: &Architecture) -> (Vec<Node>, Vec<Layer>) {
    let mut nodes = vec![Node::Input];
    let mut layers: Vec<Layer> = Vec::new();
    let mut offset = 0usize;
    let k = arch.kernel.0 * arch.kernel.1;
    let mut add_layer = |layers: &mut Vec<Layer>, in_c: usize, out_c: usize, relu: bool| {
        let w_off = offset;
        let b_off = w_off + in_c * out_c * k;
        offset = b_off + out_c;
        layers.push(Layer {
            in_c,
            out_c,
            w_off,
            b_off,
            relu,
        });
        layers.len() - 1
    };
    let push = |nodes: &mut Vec<Node>, n: Node| {
        nodes.push(n);
        nodes.len() - 1
    };

    let c = arch.base_channels;
    let mut cur = 0usize;
    let mut cur_c = arch.channels;
    if arch.convs_per_level > 0 {
        let mut skips = Vec::new();
        for level in 0..=arch.levels {
            if level > 0 {
                cur = push(&mut nodes, Node::Pool { src: cur });
            }
            for _ in 0..arch.convs_per_level {
                let l = add_layer(&mut layers, cur_c, c, true);
                cur = push(&mut nodes, Node::Conv { src: cur, layer: l });
                cur_c = c;
            }
            skips.push(cur);
        }
        for level in (0..arch.levels).rev() {
            let up = push(&mut nodes, Node::Up { src: cur });
            cur = push(&mut nodes, Node::Concat { a: skips[level], b: up });
            cur_c = 2 * c;
            for _ in 0..arch.convs_per_level {
                let l = add_layer(&mut layers, cur_c, c, true);
                cur = push(&mut nodes, Node::Conv { src: cur, layer: l });
                cur_c = c;
            }
        }
    }
    let l = add_layer(&mut layers, cur_c, arch.channels, false);
    cur = push(&mut nodes, Node::Conv { src: cur, layer: l });
    if arch.residual {
        push(&mut nodes, Node::Residual { body: cur });
    }
    (nodes, layers)
}

/// Network weights plus the execution plan derived from the architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    arch: Architecture,
    nodes: Vec<Node>,
    layers: Vec<Layer>,
    params: Vec<T>,
}

/// Activations of every node for one input, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    values: Vec<Tensor<T>>,
}

impl<T: Scalar> ForwardCache<T> {
    pub fn output(&self) -> &[T] {
        &self.values.last().expect("nonempty plan").data
    }
}

impl<T: Scalar> Network<T> {
    /// All-zero weights; a residual network is then exactly the identity.
    pub fn zeros(arch: Architecture) -> Result<Self> {
        arch.validate()?;
        let (nodes, layers) = plan(&arch);
        let n = layers.last().map(|l| l.b_off + l.out_c).unwrap_or(0);
        Ok(Self {
            arch,
            nodes,
            layers,
            params: vec![T::zero(); n],
        })
    }

    /// Uniform `±1/√fan_in` weights, zero biases and a zero output layer.
    pub fn init(arch: Architecture, rng: &mut Rng) -> Result<Self> {
        let mut net = Self::zeros(arch)?;
        let k = arch.kernel.0 * arch.kernel.1;
        let last = net.layers.len() - 1;
        for (idx, layer) in net.layers.clone().iter().enumerate() {
            if idx == last {
                continue;
            }
            let bound = 1.0 / ((layer.in_c * k) as f64).sqrt();
            for p in &mut net.params[layer.w_off..layer.w_off + layer.weight_len(arch.kernel)] {
                *p = T::of(rng.uniform(-bound, bound));
            }
        }
        Ok(net)
    }

    pub fn from_params(arch: Architecture, params: Vec<T>) -> Result<Self> {
        let mut net = Self::zeros(arch)?;
        check_len("network parameters", net.params.len(), params.len())?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Format("non-finite network weight".into()));
        }
        net.params = params;
        Ok(net)
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Mask that is one on kernel weights and zero on biases.
    pub fn kernel_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.params.len()];
        for l in &self.layers {
            for m in &mut mask[l.w_off..l.b_off] {
                *m = true;
            }
        }
        mask
    }

    /// `Σ w²` over kernel weights (biases excluded).
    pub fn kernel_norm_sq(&self) -> T {
        self.layers
            .iter()
            .flat_map(|l| self.params[l.w_off..l.b_off].iter())
            .map(|&w| w * w)
            .sum()
    }

    fn weights(&self, l: &Layer) -> &[T] {
        &self.params[l.w_off..l.b_off]
    }

    fn bias(&self, l: &Layer) -> &[T] {
        &self.params[l.b_off..l.b_off + l.out_c]
    }

    fn input_tensor(&self, x: &[T], h: usize, w: usize) -> Result<Tensor<T>> {
        self.arch.check_grid(h, w)?;
        check_len("network input", self.arch.channels * h * w, x.len())?;
        Ok(Tensor::from_vec(self.arch.channels, h, w, x.to_vec()))
    }

    pub fn forward_cached(&self, x: &[T], h: usize, w: usize) -> Result<ForwardCache<T>> {
        let input = self.input_tensor(x, h, w)?;
        let (fy, fx) = self.arch.pool_axes.factors();
        let (kh, kw) = self.arch.kernel;
        let mut values: Vec<Tensor<T>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match *node {
                Node::Input => input.clone(),
                Node::Conv { src, layer } => {
                    let l = &self.layers[layer];
                    let mut t = conv_forward(&values[src], self.weights(l), Some(self.bias(l)), l.out_c, kh, kw);
                    if l.relu {
                        relu_in_place(&mut t);
                    }
                    t
                }
                Node::Pool { src } => pool_forward(&values[src], fy, fx),
                Node::Up { src } => up_forward(&values[src], fy, fx),
                Node::Concat { a, b } => concat(&values[a], &values[b]),
                Node::Residual { body } => {
                    let mut t = values[0].clone();
                    t.add_assign(&values[body]);
                    t
                }
            };
            values.push(v);
        }
        Ok(ForwardCache { values })
    }

    pub fn forward(&self, x: &[T], h: usize, w: usize) -> Result<Vec<T>> {
        let mut cache = self.forward_cached(x, h, w)?;
        Ok(cache.values.pop().expect("nonempty plan").data)
    }

    /// Reverse pass. Adds `∂⟨g, U(x)⟩/∂θ` into `grad_params` and returns `J_xᵀ g`.
    pub fn backward(&self, cache: &ForwardCache<T>, g_out: &[T], grad_params: Option<&mut [T]>) -> Vec<T> {
        let n = self.nodes.len();
        let last = &cache.values[n - 1];
        debug_assert_eq!(g_out.len(), last.data.len());
        let (fy, fx) = self.arch.pool_axes.factors();
        let (kh, kw) = self.arch.kernel;
        let mut scratch;
        let grad_params: &mut [T] = match grad_params {
            Some(g) => g,
            None => {
                scratch = vec![T::zero(); self.params.len()];
                &mut scratch
            }
        };
        let mut grads: Vec<Option<Tensor<T>>> = vec![None; n];
        grads[n - 1] = Some(Tensor::from_vec(last.c, last.h, last.w, g_out.to_vec()));
        let acc = |grads: &mut Vec<Option<Tensor<T>>>, idx: usize, t: Tensor<T>| match grads[idx].as_mut() {
            Some(existing) => existing.add_assign(&t),
            None => grads[idx] = Some(t),
        };
        for idx in (1..n).rev() {
            let Some(mut g) = grads[idx].take() else {
                continue;
            };
            match self.nodes[idx] {
                Node::Input => unreachable!("input is node 0"),
                Node::Conv { src, layer } => {
                    let l = self.layers[layer];
                    if l.relu {
                        relu_mask(&cache.values[idx], &mut g);
                    }
                    let (gw, rest) = grad_params[l.w_off..].split_at_mut(l.b_off - l.w_off);
                    let gb = &mut rest[..l.out_c];
                    let gx = conv_backward(&cache.values[src], &g, self.weights(&l), kh, kw, gw, gb, true)
                        .expect("input gradient requested");
                    acc(&mut grads, src, gx);
                }
                Node::Pool { src } => acc(&mut grads, src, pool_backward(&g, fy, fx)),
                Node::Up { src } => acc(&mut grads, src, up_backward(&g, fy, fx)),
                Node::Concat { a, b } => {
                    let (ga, gb) = split(&g, cache.values[a].c);
                    acc(&mut grads, a, ga);
                    acc(&mut grads, b, gb);
                }
                Node::Residual { body } => {
                    acc(&mut grads, 0, g.clone());
                    acc(&mut grads, body, g);
                }
            }
        }
        match grads[0].take() {
            Some(g) => g.data,
            None => vec![T::zero(); cache.values[0].data.len()],
        }
    }

    /// Forward-mode derivative `J_x v` at the cached point.
    pub fn jvp(&self, cache: &ForwardCache<T>, v: &[T]) -> Vec<T> {
        let (fy, fx) = self.arch.pool_axes.factors();
        let (kh, kw) = self.arch.kernel;
        let x0 = &cache.values[0];
        let mut tangents: Vec<Tensor<T>> = Vec::with_capacity(self.nodes.len());
        for (idx, node) in self.nodes.iter().enumerate() {
            let t = match *node {
                Node::Input => Tensor::from_vec(x0.c, x0.h, x0.w, v.to_vec()),
                Node::Conv { src, layer } => {
                    let l = &self.layers[layer];
                    let mut t = conv_forward(&tangents[src], self.weights(l), None, l.out_c, kh, kw);
                    if l.relu {
                        relu_mask(&cache.values[idx], &mut t);
                    }
                    t
                }
                Node::Pool { src } => pool_forward(&tangents[src], fy, fx),
                Node::Up { src } => up_forward(&tangents[src], fy, fx),
                Node::Concat { a, b } => concat(&tangents[a], &tangents[b]),
                Node::Residual { body } => {
                    let mut t = tangents[0].clone();
                    t.add_assign(&tangents[body]);
                    t
                }
            };
            tangents.push(t);
        }
        tangents.pop().expect("nonempty plan").data
    }

    /// Upper bound on the Lipschitz constant from per-layer operator norms.
    ///
    /// A convolution is bounded by the sum over taps of the spectral norm of the tap's
    /// channel matrix; pooling, upsampling and concatenation contribute their exact norms.
    pub fn lipschitz_upper_bound(&self) -> f64 {
        let (fy, fx) = self.arch.pool_axes.factors();
        let pool_norm = 1.0 / ((fy * fx) as f64).sqrt();
        let up_norm = ((fy * fx) as f64).sqrt();
        let mut bound: Vec<f64> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let b = match *node {
                Node::Input => 1.0,
                Node::Conv { src, layer } => {
                    let l = &self.layers[layer];
                    let src_node = self.nodes[src];
                    if let Node::Concat { a, b } = src_node {
                        // split the kernel by input block; take the better of two valid bounds
                        let ca = self.concat_channels(a);
                        let (na, nb) = (self.tap_norm(l, 0..ca), self.tap_norm(l, ca..l.in_c));
                        let (la, lb) = (bound[a], bound[b]);
                        (na * la + nb * lb).min(self.tap_norm(l, 0..l.in_c) * la.hypot(lb))
                    } else {
                        self.tap_norm(l, 0..l.in_c) * bound[src]
                    }
                }
                Node::Pool { src } => pool_norm * bound[src],
                Node::Up { src } => up_norm * bound[src],
                Node::Concat { a, b } => bound[a].hypot(bound[b]),
                Node::Residual { body } => 1.0 + bound[body],
            };
            bound.push(b);
        }
        *bound.last().expect("nonempty plan")
    }

    fn concat_channels(&self, node: usize) -> usize {
        match self.nodes[node] {
            Node::Input => self.arch.channels,
            Node::Conv { layer, .. } => self.layers[layer].out_c,
            Node::Pool { src } | Node::Up { src } => self.concat_channels(src),
            Node::Concat { a, b } => self.concat_channels(a) + self.concat_channels(b),
            Node::Residual { .. } => self.arch.channels,
        }
    }

    fn tap_norm(&self, l: &Layer, inputs: std::ops::Range<usize>) -> f64 {
        let (kh, kw) = self.arch.kernel;
        let w = self.weights(l);
        let mut total = 0.0;
        for ky in 0..kh {
            for kx in 0..kw {
                let m = nalgebra::DMatrix::<f64>::from_fn(l.out_c, inputs.len(), |o, j| {
                    let i = inputs.start + j;
                    w[((o * l.in_c + i) * kh + ky) * kw + kx].f64()
                });
                if m.ncols() == 0 {
                    continue;
                }
                let s = m.singular_values();
                total += s.iter().cloned().fold(0.0, f64::max);
            }
        }
        // singular values are computed to round-off; pad so this stays an upper bound
        total * (1.0 + 1e-12) + 1e-300
    }
}
