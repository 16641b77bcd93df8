//! Channel-major activations and the handful of ops the network needs.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(c: usize, h: usize, w: usize) -> Self {
        Self {
            c,
            h,
            w,
            data: vec![T::zero(); c * h * w],
        }
    }

    pub fn from_vec(c: usize, h: usize, w: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), c * h * w);
        Self { c, h, w, data }
    }

    #[inline]
    fn plane(&self) -> usize {
        self.h * self.w
    }

    pub fn add_assign(&mut self, other: &Tensor<T>) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b;
        }
    }
}

/// Same-padding correlation, `weights[o][i][ky][kx]`.
pub fn conv_forward<T: Scalar>(
    x: &Tensor<T>,
    weights: &[T],
    bias: Option<&[T]>,
    out_c: usize,
    kh: usize,
    kw: usize,
) -> Tensor<T> {
    let (h, w, in_c) = (x.h, x.w, x.c);
    let mut out = Tensor::zeros(out_c, h, w);
    let plane = h * w;
    for o in 0..out_c {
        let dst = &mut out.data[o * plane..(o + 1) * plane];
        if let Some(b) = bias {
            dst.iter_mut().for_each(|v| *v = b[o]);
        }
        for i in 0..in_c {
            let src = &x.data[i * plane..(i + 1) * plane];
            for ky in 0..kh {
                let dy = ky as isize - (kh / 2) as isize;
                for kx in 0..kw {
                    let dx = kx as isize - (kw / 2) as isize;
                    let wt = weights[((o * in_c + i) * kh + ky) * kw + kx];
                    if wt.is_zero() {
                        continue;
                    }
                    let (y0, y1) = valid(h, dy);
                    let (x0, x1) = valid(w, dx);
                    for y in y0..y1 {
                        let sy = (y as isize + dy) as usize;
                        let drow = &mut dst[y * w + x0..y * w + x1];
                        let srow = &src[sy * w + (x0 as isize + dx) as usize..sy * w + (x1 as isize + dx) as usize];
                        for (d, &s) in drow.iter_mut().zip(srow) {
                            *d = *d + wt * s;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Gradients of a same-padding correlation: returns `∂/∂x` and accumulates into `gw`, `gb`.
pub fn conv_backward<T: Scalar>(
    x: &Tensor<T>,
    g: &Tensor<T>,
    weights: &[T],
    kh: usize,
    kw: usize,
    gw: &mut [T],
    gb: &mut [T],
    want_input: bool,
) -> Option<Tensor<T>> {
    let (h, w, in_c, out_c) = (x.h, x.w, x.c, g.c);
    let plane = h * w;
    let mut gx = if want_input {
        Some(Tensor::zeros(in_c, h, w))
    } else {
        None
    };
    for o in 0..out_c {
        let go = &g.data[o * plane..(o + 1) * plane];
        gb[o] = gb[o] + go.iter().copied().sum::<T>();
        for i in 0..in_c {
            let src = &x.data[i * plane..(i + 1) * plane];
            for ky in 0..kh {
                let dy = ky as isize - (kh / 2) as isize;
                for kx in 0..kw {
                    let dx = kx as isize - (kw / 2) as isize;
                    let widx = ((o * in_c + i) * kh + ky) * kw + kx;
                    let wt = weights[widx];
                    let (y0, y1) = valid(h, dy);
                    let (x0, x1) = valid(w, dx);
                    let mut acc = T::zero();
                    for y in y0..y1 {
                        let sy = (y as isize + dy) as usize;
                        let grow = &go[y * w + x0..y * w + x1];
                        let s0 = sy * w + (x0 as isize + dx) as usize;
                        let srow = &src[s0..s0 + (x1 - x0)];
                        for (&gv, &sv) in grow.iter().zip(srow) {
                            acc = acc + gv * sv;
                        }
                        if let Some(gx) = gx.as_mut() {
                            let drow = &mut gx.data[i * plane + s0..i * plane + s0 + (x1 - x0)];
                            for (d, &gv) in drow.iter_mut().zip(grow) {
                                *d = *d + wt * gv;
                            }
                        }
                    }
                    gw[widx] = gw[widx] + acc;
                }
            }
        }
    }
    gx
}

#[inline]
fn valid(n: usize, d: isize) -> (usize, usize) {
    let lo = (-d).max(0) as usize;
    let hi = (n as isize - d.max(0)).max(0) as usize;
    (lo.min(hi), hi)
}

pub fn relu_in_place<T: Scalar>(t: &mut Tensor<T>) {
    t.data.iter_mut().for_each(|v| {
        if !(*v > T::zero()) {
            *v = T::zero()
        }
    });
}

/// Zeroes `g` wherever the activation was not strictly positive.
pub fn relu_mask<T: Scalar>(activation: &Tensor<T>, g: &mut Tensor<T>) {
    for (gv, &a) in g.data.iter_mut().zip(&activation.data) {
        if !(a > T::zero()) {
            *gv = T::zero();
        }
    }
}

/// Block average with factors `(fy, fx)`.
pub fn pool_forward<T: Scalar>(x: &Tensor<T>, fy: usize, fx: usize) -> Tensor<T> {
    let (h, w) = (x.h / fy, x.w / fx);
    let mut out = Tensor::zeros(x.c, h, w);
    let scale = T::of_usize(fy * fx).recip();
    for c in 0..x.c {
        for y in 0..h {
            for xx in 0..w {
                let mut acc = T::zero();
                for a in 0..fy {
                    for b in 0..fx {
                        acc = acc + x.data[c * x.plane() + (y * fy + a) * x.w + xx * fx + b];
                    }
                }
                out.data[c * h * w + y * w + xx] = acc * scale;
            }
        }
    }
    out
}

pub fn pool_backward<T: Scalar>(g: &Tensor<T>, fy: usize, fx: usize) -> Tensor<T> {
    let (h, w) = (g.h * fy, g.w * fx);
    let mut out = Tensor::zeros(g.c, h, w);
    let scale = T::of_usize(fy * fx).recip();
    for c in 0..g.c {
        for y in 0..h {
            for xx in 0..w {
                out.data[c * h * w + y * w + xx] = g.data[c * g.plane() + (y / fy) * g.w + xx / fx] * scale;
            }
        }
    }
    out
}

/// Nearest-neighbour upsampling.
pub fn up_forward<T: Scalar>(x: &Tensor<T>, fy: usize, fx: usize) -> Tensor<T> {
    let (h, w) = (x.h * fy, x.w * fx);
    let mut out = Tensor::zeros(x.c, h, w);
    for c in 0..x.c {
        for y in 0..h {
            for xx in 0..w {
                out.data[c * h * w + y * w + xx] = x.data[c * x.plane() + (y / fy) * x.w + xx / fx];
            }
        }
    }
    out
}

pub fn up_backward<T: Scalar>(g: &Tensor<T>, fy: usize, fx: usize) -> Tensor<T> {
    let (h, w) = (g.h / fy, g.w / fx);
    let mut out = Tensor::zeros(g.c, h, w);
    for c in 0..g.c {
        for y in 0..g.h {
            for xx in 0..g.w {
                let d = &mut out.data[c * h * w + (y / fy) * w + xx / fx];
                *d = *d + g.data[c * g.plane() + y * g.w + xx];
            }
        }
    }
    out
}

pub fn concat<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
    let mut data = Vec::with_capacity(a.data.len() + b.data.len());
    data.extend_from_slice(&a.data);
    data.extend_from_slice(&b.data);
    Tensor::from_vec(a.c + b.c, a.h, a.w, data)
}

pub fn split<T: Scalar>(g: &Tensor<T>, ca: usize) -> (Tensor<T>, Tensor<T>) {
    let cut = ca * g.plane();
    (
        Tensor::from_vec(ca, g.h, g.w, g.data[..cut].to_vec()),
        Tensor::from_vec(g.c - ca, g.h, g.w, g.data[cut..].to_vec()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_stencil_is_identity() {
        let x = Tensor::from_vec(1, 3, 4, (0..12).map(|v| v as f64).collect());
        let mut k = vec![0.0; 9];
        k[4] = 1.0;
        assert_eq!(conv_forward(&x, &k, None, 1, 3, 3), x);
    }

    #[test]
    fn shift_stencil_zero_pads() {
        // out[y][x] = in[y][x+1]
        let x = Tensor::from_vec(1, 1, 3, vec![1.0, 2.0, 3.0]);
        let out = conv_forward(&x, &[0.0, 0.0, 1.0], None, 1, 1, 3);
        assert_eq!(out.data, vec![2.0, 3.0, 0.0]);
    }

    #[test]
    fn pool_and_up_are_adjoint_up_to_scale() {
        let x = Tensor::from_vec(1, 2, 4, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let p = pool_forward(&x, 2, 2);
        assert_eq!(p.data, vec![3.5, 5.5]);
        let g = up_backward(&up_forward(&p, 2, 2), 2, 2);
        assert_eq!(g.data, vec![14.0, 22.0]);
    }
}
