//! Synthetic ground truths: centred Gaussians and random-ellipse "chest" images.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Extent, Grid, Image};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhantomKind {
    GaussianRegular,
    GaussianModified,
    Ellipse,
    EllipseModified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhantomRegime {
    pub kind: PhantomKind,
    pub sigma: (f64, f64),
    pub amplitude: (f64, f64),
    /// Inclusive range for the number of inner ellipses.
    pub ellipses: (usize, usize),
}

impl PhantomRegime {
    pub fn gaussian_regular() -> Self {
        Self {
            kind: PhantomKind::GaussianRegular,
            sigma: (0.24, 0.32),
            amplitude: (0.75, 1.0),
            ellipses: (0, 0),
        }
    }

    pub fn gaussian_modified() -> Self {
        Self {
            kind: PhantomKind::GaussianModified,
            sigma: (0.12, 0.20),
            amplitude: (0.6, 0.8),
            ellipses: (0, 0),
        }
    }

    pub fn ellipse(modified: bool) -> Self {
        Self {
            kind: if modified {
                PhantomKind::EllipseModified
            } else {
                PhantomKind::Ellipse
            },
            sigma: (0.0, 0.0),
            amplitude: (0.0, 1.0),
            ellipses: (3, 6),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = |(a, b): (f64, f64)| a <= b;
        if !ordered(self.sigma) || !ordered(self.amplitude) || self.ellipses.0 > self.ellipses.1 {
            return Err(Error::Config("phantom interval bounds must be ordered".into()));
        }
        if self.amplitude.1 > 1.0 || self.amplitude.0 < 0.0 {
            return Err(Error::Config("phantom amplitudes must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Parameters of one anisotropic Gaussian `A·exp(−r₁²/2σ₁² − r₂²/2σ₂²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub sigma1: f64,
    pub sigma2: f64,
    pub amplitude: f64,
}

pub fn draw_gaussian_params(rng: &mut Rng, regime: &PhantomRegime) -> GaussianParams {
    let (s0, s1) = regime.sigma;
    let (a0, a1) = regime.amplitude;
    GaussianParams {
        sigma1: rng.uniform(s0, s1),
        sigma2: rng.uniform(s0, s1),
        amplitude: rng.uniform(a0, a1),
    }
}

pub fn render_gaussian<T: Scalar>(p: &GaussianParams, n: usize) -> Image<T> {
    Image::from_fn(n, n, Extent::unit_square(), |x, y| {
        p.amplitude * (-(x * x / (2.0 * p.sigma1 * p.sigma1) + y * y / (2.0 * p.sigma2 * p.sigma2))).exp()
    })
}

/// Centred Gaussian on `[-1, 1]²` with parameters drawn from the regime.
pub fn gen_gaussian_phantom<T: Scalar>(rng: &mut Rng, regime: &PhantomRegime, n: usize) -> Result<Image<T>> {
    match regime.kind {
        PhantomKind::GaussianRegular | PhantomKind::GaussianModified => {}
        _ => return Err(Error::Config("gaussian phantom needs a gaussian regime".into())),
    }
    regime.validate()?;
    Ok(render_gaussian(&draw_gaussian_params(rng, regime), n))
}

/// Saturation levels `0.6` inside the disk of radius `1/2`, `0` outside.
pub fn disk_saturation_levels<T: Scalar>(n: usize) -> Image<T> {
    Image::from_fn(n, n, Extent::unit_square(), |x, y| {
        if (x * x + y * y).sqrt() <= 0.5 {
            0.6
        } else {
            0.0
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    phi: f64,
    value: f64,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.phi.sin_cos();
        let (dx, dy) = (x - self.cx, y - self.cy);
        let u = (c * dx + s * dy) / self.a;
        let v = (-s * dx + c * dy) / self.b;
        u * u + v * v <= 1.0
    }
}

/// Regular and modified ellipse phantoms share one seed: the modified one adds a smooth bump
/// `g ≥ 0` of height at most `0.1` on the body support, so `modified − regular = g`.
pub fn gen_ellipse_pair<T: Scalar>(rng: &mut Rng, n: usize, k: (usize, usize)) -> Result<(Image<T>, Image<T>)> {
    if k.0 > k.1 {
        return Err(Error::Config("ellipse count range must be ordered".into()));
    }
    let count = if k.1 == k.0 { k.0 } else { k.0 + rng.below(k.1 - k.0 + 1) };
    let mut shapes = Vec::new();
    if count > 0 {
        let body = Ellipse {
            cx: rng.uniform(-0.05, 0.05),
            cy: rng.uniform(-0.05, 0.05),
            a: rng.uniform(0.6, 0.8),
            b: rng.uniform(0.45, 0.65),
            phi: rng.uniform(-0.3, 0.3),
            value: rng.uniform(0.3, 0.5),
        };
        shapes.push(body);
        for _ in 1..count {
            // inclusions stay inside the body's inner region
            let r = rng.uniform(0.0, 0.35);
            let t = rng.uniform(0.0, std::f64::consts::TAU);
            shapes.push(Ellipse {
                cx: body.cx + r * t.cos(),
                cy: body.cy + 0.8 * r * t.sin(),
                a: rng.uniform(0.06, 0.22),
                b: rng.uniform(0.06, 0.22),
                phi: rng.uniform(0.0, std::f64::consts::PI),
                value: rng.uniform(-0.25, 0.35),
            });
        }
    }
    let amp = rng.uniform(0.05, 0.1);
    let (gx, gy) = (rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
    let spread = rng.uniform(0.5, 0.9);

    let regular: Image<T> = Image::from_fn(n, n, Extent::unit_square(), |x, y| {
        let v: f64 = shapes.iter().filter(|e| e.contains(x, y)).map(|e| e.value).sum();
        v.clamp(0.0, 0.9)
    });
    let mut modified = regular.clone();
    if let Some(body) = shapes.first() {
        for r in 0..n {
            for c in 0..n {
                let (x, y) = regular.pixel_center(r, c);
                if body.contains(x, y) {
                    let d = ((x - gx).powi(2) + (y - gy).powi(2)).sqrt() / spread;
                    let g = amp * (1.0 - d).max(0.0);
                    modified.set(r, c, regular.get(r, c) + T::of(g));
                }
            }
        }
    }
    Ok((regular, modified))
}

pub fn gen_ellipse_phantom<T: Scalar>(rng: &mut Rng, n: usize, k: (usize, usize), modified: bool) -> Result<Image<T>> {
    let (reg, modi) = gen_ellipse_pair(rng, n, k)?;
    Ok(if modified { modi } else { reg })
}

/// Pointwise clip of an image into `[lo, hi]`.
pub fn clip<T: Scalar>(img: &Image<T>, lo: f64, hi: f64) -> Image<T> {
    img.map(|v| v.max(T::of(lo)).min(T::of(hi)))
}
