//! Mini-batch training of `min_θ mean_i ‖head(v_i, U_θ(v_i)) − x_i‖² + λ‖W‖²`.

use serde::{Deserialize, Serialize};

use super::adam::{Adam, LrSchedule};
use super::head::OutputHead;
use super::network::{Architecture, Network};
use crate::error::{check_len, Error, Result};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub input: Vec<T>,
    pub target: Vec<T>,
}

/// Input/target pairs on a common `h × w` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub h: usize,
    pub w: usize,
    pub samples: Vec<Sample<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(h: usize, w: usize, samples: Vec<Sample<T>>) -> Result<Self> {
        for s in &samples {
            check_len("sample input", h * w, s.input.len())?;
            check_len("sample target", h * w, s.target.len())?;
        }
        Ok(Self { h, w, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainingScheme {
    /// One network used for every `α`.
    FixedPhi0,
    /// One network per `α` rung, each trained on its own regularized inputs.
    AlphaLadder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    /// Coefficient of `‖W‖²` on kernel weights.
    pub weight_decay: f64,
    pub lr_start: f64,
    pub lr_final: f64,
    pub scheme: TrainingScheme,
    pub alpha_ladder: Vec<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 16,
            epochs: 20,
            weight_decay: 0.0,
            lr_start: 1e-3,
            lr_final: 1e-4,
            scheme: TrainingScheme::FixedPhi0,
            alpha_ladder: Vec::new(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config("batch size and epochs must be positive".into()));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::Config("weight decay must be nonnegative".into()));
        }
        if !(self.lr_start > 0.0 && self.lr_final > 0.0) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        Ok(())
    }

    pub fn schedule(&self) -> LrSchedule {
        LrSchedule {
            start: self.lr_start,
            end: self.lr_final,
            epochs: self.epochs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean data loss over the training set before the first update.
    pub initial_train_loss: f64,
    /// Mean data loss of the mini-batches seen during each epoch.
    pub train_losses: Vec<f64>,
    /// Mean data loss on the validation set after each epoch (empty without validation data).
    pub val_losses: Vec<f64>,
    pub final_train_loss: f64,
    pub final_val_loss: Option<f64>,
}

/// Data loss and its gradient, plus `λ‖W‖²` and `2λW`, for a batch.
/// Returns `(data_loss, gradient)` with the data loss averaged over the batch.
pub fn loss_and_gradient<T: Scalar, H: OutputHead<T> + ?Sized>(
    net: &Network<T>,
    batch: &[&Sample<T>],
    h: usize,
    w: usize,
    weight_decay: f64,
    head: &H,
) -> Result<(f64, Vec<T>)> {
    if batch.is_empty() {
        return Err(Error::Precondition("empty batch".into()));
    }
    let mut grad = vec![T::zero(); net.param_count()];
    let mut loss = T::zero();
    let inv_b = T::of_usize(batch.len()).recip();
    let two = T::of(2.0);
    for s in batch {
        let cache = net.forward_cached(&s.input, h, w)?;
        let u = cache.output();
        let out = head.apply(&s.input, u)?;
        let r: Vec<T> = out.iter().zip(&s.target).map(|(&a, &b)| a - b).collect();
        loss = loss + r.iter().map(|&v| v * v).sum::<T>();
        let g_out: Vec<T> = r.iter().map(|&v| two * inv_b * v).collect();
        let g_u = head.pullback(&s.input, u, &g_out)?;
        net.backward(&cache, &g_u, Some(&mut grad));
    }
    if weight_decay > 0.0 {
        let lam2 = T::of(2.0 * weight_decay);
        for (g, (&p, keep)) in grad.iter_mut().zip(net.params().iter().zip(net.kernel_mask())) {
            if keep {
                *g = *g + lam2 * p;
            }
        }
    }
    Ok(((loss * inv_b).f64(), grad))
}

fn mean_loss<T: Scalar, H: OutputHead<T> + ?Sized>(net: &Network<T>, data: &Dataset<T>, head: &H) -> Result<f64> {
    let mut total = 0.0;
    for s in &data.samples {
        let u = net.forward(&s.input, data.h, data.w)?;
        let out = head.apply(&s.input, &u)?;
        total += out
            .iter()
            .zip(&s.target)
            .map(|(&a, &b)| (a - b).f64().powi(2))
            .sum::<f64>();
    }
    Ok(total / data.len().max(1) as f64)
}

/// Shuffled mini-batch Adam on `net`, in place.
pub fn train<T: Scalar, H: OutputHead<T> + ?Sized>(
    net: &mut Network<T>,
    data: &Dataset<T>,
    validation: Option<&Dataset<T>>,
    head: &H,
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<TrainReport> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Precondition("training set is empty".into()));
    }
    net.architecture().check_grid(data.h, data.w)?;
    let initial_train_loss = mean_loss(net, data, head)?;
    if !initial_train_loss.is_finite() {
        return Err(Error::Training {
            epoch: 0,
            reason: "initial loss is not finite".into(),
        });
    }
    let schedule = cfg.schedule();
    let mut opt = Adam::new(net.param_count());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut train_losses = Vec::with_capacity(cfg.epochs);
    let mut val_losses = Vec::new();
    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let lr = schedule.at(epoch);
        let mut seen = 0usize;
        let mut acc = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Sample<T>> = chunk.iter().map(|&i| &data.samples[i]).collect();
            let (loss, grad) = loss_and_gradient(net, &batch, data.h, data.w, cfg.weight_decay, head)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Training {
                    epoch: epoch + 1,
                    reason: format!("loss became {loss}"),
                });
            }
            acc += loss * batch.len() as f64;
            seen += batch.len();
            opt.step(net.params_mut(), &grad, lr);
        }
        train_losses.push(acc / seen as f64);
        if let Some(v) = validation.filter(|v| !v.is_empty()) {
            let l = mean_loss(net, v, head)?;
            if !l.is_finite() {
                return Err(Error::Training {
                    epoch: epoch + 1,
                    reason: "validation loss is not finite".into(),
                });
            }
            val_losses.push(l);
        }
    }
    let final_train_loss = mean_loss(net, data, head)?;
    Ok(TrainReport {
        initial_train_loss,
        train_losses,
        final_val_loss: val_losses.last().copied(),
        val_losses,
        final_train_loss,
    })
}

#[derive(Debug, Clone)]
pub struct LadderRung<T> {
    pub alpha: f64,
    pub net: Network<T>,
    pub report: TrainReport,
}

/// Trains one network per `α` in `cfg.alpha_ladder`, each on the inputs `make(α)` produces.
pub fn train_ladder<T, H, F>(
    arch: Architecture,
    mut make: F,
    head: &H,
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Result<Vec<LadderRung<T>>>
where
    T: Scalar,
    H: OutputHead<T> + ?Sized,
    F: FnMut(f64) -> Result<(Dataset<T>, Option<Dataset<T>>)>,
{
    if cfg.alpha_ladder.is_empty() {
        return Err(Error::Config("alpha ladder is empty".into()));
    }
    let mut out = Vec::with_capacity(cfg.alpha_ladder.len());
    for (k, &alpha) in cfg.alpha_ladder.iter().enumerate() {
        let mut stream = rng.derive(k as u64);
        let (data, val) = make(alpha)?;
        let mut net = Network::init(arch, &mut stream)?;
        let report = train(&mut net, &data, val.as_ref(), head, cfg, &mut stream)?;
        out.push(LadderRung { alpha, net, report });
    }
    Ok(out)
}
