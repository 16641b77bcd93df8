//! The four commands. Every command works inside one output directory:
//!
//! ```text
//! data/<split>_{truth,data,noisy,inputs}.bin   phantom
//! data/<split>_alpha<k>.bin                    phantom (alpha-ladder scheme)
//! test/, test_modified/                        phantom: PGMs, sinogram CSVs
//! checkpoints/*.ckpt, training_curves.csv      train
//! data/<split>_stage_one.bin                   train (radon-sat, after the sinogram network)
//! metrics.csv, metrics_samples.csv, recon/     evaluate
//! rates.csv, rates_summary.csv                 rates (rates experiment)
//! convergence.csv                              rates (convergence experiment)
//! manifest_<command>.json                      every command, on success
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::json;

use dcnet::consistency::{tikhonov_reconstruct, LipschitzMap, TikhonovOptions};
use dcnet::experiments::{
    add_noise, aggregate, aggregate_table, evaluate_set, identity_rate, network_rate, num, radon_sat_convergence,
    sample_table, source_elements, stability_rate, tikhonov_rate, wrapper_gap_rate, AggregateRow, EvalRow, GaussSat,
    GridStack, Method, NoiseModel, PhantomRegime, RadonSat, RateReport, Split, Table,
};
use dcnet::learn::{
    load_checkpoint, train, train_ladder, CheckpointMeta, Dataset, GridNet, IdentityHead, Network, NullspaceHead,
    OutputHead, TrainConfig, TrainReport, TrainingScheme,
};
use dcnet::{Extent, Image, Rng};

use crate::config::{ExperimentConfig, ExperimentId};
use crate::error::CliError;
use crate::output::{OutputDir, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Phantom,
    Train,
    Evaluate,
    Rates,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Phantom => "phantom",
            Command::Train => "train",
            Command::Evaluate => "evaluate",
            Command::Rates => "rates",
        }
    }
}

/// Runs `cmd` in `cfg.out`.
pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<RunManifest, CliError> {
    cfg.validate()?;
    let mut out = OutputDir::open(&cfg.out, cmd.name())?;
    let metrics = match cmd {
        Command::Phantom => phantom(cfg, &mut out)?,
        Command::Train => train_cmd(cfg, &mut out)?,
        Command::Evaluate => evaluate(cfg, &mut out)?,
        Command::Rates => rates(cfg, &mut out)?,
    };
    out.finish(cfg, metrics)
}

/// Loads the config at `path` and applies the command-line overrides.
pub fn load_config(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.out = o;
    }
    Ok(cfg)
}

// Random streams derived from the master seed.
const STREAM_SPLITS: [u64; 4] = [1, 2, 3, 4];
const STREAM_NOISE: u64 = 5;
const STREAM_NETS: u64 = 10;
const STREAM_RATES: u64 = 20;

const SPLITS: [&str; 4] = ["train", "val", "test", "test_modified"];
const PEAK: f64 = 1.0;

fn radon_problem(cfg: &ExperimentConfig) -> Result<RadonSat<f64>, CliError> {
    let mut p = RadonSat::new(cfg.n, cfg.radon.n_angles, cfg.radon.level)?;
    p.intensity = cfg.radon.intensity;
    p.pocs = cfg.pocs;
    Ok(p)
}

fn ellipses(cfg: &ExperimentConfig) -> (usize, usize) {
    (cfg.radon.ellipses_min, cfg.radon.ellipses_max)
}

fn counts(cfg: &ExperimentConfig) -> [usize; 4] {
    [cfg.data.train, cfg.data.val, cfg.data.test, cfg.data.test]
}

fn image(n: usize, v: &[f64]) -> Result<Image<f64>, CliError> {
    Ok(Image::new(n, n, Extent::unit_square(), v.to_vec())?)
}

fn stack(h: usize, w: usize, items: &[Vec<f64>]) -> Result<GridStack<f64>, CliError> {
    Ok(GridStack::new(h, w, items.to_vec())?)
}

fn load_items(out: &OutputDir, rel: &str) -> Result<Vec<Vec<f64>>, CliError> {
    Ok(GridStack::<f64>::load(&out.require(rel)?)?.items)
}

fn load_split(out: &OutputDir, split: &str) -> Result<Split<f64>, CliError> {
    Ok(Split {
        truth: load_items(out, &format!("data/{split}_truth.bin"))?,
        data: load_items(out, &format!("data/{split}_data.bin"))?,
    })
}

fn load_net(path: &Path) -> Result<Network<f64>, CliError> {
    if !path.exists() {
        return Err(CliError::config(format!("missing checkpoint {}", path.display())));
    }
    Ok(load_checkpoint(path)?.0)
}

fn alpha_rel(split: &str, k: usize) -> String {
    format!("data/{split}_alpha{k}.bin")
}

fn ladder_active(cfg: &ExperimentConfig) -> bool {
    cfg.train.scheme == TrainingScheme::AlphaLadder
}

// ---------------------------------------------------------------- phantom

fn phantom(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    let master = Rng::new(cfg.seed);
    match cfg.experiment {
        ExperimentId::GaussSat => {
            let g = GaussSat::<f64>::new(cfg.n)?;
            let mut splits = Vec::new();
            for (k, &count) in counts(cfg).iter().enumerate() {
                let regime = if k == 3 {
                    PhantomRegime::gaussian_modified()
                } else {
                    PhantomRegime::gaussian_regular()
                };
                splits.push(g.draw(&regime, count, &mut master.derive(STREAM_SPLITS[k]))?);
            }
            let shape = (cfg.n, cfg.n);
            write_splits(cfg, out, &master, &splits, shape, |_, y| Ok(y.to_vec()), |y, a| Ok(g.tikhonov(y, a)?))?;
            for (k, split) in splits.iter().enumerate().skip(2) {
                for (i, (x, y)) in split.truth.iter().zip(&split.data).enumerate() {
                    out.pgm(&format!("{}/truth_{i:04}.pgm", SPLITS[k]), &image(cfg.n, x)?, PEAK)?;
                    out.pgm(&format!("{}/data_{i:04}.pgm", SPLITS[k]), &image(cfg.n, y)?, PEAK)?;
                }
            }
            Ok(json!({ "samples": counts(cfg) }))
        }
        ExperimentId::RadonSat => {
            let p = radon_problem(cfg)?;
            let mut splits = Vec::new();
            for (k, &count) in counts(cfg).iter().enumerate() {
                let mut rng = master.derive(STREAM_SPLITS[k]);
                splits.push(if k == 3 {
                    p.draw_modified(count, ellipses(cfg), &mut rng)?
                } else {
                    p.draw_regular(count, ellipses(cfg), &mut rng)?
                });
            }
            let shape = p.data_shape();
            let radon = p.op.radon_arc();
            write_splits(
                cfg,
                out,
                &master,
                &splits,
                shape,
                |_, y| Ok(radon.pinv_slice(y)?),
                |y, a| {
                    let x0 = vec![0.0; cfg.n * cfg.n];
                    Ok(tikhonov_reconstruct(radon.as_ref(), y, a, &x0, TikhonovOptions::default())?)
                },
            )?;
            for (k, split) in splits.iter().enumerate().skip(2) {
                for (i, (x, y)) in split.truth.iter().zip(&split.data).enumerate() {
                    out.pgm(&format!("{}/truth_{i:04}.pgm", SPLITS[k]), &image(cfg.n, x)?, PEAK)?;
                    out.table(&format!("{}/sinogram_{i:04}.csv", SPLITS[k]), &sinogram_table(y, shape))?;
                }
            }
            let mut t = Table::new(&["row", "col", "value"]);
            for (r, c, v) in radon.matrix().triplets() {
                t.push(vec![r.to_string(), c.to_string(), num(v)]);
            }
            out.table("operator_triplets.csv", &t)?;
            let saturated: usize = splits[0]
                .data
                .iter()
                .map(|y| y.iter().filter(|&&v| v >= p.level()).count())
                .sum();
            Ok(json!({
                "samples": counts(cfg),
                "train_saturated_fraction": saturated as f64 / (splits[0].len() * shape.0 * shape.1) as f64,
            }))
        }
        ExperimentId::Rates => {
            let p = radon_problem(cfg)?;
            let sources = source_elements(
                p.radon(),
                cfg.rates.samples,
                cfg.rates.source_norm,
                &mut master.derive(STREAM_RATES),
            )?;
            out.stack("data/sources.bin", &stack(cfg.n, cfg.n, &sources)?)?;
            Ok(json!({ "sources": sources.len() }))
        }
        ExperimentId::Convergence => {
            let p = radon_problem(cfg)?;
            let split = p.draw_regular(1, ellipses(cfg), &mut master.derive(STREAM_RATES))?;
            out.stack("data/truth.bin", &stack(cfg.n, cfg.n, &split.truth)?)?;
            out.pgm("test/truth_0000.pgm", &image(cfg.n, &split.truth[0])?, PEAK)?;
            out.table("test/sinogram_0000.csv", &sinogram_table(&split.data[0], p.data_shape()))?;
            Ok(json!({ "samples": 1 }))
        }
    }
}

fn sinogram_table(y: &[f64], (angles, bins): (usize, usize)) -> Table {
    let header: Vec<String> = std::iter::once("angle".to_string())
        .chain((0..bins).map(|b| format!("bin_{b}")))
        .collect();
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(&refs);
    for a in 0..angles {
        let mut row = vec![a.to_string()];
        row.extend(y[a * bins..(a + 1) * bins].iter().map(|&v| num(v)));
        t.push(row);
    }
    t
}

/// Truth, data, noisy data and right-inverse inputs per split, plus the `G_α` inputs of the
/// training splits when the alpha-ladder scheme is selected.
fn write_splits(
    cfg: &ExperimentConfig,
    out: &mut OutputDir,
    master: &Rng,
    splits: &[Split<f64>],
    data_shape: (usize, usize),
    right_inverse: impl Fn(usize, &[f64]) -> Result<Vec<f64>, CliError>,
    regularized: impl Fn(&[f64], f64) -> Result<Vec<f64>, CliError>,
) -> Result<(), CliError> {
    let (h, w) = data_shape;
    for (k, split) in splits.iter().enumerate() {
        let name = SPLITS[k];
        let mut noise_rng = master.derive(STREAM_NOISE).derive(k as u64);
        let noisy: Vec<Vec<f64>> = split
            .data
            .iter()
            .map(|y| add_noise(y, NoiseModel { delta: cfg.data.noise }, &mut noise_rng))
            .collect::<dcnet::Result<_>>()?;
        let inputs: Vec<Vec<f64>> = split
            .data
            .iter()
            .enumerate()
            .map(|(i, y)| right_inverse(i, y))
            .collect::<Result<_, _>>()?;
        out.stack(&format!("data/{name}_truth.bin"), &stack(cfg.n, cfg.n, &split.truth)?)?;
        out.stack(&format!("data/{name}_data.bin"), &stack(h, w, &split.data)?)?;
        out.stack(&format!("data/{name}_noisy.bin"), &stack(h, w, &noisy)?)?;
        out.stack(&format!("data/{name}_inputs.bin"), &stack(cfg.n, cfg.n, &inputs)?)?;
        if ladder_active(cfg) && k < 2 {
            for (j, &alpha) in cfg.train.alpha_ladder.iter().enumerate() {
                let v: Vec<Vec<f64>> = split
                    .data
                    .iter()
                    .map(|y| regularized(y, alpha))
                    .collect::<Result<_, _>>()?;
                out.stack(&alpha_rel(name, j), &stack(cfg.n, cfg.n, &v)?)?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- train

struct Curves {
    table: Table,
    finals: serde_json::Map<String, serde_json::Value>,
}

impl Curves {
    fn new() -> Self {
        Self {
            table: Table::new(&["network", "epoch", "train_loss", "val_loss"]),
            finals: serde_json::Map::new(),
        }
    }

    fn add(&mut self, label: &str, r: &TrainReport) {
        self.table.push(vec![label.into(), "0".into(), num(r.initial_train_loss), String::new()]);
        for (e, l) in r.train_losses.iter().enumerate() {
            let v = r.val_losses.get(e).map(|&v| num(v)).unwrap_or_default();
            self.table.push(vec![label.into(), (e + 1).to_string(), num(*l), v]);
        }
        self.finals.insert(
            label.into(),
            json!({ "initial": r.initial_train_loss, "final": r.final_train_loss, "val": r.final_val_loss }),
        );
    }
}

fn meta(label: &str, cfg: &TrainConfig, seed: u64, r: &TrainReport, alpha: Option<f64>) -> CheckpointMeta {
    CheckpointMeta {
        label: label.into(),
        seed,
        epochs: cfg.epochs,
        final_train_loss: Some(r.final_train_loss),
        final_val_loss: r.final_val_loss,
        alpha,
    }
}

#[allow(clippy::too_many_arguments)]
fn fit(
    out: &mut OutputDir,
    curves: &mut Curves,
    label: &str,
    arch: dcnet::learn::Architecture,
    data: &Dataset<f64>,
    val: &Dataset<f64>,
    head: &dyn OutputHead<f64>,
    tc: &TrainConfig,
    stream: Rng,
    seed: u64,
) -> Result<Network<f64>, CliError> {
    let mut rng = stream;
    let mut net = Network::init(arch, &mut rng)?;
    let r = train(&mut net, data, Some(val), head, tc, &mut rng)?;
    if !(r.final_train_loss <= r.initial_train_loss) {
        return Err(CliError::Numerical(format!(
            "{label}: training loss grew from {} to {}",
            r.initial_train_loss, r.final_train_loss
        )));
    }
    out.checkpoint(&format!("checkpoints/{label}.ckpt"), &net, &meta(label, tc, seed, &r, None))?;
    curves.add(label, &r);
    Ok(net)
}

fn fit_ladder(
    cfg: &ExperimentConfig,
    out: &mut OutputDir,
    curves: &mut Curves,
    label: &str,
    head: &dyn OutputHead<f64>,
    truth: (&Split<f64>, &Split<f64>),
) -> Result<(), CliError> {
    let alphas = cfg.train.alpha_ladder.clone();
    let n = cfg.n;
    let mut load = |alpha: f64| -> dcnet::Result<(Dataset<f64>, Option<Dataset<f64>>)> {
        let k = alphas.iter().position(|&a| a == alpha).expect("rung from the ladder");
        let read = |split: &str| GridStack::<f64>::load(&out.path(&alpha_rel(split, k))).map(|s| s.items);
        let tr = truth.0.dataset(&read("train")?, n)?;
        let va = truth.1.dataset(&read("val")?, n)?;
        Ok((tr, Some(va)))
    };
    for (k, _) in cfg.train.alpha_ladder.iter().enumerate() {
        out.require(&alpha_rel("train", k))?;
        out.require(&alpha_rel("val", k))?;
    }
    let rungs = train_ladder(cfg.net, &mut load, head, &cfg.train, &mut Rng::new(cfg.seed).derive(STREAM_NETS + 9))?;
    for (k, rung) in rungs.iter().enumerate() {
        let name = format!("{label}_alpha{k}");
        out.checkpoint(
            &format!("checkpoints/{name}.ckpt"),
            &rung.net,
            &meta(&name, &cfg.train, cfg.seed, &rung.report, Some(rung.alpha)),
        )?;
        curves.add(&name, &rung.report);
    }
    Ok(())
}

fn train_cmd(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    let master = Rng::new(cfg.seed);
    let stream = |k: u64| master.derive(STREAM_NETS + k);
    let n = cfg.n;
    let mut curves = Curves::new();
    match cfg.experiment {
        ExperimentId::GaussSat => {
            let (tr, va) = (load_split(out, "train")?, load_split(out, "val")?);
            let data = tr.dataset(&load_items(out, "data/train_inputs.bin")?, n)?;
            let val = va.dataset(&load_items(out, "data/val_inputs.bin")?, n)?;
            fit(out, &mut curves, "network", cfg.net, &data, &val, &IdentityHead, &cfg.train, stream(0), cfg.seed)?;
            if ladder_active(cfg) {
                fit_ladder(cfg, out, &mut curves, "network", &IdentityHead, (&tr, &va))?;
            }
        }
        ExperimentId::RadonSat => {
            let p = radon_problem(cfg)?;
            let (tr, va) = (load_split(out, "train")?, load_split(out, "val")?);
            let sino = fit(
                out,
                &mut curves,
                "sinogram",
                cfg.sinogram_architecture(),
                &p.sinogram_dataset(&tr)?,
                &p.sinogram_dataset(&va)?,
                &IdentityHead,
                &cfg.sinogram_train(),
                stream(0),
                cfg.seed,
            )?;
            // stage-one inputs exist only once the sinogram network is on disk
            let stage_tr = p.dc_inputs(&sino, &tr.data)?;
            let stage_va = p.dc_inputs(&sino, &va.data)?;
            out.stack("data/train_stage_one.bin", &stack(n, n, &stage_tr)?)?;
            out.stack("data/val_stage_one.bin", &stack(n, n, &stage_va)?)?;

            let pin_tr = tr.dataset(&load_items(out, "data/train_inputs.bin")?, n)?;
            let pin_va = va.dataset(&load_items(out, "data/val_inputs.bin")?, n)?;
            fit(out, &mut curves, "one-network", cfg.net, &pin_tr, &pin_va, &IdentityHead, &cfg.train, stream(1), cfg.seed)?;

            let two_tr = tr.dataset(&p.two_net_inputs(&sino, &tr.data)?, n)?;
            let two_va = va.dataset(&p.two_net_inputs(&sino, &va.data)?, n)?;
            fit(out, &mut curves, "two-networks", cfg.net, &two_tr, &two_va, &IdentityHead, &cfg.train, stream(2), cfg.seed)?;

            let head = NullspaceHead(p.op.radon_arc());
            let dc_tr = tr.dataset(&stage_tr, n)?;
            let dc_va = va.dataset(&stage_va, n)?;
            fit(out, &mut curves, "data-consistent", cfg.net, &dc_tr, &dc_va, &head, &cfg.train, stream(3), cfg.seed)?;
            if ladder_active(cfg) {
                fit_ladder(cfg, out, &mut curves, "data-consistent", &head, (&tr, &va))?;
            }
        }
        ExperimentId::Rates | ExperimentId::Convergence => {
            return Err(CliError::config(format!(
                "the {} experiment has nothing to train; point rates.checkpoint at a radon-sat run",
                cfg.experiment
            )))
        }
    }
    out.table("training_curves.csv", &curves.table)?;
    Ok(serde_json::Value::Object(curves.finals))
}

// ---------------------------------------------------------------- evaluate

fn evaluate(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    let n = cfg.n;
    let sets = [("regular", "test"), ("modified", "test_modified")];
    let ckpt = |name: &str| out.path(&format!("checkpoints/{name}.ckpt"));
    let mut rows: Vec<EvalRow> = Vec::new();
    let mut images: Vec<(String, Vec<f64>)> = Vec::new();
    let mut score = |methods: &[Method<'_, f64>], forward: &dyn Fn(&[f64]) -> dcnet::Result<Vec<f64>>| -> Result<(), CliError> {
        for (set, split) in sets {
            let s = load_split(out, split)?;
            let (r, recons) = evaluate_set(set, &s.truth, &s.data, n, PEAK, forward, methods)?;
            rows.extend(r);
            for (m, per_sample) in methods.iter().zip(&recons) {
                for &i in cfg.images.iter().filter(|&&i| i < per_sample.len()) {
                    images.push((format!("recon/{set}_{}_{i:04}.pgm", m.name), per_sample[i].clone()));
                }
            }
        }
        Ok(())
    };
    match cfg.experiment {
        ExperimentId::GaussSat => {
            let g = GaussSat::<f64>::new(n)?;
            let net = load_net(&ckpt("network"))?;
            score(&g.methods(&net, &net), &|x| g.forward(x))?;
        }
        ExperimentId::RadonSat => {
            let p = radon_problem(cfg)?;
            let sino = load_net(&ckpt("sinogram"))?;
            let one = load_net(&ckpt("one-network"))?;
            let two = load_net(&ckpt("two-networks"))?;
            let u1 = load_net(&ckpt("data-consistent"))?;
            let u2 = p.sinogram_map(&sino)?;
            let dc = p.data_consistent(&u1, &sino)?;
            score(&p.methods(&one, &u2, &two, &dc), &|x| p.forward(x))?;
        }
        ExperimentId::Rates | ExperimentId::Convergence => {
            return Err(CliError::config(format!(
                "the {} experiment is evaluated by the rates command",
                cfg.experiment
            )))
        }
    }
    for (rel, v) in &images {
        out.pgm(rel, &image(n, v)?, PEAK)?;
    }
    let agg = aggregate(&rows);
    out.table("metrics_samples.csv", &sample_table(&rows))?;
    out.table("metrics.csv", &aggregate_table(&agg))?;
    Ok(summary(&agg))
}

fn summary(agg: &[AggregateRow]) -> serde_json::Value {
    serde_json::Value::Array(
        agg.iter()
            .map(|a| {
                json!({
                    "set": a.set, "method": a.method,
                    "psnr": a.psnr_mean, "ssim": a.ssim_mean, "fidelity": a.fidelity_mean,
                })
            })
            .collect(),
    )
}

// ---------------------------------------------------------------- rates

fn rates(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<serde_json::Value, CliError> {
    let master = Rng::new(cfg.seed);
    let s = cfg.rate_settings();
    match cfg.experiment {
        ExperimentId::Rates => {
            let p = radon_problem(cfg)?;
            let radon = p.op.radon_arc();
            let sources = source_elements(&radon, s.samples, s.source_norm, &mut master.derive(STREAM_RATES))?;
            let mut reports: Vec<(&str, RateReport)> = vec![
                ("identity", identity_rate::<f64>(cfg.rates.identity_dim, &s, &mut master.derive(STREAM_RATES + 1))?),
                ("tikhonov", tikhonov_rate(&radon, &sources, &s, &master.derive(STREAM_RATES + 2))?),
            ];
            if let Some(path) = &cfg.rates.checkpoint {
                let net: Arc<dyn LipschitzMap<f64>> = Arc::new(GridNet::new(load_net(path)?, cfg.n, cfg.n)?);
                reports.push((
                    "regularizing-network",
                    network_rate(&radon, net.clone(), &sources, &s, &master.derive(STREAM_RATES + 3))?,
                ));
                reports.push(("rateN2", stability_rate(&radon, &sources, &s, &master.derive(STREAM_RATES + 4))?));
                reports.push(("rateN3", wrapper_gap_rate(&radon, net, &sources, &s)?));
            } else {
                reports.push(("rateN2", stability_rate(&radon, &sources, &s, &master.derive(STREAM_RATES + 4))?));
            }
            let mut detail = Table::new(&["method", "delta", "alpha", "sup_error"]);
            let mut summary = Table::new(&["method", "slope", "intercept", "residual", "samples_per_delta"]);
            let mut metrics = serde_json::Map::new();
            for (name, r) in &reports {
                let identity = *name == "identity";
                for (d, e) in r.deltas.iter().zip(&r.sup_errors) {
                    let alpha = if identity { *d } else { s.choice.alpha(*d) };
                    detail.push(vec![name.to_string(), num(*d), num(alpha), num(*e)]);
                }
                summary.push(vec![
                    name.to_string(),
                    num(r.slope),
                    num(r.intercept),
                    num(r.residual),
                    r.samples_per_delta.to_string(),
                ]);
                metrics.insert(name.to_string(), json!({ "slope": r.slope, "residual": r.residual }));
            }
            out.table("rates.csv", &detail)?;
            out.table("rates_summary.csv", &summary)?;
            Ok(serde_json::Value::Object(metrics))
        }
        ExperimentId::Convergence => {
            let p = radon_problem(cfg)?;
            let need = |o: &Option<PathBuf>, key: &str| {
                o.clone()
                    .ok_or_else(|| CliError::config(format!("the convergence experiment needs {key}")))
            };
            let u1 = load_net(&need(&cfg.rates.checkpoint, "rates.checkpoint")?)?;
            let u2 = load_net(&need(&cfg.rates.sinogram_checkpoint, "rates.sinogram_checkpoint")?)?;
            let split = p.draw_regular(1, ellipses(cfg), &mut master.derive(STREAM_RATES))?;
            let dc = p.data_consistent(&u1, &u2)?;
            let rows = radon_sat_convergence(&p, dc, &split.truth[0], &s, &master.derive(STREAM_RATES + 5))?;
            let mut t = Table::new(&["delta", "alpha", "sup_error", "mean_error"]);
            for r in &rows {
                t.push(vec![
                    num(r.delta),
                    r.alpha.map(num).unwrap_or_default(),
                    num(r.sup_error),
                    num(r.mean_error),
                ]);
            }
            out.table("convergence.csv", &t)?;
            let first = rows.first().map(|r| r.sup_error).unwrap_or(0.0);
            let last = rows.last().map(|r| r.sup_error).unwrap_or(0.0);
            Ok(json!({ "largest_rung_error": first, "smallest_rung_error": last }))
        }
        ExperimentId::GaussSat | ExperimentId::RadonSat => Err(CliError::config(format!(
            "the rates command needs a rates or convergence experiment, not {}",
            cfg.experiment
        ))),
    }
}
