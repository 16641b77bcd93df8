//! `key = value` experiment configuration with dotted section prefixes.
//!
//! ```text
//! experiment = radon-sat
//! seed = 7
//! grid.n = 32
//! radon.n_angles = 8
//! train.epochs = 30
//! noise.ladder = 0.1, 0.01, 0.001
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown keys are rejected. Keys that are not
//! given take the defaults of the chosen experiment.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dcnet::consistency::{ParameterChoice, PocsOptions, RadiusRule};
use dcnet::experiments::{default_ladder, RateSettings, DEFAULT_INTENSITY};
use dcnet::learn::{Architecture, PoolAxes, TrainConfig, TrainingScheme};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    GaussSat,
    RadonSat,
    Rates,
    Convergence,
}

impl ExperimentId {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::GaussSat => "gauss-sat",
            ExperimentId::RadonSat => "radon-sat",
            ExperimentId::Rates => "rates",
            ExperimentId::Convergence => "convergence",
        }
    }
}

impl FromStr for ExperimentId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "gauss-sat" => Ok(ExperimentId::GaussSat),
            "radon-sat" => Ok(ExperimentId::RadonSat),
            "rates" => Ok(ExperimentId::Rates),
            "convergence" => Ok(ExperimentId::Convergence),
            other => Err(CliError::config(format!(
                "unknown experiment `{other}` (expected gauss-sat, radon-sat, rates or convergence)"
            ))),
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadonSection {
    pub n_angles: usize,
    pub level: f64,
    pub intensity: f64,
    pub ellipses_min: usize,
    pub ellipses_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSection {
    pub train: usize,
    pub val: usize,
    pub test: usize,
    /// Radius of the perturbation stored alongside the exact data.
    pub noise: f64,
}

/// Training settings of the sinogram network `U₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SinogramSection {
    pub kernel: (usize, usize),
    pub levels: usize,
    pub base_channels: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_start: f64,
    pub lr_final: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatesSection {
    pub samples: usize,
    pub source_norm: f64,
    pub identity_dim: usize,
    /// Image network for the regularizing-network rows (and `U₁` for convergence).
    pub checkpoint: Option<PathBuf>,
    /// Sinogram network `U₂`, needed by the convergence study.
    pub sinogram_checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub seed: u64,
    pub out: PathBuf,
    pub n: usize,
    pub radon: RadonSection,
    pub data: DataSection,
    pub net: Architecture,
    pub train: TrainConfig,
    pub sinogram: SinogramSection,
    pub pocs: PocsOptions,
    pub ladder: Vec<f64>,
    pub draws: usize,
    pub choice: ParameterChoice,
    pub radius: RadiusRule,
    pub rates: RatesSection,
    /// Test-sample indices whose reconstructions are written as images.
    pub images: Vec<usize>,
}

impl ExperimentConfig {
    /// Desk-scale defaults for `id`.
    pub fn defaults(id: ExperimentId) -> Self {
        let (n, train, val, test) = match id {
            ExperimentId::GaussSat => (64, 256, 64, 128),
            _ => (48, 512, 64, 128),
        };
        let net = Architecture {
            levels: 1,
            ..Default::default()
        };
        let train_cfg = match id {
            ExperimentId::GaussSat => TrainConfig {
                batch_size: 64,
                epochs: 100,
                lr_start: 1e-3,
                lr_final: 1e-4,
                ..Default::default()
            },
            _ => TrainConfig {
                batch_size: 32,
                epochs: 25,
                lr_start: 1e-3,
                lr_final: 2e-4,
                ..Default::default()
            },
        };
        let choice = match id {
            ExperimentId::Rates => ParameterChoice { c: 10.0, p: 1.0 },
            _ => ParameterChoice::default(),
        };
        let source_norm = match id {
            ExperimentId::Rates => 0.1,
            _ => 1.0,
        };
        Self {
            experiment: id,
            seed: 0,
            out: PathBuf::from(format!("runs/{id}")),
            n,
            radon: RadonSection {
                n_angles: 8,
                level: 8.0,
                intensity: DEFAULT_INTENSITY,
                ellipses_min: 3,
                ellipses_max: 6,
            },
            data: DataSection {
                train,
                val,
                test,
                noise: 0.0,
            },
            net,
            train: train_cfg.clone(),
            sinogram: SinogramSection {
                kernel: (1, 3),
                levels: net.levels,
                base_channels: net.base_channels,
                epochs: train_cfg.epochs,
                batch_size: train_cfg.batch_size,
                lr_start: 3e-4,
                lr_final: 3e-5,
            },
            pocs: PocsOptions {
                tol: 1e-8,
                max_sweeps: 5000,
            },
            ladder: default_ladder(),
            draws: 20,
            choice,
            radius: RadiusRule::default(),
            rates: RatesSection {
                samples: 4,
                source_norm,
                identity_dim: 64,
                checkpoint: None,
                sinogram_checkpoint: None,
            },
            images: vec![0, 1],
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        text.parse()
    }

    /// The sinogram network's architecture.
    pub fn sinogram_architecture(&self) -> Architecture {
        Architecture {
            kernel: self.sinogram.kernel,
            levels: self.sinogram.levels,
            base_channels: self.sinogram.base_channels,
            pool_axes: PoolAxes::Columns,
            ..self.net
        }
    }

    pub fn sinogram_train(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.sinogram.epochs,
            batch_size: self.sinogram.batch_size,
            lr_start: self.sinogram.lr_start,
            lr_final: self.sinogram.lr_final,
            scheme: TrainingScheme::FixedPhi0,
            alpha_ladder: Vec::new(),
            ..self.train.clone()
        }
    }

    pub fn rate_settings(&self) -> RateSettings {
        RateSettings {
            ladder: self.ladder.clone(),
            draws: self.draws,
            choice: self.choice,
            radius: self.radius,
            samples: self.rates.samples,
            source_norm: self.rates.source_norm,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::config(m.to_string()));
        if self.n < 11 {
            return bad("grid.n must be at least 11 (SSIM window)");
        }
        if self.data.train == 0 || self.data.val == 0 || self.data.test == 0 {
            return bad("data.train, data.val and data.test must be at least 1");
        }
        if !(self.data.noise >= 0.0) {
            return bad("data.noise must be nonnegative");
        }
        if self.radon.n_angles == 0 || !(self.radon.level > 0.0) || !(self.radon.intensity > 0.0) {
            return bad("radon.n_angles, radon.level and radon.intensity must be positive");
        }
        if self.radon.ellipses_min > self.radon.ellipses_max {
            return bad("radon.ellipses_min exceeds radon.ellipses_max");
        }
        self.net.validate().map_err(CliError::from)?;
        self.sinogram_architecture().validate().map_err(CliError::from)?;
        self.train.validate().map_err(CliError::from)?;
        self.sinogram_train().validate().map_err(CliError::from)?;
        if self.train.scheme == TrainingScheme::AlphaLadder
            && (self.train.alpha_ladder.is_empty() || self.train.alpha_ladder.iter().any(|a| !(*a > 0.0)))
        {
            return bad("train.alpha_ladder needs positive values for the alpha-ladder scheme");
        }
        if self.pocs.max_sweeps == 0 || !(self.pocs.tol > 0.0) {
            return bad("pocs.max_sweeps and pocs.tol must be positive");
        }
        if self.ladder.len() < 3 {
            return bad("noise.ladder needs at least 3 values");
        }
        if self.ladder.iter().any(|d| !(*d > 0.0)) || self.ladder.windows(2).any(|w| w[1] >= w[0]) {
            return bad("noise.ladder must be positive and strictly decreasing");
        }
        if self.draws == 0 || self.rates.samples == 0 || self.rates.identity_dim == 0 {
            return bad("noise.draws, rates.samples and rates.identity_dim must be at least 1");
        }
        ParameterChoice::new(self.choice.c, self.choice.p).map_err(CliError::from)?;
        if !(self.radius.scale >= 0.0 && self.radius.exponent > 0.0) {
            return bad("radius.scale must be nonnegative and radius.exponent positive");
        }
        if !(self.rates.source_norm > 0.0) {
            return bad("rates.source_norm must be positive");
        }
        Ok(())
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "experiment" => {
                let id: ExperimentId = v.parse()?;
                if id != self.experiment {
                    return Err(CliError::config("`experiment` may only be given once".into()));
                }
            }
            "seed" => self.seed = parse(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "grid.n" => self.n = parse(key, v)?,
            "radon.n_angles" => self.radon.n_angles = parse(key, v)?,
            "radon.level" => self.radon.level = parse(key, v)?,
            "radon.intensity" => self.radon.intensity = parse(key, v)?,
            "radon.ellipses_min" => self.radon.ellipses_min = parse(key, v)?,
            "radon.ellipses_max" => self.radon.ellipses_max = parse(key, v)?,
            "data.train" => self.data.train = parse(key, v)?,
            "data.val" => self.data.val = parse(key, v)?,
            "data.test" => self.data.test = parse(key, v)?,
            "data.noise" => self.data.noise = parse(key, v)?,
            "net.levels" => self.net.levels = parse(key, v)?,
            "net.base_channels" => self.net.base_channels = parse(key, v)?,
            "net.convs_per_level" => self.net.convs_per_level = parse(key, v)?,
            "net.kernel" => self.net.kernel = parse_kernel(key, v)?,
            "net.residual" => self.net.residual = parse(key, v)?,
            "train.batch_size" => self.train.batch_size = parse(key, v)?,
            "train.epochs" => self.train.epochs = parse(key, v)?,
            "train.weight_decay" => self.train.weight_decay = parse(key, v)?,
            "train.lr_start" => self.train.lr_start = parse(key, v)?,
            "train.lr_final" => self.train.lr_final = parse(key, v)?,
            "train.scheme" => {
                self.train.scheme = match v {
                    "fixed-phi0" => TrainingScheme::FixedPhi0,
                    "alpha-ladder" => TrainingScheme::AlphaLadder,
                    other => return Err(CliError::config(format!("train.scheme: unknown scheme `{other}`"))),
                }
            }
            "train.alpha_ladder" => self.train.alpha_ladder = parse_list(key, v)?,
            "sinogram.kernel" => self.sinogram.kernel = parse_kernel(key, v)?,
            "sinogram.levels" => self.sinogram.levels = parse(key, v)?,
            "sinogram.base_channels" => self.sinogram.base_channels = parse(key, v)?,
            "sinogram.epochs" => self.sinogram.epochs = parse(key, v)?,
            "sinogram.batch_size" => self.sinogram.batch_size = parse(key, v)?,
            "sinogram.lr_start" => self.sinogram.lr_start = parse(key, v)?,
            "sinogram.lr_final" => self.sinogram.lr_final = parse(key, v)?,
            "pocs.max_sweeps" => self.pocs.max_sweeps = parse(key, v)?,
            "pocs.tol" => self.pocs.tol = parse(key, v)?,
            "noise.ladder" => self.ladder = parse_list(key, v)?,
            "noise.draws" => self.draws = parse(key, v)?,
            "param.c" => self.choice.c = parse(key, v)?,
            "param.p" => self.choice.p = parse(key, v)?,
            "radius.scale" => self.radius.scale = parse(key, v)?,
            "radius.exponent" => self.radius.exponent = parse(key, v)?,
            "rates.samples" => self.rates.samples = parse(key, v)?,
            "rates.source_norm" => self.rates.source_norm = parse(key, v)?,
            "rates.identity_dim" => self.rates.identity_dim = parse(key, v)?,
            "rates.checkpoint" => self.rates.checkpoint = Some(PathBuf::from(v)),
            "rates.sinogram_checkpoint" => self.rates.sinogram_checkpoint = Some(PathBuf::from(v)),
            "eval.images" => self.images = parse_list(key, v)?,
            other => return Err(CliError::config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Every key, in a fixed order; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("experiment", self.experiment.to_string());
        kv("seed", self.seed.to_string());
        kv("out", self.out.display().to_string());
        kv("grid.n", self.n.to_string());
        kv("radon.n_angles", self.radon.n_angles.to_string());
        kv("radon.level", self.radon.level.to_string());
        kv("radon.intensity", self.radon.intensity.to_string());
        kv("radon.ellipses_min", self.radon.ellipses_min.to_string());
        kv("radon.ellipses_max", self.radon.ellipses_max.to_string());
        kv("data.train", self.data.train.to_string());
        kv("data.val", self.data.val.to_string());
        kv("data.test", self.data.test.to_string());
        kv("data.noise", self.data.noise.to_string());
        kv("net.levels", self.net.levels.to_string());
        kv("net.base_channels", self.net.base_channels.to_string());
        kv("net.convs_per_level", self.net.convs_per_level.to_string());
        kv("net.kernel", kernel_str(self.net.kernel));
        kv("net.residual", self.net.residual.to_string());
        kv("train.batch_size", self.train.batch_size.to_string());
        kv("train.epochs", self.train.epochs.to_string());
        kv("train.weight_decay", self.train.weight_decay.to_string());
        kv("train.lr_start", self.train.lr_start.to_string());
        kv("train.lr_final", self.train.lr_final.to_string());
        kv(
            "train.scheme",
            match self.train.scheme {
                TrainingScheme::FixedPhi0 => "fixed-phi0",
                TrainingScheme::AlphaLadder => "alpha-ladder",
            }
            .into(),
        );
        kv("train.alpha_ladder", list_str(&self.train.alpha_ladder));
        kv("sinogram.kernel", kernel_str(self.sinogram.kernel));
        kv("sinogram.levels", self.sinogram.levels.to_string());
        kv("sinogram.base_channels", self.sinogram.base_channels.to_string());
        kv("sinogram.epochs", self.sinogram.epochs.to_string());
        kv("sinogram.batch_size", self.sinogram.batch_size.to_string());
        kv("sinogram.lr_start", self.sinogram.lr_start.to_string());
        kv("sinogram.lr_final", self.sinogram.lr_final.to_string());
        kv("pocs.max_sweeps", self.pocs.max_sweeps.to_string());
        kv("pocs.tol", self.pocs.tol.to_string());
        kv("noise.ladder", list_str(&self.ladder));
        kv("noise.draws", self.draws.to_string());
        kv("param.c", self.choice.c.to_string());
        kv("param.p", self.choice.p.to_string());
        kv("radius.scale", self.radius.scale.to_string());
        kv("radius.exponent", self.radius.exponent.to_string());
        kv("rates.samples", self.rates.samples.to_string());
        kv("rates.source_norm", self.rates.source_norm.to_string());
        kv("rates.identity_dim", self.rates.identity_dim.to_string());
        if let Some(p) = &self.rates.checkpoint {
            kv("rates.checkpoint", p.display().to_string());
        }
        if let Some(p) = &self.rates.sinogram_checkpoint {
            kv("rates.sinogram_checkpoint", p.display().to_string());
        }
        kv("eval.images", list_str(&self.images));
        s
    }
}

impl FromStr for ExperimentConfig {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected `key = value`", i + 1)))?;
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let id = pairs
            .iter()
            .find(|(_, k, _)| k == "experiment")
            .ok_or_else(|| CliError::config("missing `experiment` key".into()))?
            .2
            .parse()?;
        let mut cfg = ExperimentConfig::defaults(id);
        let mut seen = std::collections::HashSet::new();
        for (line, k, v) in &pairs {
            if !seen.insert(k.clone()) {
                return Err(CliError::config(format!("line {line}: duplicate key `{k}`")));
            }
            cfg.set(k, v)
                .map_err(|e| CliError::config(format!("line {line}: {}", e.message())))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse<V: FromStr>(key: &str, v: &str) -> Result<V, CliError> {
    v.parse()
        .map_err(|_| CliError::config(format!("{key}: cannot parse `{v}`")))
}

fn parse_list<V: FromStr>(key: &str, v: &str) -> Result<Vec<V>, CliError> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|p| parse(key, p.trim())).collect()
}

fn parse_kernel(key: &str, v: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = v
        .split_once('x')
        .ok_or_else(|| CliError::config(format!("{key}: expected `HxW`, got `{v}`")))?;
    Ok((parse(key, a.trim())?, parse(key, b.trim())?))
}

fn kernel_str(k: (usize, usize)) -> String {
    format!("{}x{}", k.0, k.1)
}

fn list_str<V: ToString>(v: &[V]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        for id in [
            ExperimentId::GaussSat,
            ExperimentId::RadonSat,
            ExperimentId::Rates,
            ExperimentId::Convergence,
        ] {
            let c = ExperimentConfig::defaults(id);
            c.validate().unwrap();
            let back: ExperimentConfig = c.serialize().parse().unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn partial_config_uses_defaults() {
        let c: ExperimentConfig = "experiment = radon-sat\n# comment\ngrid.n = 32 # inline\n".parse().unwrap();
        assert_eq!(c.n, 32);
        assert_eq!(c.radon.n_angles, 8);
        assert_eq!(c.train.batch_size, 32);
    }

    #[test]
    fn rejects_bad_input() {
        assert!("grid.n = 32".parse::<ExperimentConfig>().is_err());
        assert!("experiment = gauss-sat\nfoo.bar = 1".parse::<ExperimentConfig>().is_err());
        assert!("experiment = gauss-sat\ndata.train = 0".parse::<ExperimentConfig>().is_err());
        assert!("experiment = gauss-sat\ngrid.n = 3 2".parse::<ExperimentConfig>().is_err());
        assert!("experiment = gauss-sat\nseed = 1\nseed = 2".parse::<ExperimentConfig>().is_err());
        assert!("experiment = gauss-sat\nnoise.ladder = 0.1, 0.2, 0.01".parse::<ExperimentConfig>().is_err());
    }
}
