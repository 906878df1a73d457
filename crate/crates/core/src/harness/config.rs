use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::deep_net::{CostSource, MlpArchitecture, SgdConfig, StoppingRule};
use crate::ensembles::{CouplingKind, MatrixEnsemble, MatrixKind};
use crate::error::{Error, Result};
use crate::spin_glass::{GradientNorm, SpinGlassConfig};

/// Inner dimension `M` of `X` in `A = X X*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InnerDimension {
    Rule(InnerRule),
    Explicit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerRule {
    /// `M = N + 2⌊√N⌋`.
    Critical,
    /// `M = N`.
    Square,
}

impl InnerDimension {
    pub const CRITICAL: InnerDimension = InnerDimension::Rule(InnerRule::Critical);
    pub const SQUARE: InnerDimension = InnerDimension::Rule(InnerRule::Square);

    pub fn resolve(self, n: usize) -> usize {
        match self {
            InnerDimension::Rule(InnerRule::Critical) => MatrixEnsemble::critical_inner_dimension(n),
            InnerDimension::Rule(InnerRule::Square) => n,
            InnerDimension::Explicit(m) => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgExperiment {
    pub ensemble: MatrixKind,
    pub n: usize,
    pub m: InnerDimension,
    pub eps: f64,
    /// Defaults to `10·n`.
    #[serde(default)]
    pub max_iter: Option<usize>,
}

impl CgExperiment {
    pub fn matrix_ensemble(&self) -> Result<MatrixEnsemble> {
        MatrixEnsemble::new(self.ensemble, self.n, self.m.resolve(self.n))
    }

    pub fn cg_config(&self) -> crate::cg::CgConfig {
        let mut cfg = crate::cg::CgConfig::for_dimension(self.n, self.eps);
        if let Some(cap) = self.max_iter {
            cfg.max_iter = cap;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinGlassExperiment {
    pub ensemble: CouplingKind,
    pub n: usize,
    pub eta: f64,
    pub eps: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub gradient_norm: GradientNorm,
}

impl SpinGlassExperiment {
    pub fn descent_config(&self) -> SpinGlassConfig {
        SpinGlassConfig {
            eta: self.eta,
            eps: self.eps,
            max_iter: self.max_iter,
            gradient_norm: self.gradient_norm,
            record_energy: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputEnsemble {
    Mnist,
    /// MNIST labels with iid standard Gaussian inputs.
    Noise,
}

impl std::str::FromStr for InputEnsemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mnist" => Ok(InputEnsemble::Mnist),
            "noise" | "random" | "gaussian_noise" => Ok(InputEnsemble::Noise),
            other => Err(Error::InvalidParameter(format!("unknown input ensemble {other:?}"))),
        }
    }
}

impl std::fmt::Display for InputEnsemble {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InputEnsemble::Mnist => "MNIST",
            InputEnsemble::Noise => "Random",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepNetExperiment {
    pub ensemble: InputEnsemble,
    pub layer_sizes: Vec<usize>,
    /// Training samples drawn per trial.
    pub samples: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub stop: StoppingRule,
    pub cap: usize,
    #[serde(default)]
    pub cost_source: CostSource,
    pub images_path: PathBuf,
    pub labels_path: PathBuf,
    /// Held-out samples scored after training; 0 disables.
    #[serde(default = "default_heldout")]
    pub heldout_samples: usize,
}

fn default_heldout() -> usize {
    2000
}

impl DeepNetExperiment {
    pub fn architecture(&self) -> Result<MlpArchitecture> {
        MlpArchitecture::new(self.layer_sizes.clone())
    }

    pub fn sgd_config(&self) -> SgdConfig {
        SgdConfig {
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            stop: self.stop,
            cap: self.cap,
            cost_source: self.cost_source,
            record_costs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgorithmConfig {
    Cg(CgExperiment),
    SpinGlass(SpinGlassExperiment),
    DeepNet(DeepNetExperiment),
}

impl AlgorithmConfig {
    pub fn model_name(&self) -> String {
        match self {
            AlgorithmConfig::Cg(c) => {
                let m = c.m.resolve(c.n);
                if m == c.n {
                    "CG: M = N".into()
                } else if m == MatrixEnsemble::critical_inner_dimension(c.n) {
                    "CG: M = N + 2 floor(sqrt N)".into()
                } else {
                    format!("CG: M = {m}")
                }
            }
            AlgorithmConfig::SpinGlass(_) => "Spin Glass".into(),
            AlgorithmConfig::DeepNet(d) => match d.stop {
                StoppingRule::AvgCostDiff { .. } => "Fully connected".into(),
                StoppingRule::GradNorm { .. } => "Cond. on gradient".into(),
            },
        }
    }

    /// Model and ensemble names when the configuration is at the scale of
    /// the reference table, `None` otherwise.
    pub fn reference_key(&self) -> Option<(String, String)> {
        let at_scale = match self {
            AlgorithmConfig::Cg(c) => c.n == 500,
            AlgorithmConfig::SpinGlass(s) => s.n == 100,
            AlgorithmConfig::DeepNet(d) => d.layer_sizes == MlpArchitecture::full_scale().layer_sizes,
        };
        at_scale.then(|| (self.model_name(), self.ensemble_name()))
    }

    pub fn ensemble_name(&self) -> String {
        match self {
            AlgorithmConfig::Cg(c) => c.ensemble.to_string(),
            AlgorithmConfig::SpinGlass(s) => s.ensemble.to_string(),
            AlgorithmConfig::DeepNet(d) => d.ensemble.to_string(),
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub algorithm: AlgorithmConfig,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; `None` uses every available core.
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Measure per-trial wall time. Off by default so that outputs are
    /// byte-for-byte reproducible; `wall_time_ms` is then 0.
    #[serde(default)]
    pub record_timing: bool,
    /// Largest tolerated fraction of non-converged trials.
    #[serde(default = "default_flagged")]
    pub max_flagged_fraction: f64,
}

fn default_flagged() -> f64 {
    0.05
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.experiment_id.is_empty() || self.experiment_id.contains([',', '\n', '\r', '"']) {
            return bad(format!(
                "experiment_id {:?} must be nonempty and CSV-safe",
                self.experiment_id
            ));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.max_flagged_fraction) {
            return bad("max_flagged_fraction must lie in [0, 1]".into());
        }
        let wrap = |e: Error| Error::Config(e.to_string());
        match &self.algorithm {
            AlgorithmConfig::Cg(c) => {
                c.matrix_ensemble().map_err(wrap)?;
                c.cg_config().validate().map_err(wrap)?;
            }
            AlgorithmConfig::SpinGlass(s) => {
                if s.n < 2 || s.n > crate::ensembles::MAX_SPINS {
                    return bad(format!(
                        "spin count {} outside 2..={}",
                        s.n,
                        crate::ensembles::MAX_SPINS
                    ));
                }
                s.descent_config().validate().map_err(wrap)?;
            }
            AlgorithmConfig::DeepNet(d) => {
                let arch = d.architecture().map_err(wrap)?;
                if arch.classes() != 10 {
                    return bad("the output layer must have 10 classes".into());
                }
                d.sgd_config().validate().map_err(wrap)?;
                if d.samples < d.batch_size {
                    return bad(format!(
                        "samples {} smaller than batch size {}",
                        d.samples, d.batch_size
                    ));
                }
            }
        }
        Ok(())
    }
}

pub const PRESET_NAMES: &[&str] = &[
    "cg-ci",
    "cg-full",
    "cg-square-ci",
    "cg-square-full",
    "spinglass-ci",
    "spinglass-full",
    "deepnet-ci",
    "deepnet-gradnorm-ci",
    "deepnet-full",
];

/// Desk-scale stopping threshold for the mean absolute minibatch-cost
/// difference (see `examples/pilot_deep_net.rs`).
pub const DESK_COST_DIFF_THRESHOLD: f64 = 0.003;
pub const COST_DIFF_WINDOW: usize = 25;

const DEFAULT_MNIST_IMAGES: &str = "data/mnist/images-idx3-ubyte";
const DEFAULT_MNIST_LABELS: &str = "data/mnist/labels-idx1-ubyte";

fn cg_preset(id: &str, m: InnerDimension, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        experiment_id: id.into(),
        algorithm: AlgorithmConfig::Cg(CgExperiment {
            ensemble: MatrixKind::Loe,
            n: 500,
            m,
            eps: 1e-10,
            max_iter: Some(5000),
        }),
        trials,
        seed: 1,
        threads: None,
        out_dir: None,
        record_timing: false,
        max_flagged_fraction: default_flagged(),
    }
}

fn spin_preset(id: &str, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        experiment_id: id.into(),
        algorithm: AlgorithmConfig::SpinGlass(SpinGlassExperiment {
            ensemble: CouplingKind::Gaussian,
            n: 100,
            eta: SpinGlassConfig::DEFAULT_ETA,
            eps: SpinGlassConfig::DEFAULT_EPS,
            max_iter: SpinGlassConfig::DEFAULT_MAX_ITER,
            gradient_norm: GradientNorm::Tangential,
        }),
        trials,
        seed: 1,
        threads: None,
        out_dir: None,
        record_timing: false,
        max_flagged_fraction: default_flagged(),
    }
}

fn deep_preset(id: &str, full: bool, stop: StoppingRule, trials: usize) -> ExperimentConfig {
    let (layer_sizes, samples, learning_rate) = if full {
        (MlpArchitecture::full_scale().layer_sizes, 30_000, 0.05)
    } else {
        (MlpArchitecture::desk_scale().layer_sizes, 3000, 0.1)
    };
    ExperimentConfig {
        experiment_id: id.into(),
        algorithm: AlgorithmConfig::DeepNet(DeepNetExperiment {
            ensemble: InputEnsemble::Mnist,
            layer_sizes,
            samples,
            batch_size: 100,
            learning_rate,
            stop,
            cap: 20_000,
            cost_source: CostSource::Minibatch,
            images_path: DEFAULT_MNIST_IMAGES.into(),
            labels_path: DEFAULT_MNIST_LABELS.into(),
            heldout_samples: default_heldout(),
        }),
        trials,
        seed: 1,
        threads: None,
        out_dir: None,
        record_timing: false,
        max_flagged_fraction: default_flagged(),
    }
}

/// Named configuration; `*-ci` presets are sized for a workstation,
/// `*-full` ones for the complete reproduction.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let cost_diff = StoppingRule::AvgCostDiff {
        threshold: DESK_COST_DIFF_THRESHOLD,
        window: COST_DIFF_WINDOW,
    };
    Some(match name {
        "cg-ci" => cg_preset(name, InnerDimension::CRITICAL, 1000),
        "cg-full" => cg_preset(name, InnerDimension::CRITICAL, 10_000),
        "cg-square-ci" => cg_preset(name, InnerDimension::SQUARE, 1000),
        "cg-square-full" => cg_preset(name, InnerDimension::SQUARE, 10_000),
        "spinglass-ci" => spin_preset(name, 1000),
        "spinglass-full" => spin_preset(name, 10_000),
        "deepnet-ci" => deep_preset(name, false, cost_diff, 200),
        "deepnet-gradnorm-ci" => deep_preset(name, false, StoppingRule::GradNorm { threshold: 0.05 }, 200),
        "deepnet-full" => deep_preset(name, true, cost_diff, 1000),
        _ => return None,
    })
}
