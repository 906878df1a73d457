use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{accuracy, cost_and_gradient, dataset_cost, init_params, Batch, MlpArchitecture, MlpParams};
use super::mnist::MnistDataset;
use crate::error::{Error, Result};

/// Halting criterion for SGD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingRule {
    /// Mean of `|c_t − c_{t−1}|` over the last `window` recorded costs.
    AvgCostDiff { threshold: f64, window: usize },
    /// Euclidean norm of the minibatch gradient.
    GradNorm { threshold: f64 },
}

impl StoppingRule {
    pub fn with_threshold(self, threshold: f64) -> Self {
        match self {
            StoppingRule::AvgCostDiff { window, .. } => StoppingRule::AvgCostDiff { threshold, window },
            StoppingRule::GradNorm { .. } => StoppingRule::GradNorm { threshold },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let threshold = match *self {
            StoppingRule::AvgCostDiff { threshold, window } => {
                if window < 2 {
                    return Err(Error::InvalidParameter(
                        "cost-difference window must be at least 2".into(),
                    ));
                }
                threshold
            }
            StoppingRule::GradNorm { threshold } => threshold,
        };
        if !(threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stopping threshold must be positive, got {threshold}"
            )));
        }
        Ok(())
    }
}

/// Which cost sequence feeds [`StoppingRule::AvgCostDiff`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CostSource {
    /// Cost of the minibatch just used, evaluated before the update.
    #[default]
    Minibatch,
    /// Cost over the whole training set after the update.
    FullTrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub stop: StoppingRule,
    /// Iteration cap.
    pub cap: usize,
    #[serde(default)]
    pub cost_source: CostSource,
    #[serde(default)]
    pub record_costs: bool,
}

impl SgdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch size must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter("learning rate must be positive".into()));
        }
        if self.cap == 0 {
            return Err(Error::InvalidParameter("iteration cap must be positive".into()));
        }
        self.stop.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainStatus {
    Converged,
    MaxIterations,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub halting_time: usize,
    pub final_train_cost: f64,
    pub train_accuracy: f64,
    pub status: TrainStatus,
    pub cost_history: Option<Vec<f64>>,
    pub params: MlpParams,
}

impl TrainResult {
    pub fn converged(&self) -> bool {
        self.status == TrainStatus::Converged
    }
}

/// Trailing window of costs with a running sum of absolute differences.
struct DiffWindow {
    costs: VecDeque<f64>,
    window: usize,
}

impl DiffWindow {
    fn new(window: usize) -> Self {
        Self {
            costs: VecDeque::with_capacity(window + 1),
            window,
        }
    }

    fn push(&mut self, c: f64) {
        self.costs.push_back(c);
        if self.costs.len() > self.window {
            self.costs.pop_front();
        }
    }

    /// `None` until the window has filled.
    fn mean_abs_diff(&self) -> Option<f64> {
        if self.costs.len() < self.window {
            return None;
        }
        let (a, b) = self.costs.as_slices();
        let all: Vec<f64> = a.iter().chain(b).copied().collect();
        let sum: f64 = all.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        Some(sum / (self.window - 1) as f64)
    }
}

/// Minibatch SGD from a fresh random initialization until `cfg.stop` holds.
///
/// Every epoch visits a new shuffle of the training set in consecutive
/// batches (a trailing partial batch is skipped). The halting time is the
/// 1-based index of the first iteration after which the rule is satisfied.
pub fn sgd_train_halting<R: Rng + ?Sized>(
    arch: &MlpArchitecture,
    dataset: &MnistDataset,
    cfg: &SgdConfig,
    rng: &mut R,
) -> Result<TrainResult> {
    arch.validate()?;
    cfg.validate()?;
    if dataset.dim() != arch.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: arch.input_dim(),
            actual: dataset.dim(),
        });
    }
    if dataset.len() < cfg.batch_size {
        return Err(Error::InvalidParameter(format!(
            "dataset of {} samples is smaller than the batch size {}",
            dataset.len(),
            cfg.batch_size
        )));
    }

    let mut params = init_params(arch, rng)?;
    let dim = dataset.dim();
    let bs = cfg.batch_size;
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(rng);
    let mut cursor = 0usize;
    let mut inputs = vec![0.0; bs * dim];
    let mut labels = vec![0u8; bs];

    let mut window = match cfg.stop {
        StoppingRule::AvgCostDiff { window, .. } => Some(DiffWindow::new(window)),
        StoppingRule::GradNorm { .. } => None,
    };
    let mut history = cfg.record_costs.then(Vec::new);
    let mut t = 0usize;

    let status = loop {
        if cursor + bs > order.len() {
            order.shuffle(rng);
            cursor = 0;
        }
        for (slot, &idx) in order[cursor..cursor + bs].iter().enumerate() {
            inputs[slot * dim..(slot + 1) * dim].copy_from_slice(dataset.image(idx));
            labels[slot] = dataset.labels()[idx];
        }
        cursor += bs;

        let (cost, grad) = cost_and_gradient(&params, &Batch::new(&inputs, &labels))?;
        t += 1;
        if !cost.is_finite() {
            break TrainStatus::NonFinite;
        }
        params.sgd_step(&grad, cfg.learning_rate);
        if !params.is_finite() {
            break TrainStatus::NonFinite;
        }

        let observed = match cfg.cost_source {
            CostSource::Minibatch => cost,
            CostSource::FullTrain => dataset_cost(&params, dataset)?,
        };
        if let Some(h) = history.as_mut() {
            h.push(observed);
        }
        let done = match cfg.stop {
            StoppingRule::AvgCostDiff { threshold, .. } => {
                let w = window.as_mut().unwrap();
                w.push(observed);
                w.mean_abs_diff().is_some_and(|d| d < threshold)
            }
            StoppingRule::GradNorm { threshold } => grad.norm() < threshold,
        };
        if done {
            break TrainStatus::Converged;
        }
        if t >= cfg.cap {
            break TrainStatus::MaxIterations;
        }
    };

    let (final_train_cost, train_accuracy) = if status == TrainStatus::NonFinite {
        (f64::NAN, 0.0)
    } else {
        (dataset_cost(&params, dataset)?, accuracy(&params, dataset)?)
    };
    Ok(TrainResult {
        halting_time: t,
        final_train_cost,
        train_accuracy,
        status,
        cost_history: history,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deep_net::mnist::InputSource;
    use crate::stream::trial_rng;
    use rand_distr::StandardNormal;

    fn blobs(n: usize, seed: u64) -> MnistDataset {
        let mut rng = trial_rng(seed, 0);
        let mut images = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let lab = (i % 2) as u8;
            let c = if lab == 0 { -2.0 } else { 2.0 };
            images.push(c + 0.5 * rng.sample::<f64, _>(StandardNormal));
            images.push(c + 0.5 * rng.sample::<f64, _>(StandardNormal));
            labels.push(lab);
        }
        MnistDataset::new(images, labels, 2, InputSource::GaussianNoise).unwrap()
    }

    #[test]
    fn infinite_threshold_halts_when_window_fills() {
        let d = blobs(40, 1);
        let arch = MlpArchitecture::new(vec![2, 4, 2]).unwrap();
        let cfg = SgdConfig {
            batch_size: 10,
            learning_rate: 0.1,
            stop: StoppingRule::AvgCostDiff {
                threshold: f64::INFINITY,
                window: 7,
            },
            cap: 100,
            cost_source: CostSource::Minibatch,
            record_costs: true,
        };
        let r = sgd_train_halting(&arch, &d, &cfg, &mut trial_rng(2, 0)).unwrap();
        assert_eq!(r.halting_time, 7);
        assert!(r.converged());
        assert_eq!(r.cost_history.unwrap().len(), 7);
    }

    #[test]
    fn separable_blobs_are_learned() {
        let d = blobs(200, 3);
        let arch = MlpArchitecture::new(vec![2, 8, 2]).unwrap();
        let cfg = SgdConfig {
            batch_size: 20,
            learning_rate: 0.1,
            stop: StoppingRule::GradNorm { threshold: 1e-3 },
            cap: 2000,
            cost_source: CostSource::Minibatch,
            record_costs: false,
        };
        let r = sgd_train_halting(&arch, &d, &cfg, &mut trial_rng(4, 0)).unwrap();
        assert!(r.halting_time <= 2000);
        assert_eq!(r.train_accuracy, 1.0);
    }

    #[test]
    fn cap_reported() {
        let d = blobs(40, 5);
        let arch = MlpArchitecture::new(vec![2, 3, 2]).unwrap();
        let cfg = SgdConfig {
            batch_size: 10,
            learning_rate: 0.01,
            stop: StoppingRule::GradNorm { threshold: 1e-12 },
            cap: 13,
            cost_source: CostSource::FullTrain,
            record_costs: false,
        };
        let r = sgd_train_halting(&arch, &d, &cfg, &mut trial_rng(6, 0)).unwrap();
        assert_eq!(r.status, TrainStatus::MaxIterations);
        assert_eq!(r.halting_time, 13);
    }

    #[test]
    fn blown_up_training_is_flagged() {
        let d = blobs(40, 7);
        let arch = MlpArchitecture::new(vec![2, 3, 2]).unwrap();
        let cfg = SgdConfig {
            batch_size: 10,
            learning_rate: 1e300,
            stop: StoppingRule::GradNorm { threshold: 1e-12 },
            cap: 50,
            cost_source: CostSource::Minibatch,
            record_costs: false,
        };
        let r = sgd_train_halting(&arch, &d, &cfg, &mut trial_rng(8, 0)).unwrap();
        assert_eq!(r.status, TrainStatus::NonFinite);
    }

    #[test]
    fn config_validation() {
        assert!(StoppingRule::AvgCostDiff {
            threshold: 1.0,
            window: 1
        }
        .validate()
        .is_err());
        assert!(StoppingRule::GradNorm { threshold: 0.0 }.validate().is_err());
        let d = blobs(5, 9);
        let arch = MlpArchitecture::new(vec![2, 2]).unwrap();
        let cfg = SgdConfig {
            batch_size: 10,
            learning_rate: 0.1,
            stop: StoppingRule::GradNorm { threshold: 1.0 },
            cap: 10,
            cost_source: CostSource::Minibatch,
            record_costs: false,
        };
        assert!(sgd_train_halting(&arch, &d, &cfg, &mut trial_rng(0, 0)).is_err());
    }

    #[test]
    fn deterministic_given_stream() {
        let d = blobs(60, 11);
        let arch = MlpArchitecture::new(vec![2, 5, 2]).unwrap();
        let cfg = SgdConfig {
            batch_size: 10,
            learning_rate: 0.05,
            stop: StoppingRule::AvgCostDiff {
                threshold: 1e-3,
                window: 5,
            },
            cap: 500,
            cost_source: CostSource::Minibatch,
            record_costs: true,
        };
        let a = sgd_train_halting(&arch, &d, &cfg, &mut trial_rng(12, 0)).unwrap();
        let b = sgd_train_halting(&arch, &d, &cfg, &mut trial_rng(12, 0)).unwrap();
        assert_eq!(a, b);
    }
}
