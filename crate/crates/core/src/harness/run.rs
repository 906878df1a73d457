use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{AlgorithmConfig, DeepNetExperiment, ExperimentConfig, InputEnsemble};
use super::records::{records_csv, write_text, TrialRecord};
use super::report::{summarize, Summary};
use crate::cg::{cg_on_hermitian, CgStatus};
use crate::deep_net::{
    accuracy, load_mnist_idx, make_noise_inputs, sgd_train_halting, subsample_indices, MlpArchitecture, MnistDataset,
    SgdConfig, TrainStatus,
};
use crate::ensembles::{sample_coupling_tensor, sample_rhs, sample_sphere_point, sample_wishart, CouplingEnsemble};
use crate::error::{Error, Result};
use crate::spin_glass::{gradient_descent_halting, DescentStatus, SpinGlassConfig};
use crate::stats::{
    density_csv, gumbel_fit, histogram, histogram_csv, kde, moment_table_csv, values_csv, Bandwidth, HistogramSpec,
    MomentRow,
};
use crate::stream::{trial_rng, TrialRng};

/// Algorithm-specific diagnostics that do not fit in a [`TrialRecord`].
#[derive(Debug, Clone, PartialEq)]
pub enum TrialDetail {
    Cg {
        status: CgStatus,
        true_residual_norm: f64,
    },
    SpinGlass {
        status: DescentStatus,
        final_gradient_norm: f64,
    },
    DeepNet {
        status: TrainStatus,
        train_accuracy: f64,
        /// Accuracy on unseen inputs of the same ensemble.
        heldout_accuracy: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub detail: TrialDetail,
}

struct DeepNetPlan {
    arch: MlpArchitecture,
    sgd: SgdConfig,
    base: MnistDataset,
}

enum Plan<'a> {
    Cg(&'a super::config::CgExperiment),
    SpinGlass(CouplingEnsemble, SpinGlassConfig),
    DeepNet(&'a DeepNetExperiment, Arc<DeepNetPlan>),
}

fn prepare(config: &ExperimentConfig) -> Result<Plan<'_>> {
    Ok(match &config.algorithm {
        AlgorithmConfig::Cg(c) => Plan::Cg(c),
        AlgorithmConfig::SpinGlass(s) => Plan::SpinGlass(
            CouplingEnsemble {
                kind: s.ensemble,
                n: s.n,
            },
            s.descent_config(),
        ),
        AlgorithmConfig::DeepNet(d) => {
            let base = load_mnist_idx(&d.images_path, &d.labels_path)?;
            let arch = d.architecture()?;
            if base.dim() != arch.input_dim() {
                return Err(Error::Config(format!(
                    "images have {} pixels but the network expects {}",
                    base.dim(),
                    arch.input_dim()
                )));
            }
            if d.samples > base.len() {
                return Err(Error::Config(format!(
                    "{} training samples requested from a dataset of {}",
                    d.samples,
                    base.len()
                )));
            }
            Plan::DeepNet(
                d,
                Arc::new(DeepNetPlan {
                    arch,
                    sgd: d.sgd_config(),
                    base,
                }),
            )
        }
    })
}

fn run_trial(plan: &Plan<'_>, rng: &mut TrialRng) -> Result<(usize, bool, f64, TrialDetail)> {
    match plan {
        Plan::Cg(c) => {
            let a = sample_wishart(&c.matrix_ensemble()?, rng)?;
            let b = sample_rhs(c.n, rng);
            let r = cg_on_hermitian(&a, &b, &c.cg_config())?;
            Ok((
                r.halting_time,
                r.converged(),
                r.recursive_residual_norm,
                TrialDetail::Cg {
                    status: r.status,
                    true_residual_norm: r.true_residual_norm,
                },
            ))
        }
        Plan::SpinGlass(ens, cfg) => {
            let x = sample_coupling_tensor(ens, rng)?;
            let w0 = sample_sphere_point(ens.n, rng);
            let r = gradient_descent_halting(&x, &w0, cfg)?;
            Ok((
                r.halting_time,
                r.converged(),
                r.final_energy_per_spin,
                TrialDetail::SpinGlass {
                    status: r.status,
                    final_gradient_norm: r.final_gradient_norm,
                },
            ))
        }
        Plan::DeepNet(d, p) => {
            let idx = subsample_indices(p.base.len(), d.samples, rng)?;
            let mut train = p.base.select(&idx);
            if d.ensemble == InputEnsemble::Noise {
                train = make_noise_inputs(&train, rng)?;
            }
            let r = sgd_train_halting(&p.arch, &train, &p.sgd, rng)?;
            let heldout_accuracy = if d.heldout_samples > 0 && idx.len() < p.base.len() {
                let mut chosen = vec![false; p.base.len()];
                for &i in &idx {
                    chosen[i] = true;
                }
                let rest: Vec<usize> = (0..p.base.len())
                    .filter(|&i| !chosen[i])
                    .take(d.heldout_samples)
                    .collect();
                let mut held = p.base.select(&rest);
                if d.ensemble == InputEnsemble::Noise {
                    held = make_noise_inputs(&held, rng)?;
                }
                Some(accuracy(&r.params, &held)?)
            } else {
                None
            };
            Ok((
                r.halting_time,
                r.converged(),
                r.final_train_cost,
                TrialDetail::DeepNet {
                    status: r.status,
                    train_accuracy: r.train_accuracy,
                    heldout_accuracy,
                },
            ))
        }
    }
}

/// Run every trial of `config`. Trial `i` draws all of its randomness from
/// `trial_rng(seed, i)`, so results do not depend on the thread count.
pub fn run_experiment_detailed(config: &ExperimentConfig) -> Result<Vec<TrialOutcome>> {
    config.validate()?;
    let plan = prepare(config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(config.seed, i);
                let start = Instant::now();
                let (halting_time, converged, final_value, detail) = run_trial(&plan, &mut rng)?;
                let wall_time_ms = if config.record_timing {
                    start.elapsed().as_millis() as u64
                } else {
                    0
                };
                Ok(TrialOutcome {
                    record: TrialRecord {
                        experiment_id: config.experiment_id.clone(),
                        trial_index: i,
                        halting_time: halting_time as u64,
                        converged,
                        final_value,
                        wall_time_ms,
                    },
                    detail,
                })
            })
            .collect()
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    Ok(run_experiment_detailed(config)?.into_iter().map(|o| o.record).collect())
}

/// Write `records.csv`, `config.json` and, when at least four trials
/// converged, the files of [`write_summary`] into `dir`.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, records: &[TrialRecord]) -> Result<Option<Summary>> {
    write_text(&dir.join("records.csv"), &records_csv(records))?;
    write_text(&dir.join("config.json"), &config.to_json())?;
    let summary = match summarize(records, None) {
        Ok(s) => s,
        Err(Error::DegenerateSample(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    write_summary(
        dir,
        &config.algorithm.model_name(),
        &config.algorithm.ensemble_name(),
        &summary,
    )?;
    Ok(Some(summary))
}

/// Write `summary.csv`, `hist.csv`, `normalized.csv` and `density.csv`
/// into `dir`.
pub fn write_summary(dir: &Path, model: &str, ensemble: &str, summary: &Summary) -> Result<()> {
    let row = MomentRow {
        model: model.to_string(),
        ensemble: ensemble.to_string(),
        summary: summary.moments,
    };
    write_text(&dir.join("summary.csv"), &moment_table_csv(&[row]))?;
    let bins = histogram(summary.normalized.values(), &HistogramSpec::with_range(40, -4.0, 4.0))?;
    write_text(&dir.join("hist.csv"), &histogram_csv(&bins))?;
    write_text(&dir.join("normalized.csv"), &values_csv(summary.normalized.values()))?;
    let grid: Vec<f64> = (0..=80).map(|i| -4.0 + 0.1 * i as f64).collect();
    let values = summary.normalized.values();
    let smooth = kde(values, Bandwidth::Silverman, &grid)?;
    write_text(
        &dir.join("density.csv"),
        &density_csv(&grid, &smooth, &gumbel_fit(values)?),
    )
}
