use serde::{Deserialize, Serialize};

use super::records::TrialRecord;
use crate::error::{Error, Result};
use crate::stats::{ks_critical_value, ks_distance, moments, normalize_fluctuations, MomentSummary, NormalizedSample};

/// Significance level for the two-sample KS decision.
pub const DEFAULT_ALPHA: f64 = 0.01;

/// Reference moments of a halting-time distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub model: &'static str,
    pub ensemble: &'static str,
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

const fn row(model: &'static str, ensemble: &'static str, m: [f64; 4]) -> ReferenceRow {
    ReferenceRow {
        model,
        ensemble,
        mean: m[0],
        std: m[1],
        skewness: m[2],
        kurtosis: m[3],
    }
}

/// Previously reported values, keyed by the names produced by
/// [`AlgorithmConfig::model_name`](super::AlgorithmConfig::model_name) and
/// `ensemble_name`.
pub const REFERENCE_ROWS: &[ReferenceRow] = &[
    row("CG: M = N", "LOE", [970.0, 164.0, 5.1, 35.2]),
    row("CG: M = N", "LUE", [921.0, 46.0, 15.7, 288.5]),
    row("CG: M = N + 2 floor(sqrt N)", "LOE", [366.0, 13.0, 0.08, 3.1]),
    row("CG: M = N + 2 floor(sqrt N)", "LUE", [367.0, 9.0, 0.07, 3.0]),
    row("CG: M = N + 2 floor(sqrt N)", "PBE", [365.0, 13.0, 0.08, 3.0]),
    row("Spin Glass", "Gaussian", [192.0, 79.7, 1.10, 4.58]),
    row("Spin Glass", "Bernoulli", [192.0, 80.2, 1.10, 4.56]),
    row("Spin Glass", "Uniform", [193.0, 79.6, 1.10, 4.54]),
    row("Fully connected", "MNIST", [2929.0, 106.0, -0.32, 3.24]),
    row("Fully connected", "Random", [4223.0, 53.0, -0.08, 2.98]),
    row("Cond. on gradient", "MNIST", [3371.0, 118.0, -0.34, 3.31]),
];

pub fn reference_row(model: &str, ensemble: &str) -> Option<&'static ReferenceRow> {
    REFERENCE_ROWS
        .iter()
        .find(|r| r.model == model && r.ensemble.eq_ignore_ascii_case(ensemble))
}

/// Measured minus reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentDeltas {
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// Moments of the halting times of converged trials.
    pub moments: MomentSummary,
    pub normalized: NormalizedSample,
    pub total: usize,
    /// Trials that hit the iteration cap or failed numerically.
    pub flagged: usize,
    pub deltas: Option<MomentDeltas>,
}

impl Summary {
    pub fn flagged_fraction(&self) -> f64 {
        self.flagged as f64 / self.total as f64
    }
}

/// Halting times of the converged trials.
pub fn halting_times(records: &[TrialRecord]) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.converged)
        .map(|r| r.halting_time as f64)
        .collect()
}

/// Moments and normalized fluctuations of the converged trials. Flagged
/// trials are censored, not imputed, and reported through `flagged`.
pub fn summarize(records: &[TrialRecord], reference: Option<&ReferenceRow>) -> Result<Summary> {
    let times = halting_times(records);
    let moments = moments(&times)?;
    let normalized = normalize_fluctuations(&times)?;
    let deltas = reference.map(|r| MomentDeltas {
        mean: moments.mean - r.mean,
        std: moments.std - r.std,
        skewness: moments.skewness - r.skewness,
        kurtosis: moments.kurtosis - r.kurtosis,
    });
    Ok(Summary {
        moments,
        normalized,
        total: records.len(),
        flagged: records.len() - times.len(),
        deltas,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Universal,
    NonUniversal,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Universal => "universal",
            Verdict::NonUniversal => "non-universal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub ks: f64,
    /// KS critical value at the chosen level for these sample sizes.
    pub threshold: f64,
    pub skewness_delta: f64,
    pub kurtosis_delta: f64,
    pub verdict: Verdict,
}

/// Two normalized samples are called universal when their KS distance does
/// not exceed the critical value at level `alpha`.
pub fn compare_ensembles(a: &NormalizedSample, b: &NormalizedSample, alpha: f64) -> Result<ComparisonReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside (0, 1)")));
    }
    let ks = ks_distance(a.values(), b.values())?;
    let ma = moments(a.values())?;
    let mb = moments(b.values())?;
    let threshold = ks_critical_value(a.len(), b.len(), alpha);
    Ok(ComparisonReport {
        ks,
        threshold,
        skewness_delta: ma.skewness - mb.skewness,
        kurtosis_delta: ma.kurtosis - mb.kurtosis,
        verdict: if ks <= threshold {
            Verdict::Universal
        } else {
            Verdict::NonUniversal
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: u64, converged: bool) -> TrialRecord {
        TrialRecord {
            experiment_id: "x".into(),
            trial_index: 0,
            halting_time: t,
            converged,
            final_value: 0.0,
            wall_time_ms: 0,
        }
    }

    #[test]
    fn flagged_trials_are_censored() {
        let records: Vec<_> = [10, 11, 12, 13, 14]
            .into_iter()
            .map(|t| rec(t, true))
            .chain([rec(1000, false)])
            .collect();
        let s = summarize(&records, None).unwrap();
        assert_eq!(s.moments.count, 5);
        assert_eq!(s.moments.mean, 12.0);
        assert_eq!(s.flagged, 1);
        assert!((s.flagged_fraction() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn too_few_converged() {
        let records = vec![rec(1, true), rec(2, true), rec(3, false)];
        assert!(matches!(summarize(&records, None), Err(Error::DegenerateSample(_))));
    }

    #[test]
    fn deltas_against_reference() {
        let records: Vec<_> = [365, 366, 367, 366].into_iter().map(|t| rec(t, true)).collect();
        let r = reference_row("CG: M = N + 2 floor(sqrt N)", "loe").unwrap();
        let s = summarize(&records, Some(r)).unwrap();
        assert_eq!(s.deltas.unwrap().mean, 0.0);
    }

    #[test]
    fn identical_samples_are_universal() {
        let times: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64).collect();
        let a = normalize_fluctuations(&times).unwrap();
        let r = compare_ensembles(&a, &a, DEFAULT_ALPHA).unwrap();
        assert_eq!(r.ks, 0.0);
        assert_eq!(r.verdict, Verdict::Universal);
    }

    #[test]
    fn shifted_shapes_are_not() {
        let a: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..500).map(|i| (i as f64).powi(4)).collect();
        let r = compare_ensembles(
            &normalize_fluctuations(&a).unwrap(),
            &normalize_fluctuations(&b).unwrap(),
            DEFAULT_ALPHA,
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::NonUniversal);
        assert!(r.ks > r.threshold);
    }
}
