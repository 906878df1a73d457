//! Fluctuation normalization, moment summaries, empirical distribution
//! comparison, and the histogram / KDE data behind the plots.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Skewness of every Gumbel law, `12√6 ζ(3)/π³`.
pub const GUMBEL_SKEWNESS: f64 = 1.139_547_099_404_648_7;
/// Non-excess kurtosis of every Gumbel law, `3 + 12/5`.
pub const GUMBEL_KURTOSIS: f64 = 5.4;

/// Population moments of a sample; kurtosis is non-excess (Gaussian = 3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

fn central_moments(sample: &[f64]) -> (f64, f64, f64, f64) {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in sample {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m3 / n, m4 / n)
}

fn is_degenerate(mean: f64, m2: f64) -> bool {
    !(m2 > 0.0) || m2.sqrt() <= 1e-14 * mean.abs()
}

/// Mean, population standard deviation, skewness `m₃/m₂^{3/2}` and
/// kurtosis `m₄/m₂²`.
pub fn moments(sample: &[f64]) -> Result<MomentSummary> {
    if sample.len() < 4 {
        return Err(Error::DegenerateSample(format!(
            "need at least 4 values for moments, got {}",
            sample.len()
        )));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSample("sample contains non-finite values".into()));
    }
    let (mean, m2, m3, m4) = central_moments(sample);
    if is_degenerate(mean, m2) {
        return Err(Error::DegenerateSample("sample has zero variance".into()));
    }
    Ok(MomentSummary {
        count: sample.len(),
        mean,
        std: m2.sqrt(),
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
    })
}

/// A sample centred to mean 0 and scaled to unit population variance.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSample(Vec<f64>);

impl NormalizedSample {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `(T − mean) / std` with the population standard deviation.
pub fn normalize_fluctuations(sample: &[f64]) -> Result<NormalizedSample> {
    if sample.len() < 2 {
        return Err(Error::DegenerateSample("need at least 2 values to normalize".into()));
    }
    let (mean, m2, _, _) = central_moments(sample);
    if !mean.is_finite() || is_degenerate(mean, m2) {
        return Err(Error::DegenerateSample("sample has zero variance".into()));
    }
    let sd = m2.sqrt();
    Ok(NormalizedSample(sample.iter().map(|v| (v - mean) / sd).collect()))
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DegenerateSample("KS distance needs two nonempty samples".into()));
    }
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        // Step past every copy of the smallest remaining value in both
        // samples before comparing, so ties are evaluated after the jump.
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic two-sample KS critical value `c(α)√((n+m)/(nm))` with
/// `c(α) = √(−ln(α/2)/2)`.
pub fn ks_critical_value(n: usize, m: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub bin_count: usize,
    /// `None` spans the sample's own range.
    pub range: Option<(f64, f64)>,
}

impl HistogramSpec {
    pub fn auto(bin_count: usize) -> Self {
        Self { bin_count, range: None }
    }

    pub fn with_range(bin_count: usize, lo: f64, hi: f64) -> Self {
        Self {
            bin_count,
            range: Some((lo, hi)),
        }
    }
}

/// Density histogram as `(bin_center, density)` pairs.
///
/// Values outside an explicit range are counted in the nearest end bin, so
/// the densities always integrate to one.
pub fn histogram(sample: &[f64], spec: &HistogramSpec) -> Result<Vec<(f64, f64)>> {
    if sample.is_empty() {
        return Err(Error::DegenerateSample("histogram of an empty sample".into()));
    }
    if spec.bin_count == 0 {
        return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
    }
    let (lo, hi) = match spec.range {
        Some((lo, hi)) => {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParameter(format!("invalid histogram range [{lo}, {hi}]")));
            }
            (lo, hi)
        }
        None => {
            let lo = sample.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo < hi {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        }
    };
    let bins = spec.bin_count;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in sample {
        let pos = (v - lo) * bins as f64 / (hi - lo);
        let idx = if pos.is_nan() {
            continue;
        } else if pos < 0.0 {
            0
        } else {
            (pos.floor() as usize).min(bins - 1)
        };
        counts[idx] += 1;
    }
    let total: usize = counts.iter().sum();
    let scale = 1.0 / (total as f64 * width);
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (lo + (i as f64 + 0.5) * width, c as f64 * scale))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    /// `1.06 σ n^{−1/5}`.
    Silverman,
    Fixed(f64),
}

/// Gaussian kernel density estimate evaluated on `grid`.
pub fn kde(sample: &[f64], bandwidth: Bandwidth, grid: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::DegenerateSample("KDE of an empty sample".into()));
    }
    let h = match bandwidth {
        Bandwidth::Fixed(h) => h,
        Bandwidth::Silverman => {
            let (_, m2, _, _) = central_moments(sample);
            1.06 * m2.sqrt() * (sample.len() as f64).powf(-0.2)
        }
    };
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "KDE bandwidth must be positive, got {h}"
        )));
    }
    let norm = 1.0 / (sample.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    Ok(grid
        .iter()
        .map(|&g| {
            sample
                .iter()
                .map(|&s| {
                    let z = (g - s) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect())
}

/// Method-of-moments Gumbel (maximum) fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelFit {
    pub location: f64,
    pub scale: f64,
}

impl GumbelFit {
    pub fn density(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        (-(z + (-z).exp())).exp() / self.scale
    }
}

/// `scale = σ√6/π`, `location = mean − γ·scale`.
pub fn gumbel_fit(sample: &[f64]) -> Result<GumbelFit> {
    if sample.len() < 2 {
        return Err(Error::DegenerateSample("Gumbel fit needs at least 2 values".into()));
    }
    let (mean, m2, _, _) = central_moments(sample);
    if is_degenerate(mean, m2) {
        return Err(Error::DegenerateSample("sample has zero variance".into()));
    }
    let scale = m2.sqrt() * 6f64.sqrt() / std::f64::consts::PI;
    Ok(GumbelFit {
        location: mean - EULER_GAMMA * scale,
        scale,
    })
}

/// One row of a moment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub model: String,
    pub ensemble: String,
    pub summary: MomentSummary,
}

pub const MOMENT_TABLE_HEADER: &str = "model,ensemble,count,mean,std,skewness,kurtosis";

pub fn moment_table_csv(rows: &[MomentRow]) -> String {
    let mut out = String::from(MOMENT_TABLE_HEADER);
    out.push('\n');
    for r in rows {
        let s = &r.summary;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.model, r.ensemble, s.count, s.mean, s.std, s.skewness, s.kurtosis
        );
    }
    out
}

pub fn histogram_csv(bins: &[(f64, f64)]) -> String {
    let mut out = String::from("bin_center,density\n");
    for (c, d) in bins {
        let _ = writeln!(out, "{c},{d}");
    }
    out
}

/// Smoothed density of a normalized sample next to the moment-matched
/// Gumbel density, which stands in for the reference curve.
pub fn density_csv(grid: &[f64], kde: &[f64], gumbel: &GumbelFit) -> String {
    let mut out = String::from("x,kde,gumbel_stand_in\n");
    for (x, d) in grid.iter().zip(kde) {
        let _ = writeln!(out, "{x},{d},{}", gumbel.density(*x));
    }
    out
}

/// One value per line.
pub fn values_csv(values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 20);
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}
