//! The 3-spin spherical spin glass
//! `H(w) = (1/N) Σ_{i,j,k} x_ijk w_i w_j w_k` on the sphere of radius √N,
//! and fixed-step projected gradient descent with a gradient-norm stop.

use serde::{Deserialize, Serialize};

use crate::ensembles::CouplingTensor;
use crate::error::{Error, Result};

/// Which gradient norm the stopping rule measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GradientNorm {
    /// Component of `∇H` tangent to the sphere.
    #[default]
    Tangential,
    /// Full Euclidean gradient. At any critical point on the sphere its
    /// norm is `3|H|/√N`, so thresholds must sit above that floor.
    Ambient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinGlassConfig {
    /// Step size η.
    pub eta: f64,
    /// Gradient-norm threshold ε.
    pub eps: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub gradient_norm: GradientNorm,
    #[serde(default)]
    pub record_energy: bool,
}

impl SpinGlassConfig {
    /// Step size used at `N = 100`.
    pub const DEFAULT_ETA: f64 = 0.15;
    /// Tangential-gradient threshold calibrated at `N = 100`, `η = 0.15`
    /// (see `examples/pilot_spin_glass.rs`).
    pub const DEFAULT_EPS: f64 = 0.23;
    pub const DEFAULT_MAX_ITER: usize = 20_000;

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for SpinGlassConfig {
    fn default() -> Self {
        Self {
            eta: Self::DEFAULT_ETA,
            eps: Self::DEFAULT_EPS,
            max_iter: Self::DEFAULT_MAX_ITER,
            gradient_norm: GradientNorm::Tangential,
            record_energy: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentStatus {
    Converged,
    MaxIterations,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinGlassResult {
    pub halting_time: usize,
    pub final_energy: f64,
    pub final_energy_per_spin: f64,
    pub final_gradient_norm: f64,
    pub status: DescentStatus,
    pub final_point: Vec<f64>,
    /// `H(w^t)` for every visited `t` when requested.
    pub energies: Option<Vec<f64>>,
}

impl SpinGlassResult {
    pub fn converged(&self) -> bool {
        self.status == DescentStatus::Converged
    }
}

fn check_dim(x: &CouplingTensor, w: &[f64]) -> Result<()> {
    if w.len() != x.n() {
        return Err(Error::DimensionMismatch {
            expected: x.n(),
            actual: w.len(),
        });
    }
    Ok(())
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (u, v) in ca.zip(cb) {
        acc[0] += u[0] * v[0];
        acc[1] += u[1] * v[1];
        acc[2] += u[2] * v[2];
        acc[3] += u[3] * v[3];
    }
    let tail: f64 = ra.iter().zip(rb).map(|(u, v)| u * v).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Energy and Euclidean gradient in one sweep over the tensor.
///
/// Per slab `X_i = x_{i··}`: `u = X_i w`, `v = X_iᵀ w`; then
/// `∂_ℓ H = (1/N)[(w·u)_{i=ℓ} + Σ_i w_i u_ℓ + Σ_i w_i v_ℓ]`.
pub fn energy_and_gradient(x: &CouplingTensor, w: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_dim(x, w)?;
    let n = x.n();
    let mut first = vec![0.0; n];
    let mut middle = vec![0.0; n];
    let mut last = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    for (i, &wi) in w.iter().enumerate() {
        let slab = x.slab(i);
        v.iter_mut().for_each(|e| *e = 0.0);
        for (j, row) in slab.chunks_exact(n).enumerate() {
            u[j] = dot(row, w);
            let wj = w[j];
            for (vk, &r) in v.iter_mut().zip(row) {
                *vk += wj * r;
            }
        }
        first[i] = dot(&u, w);
        for l in 0..n {
            middle[l] += wi * u[l];
            last[l] += wi * v[l];
        }
    }
    let inv_n = 1.0 / n as f64;
    let energy = dot(&first, w) * inv_n;
    let grad = (0..n).map(|l| (first[l] + middle[l] + last[l]) * inv_n).collect();
    Ok((energy, grad))
}

/// `H(w)`, the full sum over ordered triples scaled by `1/N`.
pub fn hamiltonian(x: &CouplingTensor, w: &[f64]) -> Result<f64> {
    check_dim(x, w)?;
    let n = x.n();
    let mut total = 0.0;
    for (i, &wi) in w.iter().enumerate() {
        let slab = x.slab(i);
        let inner: f64 = slab.chunks_exact(n).zip(w).map(|(row, &wj)| wj * dot(row, w)).sum();
        total += wi * inner;
    }
    Ok(total / n as f64)
}

pub fn gradient(x: &CouplingTensor, w: &[f64]) -> Result<Vec<f64>> {
    energy_and_gradient(x, w).map(|(_, g)| g)
}

/// Removes the radial part of `g` at a point with `‖w‖² = N`.
pub fn tangential_component(g: &[f64], w: &[f64]) -> Vec<f64> {
    let radial = dot(g, w) / dot(w, w);
    g.iter().zip(w).map(|(gi, wi)| gi - radial * wi).collect()
}

fn measure(g: &[f64], w: &[f64], kind: GradientNorm) -> f64 {
    match kind {
        GradientNorm::Ambient => dot(g, g).sqrt(),
        GradientNorm::Tangential => {
            let t = tangential_component(g, w);
            dot(&t, &t).sqrt()
        }
    }
}

fn rescale_to_sphere(w: &mut [f64]) -> bool {
    let r = dot(w, w).sqrt();
    if !(r > 0.0) || !r.is_finite() {
        return false;
    }
    let s = (w.len() as f64).sqrt() / r;
    w.iter_mut().for_each(|v| *v *= s);
    true
}

/// Projected gradient descent from `w0`.
///
/// Repeats: take `w ← w − η∇H(w)`, rescale to `‖w‖ = √N`, and stop once the
/// configured gradient norm at the rescaled point is below `ε`. The
/// returned halting time counts steps taken; a starting point that already
/// satisfies the rule halts at 0.
pub fn gradient_descent_halting(x: &CouplingTensor, w0: &[f64], cfg: &SpinGlassConfig) -> Result<SpinGlassResult> {
    cfg.validate()?;
    check_dim(x, w0)?;
    let n = x.n();
    let r2 = dot(w0, w0);
    if ((r2 / n as f64) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "starting point must lie on the sphere of radius √{n}; ‖w0‖² = {r2}"
        )));
    }

    let mut w = w0.to_vec();
    let mut energies = cfg.record_energy.then(Vec::new);
    let mut k = 0usize;
    loop {
        let (energy, grad) = energy_and_gradient(x, &w)?;
        let gnorm = measure(&grad, &w, cfg.gradient_norm);
        if let Some(e) = energies.as_mut() {
            e.push(energy);
        }
        let status = if !energy.is_finite() || !gnorm.is_finite() {
            Some(DescentStatus::NonFinite)
        } else if gnorm < cfg.eps {
            Some(DescentStatus::Converged)
        } else if k >= cfg.max_iter {
            Some(DescentStatus::MaxIterations)
        } else {
            None
        };
        if let Some(status) = status {
            return Ok(SpinGlassResult {
                halting_time: k,
                final_energy: energy,
                final_energy_per_spin: energy / n as f64,
                final_gradient_norm: gnorm,
                status,
                final_point: w,
                energies,
            });
        }
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= cfg.eta * gi;
        }
        if !rescale_to_sphere(&mut w) {
            return Ok(SpinGlassResult {
                halting_time: k + 1,
                final_energy: f64::NAN,
                final_energy_per_spin: f64::NAN,
                final_gradient_norm: f64::NAN,
                status: DescentStatus::NonFinite,
                final_point: w,
                energies,
            });
        }
        k += 1;
    }
}
