//! Conjugate gradient instrumented to report its halting time
//! `T = min{k : ‖r_k‖ < ε}` on the recursively updated residual.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::HermitianMatrix;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, DenseMatrix, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgConfig {
    /// Residual threshold ε.
    pub eps: f64,
    pub max_iter: usize,
    /// Keep `‖r_k‖` for every `k`.
    #[serde(default)]
    pub record_history: bool,
}

impl CgConfig {
    /// `max_iter` defaults to `10·n`.
    pub fn for_dimension(n: usize, eps: f64) -> Self {
        Self {
            eps,
            max_iter: 10 * n.max(1),
            record_history: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
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

/// How a CG run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CgStatus {
    Converged,
    MaxIterations,
    /// A NaN or infinity appeared in the recurrence.
    NonFinite,
    /// `⟨p, Ap⟩ ≤ 0`: the matrix looked indefinite in floating point.
    Indefinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgResult<T> {
    pub halting_time: usize,
    pub recursive_residual_norm: f64,
    pub true_residual_norm: f64,
    pub status: CgStatus,
    pub iterate: Vec<T>,
    pub residual_history: Option<Vec<f64>>,
}

impl<T> CgResult<T> {
    pub fn converged(&self) -> bool {
        self.status == CgStatus::Converged
    }
}

/// Field-erased summary, for callers that do not care about the iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct CgSummary {
    pub halting_time: usize,
    pub recursive_residual_norm: f64,
    pub true_residual_norm: f64,
    pub status: CgStatus,
    pub residual_history: Option<Vec<f64>>,
}

impl CgSummary {
    pub fn converged(&self) -> bool {
        self.status == CgStatus::Converged
    }
}

impl<T> From<CgResult<T>> for CgSummary {
    fn from(r: CgResult<T>) -> Self {
        Self {
            halting_time: r.halting_time,
            recursive_residual_norm: r.recursive_residual_norm,
            true_residual_norm: r.true_residual_norm,
            status: r.status,
            residual_history: r.residual_history,
        }
    }
}

/// Run CG on `A x = b` from `x₀ = b`.
///
/// Each step computes `r_k = r_{k−1} − a A p_{k−1}`,
/// `p_k = r_k + β p_{k−1}` and `x_k = x_{k−1} + a p_{k−1}` with
/// `a = ⟨r,r⟩/⟨p,Ap⟩` and `β = ⟨r_k,r_k⟩/⟨r_{k−1},r_{k−1}⟩`. The halting time
/// is not clamped at `n`; in floating point it routinely exceeds it.
pub fn cg_halting_time<T: Scalar>(a: &DenseMatrix<T>, b: &[T], cfg: &CgConfig) -> Result<CgResult<T>> {
    cfg.validate()?;
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.cols(),
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }

    let mut x = b.to_vec();
    let mut ap = vec![T::zero(); n];
    a.matvec_into(&x, &mut ap);
    let mut r: Vec<T> = b.iter().zip(&ap).map(|(&bi, &axi)| bi - axi).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re();
    let mut history = cfg.record_history.then(|| vec![rr.sqrt()]);

    let mut k = 0usize;
    let status = loop {
        if !rr.is_finite() {
            break CgStatus::NonFinite;
        }
        if rr.sqrt() < cfg.eps {
            break CgStatus::Converged;
        }
        if k >= cfg.max_iter {
            break CgStatus::MaxIterations;
        }
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap).re();
        if !pap.is_finite() {
            break CgStatus::NonFinite;
        }
        if pap <= 0.0 {
            break CgStatus::Indefinite;
        }
        let step = rr / pap;
        axpy(T::from_real(-step), &ap, &mut r);
        axpy(T::from_real(step), &p, &mut x);
        let rr_next = dot(&r, &r).re();
        let beta = rr_next / rr;
        for (pi, &ri) in p.iter_mut().zip(&r) {
            *pi = ri + pi.scale(beta);
        }
        rr = rr_next;
        k += 1;
        if let Some(h) = history.as_mut() {
            h.push(rr.sqrt());
        }
    };

    a.matvec_into(&x, &mut ap);
    let true_residual: Vec<T> = b.iter().zip(&ap).map(|(&bi, &axi)| bi - axi).collect();
    Ok(CgResult {
        halting_time: k,
        recursive_residual_norm: rr.sqrt(),
        true_residual_norm: norm(&true_residual),
        status,
        iterate: x,
        residual_history: history,
    })
}

/// Run CG on either field with a real right-hand side.
pub fn cg_on_hermitian(a: &HermitianMatrix, b: &[f64], cfg: &CgConfig) -> Result<CgSummary> {
    match a {
        HermitianMatrix::Real(m) => cg_halting_time(m, b, cfg).map(Into::into),
        HermitianMatrix::Complex(m) => {
            let bc: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            cg_halting_time(m, &bc, cfg).map(Into::into)
        }
    }
}

/// Largest system the dense oracle accepts.
pub const ORACLE_MAX_DIM: usize = 64;

/// `A⁻¹ b` by Cholesky factorization; a test oracle for small systems.
pub fn direct_solve_oracle<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    if a.rows() > ORACLE_MAX_DIM {
        return Err(Error::SizeLimit {
            requested: a.rows(),
            limit: ORACLE_MAX_DIM,
        });
    }
    a.cholesky_solve(b)
}
