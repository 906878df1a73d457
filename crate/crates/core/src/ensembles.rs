//! Random problem instances: right-hand sides, Wishart-type matrices,
//! spin-glass coupling tensors and points on the sphere.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_complex, gram_real, DenseMatrix, Scalar};

/// Entry law of the factor `X` in `A = X X*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MatrixKind {
    /// Bernoulli ±1 with equal probability.
    Pbe,
    /// Standard real normal.
    Loe,
    /// Standard complex normal, variance 1/2 per real component.
    Lue,
}

impl MatrixKind {
    pub const ALL: [MatrixKind; 3] = [MatrixKind::Loe, MatrixKind::Lue, MatrixKind::Pbe];
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::Pbe => "PBE",
            MatrixKind::Loe => "LOE",
            MatrixKind::Lue => "LUE",
        })
    }
}

impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PBE" => Ok(MatrixKind::Pbe),
            "LOE" => Ok(MatrixKind::Loe),
            "LUE" => Ok(MatrixKind::Lue),
            other => Err(Error::InvalidParameter(format!("unknown matrix ensemble {other:?}"))),
        }
    }
}

/// `n × n` matrix `A = X X*` with `X` of shape `n × m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixEnsemble {
    pub kind: MatrixKind,
    pub n: usize,
    pub m: usize,
}

impl MatrixEnsemble {
    pub fn new(kind: MatrixKind, n: usize, m: usize) -> Result<Self> {
        let spec = Self { kind, n, m };
        spec.validate()?;
        Ok(spec)
    }

    /// Inner dimension `n + 2⌊√n⌋`, the regime where CG halting times are
    /// ensemble independent.
    pub fn critical_inner_dimension(n: usize) -> usize {
        n + 2 * isqrt(n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("matrix dimension n must be positive".into()));
        }
        if self.m < self.n {
            return Err(Error::InvalidParameter(format!(
                "inner dimension m = {} must be at least n = {}",
                self.m, self.n
            )));
        }
        Ok(())
    }
}

fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// A Hermitian positive semidefinite matrix over either field.
#[derive(Debug, Clone, PartialEq)]
pub enum HermitianMatrix {
    Real(DenseMatrix<f64>),
    Complex(DenseMatrix<Complex64>),
}

impl HermitianMatrix {
    pub fn dim(&self) -> usize {
        match self {
            HermitianMatrix::Real(a) => a.rows(),
            HermitianMatrix::Complex(a) => a.rows(),
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, HermitianMatrix::Complex(_))
    }

    pub fn hermitian_defect(&self) -> f64 {
        match self {
            HermitianMatrix::Real(a) => a.hermitian_defect(),
            HermitianMatrix::Complex(a) => a.hermitian_defect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            HermitianMatrix::Real(a) => a.max_abs(),
            HermitianMatrix::Complex(a) => a.max_abs(),
        }
    }
}

/// Right-hand side with iid Uniform(−1, 1) entries.
pub fn sample_rhs<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    // `Uniform::new` is half-open; exclude −1 explicitly.
    let dist = Uniform::new(-1.0f64, 1.0);
    (0..n)
        .map(|_| loop {
            let v = dist.sample(rng);
            if v > -1.0 {
                break v;
            }
        })
        .collect()
}

/// Right-hand side lifted into the field `T`.
pub fn lift_rhs<T: Scalar>(b: &[f64]) -> Vec<T> {
    b.iter().map(|&v| T::from_real(v)).collect()
}

/// Draw `A = X X*` for the given ensemble.
pub fn sample_wishart<R: Rng + ?Sized>(spec: &MatrixEnsemble, rng: &mut R) -> Result<HermitianMatrix> {
    spec.validate()?;
    let len = spec.n * spec.m;
    Ok(match spec.kind {
        MatrixKind::Pbe => {
            let x: Vec<f64> = (0..len).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
            HermitianMatrix::Real(gram_real(&x, spec.n, spec.m))
        }
        MatrixKind::Loe => {
            let x: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
            HermitianMatrix::Real(gram_real(&x, spec.n, spec.m))
        }
        MatrixKind::Lue => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let mut xr = Vec::with_capacity(len);
            let mut xi = Vec::with_capacity(len);
            for _ in 0..len {
                xr.push(s * rng.sample::<f64, _>(StandardNormal));
                xi.push(s * rng.sample::<f64, _>(StandardNormal));
            }
            HermitianMatrix::Complex(gram_complex(&xr, &xi, spec.n, spec.m))
        }
    })
}

/// Law of the spin-glass couplings. All three have mean 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    /// Gaussian(0, 1).
    Gaussian,
    /// ±1/√2 with equal probability.
    Bernoulli,
    /// Uniform on (−(3/2)^{1/3}, (3/2)^{1/3}).
    Uniform,
}

impl CouplingKind {
    pub const ALL: [CouplingKind; 3] = [CouplingKind::Gaussian, CouplingKind::Bernoulli, CouplingKind::Uniform];

    /// Half-width of the uniform law.
    pub fn uniform_half_width() -> f64 {
        1.5f64.cbrt()
    }

    pub fn variance(self) -> f64 {
        match self {
            CouplingKind::Gaussian => 1.0,
            CouplingKind::Bernoulli => 0.5,
            CouplingKind::Uniform => Self::uniform_half_width().powi(2) / 3.0,
        }
    }
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CouplingKind::Gaussian => "Gaussian",
            CouplingKind::Bernoulli => "Bernoulli",
            CouplingKind::Uniform => "Uniform",
        })
    }
}

impl FromStr for CouplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(CouplingKind::Gaussian),
            "bernoulli" => Ok(CouplingKind::Bernoulli),
            "uniform" => Ok(CouplingKind::Uniform),
            other => Err(Error::InvalidParameter(format!("unknown coupling ensemble {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingEnsemble {
    pub kind: CouplingKind,
    pub n: usize,
}

/// Largest spin count whose dense `n³` tensor we agree to allocate.
pub const MAX_SPINS: usize = 512;

/// Order-3 coupling array `x_ijk`, stored row-major (`k` fastest), not
/// symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTensor {
    n: usize,
    entries: Vec<f64>,
}

impl CouplingTensor {
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_SPINS {
            return Err(Error::SizeLimit {
                requested: n,
                limit: MAX_SPINS,
            });
        }
        if entries.len() != n * n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n * n,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("coupling entries must be finite".into()));
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_entries(n, vec![0.0; n * n * n])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.entries[(i * self.n + j) * self.n + k]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// The `n × n` slab `x_{i··}`.
    #[inline]
    pub(crate) fn slab(&self, i: usize) -> &[f64] {
        let nn = self.n * self.n;
        &self.entries[i * nn..(i + 1) * nn]
    }
}

pub fn sample_coupling_tensor<R: Rng + ?Sized>(spec: &CouplingEnsemble, rng: &mut R) -> Result<CouplingTensor> {
    if spec.n < 2 || spec.n > MAX_SPINS {
        return Err(Error::SizeLimit {
            requested: spec.n,
            limit: MAX_SPINS,
        });
    }
    let len = spec.n * spec.n * spec.n;
    let entries: Vec<f64> = match spec.kind {
        CouplingKind::Gaussian => (0..len).map(|_| rng.sample(StandardNormal)).collect(),
        CouplingKind::Bernoulli => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            (0..len).map(|_| if rng.gen::<bool>() { s } else { -s }).collect()
        }
        CouplingKind::Uniform => {
            let a = CouplingKind::uniform_half_width();
            let dist = Uniform::new(-a, a);
            (0..len).map(|_| dist.sample(rng)).collect()
        }
    };
    Ok(CouplingTensor { n: spec.n, entries })
}

/// Uniform point on the sphere of radius √n, from a normalized isotropic
/// Gaussian vector.
pub fn sample_sphere_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    assert!(n >= 1, "sphere dimension must be positive");
    loop {
        let mut w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-300 {
            let s = (n as f64).sqrt() / norm;
            w.iter_mut().for_each(|v| *v *= s);
            return w;
        }
    }
}
