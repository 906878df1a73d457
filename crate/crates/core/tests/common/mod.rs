#![allow(dead_code)]

use std::path::PathBuf;

use halting::cg::{cg_halting_time, direct_solve_oracle, CgConfig, CgStatus};
use halting::deep_net::{cost_and_gradient, forward_cost, init_params, Batch, MlpArchitecture, MlpParams};
use halting::ensembles::{
    lift_rhs, sample_coupling_tensor, sample_rhs, sample_wishart, CouplingEnsemble, CouplingKind, HermitianMatrix,
    MatrixEnsemble, MatrixKind,
};
use halting::spin_glass::{energy_and_gradient, hamiltonian};
use halting::stream::trial_rng;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn mnist_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/mnist")
        .join(name)
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale
}

fn rel_err_c(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    diff / scale
}

/// Random LOE/LUE instance with `2 ≤ n ≤ 32`.
pub fn small_instance(kind: MatrixKind, seed: u64) -> (HermitianMatrix, Vec<f64>) {
    let mut rng = trial_rng(seed, 0);
    let n = rng.gen_range(2..=32);
    let spec = MatrixEnsemble::new(kind, n, MatrixEnsemble::critical_inner_dimension(n)).unwrap();
    let a = sample_wishart(&spec, &mut rng).unwrap();
    (a, sample_rhs(n, &mut rng))
}

/// Worst relative error of the CG iterate against Cholesky over
/// `per_kind` LOE and `per_kind` LUE instances.
pub fn cg_oracle_worst(per_kind: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for kind in [MatrixKind::Loe, MatrixKind::Lue] {
        for seed in 0..per_kind {
            let (a, b) = small_instance(kind, 1000 + seed);
            let cfg = CgConfig::for_dimension(b.len(), 1e-12);
            let err = match &a {
                HermitianMatrix::Real(m) => {
                    let r = cg_halting_time(m, &b, &cfg).unwrap();
                    assert_eq!(r.status, CgStatus::Converged);
                    rel_err(&r.iterate, &direct_solve_oracle(m, &b).unwrap())
                }
                HermitianMatrix::Complex(m) => {
                    let bc: Vec<Complex64> = lift_rhs(&b);
                    let r = cg_halting_time(m, &bc, &cfg).unwrap();
                    assert_eq!(r.status, CgStatus::Converged);
                    rel_err_c(&r.iterate, &direct_solve_oracle(m, &bc).unwrap())
                }
            };
            worst = worst.max(err);
        }
    }
    worst
}

/// Worst relative error of the spin-glass gradient against central
/// differences, over `seeds` instances for each of `n ∈ {3, 5, 10}`.
pub fn spin_glass_fd_worst(seeds: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for n in [3, 5, 10] {
        for seed in 0..seeds {
            let mut rng = trial_rng(seed, n as u64);
            let x = sample_coupling_tensor(
                &CouplingEnsemble {
                    kind: CouplingKind::Gaussian,
                    n,
                },
                &mut rng,
            )
            .unwrap();
            let w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let (_, g) = energy_and_gradient(&x, &w).unwrap();
            let h = 1e-4;
            let fd: Vec<f64> = (0..n)
                .map(|l| {
                    let mut p = w.clone();
                    let mut m = w.clone();
                    p[l] += h;
                    m[l] -= h;
                    (hamiltonian(&x, &p).unwrap() - hamiltonian(&x, &m).unwrap()) / (2.0 * h)
                })
                .collect();
            worst = worst.max(rel_err(&g, &fd));
        }
    }
    worst
}

pub fn random_params(arch: &MlpArchitecture, rng: &mut impl Rng) -> MlpParams {
    let mut p = init_params(arch, rng).unwrap();
    for layer in &mut p.layers {
        for b in &mut layer.bias {
            *b = 0.1 * rng.sample::<f64, _>(StandardNormal);
        }
    }
    p
}

/// Worst relative error of backprop against central differences over
/// `cases` random shapes; the first is `[6, 5, 4, 3]` with batch 7.
pub fn mlp_fd_worst(cases: usize) -> f64 {
    let mut shapes: Vec<(Vec<usize>, usize)> = vec![(vec![6, 5, 4, 3], 7)];
    let mut rng = trial_rng(99, 0);
    while shapes.len() < cases {
        let depth = rng.gen_range(1..=3);
        let mut sizes = vec![rng.gen_range(2..=8)];
        for _ in 0..depth {
            sizes.push(rng.gen_range(2..=8));
        }
        shapes.push((sizes, rng.gen_range(1..=9)));
    }
    let mut worst: f64 = 0.0;
    for (case, (sizes, batch)) in shapes.into_iter().enumerate() {
        let mut rng = trial_rng(100, case as u64);
        let arch = MlpArchitecture::new(sizes.clone()).unwrap();
        let params = random_params(&arch, &mut rng);
        let inputs: Vec<f64> = (0..batch * sizes[0]).map(|_| rng.sample(StandardNormal)).collect();
        let classes = *sizes.last().unwrap();
        let labels: Vec<u8> = (0..batch).map(|_| rng.gen_range(0..classes) as u8).collect();
        let b = Batch::new(&inputs, &labels);
        let (_, grad) = cost_and_gradient(&params, &b).unwrap();
        let h = 1e-6;
        let fd: Vec<f64> = (0..params.len())
            .map(|i| {
                let mut p = params.clone();
                *p.coordinate_mut(i) += h;
                let up = forward_cost(&p, &b).unwrap();
                *p.coordinate_mut(i) -= 2.0 * h;
                let down = forward_cost(&p, &b).unwrap();
                (up - down) / (2.0 * h)
            })
            .collect();
        worst = worst.max(rel_err(&grad.flat(), &fd));
    }
    worst
}
