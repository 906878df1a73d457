//! Independent cross-checks of the numerical kernels.

mod common;

use common::{cg_oracle_worst, mlp_fd_worst, random_params, rel_err, small_instance, spin_glass_fd_worst};
use halting::cg::{cg_halting_time, direct_solve_oracle, CgConfig};
use halting::deep_net::{cost_and_gradient, forward_cost, Batch, MlpArchitecture};
use halting::ensembles::{
    sample_coupling_tensor, sample_rhs, sample_sphere_point, sample_wishart, CouplingEnsemble, CouplingKind,
    HermitianMatrix, MatrixEnsemble, MatrixKind,
};
use halting::linalg::DenseMatrix;
use halting::spin_glass::{energy_and_gradient, tangential_component};
use halting::stream::trial_rng;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

#[test]
fn cg_matches_direct_solve_loe_and_lue() {
    let worst = cg_oracle_worst(100);
    assert!(worst < 1e-8, "worst relative error {worst:e}");
}

#[test]
fn cholesky_oracle_agrees_with_nalgebra() {
    for seed in 0..20 {
        let mut rng = trial_rng(seed, 7);
        let spec = MatrixEnsemble::new(MatrixKind::Loe, 8, 12).unwrap();
        let HermitianMatrix::Real(a) = sample_wishart(&spec, &mut rng).unwrap() else {
            unreachable!()
        };
        let b = sample_rhs(8, &mut rng);
        let ours = direct_solve_oracle(&a, &b).unwrap();
        let na = DMatrix::from_row_slice(8, 8, a.as_slice());
        let eig = na.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l > 0.0));
        let theirs = na.lu().solve(&DVector::from_column_slice(&b)).unwrap();
        assert!(rel_err(&ours, theirs.as_slice()) < 1e-10);
    }
}

#[test]
fn cg_terminates_in_distinct_eigenvalue_count() {
    // Exact arithmetic needs as many steps as there are distinct eigenvalues.
    let diag: Vec<f64> = (0..30).map(|i| [1.0, 2.0, 5.0][i % 3]).collect();
    let a = DenseMatrix::from_diagonal(&diag);
    let b: Vec<f64> = (0..30).map(|i| 1.0 + (i as f64) / 30.0).collect();
    let r = cg_halting_time(&a, &b, &CgConfig::for_dimension(30, 1e-10)).unwrap();
    assert!(r.converged());
    assert!(r.halting_time <= 3, "took {}", r.halting_time);
}

#[test]
fn cg_residual_history_reaches_eps() {
    let (a, b) = small_instance(MatrixKind::Loe, 5);
    let HermitianMatrix::Real(a) = a else { unreachable!() };
    let mut cfg = CgConfig::for_dimension(b.len(), 1e-10);
    cfg.record_history = true;
    let r = cg_halting_time(&a, &b, &cfg).unwrap();
    let h = r.residual_history.unwrap();
    assert_eq!(h.len(), r.halting_time + 1);
    assert!(*h.last().unwrap() < 1e-10);
    assert!(h[..h.len() - 1].iter().all(|&v| v >= 1e-10));
    assert!(r.true_residual_norm < 1e-8);
}

#[test]
fn spin_glass_gradient_matches_finite_differences() {
    let worst = spin_glass_fd_worst(7);
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn spin_glass_energy_matches_triple_loop() {
    let n = 6;
    let mut rng = trial_rng(3, 3);
    let x = sample_coupling_tensor(
        &CouplingEnsemble {
            kind: CouplingKind::Uniform,
            n,
        },
        &mut rng,
    )
    .unwrap();
    let w = sample_sphere_point(n, &mut rng);
    let mut brute = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                brute += x.get(i, j, k) * w[i] * w[j] * w[k];
            }
        }
    }
    let (e, g) = energy_and_gradient(&x, &w).unwrap();
    assert!((e - brute / n as f64).abs() < 1e-12);
    let t = tangential_component(&g, &w);
    let radial: f64 = t.iter().zip(&w).map(|(a, b)| a * b).sum();
    assert!(radial.abs() < 1e-12);
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    let worst = mlp_fd_worst(24);
    assert!(worst < 1e-5, "{worst:e}");
}

#[test]
fn mlp_cost_agrees_between_entry_points() {
    let arch = MlpArchitecture::new(vec![5, 4, 3]).unwrap();
    let mut rng = trial_rng(8, 8);
    let p = random_params(&arch, &mut rng);
    let inputs: Vec<f64> = (0..15).map(|_| rng.sample(StandardNormal)).collect();
    let b = Batch::new(&inputs, &[0, 2, 1]);
    let (cost, _) = cost_and_gradient(&p, &b).unwrap();
    assert!((cost - forward_cost(&p, &b).unwrap()).abs() < 1e-14);
}

#[test]
fn mlp_forward_matches_scalar_loops() {
    let arch = MlpArchitecture::new(vec![4, 3, 2]).unwrap();
    let mut rng = trial_rng(5, 5);
    let p = random_params(&arch, &mut rng);
    let inputs: Vec<f64> = (0..8).map(|_| rng.sample(StandardNormal)).collect();
    let labels = [1u8, 0];
    let mut expected = 0.0;
    for r in 0..2 {
        let x = &inputs[r * 4..r * 4 + 4];
        let (l0, l1) = (&p.layers[0], &p.layers[1]);
        let hidden: Vec<f64> = (0..3)
            .map(|j| {
                let z = l0.bias[j] + (0..4).map(|i| x[i] * l0.weights[i * 3 + j]).sum::<f64>();
                z.max(0.0)
            })
            .collect();
        let logits: Vec<f64> = (0..2)
            .map(|j| l1.bias[j] + (0..3).map(|i| hidden[i] * l1.weights[i * 2 + j]).sum::<f64>())
            .collect();
        let lse = (logits[0].exp() + logits[1].exp()).ln();
        expected += lse - logits[labels[r] as usize];
    }
    expected /= 2.0;
    let got = forward_cost(&p, &Batch::new(&inputs, &labels)).unwrap();
    assert!((got - expected).abs() < 1e-13, "{got} vs {expected}");
}
