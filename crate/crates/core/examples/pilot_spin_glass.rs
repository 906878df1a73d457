//! Calibration sweep for the spin-glass defaults.
//!
//! Runs projected gradient descent with a tiny threshold and records, for a
//! ladder of tangential-gradient thresholds, the first step at which each is
//! met and the energy per spin there. The shipped defaults
//! (`η = 0.15`, `ε = 0.23` at `N = 100`) were read off this output.
//!
//!     cargo run --release --example pilot_spin_glass -- <eta> <trials> [n] [ensemble]

use halting::ensembles::{sample_coupling_tensor, sample_sphere_point, CouplingEnsemble, CouplingKind};
use halting::spin_glass::{energy_and_gradient, tangential_component};
use halting::stats::moments;
use halting::stream::trial_rng;
use rayon::prelude::*;

const THRESHOLDS: [f64; 8] = [1.0, 0.5, 0.35, 0.25, 0.23, 0.15, 0.1, 0.05];
const CAP: usize = 5000;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let eta: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.15);
    let trials: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let n: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(100);
    let kind: CouplingKind = args
        .get(4)
        .and_then(|s| s.parse().ok())
        .unwrap_or(CouplingKind::Gaussian);

    let start = std::time::Instant::now();
    let runs: Vec<Vec<(usize, f64)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(0x5eed, t);
            let x = sample_coupling_tensor(&CouplingEnsemble { kind, n }, &mut rng).unwrap();
            let mut w = sample_sphere_point(n, &mut rng);
            let mut hits = vec![(CAP, f64::NAN); THRESHOLDS.len()];
            for step in 0..=CAP {
                let (h, g) = energy_and_gradient(&x, &w).unwrap();
                let tg = tangential_component(&g, &w);
                let tn = tg.iter().map(|v| v * v).sum::<f64>().sqrt();
                for (slot, &eps) in hits.iter_mut().zip(&THRESHOLDS) {
                    if slot.0 == CAP && tn < eps {
                        *slot = (step, h / n as f64);
                    }
                }
                if tn < *THRESHOLDS.last().unwrap() {
                    break;
                }
                for (wi, gi) in w.iter_mut().zip(&g) {
                    *wi -= eta * gi;
                }
                let r = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                let s = (n as f64).sqrt() / r;
                w.iter_mut().for_each(|v| *v *= s);
            }
            hits
        })
        .collect();
    println!(
        "eta={eta} n={n} ensemble={kind} trials={trials} elapsed={:.1}s",
        start.elapsed().as_secs_f64()
    );
    for (idx, eps) in THRESHOLDS.iter().enumerate() {
        let times: Vec<f64> = runs.iter().map(|r| r[idx].0 as f64).collect();
        let energies: Vec<f64> = runs.iter().map(|r| r[idx].1).filter(|e| e.is_finite()).collect();
        let capped = runs.iter().filter(|r| r[idx].0 == CAP).count();
        let m = moments(&times).unwrap();
        let emin = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let emax = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let emean = energies.iter().sum::<f64>() / energies.len().max(1) as f64;
        println!(
            "eps={eps:<5} mean={:8.1} std={:7.1} skew={:6.3} kurt={:6.3} capped={capped:4} E/N mean={emean:.4} range=[{emin:.4}, {emax:.4}]",
            m.mean, m.std, m.skewness, m.kurtosis
        );
    }
}
