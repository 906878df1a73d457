//! Calibration sweep for the desk-scale stopping rule.
//!
//! Trains each trial to a fixed cap while recording minibatch costs, then
//! reports, for a ladder of thresholds, when the trailing mean absolute cost
//! difference first drops below each one. The shipped default (lr 0.1,
//! window 25, threshold 0.003) keeps both input ensembles in the
//! Gaussian-like range with the most margin; wider windows made the noise
//! ensemble more skewed.
//!
//!     cargo run --release --example pilot_deep_net -- <trials> <cap> [lr] [window]

use halting::deep_net::{
    load_mnist_idx, make_noise_inputs, sgd_train_halting, subsample_indices, CostSource, MlpArchitecture, SgdConfig,
    StoppingRule,
};
use halting::stats::moments;
use halting::stream::trial_rng;

const THRESHOLDS: [f64; 6] = [0.004, 0.003, 0.002, 0.0015, 0.001, 0.0008];

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let trials: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let cap: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3000);
    let lr: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.1);
    let window: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(25);

    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist");
    let base = load_mnist_idx(format!("{root}/images-idx3-ubyte"), format!("{root}/labels-idx1-ubyte")).unwrap();
    let arch = MlpArchitecture::desk_scale();
    let cfg = SgdConfig {
        batch_size: 100,
        learning_rate: lr,
        stop: StoppingRule::GradNorm { threshold: 1e-12 },
        cap,
        cost_source: CostSource::Minibatch,
        record_costs: true,
    };
    for noise in [false, true] {
        let start = std::time::Instant::now();
        let mut crossings = vec![Vec::new(); THRESHOLDS.len()];
        let mut accs = Vec::new();
        for t in 0..trials {
            let mut rng = trial_rng(0xd1, t);
            let idx = subsample_indices(base.len(), 3000, &mut rng).unwrap();
            let mut data = base.select(&idx);
            if noise {
                data = make_noise_inputs(&data, &mut rng).unwrap();
            }
            let r = sgd_train_halting(&arch, &data, &cfg, &mut rng).unwrap();
            let costs = r.cost_history.unwrap();
            let diffs: Vec<f64> = costs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            for (k, &thr) in THRESHOLDS.iter().enumerate() {
                let mut hit = cap;
                for end in (window - 1)..=diffs.len() {
                    let m = diffs[end + 1 - window..end].iter().sum::<f64>() / (window - 1) as f64;
                    if m < thr {
                        hit = end + 1;
                        break;
                    }
                }
                crossings[k].push(hit as f64);
            }
            accs.push(r.train_accuracy);
        }
        println!(
            "noise={noise} trials={trials} cap={cap} lr={lr} window={window} elapsed={:.1}s train_acc={:?}",
            start.elapsed().as_secs_f64(),
            accs
        );
        for (k, thr) in THRESHOLDS.iter().enumerate() {
            let v = &crossings[k];
            let capped = v.iter().filter(|&&h| h as usize == cap).count();
            match moments(v) {
                Ok(m) => println!(
                    "  thr={thr:<5} mean={:7.1} std={:6.1} skew={:6.3} kurt={:6.3} capped={capped}",
                    m.mean, m.std, m.skewness, m.kurtosis
                ),
                Err(_) => println!("  thr={thr:<5} values={v:?}"),
            }
        }
    }
}
