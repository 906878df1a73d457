mod common;

use std::process::Command;

use common::mnist_path as data;

use halting::deep_net::{load_mnist_idx, MNIST_PIXELS};
use halting::harness::{
    preset, read_records, records_csv, run_experiment, run_experiment_detailed, write_outputs, AlgorithmConfig,
    ExperimentConfig, InputEnsemble, TrialDetail,
};

fn small_cg() -> ExperimentConfig {
    let mut cfg = preset("cg-ci").unwrap();
    cfg.trials = 24;
    if let AlgorithmConfig::Cg(c) = &mut cfg.algorithm {
        c.n = 30;
        c.max_iter = None;
    }
    cfg
}

fn small_spin() -> ExperimentConfig {
    let mut cfg = preset("spinglass-ci").unwrap();
    cfg.trials = 12;
    if let AlgorithmConfig::SpinGlass(s) = &mut cfg.algorithm {
        s.n = 20;
    }
    cfg
}

fn small_deep(ensemble: InputEnsemble) -> ExperimentConfig {
    let mut cfg = preset("deepnet-ci").unwrap();
    cfg.trials = 4;
    if let AlgorithmConfig::DeepNet(d) = &mut cfg.algorithm {
        d.ensemble = ensemble;
        d.samples = 300;
        d.batch_size = 50;
        d.cap = 400;
        d.heldout_samples = 200;
        d.images_path = data("images-idx3-ubyte");
        d.labels_path = data("labels-idx1-ubyte");
    }
    cfg
}

fn with_threads(mut cfg: ExperimentConfig, t: usize) -> ExperimentConfig {
    cfg.threads = Some(t);
    cfg
}

#[test]
fn records_do_not_depend_on_thread_count() {
    for cfg in [small_cg(), small_spin(), small_deep(InputEnsemble::Noise)] {
        let one = records_csv(&run_experiment(&with_threads(cfg.clone(), 1)).unwrap());
        let many = records_csv(&run_experiment(&with_threads(cfg, 4)).unwrap());
        assert_eq!(one, many);
    }
}

#[test]
fn seeds_change_results() {
    let a = run_experiment(&small_cg()).unwrap();
    let mut cfg = small_cg();
    cfg.seed = 2;
    let b = run_experiment(&cfg).unwrap();
    assert_ne!(records_csv(&a), records_csv(&b));
}

#[test]
fn outputs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_cg();
    let records = run_experiment(&cfg).unwrap();
    let summary = write_outputs(dir.path(), &cfg, &records).unwrap().unwrap();
    assert_eq!(read_records(&dir.path().join("records.csv")).unwrap(), records);
    let back = ExperimentConfig::from_json(&std::fs::read_to_string(dir.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(back, cfg);
    let normalized = std::fs::read_to_string(dir.path().join("normalized.csv")).unwrap();
    assert_eq!(normalized.lines().count(), summary.moments.count);
    let hist = std::fs::read_to_string(dir.path().join("hist.csv")).unwrap();
    assert_eq!(hist.lines().next(), Some("bin_center,density"));
    assert_eq!(hist.lines().count(), 41);
    let density = std::fs::read_to_string(dir.path().join("density.csv")).unwrap();
    assert_eq!(density.lines().next(), Some("x,kde,gumbel_stand_in"));
}

#[test]
fn bundled_mnist_loads() {
    let d = load_mnist_idx(data("images-idx3-ubyte"), data("labels-idx1-ubyte")).unwrap();
    assert_eq!(d.len(), 10_000);
    assert_eq!(d.dim(), MNIST_PIXELS);
    assert!(d.images().iter().all(|&p| (0.0..=1.0).contains(&p)));
    let mut counts = [0usize; 10];
    for &l in d.labels() {
        counts[l as usize] += 1;
    }
    assert!(counts.iter().all(|&c| c > 800), "{counts:?}");
}

#[test]
fn deep_net_trials_report_accuracy() {
    let outcomes = run_experiment_detailed(&small_deep(InputEnsemble::Mnist)).unwrap();
    for o in outcomes {
        let TrialDetail::DeepNet {
            train_accuracy,
            heldout_accuracy,
            ..
        } = o.detail
        else {
            panic!("wrong detail")
        };
        assert!(train_accuracy > 0.5);
        assert!(heldout_accuracy.unwrap() > 0.5);
    }
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_halting")).args(args).output().unwrap()
}

#[test]
fn cli_run_analyze_compare() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let common = ["--n", "30", "--trials", "40", "--threads", "2"];
    let out = cli(&[
        &["run-cg", "--ensemble", "LOE", "--out", a.to_str().unwrap()],
        &common[..],
    ]
    .concat());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = cli(&[
        &["run-cg", "--ensemble", "LUE", "--out", b.to_str().unwrap()],
        &common[..],
    ]
    .concat());
    assert_eq!(out.status.code(), Some(0));
    for f in ["records.csv", "summary.csv", "hist.csv", "normalized.csv"] {
        assert!(a.join(f).exists(), "{f}");
    }
    let summary = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(summary.starts_with("model,ensemble,count,mean,std,skewness,kurtosis\n"));

    let c = dir.path().join("c");
    let out = cli(&[
        "analyze",
        a.join("records.csv").to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(c.join("summary.csv")).unwrap(), summary);

    let out = cli(&[
        "compare",
        a.join("records.csv").to_str().unwrap(),
        b.join("records.csv").to_str().unwrap(),
        "--out",
        c.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("KS"));
    assert!(c.join("compare.csv").exists());
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("x");
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        cli(&["run-cg", "--preset", "nope", "--out", out]).status.code(),
        Some(1)
    );
    assert_eq!(
        cli(&["run-cg", "--n", "30", "--m", "10", "--out", out]).status.code(),
        Some(1)
    );
    assert_eq!(
        cli(&["run-spinglass", "--m", "10", "--out", out]).status.code(),
        Some(1)
    );
    assert_eq!(
        cli(&["run-cg", "--preset", "spinglass-ci", "--out", out]).status.code(),
        Some(1)
    );

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(
        cli(&["run-cg", "--config", bad.to_str().unwrap()]).status.code(),
        Some(1)
    );

    // Square systems with a tight cap leave most trials unconverged.
    let out = cli(&[
        "run-cg",
        "--n",
        "30",
        "--m",
        "square",
        "--max-iter",
        "30",
        "--trials",
        "20",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out_dir.join("records.csv").exists());
}

#[test]
fn cli_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, small_spin().to_json()).unwrap();
    let out_dir = dir.path().join("sg");
    let out = cli(&[
        "run-spinglass",
        "--config",
        cfg_path.to_str().unwrap(),
        "--trials",
        "6",
        "--ensemble",
        "bernoulli",
        "--seed",
        "9",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let written = ExperimentConfig::from_json(&std::fs::read_to_string(out_dir.join("config.json")).unwrap()).unwrap();
    assert_eq!(written.trials, 6);
    assert_eq!(written.seed, 9);
    assert_eq!(written.algorithm.ensemble_name(), "Bernoulli");
    assert_eq!(read_records(&out_dir.join("records.csv")).unwrap().len(), 6);
}
