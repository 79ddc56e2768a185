use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dtsnn::data::{encode_aer, write_idx_images, write_idx_labels, EventRecord, Polarity};
use dtsnn::metrics::read_metrics;

fn dtsnn(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtsnn"))
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("spawn dtsnn")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(
        o.status.success(),
        "failed: {}\n{}",
        stderr(&o),
        String::from_utf8_lossy(&o.stdout)
    );
    o
}

fn entries(dir: &Path) -> Vec<String> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

/// Three event files per digit; each digit lights its own column band.
fn fake_nmnist(root: &Path) {
    for d in 0u8..10 {
        let dir = root.join(d.to_string());
        fs::create_dir_all(&dir).unwrap();
        for s in 0..3u32 {
            let events: Vec<EventRecord> = (0..60u32)
                .map(|i| EventRecord {
                    x: (d * 3 + (i % 3) as u8) % 34,
                    y: ((i * 7 + s) % 34) as u8,
                    polarity: if i % 5 == 0 {
                        Polarity::Off
                    } else {
                        Polarity::On
                    },
                    timestamp_us: i * 1500 + s * 10,
                })
                .collect();
            fs::write(dir.join(format!("{s:05}.bin")), encode_aer(&events)).unwrap();
        }
    }
}

fn fake_mnist(dir: &Path, n: usize) {
    fs::create_dir_all(dir).unwrap();
    let images: Vec<Vec<u8>> = (0..n)
        .map(|i| {
            (0..784)
                .map(|p| if p % 10 == i % 10 { 255 } else { 0 })
                .collect()
        })
        .collect();
    let labels: Vec<u8> = (0..n).map(|i| (i % 10) as u8).collect();
    write_idx_images(&dir.join("images-idx3-ubyte"), 28, 28, &images).unwrap();
    write_idx_labels(&dir.join("labels-idx1-ubyte"), &labels).unwrap();
}

#[test]
fn no_arguments_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dtsnn(tmp.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    assert_eq!(dtsnn(tmp.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        dtsnn(tmp.path(), &["train", "--bogus"]).status.code(),
        Some(2)
    );
    assert!(entries(tmp.path()).is_empty());
}

#[test]
fn help_on_every_level() {
    let tmp = tempfile::tempdir().unwrap();
    for cmd in [
        vec!["--help"],
        vec!["train", "--help"],
        vec!["eval", "--help"],
        vec!["quantize", "--help"],
        vec!["simulate", "--help"],
    ] {
        let o = ok(dtsnn(tmp.path(), &cmd));
        assert!(String::from_utf8_lossy(&o.stdout).contains("Usage"));
    }
}

#[test]
fn unknown_config_key_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dtsnn(
        tmp.path(),
        &["train", "--preset", "mlp-128", "--set", "batchsize=100"],
    );
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(
        err.contains("batchsize") && err.lines().count() == 1,
        "{err}"
    );

    fs::write(
        tmp.path().join("run.cfg"),
        "preset = mlp-128\nlearning_rate = 0.1\n",
    )
    .unwrap();
    let o = dtsnn(tmp.path(), &["train", "--config", "run.cfg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("learning_rate"));
}

#[test]
fn missing_dataset_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dtsnn(
        tmp.path(),
        &["train", "--preset", "mlp-128", "--data", "nowhere"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nowhere"), "{}", stderr(&o));
    let o = dtsnn(tmp.path(), &["train", "--preset", "nmnist-mlp"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn temporal_training_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    fake_nmnist(&tmp.path().join("nmnist"));
    let mut files = Vec::new();
    for out in ["a", "b"] {
        ok(dtsnn(
            tmp.path(),
            &[
                "train",
                "--preset",
                "nmnist-mlp",
                "--epochs",
                "2",
                "--seed",
                "7",
                "--data",
                "nmnist",
                "--out",
                out,
            ],
        ));
        files.push(fs::read(tmp.path().join(out).join("train-metrics.csv")).unwrap());
        assert_eq!(
            entries(&tmp.path().join(out)),
            ["best.ckpt", "model.ckpt", "train-metrics.csv", "train.cfg"]
        );
    }
    assert_eq!(files[0], files[1]);
    let recs = read_metrics(&tmp.path().join("a/train-metrics.csv")).unwrap();
    assert_eq!(
        recs.iter()
            .filter(|r| r.phase == "train" && r.metric == "loss")
            .count(),
        2
    );
    assert!(recs.iter().all(|r| r.wall_clock.is_none()));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "--set",
        "n_train=40",
        "--set",
        "n_validation=10",
        "--set",
        "n_test=10",
        "--set",
        "batch_size=20",
    ];
    let mut first = vec![
        "train", "--preset", "bar-mlp", "--epochs", "1", "--seed", "3", "--out", "a",
    ];
    first.extend(args);
    ok(dtsnn(tmp.path(), &first));
    let echo = fs::read_to_string(tmp.path().join("a/train.cfg")).unwrap();
    assert!(
        echo.contains("batch_size = 20") && echo.contains("seed = 3"),
        "{echo}"
    );
    ok(dtsnn(
        tmp.path(),
        &["train", "--config", "a/train.cfg", "--out", "b"],
    ));
    let a = read_metrics(&tmp.path().join("a/train-metrics.csv")).unwrap();
    let b = read_metrics(&tmp.path().join("b/train-metrics.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn train_quantize_sweep_and_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    let sizes = [
        "--set",
        "n_train=60",
        "--set",
        "n_validation=10",
        "--set",
        "n_test=10",
    ];
    let with = |base: &[&'static str]| -> Vec<&'static str> {
        base.iter().chain(&sizes).copied().collect()
    };
    ok(dtsnn(
        tmp.path(),
        &with(&["train", "--preset", "bar-mlp", "--epochs", "2"]),
    ));

    ok(dtsnn(
        tmp.path(),
        &with(&[
            "quantize",
            "--preset",
            "bar-mlp",
            "--checkpoint",
            "out/model.ckpt",
            "--sweep",
            "2,4,6,8",
        ]),
    ));
    let recs = read_metrics(&tmp.path().join("out/quantize-metrics.csv")).unwrap();
    let sweep: Vec<u64> = recs
        .iter()
        .filter(|r| r.phase == "sweep")
        .map(|r| r.step)
        .collect();
    assert_eq!(sweep, [2, 4, 6, 8]);

    fs::write(
        tmp.path().join("coef.txt"),
        "row_fetch_nj = 0.02\nfrequency_mhz = 163\n",
    )
    .unwrap();
    ok(dtsnn(
        tmp.path(),
        &with(&[
            "simulate",
            "--model",
            "out/model.q7",
            "--coefficients",
            "coef.txt",
            "--trace",
            "--samples",
            "3",
        ]),
    ));
    let recs = read_metrics(&tmp.path().join("out/simulate-metrics.csv")).unwrap();
    assert_eq!(recs.iter().filter(|r| r.metric == "cycles").count(), 3);
    let files = entries(&tmp.path().join("out"));
    for f in [
        "model.q7",
        "trace-000.csv",
        "trace-002.csv",
        "simulate.cfg",
        "quantize.cfg",
    ] {
        assert!(files.iter().any(|x| x == f), "{f} missing from {files:?}");
    }
    let top: Vec<String> = entries(tmp.path());
    assert_eq!(top, ["coef.txt", "out"]);
}

#[test]
fn eval_writes_one_row_per_step() {
    let tmp = tempfile::tempdir().unwrap();
    fake_mnist(&tmp.path().join("mnist"), 50);
    let o = ok(dtsnn(
        tmp.path(),
        &[
            "eval", "--preset", "mlp-128", "--data", "mnist", "--steps", "4", "--trials", "3",
            "--out", "ev",
        ],
    ));
    assert!(stderr(&o).contains("untrained"));
    let recs = read_metrics(&tmp.path().join("ev/eval-metrics.csv")).unwrap();
    let steps: Vec<u64> = recs.iter().map(|r| r.step).collect();
    assert_eq!(steps, [1, 2, 3, 4]);
    assert!(recs.iter().all(|r| (0.0..=1.0).contains(&r.value)));
    let echo = fs::read_to_string(tmp.path().join("ev/eval.cfg")).unwrap();
    assert!(echo.contains("trials = 3"));
}
