//! Command-surface tests: arguments, exit codes, emitted files.

use std::path::Path;
use std::process::{Command, Output};

use qdimred::data::{Scaler, ScalerKind};
use qdimred::experiment::PqaeCheckpoint;
use qdimred::nn::{LayerStack, OptimizerHyper, OptimizerKind, OptimizerState};
use qdimred::qsim::{Entanglement, FeatureMapSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn qdimred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdimred"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_checkpoint(path: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let encoder = LayerStack::init(&[4, 4], &mut rng).unwrap();
    let decoder = LayerStack::init(&[4, 4], &mut rng).unwrap();
    let fm = FeatureMapSpec::new(4, 2, Entanglement::Full).unwrap();
    let model = qdimred::models::PqaeModel::new(encoder, decoder, fm, 4, 32, true).unwrap();
    let scaler = Scaler {
        kind: ScalerKind::MinMax01,
        mins: vec![0.0; 4],
        maxs: vec![2.0; 4],
    };
    let opt = OptimizerState::new(OptimizerKind::Adam, OptimizerHyper::default(), model.param_len());
    PqaeCheckpoint::of(&model, &scaler, &opt).save(path).unwrap();
}

#[test]
fn info_dataset_prints_shape() {
    let out = qdimred(&["info", "dataset", "wines"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("n=178, N=13, C=3"), "{text}");
}

#[test]
fn info_unknown_dataset_exits_2() {
    let out = qdimred(&["info", "dataset", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_command_exits_2() {
    let out = qdimred(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn encode_missing_checkpoint_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdimred(&[
        "encode",
        "--checkpoint",
        "/nonexistent/ckpt.json",
        "--input",
        dir.path().join("in.csv").to_str().unwrap(),
        "--output",
        dir.path().join("out.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn encode_writes_n_q_columns() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("ckpt.json");
    write_checkpoint(&ckpt);
    let input = dir.path().join("in.csv");
    std::fs::write(&input, "0.1,0.2,0.3,0.4\n1.0,1.1,1.2,1.3\n0.5,0.5,0.5,0.5\n0,0,0,0\n2,2,2,2\n")
        .unwrap();
    let output = dir.path().join("out.csv");
    let out = qdimred(&[
        "encode",
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&output).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        assert_eq!(row.split(',').count(), 4);
    }
}

#[test]
fn invalid_config_exits_2_naming_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(
        &config,
        r#"
[experiment]
kind = "single_model"
output_dir = "OUT"

[dataset]
name = "iris"
scaler = "minmax01"

[[models]]
label = "pqae"
kind = "pqae"
encoder_widths = [4, 4]
decoder_widths = [4, 4]
n_components = 4
kernel_batch = 2
epochs = 1
optimizer = "adam"
learning_rate = 0.001
"#
        .replace("OUT", dir.path().join("out").to_str().unwrap()),
    )
    .unwrap();
    let out = qdimred(&["run", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("n_d <= M"), "{err}");
}

#[test]
fn missing_config_exits_4() {
    let out = qdimred(&["run", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn run_single_model_writes_report_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let config = dir.path().join("tiny.toml");
    std::fs::write(
        &config,
        r#"
[experiment]
kind = "single_model"
output_dir = "OUT"

[dataset]
name = "iris"
scaler = "l2_rows"

[split]
test_fraction = 0.3
seed = 7
stratified = true

[[models]]
label = "linear"
kind = "linear"
encoder_widths = [4, 3]
decoder_widths = [3, 4]
epochs = 5
optimizer = "adam"
learning_rate = 0.001
seeds = [0, 1]
"#
        .replace("OUT", out_dir.to_str().unwrap()),
    )
    .unwrap();
    let out = qdimred(&["run", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("report.json").exists());
    assert!(out_dir.join("metrics.csv").exists());
    // the lock is released after the run
    assert!(!out_dir.join(".qdimred.lock").exists());
    let report = qdimred::experiment::ExperimentReport::from_json(
        &std::fs::read_to_string(out_dir.join("report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report.rows.len(), 1);
    report.rows[0].check_invariant().unwrap();
    let csv = std::fs::read_to_string(out_dir.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3); // header + 2 seeds
}

#[test]
fn reproduce_unknown_kind_exits_2() {
    let out = qdimred(&["reproduce", "table9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reproduce_table4_emits_both_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdimred(&[
        "reproduce",
        "table4",
        "--dataset",
        "iris",
        "--seeds",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("linear"), "{text}");
    assert!(text.contains("bloch_qae"), "{text}");
    assert!(text.contains("latent=2"), "{text}");
    let report = qdimred::experiment::ExperimentReport::from_json(
        &std::fs::read_to_string(dir.path().join("report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.rows[0].latent_dim, Some(2));
}
