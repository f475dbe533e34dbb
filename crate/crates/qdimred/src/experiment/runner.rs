//! Executes an [`ExperimentConfig`]: resolve dataset, split, scale, train
//! every model entry across its seeds, select best seeds, and write the
//! report plus checkpoints. One experiment per output directory at a time
//! (lock file); per-seed runs may parallelize under `QDIMRED_THREADS` with
//! bit-identical results.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{
    self, load_builtin, scale_fit_transform, train_test_split, BuiltinDataset, Dataset,
    LabelColumn,
};
use crate::error::{Error, Result};
use crate::experiment::checkpoint::PqaeCheckpoint;
use crate::experiment::config::{
    canonical, DatasetSection, ExperimentConfig, ExperimentKind, ModelKind, ModelSpec,
    VqcEncoding, FIG7_VARIANTS,
};
use crate::experiment::report::{ExperimentReport, ReportRow, SeedMetric, Selection};
use crate::kernels::{pca_fit, pca_transform};
use crate::models::{
    ae_train, pqae_train, vqc_evaluate, vqc_train, AeTrainOptions, Autoencoder, PqaeModel,
    VqcModel, VqcTrainOptions,
};
use crate::nn::{LayerStack, OptimizerHyper, OptimizerState};
use crate::parallel;
use crate::qsim::{AnsatzSpec, FeatureMapSpec};

/// Exclusive ownership of an output directory for the duration of a run.
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(".qdimred.lock");
        match std::fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Config(format!(
                "output directory {} is locked by another run (remove {} if stale)",
                dir.display(),
                path.display()
            ))),
            Err(e) => Err(Error::Io(e)),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

fn resolve_dataset(section: &DatasetSection) -> Result<(Dataset, BTreeMap<String, String>)> {
    let mut checksums = BTreeMap::new();
    let ds = if let Some(name) = &section.name {
        let which = BuiltinDataset::from_name(name)?;
        checksums.insert(which.file_name().to_string(), data::builtin_checksum(which)?);
        load_builtin(which)?
    } else if let Some(path) = &section.path {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingArtifact(format!("dataset file {}", path.display()))
            } else {
                Error::Io(e)
            }
        })?;
        checksums.insert(
            path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            data::sha256_hex(&text),
        );
        let label = section
            .label_column
            .clone()
            .map(LabelColumn::Name)
            .unwrap_or(LabelColumn::Name("label".to_string()));
        data::load_csv(path, &label, b',', section.has_header)?
    } else {
        return Err(Error::Config("dataset needs either name or path".into()));
    };
    Ok((ds, checksums))
}

struct SeedRun {
    metric: SeedMetric,
    pqae: Option<Box<(PqaeModel, OptimizerState)>>,
}

fn build_autoencoder(spec: &ModelSpec, rng: &mut ChaCha8Rng) -> Result<Autoencoder> {
    match spec.kind {
        ModelKind::Linear => Autoencoder::linear(&spec.encoder_widths, &spec.decoder_widths, rng),
        ModelKind::Qae => Autoencoder::su(
            &spec.encoder_widths,
            &spec.decoder_widths,
            spec.su_n,
            spec.map_batches,
            spec.extraction,
            rng,
        ),
        ModelKind::BlochQae => Autoencoder::bloch(&spec.encoder_widths, &spec.decoder_widths, rng),
        ModelKind::Poly => Autoencoder::poly(
            &spec.encoder_widths,
            &spec.decoder_widths,
            spec.poly_map.ok_or_else(|| Error::Config("poly model without poly_map".into()))?,
            spec.map_batches,
            rng,
        ),
        _ => Err(Error::Config("not an autoencoder kind".into())),
    }
}

fn run_ae_seed(
    spec: &ModelSpec,
    train: &DMatrix<f64>,
    test: &DMatrix<f64>,
    seed: u64,
) -> Result<SeedRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = build_autoencoder(spec, &mut rng)?;
    let opts = AeTrainOptions {
        epochs: spec.epochs,
        optimizer: spec.optimizer,
        learning_rate: spec.learning_rate,
    };
    let history = ae_train(&mut model, train, test, &opts)?;
    let last = history.last().expect("epochs >= 1");
    Ok(SeedRun {
        metric: SeedMetric { seed, train_value: last.train_mse, test_value: last.test_mse },
        pqae: None,
    })
}

fn vqc_specs(spec: &ModelSpec) -> Result<(FeatureMapSpec, AnsatzSpec)> {
    Ok((
        FeatureMapSpec::new(spec.n_qubits, spec.feature_reps, spec.entanglement)?,
        AnsatzSpec::new(spec.n_qubits, spec.ansatz_reps, spec.entanglement)?,
    ))
}

fn run_vqc_baseline_seed(
    spec: &ModelSpec,
    train_x: &DMatrix<f64>,
    train_y: &[usize],
    test_x: &DMatrix<f64>,
    test_y: &[usize],
    n_classes: usize,
    seed: u64,
) -> Result<SeedRun> {
    let (fm, ansatz) = vqc_specs(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = VqcModel::new(fm, ansatz, n_classes, &mut rng)?;
    let opts = VqcTrainOptions { epochs: spec.vqc_epochs, learning_rate: spec.vqc_learning_rate };
    let history = vqc_train(&mut model, train_x, train_y, test_x, test_y, &opts)?;
    let test_accuracy = history.last().map(|e| e.test_accuracy).unwrap_or(0.0);
    let train_accuracy = vqc_evaluate(&model, train_x, train_y)?;
    Ok(SeedRun {
        metric: SeedMetric { seed, train_value: train_accuracy, test_value: test_accuracy },
        pqae: None,
    })
}

fn run_pqae_seed(
    spec: &ModelSpec,
    train_x: &DMatrix<f64>,
    train_y: &[usize],
    test_x: &DMatrix<f64>,
    test_y: &[usize],
    n_classes: usize,
    seed: u64,
) -> Result<SeedRun> {
    let (fm, ansatz) = vqc_specs(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let encoder = LayerStack::init(&spec.encoder_widths, &mut rng)?;
    let decoder = LayerStack::init(&spec.decoder_widths, &mut rng)?;
    let mut model = PqaeModel::new(
        encoder,
        decoder,
        fm,
        spec.n_components,
        spec.kernel_batch,
        spec.kpca_center,
    )?;
    let mut opt = OptimizerState::new(
        spec.optimizer,
        OptimizerHyper::with_learning_rate(spec.learning_rate),
        model.param_len(),
    );
    pqae_train(&mut model, train_x, spec.epochs, &mut opt, &mut rng)?;

    // The downstream classifier must consume the very feature map the
    // encoder was trained against.
    let mut vqc = VqcModel::new(model.feature_map, ansatz, n_classes, &mut rng)?;
    if vqc.feature_map != model.feature_map {
        return Err(Error::Config("PQAE and VQC feature maps diverged".into()));
    }
    let enc_train = model.encode_rows(train_x)?;
    let enc_test = model.encode_rows(test_x)?;
    let opts = VqcTrainOptions { epochs: spec.vqc_epochs, learning_rate: spec.vqc_learning_rate };
    let history = vqc_train(&mut vqc, &enc_train, train_y, &enc_test, test_y, &opts)?;
    let test_accuracy = history.last().map(|e| e.test_accuracy).unwrap_or(0.0);
    let train_accuracy = vqc_evaluate(&vqc, &enc_train, train_y)?;
    Ok(SeedRun {
        metric: SeedMetric { seed, train_value: train_accuracy, test_value: test_accuracy },
        pqae: Some(Box::new((model, opt))),
    })
}

struct ModelOutcome {
    row: ReportRow,
    checkpoint: Option<Box<(PqaeModel, OptimizerState)>>,
}

fn run_model(
    spec: &ModelSpec,
    train_x: &DMatrix<f64>,
    train_y: &[usize],
    test_x: &DMatrix<f64>,
    test_y: &[usize],
    n_classes: usize,
) -> Result<ModelOutcome> {
    let kind_name = match spec.kind {
        ModelKind::Linear => "linear",
        ModelKind::Qae => "qae",
        ModelKind::BlochQae => "bloch_qae",
        ModelKind::Poly => "poly",
        ModelKind::Pqae => "pqae",
        ModelKind::Vqc => "vqc",
    };
    let is_ae = matches!(
        spec.kind,
        ModelKind::Linear | ModelKind::Qae | ModelKind::BlochQae | ModelKind::Poly
    );

    // For the PCA baseline the projection is fit once per split, not per seed.
    let (enc_train, enc_test);
    let (vqc_train_x, vqc_test_x) = if spec.kind == ModelKind::Vqc {
        match spec.encoding {
            Some(VqcEncoding::Pca) => {
                let pca = pca_fit(train_x, spec.n_qubits)?;
                enc_train = pca_transform(&pca, train_x)?;
                enc_test = pca_transform(&pca, test_x)?;
                (&enc_train, &enc_test)
            }
            _ => (train_x, test_x),
        }
    } else {
        (train_x, test_x)
    };

    let runs: Vec<SeedRun> = parallel::map_indexed(&spec.seeds, |&seed| match spec.kind {
        _ if is_ae => run_ae_seed(spec, train_x, test_x, seed),
        ModelKind::Pqae => {
            run_pqae_seed(spec, train_x, train_y, test_x, test_y, n_classes, seed)
        }
        ModelKind::Vqc => run_vqc_baseline_seed(
            spec,
            vqc_train_x,
            train_y,
            vqc_test_x,
            test_y,
            n_classes,
            seed,
        ),
        _ => unreachable!(),
    })?;

    let (metric_name, selection) = if is_ae {
        ("mse", Selection::MinTestValue)
    } else {
        ("accuracy", Selection::MaxTestValue)
    };
    let latent_dim = if is_ae {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        Some(build_autoencoder(spec, &mut rng)?.latent_dim())
    } else {
        None
    };
    let metrics: Vec<SeedMetric> = runs.iter().map(|r| r.metric).collect();
    let row = ReportRow::select_best(
        &spec.label,
        kind_name,
        metric_name,
        selection,
        metrics,
        latent_dim,
    )?;
    let checkpoint = runs
        .into_iter()
        .find(|r| r.metric.seed == row.best_seed)
        .and_then(|r| r.pqae);
    Ok(ModelOutcome { row, checkpoint })
}

/// Run every model entry of the configuration and write the report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate(None)?;
    let started = Instant::now();
    let (dataset, checksums) = resolve_dataset(&config.dataset)?;
    config.validate(Some(dataset.n_features()))?;
    let out_dir = config.experiment.output_dir.clone();
    let _lock = DirLock::acquire(&out_dir)?;

    let (train, test) = train_test_split(
        &dataset,
        config.split.test_fraction,
        config.split.seed,
        config.split.stratified,
    )?;
    let (train_x, test_x, scaler) =
        scale_fit_transform(config.dataset.scaler, &train.features, &test.features)?;

    let mut rows = Vec::with_capacity(config.models.len());
    let mut checkpoints: Vec<(String, Box<(PqaeModel, OptimizerState)>)> = Vec::new();
    for spec in &config.models {
        let outcome = match run_model(
            spec,
            &train_x,
            &train.labels,
            &test_x,
            &test.labels,
            dataset.n_classes,
        ) {
            Ok(outcome) => outcome,
            Err(e @ Error::Divergence(_)) => {
                // keep whatever finished before the divergence
                let partial = ExperimentReport {
                    config: config.clone(),
                    dataset_checksums: checksums,
                    rows,
                    wall_clock_seconds: started.elapsed().as_secs_f64(),
                };
                partial.write_to(&out_dir)?;
                return Err(e);
            }
            Err(e) => return Err(e),
        };
        if let Some(ck) = outcome.checkpoint {
            checkpoints.push((spec.label.clone(), ck));
        }
        rows.push(outcome.row);
    }

    let report = ExperimentReport {
        config: config.clone(),
        dataset_checksums: checksums,
        rows,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    report.write_to(&out_dir)?;
    for (label, boxed) in checkpoints {
        let (model, opt) = &*boxed;
        let ck = PqaeCheckpoint::of(model, &scaler, opt);
        ck.save(&out_dir.join(format!("{label}_checkpoint.json")))?;
    }
    Ok(report)
}

/// Canonical runs behind `reproduce`: returns (variant name, report) pairs.
/// `fig7` with no dataset runs all four variants into subdirectories.
pub fn run_reproduce(
    kind: ExperimentKind,
    dataset: Option<&str>,
    n_seeds: usize,
    out: &Path,
) -> Result<Vec<(String, ExperimentReport)>> {
    match (kind, dataset) {
        (ExperimentKind::Fig7, None) => {
            let mut reports = Vec::new();
            for variant in FIG7_VARIANTS {
                let cfg = canonical(kind, variant, n_seeds, &out.join(variant))?;
                reports.push((variant.to_string(), run_experiment(&cfg)?));
            }
            Ok(reports)
        }
        (_, maybe) => {
            let name = maybe.unwrap_or("iris");
            let cfg = canonical(kind, name, n_seeds, out)?;
            Ok(vec![(name.to_string(), run_experiment(&cfg)?)])
        }
    }
}

/// Applies a trained encoder checkpoint to a CSV of feature rows and writes
/// the encoded angles as an n_q-column CSV.
pub fn encode_with_checkpoint(
    checkpoint_path: &Path,
    input_csv: &Path,
    output_csv: &Path,
) -> Result<usize> {
    let ck = PqaeCheckpoint::load(checkpoint_path)?;
    let (model, scaler) = ck.rebuild()?;
    let text = std::fs::read_to_string(input_csv).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingArtifact(format!("input file {}", input_csv.display()))
        } else {
            Error::Io(e)
        }
    })?;
    let rows = parse_feature_rows(&text, model.encoder.in_dim())?;
    let scaled = scaler.transform(&rows)?;
    let encoded = model.encode_rows(&scaled)?;
    let mut out = String::new();
    for r in 0..encoded.nrows() {
        let fields: Vec<String> = (0..encoded.ncols())
            .map(|c| crate::floatfmt::format_f64(encoded[(r, c)]))
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    std::fs::write(output_csv, out)?;
    Ok(encoded.nrows())
}

/// Parse a headerless CSV of plain feature rows (no label column).
fn parse_feature_rows(text: &str, width: usize) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(width);
        for (col, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: line_no + 1,
                column: col + 1,
                message: format!("expected a number, found '{field}'"),
            })?;
            row.push(v);
        }
        if row.len() != width {
            return Err(Error::Parse {
                line: line_no + 1,
                column: 0,
                message: format!("expected {width} features, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidArgument("empty input file".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), width, |r, c| rows[r][c]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lock_excludes_concurrent_runs() {
        let dir = tempfile::tempdir().unwrap();
        let lock = DirLock::acquire(dir.path()).unwrap();
        assert!(DirLock::acquire(dir.path()).is_err());
        drop(lock);
        assert!(DirLock::acquire(dir.path()).is_ok());
    }

    #[test]
    fn feature_rows_parse_and_validate() {
        let m = parse_feature_rows("1,2\n3,4\n", 2).unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert!(parse_feature_rows("1,2\n3\n", 2).is_err());
        assert!(parse_feature_rows("a,b\n", 2).is_err());
    }
}
