//! Typed experiment configuration: TOML on disk, one `[[models]]` entry per
//! model run against a shared dataset and split. The catalog functions
//! materialize the canonical configurations behind `reproduce`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::ScalerKind;
use crate::error::{Error, Result};
use crate::liealg::ExtractionMode;
use crate::models::PolyMap;
use crate::nn::OptimizerKind;
use crate::qsim::Entanglement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Table1,
    Table3,
    Table4,
    Fig7,
    SingleModel,
}

impl ExperimentKind {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Self::Table1),
            "table3" => Ok(Self::Table3),
            "table4" => Ok(Self::Table4),
            "fig7" => Ok(Self::Fig7),
            "single_model" | "single-model" => Ok(Self::SingleModel),
            other => Err(Error::Config(format!("unknown experiment kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// Builtin dataset name, or a CSV path via `path`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Label column name (CSV files only; builtin snapshots use "label").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    #[serde(default = "default_true")]
    pub has_header: bool,
    pub scaler: ScalerKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self { test_fraction: 0.3, seed: 7, stratified: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Linear,
    Qae,
    BlochQae,
    Poly,
    Pqae,
    Vqc,
}

/// Where a baseline VQC takes its encoded angles from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VqcEncoding {
    /// Scaled features fed directly (requires N = n_qubits).
    Raw,
    /// PCA down to n_qubits components.
    Pca,
}

fn default_true() -> bool {
    true
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

fn default_map_batches() -> usize {
    1
}

fn default_su_n() -> usize {
    2
}

fn default_extraction() -> ExtractionMode {
    ExtractionMode::FirstColumn
}

fn default_entanglement() -> Entanglement {
    Entanglement::Full
}

fn default_feature_reps() -> usize {
    2
}

fn default_ansatz_reps() -> usize {
    3
}

fn default_n_qubits() -> usize {
    4
}

fn default_kernel_batch() -> usize {
    32
}

fn default_vqc_epochs() -> usize {
    100
}

fn default_vqc_lr() -> f64 {
    0.05
}

/// One model to train; unused fields for a kind are simply ignored by the
/// runner but validated for consistency where they interact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Row label in the report.
    pub label: String,
    pub kind: ModelKind,
    /// Width chains for the classical stacks (autoencoders and PQAE).
    #[serde(default)]
    pub encoder_widths: Vec<usize>,
    #[serde(default)]
    pub decoder_widths: Vec<usize>,
    /// SU(n) bottleneck dimension (qae).
    #[serde(default = "default_su_n")]
    pub su_n: usize,
    /// Number of bottleneck chunks m (qae, poly).
    #[serde(default = "default_map_batches")]
    pub map_batches: usize,
    #[serde(default = "default_extraction")]
    pub extraction: ExtractionMode,
    /// Polynomial map id (poly).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly_map: Option<PolyMap>,
    /// Quantum settings (pqae, vqc).
    #[serde(default = "default_n_qubits")]
    pub n_qubits: usize,
    #[serde(default = "default_feature_reps")]
    pub feature_reps: usize,
    #[serde(default = "default_ansatz_reps")]
    pub ansatz_reps: usize,
    #[serde(default = "default_entanglement")]
    pub entanglement: Entanglement,
    /// Retained components n_d (pqae).
    #[serde(default = "default_n_qubits")]
    pub n_components: usize,
    /// KPCA batch size M (pqae).
    #[serde(default = "default_kernel_batch")]
    pub kernel_batch: usize,
    #[serde(default = "default_true")]
    pub kpca_center: bool,
    /// Baseline VQC encoding (vqc).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<VqcEncoding>,
    /// Reconstruction-phase training (autoencoders, pqae).
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    /// Classifier-phase training (pqae, vqc).
    #[serde(default = "default_vqc_epochs")]
    pub vqc_epochs: usize,
    #[serde(default = "default_vqc_lr")]
    pub vqc_learning_rate: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

impl ModelSpec {
    fn validate(&self, data_width: Option<usize>) -> Result<()> {
        let need = |cond: bool, msg: String| if cond { Ok(()) } else { Err(Error::Config(msg)) };
        need(!self.seeds.is_empty(), format!("model '{}': seeds list is empty", self.label))?;
        match self.kind {
            ModelKind::Linear | ModelKind::Qae | ModelKind::BlochQae | ModelKind::Poly => {
                need(
                    self.encoder_widths.len() >= 2 && self.decoder_widths.len() >= 2,
                    format!("model '{}': encoder_widths and decoder_widths required", self.label),
                )?;
                need(self.epochs > 0, format!("model '{}': epochs must be >= 1", self.label))?;
                if self.kind == ModelKind::Qae {
                    need(self.su_n >= 2, format!("model '{}': su_n must be >= 2", self.label))?;
                }
                if self.kind == ModelKind::Poly {
                    need(
                        self.poly_map.is_some(),
                        format!("model '{}': poly_map required for kind poly", self.label),
                    )?;
                }
            }
            ModelKind::Pqae => {
                need(
                    self.encoder_widths.len() >= 2 && self.decoder_widths.len() >= 2,
                    format!("model '{}': encoder_widths and decoder_widths required", self.label),
                )?;
                need(
                    self.n_components <= self.kernel_batch,
                    format!(
                        "model '{}': constraint n_d <= M violated (n_components={} > kernel_batch={})",
                        self.label, self.n_components, self.kernel_batch
                    ),
                )?;
                need(
                    self.n_components >= self.n_qubits,
                    format!(
                        "model '{}': constraint n_q <= n_d violated (n_qubits={} > n_components={})",
                        self.label, self.n_qubits, self.n_components
                    ),
                )?;
            }
            ModelKind::Vqc => {
                need(
                    self.encoding.is_some(),
                    format!("model '{}': encoding (raw|pca) required for kind vqc", self.label),
                )?;
            }
        }
        if let Some(width) = data_width {
            match self.kind {
                ModelKind::Linear | ModelKind::Qae | ModelKind::BlochQae | ModelKind::Poly
                | ModelKind::Pqae => {
                    need(
                        self.encoder_widths.first() == Some(&width),
                        format!(
                            "model '{}': encoder input {:?} must match data width {width}",
                            self.label,
                            self.encoder_widths.first()
                        ),
                    )?;
                }
                ModelKind::Vqc => {
                    if self.encoding == Some(VqcEncoding::Raw) {
                        need(
                            self.n_qubits == width,
                            format!(
                                "model '{}': raw encoding needs n_qubits = data width ({} vs {width})",
                                self.label, self.n_qubits
                            ),
                        )?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub dataset: DatasetSection,
    #[serde(default)]
    pub split: SplitSection,
    pub models: Vec<ModelSpec>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingArtifact(format!("config file {}", path.display()))
            } else {
                Error::Io(e)
            }
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("config encode: {e}")))
    }

    /// Structural validation; `data_width` is checked later when known.
    pub fn validate(&self, data_width: Option<usize>) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("no [[models]] entries".into()));
        }
        if self.dataset.name.is_none() && self.dataset.path.is_none() {
            return Err(Error::Config("dataset needs either name or path".into()));
        }
        if !(self.split.test_fraction > 0.0 && self.split.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "split.test_fraction {} must be in (0, 1)",
                self.split.test_fraction
            )));
        }
        for m in &self.models {
            m.validate(data_width)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Canonical configurations.

fn base_seeds(n_seeds: usize) -> Vec<u64> {
    (0..n_seeds as u64).collect()
}

fn ae_spec(
    label: &str,
    kind: ModelKind,
    enc: &[usize],
    dec: &[usize],
    epochs: usize,
    optimizer: OptimizerKind,
    lr: f64,
    seeds: &[u64],
) -> ModelSpec {
    ModelSpec {
        label: label.to_string(),
        kind,
        encoder_widths: enc.to_vec(),
        decoder_widths: dec.to_vec(),
        su_n: 2,
        map_batches: 1,
        extraction: ExtractionMode::FirstColumn,
        poly_map: None,
        n_qubits: default_n_qubits(),
        feature_reps: default_feature_reps(),
        ansatz_reps: default_ansatz_reps(),
        entanglement: Entanglement::Full,
        n_components: default_n_qubits(),
        kernel_batch: default_kernel_batch(),
        kpca_center: true,
        encoding: None,
        epochs,
        optimizer,
        learning_rate: lr,
        vqc_epochs: default_vqc_epochs(),
        vqc_learning_rate: default_vqc_lr(),
        seeds: seeds.to_vec(),
    }
}

/// Architecture table for the reconstruction studies: per dataset variant,
/// the width chains, epochs and learning rates that land in the reported
/// regimes.
struct AeRecipe {
    dataset: &'static str,
    scaler: ScalerKind,
    epochs: usize,
    lin_enc: &'static [usize],
    lin_dec: &'static [usize],
    q_enc: &'static [usize],
    q_dec: &'static [usize],
    map_batches: usize,
    bloch: bool,
    poly_map: PolyMap,
    qae_lr: f64,
}

fn recipe(variant: &str) -> Result<AeRecipe> {
    Ok(match variant {
        "iris3" | "iris" => AeRecipe {
            dataset: "iris",
            scaler: ScalerKind::L2Rows,
            epochs: 380,
            lin_enc: &[4, 3, 4],
            lin_dec: &[4, 4],
            q_enc: &[4, 3],
            q_dec: &[4, 4],
            map_batches: 1,
            bloch: false,
            poly_map: PolyMap::Squares3,
            qae_lr: 3e-3,
        },
        "seed" => AeRecipe {
            dataset: "seed",
            scaler: ScalerKind::L2Rows,
            epochs: 380,
            lin_enc: &[7, 3, 4],
            lin_dec: &[4, 7],
            q_enc: &[7, 3],
            q_dec: &[4, 7],
            map_batches: 1,
            bloch: false,
            poly_map: PolyMap::Squares3,
            qae_lr: 3e-3,
        },
        "wines" => AeRecipe {
            dataset: "wines",
            scaler: ScalerKind::MinMax01,
            epochs: 500,
            lin_enc: &[13, 12, 16],
            lin_dec: &[16, 13],
            q_enc: &[13, 12],
            q_dec: &[16, 13],
            map_batches: 4,
            bloch: false,
            poly_map: PolyMap::Squares3,
            qae_lr: 3e-3,
        },
        "iris2" => AeRecipe {
            dataset: "iris",
            scaler: ScalerKind::L2Rows,
            epochs: 120,
            lin_enc: &[4, 2],
            lin_dec: &[2, 4],
            q_enc: &[4, 2],
            q_dec: &[3, 4],
            map_batches: 1,
            bloch: true,
            poly_map: PolyMap::Squares2,
            qae_lr: 2e-3,
        },
        other => {
            return Err(Error::Config(format!(
                "unknown dataset variant '{other}' (expected iris, iris2, iris3, seed, wines)"
            )))
        }
    })
}

fn ae_models(r: &AeRecipe, seeds: &[u64], with_poly: bool) -> Vec<ModelSpec> {
    let mut lin = ae_spec(
        "linear",
        ModelKind::Linear,
        r.lin_enc,
        r.lin_dec,
        r.epochs,
        OptimizerKind::Adam,
        1e-3,
        seeds,
    );
    lin.map_batches = 1;
    let q_kind = if r.bloch { ModelKind::BlochQae } else { ModelKind::Qae };
    let q_label = if r.bloch { "bloch_qae" } else { "qae" };
    let mut qae = ae_spec(
        q_label,
        q_kind,
        r.q_enc,
        r.q_dec,
        r.epochs,
        OptimizerKind::RmsProp,
        r.qae_lr,
        seeds,
    );
    qae.map_batches = r.map_batches;
    let mut models = vec![lin, qae];
    if with_poly {
        let mut poly = ae_spec(
            "poly",
            ModelKind::Poly,
            r.q_enc,
            r.q_dec,
            r.epochs,
            OptimizerKind::Adam,
            1e-3,
            seeds,
        );
        poly.poly_map = Some(r.poly_map);
        poly.map_batches = r.map_batches;
        models.push(poly);
    }
    models
}

/// PQAE reconstruction-phase defaults shared by every table-1 pipeline.
fn pqae_spec(data_width: usize, seeds: &[u64]) -> ModelSpec {
    let mut s = ae_spec(
        "pqae_vqc",
        ModelKind::Pqae,
        &[data_width, 4],
        &[4, data_width],
        60,
        OptimizerKind::Adam,
        1e-2,
        seeds,
    );
    s.n_qubits = 4;
    s.n_components = 4;
    s.kernel_batch = 32;
    s
}

fn builtin_width(name: &str) -> Result<usize> {
    Ok(match name {
        "iris" => 4,
        "wines" => 13,
        "seed" => 7,
        "mnist_binary_8x8" => 64,
        other => return Err(Error::Config(format!("unknown dataset '{other}'"))),
    })
}

/// The canonical configuration behind `reproduce <kind>`.
pub fn canonical(
    kind: ExperimentKind,
    dataset: &str,
    n_seeds: usize,
    output_dir: &Path,
) -> Result<ExperimentConfig> {
    let seeds = base_seeds(n_seeds);
    let (dataset_section, models) = match kind {
        ExperimentKind::Table3 => {
            let r = recipe(match dataset {
                "iris" | "iris3" => "iris3",
                other => other,
            })?;
            if r.bloch {
                return Err(Error::Config("table3 covers iris, seed and wines".into()));
            }
            (
                DatasetSection {
                    name: Some(r.dataset.to_string()),
                    path: None,
                    label_column: None,
                    has_header: true,
                    scaler: r.scaler,
                },
                ae_models(&r, &seeds, false),
            )
        }
        ExperimentKind::Table4 => {
            if dataset != "iris" && dataset != "iris2" {
                return Err(Error::Config("table4 covers the iris dataset".into()));
            }
            let r = recipe("iris2")?;
            (
                DatasetSection {
                    name: Some(r.dataset.to_string()),
                    path: None,
                    label_column: None,
                    has_header: true,
                    scaler: r.scaler,
                },
                ae_models(&r, &seeds, false),
            )
        }
        ExperimentKind::Fig7 => {
            let r = recipe(dataset)?;
            (
                DatasetSection {
                    name: Some(r.dataset.to_string()),
                    path: None,
                    label_column: None,
                    has_header: true,
                    scaler: r.scaler,
                },
                ae_models(&r, &seeds, true),
            )
        }
        ExperimentKind::Table1 => {
            let width = builtin_width(dataset)?;
            let baseline_encoding =
                if dataset == "iris" { VqcEncoding::Raw } else { VqcEncoding::Pca };
            let baseline_label = if dataset == "iris" { "raw_vqc" } else { "pca_vqc" };
            let mut baseline = ae_spec(
                baseline_label,
                ModelKind::Vqc,
                &[],
                &[],
                1,
                OptimizerKind::Adam,
                default_vqc_lr(),
                &seeds,
            );
            baseline.encoding = Some(baseline_encoding);
            baseline.encoder_widths = vec![];
            baseline.decoder_widths = vec![];
            (
                DatasetSection {
                    name: Some(dataset.to_string()),
                    path: None,
                    label_column: None,
                    has_header: true,
                    scaler: ScalerKind::MinMax01,
                },
                vec![baseline, pqae_spec(width, &seeds)],
            )
        }
        ExperimentKind::SingleModel => {
            return Err(Error::Config(
                "single_model has no canonical form; provide a config file".into(),
            ))
        }
    };
    Ok(ExperimentConfig {
        experiment: ExperimentSection { kind, output_dir: output_dir.to_path_buf() },
        dataset: dataset_section,
        split: SplitSection::default(),
        models,
    })
}

/// Dataset variants a `reproduce fig7` run loops over when none is named.
pub const FIG7_VARIANTS: [&str; 4] = ["iris2", "iris3", "seed", "wines"];
