//! Dataset ingestion, normalization, splitting and the bundled benchmark
//! snapshots. Datasets are immutable once constructed.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::floatfmt;

/// A labelled numeric dataset: n rows of N features plus class labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub features: DMatrix<f64>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub feature_names: Vec<String>,
    /// Original label text per contiguous class index.
    pub label_names: Vec<String>,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples() == 0 {
            return Err(Error::InvalidArgument("dataset has no samples".into()));
        }
        if self.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("dataset contains non-finite values".into()));
        }
        if self.labels.len() != self.n_samples() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} rows",
                self.labels.len(),
                self.n_samples()
            )));
        }
        if self.labels.iter().any(|&l| l >= self.n_classes) {
            return Err(Error::InvalidArgument("label out of class range".into()));
        }
        Ok(())
    }

    /// Select rows by index, keeping metadata.
    fn subset(&self, idx: &[usize], name_suffix: &str) -> Dataset {
        let features = DMatrix::from_fn(idx.len(), self.n_features(), |r, c| {
            self.features[(idx[r], c)]
        });
        Dataset {
            name: format!("{}{name_suffix}", self.name),
            features,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            n_classes: self.n_classes,
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
        }
    }
}

/// Which column of a CSV holds the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

/// Parse a delimited numeric file into a [`Dataset`]. Labels are remapped to
/// contiguous `0..C` in order of first appearance; the mapping is recorded in
/// `label_names`.
pub fn load_csv(
    path: &Path,
    label: &LabelColumn,
    delimiter: u8,
    has_header: bool,
) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingArtifact(format!("dataset file {}", path.display()))
        } else {
            Error::Io(e)
        }
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    parse_csv(&text, &name, label, delimiter, has_header)
}

pub(crate) fn parse_csv(
    text: &str,
    name: &str,
    label: &LabelColumn,
    delimiter: u8,
    has_header: bool,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(has_header)
        .flexible(false)
        .from_reader(text.as_bytes());

    let header: Option<Vec<String>> = if has_header {
        Some(
            reader
                .headers()
                .map_err(|e| Error::Parse { line: 1, column: 0, message: e.to_string() })?
                .iter()
                .map(str::to_string)
                .collect(),
        )
    } else {
        None
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut label_idx: Option<usize> = match label {
        LabelColumn::Index(i) => Some(*i),
        LabelColumn::Name(n) => match &header {
            Some(h) => Some(h.iter().position(|c| c == n).ok_or_else(|| {
                Error::InvalidArgument(format!("label column '{n}' not in header"))
            })?),
            None => {
                return Err(Error::InvalidArgument(
                    "label column by name requires a header row".into(),
                ))
            }
        },
    };

    for (row_no, record) in reader.records().enumerate() {
        let line = row_no + 1 + usize::from(has_header);
        let record = record.map_err(|e| Error::Parse { line, column: 0, message: e.to_string() })?;
        let li = *label_idx.get_or_insert(record.len() - 1);
        if li >= record.len() {
            return Err(Error::InvalidArgument(format!(
                "label column index {li} out of range for {} columns",
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(record.len() - 1);
        for (col, field) in record.iter().enumerate() {
            if col == li {
                raw_labels.push(field.trim().to_string());
                continue;
            }
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line,
                column: col + 1,
                message: format!("expected a number, found '{field}'"),
            })?;
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line,
                    column: 0,
                    message: format!("row has {} features, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidArgument("empty dataset file".into()));
    }

    let mut label_names: Vec<String> = Vec::new();
    let labels: Vec<usize> = raw_labels
        .iter()
        .map(|raw| {
            if let Some(i) = label_names.iter().position(|l| l == raw) {
                i
            } else {
                label_names.push(raw.clone());
                label_names.len() - 1
            }
        })
        .collect();

    let width = rows[0].len();
    let li = label_idx.unwrap();
    let feature_names: Vec<String> = match &header {
        Some(h) => h
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != li)
            .map(|(_, n)| n.clone())
            .collect(),
        None => (0..width).map(|i| format!("f{i}")).collect(),
    };

    let features = DMatrix::from_fn(rows.len(), width, |r, c| rows[r][c]);
    let ds = Dataset {
        name: name.to_string(),
        features,
        labels,
        n_classes: label_names.len(),
        feature_names,
        label_names,
    };
    ds.validate()?;
    Ok(ds)
}

/// Write features + labels back out with canonical float formatting
/// (17 significant digits, bit-exact on reload).
pub fn write_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut out = std::fs::File::create(path)?;
    writeln!(out, "{},label", ds.feature_names.join(","))?;
    for r in 0..ds.n_samples() {
        let mut fields: Vec<String> = (0..ds.n_features())
            .map(|c| floatfmt::format_f64(ds.features[(r, c)]))
            .collect();
        fields.push(ds.label_names[ds.labels[r]].clone());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Feature scaling flavours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalerKind {
    /// Per-feature (x - min) / (max - min) using train statistics; eval
    /// values may leave [0, 1], and constant features map to 0.
    #[serde(rename = "minmax01")]
    MinMax01,
    /// Stateless row-wise division by the Euclidean norm.
    L2Rows,
    None,
}

/// Fitted scaling statistics (only minmax carries state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub kind: ScalerKind,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl Scaler {
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self.kind {
            ScalerKind::None => Ok(x.clone()),
            ScalerKind::MinMax01 => {
                if x.ncols() != self.mins.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "scaler fitted on width {}, got {}",
                        self.mins.len(),
                        x.ncols()
                    )));
                }
                let mut out = x.clone();
                for c in 0..x.ncols() {
                    let range = self.maxs[c] - self.mins[c];
                    for r in 0..x.nrows() {
                        out[(r, c)] = if range == 0.0 {
                            0.0
                        } else {
                            (x[(r, c)] - self.mins[c]) / range
                        };
                    }
                }
                Ok(out)
            }
            ScalerKind::L2Rows => {
                let mut out = x.clone();
                for r in 0..x.nrows() {
                    let norm = x.row(r).iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm == 0.0 {
                        return Err(Error::InvalidArgument(format!(
                            "row {r} has zero norm; cannot l2-normalize"
                        )));
                    }
                    for c in 0..x.ncols() {
                        out[(r, c)] = x[(r, c)] / norm;
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Fit on the train matrix, transform both splits.
pub fn scale_fit_transform(
    kind: ScalerKind,
    train: &DMatrix<f64>,
    eval: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>, Scaler)> {
    if eval.nrows() > 0 && train.ncols() != eval.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "train width {} vs eval width {}",
            train.ncols(),
            eval.ncols()
        )));
    }
    let scaler = match kind {
        ScalerKind::MinMax01 => {
            let mins: Vec<f64> = (0..train.ncols())
                .map(|c| train.column(c).iter().copied().fold(f64::INFINITY, f64::min))
                .collect();
            let maxs: Vec<f64> = (0..train.ncols())
                .map(|c| train.column(c).iter().copied().fold(f64::NEG_INFINITY, f64::max))
                .collect();
            Scaler { kind, mins, maxs }
        }
        _ => Scaler { kind, mins: Vec::new(), maxs: Vec::new() },
    };
    let t = scaler.transform(train)?;
    let e = if eval.nrows() == 0 { eval.clone() } else { scaler.transform(eval)? };
    Ok((t, e, scaler))
}

/// Seeded shuffle split; stratified by label when flagged. The partition is
/// a disjoint cover of the input rows.
pub fn train_test_split(
    ds: &Dataset,
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction {test_fraction} must be in (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_idx: Vec<usize> = Vec::new();
    let mut train_idx: Vec<usize> = Vec::new();
    if stratified {
        for class in 0..ds.n_classes {
            let mut members: Vec<usize> =
                (0..ds.n_samples()).filter(|&i| ds.labels[i] == class).collect();
            let k = (members.len() as f64 * test_fraction).round() as usize;
            if k == 0 || k == members.len() {
                return Err(Error::InvalidArgument(format!(
                    "class '{}' has {} samples; cannot place it in both splits",
                    ds.label_names[class],
                    members.len()
                )));
            }
            members.shuffle(&mut rng);
            test_idx.extend(&members[..k]);
            train_idx.extend(&members[k..]);
        }
    } else {
        let mut all: Vec<usize> = (0..ds.n_samples()).collect();
        all.shuffle(&mut rng);
        let k = (ds.n_samples() as f64 * test_fraction).round() as usize;
        if k == 0 || k == ds.n_samples() {
            return Err(Error::InvalidArgument("split leaves one side empty".into()));
        }
        test_idx.extend(&all[..k]);
        train_idx.extend(&all[k..]);
    }
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((ds.subset(&train_idx, "-train"), ds.subset(&test_idx, "-test")))
}

/// The four bundled benchmark snapshots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinDataset {
    Iris,
    Wines,
    Seed,
    MnistBinary8x8,
}

impl BuiltinDataset {
    pub const ALL: [BuiltinDataset; 4] = [
        BuiltinDataset::Iris,
        BuiltinDataset::Wines,
        BuiltinDataset::Seed,
        BuiltinDataset::MnistBinary8x8,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            BuiltinDataset::Iris => "iris.csv",
            BuiltinDataset::Wines => "wines.csv",
            BuiltinDataset::Seed => "seed.csv",
            BuiltinDataset::MnistBinary8x8 => "mnist_binary_8x8.csv",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BuiltinDataset::Iris => "iris",
            BuiltinDataset::Wines => "wines",
            BuiltinDataset::Seed => "seed",
            BuiltinDataset::MnistBinary8x8 => "mnist_binary_8x8",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown dataset '{name}'")))
    }

    fn csv_text(self) -> &'static str {
        match self {
            BuiltinDataset::Iris => include_str!("../datasets/iris.csv"),
            BuiltinDataset::Wines => include_str!("../datasets/wines.csv"),
            BuiltinDataset::Seed => include_str!("../datasets/seed.csv"),
            BuiltinDataset::MnistBinary8x8 => include_str!("../datasets/mnist_binary_8x8.csv"),
        }
    }
}

const MANIFEST: &str = include_str!("../datasets/manifest.sha256");

fn manifest_map() -> BTreeMap<&'static str, &'static str> {
    MANIFEST
        .lines()
        .filter(|l| !l.trim().is_empty())
        .filter_map(|l| {
            let mut parts = l.split_whitespace();
            let hash = parts.next()?;
            let file = parts.next()?;
            Some((file, hash))
        })
        .collect()
}

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// The recorded checksum of a bundled snapshot.
pub fn builtin_checksum(which: BuiltinDataset) -> Result<String> {
    manifest_map()
        .get(which.file_name())
        .map(|s| s.to_string())
        .ok_or_else(|| Error::MissingArtifact(format!("{} not in checksum manifest", which.file_name())))
}

/// Load a bundled snapshot, verifying its SHA-256 against the manifest.
pub fn load_builtin(which: BuiltinDataset) -> Result<Dataset> {
    let text = which.csv_text();
    let expected = builtin_checksum(which)?;
    let actual = sha256_hex(text);
    if actual != expected {
        return Err(Error::InvalidArgument(format!(
            "checksum mismatch for {}: manifest {expected}, computed {actual}",
            which.file_name()
        )));
    }
    parse_csv(text, which.name(), &LabelColumn::Name("label".into()), b',', true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_csv() -> &'static str {
        "a,b,label\n1,2,A\n3,4,B\n5,6,A\n"
    }

    #[test]
    fn parse_small_file() {
        let ds = parse_csv(tiny_csv(), "t", &LabelColumn::Name("label".into()), b',', true).unwrap();
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.n_classes, 2);
        assert_eq!(ds.labels, vec![0, 1, 0]);
        assert_eq!(ds.label_names, vec!["A", "B"]);
    }

    #[test]
    fn headerless_with_label_index() {
        let ds =
            parse_csv("1,2,9\n3,4,9\n5,6,8\n", "t", &LabelColumn::Index(2), b',', false).unwrap();
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.labels, vec![0, 0, 1]);
        assert_eq!(ds.feature_names, vec!["f0", "f1"]);
    }

    #[test]
    fn parse_error_names_row_and_column() {
        let bad = "a,b,label\n1,oops,A\n";
        let err = parse_csv(bad, "t", &LabelColumn::Name("label".into()), b',', true).unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_file_rejected() {
        assert!(parse_csv("a,b,label\n", "t", &LabelColumn::Index(2), b',', true).is_err());
    }

    #[test]
    fn builtin_shapes() {
        let iris = load_builtin(BuiltinDataset::Iris).unwrap();
        assert_eq!((iris.n_samples(), iris.n_features(), iris.n_classes), (150, 4, 3));
        let wines = load_builtin(BuiltinDataset::Wines).unwrap();
        assert_eq!((wines.n_samples(), wines.n_features(), wines.n_classes), (178, 13, 3));
        let seed = load_builtin(BuiltinDataset::Seed).unwrap();
        assert_eq!((seed.n_samples(), seed.n_features(), seed.n_classes), (210, 7, 3));
        let mnist = load_builtin(BuiltinDataset::MnistBinary8x8).unwrap();
        assert_eq!((mnist.n_samples(), mnist.n_features(), mnist.n_classes), (360, 64, 2));
    }

    #[test]
    fn minmax_maps_train_to_unit_interval() {
        let train = DMatrix::from_column_slice(3, 1, &[0.0, 5.0, 10.0]);
        let eval = DMatrix::from_column_slice(1, 1, &[20.0]);
        let (t, e, _) = scale_fit_transform(ScalerKind::MinMax01, &train, &eval).unwrap();
        assert_eq!(t.as_slice(), &[0.0, 0.5, 1.0]);
        assert_eq!(e[(0, 0)], 2.0); // eval values may leave [0, 1]
    }

    #[test]
    fn minmax_constant_column_maps_to_zero() {
        let train = DMatrix::from_column_slice(3, 1, &[7.0, 7.0, 7.0]);
        let (t, _, _) = scale_fit_transform(ScalerKind::MinMax01, &train, &train).unwrap();
        assert!(t.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn l2_rows_unit_norm() {
        let train = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let (t, _, _) = scale_fit_transform(ScalerKind::L2Rows, &train, &train).unwrap();
        assert!((t[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((t[(0, 1)] - 0.8).abs() < 1e-15);
        let zero = DMatrix::from_row_slice(1, 2, &[0.0, 0.0]);
        assert!(scale_fit_transform(ScalerKind::L2Rows, &zero, &zero).is_err());
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ds = parse_csv(
            "a,label\n1,x\n2,x\n3,x\n4,x\n5,x\n6,x\n7,x\n8,x\n9,x\n10,x\n",
            "t",
            &LabelColumn::Name("label".into()),
            b',',
            true,
        )
        .unwrap();
        let (tr, te) = train_test_split(&ds, 0.3, 5, false).unwrap();
        assert_eq!((tr.n_samples(), te.n_samples()), (7, 3));
        let (tr2, te2) = train_test_split(&ds, 0.3, 5, false).unwrap();
        assert_eq!(tr.features, tr2.features);
        assert_eq!(te.features, te2.features);
    }

    #[test]
    fn stratified_iris_split_counts() {
        let iris = load_builtin(BuiltinDataset::Iris).unwrap();
        let (tr, te) = train_test_split(&iris, 0.3, 7, true).unwrap();
        assert_eq!(te.n_samples(), 45);
        assert_eq!(tr.n_samples(), 105);
        for class in 0..3 {
            assert_eq!(te.labels.iter().filter(|&&l| l == class).count(), 15);
        }
        // disjoint cover
        assert_eq!(tr.n_samples() + te.n_samples(), iris.n_samples());
    }

    #[test]
    fn split_rejects_tiny_class() {
        let ds = parse_csv(
            "a,label\n1,x\n2,x\n3,x\n4,y\n",
            "t",
            &LabelColumn::Name("label".into()),
            b',',
            true,
        )
        .unwrap();
        assert!(train_test_split(&ds, 0.3, 1, true).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roundtrip.csv");
        let ds = parse_csv(
            "a,b,label\n0.1,0.30000000000000004,p\n-7.25e-12,3.0,q\n",
            "t",
            &LabelColumn::Name("label".into()),
            b',',
            true,
        )
        .unwrap();
        write_csv(&ds, &path).unwrap();
        let back = load_csv(&path, &LabelColumn::Name("label".into()), b',', true).unwrap();
        assert_eq!(ds.features, back.features);
        assert_eq!(ds.labels, back.labels);
    }
}
