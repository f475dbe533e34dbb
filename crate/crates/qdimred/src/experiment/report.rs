//! Experiment reports: per-seed metrics, best-seed selection under a
//! declared criterion, the fully resolved config echo, and dataset
//! checksums. Written as JSON (canonical float format) plus a CSV metric
//! table.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::config::ExperimentConfig;
use crate::floatfmt;

/// How the best seed is picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    MinTestValue,
    MaxTestValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedMetric {
    pub seed: u64,
    pub train_value: f64,
    pub test_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub kind: String,
    /// What the values measure: "mse" or "accuracy".
    pub metric: String,
    pub selection: Selection,
    pub per_seed: Vec<SeedMetric>,
    pub best_seed: u64,
    pub best_test_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latent_dim: Option<usize>,
}

impl ReportRow {
    /// Selection is a pure function of the per-seed metrics.
    pub fn select_best(
        label: &str,
        kind: &str,
        metric: &str,
        selection: Selection,
        per_seed: Vec<SeedMetric>,
        latent_dim: Option<usize>,
    ) -> Result<Self> {
        if per_seed.is_empty() {
            return Err(Error::InvalidArgument("no per-seed metrics".into()));
        }
        let best = per_seed
            .iter()
            .reduce(|a, b| {
                let better = match selection {
                    Selection::MinTestValue => b.test_value < a.test_value,
                    Selection::MaxTestValue => b.test_value > a.test_value,
                };
                if better {
                    b
                } else {
                    a
                }
            })
            .unwrap();
        Ok(Self {
            label: label.to_string(),
            kind: kind.to_string(),
            metric: metric.to_string(),
            selection,
            per_seed: per_seed.clone(),
            best_seed: best.seed,
            best_test_value: best.test_value,
            latent_dim,
        })
    }

    /// Re-checks the selection invariant (used by the schema test).
    pub fn check_invariant(&self) -> Result<()> {
        let expected = match self.selection {
            Selection::MinTestValue => {
                self.per_seed.iter().map(|m| m.test_value).fold(f64::INFINITY, f64::min)
            }
            Selection::MaxTestValue => {
                self.per_seed.iter().map(|m| m.test_value).fold(f64::NEG_INFINITY, f64::max)
            }
        };
        if self.best_test_value != expected {
            return Err(Error::InvalidArgument(format!(
                "row '{}': best_test_value {} is not the {:?} of per-seed values",
                self.label, self.best_test_value, self.selection
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// Fully resolved configuration; re-running it reproduces every metric.
    pub config: ExperimentConfig,
    pub dataset_checksums: BTreeMap<String, String>,
    pub rows: Vec<ReportRow>,
    pub wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        floatfmt::to_json_string(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("report parse: {e}")))
    }

    /// CSV metric table: one line per (row, seed) plus best-of lines.
    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("label,kind,metric,seed,train_value,test_value,is_best\n");
        for row in &self.rows {
            for m in &row.per_seed {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    row.label,
                    row.kind,
                    row.metric,
                    m.seed,
                    floatfmt::format_f64(m.train_value),
                    floatfmt::format_f64(m.test_value),
                    if m.seed == row.best_seed { 1 } else { 0 },
                ));
            }
        }
        out
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        std::fs::write(dir.join("metrics.csv"), self.metrics_csv())?;
        Ok(())
    }

    pub fn row(&self, label: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics() -> Vec<SeedMetric> {
        vec![
            SeedMetric { seed: 0, train_value: 0.5, test_value: 0.4 },
            SeedMetric { seed: 1, train_value: 0.3, test_value: 0.6 },
            SeedMetric { seed: 2, train_value: 0.2, test_value: 0.5 },
        ]
    }

    #[test]
    fn min_selection_picks_lowest_test_value() {
        let row =
            ReportRow::select_best("m", "linear", "mse", Selection::MinTestValue, metrics(), None)
                .unwrap();
        assert_eq!(row.best_seed, 0);
        assert_eq!(row.best_test_value, 0.4);
        row.check_invariant().unwrap();
    }

    #[test]
    fn max_selection_picks_highest_test_value() {
        let row =
            ReportRow::select_best("m", "vqc", "accuracy", Selection::MaxTestValue, metrics(), None)
                .unwrap();
        assert_eq!(row.best_seed, 1);
        row.check_invariant().unwrap();
    }

    #[test]
    fn invariant_detects_tampering() {
        let mut row =
            ReportRow::select_best("m", "vqc", "accuracy", Selection::MaxTestValue, metrics(), None)
                .unwrap();
        row.best_test_value = 0.99;
        assert!(row.check_invariant().is_err());
    }
}
